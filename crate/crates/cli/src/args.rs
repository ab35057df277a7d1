use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "fft3d",
    version,
    about = "Multi-FPGA 3D FFT models, simulators and verifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an oracle and invariant suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Generate prediction, comparison, bandwidth or timeline tables.
    Predict(PredictArgs),
    /// Run the distributed 3D FFT on a grid file.
    Simulate(SimulateArgs),
    /// Write a synthetic input grid file.
    Grid(GridArgs),
}

impl Command {
    pub fn config_path(&self) -> Option<&Path> {
        match self {
            Command::Verify(a) => a.config.as_deref(),
            Command::Predict(a) => a.config.as_deref(),
            Command::Simulate(a) => a.config.as_deref(),
            Command::Grid(a) => a.config.as_deref(),
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// fft, tables, dist or all.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Butterfly rows per engine.
    #[arg(long)]
    pub r: Option<usize>,
    /// Floating-point operator latency in cycles.
    #[arg(long)]
    pub l_op: Option<u32>,
    /// Engine clock in MHz.
    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long)]
    pub pu: Option<usize>,
    #[arg(long)]
    pub pv: Option<usize>,
    /// Random input vectors per check.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// times, arch, fixed-q, bandwidth or timeline. Defaults to bandwidth
    /// when a topology is given, times otherwise.
    #[arg(long)]
    pub table: Option<String>,
    /// csv or md.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Grid sides, comma separated for the times table.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    /// Node counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u64>,
    /// Field components, comma separated for the times table.
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    /// Engines per node for the fixed-q table.
    #[arg(long)]
    pub q: Option<u32>,
    /// Engine clock in MHz.
    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long)]
    pub device_bytes: Option<u64>,
    /// table or printed streaming time form.
    #[arg(long)]
    pub form: Option<String>,
    /// switched or torus.
    #[arg(long)]
    pub topology: Option<String>,
    /// Largest sqrt(P) on the bandwidth curve.
    #[arg(long)]
    pub max_side: Option<u64>,
    /// Link capacities in Gb/s, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub link: Vec<f64>,
    /// sequential or pipelined, for the timeline.
    #[arg(long)]
    pub arch: Option<String>,
    #[arg(long)]
    pub pu: Option<u64>,
    #[arg(long)]
    pub pv: Option<u64>,
    #[arg(long)]
    pub l_op: Option<u32>,
    #[arg(long)]
    pub l_dma: Option<u64>,
    #[arg(long)]
    pub l_comm: Option<u64>,
    /// Pipelined timeline with a doubled X stage.
    #[arg(long)]
    pub doubled_x: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input grid file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output spectrum grid file.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output traffic ledger CSV.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    #[arg(long)]
    pub pu: Option<usize>,
    #[arg(long)]
    pub pv: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub l_op: Option<u32>,
    /// Carry transposes as UDP frames and write a pcap capture.
    #[arg(long)]
    pub wire: bool,
    /// Capture path; defaults to the spectrum path with a .pcap extension.
    #[arg(long)]
    pub pcap: Option<PathBuf>,
    /// 1g, 10g, 40g-128, 40g-256 or 100g.
    #[arg(long)]
    pub datapath: Option<String>,
    /// Compare against the direct 3D DFT (N up to 64).
    #[arg(long)]
    pub check_oracle: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// delta, ones or random.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub mu: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Store complex words instead of real ones.
    #[arg(long)]
    pub complex: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

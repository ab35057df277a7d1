//! Flat `key = value` configuration files merged under command-line flags.
//!
//! Keys are the long flag names; `_` and `-` are interchangeable. Lists are
//! comma separated, booleans accept `true/false`, `yes/no` or `1/0`, and `#`
//! starts a comment.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use fft3d_core::dist_sim::SimOptions;
use fft3d_core::domain::{PencilGrid, DEVICE_MEMORY_BYTES};
use fft3d_core::fft_pipeline::{engine_metrics, EngineConfig, OperatorLatency};
use fft3d_core::perf_model::{
    ArchKind, ArchSpec, PredictParams, StreamingForm, Topology, DEFAULT_PREDICT_NS,
    DEFAULT_PREDICT_PS,
};
use fft3d_core::udp_codec::DatapathConfig;

use crate::args::{Command, GridArgs, PredictArgs, SimulateArgs, VerifyArgs};

#[derive(Debug, Default)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        cfg.path = Some(path.to_path_buf());
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            let key = normalize(key);
            if key.is_empty() {
                bail!("line {}: empty key", i + 1);
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                bail!("line {}: duplicate key {key:?}", i + 1);
            }
        }
        Ok(ConfigFile { path: None, values })
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    /// The flag if given, else the file value.
    fn value<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.take_raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        raw.map(|s| {
            s.parse::<T>()
                .map_err(|e| anyhow!("config key {key}: {s:?}: {e}"))
        })
        .transpose()
    }

    fn list<T>(&mut self, key: &str, flag: Vec<T>) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.take_raw(key);
        if !flag.is_empty() {
            return Ok(Some(flag));
        }
        raw.map(|s| {
            s.split(',')
                .map(|item| {
                    let item = item.trim();
                    item.parse::<T>()
                        .map_err(|e| anyhow!("config key {key}: {item:?}: {e}"))
                })
                .collect()
        })
        .transpose()
    }

    fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let raw = self.take_raw(key);
        if flag {
            return Ok(true);
        }
        match raw.as_deref() {
            None => Ok(false),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(other) => bail!("config key {key}: {other:?} is not a boolean"),
        }
    }

    /// Fails on keys the command did not consume.
    fn finish(self, command: &str) -> Result<()> {
        if self.values.is_empty() {
            return Ok(());
        }
        let keys: Vec<&str> = self.values.keys().map(String::as_str).collect();
        let origin = self
            .path
            .as_ref()
            .map_or(String::new(), |p| format!(" in {}", p.display()));
        bail!("unknown {command} key(s){origin}: {}", keys.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            _ => Err("expected csv or md".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fft,
    Tables,
    Dist,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fft" => Ok(Suite::Fft),
            "tables" => Ok(Suite::Tables),
            "dist" => Ok(Suite::Dist),
            "all" => Ok(Suite::All),
            _ => Err("expected fft, tables, dist or all".into()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub engine: Option<EngineConfig>,
    pub tables: bool,
    pub dist: Option<(PencilGrid, usize)>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct BandwidthJob {
    pub topology: Topology,
    pub rows: u32,
    pub t_clk: f64,
    pub max_side: u64,
    pub links_gbps: Vec<f64>,
    /// Explicit node counts instead of the `√P = 1..max_side` sweep.
    pub ps: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub enum PredictJob {
    Times(PredictParams),
    Arch { mu: u32, k: u32 },
    FixedQ { mu: u32, q: u32 },
    Bandwidth(BandwidthJob),
    Timeline(ArchSpec),
}

#[derive(Debug, Clone)]
pub struct PredictConfig {
    pub job: PredictJob,
    pub format: Format,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub ledger: PathBuf,
    pub pu: usize,
    pub pv: usize,
    pub options: SimOptions,
    pub pcap: Option<PathBuf>,
    pub check_oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Delta,
    Ones,
    Random,
}

impl FromStr for GridKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "delta" => Ok(GridKind::Delta),
            "ones" => Ok(GridKind::Ones),
            "random" => Ok(GridKind::Random),
            _ => Err("expected delta, ones or random".into()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub kind: GridKind,
    pub n: usize,
    pub mu: usize,
    pub seed: u64,
    pub complex: bool,
    pub output: PathBuf,
}

/// A fully resolved and validated invocation.
#[derive(Debug, Clone)]
pub enum ExperimentConfig {
    Verify(VerifyConfig),
    Predict(PredictConfig),
    Simulate(SimulateConfig),
    Grid(GridConfig),
}

fn mhz_to_hz(f: f64) -> Result<f64> {
    if !(f.is_finite() && f > 0.0) {
        bail!("clock frequency must be positive, got {f} MHz");
    }
    Ok(f * 1e6)
}

fn parse_with<T>(
    key: &str,
    s: Option<String>,
    parse: impl Fn(&str) -> fft3d_core::Result<T>,
) -> Result<Option<T>> {
    s.map(|s| parse(&s).with_context(|| format!("--{key}")))
        .transpose()
}

impl ExperimentConfig {
    pub fn resolve(command: &Command, file: ConfigFile) -> Result<Self> {
        Ok(match command {
            Command::Verify(a) => ExperimentConfig::Verify(resolve_verify(a, file)?),
            Command::Predict(a) => ExperimentConfig::Predict(resolve_predict(a, file)?),
            Command::Simulate(a) => ExperimentConfig::Simulate(resolve_simulate(a, file)?),
            Command::Grid(a) => ExperimentConfig::Grid(resolve_grid(a, file)?),
        })
    }
}

fn resolve_verify(a: &VerifyArgs, mut file: ConfigFile) -> Result<VerifyConfig> {
    let suite: Suite = file
        .value("suite", a.suite.clone())?
        .map(|s| s.parse().map_err(|e: String| anyhow!("--suite {s:?}: {e}")))
        .transpose()?
        .unwrap_or(Suite::All);
    let n = file.value("n", a.n)?;
    let rows = file.value("r", a.r)?;
    let l_op = file.value("l-op", a.l_op)?.unwrap_or(3);
    let f_hz = mhz_to_hz(file.value("f", a.f)?.unwrap_or(250.0))?;
    let pu = file.value("pu", a.pu)?.unwrap_or(2);
    let pv = file.value("pv", a.pv)?.unwrap_or(2);
    let trials = file.value("trials", a.trials)?.unwrap_or(4);
    let seed = file.value("seed", a.seed)?.unwrap_or(1);
    file.finish("verify")?;
    if trials == 0 {
        bail!("--trials must be at least 1");
    }

    let engine = matches!(suite, Suite::Fft | Suite::All)
        .then(|| {
            let latency = OperatorLatency::uniform(l_op)?;
            EngineConfig::new(n.unwrap_or(512), rows.unwrap_or(4), latency, f_hz)
        })
        .transpose()?;
    let dist = matches!(suite, Suite::Dist | Suite::All)
        .then(|| -> Result<_> {
            let rows = rows.unwrap_or(1);
            let grid = PencilGrid::new(n.unwrap_or(16), pu, pv)?;
            // Engine constraints apply to every pencil length.
            EngineConfig::new(grid.n, rows, OperatorLatency::uniform(1)?, f_hz)?;
            Ok((grid, rows))
        })
        .transpose()?;
    Ok(VerifyConfig {
        engine,
        tables: matches!(suite, Suite::Tables | Suite::All),
        dist,
        trials,
        seed,
    })
}

fn resolve_predict(a: &PredictArgs, mut file: ConfigFile) -> Result<PredictConfig> {
    let topology = parse_with(
        "topology",
        file.value("topology", a.topology.clone())?,
        Topology::parse,
    )?;
    let table = file.value("table", a.table.clone())?.unwrap_or_else(|| {
        if topology.is_some() {
            "bandwidth"
        } else {
            "times"
        }
        .to_string()
    });
    let format: Format = file
        .value("format", a.format.clone())?
        .map(|s| {
            s.parse()
                .map_err(|e: String| anyhow!("--format {s:?}: {e}"))
        })
        .transpose()?
        .unwrap_or(Format::Csv);
    let output = file.value("output", a.output.clone())?;
    let ns = file.list("n", a.n.clone())?;
    let ps = file.list("p", a.p.clone())?;
    let mus = file.list("mu", a.mu.clone())?;
    let rows = file.value("r", a.r)?.unwrap_or(4);
    let k = file.value("k", a.k)?.unwrap_or(1);
    let q = file.value("q", a.q)?;
    let f_mhz = file.value("f", a.f)?;
    let device_bytes = file
        .value("device-bytes", a.device_bytes)?
        .unwrap_or(DEVICE_MEMORY_BYTES);
    let form = file.value("form", a.form.clone())?;
    let max_side = file.value("max-side", a.max_side)?.unwrap_or(32);
    let links = file.list("link", a.link.clone())?;
    let arch = file.value("arch", a.arch.clone())?;
    let pu = file.value("pu", a.pu)?.unwrap_or(1);
    let pv = file.value("pv", a.pv)?.unwrap_or(1);
    let l_op = file.value("l-op", a.l_op)?;
    let l_dma = file.value("l-dma", a.l_dma)?.unwrap_or(0);
    let l_comm = file.value("l-comm", a.l_comm)?.unwrap_or(0);
    let doubled_x = file.switch("doubled-x", a.doubled_x)?;
    file.finish("predict")?;

    let single_mu = |mus: &Option<Vec<u32>>| -> Result<u32> {
        match mus.as_deref() {
            None => Ok(1),
            Some([mu]) => Ok(*mu),
            Some(_) => bail!("--mu takes a single value for the {table} table"),
        }
    };
    let single_n = |ns: &Option<Vec<u64>>, default: u64| -> Result<u64> {
        match ns.as_deref() {
            None => Ok(default),
            Some([n]) => Ok(*n),
            Some(_) => bail!("--n takes a single value for the {table} table"),
        }
    };
    let f_hz = mhz_to_hz(f_mhz.unwrap_or(180.0))?;

    let job = match table.as_str() {
        "times" => {
            let form = match form.as_deref() {
                None | Some("table") => StreamingForm::TableMatching,
                Some("printed") => StreamingForm::Printed,
                Some(other) => bail!("--form {other:?}: expected table or printed"),
            };
            let params = PredictParams {
                ns: ns.unwrap_or_else(|| DEFAULT_PREDICT_NS.to_vec()),
                ps: ps.unwrap_or_else(|| DEFAULT_PREDICT_PS.to_vec()),
                mus: mus.unwrap_or_else(|| vec![1, 3]),
                rows,
                k,
                f_hz,
                device_bytes,
                form,
            };
            // Dry run so that bad cells fail before anything is written.
            fft3d_core::perf_model::predict_table(&params)?;
            PredictJob::Times(params)
        }
        "arch" => {
            let mu = single_mu(&mus)?;
            fft3d_core::perf_model::architecture_comparison(mu, k)?;
            PredictJob::Arch { mu, k }
        }
        "fixed-q" => {
            let mu = single_mu(&mus)?;
            let q = q.unwrap_or(4);
            fft3d_core::perf_model::fixed_q_comparison(mu, q)?;
            PredictJob::FixedQ { mu, q }
        }
        "bandwidth" => {
            let topology = topology.unwrap_or(Topology::Switched);
            let t_clk = 1.0 / f_hz;
            if max_side == 0 {
                bail!("--max-side must be at least 1");
            }
            if let Some(ps) = &ps {
                for &p in ps {
                    fft3d_core::perf_model::network_bandwidth(topology, rows, t_clk, p)
                        .with_context(|| format!("{} topology", topology.name()))?;
                }
            }
            fft3d_core::perf_model::network_bandwidth(topology, rows, t_clk, 1)?;
            let links_gbps = links.unwrap_or_else(|| {
                fft3d_core::perf_model::LINK_CAPACITIES_BPS
                    .iter()
                    .map(|b| b / 1e9)
                    .collect()
            });
            if links_gbps.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                bail!("--link capacities must be positive");
            }
            PredictJob::Bandwidth(BandwidthJob {
                topology,
                rows,
                t_clk,
                max_side,
                links_gbps,
                ps,
            })
        }
        "timeline" => {
            let kind = ArchKind::parse(arch.as_deref().unwrap_or("pipelined"))?;
            let n = single_n(&ns, 1024)?;
            let mut spec = ArchSpec::new(kind, n, pu, pv);
            spec.k = k;
            spec.mu = single_mu(&mus)?;
            spec.rows = rows;
            spec.t_clk = 1.0 / f_hz;
            spec.l_dma = l_dma;
            spec.l_comm = l_comm;
            spec.doubled_x = doubled_x;
            if let Some(l_op) = l_op {
                let cfg = EngineConfig::new(
                    n as usize,
                    rows as usize,
                    OperatorLatency::for_table_row(l_op)?,
                    f_hz,
                )?;
                spec.l_fft = engine_metrics(&cfg).l_fft;
            }
            fft3d_core::perf_model::timeline(&spec)?;
            PredictJob::Timeline(spec)
        }
        other => bail!("--table {other:?}: expected times, arch, fixed-q, bandwidth or timeline"),
    };
    Ok(PredictConfig {
        job,
        format,
        output,
    })
}

fn parse_datapath(s: &str) -> Result<DatapathConfig> {
    Ok(match s {
        "1g" => DatapathConfig::ONE_G,
        "10g" => DatapathConfig::TEN_G,
        "40g-128" => DatapathConfig::FORTY_G_128,
        "40g-256" | "40g" => DatapathConfig::FORTY_G_256,
        "100g" => DatapathConfig::HUNDRED_G,
        other => bail!("--datapath {other:?}: expected 1g, 10g, 40g-128, 40g-256 or 100g"),
    })
}

fn resolve_simulate(a: &SimulateArgs, mut file: ConfigFile) -> Result<SimulateConfig> {
    let input = file.value("input", a.input.clone())?;
    let output = file.value("output", a.output.clone())?;
    let ledger = file.value("ledger", a.ledger.clone())?;
    let pu = file.value("pu", a.pu)?.unwrap_or(1);
    let pv = file.value("pv", a.pv)?.unwrap_or(1);
    let rows = file.value("r", a.r)?.unwrap_or(1);
    let l_op = file.value("l-op", a.l_op)?.unwrap_or(1);
    let wire = file.switch("wire", a.wire)?;
    let pcap = file.value("pcap", a.pcap.clone())?;
    let datapath = file.value("datapath", a.datapath.clone())?;
    let check_oracle = file.switch("check-oracle", a.check_oracle)?;
    file.finish("simulate")?;

    let input = input.ok_or_else(|| anyhow!("--input is required"))?;
    let output = output.ok_or_else(|| anyhow!("--output is required"))?;
    let ledger = ledger.ok_or_else(|| anyhow!("--ledger is required"))?;
    if !wire && (pcap.is_some() || datapath.is_some()) {
        bail!("--pcap and --datapath need --wire");
    }
    if pu == 0 || pv == 0 || rows == 0 {
        bail!("--pu, --pv and --r must be positive");
    }
    let datapath = parse_datapath(datapath.as_deref().unwrap_or("100g"))?;
    let options = SimOptions {
        rows,
        latency: OperatorLatency::uniform(l_op)?,
        wire: wire.then_some(fft3d_core::dist_sim::WireOptions {
            datapath,
            capture: true,
        }),
    };
    let pcap = wire.then(|| pcap.unwrap_or_else(|| output.with_extension("pcap")));
    Ok(SimulateConfig {
        input,
        output,
        ledger,
        pu,
        pv,
        options,
        pcap,
        check_oracle,
    })
}

fn resolve_grid(a: &GridArgs, mut file: ConfigFile) -> Result<GridConfig> {
    let kind = file.value("kind", a.kind.clone())?;
    let n = file.value("n", a.n)?.unwrap_or(16);
    let mu = file.value("mu", a.mu)?.unwrap_or(1);
    let seed = file.value("seed", a.seed)?.unwrap_or(1);
    let complex = file.switch("complex", a.complex)?;
    let output = file.value("output", a.output.clone())?;
    file.finish("grid")?;

    let kind: GridKind = kind
        .as_deref()
        .unwrap_or("random")
        .parse()
        .map_err(|e: String| anyhow!("--kind: {e}"))?;
    if n == 0 || mu == 0 {
        bail!("--n and --mu must be positive");
    }
    Ok(GridConfig {
        kind,
        n,
        mu,
        seed,
        complex,
        output: output.ok_or_else(|| anyhow!("--output is required"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let f = ConfigFile::parse("# comment\nN = 16\nl_op=3 # trailing\n\npu = 2\n").unwrap();
        assert_eq!(f.values.get("n").unwrap(), "16");
        assert_eq!(f.values.get("l-op").unwrap(), "3");
        assert_eq!(f.values.len(), 3);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("n 16").is_err());
        assert!(ConfigFile::parse("n = 1\nn = 2").is_err());
        assert!(ConfigFile::parse(" = 3").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let mut f = ConfigFile::parse("n = 16\nmu = 1,3\nwire = yes").unwrap();
        assert_eq!(f.value("n", Some(32usize)).unwrap(), Some(32));
        assert_eq!(f.list::<u32>("mu", vec![]).unwrap(), Some(vec![1, 3]));
        assert!(f.switch("wire", false).unwrap());
        assert!(f.finish("test").is_ok());
    }

    #[test]
    fn leftover_keys_are_errors() {
        let mut f = ConfigFile::parse("n = 16\nbogus = 1").unwrap();
        f.value::<usize>("n", None).unwrap();
        let err = f.finish("verify").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn bad_values_name_their_key() {
        let mut f = ConfigFile::parse("n = sixteen").unwrap();
        let err = f.value::<usize>("n", None).unwrap_err().to_string();
        assert!(err.contains("n") && err.contains("sixteen"), "{err}");
    }
}

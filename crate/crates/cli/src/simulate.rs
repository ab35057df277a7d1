use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use fft3d_core::dist_sim::{
    run_distributed_3dfft, run_distributed_3dfft_complex, CommPhase, DistRun,
};
use fft3d_core::domain::PencilGrid;
use fft3d_core::grid::{GridComponents, GridFile};
use fft3d_core::numerics::{dft_3d, relative_error, Direction, ORACLE_TOLERANCE};
use fft3d_core::udp_codec::PcapWriter;
use fft3d_core::{Complex, Grid3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{GridConfig, GridKind, SimulateConfig};
use crate::Status;

/// Largest side accepted with `--check-oracle`; the direct DFT is `O(N⁴)`.
pub const ORACLE_MAX_N: usize = 64;

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn read_grid(path: &Path) -> Result<GridFile> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    GridFile::read_from(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

/// The traffic ledger of every component, tagged with a leading
/// `component` column.
fn write_ledger(path: &Path, runs: &[DistRun]) -> Result<()> {
    let mut out = create(path)?;
    for (c, run) in runs.iter().enumerate() {
        let mut buf = Vec::new();
        run.ledger.write_csv(&mut buf)?;
        let text = String::from_utf8(buf).expect("ledger CSV is ASCII");
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if c == 0 {
            writeln!(out, "component,{header}")?;
        }
        for line in lines {
            writeln!(out, "{c},{line}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn run(cfg: &SimulateConfig) -> Result<Status> {
    let input = read_grid(&cfg.input)?;
    let grid = PencilGrid::new(input.n, cfg.pu, cfg.pv)?;
    if cfg.check_oracle && input.n > ORACLE_MAX_N {
        bail!(
            "--check-oracle supports N <= {ORACLE_MAX_N}, input has N = {}",
            input.n
        );
    }

    let (runs, references): (Vec<DistRun>, Vec<Grid3<Complex>>) = match &input.components {
        GridComponents::Real(comps) => {
            let runs = comps
                .iter()
                .map(|f| run_distributed_3dfft(f, &grid, &cfg.options))
                .collect::<fft3d_core::Result<Vec<_>>>()?;
            let refs = if cfg.check_oracle {
                comps
                    .iter()
                    .map(|f| f.map(|&v| Complex::new(v, 0.0)))
                    .collect()
            } else {
                Vec::new()
            };
            (runs, refs)
        }
        GridComponents::Complex(comps) => {
            let runs = comps
                .iter()
                .map(|f| run_distributed_3dfft_complex(f, &grid, &cfg.options))
                .collect::<fft3d_core::Result<Vec<_>>>()?;
            let refs = if cfg.check_oracle {
                comps.clone()
            } else {
                Vec::new()
            };
            (runs, refs)
        }
    };

    let spectra = GridFile::complex(runs.iter().map(|r| r.spectrum.clone()).collect())?;
    let mut out = create(&cfg.output)?;
    spectra.write_to(&mut out)?;
    write_ledger(&cfg.ledger, &runs)?;

    println!(
        "N={} P={}x{} components={} input={}",
        grid.n,
        grid.pu,
        grid.pv,
        runs.len(),
        if matches!(input.components, GridComponents::Real(_)) {
            "real"
        } else {
            "complex"
        }
    );
    for phase in [CommPhase::XY, CommPhase::YZ, CommPhase::NyquistZ] {
        let bytes: u64 = runs.iter().map(|r| r.ledger.total_sent_bytes(phase)).sum();
        println!("{} bytes sent: {bytes}", phase.name());
    }

    if let Some(path) = &cfg.pcap {
        let mut pcap = PcapWriter::new(create(path)?)?;
        for frame in runs.iter().flat_map(|r| &r.frames) {
            pcap.write_frame(frame)?;
        }
        let expected: usize = runs.iter().map(|r| r.ledger.total_frames()).sum();
        println!("frames: {} written, {expected} in ledger", pcap.records());
        pcap.finish()?.flush()?;
    }

    if !cfg.check_oracle {
        return Ok(Status::Ok);
    }
    let mut worst = 0.0f64;
    for (run, reference) in runs.iter().zip(&references) {
        let want = dft_3d(reference, Direction::Forward)?;
        worst = worst.max(relative_error(
            run.spectrum.as_slice(),
            want.as_slice(),
            want.as_slice(),
        ));
    }
    let pass = worst < ORACLE_TOLERANCE;
    println!(
        "[{}] oracle: max rel err {worst:.3e} (tolerance < {ORACLE_TOLERANCE:e})",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass {
        Status::Ok
    } else {
        Status::VerificationFailed
    })
}

fn component(kind: GridKind, n: usize, rng: &mut ChaCha8Rng) -> Grid3<f64> {
    match kind {
        GridKind::Delta => Grid3::from_fn(n, |x, y, z| if x + y + z == 0 { 1.0 } else { 0.0 }),
        GridKind::Ones => Grid3::from_fn(n, |_, _, _| 1.0),
        GridKind::Random => Grid3::from_fn(n, |_, _, _| rng.random_range(-1.0..1.0)),
    }
}

pub fn build_grid(cfg: &GridConfig) -> Result<GridFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let file = if cfg.complex {
        let comps = (0..cfg.mu)
            .map(|_| {
                let re = component(cfg.kind, cfg.n, &mut rng);
                let im = match cfg.kind {
                    GridKind::Random => component(cfg.kind, cfg.n, &mut rng),
                    _ => Grid3::from_fn(cfg.n, |_, _, _| 0.0),
                };
                Grid3::from_fn(cfg.n, |x, y, z| Complex::new(re[[x, y, z]], im[[x, y, z]]))
            })
            .collect();
        GridFile::complex(comps)?
    } else {
        GridFile::real(
            (0..cfg.mu)
                .map(|_| component(cfg.kind, cfg.n, &mut rng))
                .collect(),
        )?
    };
    Ok(file)
}

pub fn generate(cfg: &GridConfig) -> Result<Status> {
    let file = build_grid(cfg)?;
    let mut out = create(&cfg.output)?;
    file.write_to(&mut out)?;
    Ok(Status::Ok)
}

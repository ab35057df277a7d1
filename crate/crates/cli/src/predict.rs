use std::io::Write;

use anyhow::{Context, Result};
use fft3d_core::perf_model::{
    architecture_comparison, bandwidth_curve, fixed_q_comparison, fmt_sig, link_threshold,
    network_bandwidth, predict_table, timeline, ComparisonRow, TextTable,
};

use crate::config::{BandwidthJob, Format, PredictConfig, PredictJob};
use crate::Status;

const DIGITS: u32 = 4;

fn render(table: &TextTable, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Markdown => table.to_markdown(),
    }
}

fn link_column(gbps: f64) -> String {
    format!("over_{gbps}g")
}

/// `(link Gb/s, first √P whose requirement exceeds it)` per link.
type Thresholds = Vec<(f64, Option<u64>)>;

pub fn bandwidth_table(job: &BandwidthJob) -> Result<(TextTable, Thresholds)> {
    let points: Vec<(u64, f64)> = match &job.ps {
        Some(ps) => ps
            .iter()
            .map(|&p| {
                let b = network_bandwidth(job.topology, job.rows, job.t_clk, p)?;
                Ok(((p as f64).sqrt().round() as u64, b))
            })
            .collect::<Result<_>>()?,
        None => bandwidth_curve(job.topology, job.rows, job.t_clk, job.max_side)?
            .into_iter()
            .map(|pt| (pt.sqrt_p, pt.bytes_per_s))
            .collect(),
    };
    let mut headers: Vec<String> = ["sqrt_p", "p", "bytes_per_s", "gbit_per_s"]
        .map(String::from)
        .to_vec();
    headers.extend(job.links_gbps.iter().map(|&l| link_column(l)));
    let rows = points
        .iter()
        .map(|&(side, bytes)| {
            let gbit = bytes * 8.0 / 1e9;
            let mut row = vec![
                side.to_string(),
                (side * side).to_string(),
                fmt_sig(bytes, DIGITS),
                fmt_sig(gbit, DIGITS),
            ];
            row.extend(job.links_gbps.iter().map(|&l| (gbit > l).to_string()));
            row
        })
        .collect();
    let thresholds = job
        .links_gbps
        .iter()
        .map(|&l| {
            let side = link_threshold(job.topology, job.rows, job.t_clk, l * 1e9, job.max_side)?;
            Ok((l, side))
        })
        .collect::<Result<_>>()?;
    Ok((TextTable { headers, rows }, thresholds))
}

fn timeline_table(spec: &fft3d_core::perf_model::ArchSpec) -> Result<TextTable> {
    let t = timeline(spec)?;
    Ok(TextTable {
        headers: ["event", "seconds", "description"]
            .map(String::from)
            .to_vec(),
        rows: t
            .events
            .iter()
            .map(|e| {
                vec![
                    e.label.to_string(),
                    fmt_sig(e.time, DIGITS),
                    e.description.to_string(),
                ]
            })
            .collect(),
    })
}

/// The rendered document for `cfg`, and notes for standard error.
pub fn render_job(cfg: &PredictConfig) -> Result<(String, Vec<String>)> {
    let mut notes = Vec::new();
    let text = match &cfg.job {
        PredictJob::Times(params) => {
            let table = predict_table(params)?;
            match cfg.format {
                Format::Csv => table.to_csv(),
                Format::Markdown => table.to_markdown(),
            }
        }
        PredictJob::Arch { mu, k } => render(
            &ComparisonRow::text_table(&architecture_comparison(*mu, *k)?),
            cfg.format,
        ),
        PredictJob::FixedQ { mu, q } => render(
            &ComparisonRow::text_table(&fixed_q_comparison(*mu, *q)?),
            cfg.format,
        ),
        PredictJob::Bandwidth(job) => {
            let (table, thresholds) = bandwidth_table(job)?;
            for (link, side) in thresholds {
                notes.push(match side {
                    Some(s) => format!(
                        "{} topology exceeds {} Gb/s from sqrt(P) = {s} (P = {})",
                        job.topology.name(),
                        link,
                        s * s
                    ),
                    None => format!(
                        "{} topology stays within {} Gb/s up to sqrt(P) = {}",
                        job.topology.name(),
                        link,
                        job.max_side
                    ),
                });
            }
            render(&table, cfg.format)
        }
        PredictJob::Timeline(spec) => render(&timeline_table(spec)?, cfg.format),
    };
    Ok((text, notes))
}

pub fn run(cfg: &PredictConfig) -> Result<Status> {
    let (text, notes) = render_job(cfg)?;
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    for note in notes {
        eprintln!("{note}");
    }
    Ok(Status::Ok)
}

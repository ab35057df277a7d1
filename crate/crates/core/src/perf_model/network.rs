//! Required network bandwidth on a `√P × √P` node grid.
//!
//! A switched grid with full bisection bandwidth only carries the fraction
//! of each engine's output that leaves the node. A torus adds a `√P/2`
//! multi-hop penalty on top of that.

use crate::{Error, Result, WORD_BYTES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Switched,
    Torus,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Switched => "switched",
            Topology::Torus => "torus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "switched" | "switch" => Ok(Topology::Switched),
            "torus" => Ok(Topology::Torus),
            other => Err(Error::invalid(format!("unknown topology {other:?}"))),
        }
    }
}

/// Reference per-link capacities in bits per second: 100, 200 and 400 Gb/s.
pub const LINK_CAPACITIES_BPS: [f64; 3] = [100e9, 200e9, 400e9];

fn exact_sqrt(p: u64) -> Result<u64> {
    let r = (p as f64).sqrt().round() as u64;
    if p == 0 || r * r != p {
        return Err(Error::invalid(format!(
            "P = {p} is not a positive perfect square"
        )));
    }
    Ok(r)
}

fn per_side(topology: Topology, rows: u32, t_clk: f64, side: u64) -> f64 {
    let s = WORD_BYTES as f64;
    let r = rows as f64;
    let side = side as f64;
    match topology {
        Topology::Switched => 4.0 * s * r / t_clk * (side - 1.0) / side,
        Topology::Torus => 2.0 * s * r / t_clk * (side - 1.0),
    }
}

/// Bytes per second each node must inject, for a square `P`.
pub fn network_bandwidth(topology: Topology, rows: u32, t_clk: f64, p: u64) -> Result<f64> {
    if rows == 0 || !(t_clk.is_finite() && t_clk > 0.0) {
        return Err(Error::invalid("R and t_clk must be positive"));
    }
    Ok(per_side(topology, rows, t_clk, exact_sqrt(p)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthPoint {
    pub sqrt_p: u64,
    pub bytes_per_s: f64,
}

impl BandwidthPoint {
    pub fn p(&self) -> u64 {
        self.sqrt_p * self.sqrt_p
    }

    pub fn bits_per_s(&self) -> f64 {
        self.bytes_per_s * 8.0
    }
}

/// Bandwidth for `√P = 1 ..= max_side`.
pub fn bandwidth_curve(
    topology: Topology,
    rows: u32,
    t_clk: f64,
    max_side: u64,
) -> Result<Vec<BandwidthPoint>> {
    network_bandwidth(topology, rows, t_clk, 1)?;
    Ok((1..=max_side)
        .map(|sqrt_p| BandwidthPoint {
            sqrt_p,
            bytes_per_s: per_side(topology, rows, t_clk, sqrt_p),
        })
        .collect())
}

/// Smallest `√P ≤ max_side` whose requirement exceeds `link_bps`.
pub fn link_threshold(
    topology: Topology,
    rows: u32,
    t_clk: f64,
    link_bps: f64,
    max_side: u64,
) -> Result<Option<u64>> {
    Ok(bandwidth_curve(topology, rows, t_clk, max_side)?
        .into_iter()
        .find(|pt| pt.bits_per_s() > link_bps)
        .map(|pt| pt.sqrt_p))
}

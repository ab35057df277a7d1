//! Radix-2 DIF parallel-pipelined 1D FFT engine.
//!
//! The engine has `R` butterfly rows and `2R` data lanes. Every cycle it
//! consumes and produces `2R` complex words. Timing is modelled on a single
//! global clock with fixed-latency, initiation-interval-1 operators.

mod butterfly;
mod engine;
mod shuffler;

pub use butterfly::{butterfly, ButterflyInput, ButterflyTrace, PipelinedButterfly};
pub use engine::{fft_engine_run, BatchRun, BitLayout, PipelineEngine, StageEdge};
pub use shuffler::{data_shuffle, DelayLine, Sample, Shuffler};

use crate::{Error, Result};

pub const MIN_POINTS: usize = 8;
pub const MAX_POINTS: usize = 8192;
pub const MAX_OPERATOR_LATENCY: u32 = 14;

/// Registration cycles inside one butterfly: input plus one after each stage.
pub const BUTTERFLY_REGISTERS: u32 = 4;

/// Floating-point operations per butterfly per cycle.
pub const FLOPS_PER_BUTTERFLY: f64 = 10.0;

/// Cycles spent in each operator stage of a butterfly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorLatency {
    pub stage_a: u32,
    pub stage_b: u32,
    pub stage_c: u32,
}

impl OperatorLatency {
    pub fn new(stage_a: u32, stage_b: u32, stage_c: u32) -> Result<Self> {
        for (name, v) in [("l_A", stage_a), ("l_B", stage_b), ("l_C", stage_c)] {
            if v > MAX_OPERATOR_LATENCY {
                return Err(Error::invalid(format!(
                    "{name} = {v} exceeds {MAX_OPERATOR_LATENCY} cycles"
                )));
            }
        }
        Ok(OperatorLatency {
            stage_a,
            stage_b,
            stage_c,
        })
    }

    /// The same latency on all three stages.
    pub fn uniform(l_op: u32) -> Result<Self> {
        Self::new(l_op, l_op, l_op)
    }

    /// Latencies used for a published `l_op` row. The deepest setting pairs
    /// 14-cycle adders with a 12-cycle multiplier, the multiplier's maximum.
    pub fn for_table_row(l_op: u32) -> Result<Self> {
        if l_op == 14 {
            Self::new(14, 12, 14)
        } else {
            Self::uniform(l_op)
        }
    }

    /// `l_but = l_A + l_B + l_C + 4`.
    pub fn butterfly(&self) -> u32 {
        self.stage_a + self.stage_b + self.stage_c + BUTTERFLY_REGISTERS
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub n: usize,
    pub rows: usize,
    pub latency: OperatorLatency,
    pub t_clk: f64,
}

impl EngineConfig {
    pub fn new(n: usize, rows: usize, latency: OperatorLatency, f_hz: f64) -> Result<Self> {
        if !(f_hz.is_finite() && f_hz > 0.0) {
            return Err(Error::invalid(format!(
                "clock frequency {f_hz} must be positive"
            )));
        }
        let cfg = EngineConfig {
            n,
            rows,
            latency,
            t_clk: 1.0 / f_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || !(MIN_POINTS..=MAX_POINTS).contains(&self.n) {
            return Err(Error::invalid(format!(
                "N = {} must be a power of two in {MIN_POINTS}..={MAX_POINTS}",
                self.n
            )));
        }
        if !self.rows.is_power_of_two() || self.rows > self.n / 2 {
            return Err(Error::invalid(format!(
                "R = {} must be a power of two no larger than N/2 = {}",
                self.rows,
                self.n / 2
            )));
        }
        OperatorLatency::new(
            self.latency.stage_a,
            self.latency.stage_b,
            self.latency.stage_c,
        )?;
        if !(self.t_clk.is_finite() && self.t_clk > 0.0) {
            return Err(Error::invalid("clock period must be positive"));
        }
        Ok(())
    }

    pub fn frequency(&self) -> f64 {
        1.0 / self.t_clk
    }

    pub fn stages(&self) -> u32 {
        self.n.trailing_zeros()
    }

    /// Pipeline steps per transform: `N / 2R`.
    pub fn steps(&self) -> usize {
        self.n / (2 * self.rows)
    }

    pub fn butterfly_latency(&self) -> u32 {
        self.latency.butterfly()
    }

    /// Shift-register lengths of the shuffler stages, in pipeline order.
    pub fn shuffler_lengths(&self) -> Vec<usize> {
        let mut lens = Vec::new();
        let mut l = self.steps() / 2;
        while l >= 1 {
            lens.push(l);
            l /= 2;
        }
        lens
    }

    /// `(l_but + 1)·log2(N) + N/(2R) − 1`: every stage adds its butterfly and
    /// one register, and the shufflers add `Σ L = N/(2R) − 1` on top.
    pub fn first_output_latency(&self) -> u64 {
        (self.butterfly_latency() as u64 + 1) * self.stages() as u64 + self.steps() as u64 - 1
    }
}

/// Cycle and rate figures for one transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleReport {
    pub l_fft: u64,
    pub t_fft_cycles: u64,
    pub l_fft_seconds: f64,
    pub t_fft_seconds: f64,
    /// Streaming throughput in bytes per second.
    pub b_fft: f64,
    pub b_fft_gib: f64,
    pub gflops: f64,
}

impl CycleReport {
    pub(crate) fn from_latency(cfg: &EngineConfig, l_fft: u64) -> Self {
        let t_fft_cycles = l_fft + cfg.steps() as u64;
        let b_fft = 4.0 * crate::WORD_BYTES as f64 * cfg.rows as f64 / cfg.t_clk;
        CycleReport {
            l_fft,
            t_fft_cycles,
            l_fft_seconds: l_fft as f64 * cfg.t_clk,
            t_fft_seconds: t_fft_cycles as f64 * cfg.t_clk,
            b_fft,
            b_fft_gib: b_fft / (1u64 << 30) as f64,
            gflops: FLOPS_PER_BUTTERFLY * cfg.rows as f64 * cfg.stages() as f64 / cfg.t_clk / 1e9,
        }
    }
}

/// Closed-form metrics, no simulation.
pub fn engine_metrics(cfg: &EngineConfig) -> CycleReport {
    CycleReport::from_latency(cfg, cfg.first_output_latency())
}

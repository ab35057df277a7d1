//! Analytical timing, throughput, memory and network models for a node that
//! runs the X, Y and Z transforms on `k`-multiplied FFT engines.
//!
//! Times come in two precisions. The asymptotic form keeps only the `N³`
//! term; the exact form keeps block latencies and the `N²` real-to-complex
//! correction. Block latencies are given in clock cycles.

mod network;
mod published;
mod tables;
mod timeline;

pub use network::{
    bandwidth_curve, link_threshold, network_bandwidth, BandwidthPoint, Topology,
    LINK_CAPACITIES_BPS,
};
pub use published::{
    check_engine_row, engine_published, predicted_published, EngineRowCheck, Printed,
    PublishedEngineRow, PublishedPrediction,
};
pub use tables::{
    architecture_comparison, fixed_q_comparison, fmt_sig, predict_table, ComparisonRow,
    PredictCell, PredictParams, PredictTable, TextTable, DEFAULT_PREDICT_NS, DEFAULT_PREDICT_PS,
};
pub use timeline::{timeline, StallRule, Timeline, TimelineEvent};

use crate::domain::PencilGrid;
use crate::{Error, Result, WORD_BYTES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArchKind {
    Sequential,
    Pipelined,
    /// `µ` sequential pipelines side by side, one per component.
    Parallel,
    SequentialStreaming,
    PipelinedStreaming,
}

impl ArchKind {
    pub const ALL: [ArchKind; 5] = [
        ArchKind::Sequential,
        ArchKind::Pipelined,
        ArchKind::Parallel,
        ArchKind::SequentialStreaming,
        ArchKind::PipelinedStreaming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArchKind::Sequential => "sequential",
            ArchKind::Pipelined => "pipelined",
            ArchKind::Parallel => "parallel",
            ArchKind::SequentialStreaming => "sequential_streaming",
            ArchKind::PipelinedStreaming => "pipelined_streaming",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ArchKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown architecture {s:?}")))
    }

    /// Whether the kind carries `µ` components through one set of engines.
    pub fn is_single_component(self) -> bool {
        matches!(self, ArchKind::Sequential | ArchKind::Pipelined)
    }
}

/// Divisor of the pipelined-streaming time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StreamingForm {
    /// `(µ+1)·t·N³ / 4PRk`, the closed form as written.
    #[default]
    Printed,
    /// `(µ+1)·t·N³ / 2PRk`, the form behind the published prediction table.
    TableMatching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TimeOptions {
    pub exact: bool,
    pub streaming: StreamingForm,
}

/// Hardware block counts per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockCounts {
    pub fft_engines: u32,
    pub host_dma: u32,
    pub local_dma: u32,
    pub network: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchSpec {
    pub kind: ArchKind,
    pub k: u32,
    pub mu: u32,
    pub rows: u32,
    pub l_dma: u64,
    pub l_comm: u64,
    pub l_fft: u64,
    pub t_clk: f64,
    pub n: u64,
    pub pu: u64,
    pub pv: u64,
    /// Pipelined only: `2k` extra X engines so the Y engine never stalls.
    pub doubled_x: bool,
}

impl ArchSpec {
    /// `k = 1`, `µ = 1`, `R = 4`, 180 MHz, zero block latencies.
    pub fn new(kind: ArchKind, n: u64, pu: u64, pv: u64) -> Self {
        ArchSpec {
            kind,
            k: 1,
            mu: 1,
            rows: 4,
            l_dma: 0,
            l_comm: 0,
            l_fft: 0,
            t_clk: 1.0 / 180e6,
            n,
            pu,
            pv,
            doubled_x: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "N = {} must be a power of two ≥ 2",
                self.n
            )));
        }
        if self.pu == 0 || self.pv == 0 {
            return Err(Error::invalid("P_u and P_v must be positive"));
        }
        if self.k == 0 || self.rows == 0 {
            return Err(Error::invalid("k and R must be positive"));
        }
        if !(1..=3).contains(&self.mu) {
            return Err(Error::invalid(format!("µ = {} outside 1..=3", self.mu)));
        }
        if self.kind.is_single_component() && self.mu != 1 {
            return Err(Error::invalid(format!(
                "{} transforms one component; use a streaming or parallel kind for µ = {}",
                self.kind.name(),
                self.mu
            )));
        }
        if self.doubled_x && self.kind != ArchKind::Pipelined {
            return Err(Error::invalid(
                "doubled X engines apply to the pipelined kind only",
            ));
        }
        if !(self.t_clk.is_finite() && self.t_clk > 0.0) {
            return Err(Error::invalid("t_clk must be positive"));
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.pu * self.pv
    }

    pub fn counts(&self) -> BlockCounts {
        let k = self.k;
        let (fft_engines, host_dma, local_dma, network) = match self.kind {
            ArchKind::Sequential | ArchKind::SequentialStreaming => (k, k, 2 * k, k),
            ArchKind::Pipelined => (if self.doubled_x { 4 * k } else { 3 * k }, k, 4 * k, 2 * k),
            ArchKind::PipelinedStreaming => (4 * k, 2 * k, 4 * k, 2 * k),
            ArchKind::Parallel => {
                let m = self.mu * k;
                (m, m, 2 * m, m)
            }
        };
        BlockCounts {
            fft_engines,
            host_dma,
            local_dma,
            network,
        }
    }

    /// Engines a sequential node gangs on each phase, `Q = k`.
    fn q(&self) -> f64 {
        self.k as f64
    }

    /// `t_clk·N³ / (P·R)`, the time one engine row needs to stream a
    /// node's `N³/P` points in pairs.
    pub fn unit_time(&self) -> f64 {
        self.t_clk * (self.n as f64).powi(3) / (self.p() as f64 * self.rows as f64)
    }

    /// `T` divided by [`ArchSpec::unit_time`] in the `N³`-only limit.
    pub fn time_coefficient(&self, form: StreamingForm) -> f64 {
        let k = self.k as f64;
        let mu = self.mu as f64;
        match self.kind {
            ArchKind::Sequential | ArchKind::Parallel => 1.0 / self.q(),
            ArchKind::SequentialStreaming => mu / self.q(),
            ArchKind::Pipelined if self.doubled_x => 1.0 / (2.0 * k),
            ArchKind::Pipelined => 3.0 / (4.0 * k),
            ArchKind::PipelinedStreaming => match form {
                StreamingForm::Printed => (mu + 1.0) / (4.0 * k),
                StreamingForm::TableMatching => (mu + 1.0) / (2.0 * k),
            },
        }
    }

    fn cycles(&self, c: u64) -> f64 {
        c as f64 * self.t_clk
    }

    /// `t_clk·(N³ + 2N²)/(P·R)`: the packed complex volume in the same unit.
    fn packed_unit(&self) -> f64 {
        let n = self.n as f64;
        self.t_clk * (n.powi(3) + 2.0 * n * n) / (self.p() as f64 * self.rows as f64)
    }

    /// Seconds for one complete 3D transform of all `µ` components.
    pub fn total_time(&self, opts: TimeOptions) -> f64 {
        if !opts.exact {
            return self.time_coefficient(opts.streaming) * self.unit_time();
        }
        let (ld, lf) = (self.cycles(self.l_dma), self.cycles(self.l_fft));
        let k = self.k as f64;
        let q = self.q();
        let (x, yz) = (self.unit_time(), self.packed_unit());
        let seq_body = x / (2.0 * q) + 2.0 * yz / (4.0 * q);
        match self.kind {
            ArchKind::Sequential | ArchKind::Parallel => 4.0 * ld + 3.0 * lf + seq_body,
            ArchKind::SequentialStreaming => 4.0 * ld + 3.0 * lf + self.mu as f64 * seq_body,
            ArchKind::Pipelined if self.doubled_x => {
                let n = self.n as f64;
                let lc = self.cycles(self.l_comm);
                let plane = x / n;
                4.0 * ld
                    + 3.0 * lf
                    + 2.0 * lc
                    + plane / (2.0 * k)
                    + (n - 1.0) * plane / (4.0 * k)
                    + x / (4.0 * k)
            }
            ArchKind::Pipelined => 3.0 * ld + 2.0 * lf + x / (4.0 * k) + x / (2.0 * k),
            ArchKind::PipelinedStreaming => {
                3.0 * ld + 2.0 * lf + self.time_coefficient(opts.streaming) * x
            }
        }
    }

    /// Bytes per second the node's blocks must sustain without stalling.
    pub fn bandwidth(&self) -> f64 {
        let per_engine = 4.0 * WORD_BYTES as f64 * self.rows as f64 / self.t_clk;
        let engines = match self.kind {
            ArchKind::Sequential | ArchKind::SequentialStreaming => self.k,
            ArchKind::Pipelined | ArchKind::PipelinedStreaming => self.k,
            ArchKind::Parallel => self.mu * self.k,
        };
        per_engine * engines as f64
    }

    /// Network bandwidth along the `u` and `v` axes of the node grid.
    pub fn network_axes(&self) -> (f64, f64) {
        let b = self.bandwidth();
        let frac = |p: u64| (p as f64 - 1.0) / p as f64;
        (b * frac(self.pu), b * frac(self.pv))
    }

    /// Exact local memory in bytes.
    pub fn memory_bytes(&self) -> u64 {
        let v_prime = self.grid_volumes().v_prime;
        let planes = 2 * WORD_BYTES * self.n * self.n / self.pu;
        match self.kind {
            ArchKind::Sequential | ArchKind::SequentialStreaming => 2 * v_prime,
            ArchKind::Pipelined => v_prime + planes,
            ArchKind::PipelinedStreaming => 2 * v_prime + planes,
            ArchKind::Parallel => self.mu as u64 * 2 * v_prime,
        }
    }

    /// Local memory to leading order in `N`, in units of `s·N³/P`.
    pub fn memory_coefficient(&self) -> f64 {
        match self.kind {
            ArchKind::Pipelined => 1.0,
            ArchKind::Parallel => 2.0 * self.mu as f64,
            _ => 2.0,
        }
    }

    fn grid_volumes(&self) -> crate::domain::VolumeReport {
        PencilGrid {
            n: self.n as usize,
            pu: self.pu as usize,
            pv: self.pv as usize,
        }
        .volumes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ArchKind) -> ArchSpec {
        ArchSpec::new(kind, 2048, 4, 4)
    }

    #[test]
    fn block_counts() {
        let c = spec(ArchKind::Sequential).counts();
        assert_eq!(
            (c.fft_engines, c.host_dma, c.local_dma, c.network),
            (1, 1, 2, 1)
        );
        let mut s = spec(ArchKind::PipelinedStreaming);
        s.k = 2;
        let c = s.counts();
        assert_eq!(
            (c.fft_engines, c.host_dma, c.local_dma, c.network),
            (8, 4, 8, 4)
        );
        let mut s = spec(ArchKind::Pipelined);
        assert_eq!(s.counts().fft_engines, 3);
        s.doubled_x = true;
        assert_eq!(s.counts().fft_engines, 4);
        let mut s = spec(ArchKind::Parallel);
        s.mu = 3;
        let c = s.counts();
        assert_eq!(
            (c.fft_engines, c.host_dma, c.local_dma, c.network),
            (3, 3, 6, 3)
        );
    }

    #[test]
    fn validation() {
        let mut s = spec(ArchKind::Sequential);
        assert!(s.validate().is_ok());
        s.mu = 3;
        assert!(s.validate().is_err());
        s.kind = ArchKind::SequentialStreaming;
        assert!(s.validate().is_ok());
        s.mu = 4;
        assert!(s.validate().is_err());
        let mut s = spec(ArchKind::PipelinedStreaming);
        s.doubled_x = true;
        assert!(s.validate().is_err());
        let mut s = spec(ArchKind::Sequential);
        s.n = 1000;
        assert!(s.validate().is_err());
        assert_eq!(
            ArchKind::parse("pipelined_streaming").unwrap(),
            ArchKind::PipelinedStreaming
        );
        assert!(ArchKind::parse("torus").is_err());
    }

    #[test]
    fn prediction_anchor_cells() {
        let opts = TimeOptions {
            exact: false,
            streaming: StreamingForm::TableMatching,
        };
        let mut s = spec(ArchKind::PipelinedStreaming);
        s.mu = 3;
        assert!((s.total_time(opts) - 1.491).abs() < 1e-3);
        s.mu = 1;
        assert!((s.total_time(opts) - 0.7457).abs() < 1e-4);
        let printed = s.total_time(TimeOptions::default());
        assert!((s.total_time(opts) / printed - 2.0).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_forms() {
        let s = spec(ArchKind::Sequential);
        let u = s.unit_time();
        let t = s.total_time(TimeOptions::default());
        assert!((t - 2.0 * u / 2.0).abs() <= 1e-15 * t);
        let mut p = spec(ArchKind::Pipelined);
        assert!((p.total_time(TimeOptions::default()) - 0.75 * u).abs() <= 1e-15 * u);
        p.doubled_x = true;
        assert!((p.total_time(TimeOptions::default()) - 0.5 * u).abs() <= 1e-15 * u);
    }

    #[test]
    fn exact_converges_to_asymptotic() {
        for kind in ArchKind::ALL {
            let mut s = ArchSpec::new(kind, 8192, 2, 2);
            s.l_dma = 100;
            s.l_fft = 200;
            s.l_comm = 50;
            let exact = s.total_time(TimeOptions {
                exact: true,
                ..Default::default()
            });
            let asym = s.total_time(TimeOptions::default());
            assert!(exact > asym, "{kind:?}");
            assert!((exact - asym) / asym < 1e-3, "{kind:?}");
        }
    }

    #[test]
    fn exact_sequential_matches_closed_form() {
        let mut s = ArchSpec::new(ArchKind::Sequential, 64, 2, 2);
        s.rows = 2;
        s.k = 2;
        s.l_dma = 7;
        s.l_fft = 11;
        s.t_clk = 1.0;
        let (n, p, r, q) = (64.0f64, 4.0, 2.0, 2.0);
        let want = 4.0 * 7.0
            + 3.0 * 11.0
            + n.powi(3) / (2.0 * p * r * q)
            + 2.0 * (n.powi(3) + 2.0 * n * n) / (4.0 * p * r * q);
        let got = s.total_time(TimeOptions {
            exact: true,
            ..Default::default()
        });
        assert_eq!(got, want);
    }

    #[test]
    fn bandwidth_and_memory() {
        let mut s = spec(ArchKind::PipelinedStreaming);
        let b1 = s.bandwidth();
        assert!((b1 - 32.0 * 4.0 * 180e6).abs() < 1e-3);
        s.mu = 3;
        assert_eq!(s.bandwidth(), b1);
        let (bu, bv) = s.network_axes();
        assert_eq!(bu, b1 * 0.75);
        assert_eq!(bv, bu);
        let n = 2048u64;
        assert_eq!(
            s.memory_bytes(),
            2 * 8 * (n.pow(3) + 2 * n * n) / 16 + 2 * 8 * n * n / 4
        );
        let grid = PencilGrid::new(2048, 4, 4).unwrap();
        assert_eq!(
            s.memory_bytes(),
            grid.memory_occupancy(crate::domain::MemoryArch::Pipelined)
        );
        let q = spec(ArchKind::Sequential);
        assert_eq!(
            q.memory_bytes(),
            grid.memory_occupancy(crate::domain::MemoryArch::Sequential)
        );
    }
}

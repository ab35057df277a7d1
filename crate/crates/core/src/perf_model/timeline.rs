//! Event timelines `t0 … t11` for the sequential and pipelined nodes.

use super::{ArchKind, ArchSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimelineEvent {
    pub label: &'static str,
    pub time: f64,
    pub description: &'static str,
}

/// Which expression fixes `t8` in the pipelined timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StallRule {
    /// `t8 = t2 + t·N³/2PRk`: the Y engine waits for the whole X phase.
    Stalled,
    /// `t8 = t7 + t·(N−1)N²/4PRk`: Z starts once `N−1` Y planes are done.
    Unstalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub events: Vec<TimelineEvent>,
    /// `None` for the sequential node.
    pub stall: Option<StallRule>,
}

impl Timeline {
    pub fn total(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.time)
    }
}

const DESCRIPTIONS: [&str; 12] = [
    "DMA read of X pencils from host memory",
    "X transform input available",
    "X output leaves the engine for the network",
    "exchanged data written to local memory as Y pencils",
    "Y pencils readable from local memory",
    "Y transform starts",
    "Y output flows to the network",
    "exchanged data written to local memory as Z pencils",
    "Z pencils readable from local memory",
    "Z transform starts",
    "Z output flows to the host memory controller",
    "all data written back to host memory",
];

const LABELS: [&str; 12] = [
    "t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9", "t10", "t11",
];

/// Event times for one component. Only the sequential and pipelined kinds
/// have a timeline; configurations whose latencies would reorder events are
/// rejected.
pub fn timeline(arch: &ArchSpec) -> Result<Timeline> {
    arch.validate()?;
    let c = |cycles: u64| cycles as f64 * arch.t_clk;
    let (ld, lf, lc) = (c(arch.l_dma), c(arch.l_fft), c(arch.l_comm));
    let n = arch.n as f64;
    let k = arch.k as f64;
    let x = arch.unit_time();
    let packed = arch.packed_unit();
    let mut t = [0.0f64; 12];
    t[1] = ld;
    t[2] = t[1] + lf;
    t[3] = t[2] + lc;
    let stall = match arch.kind {
        ArchKind::Sequential => {
            let q = arch.k as f64;
            t[4] = t[1] + lf + x / (2.0 * q);
            t[5] = t[4] + ld;
            t[6] = t[5] + lf;
            t[7] = t[6] + lc;
            t[8] = t[5] + lf + packed / (4.0 * q);
            t[9] = t[8] + ld;
            t[10] = t[9] + lf;
            t[11] = t[10] + ld + packed / (4.0 * q);
            None
        }
        ArchKind::Pipelined => {
            t[4] = t[3] + x / n / (2.0 * k);
            t[5] = t[4] + ld;
            t[6] = t[5] + lf;
            t[7] = t[6] + lc;
            let rule = if arch.doubled_x {
                t[8] = t[7] + (n - 1.0) * (x / n) / (4.0 * k);
                StallRule::Unstalled
            } else {
                t[8] = t[2] + x / (2.0 * k);
                StallRule::Stalled
            };
            t[9] = t[8] + ld;
            t[10] = t[9] + lf;
            t[11] = t[10] + ld + x / (4.0 * k);
            Some(rule)
        }
        other => {
            return Err(Error::invalid(format!(
                "no timeline for the {} architecture",
                other.name()
            )))
        }
    };
    if let Some(i) = (1..12).find(|&i| t[i] < t[i - 1]) {
        return Err(Error::invalid(format!(
            "block latencies put {} before {}",
            LABELS[i],
            LABELS[i - 1]
        )));
    }
    Ok(Timeline {
        events: (0..12)
            .map(|i| TimelineEvent {
                label: LABELS[i],
                time: t[i],
                description: DESCRIPTIONS[i],
            })
            .collect(),
        stall,
    })
}

#[cfg(test)]
mod tests {
    use super::super::TimeOptions;
    use super::*;

    fn arch(kind: ArchKind) -> ArchSpec {
        let mut a = ArchSpec::new(kind, 256, 2, 4);
        a.t_clk = 1.0;
        a.rows = 2;
        a
    }

    #[test]
    fn sequential_zero_latency_total() {
        let a = arch(ArchKind::Sequential);
        let tl = timeline(&a).unwrap();
        assert_eq!(tl.events.len(), 12);
        assert_eq!(tl.stall, None);
        let (n, p, r) = (256.0f64, 8.0, 2.0);
        let want = n.powi(3) / (2.0 * p * r) + 2.0 * (n.powi(3) + 2.0 * n * n) / (4.0 * p * r);
        assert_eq!(tl.total(), want);
    }

    #[test]
    fn pipelined_zero_latency_total_and_plane() {
        let a = arch(ArchKind::Pipelined);
        let tl = timeline(&a).unwrap();
        assert_eq!(tl.stall, Some(StallRule::Stalled));
        let (n, p, r) = (256.0f64, 8.0, 2.0);
        assert_eq!(tl.total(), 3.0 * n.powi(3) / (4.0 * p * r));
        let plane = tl.get("t4").unwrap() - tl.get("t3").unwrap();
        assert_eq!(plane, n * n / (2.0 * p * r));
        assert_eq!(
            tl.get("t8").unwrap(),
            tl.get("t2").unwrap() + n.powi(3) / (2.0 * p * r)
        );
    }

    #[test]
    fn unstalled_t8() {
        let mut a = arch(ArchKind::Pipelined);
        a.doubled_x = true;
        a.l_comm = 3;
        let tl = timeline(&a).unwrap();
        assert_eq!(tl.stall, Some(StallRule::Unstalled));
        let (n, p, r) = (256.0f64, 8.0, 2.0);
        let t7 = tl.get("t7").unwrap();
        assert_eq!(
            tl.get("t8").unwrap(),
            t7 + (n - 1.0) * n * n / (4.0 * p * r)
        );
    }

    #[test]
    fn monotone_and_total_matches_exact_time() {
        for kind in [ArchKind::Sequential, ArchKind::Pipelined] {
            for doubled in [false, true] {
                if doubled && kind == ArchKind::Sequential {
                    continue;
                }
                let mut a = arch(kind);
                a.doubled_x = doubled;
                a.l_dma = 40;
                a.l_fft = 300;
                a.l_comm = 25;
                let tl = timeline(&a).unwrap();
                assert!(tl.events.windows(2).all(|w| w[0].time <= w[1].time));
                let exact = a.total_time(TimeOptions {
                    exact: true,
                    ..Default::default()
                });
                assert!(
                    (tl.total() - exact).abs() <= 1e-12 * exact,
                    "{kind:?} {doubled}"
                );
            }
        }
    }

    #[test]
    fn rejects_streaming_kinds_and_reordering() {
        for kind in [
            ArchKind::Parallel,
            ArchKind::SequentialStreaming,
            ArchKind::PipelinedStreaming,
        ] {
            assert!(timeline(&arch(kind)).is_err());
        }
        let mut a = arch(ArchKind::Pipelined);
        a.n = 8;
        a.l_comm = 1_000_000;
        assert!(timeline(&a).is_err());
    }
}

//! Cycle-level simulation of the `R`-row engine.
//!
//! Lane `ℓ ∈ [0, 2R)` and pipeline step `τ ∈ [0, N/2R)` together address one
//! position of the (bit-reversed) DIF data vector. [`BitLayout`] records
//! which position bit each lane bit and each step bit carries. Stage `k`
//! pairs positions differing in bit `n − k`:
//!
//! - while that bit is a lane bit, the stage is a lane-crossing stage: rows
//!   are wired to the two lanes that differ in it and the stage ends in a
//!   plain register;
//! - afterwards pairs live on lanes `(2j, 2j+1)` and each row is followed by
//!   a shuffler that swaps lane bit 0 with the step bit the next stage needs.

use super::butterfly::PipelinedButterfly;
use super::shuffler::{Sample, Shuffler};
use super::{CycleReport, EngineConfig};
use crate::numerics::{twiddle, Complex};
use crate::{Error, Result};

/// Position bit held by each lane bit and each step bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitLayout {
    pub lane_bits: Vec<u32>,
    pub step_bits: Vec<u32>,
}

impl BitLayout {
    fn initial(stages: u32, lane_bits: u32) -> Self {
        let step_count = stages - lane_bits;
        BitLayout {
            lane_bits: (0..lane_bits).map(|b| step_count + b).collect(),
            step_bits: (0..step_count).collect(),
        }
    }

    pub fn position(&self, lane: usize, step: usize) -> usize {
        let mut p = 0;
        for (b, &pos) in self.lane_bits.iter().enumerate() {
            p |= ((lane >> b) & 1) << pos;
        }
        for (b, &pos) in self.step_bits.iter().enumerate() {
            p |= ((step >> b) & 1) << pos;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Link {
    Register,
    Shuffle(usize),
}

#[derive(Debug, Clone)]
struct StagePlan {
    /// `(upper lane, lower lane)` per row.
    rows: Vec<(usize, usize)>,
    /// `rom[row][step]`
    rom: Vec<Vec<Complex>>,
    exponents: Vec<Vec<usize>>,
    link: Link,
    layout: BitLayout,
}

/// One butterfly of the schedule: positions it combines and its twiddle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct StageEdge {
    pub upper: usize,
    pub lower: usize,
    pub exponent: usize,
}

/// Output of [`PipelineEngine::run_batch`].
#[derive(Debug, Clone)]
pub struct BatchRun {
    pub spectra: Vec<Vec<Complex>>,
    /// Cycle on which the first valid output appeared; input starts at 0.
    pub first_output_cycle: u64,
    pub last_output_cycle: u64,
    /// Primed cycles on which some output lane carried no data.
    pub bubbles: u64,
}

/// An immutable engine plan. Each run builds fresh pipeline state.
#[derive(Debug, Clone)]
pub struct PipelineEngine {
    cfg: EngineConfig,
    stages: Vec<StagePlan>,
    output_layout: BitLayout,
}

fn insert_zero_bit(value: usize, bit: usize) -> usize {
    let low = value & ((1 << bit) - 1);
    ((value >> bit) << (bit + 1)) | low
}

impl PipelineEngine {
    pub fn new(cfg: EngineConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.stages();
        let r = cfg.rows.trailing_zeros();
        let steps = cfg.steps();
        let mut layout = BitLayout::initial(n, r + 1);
        let mut stages = Vec::with_capacity(n as usize);
        for k in 1..=n {
            let pair_bit = if k <= r + 1 { (r + 1 - k) as usize } else { 0 };
            debug_assert_eq!(layout.lane_bits[pair_bit], n - k);
            let rows: Vec<(usize, usize)> = (0..cfg.rows)
                .map(|i| {
                    let lo = insert_zero_bit(i, pair_bit);
                    (lo, lo | (1 << pair_bit))
                })
                .collect();
            let span = 1usize << (n - k);
            let exponents: Vec<Vec<usize>> = rows
                .iter()
                .map(|&(lo, _)| {
                    (0..steps)
                        .map(|tau| (layout.position(lo, tau) % span) << (k - 1))
                        .collect()
                })
                .collect();
            let rom = exponents
                .iter()
                .map(|row| row.iter().map(|&e| twiddle(e, cfg.n)).collect())
                .collect();
            let link = if k <= r || k == n {
                Link::Register
            } else {
                Link::Shuffle(1 << (n - k - 1))
            };
            stages.push(StagePlan {
                rows,
                rom,
                exponents,
                link,
                layout: layout.clone(),
            });
            if link != Link::Register {
                let j = (n - k - 1) as usize;
                let lane0 = layout.lane_bits[0];
                layout.lane_bits[0] = layout.step_bits[j];
                layout.step_bits[j] = lane0;
            }
        }
        Ok(PipelineEngine {
            cfg,
            stages,
            output_layout: layout,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// Twiddle ROM of one row of one stage (stages counted from 1), indexed
    /// by pipeline step.
    pub fn twiddle_rom(&self, stage: usize, row: usize) -> &[Complex] {
        &self.stages[stage - 1].rom[row]
    }

    /// Every butterfly stage `stage` performs in one transform, as DIF
    /// positions with twiddle exponents over `N`.
    pub fn stage_edges(&self, stage: usize) -> Vec<StageEdge> {
        let plan = &self.stages[stage - 1];
        let mut edges = Vec::with_capacity(self.cfg.n / 2);
        for (row, &(lo, hi)) in plan.rows.iter().enumerate() {
            for step in 0..self.cfg.steps() {
                edges.push(StageEdge {
                    upper: plan.layout.position(lo, step),
                    lower: plan.layout.position(hi, step),
                    exponent: plan.exponents[row][step],
                });
            }
        }
        edges.sort();
        edges
    }

    /// Total shift-register words over all shufflers of all rows.
    pub fn shift_register_words(&self) -> usize {
        self.stages
            .iter()
            .map(|s| match s.link {
                Link::Shuffle(len) => 2 * len * self.cfg.rows,
                Link::Register => 0,
            })
            .sum()
    }

    pub fn output_layout(&self) -> &BitLayout {
        &self.output_layout
    }

    /// Streams `frames` back to back, one step per cycle, and collects the
    /// spectra in natural order.
    pub fn run_batch(&self, frames: &[Vec<Complex>]) -> Result<BatchRun> {
        let n = self.cfg.n;
        let lanes = 2 * self.cfg.rows;
        let steps = self.cfg.steps();
        if let Some(bad) = frames.iter().find(|f| f.len() != n) {
            return Err(Error::invalid(format!(
                "frame of {} points given to an N = {n} engine",
                bad.len()
            )));
        }
        if frames.is_empty() {
            return Ok(BatchRun {
                spectra: Vec::new(),
                first_output_cycle: 0,
                last_output_cycle: 0,
                bubbles: 0,
            });
        }

        let mut state: Vec<StageState> = self
            .stages
            .iter()
            .map(|plan| StageState::new(plan, &self.cfg))
            .collect::<Result<_>>()?;
        let mut assembled = vec![vec![Complex::new(0.0, 0.0); n]; frames.len()];
        let input_cycles = (frames.len() * steps) as u64;
        let mut first: Option<u64> = None;
        let mut last = 0;
        let mut bubbles = 0;
        let mut received = 0usize;
        let mut cycle = 0u64;
        let limit = input_cycles + self.cfg.first_output_latency() + 4 * n as u64;

        while received < frames.len() * steps {
            if cycle > limit {
                return Err(Error::invalid("pipeline failed to drain"));
            }
            let mut data: Vec<Sample> = if cycle < input_cycles {
                let frame = &frames[cycle as usize / steps];
                let tau = cycle as usize % steps;
                (0..lanes).map(|l| Some(frame[l * steps + tau])).collect()
            } else {
                vec![None; lanes]
            };
            for (plan, st) in self.stages.iter().zip(state.iter_mut()) {
                data = st.clock(plan, &data, steps);
            }
            let valid = data.iter().filter(|s| s.is_some()).count();
            if first.is_some() && valid < lanes {
                bubbles += 1;
            }
            if valid > 0 {
                let f0 = *first.get_or_insert(cycle);
                let rel = (cycle - f0) as usize;
                let (frame, step) = (rel / steps, rel % steps);
                if frame < frames.len() {
                    for (lane, s) in data.iter().enumerate() {
                        if let Some(v) = s {
                            assembled[frame][self.output_layout.position(lane, step)] = *v;
                        }
                    }
                }
                received += 1;
                last = cycle;
            }
            cycle += 1;
        }

        let bits = self.cfg.stages();
        let spectra = assembled
            .into_iter()
            .map(|dif| {
                (0..n)
                    .map(|k| dif[k.reverse_bits() >> (usize::BITS - bits)])
                    .collect()
            })
            .collect();
        Ok(BatchRun {
            spectra,
            first_output_cycle: first.unwrap_or(0),
            last_output_cycle: last,
            bubbles,
        })
    }

    /// Runs one transform and reports measured cycle counts.
    pub fn run(&self, x: &[Complex]) -> Result<(Vec<Complex>, CycleReport)> {
        if x.len() != self.cfg.n {
            return Err(Error::invalid(format!(
                "input of {} points given to an N = {} engine",
                x.len(),
                self.cfg.n
            )));
        }
        let mut run = self.run_batch(&[x.to_vec()])?;
        let report = CycleReport::from_latency(&self.cfg, run.first_output_cycle);
        Ok((run.spectra.pop().unwrap_or_default(), report))
    }
}

/// Builds an engine for `cfg` and transforms `x`.
pub fn fft_engine_run(x: &[Complex], cfg: &EngineConfig) -> Result<(Vec<Complex>, CycleReport)> {
    PipelineEngine::new(*cfg)?.run(x)
}

struct StageState {
    butterflies: Vec<PipelinedButterfly>,
    step: Option<usize>,
    link: LinkState,
}

enum LinkState {
    Register(Vec<Sample>),
    Shuffle(Vec<Shuffler>),
}

impl StageState {
    fn new(plan: &StagePlan, cfg: &EngineConfig) -> Result<Self> {
        let link = match plan.link {
            Link::Register => LinkState::Register(vec![None; 2 * cfg.rows]),
            Link::Shuffle(len) => LinkState::Shuffle(
                (0..cfg.rows)
                    .map(|_| Shuffler::new(len))
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(StageState {
            butterflies: (0..cfg.rows)
                .map(|_| PipelinedButterfly::new(cfg.latency))
                .collect(),
            step: None,
            link,
        })
    }

    fn clock(&mut self, plan: &StagePlan, input: &[Sample], steps: usize) -> Vec<Sample> {
        if self.step.is_none() && input[plan.rows[0].0].is_some() {
            self.step = Some(0);
        }
        let mut out = vec![None; input.len()];
        for (row, &(lo, hi)) in plan.rows.iter().enumerate() {
            let operands = match (input[lo], input[hi], self.step) {
                (Some(a), Some(b), Some(step)) => Some((a, b, plan.rom[row][step])),
                _ => None,
            };
            if let Some((s, d)) = self.butterflies[row].clock(operands) {
                out[lo] = Some(s);
                out[hi] = Some(d);
            }
        }
        if let Some(step) = self.step.as_mut() {
            *step = (*step + 1) % steps;
        }
        match &mut self.link {
            LinkState::Register(regs) => std::mem::replace(regs, out),
            LinkState::Shuffle(shufflers) => {
                let mut next = vec![None; out.len()];
                for (j, sh) in shufflers.iter_mut().enumerate() {
                    let (u, l) = sh.clock(out[2 * j], out[2 * j + 1]);
                    next[2 * j] = u;
                    next[2 * j + 1] = l;
                }
                next
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::OperatorLatency;
    use super::*;
    use crate::numerics::{dft_1d, relative_error, Direction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(n: usize, r: usize, l_op: u32) -> EngineConfig {
        EngineConfig::new(n, r, OperatorLatency::uniform(l_op).unwrap(), 200e6).unwrap()
    }

    fn random(n: usize, seed: u64) -> Vec<Complex> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn delta_gives_all_ones() {
        for r in [1, 2, 4] {
            let mut x = vec![Complex::new(0.0, 0.0); 8];
            x[0] = Complex::new(1.0, 0.0);
            let (y, _) = fft_engine_run(&x, &cfg(8, r, 1)).unwrap();
            assert!(
                y.iter()
                    .all(|v| (v - Complex::new(1.0, 0.0)).norm() < 1e-15),
                "R={r}"
            );
        }
    }

    #[test]
    fn eight_point_schedule_is_the_dif_graph() {
        // Stage k pairs p with p + 2^(3-k); twiddle exponent (p mod 2^(3-k))·2^(k-1).
        for r in [1, 2, 4] {
            let e = PipelineEngine::new(cfg(8, r, 0)).unwrap();
            for k in 1..=3usize {
                let span = 1 << (3 - k);
                let mut expected: Vec<StageEdge> = (0..8)
                    .filter(|p| p & span == 0)
                    .map(|p| StageEdge {
                        upper: p,
                        lower: p + span,
                        exponent: (p % span) << (k - 1),
                    })
                    .collect();
                expected.sort();
                assert_eq!(e.stage_edges(k), expected, "R={r} stage {k}");
            }
        }
    }

    #[test]
    fn single_row_rom_addressing() {
        let n = 64;
        let e = PipelineEngine::new(cfg(n, 1, 0)).unwrap();
        for s in 1..=6usize {
            let rom = e.twiddle_rom(s, 0);
            assert_eq!(rom.len(), n / 2);
            for (tau, w) in rom.iter().enumerate() {
                let exp = (tau % (n >> s)) << (s - 1);
                assert_eq!(*w, twiddle(exp, n));
            }
        }
    }

    #[test]
    fn matches_oracle_small_sizes() {
        for (i, n) in [8usize, 16, 32, 64, 128, 256].into_iter().enumerate() {
            for r in [1, 2, 4] {
                let x = random(n, i as u64 * 10 + r as u64);
                let (y, _) = fft_engine_run(&x, &cfg(n, r, 2)).unwrap();
                let want = dft_1d(&x, Direction::Forward).unwrap();
                assert!(relative_error(&y, &want, &want) < 1e-12, "N={n} R={r}");
            }
        }
    }

    #[test]
    fn measured_latency_is_closed_form() {
        for n in [8usize, 32, 128, 512] {
            for r in [1, 2, 4] {
                for l_op in [0, 3, 14] {
                    let c = cfg(n, r, l_op);
                    let (_, rep) = fft_engine_run(&random(n, 1), &c).unwrap();
                    assert_eq!(
                        rep.l_fft,
                        c.first_output_latency(),
                        "N={n} R={r} l_op={l_op}"
                    );
                }
            }
        }
        let c = cfg(512, 1, 3);
        assert_eq!(fft_engine_run(&random(512, 2), &c).unwrap().1.l_fft, 381);
    }

    #[test]
    fn back_to_back_frames_have_no_bubbles() {
        for r in [1, 2, 4] {
            let c = cfg(64, r, 2);
            let e = PipelineEngine::new(c).unwrap();
            let frames: Vec<_> = (0..5).map(|s| random(64, 100 + s)).collect();
            let run = e.run_batch(&frames).unwrap();
            assert_eq!(run.bubbles, 0);
            assert_eq!(
                run.last_output_cycle - run.first_output_cycle + 1,
                (5 * c.steps()) as u64
            );
            for (x, y) in frames.iter().zip(&run.spectra) {
                let want = dft_1d(x, Direction::Forward).unwrap();
                assert!(relative_error(y, &want, &want) < 1e-12);
            }
        }
    }

    #[test]
    fn shift_register_storage_is_n_minus_2r() {
        for n in [8usize, 64, 1024, 8192] {
            for r in [1, 2, 4] {
                let e = PipelineEngine::new(cfg(n, r, 0)).unwrap();
                let per_row: usize = e.config().shuffler_lengths().iter().map(|l| 2 * l).sum();
                assert_eq!(e.shift_register_words(), per_row * r);
                assert_eq!(e.shift_register_words(), n - 2 * r);
            }
        }
    }

    #[test]
    fn size_mismatch_rejected() {
        assert!(fft_engine_run(&random(16, 0), &cfg(8, 1, 0)).is_err());
    }
}

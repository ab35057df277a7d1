//! Radix-2 DIF butterfly split into the three hardware operator stages.
//!
//! Stage A: four adders/subtractors on the inputs.
//! Stage B: four multipliers against the twiddle.
//! Stage C: one subtractor and one adder forming the rotated difference.

use super::shuffler::DelayLine;
use super::OperatorLatency;
use crate::numerics::Complex;

/// Every intermediate value of one butterfly evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButterflyTrace {
    /// `[A1, A2, A3, A4]`
    pub a: [f64; 4],
    /// `[B1, B2, B3, B4]`
    pub b: [f64; 4],
    /// `[C1, C2]`
    pub c: [f64; 2],
    pub sum: Complex,
    pub diff: Complex,
}

impl ButterflyTrace {
    pub fn compute(xi: Complex, xj: Complex, w: Complex) -> Self {
        let a = stage_a(xi, xj);
        let b = stage_b(&a, w);
        let c = stage_c(&b.b);
        ButterflyTrace {
            a: a.a,
            b: b.b,
            c,
            sum: Complex::new(b.a1, b.a3),
            diff: Complex::new(c[0], c[1]),
        }
    }
}

/// `(x_i + x_j, (x_i - x_j) * w)` through the stage A/B/C datapath.
pub fn butterfly(xi: Complex, xj: Complex, w: Complex) -> (Complex, Complex) {
    let t = ButterflyTrace::compute(xi, xj, w);
    (t.sum, t.diff)
}

#[derive(Debug, Clone, Copy)]
struct StageA {
    a: [f64; 4],
    w: Complex,
}

#[derive(Debug, Clone, Copy)]
struct StageB {
    a1: f64,
    a3: f64,
    b: [f64; 4],
}

fn stage_a(xi: Complex, xj: Complex) -> StageA {
    StageA {
        a: [xi.re + xj.re, xi.re - xj.re, xi.im + xj.im, xi.im - xj.im],
        w: Complex::new(0.0, 0.0),
    }
}

fn stage_b(a: &StageA, w: Complex) -> StageB {
    let [a1, a2, a3, a4] = a.a;
    StageB {
        a1,
        a3,
        b: [a2 * w.re, a4 * w.im, a2 * w.im, a4 * w.re],
    }
}

fn stage_c(b: &[f64; 4]) -> [f64; 2] {
    [b[0] - b[1], b[2] + b[3]]
}

/// Operand triple presented to a butterfly: `(x_i, x_j, w)`.
pub type ButterflyInput = (Complex, Complex, Complex);

/// Cycle model of one butterfly: an input register, then each operator
/// stage followed by its registration cycle. Total depth is
/// `l_A + l_B + l_C + 4`.
#[derive(Debug, Clone)]
pub struct PipelinedButterfly {
    input_reg: Option<ButterflyInput>,
    stage_a: DelayLine<StageA>,
    stage_b: DelayLine<StageB>,
    stage_c: DelayLine<(Complex, Complex)>,
}

impl PipelinedButterfly {
    pub fn new(latency: OperatorLatency) -> Self {
        PipelinedButterfly {
            input_reg: None,
            stage_a: DelayLine::new(latency.stage_a as usize + 1),
            stage_b: DelayLine::new(latency.stage_b as usize + 1),
            stage_c: DelayLine::new(latency.stage_c as usize + 1),
        }
    }

    /// Advances one clock. Returns whatever leaves stage C this cycle.
    pub fn clock(&mut self, input: Option<ButterflyInput>) -> Option<(Complex, Complex)> {
        let registered = std::mem::replace(&mut self.input_reg, input);
        // Twiddle rides along stage A on its own register chain.
        let a = self.stage_a.shift(registered.map(|(xi, xj, w)| StageA {
            w,
            ..stage_a(xi, xj)
        }));
        let b = self.stage_b.shift(a.map(|a| stage_b(&a, a.w)));
        self.stage_c.shift(b.map(|b| {
            let c = stage_c(&b.b);
            (Complex::new(b.a1, b.a3), Complex::new(c[0], c[1]))
        }))
    }
}

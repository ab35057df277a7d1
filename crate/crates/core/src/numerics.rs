//! Reference mathematics: twiddles, direct-sum DFT oracles and real packing.
//!
//! Everything here is a plain O(N²) (1D) or separable O(N⁴) (3D) sum with no
//! recursion, so the oracles share no code path with the pipelined engine.

use crate::grid::Grid3;
use crate::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Transform direction. `Inverse` uses conjugate twiddles and scales by 1/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Grid axis, `X` being the fastest-varying one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `W_N^n = exp(-i·2π·n/N)` for one index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twiddle {
    pub n: usize,
    pub size: usize,
    pub value: Complex,
}

impl Twiddle {
    pub fn new(n: usize, size: usize) -> Self {
        Twiddle {
            n,
            size,
            value: twiddle(n, size),
        }
    }
}

/// `exp(-i·2π·n/size)`, evaluated with one sin/cos pair per call.
pub fn twiddle(n: usize, size: usize) -> Complex {
    debug_assert!(size > 0);
    let n = n % size;
    if n == 0 {
        return Complex::new(1.0, 0.0);
    }
    let angle = -2.0 * std::f64::consts::PI * (n as f64) / (size as f64);
    Complex::new(angle.cos(), angle.sin())
}

/// All `size` twiddles, each from its own sin/cos call.
pub fn twiddle_table(size: usize) -> Vec<Complex> {
    (0..size).map(|n| twiddle(n, size)).collect()
}

/// Direct-sum DFT, any length `N >= 1`.
pub fn dft_1d(x: &[Complex], dir: Direction) -> Result<Vec<Complex>> {
    if x.is_empty() {
        return Err(Error::invalid("dft_1d needs at least one sample"));
    }
    let n = x.len();
    let mut table = twiddle_table(n);
    if dir == Direction::Inverse {
        table.iter_mut().for_each(|w| *w = w.conj());
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Complex::new(0.0, 0.0);
        for (j, xj) in x.iter().enumerate() {
            acc += table[(k * j) % n] * xj;
        }
        out.push(acc);
    }
    if dir == Direction::Inverse {
        let scale = 1.0 / n as f64;
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(out)
}

/// Direct-sum 3D DFT applied along x, then y, then z.
pub fn dft_3d(field: &Grid3<Complex>, dir: Direction) -> Result<Grid3<Complex>> {
    dft_3d_axes(field, dir, [Axis::X, Axis::Y, Axis::Z])
}

/// Direct-sum 3D DFT with an explicit axis order.
pub fn dft_3d_axes(
    field: &Grid3<Complex>,
    dir: Direction,
    order: [Axis; 3],
) -> Result<Grid3<Complex>> {
    let mut seen = [false; 3];
    for a in order {
        seen[a as usize] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::invalid("axis order must name each axis once"));
    }
    let mut out = field.clone();
    for axis in order {
        out = dft_along(&out, axis, dir)?;
    }
    Ok(out)
}

/// Flat-data entry point: `data` must hold `n^3` values with x fastest.
pub fn dft_3d_flat(data: &[Complex], n: usize, dir: Direction) -> Result<Vec<Complex>> {
    let grid = Grid3::from_vec(n, data.to_vec())?;
    Ok(dft_3d(&grid, dir)?.into_vec())
}

/// Applies `dft_1d` to every line of `field` along `axis`.
pub fn dft_along(field: &Grid3<Complex>, axis: Axis, dir: Direction) -> Result<Grid3<Complex>> {
    let n = field.n();
    let mut out = field.clone();
    let mut line = vec![Complex::new(0.0, 0.0); n];
    for a in 0..n {
        for b in 0..n {
            let at = |t: usize| match axis {
                Axis::X => [t, a, b],
                Axis::Y => [a, t, b],
                Axis::Z => [a, b, t],
            };
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = field[at(t)];
            }
            let spectrum = dft_1d(&line, dir)?;
            for (t, v) in spectrum.into_iter().enumerate() {
                out[at(t)] = v;
            }
        }
    }
    Ok(out)
}

/// First `N/2 + 1` bins of the DFT of a real sequence.
///
/// The remaining bins follow from `X[k] = conj(X[N-k])`; see
/// [`unpack_real_spectrum`].
pub fn pack_real_to_complex(x: &[f64]) -> Result<Vec<Complex>> {
    let n = x.len();
    if n == 0 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "real packing needs an even, non-zero length, got {n}"
        )));
    }
    let table = twiddle_table(n);
    let bins = n / 2 + 1;
    let mut out = Vec::with_capacity(bins);
    for k in 0..bins {
        let mut acc = Complex::new(0.0, 0.0);
        for (j, &xj) in x.iter().enumerate() {
            acc += table[(k * j) % n] * xj;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Rebuilds the full N-point spectrum from `N/2 + 1` packed bins.
pub fn unpack_real_spectrum(packed: &[Complex], n: usize) -> Result<Vec<Complex>> {
    if n == 0 || n % 2 != 0 || packed.len() != n / 2 + 1 {
        return Err(Error::invalid(format!(
            "{} packed bins do not describe a length-{n} real spectrum",
            packed.len()
        )));
    }
    Ok((0..n)
        .map(|k| {
            if k <= n / 2 {
                packed[k]
            } else {
                packed[n - k].conj()
            }
        })
        .collect())
}

pub fn complexify(x: &[f64]) -> Vec<Complex> {
    x.iter().map(|&v| Complex::new(v, 0.0)).collect()
}

pub fn l2_norm(x: &[Complex]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[Complex], b: &[Complex]) -> f64 {
    assert_eq!(a.len(), b.len(), "compared vectors differ in length");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max elementwise absolute error normalised by the L2 norm of `reference`.
///
/// A zero reference norm falls back to the absolute error.
pub fn relative_error(actual: &[Complex], expected: &[Complex], reference: &[Complex]) -> f64 {
    let norm = l2_norm(reference);
    let err = max_abs_diff(actual, expected);
    if norm > 0.0 {
        err / norm
    } else {
        err
    }
}

/// Tolerance used for every "matches the oracle" check.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

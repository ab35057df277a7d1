//! Two-path data shuffler between consecutive pipelined stages.
//!
//! Each shuffler holds two shift registers of length `L`. The lower input is
//! delayed before the crossbar, the upper output after it, and the crossbar
//! select is the MSB of a counter over `0..2L`. One output register follows,
//! so the first valid output appears `L + 1` cycles after the first input.

use std::collections::VecDeque;

use crate::numerics::Complex;
use crate::{Error, Result};

/// A fixed-depth register chain. Depth 0 passes values through unchanged.
#[derive(Debug, Clone)]
pub struct DelayLine<T> {
    slots: VecDeque<Option<T>>,
}

impl<T> DelayLine<T> {
    pub fn new(depth: usize) -> Self {
        let mut slots = VecDeque::with_capacity(depth);
        slots.resize_with(depth, || None);
        DelayLine { slots }
    }

    pub fn depth(&self) -> usize {
        self.slots.len()
    }

    pub fn shift(&mut self, input: Option<T>) -> Option<T> {
        if self.slots.is_empty() {
            return input;
        }
        self.slots.push_back(input);
        self.slots.pop_front().flatten()
    }
}

pub type Sample = Option<Complex>;

#[derive(Debug, Clone)]
pub struct Shuffler {
    len: usize,
    lower_in: DelayLine<Complex>,
    upper_out: DelayLine<Complex>,
    counter: Option<usize>,
    out_reg: (Sample, Sample),
}

impl Shuffler {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("shuffler length must be at least 1"));
        }
        Ok(Shuffler {
            len,
            lower_in: DelayLine::new(len),
            upper_out: DelayLine::new(len),
            counter: None,
            out_reg: (None, None),
        })
    }

    pub fn shift_len(&self) -> usize {
        self.len
    }

    /// Register words held by this shuffler.
    pub fn storage_words(&self) -> usize {
        2 * self.len
    }

    /// One clock. The counter starts on the first valid upper input and then
    /// runs freely, so back-to-back frames keep their alignment.
    pub fn clock(&mut self, upper: Sample, lower: Sample) -> (Sample, Sample) {
        if self.counter.is_none() && upper.is_some() {
            self.counter = Some(0);
        }
        let cross = self.counter.is_some_and(|c| c >= self.len);
        let delayed_lower = self.lower_in.shift(lower);
        let (to_upper_line, out_lower) = if cross {
            (delayed_lower, upper)
        } else {
            (upper, delayed_lower)
        };
        let out_upper = self.upper_out.shift(to_upper_line);
        if let Some(c) = self.counter.as_mut() {
            *c = (*c + 1) % (2 * self.len);
        }
        std::mem::replace(&mut self.out_reg, (out_upper, out_lower))
    }
}

/// Runs two sample streams through a length-`len` shuffler and returns both
/// output streams, extended by `len + 1` drain cycles.
pub fn data_shuffle(
    upper: &[Sample],
    lower: &[Sample],
    len: usize,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if upper.len() != lower.len() {
        return Err(Error::invalid(format!(
            "stream lengths differ: {} vs {}",
            upper.len(),
            lower.len()
        )));
    }
    let mut sh = Shuffler::new(len)?;
    let total = upper.len() + len + 1;
    let mut out_u = Vec::with_capacity(total);
    let mut out_l = Vec::with_capacity(total);
    for t in 0..total {
        let (u, l) = sh.clock(
            upper.get(t).copied().flatten(),
            lower.get(t).copied().flatten(),
        );
        out_u.push(u);
        out_l.push(l);
    }
    Ok((out_u, out_l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(base: f64, count: usize) -> Vec<Sample> {
        (0..count)
            .map(|i| Some(Complex::new(base + i as f64, 0.0)))
            .collect()
    }

    fn re(s: Sample) -> Option<f64> {
        s.map(|c| c.re)
    }

    #[test]
    fn length_one_trace() {
        // upper a0..a3 = 0..3, lower b0..b3 = 10..13
        let (u, l) = data_shuffle(&tagged(0.0, 4), &tagged(10.0, 4), 1).unwrap();
        let u: Vec<_> = u.into_iter().map(re).collect();
        let l: Vec<_> = l.into_iter().map(re).collect();
        assert_eq!(u.len(), 6);
        assert_eq!(&u[2..], &[Some(0.0), Some(10.0), Some(2.0), Some(12.0)]);
        assert_eq!(&l[2..], &[Some(1.0), Some(11.0), Some(3.0), Some(13.0)]);
        assert_eq!(&u[..2], &[None, None]);
    }

    #[test]
    fn length_four_pairs_blocks() {
        let (u, l) = data_shuffle(&tagged(0.0, 8), &tagged(100.0, 8), 4).unwrap();
        let first = u.iter().position(Option::is_some).unwrap();
        assert_eq!(first, 5);
        let u: Vec<_> = u[5..].iter().map(|s| re(*s).unwrap()).collect();
        let l: Vec<_> = l[5..].iter().map(|s| re(*s).unwrap()).collect();
        assert_eq!(u, [0.0, 1.0, 2.0, 3.0, 100.0, 101.0, 102.0, 103.0]);
        assert_eq!(l, [4.0, 5.0, 6.0, 7.0, 104.0, 105.0, 106.0, 107.0]);
    }

    #[test]
    fn first_output_after_l_plus_one() {
        for len in [1usize, 2, 4, 8] {
            let n = 4 * len;
            let (u, l) = data_shuffle(&tagged(0.0, n), &tagged(1000.0, n), len).unwrap();
            assert_eq!(u.iter().position(Option::is_some), Some(len + 1));
            let valid = u.iter().chain(l.iter()).filter(|s| s.is_some()).count();
            assert_eq!(valid, 2 * n);
        }
    }

    #[test]
    fn zero_length_rejected() {
        assert!(Shuffler::new(0).is_err());
        assert!(data_shuffle(&[], &[], 0).is_err());
        assert!(data_shuffle(&[None], &[], 1).is_err());
    }

    #[test]
    fn delay_line_depth() {
        let mut d = DelayLine::new(3);
        let out: Vec<_> = (0..6).map(|i| d.shift(Some(i))).collect();
        assert_eq!(out, [None, None, None, Some(0), Some(1), Some(2)]);
        let mut p = DelayLine::new(0);
        assert_eq!(p.shift(Some(7)), Some(7));
    }
}

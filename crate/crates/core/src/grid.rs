//! Cubic grids and the binary grid file format.
//!
//! Layout of a grid file, all integers and values little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `b"G3DF"`                         |
//! | 4      | 4    | `n` (u32), points per axis              |
//! | 8      | 4    | `mu` (u32), number of field components  |
//! | 12     | 4    | word kind (u32): 1 = real, 2 = complex  |
//! | 16     | ...  | `mu * n^3` words, component-major       |
//!
//! Within a component, values are row-major with `x` fastest: the word for
//! point `(x, y, z)` sits at index `x + n * (y + n * z)`. A real word is one
//! binary64; a complex word is two binary64 values, real part first.

use std::io::{Read, Write};
use std::ops::{Index, IndexMut};

use crate::numerics::Complex;
use crate::{Error, Result};

pub const GRID_MAGIC: [u8; 4] = *b"G3DF";
pub const GRID_HEADER_BYTES: usize = 16;

/// An `n × n × n` grid stored with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid3<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Grid3 {
            n,
            data: vec![value; n * n * n],
        }
    }
}

impl<T> Grid3<T> {
    pub fn from_vec(n: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("grid size must be at least 1"));
        }
        if data.len() != n * n * n {
            return Err(Error::invalid(format!(
                "grid of {} values is not a cube of side {n}",
                data.len()
            )));
        }
        Ok(Grid3 { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    data.push(f(x, y, z));
                }
            }
        }
        Grid3 { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn offset(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.n * (y + self.n * z)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid3<U> {
        Grid3 {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> Index<[usize; 3]> for Grid3<T> {
    type Output = T;

    fn index(&self, [x, y, z]: [usize; 3]) -> &T {
        &self.data[self.offset(x, y, z)]
    }
}

impl<T> IndexMut<[usize; 3]> for Grid3<T> {
    fn index_mut(&mut self, [x, y, z]: [usize; 3]) -> &mut T {
        let o = self.offset(x, y, z);
        &mut self.data[o]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordKind {
    Real = 1,
    Complex = 2,
}

/// The `mu` components stored in a grid file.
#[derive(Debug, Clone, PartialEq)]
pub enum GridComponents {
    Real(Vec<Grid3<f64>>),
    Complex(Vec<Grid3<Complex>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub n: usize,
    pub components: GridComponents,
}

impl GridFile {
    pub fn real(components: Vec<Grid3<f64>>) -> Result<Self> {
        let n = common_side(components.iter().map(Grid3::n))?;
        Ok(GridFile {
            n,
            components: GridComponents::Real(components),
        })
    }

    pub fn complex(components: Vec<Grid3<Complex>>) -> Result<Self> {
        let n = common_side(components.iter().map(Grid3::n))?;
        Ok(GridFile {
            n,
            components: GridComponents::Complex(components),
        })
    }

    pub fn mu(&self) -> usize {
        match &self.components {
            GridComponents::Real(c) => c.len(),
            GridComponents::Complex(c) => c.len(),
        }
    }

    pub fn kind(&self) -> WordKind {
        match self.components {
            GridComponents::Real(_) => WordKind::Real,
            GridComponents::Complex(_) => WordKind::Complex,
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let n = u32::try_from(self.n).map_err(|_| Error::invalid("grid side exceeds u32"))?;
        w.write_all(&GRID_MAGIC)?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&(self.mu() as u32).to_le_bytes())?;
        w.write_all(&(self.kind() as u32).to_le_bytes())?;
        match &self.components {
            GridComponents::Real(comps) => {
                for g in comps {
                    for v in g.as_slice() {
                        w.write_all(&v.to_le_bytes())?;
                    }
                }
            }
            GridComponents::Complex(comps) => {
                for g in comps {
                    for v in g.as_slice() {
                        w.write_all(&v.re.to_le_bytes())?;
                        w.write_all(&v.im.to_le_bytes())?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; GRID_HEADER_BYTES];
        r.read_exact(&mut header)
            .map_err(|e| Error::Format(format!("grid header: {e}")))?;
        if header[0..4] != GRID_MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:02x?}, expected {:02x?}",
                &header[0..4],
                GRID_MAGIC
            )));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap()) as usize;
        let (n, mu, kind) = (word(4), word(8), word(12));
        if n == 0 {
            return Err(Error::Format("grid side is zero".into()));
        }
        let points = n
            .checked_pow(3)
            .ok_or_else(|| Error::Format(format!("grid side {n} too large")))?;
        let mut read_f64 = || -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)
                .map_err(|e| Error::Format(format!("grid payload: {e}")))?;
            Ok(f64::from_le_bytes(b))
        };
        let components = match kind {
            1 => {
                let mut comps = Vec::with_capacity(mu);
                for _ in 0..mu {
                    let data = (0..points)
                        .map(|_| read_f64())
                        .collect::<Result<Vec<_>>>()?;
                    comps.push(Grid3 { n, data });
                }
                GridComponents::Real(comps)
            }
            2 => {
                let mut comps = Vec::with_capacity(mu);
                for _ in 0..mu {
                    let mut data = Vec::with_capacity(points);
                    for _ in 0..points {
                        let re = read_f64()?;
                        let im = read_f64()?;
                        data.push(Complex::new(re, im));
                    }
                    comps.push(Grid3 { n, data });
                }
                GridComponents::Complex(comps)
            }
            other => return Err(Error::Format(format!("unknown word kind {other}"))),
        };
        Ok(GridFile { n, components })
    }
}

fn common_side(mut sides: impl Iterator<Item = usize>) -> Result<usize> {
    let first = sides
        .next()
        .ok_or_else(|| Error::invalid("a grid file needs at least one component"))?;
    if sides.any(|s| s != first) {
        return Err(Error::invalid("grid components differ in size"));
    }
    Ok(first)
}

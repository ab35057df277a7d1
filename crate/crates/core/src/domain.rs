//! 2D pencil decomposition of an `N³` grid over `P_u × P_v` processes.
//!
//! Points are `(i, j, k)` with `i` along x. Ownership uses contiguous blocks:
//!
//! | phase | local axis | `u` from | `v` from |
//! |-------|------------|----------|----------|
//! | X     | `i`        | `j`      | `k`      |
//! | Y     | `j`        | `i`      | `k`      |
//! | Z     | `k`        | `i`      | `j`      |
//!
//! After a real-to-complex X transform only `N/2` regular bins remain along
//! `i` ([`Extent::Packed`]); the `i = N/2` bin travels in a side buffer.

use std::ops::Range;

use crate::{Error, Result, COMPLEX_BYTES, WORD_BYTES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transpose {
    /// X pencils to Y pencils, within rows of equal `v`.
    XY,
    /// Y pencils to Z pencils, within columns of equal `u`.
    YZ,
}

/// Extent of the `i` axis a layout covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extent {
    Full,
    Packed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub u: usize,
    pub v: usize,
}

impl NodeId {
    pub fn new(u: usize, v: usize) -> Self {
        NodeId { u, v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PencilGrid {
    pub n: usize,
    pub pu: usize,
    pub pv: usize,
}

/// An axis-aligned box of grid points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointBox {
    pub i: Range<usize>,
    pub j: Range<usize>,
    pub k: Range<usize>,
}

impl PointBox {
    pub fn count(&self) -> usize {
        self.i.len() * self.j.len() * self.k.len()
    }

    pub fn contains(&self, [i, j, k]: [usize; 3]) -> bool {
        self.i.contains(&i) && self.j.contains(&j) && self.k.contains(&k)
    }

    /// Points with `i` fastest.
    pub fn points(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.k.clone().flat_map(move |k| {
            self.j
                .clone()
                .flat_map(move |j| self.i.clone().map(move |i| [i, j, k]))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub src: NodeId,
    pub dst: NodeId,
    pub region: PointBox,
}

/// Point sets moved by one transpose, plus the parts each node keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransposeMap {
    pub which: Transpose,
    pub transfers: Vec<Transfer>,
    pub kept: Vec<Transfer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VolumeReport {
    /// Bytes per node of the real input, `s·N³/P`.
    pub v: u64,
    /// Bytes per node of the packed complex data, `s·(N³ + 2N²)/P`.
    pub v_prime: u64,
    /// Application RAM per node, `2s·N³/P`.
    pub ram_per_node: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryArch {
    Sequential,
    /// Streaming pipelined design with its extra plane buffer.
    Pipelined,
}

/// 8 GiB of device memory.
pub const DEVICE_MEMORY_BYTES: u64 = 1 << 33;

impl PencilGrid {
    pub fn new(n: usize, pu: usize, pv: usize) -> Result<Self> {
        if n == 0 || pu == 0 || pv == 0 {
            return Err(Error::invalid("N, P_u and P_v must be positive"));
        }
        if n % pu != 0 || n % pv != 0 {
            return Err(Error::invalid(format!(
                "P_u = {pu} and P_v = {pv} must both divide N = {n}"
            )));
        }
        Ok(PencilGrid { n, pu, pv })
    }

    /// Square process grid for a square `P`.
    pub fn square(n: usize, p: usize) -> Result<Self> {
        let side = (p as f64).sqrt().round() as usize;
        if side * side != p {
            return Err(Error::invalid(format!("P = {p} is not a perfect square")));
        }
        Self::new(n, side, side)
    }

    pub fn p(&self) -> usize {
        self.pu * self.pv
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.pv).flat_map(move |v| (0..self.pu).map(move |u| NodeId::new(u, v)))
    }

    /// Row-major node index, `u` fastest.
    pub fn node_index(&self, node: NodeId) -> usize {
        node.u + self.pu * node.v
    }

    pub fn i_extent(&self, extent: Extent) -> usize {
        match extent {
            Extent::Full => self.n,
            Extent::Packed => self.n / 2,
        }
    }

    fn check_extent(&self, extent: Extent) -> Result<()> {
        if extent == Extent::Packed && (self.n % 2 != 0 || (self.n / 2) % self.pu != 0) {
            return Err(Error::invalid(format!(
                "packed layout needs P_u = {} to divide N/2 = {}",
                self.pu,
                self.n / 2
            )));
        }
        Ok(())
    }

    fn block(len: usize, parts: usize, idx: usize) -> Range<usize> {
        let b = len / parts;
        idx * b..(idx + 1) * b
    }

    /// Points owned by `node` in `phase`.
    pub fn local_box(&self, node: NodeId, phase: Phase, extent: Extent) -> PointBox {
        let n = self.n;
        let ni = self.i_extent(extent);
        match phase {
            Phase::X => PointBox {
                i: 0..ni,
                j: Self::block(n, self.pu, node.u),
                k: Self::block(n, self.pv, node.v),
            },
            Phase::Y => PointBox {
                i: Self::block(ni, self.pu, node.u),
                j: 0..n,
                k: Self::block(n, self.pv, node.v),
            },
            Phase::Z => PointBox {
                i: Self::block(ni, self.pu, node.u),
                j: Self::block(n, self.pv, node.v),
                k: 0..n,
            },
        }
    }

    pub fn owner_of(&self, point: [usize; 3], phase: Phase) -> Result<NodeId> {
        self.owner_in(point, phase, Extent::Full)
    }

    pub fn owner_in(&self, [i, j, k]: [usize; 3], phase: Phase, extent: Extent) -> Result<NodeId> {
        self.check_extent(extent)?;
        let (n, ni) = (self.n, self.i_extent(extent));
        if i >= ni || j >= n || k >= n {
            return Err(Error::invalid(format!(
                "point ({i}, {j}, {k}) outside the {ni}×{n}×{n} grid"
            )));
        }
        Ok(match phase {
            Phase::X => NodeId::new(j * self.pu / n, k * self.pv / n),
            Phase::Y => NodeId::new(i * self.pu / ni, k * self.pv / n),
            Phase::Z => NodeId::new(i * self.pu / ni, j * self.pv / n),
        })
    }

    pub fn transpose_map(&self, which: Transpose, extent: Extent) -> Result<TransposeMap> {
        self.check_extent(extent)?;
        let n = self.n;
        let ni = self.i_extent(extent);
        let mut transfers = Vec::new();
        let mut kept = Vec::new();
        for src in self.nodes() {
            let peers = match which {
                Transpose::XY => self.pu,
                Transpose::YZ => self.pv,
            };
            for peer in 0..peers {
                let (dst, region) = match which {
                    Transpose::XY => (
                        NodeId::new(peer, src.v),
                        PointBox {
                            i: Self::block(ni, self.pu, peer),
                            j: Self::block(n, self.pu, src.u),
                            k: Self::block(n, self.pv, src.v),
                        },
                    ),
                    Transpose::YZ => (
                        NodeId::new(src.u, peer),
                        PointBox {
                            i: Self::block(ni, self.pu, src.u),
                            j: Self::block(n, self.pv, peer),
                            k: Self::block(n, self.pv, src.v),
                        },
                    ),
                };
                let t = Transfer { src, dst, region };
                if dst == src {
                    kept.push(t);
                } else {
                    transfers.push(t);
                }
            }
        }
        Ok(TransposeMap {
            which,
            transfers,
            kept,
        })
    }

    pub fn volumes(&self) -> VolumeReport {
        let (n, p) = (self.n as u64, self.p() as u64);
        VolumeReport {
            v: WORD_BYTES * n.pow(3) / p,
            v_prime: WORD_BYTES * (n.pow(3) + 2 * n.pow(2)) / p,
            ram_per_node: 2 * WORD_BYTES * n.pow(3) / p,
        }
    }

    /// Exact per-node memory for the given architecture.
    pub fn memory_occupancy(&self, arch: MemoryArch) -> u64 {
        let seq = 2 * self.volumes().v_prime;
        match arch {
            MemoryArch::Sequential => seq,
            MemoryArch::Pipelined => seq + 2 * WORD_BYTES * (self.n as u64).pow(2) / self.pu as u64,
        }
    }

    /// Whether the leading-order footprint `2s·N³/P` fits `device_bytes`.
    /// The `N²` correction terms are below 0.2% from `N = 1024` up and are
    /// left out, so a footprint of exactly the device size still fits.
    pub fn fits_device(&self, device_bytes: u64) -> bool {
        self.volumes().ram_per_node <= device_bytes
    }

    /// Complex words a node holds in the packed layout plus its share of the
    /// Nyquist plane: `V' / 16`.
    pub fn packed_words_per_node(&self) -> u64 {
        self.volumes().v_prime / COMPLEX_BYTES
    }
}

//! Functional simulation of the distributed 3D FFT.
//!
//! `P = P_u × P_v` virtual nodes run in one process on a fixed round-robin
//! schedule. Each node transforms its pencils with the pipelined engine and
//! the transposes move data as one bulk message per `(src, dst, phase)`, sent
//! in ascending `(u, v)` order of source and then destination.
//!
//! For real input the X transform keeps the `N/2` regular bins in the packed
//! pencil layout and moves bin `i = N/2` through a side buffer of `N²/P`
//! words per node:
//!
//! - the XY fold splits each node's slice by `k` into `P_u` sub-blocks, one
//!   per row peer;
//! - the YZ fold splits it by `j` into the Z-phase blocks;
//! - a third fold within rows ([`CommPhase::NyquistZ`]) completes its `k`
//!   pencils.
//!
//! Every fold stays inside a row or a column of the process grid.

use std::io::Write;
use std::net::Ipv4Addr;

use crate::domain::{Extent, NodeId, PencilGrid, PointBox};
use crate::fft_pipeline::{EngineConfig, OperatorLatency, PipelineEngine};
use crate::numerics::{Axis, Complex};
use crate::udp_codec::{
    decode_frame, encode_frame, DatapathConfig, Decoded, HeaderConfig, MacAddr, MAX_PAYLOAD,
};
use crate::{Error, Grid3, Result, COMPLEX_BYTES};

/// Complex words per UDP payload in wire mode.
pub const WORDS_PER_DATAGRAM: usize = MAX_PAYLOAD / COMPLEX_BYTES as usize;
pub const WIRE_PORT: u16 = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CommPhase {
    XY,
    YZ,
    NyquistZ,
}

impl CommPhase {
    pub fn name(&self) -> &'static str {
        match self {
            CommPhase::XY => "xy",
            CommPhase::YZ => "yz",
            CommPhase::NyquistZ => "nyquist_z",
        }
    }
}

/// One bulk transfer, or the part of a node's data it keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrafficRecord {
    pub phase: CommPhase,
    pub src: NodeId,
    pub dst: NodeId,
    pub words: usize,
    /// Datagrams needed on the wire, `ceil(bytes / payload size)`.
    pub frames: usize,
}

impl TrafficRecord {
    pub fn bytes(&self) -> u64 {
        self.words as u64 * COMPLEX_BYTES
    }

    pub fn is_local(&self) -> bool {
        self.src == self.dst
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommLedger {
    /// In send order. Local records describe kept data and cost no traffic.
    pub records: Vec<TrafficRecord>,
}

impl CommLedger {
    fn phase_records(&self, phase: CommPhase) -> impl Iterator<Item = &TrafficRecord> {
        self.records.iter().filter(move |r| r.phase == phase)
    }

    pub fn messages(&self) -> impl Iterator<Item = &TrafficRecord> {
        self.records.iter().filter(|r| !r.is_local())
    }

    pub fn sent_bytes(&self, phase: CommPhase, node: NodeId) -> u64 {
        self.phase_records(phase)
            .filter(|r| !r.is_local() && r.src == node)
            .map(TrafficRecord::bytes)
            .sum()
    }

    pub fn received_bytes(&self, phase: CommPhase, node: NodeId) -> u64 {
        self.phase_records(phase)
            .filter(|r| !r.is_local() && r.dst == node)
            .map(TrafficRecord::bytes)
            .sum()
    }

    pub fn kept_bytes(&self, phase: CommPhase, node: NodeId) -> u64 {
        self.phase_records(phase)
            .filter(|r| r.is_local() && r.src == node)
            .map(TrafficRecord::bytes)
            .sum()
    }

    pub fn link_messages(&self, src: NodeId, dst: NodeId) -> usize {
        self.messages()
            .filter(|r| r.src == src && r.dst == dst)
            .count()
    }

    pub fn total_sent_bytes(&self, phase: CommPhase) -> u64 {
        self.phase_records(phase)
            .filter(|r| !r.is_local())
            .map(TrafficRecord::bytes)
            .sum()
    }

    pub fn total_frames(&self) -> usize {
        self.messages().map(|r| r.frames).sum()
    }

    /// One CSV row per record, header first.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "phase,kind,src_u,src_v,dst_u,dst_v,words,bytes,frames")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.phase.name(),
                if r.is_local() { "kept" } else { "sent" },
                r.src.u,
                r.src.v,
                r.dst.u,
                r.dst.v,
                r.words,
                r.bytes(),
                if r.is_local() { 0 } else { r.frames }
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireOptions {
    pub datapath: DatapathConfig,
    /// Keep a copy of every encoded frame.
    pub capture: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub rows: usize,
    pub latency: OperatorLatency,
    /// Route transpose payloads through the UDP codec.
    pub wire: Option<WireOptions>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            rows: 1,
            latency: OperatorLatency {
                stage_a: 1,
                stage_b: 1,
                stage_c: 1,
            },
            wire: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistRun {
    pub spectrum: Grid3<Complex>,
    pub ledger: CommLedger,
    /// Encoded frames in send order, when capture was requested.
    pub frames: Vec<Vec<u8>>,
}

/// A dense box of values whose first listed axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub region: PointBox,
    pub order: [Axis; 3],
    pub data: Vec<Complex>,
}

fn coord(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

fn range_of(b: &PointBox, axis: Axis) -> &std::ops::Range<usize> {
    match axis {
        Axis::X => &b.i,
        Axis::Y => &b.j,
        Axis::Z => &b.k,
    }
}

fn intersect(a: &PointBox, b: &PointBox) -> Option<PointBox> {
    let r = |x: &std::ops::Range<usize>, y: &std::ops::Range<usize>| {
        x.start.max(y.start)..x.end.min(y.end)
    };
    let out = PointBox {
        i: r(&a.i, &b.i),
        j: r(&a.j, &b.j),
        k: r(&a.k, &b.k),
    };
    (out.count() > 0).then_some(out)
}

impl Block {
    fn zeros(region: PointBox, order: [Axis; 3]) -> Self {
        let len = region.count();
        Block {
            region,
            order,
            data: vec![Complex::new(0.0, 0.0); len],
        }
    }

    fn offset(&self, p: [usize; 3]) -> usize {
        let mut off = 0;
        let mut stride = 1;
        for &a in &self.order {
            let r = range_of(&self.region, a);
            off += (p[coord(a)] - r.start) * stride;
            stride *= r.len();
        }
        off
    }

    pub fn get(&self, p: [usize; 3]) -> Complex {
        self.data[self.offset(p)]
    }

    fn set(&mut self, p: [usize; 3], v: Complex) {
        let o = self.offset(p);
        self.data[o] = v;
    }
}

/// Which pencils a node currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodePhase {
    X,
    Y,
    Z,
    Done,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub phase: NodePhase,
    pub regular: Vec<Block>,
    /// Side buffer for the `i = N/2` plane (real input only).
    pub nyquist: Vec<Block>,
}

/// Next action of a [`Simulation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    TransformX,
    FoldXY,
    TransformY,
    FoldYZ,
    FoldNyquistZ,
    TransformZ,
    Finished,
}

/// Step-by-step distributed transform. Nodes are indexed `u + P_u·v`.
pub struct Simulation {
    grid: PencilGrid,
    real_input: bool,
    engine: PipelineEngine,
    wire: Option<WireOptions>,
    nodes: Vec<NodeState>,
    next: Step,
    ledger: CommLedger,
    frames: Vec<Vec<u8>>,
    datagram_seq: u16,
}

fn block_range(len: usize, parts: usize, idx: usize) -> std::ops::Range<usize> {
    let b = len / parts;
    idx * b..(idx + 1) * b
}

fn sub_range(r: &std::ops::Range<usize>, parts: usize, idx: usize) -> std::ops::Range<usize> {
    let b = r.len() / parts;
    r.start + idx * b..r.start + (idx + 1) * b
}

pub fn node_ip(node: NodeId) -> Ipv4Addr {
    Ipv4Addr::new(10, 0, node.u as u8, node.v as u8)
}

pub fn node_mac(node: NodeId) -> MacAddr {
    MacAddr([0x02, 0, 0, 0, node.u as u8, node.v as u8])
}

impl Simulation {
    fn validate(grid: &PencilGrid, opts: &SimOptions, real_input: bool) -> Result<EngineConfig> {
        let n = grid.n;
        let cfg = EngineConfig::new(n, opts.rows, opts.latency, 200e6)?;
        if real_input {
            if (n / 2) % grid.pu != 0 {
                return Err(Error::invalid(format!(
                    "real input needs P_u = {} to divide N/2 = {}",
                    grid.pu,
                    n / 2
                )));
            }
            if n % grid.p() != 0 {
                return Err(Error::invalid(format!(
                    "real input needs P = {} to divide N = {n} for the Nyquist plane",
                    grid.p()
                )));
            }
        }
        if opts.wire.is_some() && (grid.pu > 256 || grid.pv > 256) {
            return Err(Error::invalid(
                "wire mode addresses at most 256 × 256 nodes",
            ));
        }
        Ok(cfg)
    }

    fn with_nodes(
        grid: PencilGrid,
        opts: &SimOptions,
        real_input: bool,
        mut load: impl FnMut(NodeId, &PointBox) -> Vec<Complex>,
    ) -> Result<Self> {
        let cfg = Self::validate(&grid, opts, real_input)?;
        let mut nodes = Vec::with_capacity(grid.p());
        for v in 0..grid.pv {
            for u in 0..grid.pu {
                let id = NodeId::new(u, v);
                let region = grid.local_box(id, crate::domain::Phase::X, Extent::Full);
                let data = load(id, &region);
                nodes.push(NodeState {
                    id,
                    phase: NodePhase::X,
                    regular: vec![Block {
                        region,
                        order: [Axis::X, Axis::Y, Axis::Z],
                        data,
                    }],
                    nyquist: Vec::new(),
                });
            }
        }
        Ok(Simulation {
            grid,
            real_input,
            engine: PipelineEngine::new(cfg)?,
            wire: opts.wire,
            nodes,
            next: Step::TransformX,
            ledger: CommLedger::default(),
            frames: Vec::new(),
            datagram_seq: 0,
        })
    }

    /// Scatters a real field into X pencils.
    pub fn from_real(field: &Grid3<f64>, grid: PencilGrid, opts: &SimOptions) -> Result<Self> {
        check_size(field.n(), &grid)?;
        Self::with_nodes(grid, opts, true, |_, b| {
            b.points()
                .map(|[i, j, k]| Complex::new(field[[i, j, k]], 0.0))
                .collect()
        })
    }

    /// Scatters a complex field into X pencils; all `N` bins are kept.
    pub fn from_complex(
        field: &Grid3<Complex>,
        grid: PencilGrid,
        opts: &SimOptions,
    ) -> Result<Self> {
        check_size(field.n(), &grid)?;
        Self::with_nodes(grid, opts, false, |_, b| {
            b.points().map(|p| field[p]).collect()
        })
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn next_step(&self) -> Step {
        self.next
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    fn extent(&self) -> Extent {
        if self.real_input {
            Extent::Packed
        } else {
            Extent::Full
        }
    }

    /// Performs the next step and returns it.
    pub fn step(&mut self) -> Result<Step> {
        let step = self.next;
        match step {
            Step::TransformX => {
                self.transform_all(Axis::X)?;
                if self.real_input {
                    self.split_nyquist();
                }
                self.next = Step::FoldXY;
            }
            Step::FoldXY => {
                self.fold(CommPhase::XY)?;
                self.set_phase(NodePhase::Y);
                self.next = Step::TransformY;
            }
            Step::TransformY => {
                self.transform_all(Axis::Y)?;
                self.next = Step::FoldYZ;
            }
            Step::FoldYZ => {
                self.fold(CommPhase::YZ)?;
                self.next = if self.real_input {
                    Step::FoldNyquistZ
                } else {
                    self.set_phase(NodePhase::Z);
                    Step::TransformZ
                };
            }
            Step::FoldNyquistZ => {
                self.fold(CommPhase::NyquistZ)?;
                self.set_phase(NodePhase::Z);
                self.next = Step::TransformZ;
            }
            Step::TransformZ => {
                self.transform_all(Axis::Z)?;
                self.set_phase(NodePhase::Done);
                self.next = Step::Finished;
            }
            Step::Finished => {}
        }
        Ok(step)
    }

    fn set_phase(&mut self, phase: NodePhase) {
        for node in &mut self.nodes {
            node.phase = phase;
        }
    }

    /// Runs every full-length line along `axis` through the engine, one
    /// node at a time, all of a node's lines streamed back to back.
    fn transform_all(&mut self, axis: Axis) -> Result<()> {
        let n = self.grid.n;
        for node in &mut self.nodes {
            for block in node.regular.iter_mut().chain(node.nyquist.iter_mut()) {
                debug_assert_eq!(block.order[0], axis);
                debug_assert_eq!(range_of(&block.region, axis).len(), n);
                let frames: Vec<Vec<Complex>> =
                    block.data.chunks(n).map(<[Complex]>::to_vec).collect();
                let run = self.engine.run_batch(&frames)?;
                for (dst, spec) in block.data.chunks_mut(n).zip(run.spectra) {
                    dst.copy_from_slice(&spec);
                }
            }
        }
        Ok(())
    }

    /// Keeps bins `0..N/2` as the packed pencils and moves bin `N/2` to the
    /// side buffer.
    fn split_nyquist(&mut self) {
        let half = self.grid.n / 2;
        for node in &mut self.nodes {
            let full = node.regular.pop().expect("one X block per node");
            let mut packed = Block::zeros(
                PointBox {
                    i: 0..half,
                    ..full.region.clone()
                },
                [Axis::X, Axis::Y, Axis::Z],
            );
            let mut nyq = Block::zeros(
                PointBox {
                    i: half..half + 1,
                    ..full.region.clone()
                },
                [Axis::Y, Axis::Z, Axis::X],
            );
            for p in full.region.points() {
                if p[0] < half {
                    packed.set(p, full.get(p));
                } else if p[0] == half {
                    nyq.set(p, full.get(p));
                }
            }
            node.regular.push(packed);
            node.nyquist.push(nyq);
        }
    }

    fn targets(
        &self,
        phase: CommPhase,
        dst: NodeId,
    ) -> (Vec<(PointBox, [Axis; 3])>, Vec<(PointBox, [Axis; 3])>) {
        let g = &self.grid;
        let n = g.n;
        let ni = g.i_extent(self.extent());
        let half = n / 2;
        let nyq_i = half..half + 1;
        match phase {
            CommPhase::XY => {
                let kv = block_range(n, g.pv, dst.v);
                let regular = vec![(
                    PointBox {
                        i: block_range(ni, g.pu, dst.u),
                        j: 0..n,
                        k: kv.clone(),
                    },
                    [Axis::Y, Axis::X, Axis::Z],
                )];
                let nyquist = if self.real_input {
                    vec![(
                        PointBox {
                            i: nyq_i,
                            j: 0..n,
                            k: sub_range(&kv, g.pu, dst.u),
                        },
                        [Axis::Y, Axis::Z, Axis::X],
                    )]
                } else {
                    Vec::new()
                };
                (regular, nyquist)
            }
            CommPhase::YZ => {
                let jv = block_range(n, g.pv, dst.v);
                let regular = vec![(
                    PointBox {
                        i: block_range(ni, g.pu, dst.u),
                        j: jv.clone(),
                        k: 0..n,
                    },
                    [Axis::Z, Axis::X, Axis::Y],
                )];
                let nyquist = if self.real_input {
                    (0..g.pv)
                        .map(|v| {
                            (
                                PointBox {
                                    i: nyq_i.clone(),
                                    j: jv.clone(),
                                    k: sub_range(&block_range(n, g.pv, v), g.pu, dst.u),
                                },
                                [Axis::Z, Axis::Y, Axis::X],
                            )
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                (regular, nyquist)
            }
            CommPhase::NyquistZ => {
                let jv = block_range(n, g.pv, dst.v);
                (
                    Vec::new(),
                    vec![(
                        PointBox {
                            i: nyq_i,
                            j: sub_range(&jv, g.pu, dst.u),
                            k: 0..n,
                        },
                        [Axis::Z, Axis::Y, Axis::X],
                    )],
                )
            }
        }
    }

    fn fold(&mut self, phase: CommPhase) -> Result<()> {
        let moves_regular = phase != CommPhase::NyquistZ;
        let p = self.nodes.len();
        let mut plans = Vec::with_capacity(p);
        let mut out: Vec<Vec<Block>> = Vec::with_capacity(p);
        for node in &self.nodes {
            let (reg, nyq) = self.targets(phase, node.id);
            let regular_targets = reg.len();
            let blocks: Vec<Block> = reg
                .into_iter()
                .chain(nyq)
                .map(|(region, order)| Block::zeros(region, order))
                .collect();
            plans.push(regular_targets);
            out.push(blocks);
        }
        let sources: Vec<Vec<Block>> = self
            .nodes
            .iter_mut()
            .map(|n| {
                let mut s = Vec::new();
                if moves_regular {
                    s.append(&mut n.regular);
                }
                s.append(&mut n.nyquist);
                s
            })
            .collect();

        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by_key(|&i| (self.nodes[i].id.u, self.nodes[i].id.v));
        let mut filled = vec![0usize; p];
        for &s in &order {
            for &d in &order {
                let mut payload = Vec::new();
                let mut pieces = Vec::new();
                for sb in &sources[s] {
                    for (ti, tb) in out[d].iter().enumerate() {
                        if let Some(x) = intersect(&sb.region, &tb.region) {
                            payload.extend(x.points().map(|pt| sb.get(pt)));
                            pieces.push((ti, x));
                        }
                    }
                }
                if payload.is_empty() {
                    continue;
                }
                let (src, dst) = (self.nodes[s].id, self.nodes[d].id);
                let words = payload.len();
                let values = if s == d {
                    payload
                } else {
                    self.transmit(src, dst, payload)?
                };
                self.ledger.records.push(TrafficRecord {
                    phase,
                    src,
                    dst,
                    words,
                    frames: words.div_ceil(WORDS_PER_DATAGRAM),
                });
                let mut it = values.into_iter();
                for (ti, x) in pieces {
                    for pt in x.points() {
                        out[d][ti].set(pt, it.next().expect("payload length checked"));
                    }
                }
                filled[d] += words;
            }
        }
        for (d, blocks) in out.into_iter().enumerate() {
            let expected: usize = blocks.iter().map(|b| b.region.count()).sum();
            if filled[d] != expected {
                return Err(Error::invalid(format!(
                    "node {:?} received {} of {expected} words in the {} fold",
                    self.nodes[d].id,
                    filled[d],
                    phase.name()
                )));
            }
            let mut blocks = blocks;
            let nyq = blocks.split_off(plans[d]);
            if moves_regular {
                self.nodes[d].regular = blocks;
            }
            self.nodes[d].nyquist = nyq;
        }
        Ok(())
    }

    /// Delivers `values` from `src` to `dst`, through encoded UDP frames in
    /// wire mode.
    fn transmit(&mut self, src: NodeId, dst: NodeId, values: Vec<Complex>) -> Result<Vec<Complex>> {
        let Some(wire) = self.wire else {
            return Ok(values);
        };
        let mut received = Vec::with_capacity(values.len());
        for chunk in values.chunks(WORDS_PER_DATAGRAM) {
            let mut payload = Vec::with_capacity(chunk.len() * COMPLEX_BYTES as usize);
            for v in chunk {
                payload.extend_from_slice(&v.re.to_le_bytes());
                payload.extend_from_slice(&v.im.to_le_bytes());
            }
            let cfg = HeaderConfig {
                src_mac: node_mac(src),
                dst_mac: node_mac(dst),
                src_ip: node_ip(src),
                dst_ip: node_ip(dst),
                src_port: WIRE_PORT,
                dst_port: WIRE_PORT,
                identification: self.datagram_seq,
                ..HeaderConfig::default()
            };
            self.datagram_seq = self.datagram_seq.wrapping_add(1);
            let frame = encode_frame(&cfg, &payload, &wire.datapath)?;
            if wire.capture {
                self.frames.push(frame.to_bytes()?);
            }
            let udp = match decode_frame(&frame)? {
                Decoded::Udp(u) if u.headers.ipv4.dst == node_ip(dst) => u,
                _ => return Err(Error::invalid("datagram did not reach its destination")),
            };
            for w in udp.payload.chunks_exact(COMPLEX_BYTES as usize) {
                let re = f64::from_le_bytes(w[..8].try_into().unwrap());
                let im = f64::from_le_bytes(w[8..].try_into().unwrap());
                received.push(Complex::new(re, im));
            }
        }
        Ok(received)
    }

    /// Runs all remaining steps and gathers the spectrum in natural order.
    pub fn finish(mut self) -> Result<DistRun> {
        while self.step()? != Step::Finished {}
        let n = self.grid.n;
        let mut spectrum = Grid3::filled(n, Complex::new(0.0, 0.0));
        for node in &self.nodes {
            for b in node.regular.iter().chain(&node.nyquist) {
                for p in b.region.points() {
                    spectrum[p] = b.get(p);
                }
            }
        }
        if self.real_input {
            for k in 0..n {
                for j in 0..n {
                    for i in n / 2 + 1..n {
                        spectrum[[i, j, k]] = spectrum[[n - i, (n - j) % n, (n - k) % n]].conj();
                    }
                }
            }
        }
        Ok(DistRun {
            spectrum,
            ledger: self.ledger,
            frames: self.frames,
        })
    }
}

fn check_size(n: usize, grid: &PencilGrid) -> Result<()> {
    if n != grid.n {
        return Err(Error::invalid(format!(
            "field of side {n} does not match the N = {} process grid",
            grid.n
        )));
    }
    Ok(())
}

/// Forward 3D FFT of a real field.
pub fn run_distributed_3dfft(
    field: &Grid3<f64>,
    grid: &PencilGrid,
    opts: &SimOptions,
) -> Result<DistRun> {
    Simulation::from_real(field, *grid, opts)?.finish()
}

/// Forward 3D FFT of a complex field, all bins carried in the pencils.
pub fn run_distributed_3dfft_complex(
    field: &Grid3<Complex>,
    grid: &PencilGrid,
    opts: &SimOptions,
) -> Result<DistRun> {
    Simulation::from_complex(field, *grid, opts)?.finish()
}

/// Inverse 3D FFT by conjugation around the forward machinery, scaled by
/// `1/N³`. The returned `spectrum` field holds the spatial values.
pub fn run_distributed_inverse(
    spectrum: &Grid3<Complex>,
    grid: &PencilGrid,
    opts: &SimOptions,
) -> Result<DistRun> {
    let conj = spectrum.map(|c| c.conj());
    let mut run = run_distributed_3dfft_complex(&conj, grid, opts)?;
    let scale = 1.0 / (grid.n as f64).powi(3);
    run.spectrum = run.spectrum.map(|c| c.conj() * scale);
    Ok(run)
}

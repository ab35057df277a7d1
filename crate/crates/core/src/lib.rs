//! Models, simulators and verifiers for a multi-FPGA 3D FFT machine.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: reference DFT oracles, twiddles and real-to-complex packing.
//! - [`fft_pipeline`]: a cycle-level radix-2 DIF parallel-pipelined 1D FFT
//!   engine with `R` butterfly rows, plus its closed-form cycle metrics.
//! - [`domain`]: 2D pencil decomposition, transpose maps, data volumes and
//!   memory occupancy.
//! - [`dist_sim`]: functional simulation of the distributed 3D FFT over
//!   `P = P_u × P_v` virtual nodes with per-phase traffic accounting.
//! - [`perf_model`]: analytical timing, bandwidth and memory models and the
//!   table generators built on them.
//! - [`udp_codec`]: Ethernet/IPv4/UDP frame codec over fixed-width datapath
//!   words, ARP cache and pcap output.
//! - [`grid`]: cubic grids and their binary file format.

pub mod dist_sim;
pub mod domain;
pub mod error;
pub mod fft_pipeline;
pub mod grid;
pub mod numerics;
pub mod perf_model;
pub mod udp_codec;

pub use error::{Error, Result};
pub use grid::Grid3;
pub use numerics::Complex;

/// Bytes per real double-precision word. A complex word is `2 * WORD_BYTES`.
pub const WORD_BYTES: u64 = 8;

/// Bytes per complex double-precision word.
pub const COMPLEX_BYTES: u64 = 2 * WORD_BYTES;

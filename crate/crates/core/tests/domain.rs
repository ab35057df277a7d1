use fft3d_core::domain::{Extent, MemoryArch, PencilGrid, Phase, Transpose};
use proptest::prelude::*;

fn grids() -> impl Strategy<Value = PencilGrid> {
    (3u32..=5, 0u32..=3, 0u32..=3)
        .prop_map(|(ln, lu, lv)| PencilGrid::new(1 << ln, 1 << lu, 1 << lv).unwrap())
}

#[test]
fn partition_exhaustive_small_grids() {
    for n in [8usize, 16] {
        for p in [1usize, 4, 16] {
            let g = PencilGrid::square(n, p).unwrap();
            for phase in [Phase::X, Phase::Y, Phase::Z] {
                let mut owned = vec![0usize; p];
                for k in 0..n {
                    for j in 0..n {
                        for i in 0..n {
                            let o = g.owner_of([i, j, k], phase).unwrap();
                            owned[g.node_index(o)] += 1;
                            let holders = g
                                .nodes()
                                .filter(|&m| {
                                    g.local_box(m, phase, Extent::Full).contains([i, j, k])
                                })
                                .count();
                            assert_eq!(holders, 1);
                            assert!(g.local_box(o, phase, Extent::Full).contains([i, j, k]));
                        }
                    }
                }
                assert!(
                    owned.iter().all(|&c| c == n * n * n / p),
                    "{n} {p} {phase:?}"
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn transposes_stay_in_rows_and_columns(g in grids()) {
        for extent in [Extent::Full, Extent::Packed] {
            if extent == Extent::Packed && (g.n / 2) % g.pu != 0 {
                prop_assert!(g.transpose_map(Transpose::XY, extent).is_err());
                continue;
            }
            let xy = g.transpose_map(Transpose::XY, extent).unwrap();
            prop_assert!(xy.transfers.iter().all(|t| t.src.v == t.dst.v && t.src != t.dst));
            let yz = g.transpose_map(Transpose::YZ, extent).unwrap();
            prop_assert!(yz.transfers.iter().all(|t| t.src.u == t.dst.u && t.src != t.dst));
            let per_node = g.n * g.n * g.i_extent(extent) / g.p();
            for node in g.nodes() {
                let kept: usize = xy.kept.iter().filter(|t| t.src == node).map(|t| t.region.count()).sum();
                let sent: usize = xy.transfers.iter().filter(|t| t.src == node).map(|t| t.region.count()).sum();
                prop_assert_eq!(kept + sent, per_node);
                prop_assert_eq!(kept * g.pu, per_node);
                let kept: usize = yz.kept.iter().filter(|t| t.src == node).map(|t| t.region.count()).sum();
                prop_assert_eq!(kept * g.pv, per_node);
            }
        }
    }

    #[test]
    fn memory_models_are_ordered(g in grids()) {
        let v = g.volumes();
        let n = g.n as u64;
        let p = g.p() as u64;
        prop_assert_eq!(v.v, 8 * n.pow(3) / p);
        prop_assert_eq!(v.v_prime, 8 * (n.pow(3) + 2 * n * n) / p);
        prop_assert_eq!(v.ram_per_node, 2 * v.v);
        prop_assert!(g.memory_occupancy(MemoryArch::Sequential) < g.memory_occupancy(MemoryArch::Pipelined));
    }
}

#[test]
fn ram_anchors() {
    let gib = (1u64 << 30) as f64;
    let small = PencilGrid::new(256, 1, 1).unwrap().volumes().ram_per_node;
    assert_eq!(small as f64 / gib, 0.25);
    let big = PencilGrid::new(4096, 1, 1).unwrap().volumes().ram_per_node;
    assert_eq!(big as f64 / gib, 1024.0);
}

#[test]
fn occupancy_anchor_cells() {
    let one = PencilGrid::new(1024, 1, 1).unwrap();
    let m = one.memory_occupancy(MemoryArch::Pipelined) as f64;
    assert!((m / 1e9 - 17.2).abs() < 0.05 && m > 8e9);
    let big = PencilGrid::new(4096, 16, 16).unwrap();
    let m = big.memory_occupancy(MemoryArch::Pipelined) as f64;
    assert!((m / 1e9 - 4.3).abs() < 0.05);
    assert!(big.fits_device(1 << 33));
}

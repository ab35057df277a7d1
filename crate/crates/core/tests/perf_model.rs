use fft3d_core::perf_model::{
    architecture_comparison, check_engine_row, engine_published, network_bandwidth, predict_table,
    predicted_published, ArchKind, ArchSpec, PredictParams, StreamingForm, TimeOptions, Topology,
};
use proptest::prelude::*;

#[test]
fn published_engine_rows_reproduce_except_one_gflops_cell() {
    let mut mismatches = Vec::new();
    for row in engine_published() {
        let c = check_engine_row(&row).unwrap();
        assert!(c.latency_ok(), "{row:?}: {}", c.l_fft);
        assert!(c.times_ok(), "{row:?}: {} {}", c.l_fft_us, c.t_fft_us);
        assert!(row.b_fft_gib.matches(c.b_fft_gib), "{row:?}");
        if !row.gflops.matches(c.gflops) {
            mismatches.push((row.rows, row.n, row.latency.stage_a, c.gflops));
        }
    }
    // Printed 98.8 at 377 MHz; 10·2·13·377e6 is 98.02.
    assert_eq!(mismatches.len(), 1);
    let (rows, n, l_op, gflops) = mismatches[0];
    assert_eq!((rows, n, l_op), (2, 8192, 9));
    assert!((gflops - 98.02).abs() < 1e-9);
}

#[test]
fn generated_mask_equals_published_empty_cells() {
    let table = predict_table(&PredictParams::default()).unwrap();
    for cell in predicted_published() {
        let got = table.get(cell.mu, cell.n, cell.p).unwrap();
        assert_eq!(got.seconds.is_some(), cell.seconds.is_some(), "{cell:?}");
    }
}

#[test]
fn generated_times_within_five_percent_except_two_cells() {
    let table = predict_table(&PredictParams::default()).unwrap();
    let mut off = Vec::new();
    for cell in predicted_published() {
        let (Some(printed), Some(got)) = (
            cell.seconds,
            table.get(cell.mu, cell.n, cell.p).unwrap().seconds,
        ) else {
            continue;
        };
        if (got - printed.value).abs() > 0.05 * printed.value {
            off.push((cell.mu, cell.n, cell.p));
        }
    }
    assert_eq!(off, vec![(1, 512, 1), (1, 512, 16)]);
}

proptest! {
    #[test]
    fn strong_scaling(log_n in 4u32..=13, side_log in 0u32..=4, mu in 1u32..=3) {
        let n = 1u64 << log_n;
        let side = 1u64 << side_log;
        let mut one = ArchSpec::new(ArchKind::PipelinedStreaming, n, 1, 1);
        one.mu = mu;
        let mut many = one;
        many.pu = side;
        many.pv = side;
        let opts = TimeOptions { exact: false, streaming: StreamingForm::TableMatching };
        let ratio = one.total_time(opts) / many.total_time(opts);
        prop_assert!((ratio - (side * side) as f64).abs() < 1e-9 * ratio);
    }

    #[test]
    fn pipelined_bandwidth_independent_of_mu(k in 1u32..=8, rows_log in 0u32..=2, f_mhz in 100.0f64..400.0) {
        let mut s = ArchSpec::new(ArchKind::PipelinedStreaming, 1024, 4, 4);
        s.k = k;
        s.rows = 1 << rows_log;
        s.t_clk = 1e-6 / f_mhz;
        let b1 = s.bandwidth();
        prop_assert!((b1 - 4.0 * 8.0 * s.rows as f64 * k as f64 / s.t_clk).abs() < 1e-6 * b1);
        for mu in 2..=3 {
            s.mu = mu;
            prop_assert_eq!(s.bandwidth(), b1);
        }
    }

    #[test]
    fn sequential_to_pipelined_ratio(mu in 1u32..=3, k_log in 0u32..=3) {
        let rows = architecture_comparison(mu, 1 << k_log).unwrap();
        let m = mu as f64;
        prop_assert!((rows[0].time / rows[1].time - 4.0 * m / (m + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn torus_penalty(side_log in 1u32..=5, rows_log in 0u32..=2, f_mhz in 100.0f64..400.0) {
        let p = 1u64 << (2 * side_log);
        let t = 1e-6 / f_mhz;
        let rows = 1u32 << rows_log;
        let s = network_bandwidth(Topology::Switched, rows, t, p).unwrap();
        let tor = network_bandwidth(Topology::Torus, rows, t, p).unwrap();
        prop_assert!((tor / s - (p as f64).sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sequential_streaming_linear_in_mu(log_n in 4u32..=12) {
        let mut s = ArchSpec::new(ArchKind::SequentialStreaming, 1 << log_n, 2, 2);
        let t1 = s.total_time(TimeOptions::default());
        s.mu = 3;
        prop_assert!((s.total_time(TimeOptions::default()) / t1 - 3.0).abs() < 1e-12);
    }
}

#[test]
fn generators_are_pure() {
    let a = predict_table(&PredictParams::default()).unwrap();
    let b = predict_table(&PredictParams::default()).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_markdown(), b.to_markdown());
}

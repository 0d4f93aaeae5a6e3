//! End-to-end experiment checks at moderate scale.

use ringbal::harness::output::write_records_csv;
use ringbal::harness::{bound_report, gap_curve_config, run_experiment, ExperimentConfig};

#[test]
fn averaging_on_64_nodes_is_deterministic_and_in_band() {
    let c = ExperimentConfig::new(64, 1_000_000, 100, 42);
    let a = run_experiment(&c).unwrap();
    let b = run_experiment(&c).unwrap();
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    write_records_csv(&mut ca, &a.hops, &a.records).unwrap();
    write_records_csv(&mut cb, &b.hops, &b.records).unwrap();
    assert_eq!(ca, cb);

    let stats = a.aggregate().unwrap();
    let trailing = stats.trailing_mean_normalized_gap(0.2);
    assert!((1.0..=1.4).contains(&trailing), "trailing mean {trailing}");
    let last = stats.normalized_gap.last().unwrap().mean;
    assert!((1.0..=1.4).contains(&last), "final mean {last}");
    for m in &stats.normalized_gap {
        assert!(m.min <= m.mean && m.mean <= m.max && m.std >= 0.0);
    }
}

#[test]
fn measured_gap_sits_below_the_chain_bound() {
    let config = gap_curve_config(64, 20, 3);
    let stats = run_experiment(&config).unwrap().aggregate().unwrap();
    let report = bound_report(64, 1.0)
        .unwrap()
        .with_measurement(&config, &stats)
        .unwrap();
    let m = report.measured.unwrap();
    assert!(m.below_gap_bound);
    assert!(m.mean_gap < report.gap_bound);
}

#[test]
fn gap_square_over_n_stays_bounded_below() {
    for (n, runs) in [(64usize, 20usize), (256, 4), (1024, 2)] {
        let mut c = gap_curve_config(n, runs, 11);
        c.burn_in = Some(100 * (n * n) as u64);
        let s = run_experiment(&c).unwrap().aggregate().unwrap();
        let v = s.steady.gap_squared_over_n.mean;
        assert!(v >= 0.2, "n = {n}: Gap²/n = {v}");
    }
}

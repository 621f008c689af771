use proptest::prelude::*;
use qcsim::bench::{
    estimate_memory, fit_best, fit_scaling, format_bytes, mps_parameter_bound, parse_bytes,
    run_bench, sweep, write_sweep_csv, BackendKind, BenchConfig, BenchRecord, BenchStatus,
    Coefficients, MemoryGuard, ModelKind, Precision,
};
use qcsim::circuit::{CircuitKind, CircuitSpec};

const GIB: u128 = 1 << 30;

fn quick(backend: BackendKind) -> BenchConfig {
    BenchConfig {
        repetitions: 2,
        warmup: 0,
        shots: 256,
        guard: MemoryGuard::new(GIB),
        ..BenchConfig::new(backend)
    }
}

#[test]
fn memory_examples() {
    let e = estimate_memory(BackendKind::Sv, 33, Precision::Single, 64, 96 * GIB).unwrap();
    assert_eq!(e.bytes, 64 * GIB);
    assert!(e.feasible);
    assert_eq!(e.to_string(), "64 GiB, feasible");

    let e = estimate_memory(BackendKind::Sv, 34, Precision::Single, 64, 96 * GIB).unwrap();
    assert_eq!(e.bytes, 128 * GIB);
    assert!(!e.feasible);

    let e = estimate_memory(BackendKind::Sv, 50, Precision::Single, 64, 96 * GIB).unwrap();
    assert_eq!(e.bytes, (1u128 << 50) * 8);
    assert_eq!(format_bytes(e.bytes), "8 PiB");

    assert_eq!(mps_parameter_bound(100, 64), 819_200);
    let e = estimate_memory(BackendKind::Mps, 100, Precision::Double, 64, 96 * GIB).unwrap();
    assert_eq!(e.bytes, 819_200 * 16);
    assert_eq!(format_bytes(e.bytes), "12.5 MiB");
    assert!(estimate_memory(BackendKind::Sv, 0, Precision::Double, 1, GIB).is_err());
}

#[test]
fn byte_sizes_parse() {
    assert_eq!(parse_bytes("96GiB").unwrap(), 96 * GIB);
    assert_eq!(parse_bytes("1.5 KiB").unwrap(), 1536);
    assert_eq!(parse_bytes("2MB").unwrap(), 2_000_000);
    assert_eq!(parse_bytes("4096").unwrap(), 4096);
    assert!(parse_bytes("lots").is_err());
}

#[test]
fn ghz_records() {
    let r = run_bench(&CircuitSpec::new(CircuitKind::Ghz, 20, 1), &quick(BackendKind::Mps));
    assert_eq!(r.status, BenchStatus::Ok);
    assert_eq!(r.max_bond_reached, Some(2));
    assert_eq!(r.cumulative_discarded_weight, Some(0.0));
    assert!(r.timing.median_s > 0.0);

    let r = run_bench(&CircuitSpec::new(CircuitKind::Ghz, 10, 1), &quick(BackendKind::Sv));
    assert!(r.histogram.keys().all(|k| k == "0000000000" || k == "1111111111"));
    assert_eq!(r.histogram.values().sum::<u64>(), 256);
}

#[test]
fn default_protocol_is_one_warmup_and_ten_repetitions() {
    let bc = BenchConfig::new(BackendKind::Mps);
    assert_eq!((bc.warmup, bc.repetitions, bc.shots), (1, 10, 1024));
    let r = run_bench(&CircuitSpec::new(CircuitKind::Ghz, 6, 0), &bc);
    assert_eq!(r.timing.wall_times_s.len(), 10);
}

#[test]
fn failures_are_recorded_not_raised() {
    let r = run_bench(&CircuitSpec::new(CircuitKind::Qv, 5, 0), &quick(BackendKind::Mps));
    assert!(matches!(r.status, BenchStatus::Failed(_)), "{:?}", r.status);
    let json = serde_json::to_string(&r).unwrap();
    let back: BenchRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back.status, r.status);
}

#[test]
fn sweep_crossing_the_guard() {
    let bc = BenchConfig {
        guard: MemoryGuard::new(1 << 16),
        ..quick(BackendKind::Sv)
    };
    let res = sweep(&CircuitSpec::new(CircuitKind::Qaoa, 4, 3), &[4, 8, 12, 14], &bc, false, false);
    let labels: Vec<String> = res.records.iter().map(|r| r.status.label()).collect();
    // 2^12 amplitudes of 16 bytes fit a 64 KiB guard exactly.
    assert_eq!(labels[..3], ["ok", "ok", "ok"]);
    assert_eq!(labels[3], "infeasible: requires 262144 bytes > guard 65536");

    let mut buf = Vec::new();
    write_sweep_csv(&res.records, &mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["circuit", "n", "backend", "shots", "seed", "median_s", "mean_s", "stddev_s", "max_bond", "discarded_weight", "status"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[3][0], "qaoa");
    assert_eq!(&rows[3][5], "");
}

#[test]
fn sweep_fits_both_models() {
    let bc = quick(BackendKind::Mps);
    let res = sweep(&CircuitSpec::new(CircuitKind::Ghz, 4, 0), &[10, 20, 30, 40], &bc, true, false);
    assert!(res.records.iter().all(|r| r.status.is_ok()));
    assert!(res.linear_fit.is_some() && res.power_fit.is_some() && res.selected_model.is_some());

    let parallel = sweep(&CircuitSpec::new(CircuitKind::Ghz, 4, 0), &[10, 20, 30, 40], &bc, false, true);
    for (a, b) in res.records.iter().zip(&parallel.records) {
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.n_qubits, b.n_qubits);
    }
}

#[test]
fn synthetic_fits_recover_coefficients() {
    let linear: Vec<(f64, f64)> = (10..=90).step_by(10).map(|n| (n as f64, 2.0 * n as f64 + 3.0)).collect();
    let f = fit_scaling(&linear, ModelKind::Linear).unwrap();
    let Coefficients::Linear { a, b } = f.coefficients else { panic!() };
    assert!((a - 2.0).abs() / 2.0 < 1e-9 && (b - 3.0).abs() / 3.0 < 1e-9);
    assert_eq!(fit_best(&linear).unwrap().2, ModelKind::Linear);

    let power: Vec<(f64, f64)> = (4..=20).map(|n| (n as f64, 0.5 * (n as f64).powi(2))).collect();
    let f = fit_scaling(&power, ModelKind::Power).unwrap();
    let Coefficients::Power { alpha, beta } = f.coefficients else { panic!() };
    assert!((alpha - 0.5).abs() / 0.5 < 1e-9 && (beta - 2.0).abs() / 2.0 < 1e-9);
    assert!(f.residuals.iter().all(|r| r.abs() < 1e-9));
}

proptest! {
    #[test]
    fn estimates_are_monotone(n in 1usize..120, chi in 1usize..4096) {
        let sv_a = estimate_memory(BackendKind::Sv, n, Precision::Double, chi, GIB).unwrap().bytes;
        let sv_b = estimate_memory(BackendKind::Sv, n + 1, Precision::Double, chi, GIB).unwrap().bytes;
        prop_assert!(sv_b >= sv_a);
        let mps_a = estimate_memory(BackendKind::Mps, n, Precision::Double, chi, GIB).unwrap().bytes;
        let mps_b = estimate_memory(BackendKind::Mps, n, Precision::Double, chi + 1, GIB).unwrap().bytes;
        prop_assert!(mps_b >= mps_a);
    }
}

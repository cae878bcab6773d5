mod common;

use hourscap_core::metrics::metrics_report;
use hourscap_core::sweep::{evaluate_cell, run_sweep, Coordinates, DiagnosticCode, SweepKind, SweepSpec};
use hourscap_core::{run_pair, PairSpec};
use rand::Rng;

fn small_heatmap() -> SweepSpec {
    SweepSpec {
        sigma_sub: vec![0.6, 1.0, 1.4],
        relief: vec![0.0, 0.4, 0.8],
        ..SweepSpec::new(SweepKind::Heatmap)
    }
}

#[test]
fn cells_are_pure_functions_of_their_coordinates() {
    let p = common::economy();
    let spec = small_heatmap();
    let whole = run_sweep(&p, &spec).unwrap();
    let mut rng = hourscap_core::testing::rng(7);
    for _ in 0..5 {
        let k = rng.gen_range(0..whole.cells.len());
        let alone = evaluate_cell(&p, &spec, whole.cells[k].coordinates);
        assert_eq!(alone, whole.cells[k]);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let p = common::economy();
    let spec = small_heatmap();
    let run = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| run_sweep(&p, &spec).unwrap())
    };
    let one = run(1);
    for n in [2, 4, 8] {
        assert_eq!(run(n), one, "{n} threads");
    }
}

#[test]
fn one_by_one_heatmap_matches_a_direct_pair_run() {
    let p = common::economy();
    let spec = SweepSpec {
        sigma_sub: vec![1.0],
        relief: vec![0.3],
        ..SweepSpec::new(SweepKind::Heatmap)
    };
    let r = run_sweep(&p, &spec).unwrap();
    assert_eq!(r.cells.len(), 1);
    let mut q = p.clone();
    q.sigma_sub = 1.0;
    let pair = run_pair(&q, &PairSpec { relief: 0.3, ..PairSpec::default() }).unwrap();
    let m = metrics_report(&pair, None).unwrap();
    let c = &r.cells[0];
    assert_eq!(c.a_req_terminal_pct.unwrap().to_bits(), m.a_req_terminal_pct.to_bits());
    assert_eq!(c.dy_pct.unwrap().to_bits(), m.dy_pct.to_bits());
    assert_eq!(c.d_informality_pp.unwrap().to_bits(), m.d_informality_pp.to_bits());
}

#[test]
fn hours_curve_vanishes_at_the_longest_contract_and_falls_with_the_cap() {
    let p = common::economy();
    let spec = SweepSpec {
        hours: vec![30.0, 34.0, 38.0, 42.0, 44.0],
        ..SweepSpec::new(SweepKind::HoursCurve)
    };
    let r = run_sweep(&p, &spec).unwrap();
    let a: Vec<f64> = r.cells.iter().map(|c| c.a_req_terminal_pct.unwrap()).collect();
    assert_eq!(a[4], 0.0);
    assert!(a.windows(2).all(|w| w[1] < w[0]), "{a:?}");
    assert!(r.cells.iter().all(|c| c.coordinates.sigma_sub.is_none()));
}

#[test]
fn grid_order_is_sigma_major() {
    let r = run_sweep(&common::economy(), &small_heatmap()).unwrap();
    let coords: Vec<(f64, f64)> = r.cells.iter().map(|c| (c.coordinates.sigma_sub.unwrap(), c.coordinates.relief)).collect();
    let mut sorted = coords.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    assert_eq!(coords, sorted);
    assert_eq!(r.row(1.0).len(), 3);
    assert_eq!(r.column(0.4).len(), 3);
}

#[test]
fn frontier_reports_one_crossing_entry_per_sigma() {
    let spec = SweepSpec {
        sigma_sub: vec![0.8, 1.2],
        relief: vec![0.0, 0.2, 0.4, 0.6, 0.8],
        ..SweepSpec::new(SweepKind::Frontier)
    };
    let r = run_sweep(&common::economy(), &spec).unwrap();
    assert_eq!(r.crossings.len(), 2);
    for x in &r.crossings {
        if let Some(at) = x.relief {
            assert!((0.0..=0.8).contains(&at));
        }
    }
}

#[test]
fn invalid_grids_fail_before_any_cell_runs() {
    let p = common::economy();
    let mut spec = small_heatmap();
    spec.relief = vec![0.0, 1.0];
    assert!(run_sweep(&p, &spec).unwrap_err().to_string().contains("sweep.relief"));
    spec.relief = vec![0.4, 0.2];
    assert!(run_sweep(&p, &spec).is_err());
    let hours = SweepSpec {
        hours: vec![36.0, 50.0],
        ..SweepSpec::new(SweepKind::HoursCurve)
    };
    assert!(run_sweep(&p, &hours).unwrap_err().to_string().contains("sweep.hours"));
}

#[test]
fn failing_cells_become_missing_values_with_a_code() {
    let mut p = common::economy();
    p.groups.small.informal_convex = 0.0;
    p.groups.small.informal_linear = 40.0;
    p.groups.small.tau = 500.0;
    p.lambda_dw = 1.0;
    let spec = small_heatmap();
    let c = evaluate_cell(
        &p,
        &spec,
        Coordinates {
            hbar: 36.0,
            sigma_sub: Some(1.0),
            relief: 0.0,
        },
    );
    assert_eq!(c.diagnostic.as_ref().unwrap().code, DiagnosticCode::NegativeConsumption);
    assert!(c.a_req_terminal_pct.is_none() && c.settled.is_none());

    let bad = evaluate_cell(
        &common::economy(),
        &spec,
        Coordinates {
            hbar: 36.0,
            sigma_sub: Some(-1.0),
            relief: 0.0,
        },
    );
    assert_eq!(bad.diagnostic.unwrap().code, DiagnosticCode::Validation);
}

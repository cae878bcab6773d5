mod common;

use hourscap_core::metrics::{a_req, decompose_fatigue, metrics_report};
use hourscap_core::model::consumption;
use hourscap_core::scenario::{initial_state, run_scenario_from, DEFAULT_HORIZON};
use hourscap_core::testing::{random_economy, rng};
use hourscap_core::{run_pair, run_scenario, Group, ModelError, PairSpec, PolicyPath};

#[test]
fn non_binding_cap_reproduces_the_baseline_bit_for_bit() {
    for seed in 0..20 {
        let p = random_economy(&mut rng(seed));
        let top = p.max_mixture_hours();
        let spec = PairSpec {
            hbar_base: top,
            hbar_cap: top + 4.0,
            ..PairSpec::default()
        };
        let pair = run_pair(&p, &spec).unwrap();
        for (b, c) in pair.baseline.records.iter().zip(&pair.cap.records) {
            assert_eq!(b.groups, c.groups, "seed {seed}");
            assert_eq!(b.output.to_bits(), c.output.to_bits());
            assert_eq!(b.consumption.to_bits(), c.consumption.to_bits());
        }
        for t in 0..spec.horizon {
            assert_eq!(a_req(&pair.baseline, &pair.cap, t).unwrap(), 1.0);
        }
    }
}

#[test]
fn accounting_identities_hold_exactly() {
    for seed in 100..110 {
        let p = random_economy(&mut rng(seed));
        let pair = run_pair(&p, &PairSpec::default()).unwrap();
        for run in [&pair.baseline, &pair.cap] {
            for rec in &run.records {
                let (s, l) = (&rec.groups.small, &rec.groups.large);
                assert_eq!(s.n_formal + s.n_informal, p.groups.small.workforce);
                assert_eq!(l.n_formal + l.n_informal, p.groups.large.workforce);
                assert_eq!(rec.output, s.output + l.output);
                assert_eq!(rec.consumption, consumption(&[s.resource_use(), l.resource_use()]));
                let net = |g: &hourscap_core::scenario::GroupRecord| g.output - g.deadweight - g.adjustment - g.informal_cost;
                assert_eq!(rec.consumption, net(s) + net(l));
            }
        }
    }
}

#[test]
fn without_frictions_consumption_equals_output() {
    let p = common::frictionless();
    let pair = run_pair(&p, &PairSpec::default()).unwrap();
    for run in [&pair.baseline, &pair.cap] {
        for rec in &run.records {
            assert_eq!(rec.consumption, rec.output);
        }
    }
}

#[test]
fn baseline_stays_at_its_steady_state() {
    let p = common::economy();
    let pair = run_pair(&p, &PairSpec::default()).unwrap();
    let start = initial_state(&p, 44.0).unwrap();
    for rec in &pair.baseline.records {
        for g in Group::ALL {
            let n = p.group(g).workforce;
            assert!((rec.groups.get(g).n_formal - start.get(g)).abs() <= 1e-7 * n);
        }
    }
    assert!(pair.baseline.settled && pair.cap.settled);
    assert_eq!(pair.baseline.horizon(), DEFAULT_HORIZON);
}

#[test]
fn adjustment_costs_slow_the_transition() {
    let mut slow = common::economy();
    slow.groups.small.gamma = 50.0;
    let fast = common::economy();
    let gap = |p: &hourscap_core::EconomyParams| {
        let pair = run_pair(p, &PairSpec::default()).unwrap();
        let first = pair.cap.records[0].groups.small.n_formal;
        let last = pair.cap.terminal().groups.small.n_formal;
        (last - first).abs()
    };
    assert!(gap(&slow) > gap(&fast));
}

#[test]
fn decomposition_is_additive() {
    let d = decompose_fatigue(&common::economy(), &PairSpec::default()).unwrap();
    for part in [d.gdp, d.gdp_per_hour] {
        assert!((part.fatigue_pct + part.other_pct - part.total_pct).abs() <= 1e-9);
    }
    assert!(d.gdp.fatigue_pct > 0.0);
}

#[test]
fn no_fatigue_means_no_fatigue_channel() {
    let mut p = common::economy();
    p.fatigue.kappa = 0.0;
    let d = decompose_fatigue(&p, &PairSpec::default()).unwrap();
    assert_eq!(d.gdp.fatigue_pct, 0.0);
    assert_eq!(d.gdp_per_hour.fatigue_pct, 0.0);
}

#[test]
fn report_carries_paths_and_groups() {
    let pair = run_pair(&common::economy(), &PairSpec::default()).unwrap();
    let r = metrics_report(&pair, None).unwrap();
    assert_eq!(r.a_req_path.len(), DEFAULT_HORIZON);
    assert!(r.a_req_terminal_pct > 0.0);
    assert!(r.per_group.small.d_informality_pp > 0.0);
    assert!(r.per_group.large.d_informality_pp < 0.0);
    assert!(r.settled);
}

#[test]
fn negative_consumption_is_recorded_not_fatal() {
    let mut p = common::economy();
    p.groups.small.informal_convex = 0.0;
    p.groups.small.informal_linear = 40.0;
    p.groups.small.tau = 500.0;
    p.lambda_dw = 1.0;
    let r = run_scenario(&p, &PolicyPath::constant(3, 44.0, 44.0)).unwrap();
    assert_eq!(r.negative_consumption, vec![0, 1, 2]);
}

#[test]
fn bad_policy_is_rejected_before_running() {
    let p = common::economy();
    let mut policy = PolicyPath::constant(3, 36.0, 44.0);
    policy.hbar[1] = f64::NAN;
    let err = run_scenario(&p, &policy).unwrap_err();
    assert!(err.is_validation(), "{err}");
    assert!(err.to_string().contains("policy.hbar[1]"), "{err}");
}

#[test]
fn ramped_cap_moves_gradually() {
    let p = common::economy();
    let policy = PolicyPath::linear_ramp(6, 44.0, 36.0, 44.0);
    let start = initial_state(&p, 44.0).unwrap();
    let r = run_scenario_from(&p, &policy, start).unwrap();
    let outputs: Vec<f64> = r.records.iter().map(|x| x.output).collect();
    assert!(outputs.windows(2).all(|w| w[1] <= w[0]), "{outputs:?}");
}

#[test]
fn relief_reduces_small_firm_leakage() {
    let p = common::economy();
    let none = run_pair(&p, &PairSpec::default()).unwrap();
    let some = run_pair(&p, &PairSpec { relief: 0.3, ..PairSpec::default() }).unwrap();
    let s = |x: &hourscap_core::ScenarioPair| x.cap.terminal().groups.small.n_informal;
    assert!(s(&some) < s(&none));
    assert_eq!(some.cap.records[0].groups.small.tau_effective, 0.7 * p.groups.small.tau);
    assert_eq!(some.cap.records[0].groups.large.tau_effective, p.groups.large.tau);
}

#[test]
fn error_variants_are_classified() {
    assert!(ModelError::invalid("x", "y").is_validation());
    assert!(!ModelError::Solver("x".into()).is_validation());
}

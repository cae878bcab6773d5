mod common;

use hourscap_core::calibrate::{
    baseline_informality, calibrate_group_wedge, calibrate_wedges, evaluate_metrics, tune_reference,
    CalibrationTargets, HeadlineTarget, Metric, TunableParam, TuneOptions, SHARE_TOL,
};
use hourscap_core::params::GroupPair;
use hourscap_core::{Group, ModelError, PairSpec};

const HBAR: f64 = 44.0;

#[test]
fn calibrated_wedges_reproduce_the_shares_they_came_from() {
    let p = common::economy();
    let shares = GroupPair::new(
        baseline_informality(&p, Group::S, p.groups.small.tau, HBAR).unwrap(),
        baseline_informality(&p, Group::L, p.groups.large.tau, HBAR).unwrap(),
    );
    let mut template = p.clone();
    template.groups.small.tau = 0.0;
    template.groups.large.tau = 0.0;
    let out = calibrate_wedges(&template, &shares, HBAR).unwrap();
    for g in Group::ALL {
        let want = p.group(g).tau;
        let got = out.group(g).tau;
        assert!((got - want).abs() <= 1e-4 * want, "{g}: {got} vs {want}");
        let s = baseline_informality(&out, g, got, HBAR).unwrap();
        assert!((s - shares.get(g)).abs() <= SHARE_TOL);
    }
    assert_eq!(template.groups.small.tau, 0.0, "template must not change");
}

#[test]
fn target_at_the_zero_wedge_share_returns_zero() {
    let p = common::economy();
    let s0 = baseline_informality(&p, Group::L, 0.0, HBAR).unwrap();
    assert_eq!(calibrate_group_wedge(&p, Group::L, s0, HBAR).unwrap(), 0.0);
}

#[test]
fn target_below_the_zero_wedge_share_is_infeasible() {
    let p = common::economy();
    let s0 = baseline_informality(&p, Group::L, 0.0, HBAR).unwrap();
    let err = calibrate_group_wedge(&p, Group::L, 0.5 * s0, HBAR).unwrap_err();
    match err {
        ModelError::Infeasible { group, lo, .. } => {
            assert_eq!(group, Group::L);
            assert_eq!(lo, s0);
        }
        other => panic!("expected Infeasible, got {other}"),
    }
}

#[test]
fn target_near_one_is_infeasible() {
    let p = common::economy();
    let err = calibrate_group_wedge(&p, Group::S, 0.999_999, HBAR).unwrap_err();
    assert!(matches!(err, ModelError::Infeasible { group: Group::S, .. }), "{err}");
}

#[test]
fn informality_rises_with_the_wedge() {
    let p = common::economy();
    let shares: Vec<f64> = (0..8)
        .map(|k| baseline_informality(&p, Group::S, 0.5 * f64::from(k), HBAR).unwrap())
        .collect();
    assert!(shares.windows(2).all(|w| w[1] >= w[0]), "{shares:?}");
}

#[test]
fn groups_calibrate_independently() {
    let p = common::economy();
    let a = calibrate_wedges(&p, &GroupPair::new(0.3, 0.25), HBAR).unwrap();
    let b = calibrate_wedges(&p, &GroupPair::new(0.3, 0.3), HBAR).unwrap();
    assert_eq!(a.groups.small.tau, b.groups.small.tau);
    assert!(b.groups.large.tau > a.groups.large.tau);
}

fn targets(headline: Vec<HeadlineTarget>) -> CalibrationTargets {
    CalibrationTargets {
        informality_share: GroupPair::new(0.3, 0.25),
        headline,
    }
}

#[test]
fn zero_weights_leave_the_configuration_alone() {
    let p = common::economy();
    let t = targets(vec![HeadlineTarget {
        metric: Metric::DyPct,
        value: -50.0,
        weight: 0.0,
    }]);
    let r = tune_reference(&p, &t, &PairSpec::default(), &TuneOptions::default()).unwrap();
    assert_eq!(r.params, p);
    assert_eq!(r.iterations, 0);
    assert!(r.converged);
}

#[test]
fn single_target_is_reached() {
    let p = calibrate_wedges(&common::economy(), &GroupPair::new(0.3, 0.25), HBAR).unwrap();
    let start = evaluate_metrics(&p, &PairSpec::default(), &[Metric::DyPct]).unwrap()["dy_pct"];
    let goal = start + 0.5;
    let t = targets(vec![HeadlineTarget {
        metric: Metric::DyPct,
        value: goal,
        weight: 1.0,
    }]);
    let options = TuneOptions {
        parameters: vec![TunableParam::Kappa],
        initial_step: 0.5,
        min_step: 1e-3,
        max_rounds: 60,
        recalibrate_wedges: true,
    };
    let r = tune_reference(&p, &t, &PairSpec::default(), &options).unwrap();
    let got = r.achieved["dy_pct"];
    assert!((got - goal).abs() <= 0.05, "{got} vs {goal}");
    assert!(r.objective < 2.5e-3);
    assert!(r.params.fatigue.kappa > p.fatigue.kappa);
}

#[test]
fn invalid_targets_are_rejected() {
    let p = common::economy();
    let mut t = targets(Vec::new());
    t.informality_share.large = 1.0;
    let err = tune_reference(&p, &t, &PairSpec::default(), &TuneOptions::default()).unwrap_err();
    assert!(err.to_string().contains("informality_share.L"), "{err}");
}

#[test]
fn metric_labels_cover_group_and_sweep_metrics() {
    let p = common::economy();
    let wanted = [
        Metric::GroupAReqPct(Group::S),
        Metric::HoursCurveAReqPct(44.0),
        Metric::FatigueGdpPct,
    ];
    let m = evaluate_metrics(&p, &PairSpec::default(), &wanted).unwrap();
    assert_eq!(m.len(), 3);
    assert_eq!(m["a_req_pct@44h"], 0.0);
    assert!(m["a_req_pct.S"] > 0.0);
}

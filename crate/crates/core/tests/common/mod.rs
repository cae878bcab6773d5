#![allow(dead_code)]

use hourscap_core::params::{EconomyParams, FatigueParams, GroupPair, GroupParams, HoursMixture};

pub fn mixture() -> HoursMixture {
    HoursMixture::from_pairs(&[(36.0, 0.13), (40.0, 0.27), (44.0, 0.6)]).unwrap()
}

/// Two-group economy with small firms leaking into informality under a cap.
pub fn economy() -> EconomyParams {
    EconomyParams {
        alpha: 1.0 / 3.0,
        tfp: 1.0,
        omega: 0.847,
        sigma_sub: 0.79,
        eta_informal: 0.473,
        h_informal: 42.6,
        lambda_dw: 0.37,
        fatigue: FatigueParams {
            kappa: 1.05e-4,
            h_star: 33.4,
        },
        groups: GroupPair::new(
            GroupParams {
                capital: 0.107,
                workforce: 0.59,
                tau: 2.97,
                gamma: 0.5,
                informal_linear: 0.07,
                informal_convex: 0.136,
                mixture: mixture(),
            },
            GroupParams {
                capital: 0.8,
                workforce: 0.41,
                tau: 0.25,
                gamma: 0.5,
                informal_linear: 0.32,
                informal_convex: 6.1,
                mixture: mixture(),
            },
        ),
    }
}

/// Same economy with every resource cost switched off.
pub fn frictionless() -> EconomyParams {
    let mut p = economy();
    p.lambda_dw = 0.0;
    for g in [&mut p.groups.small, &mut p.groups.large] {
        g.gamma = 0.0;
        g.informal_linear = 0.0;
        g.informal_convex = 0.0;
    }
    p
}

//! Seeded generators of valid random configurations, shared by the property
//! tests and the acceptance suite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::params::{EconomyParams, FatigueParams, GroupPair, GroupParams, HoursMixture, HoursPoint};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const HOURS: [f64; 6] = [30.0, 36.0, 40.0, 42.0, 44.0, 48.0];

/// One to four contractual hours with random simplex weights.
pub fn random_mixture(rng: &mut impl Rng) -> HoursMixture {
    let k = rng.gen_range(1..=4);
    let mut hours: Vec<f64> = HOURS.choose_multiple(rng, k).copied().collect();
    hours.sort_by(f64::total_cmp);
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..k - 1].iter().sum();
    weights[k - 1] = 1.0 - head;
    HoursMixture::new(
        hours
            .into_iter()
            .zip(weights)
            .map(|(hours, weight)| HoursPoint { hours, weight })
            .collect(),
    )
    .expect("generated mixture is valid")
}

pub fn random_group(rng: &mut impl Rng) -> GroupParams {
    GroupParams {
        capital: rng.gen_range(0.1..2.0),
        workforce: rng.gen_range(0.2..1.5),
        tau: rng.gen_range(0.0..4.0),
        gamma: rng.gen_range(0.0..2.0),
        informal_linear: rng.gen_range(0.0..0.5),
        informal_convex: rng.gen_range(0.0..5.0),
        mixture: random_mixture(rng),
    }
}

pub fn random_economy(rng: &mut impl Rng) -> EconomyParams {
    let p = EconomyParams {
        alpha: rng.gen_range(0.2..0.45),
        tfp: rng.gen_range(0.5..2.0),
        omega: rng.gen_range(0.3..0.95),
        sigma_sub: rng.gen_range(0.3..3.0),
        eta_informal: rng.gen_range(0.3..0.9),
        h_informal: rng.gen_range(30.0..50.0),
        lambda_dw: rng.gen_range(0.0..1.0),
        fatigue: FatigueParams {
            kappa: rng.gen_range(0.0..2e-3),
            h_star: rng.gen_range(32.0..42.0),
        },
        groups: GroupPair::new(random_group(rng), random_group(rng)),
    };
    p.validate().expect("generated economy is valid");
    p
}

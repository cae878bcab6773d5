//! Closed-form building blocks of the model: hours efficiency, the capped
//! hours index, effective labor, CES aggregation, production, real costs and
//! the resource constraint.
//!
//! Everything here is a pure function of its arguments.

use crate::error::{ModelError, Result};
use crate::params::{EconomyParams, FatigueParams, HoursMixture};

/// Per-hour efficiency `exp(-kappa (h - h_star)^2)`.
pub fn efficiency(h: f64, fatigue: &FatigueParams) -> Result<f64> {
    if !h.is_finite() {
        return Err(ModelError::Domain(format!("efficiency requires finite hours, got {h}")));
    }
    Ok(raw_efficiency(h, fatigue))
}

#[inline]
pub(crate) fn raw_efficiency(h: f64, fatigue: &FatigueParams) -> f64 {
    let d = h - fatigue.h_star;
    (-fatigue.kappa * d * d).exp()
}

#[inline]
pub fn capped_hours(h: f64, hbar: f64) -> f64 {
    h.min(hbar)
}

/// Efficiency-weighted mean hours of the formal block under cap `hbar`:
/// `sum_h theta_h * min(h, hbar) * e(min(h, hbar))`.
pub fn formal_hours_index(mixture: &HoursMixture, hbar: f64, fatigue: &FatigueParams) -> f64 {
    formal_hours_index_frozen(mixture, hbar, hbar, fatigue)
}

/// Same as [`formal_hours_index`] but with efficiency evaluated at
/// `min(h, efficiency_hbar)` instead of the capped hours. With
/// `efficiency_hbar == hbar` the two coincide bit for bit.
pub fn formal_hours_index_frozen(
    mixture: &HoursMixture,
    hbar: f64,
    efficiency_hbar: f64,
    fatigue: &FatigueParams,
) -> f64 {
    mixture
        .points()
        .iter()
        .map(|p| {
            let worked = capped_hours(p.hours, hbar);
            let at = capped_hours(p.hours, efficiency_hbar);
            p.weight * worked * raw_efficiency(at, fatigue)
        })
        .sum()
}

#[inline]
pub fn effective_formal_labor(n_formal: f64, ell_formal: f64) -> f64 {
    n_formal * ell_formal
}

/// Effective labor contributed by one informal worker: `eta_I * h_I * e(h_I)`.
pub fn informal_labor_per_worker(params: &EconomyParams) -> f64 {
    params.eta_informal * params.h_informal * raw_efficiency(params.h_informal, &params.fatigue)
}

pub fn effective_informal_labor(n_informal: f64, params: &EconomyParams) -> f64 {
    n_informal * informal_labor_per_worker(params)
}

/// CES aggregate `[omega L_F^rho + (1-omega) L_I^rho]^(1/rho)`, `rho = (sigma-1)/sigma`.
///
/// `sigma_sub == 1` takes the Cobb-Douglas limit. A zero input yields the
/// limit value: zero when `rho <= 0`, the surviving term when `rho > 0`.
pub fn ces_aggregate(labor_formal: f64, labor_informal: f64, omega: f64, sigma_sub: f64) -> f64 {
    if labor_formal <= 0.0 && labor_informal <= 0.0 {
        return 0.0;
    }
    if sigma_sub == 1.0 {
        if labor_formal <= 0.0 || labor_informal <= 0.0 {
            return 0.0;
        }
        return (omega * labor_formal.ln() + (1.0 - omega) * labor_informal.ln()).exp();
    }
    let rho = (sigma_sub - 1.0) / sigma_sub;
    if labor_formal <= 0.0 || labor_informal <= 0.0 {
        if rho < 0.0 {
            return 0.0;
        }
        let (weight, surviving) = if labor_formal > 0.0 {
            (omega, labor_formal)
        } else {
            (1.0 - omega, labor_informal)
        };
        return weight.powf(1.0 / rho) * surviving;
    }
    // Work in logs around the input that keeps rho * (ln L - pivot) <= 0 so
    // neither power overflows; expm1/ln1p keep precision near rho = 0.
    let (lf, li) = (labor_formal.ln(), labor_informal.ln());
    let pivot = if rho > 0.0 { lf.max(li) } else { lf.min(li) };
    let excess = omega * (rho * (lf - pivot)).exp_m1() + (1.0 - omega) * (rho * (li - pivot)).exp_m1();
    (pivot + excess.ln_1p() / rho).exp()
}

/// Cobb-Douglas technology `A K^alpha L^(1-alpha)`.
#[inline]
pub fn production(tfp: f64, capital: f64, labor: f64, alpha: f64) -> f64 {
    if labor <= 0.0 {
        return 0.0;
    }
    tfp * capital.powf(alpha) * labor.powf(1.0 - alpha)
}

/// `(gamma / 2) (N_F - N_F_prev)^2`.
#[inline]
pub fn adjustment_cost(n_formal: f64, n_formal_prev: f64, gamma: f64) -> f64 {
    let d = n_formal - n_formal_prev;
    0.5 * gamma * d * d
}

/// Real cost of running `n_informal` informal workers: `F_I N + (pi_m / 2) N^2`.
#[inline]
pub fn informal_cost(n_informal: f64, linear: f64, convex: f64) -> f64 {
    linear * n_informal + 0.5 * convex * n_informal * n_informal
}

/// Resource loss from the formalization wedge: `lambda_dw * tau * N_F`.
#[inline]
pub fn deadweight(tau: f64, n_formal: f64, lambda_dw: f64) -> f64 {
    lambda_dw * tau * n_formal
}

/// Per-group terms entering the resource constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceUse {
    pub output: f64,
    pub deadweight: f64,
    pub adjustment: f64,
    pub informal_cost: f64,
}

impl ResourceUse {
    #[inline]
    pub fn net(&self) -> f64 {
        self.output - self.deadweight - self.adjustment - self.informal_cost
    }
}

/// Aggregate consumption `sum_g [Y_g - DW_g - Adj_g - Phi_I,g]`.
///
/// A negative total is returned as is and logged; callers flag it.
pub fn consumption(groups: &[ResourceUse]) -> f64 {
    let c = groups.iter().fold(0.0, |acc, g| acc + g.net());
    if c < 0.0 {
        log::warn!("negative aggregate consumption {c:.6e}: degenerate calibration");
    }
    c
}

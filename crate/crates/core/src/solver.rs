//! Per-group, per-period formality choice.
//!
//! Each group picks formal employment `N_F` in `[0, N]` to maximize
//! `Y(N_F) - tau_eff N_F - Adj(N_F, N_F_prev) - Phi_I(N - N_F)`.
//! The objective is not assumed concave: a uniform scan locates the best
//! bracket, golden-section search refines it, and both boundaries are always
//! candidates.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model;
use crate::params::{EconomyParams, GroupParams};

/// Number of points in the coarse scan (both endpoints included).
pub const SCAN_POINTS: usize = 1024;
/// Golden-section stops once the bracket is narrower than this fraction of `N`.
pub const GOLDEN_REL_WIDTH: f64 = 1e-13;
const GOLDEN_MAX_ITER: usize = 200;
/// Payoffs closer than `TIE_REL * (1 + |payoff|)` are ties, broken toward larger `N_F`.
pub const TIE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct ChoiceProblem<'a> {
    pub group: &'a GroupParams,
    pub economy: &'a EconomyParams,
    /// Formal hours cap in force this period.
    pub hbar: f64,
    /// Cap at which per-hour efficiency is evaluated. Equal to `hbar` except in
    /// the frozen-efficiency counterfactual.
    pub efficiency_hbar: f64,
    pub n_formal_prev: f64,
    /// Wedge after any policy relief.
    pub tau_effective: f64,
}

impl<'a> ChoiceProblem<'a> {
    pub fn new(
        economy: &'a EconomyParams,
        group: &'a GroupParams,
        hbar: f64,
        n_formal_prev: f64,
        tau_effective: f64,
    ) -> Self {
        Self {
            group,
            economy,
            hbar,
            efficiency_hbar: hbar,
            n_formal_prev,
            tau_effective,
        }
    }

    pub fn with_efficiency_hbar(mut self, efficiency_hbar: f64) -> Self {
        self.efficiency_hbar = efficiency_hbar;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.group.workforce;
        if !self.hbar.is_finite() || self.hbar <= 0.0 {
            return Err(ModelError::invalid("hbar", format!("must be finite and > 0, got {}", self.hbar)));
        }
        if !self.efficiency_hbar.is_finite() || self.efficiency_hbar <= 0.0 {
            return Err(ModelError::invalid(
                "efficiency_hbar",
                format!("must be finite and > 0, got {}", self.efficiency_hbar),
            ));
        }
        if !self.n_formal_prev.is_finite() || self.n_formal_prev < 0.0 || self.n_formal_prev > n {
            return Err(ModelError::invalid(
                "n_formal_prev",
                format!("must lie in [0, {n}], got {}", self.n_formal_prev),
            ));
        }
        if !self.tau_effective.is_finite() || self.tau_effective < 0.0 {
            return Err(ModelError::invalid(
                "tau_effective",
                format!("must be finite and >= 0, got {}", self.tau_effective),
            ));
        }
        Ok(())
    }

    /// Precomputes the per-worker labor terms of the objective.
    pub fn objective(&self) -> Objective<'a> {
        Objective {
            group: self.group,
            economy: self.economy,
            ell_formal: model::formal_hours_index_frozen(
                &self.group.mixture,
                self.hbar,
                self.efficiency_hbar,
                &self.economy.fatigue,
            ),
            n_formal_prev: self.n_formal_prev,
            tau_effective: self.tau_effective,
        }
    }
}

/// Every term of the private objective at one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffTerms {
    pub n_formal: f64,
    pub n_informal: f64,
    pub ell_formal: f64,
    pub labor_formal: f64,
    pub labor_informal: f64,
    pub labor: f64,
    pub output: f64,
    pub wedge: f64,
    pub adjustment: f64,
    pub informal_cost: f64,
    pub payoff: f64,
}

/// The private objective with the allocation-independent terms evaluated once.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    group: &'a GroupParams,
    economy: &'a EconomyParams,
    ell_formal: f64,
    n_formal_prev: f64,
    tau_effective: f64,
}

impl Objective<'_> {
    pub fn ell_formal(&self) -> f64 {
        self.ell_formal
    }

    pub fn terms(&self, n_formal: f64) -> PayoffTerms {
        let e = self.economy;
        let g = self.group;
        let n_informal = g.workforce - n_formal;
        let labor_formal = model::effective_formal_labor(n_formal, self.ell_formal);
        let labor_informal = model::effective_informal_labor(n_informal, e);
        let labor = model::ces_aggregate(labor_formal, labor_informal, e.omega, e.sigma_sub);
        let output = model::production(e.tfp, g.capital, labor, e.alpha);
        let wedge = self.tau_effective * n_formal;
        let adjustment = model::adjustment_cost(n_formal, self.n_formal_prev, g.gamma);
        let informal_cost = model::informal_cost(n_informal, g.informal_linear, g.informal_convex);
        PayoffTerms {
            n_formal,
            n_informal,
            ell_formal: self.ell_formal,
            labor_formal,
            labor_informal,
            labor,
            output,
            wedge,
            adjustment,
            informal_cost,
            payoff: output - wedge - adjustment - informal_cost,
        }
    }

    #[inline]
    pub fn payoff(&self, n_formal: f64) -> f64 {
        self.terms(n_formal).payoff
    }
}

/// Private payoff of choosing `n_formal` formal workers.
pub fn group_payoff(problem: &ChoiceProblem<'_>, n_formal: f64) -> Result<f64> {
    let n = problem.group.workforce;
    if !n_formal.is_finite() || n_formal < 0.0 || n_formal > n {
        return Err(ModelError::Domain(format!("N_F = {n_formal} outside [0, {n}]")));
    }
    Ok(problem.objective().payoff(n_formal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Lower,
    Upper,
    Interior,
    /// The choice set is the single point `{0}`.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceSolution {
    pub n_formal: f64,
    pub payoff: f64,
    pub boundary: Boundary,
}

#[derive(Clone, Copy)]
struct Candidate {
    x: f64,
    p: f64,
}

fn beats(cand: Candidate, best: Candidate) -> bool {
    let tol = TIE_REL * (1.0 + best.p.abs());
    cand.p > best.p + tol || ((cand.p - best.p).abs() <= tol && cand.x > best.x)
}

/// Global maximizer of [`group_payoff`] over `[0, N]`.
pub fn solve_group(problem: &ChoiceProblem<'_>) -> Result<ChoiceSolution> {
    problem.validate()?;
    let n = problem.group.workforce;
    let objective = problem.objective();
    if n <= 0.0 {
        return Ok(ChoiceSolution {
            n_formal: 0.0,
            payoff: objective.payoff(0.0),
            boundary: Boundary::Both,
        });
    }

    let step = n / (SCAN_POINTS - 1) as f64;
    let scan: Vec<Candidate> = (0..SCAN_POINTS)
        .map(|i| {
            let x = if i == SCAN_POINTS - 1 { n } else { i as f64 * step };
            Candidate { x, p: objective.payoff(x) }
        })
        .collect();
    if let Some(bad) = scan.iter().find(|c| !c.p.is_finite()) {
        let e = problem.economy;
        return Err(ModelError::Solver(format!(
            "non-finite payoff {} at N_F = {} (N = {n}, K = {}, tau_eff = {}, gamma = {}, hbar = {}, \
             alpha = {}, omega = {}, sigma_sub = {}, eta_informal = {})",
            bad.p,
            bad.x,
            problem.group.capital,
            problem.tau_effective,
            problem.group.gamma,
            problem.hbar,
            e.alpha,
            e.omega,
            e.sigma_sub,
            e.eta_informal
        )));
    }

    let mut best_idx = 0;
    for (i, c) in scan.iter().enumerate().skip(1) {
        if beats(*c, scan[best_idx]) {
            best_idx = i;
        }
    }
    let mut best = scan[best_idx];

    let lo = scan[best_idx.saturating_sub(1)].x;
    let hi = scan[(best_idx + 1).min(SCAN_POINTS - 1)].x;
    let refined = golden_section_max(|x| objective.payoff(x), lo, hi, GOLDEN_REL_WIDTH * n);
    // Near an endpoint the scan's exact boundary point stands in for the refinement.
    let edge = 4.0 * GOLDEN_REL_WIDTH * n;
    if refined.x > edge && refined.x < n - edge && refined.p.is_finite() && beats(refined, best) {
        best = refined;
    }

    let snapped = snap_to_workforce_grid(best.x, n);
    if snapped != best.x {
        best = Candidate { x: snapped, p: objective.payoff(snapped) };
    }

    let boundary = if best.x <= 0.0 {
        Boundary::Lower
    } else if best.x >= n {
        Boundary::Upper
    } else {
        Boundary::Interior
    };
    Ok(ChoiceSolution {
        n_formal: best.x,
        payoff: best.p,
        boundary,
    })
}

/// Rounds `x` to a multiple of the unit in the last place of `n`, so that
/// `(n - x) + x == n` holds exactly in floating point for any `x` in `[0, n]`.
pub fn snap_to_workforce_grid(x: f64, n: f64) -> f64 {
    if n <= 0.0 || !n.is_finite() {
        return x;
    }
    let quantum = 2f64.powi(n.log2().floor() as i32 - 52);
    ((x / quantum).round() * quantum).clamp(0.0, n)
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Candidate {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while b - a > tol && iter < GOLDEN_MAX_ITER {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc > fd {
        Candidate { x: c, p: fc }
    } else {
        Candidate { x: d, p: fd }
    }
}

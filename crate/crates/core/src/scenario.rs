//! Forward simulation of formal employment under a path of hours caps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{self, ResourceUse};
use crate::params::{EconomyParams, Group, GroupPair};
use crate::solver::{snap_to_workforce_grid, solve_group, ChoiceProblem};

pub const DEFAULT_HORIZON: usize = 12;
pub const DEFAULT_HBAR_BASE: f64 = 44.0;
pub const DEFAULT_HBAR_CAP: f64 = 36.0;

/// Damping of the steady-state fixed-point iteration.
pub const STEADY_DAMPING: f64 = 0.5;
/// Fixed-point tolerance, as a fraction of the group workforce.
pub const STEADY_TOL_REL: f64 = 1e-8;
pub const STEADY_MAX_ITER: usize = 500;
/// A run is settled when the last period moves formal employment by at most
/// this fraction of the workforce.
pub const SETTLED_TOL_REL: f64 = 1e-6;

/// Exogenous policy inputs for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyPath {
    /// Formal hours cap per period.
    pub hbar: Vec<f64>,
    /// Cap under which the inherited (t = -1) employment is the steady choice.
    pub initial_hbar: f64,
    /// Per-group multipliers on the wedge; a missing group means all ones.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub wedge_multiplier: BTreeMap<Group, Vec<f64>>,
    /// When set, per-hour efficiency is evaluated under these caps instead of
    /// `hbar` (counterfactual with fatigue frozen).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency_hbar: Option<Vec<f64>>,
}

impl PolicyPath {
    pub fn constant(horizon: usize, hbar: f64, initial_hbar: f64) -> Self {
        Self {
            hbar: vec![hbar; horizon],
            initial_hbar,
            wedge_multiplier: BTreeMap::new(),
            efficiency_hbar: None,
        }
    }

    /// Cap moving linearly from `from` at t = 0 to `to` at t = horizon - 1.
    pub fn linear_ramp(horizon: usize, from: f64, to: f64, initial_hbar: f64) -> Self {
        let hbar = (0..horizon)
            .map(|t| {
                if horizon <= 1 {
                    to
                } else {
                    from + (to - from) * t as f64 / (horizon - 1) as f64
                }
            })
            .collect();
        Self {
            hbar,
            initial_hbar,
            wedge_multiplier: BTreeMap::new(),
            efficiency_hbar: None,
        }
    }

    /// Cuts `group`'s wedge by the fraction `relief` in every period.
    pub fn with_relief(mut self, group: Group, relief: f64) -> Self {
        self.wedge_multiplier.insert(group, vec![1.0 - relief; self.horizon()]);
        self
    }

    pub fn with_frozen_efficiency(mut self, efficiency_hbar: f64) -> Self {
        self.efficiency_hbar = Some(vec![efficiency_hbar; self.horizon()]);
        self
    }

    pub fn horizon(&self) -> usize {
        self.hbar.len()
    }

    pub fn multiplier(&self, group: Group, t: usize) -> f64 {
        self.wedge_multiplier.get(&group).map_or(1.0, |m| m[t])
    }

    pub fn validate(&self) -> Result<()> {
        if self.hbar.is_empty() {
            return Err(ModelError::invalid("policy.hbar", "horizon must be at least one period"));
        }
        for (t, &h) in self.hbar.iter().enumerate() {
            if !h.is_finite() || h <= 0.0 {
                return Err(ModelError::invalid(format!("policy.hbar[{t}]"), format!("must be finite and > 0, got {h}")));
            }
        }
        if !self.initial_hbar.is_finite() || self.initial_hbar <= 0.0 {
            return Err(ModelError::invalid(
                "policy.initial_hbar",
                format!("must be finite and > 0, got {}", self.initial_hbar),
            ));
        }
        for (g, m) in &self.wedge_multiplier {
            if m.len() != self.horizon() {
                return Err(ModelError::invalid(
                    format!("policy.wedge_multiplier.{g}"),
                    format!("expected {} entries, got {}", self.horizon(), m.len()),
                ));
            }
            if let Some((t, v)) = m.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
                return Err(ModelError::invalid(
                    format!("policy.wedge_multiplier.{g}[{t}]"),
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if let Some(eff) = &self.efficiency_hbar {
            if eff.len() != self.horizon() {
                return Err(ModelError::invalid(
                    "policy.efficiency_hbar",
                    format!("expected {} entries, got {}", self.horizon(), eff.len()),
                ));
            }
            if let Some((t, v)) = eff.iter().enumerate().find(|(_, v)| !v.is_finite() || **v <= 0.0) {
                return Err(ModelError::invalid(
                    format!("policy.efficiency_hbar[{t}]"),
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

/// Baseline-versus-cap experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_hbar_base")]
    pub hbar_base: f64,
    #[serde(default = "default_hbar_cap")]
    pub hbar_cap: f64,
    /// Fractional cut of the small-firm wedge in the cap scenario.
    #[serde(default)]
    pub relief: f64,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}
fn default_hbar_base() -> f64 {
    DEFAULT_HBAR_BASE
}
fn default_hbar_cap() -> f64 {
    DEFAULT_HBAR_CAP
}

impl Default for PairSpec {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            hbar_base: DEFAULT_HBAR_BASE,
            hbar_cap: DEFAULT_HBAR_CAP,
            relief: 0.0,
        }
    }
}

impl PairSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(ModelError::invalid("scenario.horizon", "must be at least 1"));
        }
        for (name, v) in [("hbar_base", self.hbar_base), ("hbar_cap", self.hbar_cap)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(ModelError::invalid(format!("scenario.{name}"), format!("must be finite and > 0, got {v}")));
            }
        }
        if !self.relief.is_finite() || !(0.0..=1.0).contains(&self.relief) {
            return Err(ModelError::invalid("scenario.relief", format!("must lie in [0, 1], got {}", self.relief)));
        }
        Ok(())
    }

    pub fn baseline_policy(&self) -> PolicyPath {
        PolicyPath::constant(self.horizon, self.hbar_base, self.hbar_base)
    }

    pub fn cap_policy(&self) -> PolicyPath {
        let policy = PolicyPath::constant(self.horizon, self.hbar_cap, self.hbar_base);
        if self.relief != 0.0 {
            policy.with_relief(Group::S, self.relief)
        } else {
            policy
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub n_formal: f64,
    pub n_informal: f64,
    pub ell_formal: f64,
    pub labor_formal: f64,
    pub labor_informal: f64,
    pub labor: f64,
    pub output: f64,
    pub tau_effective: f64,
    pub adjustment: f64,
    pub deadweight: f64,
    pub informal_cost: f64,
    /// Measured hours: `N_F * sum_h theta_h min(h, hbar) + N_I * h_I`.
    pub hours_paid: f64,
}

impl GroupRecord {
    pub fn resource_use(&self) -> ResourceUse {
        ResourceUse {
            output: self.output,
            deadweight: self.deadweight,
            adjustment: self.adjustment,
            informal_cost: self.informal_cost,
        }
    }

    pub fn informality_share(&self) -> f64 {
        self.n_informal / (self.n_formal + self.n_informal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub t: usize,
    pub hbar: f64,
    pub groups: GroupPair<GroupRecord>,
    pub output: f64,
    pub consumption: f64,
    pub hours: f64,
    pub informality_share: f64,
}

impl PeriodRecord {
    pub fn gdp_per_hour(&self) -> f64 {
        self.output / self.hours
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub params: EconomyParams,
    pub policy: PolicyPath,
    /// Inherited formal employment entering period 0.
    pub initial_formal: GroupPair<f64>,
    pub records: Vec<PeriodRecord>,
    /// Largest last-period move in formal employment, relative to each group's workforce.
    pub terminal_change: f64,
    pub settled: bool,
    /// Periods whose aggregate consumption is negative.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub negative_consumption: Vec<usize>,
}

impl ScenarioResult {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn terminal(&self) -> &PeriodRecord {
        self.records.last().expect("scenario has at least one period")
    }
}

/// Steady formal employment under cap `hbar0`: the fixed point of the choice
/// map `N_F -> solve_group(N_F_prev = N_F)`, found by damped iteration.
pub fn initial_state(params: &EconomyParams, hbar0: f64) -> Result<GroupPair<f64>> {
    params.validate()?;
    params.groups.try_map(|g, _| steady_formal(params, g, hbar0))
}

/// Steady formal employment of a single group; see [`initial_state`].
pub fn steady_formal(params: &EconomyParams, group: Group, hbar0: f64) -> Result<f64> {
    let gp = params.group(group);
    let n = gp.workforce;
    let tol = STEADY_TOL_REL * n;
    // Start from the frictionless choice; with adjustment costs it is already
    // the fixed point whenever the objective is concave.
    let mut frictionless = gp.clone();
    frictionless.gamma = 0.0;
    let start = ChoiceProblem::new(params, &frictionless, hbar0, 0.0, gp.tau);
    let mut x = solve_group(&start)?.n_formal;

    let mut residual = f64::INFINITY;
    for _ in 0..STEADY_MAX_ITER {
        let next = solve_group(&ChoiceProblem::new(params, gp, hbar0, x, gp.tau))?.n_formal;
        residual = next - x;
        if residual.abs() <= tol {
            return Ok(x);
        }
        x = snap_to_workforce_grid((x + STEADY_DAMPING * residual).clamp(0.0, n), n);
    }
    Err(ModelError::NonConvergence {
        group,
        residual: residual.abs(),
        iterations: STEADY_MAX_ITER,
    })
}

pub fn run_scenario(params: &EconomyParams, policy: &PolicyPath) -> Result<ScenarioResult> {
    policy.validate()?;
    let initial = initial_state(params, policy.initial_hbar)?;
    run_scenario_from(params, policy, initial)
}

/// Runs `policy` starting from the given inherited formal employment.
pub fn run_scenario_from(
    params: &EconomyParams,
    policy: &PolicyPath,
    initial_formal: GroupPair<f64>,
) -> Result<ScenarioResult> {
    params.validate()?;
    policy.validate()?;
    let total_workforce = params.total_workforce();
    let mut prev = initial_formal;
    let mut records = Vec::with_capacity(policy.horizon());
    let mut negative_consumption = Vec::new();
    let mut terminal_change = 0.0f64;

    for (t, &hbar) in policy.hbar.iter().enumerate() {
        let efficiency_hbar = policy.efficiency_hbar.as_ref().map_or(hbar, |e| e[t]);
        let groups = params.groups.try_map(|g, gp| {
            let tau_effective = gp.tau * policy.multiplier(g, t);
            let problem = ChoiceProblem::new(params, gp, hbar, *prev.get(g), tau_effective)
                .with_efficiency_hbar(efficiency_hbar);
            let solution = solve_group(&problem).map_err(|source| ModelError::AtPeriod {
                period: t,
                group: g,
                source: Box::new(source),
            })?;
            let terms = problem.objective().terms(solution.n_formal);
            Ok::<_, ModelError>(GroupRecord {
                n_formal: terms.n_formal,
                n_informal: terms.n_informal,
                ell_formal: terms.ell_formal,
                labor_formal: terms.labor_formal,
                labor_informal: terms.labor_informal,
                labor: terms.labor,
                output: terms.output,
                tau_effective,
                adjustment: terms.adjustment,
                deadweight: model::deadweight(tau_effective, terms.n_formal, params.lambda_dw),
                informal_cost: terms.informal_cost,
                hours_paid: terms.n_formal * gp.mixture.paid_hours(hbar) + terms.n_informal * params.h_informal,
            })
        })?;

        terminal_change = Group::ALL
            .iter()
            .map(|&g| (groups.get(g).n_formal - prev.get(g)).abs() / params.group(g).workforce)
            .fold(0.0, f64::max);
        prev = groups.map(|_, r| r.n_formal);

        let record = assemble_period(t, hbar, groups, total_workforce);
        if record.consumption < 0.0 {
            negative_consumption.push(t);
        }
        records.push(record);
    }

    let settled = terminal_change <= SETTLED_TOL_REL;
    if !settled {
        log::warn!("scenario not settled at t = {}: terminal change {terminal_change:.3e}", records.len() - 1);
    }
    Ok(ScenarioResult {
        params: params.clone(),
        policy: policy.clone(),
        initial_formal,
        records,
        terminal_change,
        settled,
        negative_consumption,
    })
}

fn assemble_period(t: usize, hbar: f64, groups: GroupPair<GroupRecord>, total_workforce: f64) -> PeriodRecord {
    let uses: Vec<ResourceUse> = groups.iter().map(|(_, r)| r.resource_use()).collect();
    let output = groups.iter().fold(0.0, |acc, (_, r)| acc + r.output);
    let hours = groups.iter().fold(0.0, |acc, (_, r)| acc + r.hours_paid);
    let informal = groups.iter().fold(0.0, |acc, (_, r)| acc + r.n_informal);
    PeriodRecord {
        t,
        hbar,
        groups,
        output,
        consumption: model::consumption(&uses),
        hours,
        informality_share: informal / total_workforce,
    }
}

/// Baseline and cap runs from the same inherited state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPair {
    pub spec: PairSpec,
    pub baseline: ScenarioResult,
    pub cap: ScenarioResult,
}

pub fn run_pair(params: &EconomyParams, spec: &PairSpec) -> Result<ScenarioPair> {
    spec.validate()?;
    let initial = initial_state(params, spec.hbar_base)?;
    let (baseline, cap) = rayon::join(
        || run_scenario_from(params, &spec.baseline_policy(), initial),
        || run_scenario_from(params, &spec.cap_policy(), initial),
    );
    Ok(ScenarioPair {
        spec: *spec,
        baseline: baseline?,
        cap: cap?,
    })
}

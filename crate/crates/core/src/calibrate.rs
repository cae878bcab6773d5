//! Calibration: wedges from baseline informality, then a derivative-free
//! fine-tune of the remaining free parameters against headline deltas.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::metrics::{self, pct};
use crate::model;
use crate::params::{EconomyParams, Group, GroupPair};
use crate::scenario::{run_pair, steady_formal, PairSpec};

/// Required accuracy of the calibrated baseline informality share.
pub const SHARE_TOL: f64 = 1e-6;
/// The wedge bracket is `[0, TAU_MAX_MULTIPLE * MP_F]`.
pub const TAU_MAX_MULTIPLE: f64 = 10.0;
const BISECTION_MAX_ITER: usize = 200;
const BISECTION_REL_WIDTH: f64 = 1e-13;

/// A scalar the tuner can target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Terminal aggregate required TFP, percent.
    AReqPct,
    DyPct,
    DcPct,
    DInformalityPp,
    DGdpPerHourPct,
    /// Fatigue contribution to the GDP change, percentage points.
    FatigueGdpPct,
    FatigueGdpPerHourPct,
    GroupAReqPct(Group),
    GroupDyPct(Group),
    GroupDInformalityPp(Group),
    /// Terminal required TFP under a different cap, percent.
    HoursCurveAReqPct(f64),
    /// `A_req(sigma_hi) - A_req(sigma_lo)` at a given small-firm relief, p.p.
    HeatmapContrastPp { relief: f64, sigma_lo: f64, sigma_hi: f64 },
    /// Terminal aggregate informality change at another `sigma_sub` and relief, p.p.
    FrontierDInformalityPp { sigma_sub: f64, relief: f64 },
}

impl Metric {
    pub fn label(&self) -> String {
        match self {
            Metric::AReqPct => "a_req_pct".into(),
            Metric::DyPct => "dy_pct".into(),
            Metric::DcPct => "dc_pct".into(),
            Metric::DInformalityPp => "d_informality_pp".into(),
            Metric::DGdpPerHourPct => "d_gdp_per_hour_pct".into(),
            Metric::FatigueGdpPct => "fatigue_gdp_pct".into(),
            Metric::FatigueGdpPerHourPct => "fatigue_gdp_per_hour_pct".into(),
            Metric::GroupAReqPct(g) => format!("a_req_pct.{g}"),
            Metric::GroupDyPct(g) => format!("dy_pct.{g}"),
            Metric::GroupDInformalityPp(g) => format!("d_informality_pp.{g}"),
            Metric::HoursCurveAReqPct(h) => format!("a_req_pct@{h}h"),
            Metric::HeatmapContrastPp { relief, sigma_lo, sigma_hi } => {
                format!("a_req_contrast_pp@relief={relief},sigma={sigma_lo}..{sigma_hi}")
            }
            Metric::FrontierDInformalityPp { sigma_sub, relief } => {
                format!("d_informality_pp@relief={relief},sigma={sigma_sub}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadlineTarget {
    pub metric: Metric,
    pub value: f64,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTargets {
    /// Baseline informality share per group, each in (0, 1).
    pub informality_share: GroupPair<f64>,
    #[serde(default)]
    pub headline: Vec<HeadlineTarget>,
}

impl CalibrationTargets {
    pub fn validate(&self) -> Result<()> {
        for (g, &s) in self.informality_share.iter() {
            if !s.is_finite() || s <= 0.0 || s >= 1.0 {
                return Err(ModelError::invalid(
                    format!("calibration.targets.informality_share.{g}"),
                    format!("must lie in (0, 1), got {s}"),
                ));
            }
        }
        for (i, t) in self.headline.iter().enumerate() {
            if !t.weight.is_finite() || t.weight < 0.0 {
                return Err(ModelError::invalid(
                    format!("calibration.targets.headline[{i}].weight"),
                    format!("must be finite and >= 0, got {}", t.weight),
                ));
            }
            if !t.value.is_finite() {
                return Err(ModelError::invalid(format!("calibration.targets.headline[{i}].value"), "must be finite"));
            }
            let path = format!("calibration.targets.headline[{i}].metric");
            match t.metric {
                Metric::HoursCurveAReqPct(h) if !h.is_finite() || h <= 0.0 => {
                    return Err(ModelError::invalid(path, format!("hours must be finite and > 0, got {h}")));
                }
                Metric::HeatmapContrastPp { relief, sigma_lo, sigma_hi } => {
                    if !(0.0..1.0).contains(&relief) {
                        return Err(ModelError::invalid(path, format!("relief {relief} outside [0, 1)")));
                    }
                    if !(sigma_lo > 0.0 && sigma_hi > sigma_lo && sigma_hi.is_finite()) {
                        return Err(ModelError::invalid(path, "need 0 < sigma_lo < sigma_hi"));
                    }
                }
                Metric::FrontierDInformalityPp { sigma_sub, relief } => {
                    if !(0.0..1.0).contains(&relief) {
                        return Err(ModelError::invalid(path, format!("relief {relief} outside [0, 1)")));
                    }
                    if !(sigma_sub.is_finite() && sigma_sub > 0.0) {
                        return Err(ModelError::invalid(path, format!("sigma_sub must be finite and > 0, got {sigma_sub}")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Baseline informality share of `group` when its wedge is `tau`.
pub fn baseline_informality(params: &EconomyParams, group: Group, tau: f64, hbar_base: f64) -> Result<f64> {
    let mut p = params.clone();
    p.groups.get_mut(group).tau = tau;
    let n = p.group(group).workforce;
    let nf = steady_formal(&p, group, hbar_base)?;
    Ok((n - nf) / n)
}

/// Marginal product of one more formal worker in `group`, holding informal
/// labor fixed, at the frictionless steady state with a zero wedge.
pub fn formal_marginal_product(params: &EconomyParams, group: Group, hbar_base: f64) -> Result<f64> {
    let mut p = params.clone();
    p.groups.get_mut(group).tau = 0.0;
    let gp = p.group(group).clone();
    let nf = steady_formal(&p, group, hbar_base)?;
    let problem = crate::solver::ChoiceProblem::new(&p, &gp, hbar_base, nf, 0.0);
    let at = problem.objective().terms(nf);
    let output_with = |lf: f64| {
        let l = model::ces_aggregate(lf, at.labor_informal, p.omega, p.sigma_sub);
        model::production(p.tfp, gp.capital, l, p.alpha)
    };
    let dn = 1e-6 * gp.workforce;
    let ell = model::formal_hours_index(&gp.mixture, hbar_base, &p.fatigue);
    let mp = (output_with(at.labor_formal + dn * ell) - at.output) / dn;
    if mp.is_finite() && mp > 0.0 {
        Ok(mp)
    } else {
        Err(ModelError::Solver(format!(
            "formal marginal product of group {group} is not positive ({mp}); cannot bracket the wedge"
        )))
    }
}

/// Wedge that makes the baseline steady state of `group` hit `target` informality.
pub fn calibrate_group_wedge(params: &EconomyParams, group: Group, target: f64, hbar_base: f64) -> Result<f64> {
    let share = |tau: f64| baseline_informality(params, group, tau, hbar_base);
    let s0 = share(0.0)?;
    if s0 >= target - SHARE_TOL * 1e-6 {
        if s0 - target > SHARE_TOL {
            let tau_max = TAU_MAX_MULTIPLE * formal_marginal_product(params, group, hbar_base)?;
            return Err(ModelError::Infeasible {
                group,
                target,
                lo: s0,
                hi: share(tau_max)?,
                tau_max,
            });
        }
        return Ok(0.0);
    }
    let tau_max = TAU_MAX_MULTIPLE * formal_marginal_product(params, group, hbar_base)?;
    let s_max = share(tau_max)?;
    if s_max < target - SHARE_TOL {
        return Err(ModelError::Infeasible {
            group,
            target,
            lo: s0,
            hi: s_max,
            tau_max,
        });
    }

    let (mut lo, mut hi) = (0.0, tau_max);
    let (mut s_lo, mut s_hi) = (s0, s_max);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_REL_WIDTH * tau_max {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let s = share(mid)?;
        if s < target {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
            s_hi = s;
        }
    }
    let (tau, residual) = if (s_lo - target).abs() < (s_hi - target).abs() {
        (lo, s_lo - target)
    } else {
        (hi, s_hi - target)
    };
    if residual.abs() > SHARE_TOL {
        return Err(ModelError::Solver(format!(
            "informality share of group {group} jumps across target {target} near tau = {tau} (residual {residual:.3e})"
        )));
    }
    Ok(tau)
}

/// Solves each group's wedge so the baseline steady state hits its target
/// informality share. Returns a new configuration; the template is untouched.
pub fn calibrate_wedges(
    template: &EconomyParams,
    targets: &GroupPair<f64>,
    hbar_base: f64,
) -> Result<EconomyParams> {
    template.validate()?;
    let (small, large) = rayon::join(
        || calibrate_group_wedge(template, Group::S, targets.small, hbar_base),
        || calibrate_group_wedge(template, Group::L, targets.large, hbar_base),
    );
    let mut out = template.clone();
    out.groups.small.tau = small?;
    out.groups.large.tau = large?;
    Ok(out)
}

/// Evaluates every headline metric in `wanted` for `params`.
pub fn evaluate_metrics(params: &EconomyParams, pair_spec: &PairSpec, wanted: &[Metric]) -> Result<BTreeMap<String, f64>> {
    let pair = run_pair(params, pair_spec)?;
    let need_decomp = wanted
        .iter()
        .any(|m| matches!(m, Metric::FatigueGdpPct | Metric::FatigueGdpPerHourPct));
    let decomposition = if need_decomp {
        Some(metrics::decompose_with_pair(params, &pair)?)
    } else {
        None
    };
    let report = metrics::metrics_report(&pair, decomposition)?;
    let mut out = BTreeMap::new();
    for m in wanted {
        let v = match *m {
            Metric::AReqPct => report.a_req_terminal_pct,
            Metric::DyPct => report.dy_pct,
            Metric::DcPct => report.dc_pct,
            Metric::DInformalityPp => report.d_informality_pp,
            Metric::DGdpPerHourPct => report.d_gdp_per_hour_pct,
            Metric::FatigueGdpPct => decomposition.map(|d| d.gdp.fatigue_pct).unwrap_or(f64::NAN),
            Metric::FatigueGdpPerHourPct => decomposition.map(|d| d.gdp_per_hour.fatigue_pct).unwrap_or(f64::NAN),
            Metric::GroupAReqPct(g) => report.per_group.get(g).a_req_pct,
            Metric::GroupDyPct(g) => report.per_group.get(g).dy_pct,
            Metric::GroupDInformalityPp(g) => report.per_group.get(g).d_informality_pp,
            Metric::HoursCurveAReqPct(h) => {
                let spec = PairSpec { hbar_cap: h, relief: 0.0, ..*pair_spec };
                let p = run_pair(params, &spec)?;
                pct(metrics::a_req(&p.baseline, &p.cap, spec.horizon - 1)?)
            }
            Metric::HeatmapContrastPp { relief, sigma_lo, sigma_hi } => {
                let spec = PairSpec { relief, ..*pair_spec };
                let at = |sigma: f64| -> Result<f64> {
                    let mut q = params.clone();
                    q.sigma_sub = sigma;
                    let p = run_pair(&q, &spec)?;
                    Ok(pct(metrics::a_req(&p.baseline, &p.cap, spec.horizon - 1)?))
                };
                at(sigma_hi)? - at(sigma_lo)?
            }
            Metric::FrontierDInformalityPp { sigma_sub, relief } => {
                let mut q = params.clone();
                q.sigma_sub = sigma_sub;
                let p = run_pair(&q, &PairSpec { relief, ..*pair_spec })?;
                metrics::metrics_report(&p, None)?.d_informality_pp
            }
        };
        out.insert(m.label(), v);
    }
    Ok(out)
}

/// Parameters the fine-tuner may move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunableParam {
    Kappa,
    HStar,
    EtaInformal,
    HInformal,
    SigmaSub,
    Omega,
    LambdaDw,
    InformalConvex(Group),
    InformalLinear(Group),
    Gamma(Group),
}

impl TunableParam {
    /// The default search subset.
    pub fn documented_subset() -> Vec<TunableParam> {
        vec![
            TunableParam::Kappa,
            TunableParam::EtaInformal,
            TunableParam::SigmaSub,
            TunableParam::Omega,
            TunableParam::InformalConvex(Group::S),
            TunableParam::InformalConvex(Group::L),
            TunableParam::Gamma(Group::S),
            TunableParam::Gamma(Group::L),
            TunableParam::LambdaDw,
        ]
    }

    pub fn label(&self) -> String {
        match self {
            TunableParam::Kappa => "fatigue.kappa".into(),
            TunableParam::HStar => "fatigue.h_star".into(),
            TunableParam::EtaInformal => "eta_informal".into(),
            TunableParam::HInformal => "h_informal".into(),
            TunableParam::SigmaSub => "sigma_sub".into(),
            TunableParam::Omega => "omega".into(),
            TunableParam::LambdaDw => "lambda_dw".into(),
            TunableParam::InformalConvex(g) => format!("groups.{g}.informal_convex"),
            TunableParam::InformalLinear(g) => format!("groups.{g}.informal_linear"),
            TunableParam::Gamma(g) => format!("groups.{g}.gamma"),
        }
    }

    pub fn get(&self, p: &EconomyParams) -> f64 {
        match *self {
            TunableParam::Kappa => p.fatigue.kappa,
            TunableParam::HStar => p.fatigue.h_star,
            TunableParam::EtaInformal => p.eta_informal,
            TunableParam::HInformal => p.h_informal,
            TunableParam::SigmaSub => p.sigma_sub,
            TunableParam::Omega => p.omega,
            TunableParam::LambdaDw => p.lambda_dw,
            TunableParam::InformalConvex(g) => p.group(g).informal_convex,
            TunableParam::InformalLinear(g) => p.group(g).informal_linear,
            TunableParam::Gamma(g) => p.group(g).gamma,
        }
    }

    pub fn set(&self, p: &mut EconomyParams, v: f64) {
        match *self {
            TunableParam::Kappa => p.fatigue.kappa = v,
            TunableParam::HStar => p.fatigue.h_star = v,
            TunableParam::EtaInformal => p.eta_informal = v,
            TunableParam::HInformal => p.h_informal = v,
            TunableParam::SigmaSub => p.sigma_sub = v,
            TunableParam::Omega => p.omega = v,
            TunableParam::LambdaDw => p.lambda_dw = v,
            TunableParam::InformalConvex(g) => p.groups.get_mut(g).informal_convex = v,
            TunableParam::InformalLinear(g) => p.groups.get_mut(g).informal_linear = v,
            TunableParam::Gamma(g) => p.groups.get_mut(g).gamma = v,
        }
    }

    /// Admissible closed range used to clamp candidate moves.
    pub fn bounds(&self) -> (f64, f64) {
        const OPEN: f64 = 1e-6;
        match self {
            TunableParam::Kappa => (0.0, 0.05),
            TunableParam::HStar => (10.0, 80.0),
            TunableParam::EtaInformal | TunableParam::Omega => (OPEN, 1.0 - OPEN),
            TunableParam::HInformal => (1.0, 80.0),
            TunableParam::SigmaSub => (0.05, 10.0),
            TunableParam::LambdaDw => (0.0, 1.0),
            TunableParam::InformalConvex(_) | TunableParam::InformalLinear(_) | TunableParam::Gamma(_) => {
                (0.0, f64::INFINITY)
            }
        }
    }

    /// Scale of a unit step when the current value is zero.
    fn fallback_scale(&self) -> f64 {
        match self {
            TunableParam::Kappa => 1e-4,
            TunableParam::LambdaDw => 0.1,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneOptions {
    #[serde(default = "TunableParam::documented_subset")]
    pub parameters: Vec<TunableParam>,
    /// Initial step as a fraction of each parameter's magnitude.
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
    /// Search stops once every relative step is below this.
    #[serde(default = "default_min_step")]
    pub min_step: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    /// Re-solve the wedges for each candidate so informality targets stay exact.
    #[serde(default = "default_true")]
    pub recalibrate_wedges: bool,
}

fn default_initial_step() -> f64 {
    0.1
}
fn default_min_step() -> f64 {
    1e-4
}
fn default_max_rounds() -> usize {
    200
}
fn default_true() -> bool {
    true
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            parameters: TunableParam::documented_subset(),
            initial_step: default_initial_step(),
            min_step: default_min_step(),
            max_rounds: default_max_rounds(),
            recalibrate_wedges: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub params: EconomyParams,
    /// Achieved minus target, keyed by metric label.
    pub residuals: BTreeMap<String, f64>,
    pub achieved: BTreeMap<String, f64>,
    /// Weighted sum of squared headline residuals.
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Evaluation {
    params: EconomyParams,
    achieved: BTreeMap<String, f64>,
    objective: f64,
}

fn evaluate_candidate(
    candidate: EconomyParams,
    targets: &CalibrationTargets,
    pair_spec: &PairSpec,
    options: &TuneOptions,
    active: &[HeadlineTarget],
) -> Option<Evaluation> {
    candidate.validate().ok()?;
    let params = if options.recalibrate_wedges {
        calibrate_wedges(&candidate, &targets.informality_share, pair_spec.hbar_base).ok()?
    } else {
        candidate
    };
    let wanted: Vec<Metric> = active.iter().map(|t| t.metric).collect();
    let achieved = evaluate_metrics(&params, pair_spec, &wanted).ok()?;
    let objective = active
        .iter()
        .map(|t| {
            let r = achieved[&t.metric.label()] - t.value;
            t.weight * r * r
        })
        .sum::<f64>();
    objective.is_finite().then_some(Evaluation {
        params,
        achieved,
        objective,
    })
}

fn residuals_of(achieved: &BTreeMap<String, f64>, active: &[HeadlineTarget]) -> BTreeMap<String, f64> {
    active
        .iter()
        .map(|t| {
            let label = t.metric.label();
            (label.clone(), achieved[&label] - t.value)
        })
        .collect()
}

/// Pattern search over `options.parameters` minimizing the weighted squared
/// headline residuals. Each round evaluates every `+step`/`-step` move in
/// parallel and keeps the best; steps halve when no move improves.
pub fn tune_reference(
    params: &EconomyParams,
    targets: &CalibrationTargets,
    pair_spec: &PairSpec,
    options: &TuneOptions,
) -> Result<CalibrationReport> {
    params.validate()?;
    targets.validate()?;
    pair_spec.validate()?;
    let active: Vec<HeadlineTarget> = targets.headline.iter().copied().filter(|t| t.weight > 0.0).collect();
    if active.is_empty() {
        return Ok(CalibrationReport {
            params: params.clone(),
            residuals: BTreeMap::new(),
            achieved: BTreeMap::new(),
            objective: 0.0,
            iterations: 0,
            evaluations: 0,
            converged: true,
        });
    }

    let mut best = evaluate_candidate(params.clone(), targets, pair_spec, options, &active).ok_or_else(|| {
        ModelError::Solver("starting configuration cannot be evaluated (wedge calibration or scenario failed)".into())
    })?;
    let mut evaluations = 1;
    let mut steps: Vec<f64> = options
        .parameters
        .iter()
        .map(|p| {
            let v = p.get(params).abs();
            options.initial_step * if v > 0.0 { v } else { p.fallback_scale() }
        })
        .collect();
    let scales: Vec<f64> = steps.iter().map(|s| s / options.initial_step).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_rounds {
        iterations += 1;
        let moves: Vec<(usize, f64)> = (0..options.parameters.len())
            .flat_map(|i| [(i, 1.0), (i, -1.0)])
            .collect();
        let candidates: Vec<Option<Evaluation>> = moves
            .par_iter()
            .map(|&(i, dir)| {
                let param = options.parameters[i];
                let (lo, hi) = param.bounds();
                let current = param.get(&best.params);
                let next = (current + dir * steps[i]).clamp(lo, hi);
                if next == current {
                    return None;
                }
                let mut c = best.params.clone();
                param.set(&mut c, next);
                evaluate_candidate(c, targets, pair_spec, options, &active)
            })
            .collect();
        evaluations += candidates.len();

        let winner = candidates
            .into_iter()
            .enumerate()
            .filter_map(|(k, c)| c.map(|c| (k, c)))
            .filter(|(_, c)| c.objective < best.objective)
            .min_by(|a, b| a.1.objective.total_cmp(&b.1.objective).then(a.0.cmp(&b.0)));
        match winner {
            Some((k, eval)) => {
                log::debug!(
                    "round {iterations}: {} {:+} -> objective {:.6e}",
                    options.parameters[moves[k].0].label(),
                    moves[k].1 * steps[moves[k].0],
                    eval.objective
                );
                best = eval;
            }
            None => {
                for s in steps.iter_mut() {
                    *s *= 0.5;
                }
                if steps.iter().zip(&scales).all(|(s, scale)| *s <= options.min_step * scale) {
                    converged = true;
                    break;
                }
            }
        }
    }

    Ok(CalibrationReport {
        residuals: residuals_of(&best.achieved, &active),
        achieved: best.achieved,
        objective: best.objective,
        params: best.params,
        iterations,
        evaluations,
        converged,
    })
}

//! Required TFP, headline deltas and the fatigue channel decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::params::{EconomyParams, Group, GroupPair};
use crate::scenario::{initial_state, run_pair, run_scenario_from, PairSpec, ScenarioPair, ScenarioResult};

fn check_aligned(base: &ScenarioResult, cap: &ScenarioResult, t: usize) -> Result<()> {
    if base.horizon() != cap.horizon() {
        return Err(ModelError::UndefinedMetric(format!(
            "scenario horizons differ: {} vs {}",
            base.horizon(),
            cap.horizon()
        )));
    }
    if t >= base.horizon() {
        return Err(ModelError::UndefinedMetric(format!(
            "period {t} outside horizon {}",
            base.horizon()
        )));
    }
    Ok(())
}

fn quotient(num: f64, den: f64, what: &str) -> Result<f64> {
    if !(den > 0.0) || !num.is_finite() {
        return Err(ModelError::UndefinedMetric(format!("{what}: denominator {den}, numerator {num}")));
    }
    Ok(num / den)
}

/// `Y_base[t] / Y_cap[t]`: the TFP multiple that restores baseline output.
pub fn a_req(base: &ScenarioResult, cap: &ScenarioResult, t: usize) -> Result<f64> {
    check_aligned(base, cap, t)?;
    quotient(base.records[t].output, cap.records[t].output, "a_req")
}

pub fn group_a_req(base: &ScenarioResult, cap: &ScenarioResult, group: Group, t: usize) -> Result<f64> {
    check_aligned(base, cap, t)?;
    quotient(
        base.records[t].groups.get(group).output,
        cap.records[t].groups.get(group).output,
        "group a_req",
    )
}

/// Percentage form of a ratio: `100 (ratio - 1)`.
pub fn pct(ratio: f64) -> f64 {
    100.0 * (ratio - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub dy_pct: f64,
    pub dc_pct: f64,
    pub d_informality_pp: f64,
    pub d_gdp_per_hour_pct: f64,
}

pub fn deltas(base: &ScenarioResult, cap: &ScenarioResult, t: usize) -> Result<Deltas> {
    check_aligned(base, cap, t)?;
    let b = &base.records[t];
    let c = &cap.records[t];
    let gph_base = quotient(b.output, b.hours, "baseline GDP per hour")?;
    let gph_cap = quotient(c.output, c.hours, "cap GDP per hour")?;
    Ok(Deltas {
        dy_pct: pct(quotient(c.output, b.output, "dY")?),
        dc_pct: pct(quotient(c.consumption, b.consumption, "dC")?),
        d_informality_pp: 100.0 * (c.informality_share - b.informality_share),
        d_gdp_per_hour_pct: pct(gph_cap / gph_base),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub dy_pct: f64,
    pub d_informality_pp: f64,
    pub a_req_pct: f64,
}

pub fn group_metrics(base: &ScenarioResult, cap: &ScenarioResult, group: Group, t: usize) -> Result<GroupMetrics> {
    check_aligned(base, cap, t)?;
    let b = base.records[t].groups.get(group);
    let c = cap.records[t].groups.get(group);
    Ok(GroupMetrics {
        dy_pct: pct(quotient(c.output, b.output, "group dY")?),
        d_informality_pp: 100.0 * (c.informality_share() - b.informality_share()),
        a_req_pct: pct(group_a_req(base, cap, group, t)?),
    })
}

/// Split of a cap effect into the fatigue channel and everything else.
/// `fatigue_pct + other_pct == total_pct` up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub fatigue_pct: f64,
    pub other_pct: f64,
    pub total_pct: f64,
}

impl Decomposition {
    fn from_runs(total_pct: f64, frozen_pct: f64) -> Self {
        Self {
            fatigue_pct: total_pct - frozen_pct,
            other_pct: frozen_pct,
            total_pct,
        }
    }
}

/// Fatigue decomposition of both GDP and GDP per hour at the terminal period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatigueDecomposition {
    pub gdp: Decomposition,
    pub gdp_per_hour: Decomposition,
}

/// Re-runs the cap scenario with per-hour efficiency frozen at the baseline
/// cap and attributes the difference to the fatigue channel.
pub fn decompose_fatigue(params: &EconomyParams, spec: &PairSpec) -> Result<FatigueDecomposition> {
    let pair = run_pair(params, spec)?;
    decompose_with_pair(params, &pair)
}

/// As [`decompose_fatigue`], reusing an existing baseline/cap pair.
pub fn decompose_with_pair(params: &EconomyParams, pair: &ScenarioPair) -> Result<FatigueDecomposition> {
    let spec = pair.spec;
    let initial = initial_state(params, spec.hbar_base)?;
    let frozen_policy = spec.cap_policy().with_frozen_efficiency(spec.hbar_base);
    let frozen = run_scenario_from(params, &frozen_policy, initial)?;
    let t = spec.horizon - 1;
    let total = deltas(&pair.baseline, &pair.cap, t)?;
    let without_fatigue = deltas(&pair.baseline, &frozen, t)?;
    Ok(FatigueDecomposition {
        gdp: Decomposition::from_runs(total.dy_pct, without_fatigue.dy_pct),
        gdp_per_hour: Decomposition::from_runs(total.d_gdp_per_hour_pct, without_fatigue.d_gdp_per_hour_pct),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `Y_base[t] / Y_cap[t]` for every period.
    pub a_req_path: Vec<f64>,
    pub a_req_terminal_pct: f64,
    pub dy_pct: f64,
    pub dc_pct: f64,
    pub d_informality_pp: f64,
    pub d_gdp_per_hour_pct: f64,
    pub per_group: GroupPair<GroupMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<FatigueDecomposition>,
    /// Both runs settled by the terminal period.
    pub settled: bool,
}

pub fn metrics_report(pair: &ScenarioPair, decomposition: Option<FatigueDecomposition>) -> Result<MetricsReport> {
    let (base, cap) = (&pair.baseline, &pair.cap);
    check_aligned(base, cap, 0)?;
    let t = base.horizon() - 1;
    let a_req_path = (0..base.horizon())
        .map(|t| a_req(base, cap, t))
        .collect::<Result<Vec<_>>>()?;
    let d = deltas(base, cap, t)?;
    Ok(MetricsReport {
        a_req_terminal_pct: pct(a_req_path[t]),
        a_req_path,
        dy_pct: d.dy_pct,
        dc_pct: d.dc_pct,
        d_informality_pp: d.d_informality_pp,
        d_gdp_per_hour_pct: d.d_gdp_per_hour_pct,
        per_group: GroupPair::try_from_fn(|g| group_metrics(base, cap, g, t))?,
        decomposition,
        settled: base.settled && cap.settled,
    })
}

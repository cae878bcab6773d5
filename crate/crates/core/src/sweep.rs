//! Policy surfaces: required TFP against the cap, the (sigma, relief)
//! heatmap, and the informality frontier.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::metrics::{group_metrics, metrics_report};
use crate::params::{EconomyParams, Group};
use crate::scenario::{run_pair, PairSpec, DEFAULT_HBAR_BASE, DEFAULT_HBAR_CAP, DEFAULT_HORIZON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    HoursCurve,
    Heatmap,
    Frontier,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::HoursCurve => "hours_curve",
            SweepKind::Heatmap => "heatmap",
            SweepKind::Frontier => "frontier",
        }
    }
}

pub fn default_hours_grid() -> Vec<f64> {
    (30..=44).map(f64::from).collect()
}

pub fn default_sigma_grid() -> Vec<f64> {
    (0..9).map(|i| 0.6 + 0.1 * f64::from(i)).collect()
}

pub fn default_relief_grid() -> Vec<f64> {
    (0..9).map(|i| 0.1 * f64::from(i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    #[serde(default = "default_hours_grid")]
    pub hours: Vec<f64>,
    #[serde(default = "default_sigma_grid")]
    pub sigma_sub: Vec<f64>,
    #[serde(default = "default_relief_grid")]
    pub relief: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_hbar_base")]
    pub hbar_base: f64,
    /// Cap used by heatmap and frontier cells.
    #[serde(default = "default_hbar_cap")]
    pub hbar_cap: f64,
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

impl SweepSpec {
    pub fn new(kind: SweepKind) -> Self {
        Self {
            kind,
            hours: default_hours_grid(),
            sigma_sub: default_sigma_grid(),
            relief: default_relief_grid(),
            horizon: DEFAULT_HORIZON,
            hbar_base: DEFAULT_HBAR_BASE,
            hbar_cap: DEFAULT_HBAR_CAP,
        }
    }

    pub fn validate(&self, params: &EconomyParams) -> Result<()> {
        PairSpec {
            horizon: self.horizon,
            hbar_base: self.hbar_base,
            hbar_cap: self.hbar_cap,
            relief: 0.0,
        }
        .validate()
        .map_err(|e| rebase(e, "sweep"))?;
        match self.kind {
            SweepKind::HoursCurve => {
                check_grid("sweep.hours", &self.hours)?;
                let max_h = params.max_mixture_hours();
                if let Some(&h) = self.hours.iter().find(|&&h| h <= 0.0 || h > max_h) {
                    return Err(ModelError::invalid(
                        "sweep.hours",
                        format!("{h} outside (0, {max_h}], the largest contractual hours in the mixtures"),
                    ));
                }
            }
            SweepKind::Heatmap | SweepKind::Frontier => {
                check_grid("sweep.sigma_sub", &self.sigma_sub)?;
                check_grid("sweep.relief", &self.relief)?;
                if let Some(&s) = self.sigma_sub.iter().find(|&&s| s <= 0.0) {
                    return Err(ModelError::invalid("sweep.sigma_sub", format!("{s} must be > 0")));
                }
                if let Some(&r) = self.relief.iter().find(|&&r| !(0.0..1.0).contains(&r)) {
                    return Err(ModelError::invalid("sweep.relief", format!("{r} outside [0, 1)")));
                }
            }
        }
        Ok(())
    }

    fn coordinates(&self) -> Vec<Coordinates> {
        match self.kind {
            SweepKind::HoursCurve => self
                .hours
                .iter()
                .map(|&h| Coordinates {
                    hbar: h,
                    sigma_sub: None,
                    relief: 0.0,
                })
                .collect(),
            SweepKind::Heatmap | SweepKind::Frontier => self
                .sigma_sub
                .iter()
                .flat_map(|&s| {
                    self.relief.iter().map(move |&r| Coordinates {
                        hbar: self.hbar_cap,
                        sigma_sub: Some(s),
                        relief: r,
                    })
                })
                .collect(),
        }
    }
}

fn rebase(e: ModelError, prefix: &str) -> ModelError {
    match e {
        ModelError::Invalid { path, message } => ModelError::Invalid {
            path: path.replacen("scenario", prefix, 1),
            message,
        },
        other => other,
    }
}

fn check_grid(path: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(ModelError::invalid(path, "grid must not be empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::invalid(path, "grid values must be finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModelError::invalid(path, "grid must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    /// Cap applied in the cap scenario.
    pub hbar: f64,
    /// `None` keeps the configured value.
    pub sigma_sub: Option<f64>,
    pub relief: f64,
}

/// Reason a cell has missing values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    Validation,
    Solver,
    NonConvergence,
    UndefinedMetric,
    NegativeConsumption,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Validation => "validation",
            DiagnosticCode::Solver => "solver",
            DiagnosticCode::NonConvergence => "non_convergence",
            DiagnosticCode::UndefinedMetric => "undefined_metric",
            DiagnosticCode::NegativeConsumption => "negative_consumption",
        }
    }

    fn of(e: &ModelError) -> Self {
        match e {
            ModelError::AtPeriod { source, .. } => Self::of(source),
            ModelError::Domain(_) | ModelError::Invalid { .. } => DiagnosticCode::Validation,
            ModelError::NonConvergence { .. } => DiagnosticCode::NonConvergence,
            ModelError::UndefinedMetric(_) => DiagnosticCode::UndefinedMetric,
            ModelError::Solver(_) | ModelError::Infeasible { .. } => DiagnosticCode::Solver,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub coordinates: Coordinates,
    pub a_req_terminal_pct: Option<f64>,
    pub d_informality_pp: Option<f64>,
    pub dy_pct: Option<f64>,
    /// Terminal informality change of group S, p.p.
    pub d_informality_s_pp: Option<f64>,
    /// Both runs settled by the terminal period.
    pub settled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

impl Cell {
    fn failed(coordinates: Coordinates, code: DiagnosticCode, message: String) -> Self {
        Self {
            coordinates,
            a_req_terminal_pct: None,
            d_informality_pp: None,
            dy_pct: None,
            d_informality_s_pp: None,
            settled: None,
            diagnostic: Some(Diagnostic { code, message }),
        }
    }
}

/// Relief at which a frontier curve crosses zero, by linear interpolation
/// between the bracketing cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub sigma_sub: f64,
    pub relief: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Lexicographic in (sigma_sub, relief) or ascending in hours.
    pub cells: Vec<Cell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub crossings: Vec<Crossing>,
}

impl SweepResult {
    /// Cells of one sigma row, ordered by relief.
    pub fn row(&self, sigma_sub: f64) -> Vec<&Cell> {
        self.cells
            .iter()
            .filter(|c| c.coordinates.sigma_sub == Some(sigma_sub))
            .collect()
    }

    /// Cells of one relief column, ordered by sigma.
    pub fn column(&self, relief: f64) -> Vec<&Cell> {
        self.cells.iter().filter(|c| c.coordinates.relief == relief).collect()
    }

    pub fn missing(&self) -> usize {
        self.cells.iter().filter(|c| c.diagnostic.is_some()).count()
    }
}

/// One isolated pair run, exactly as a sweep cell would compute it.
pub fn evaluate_cell(params: &EconomyParams, spec: &SweepSpec, coordinates: Coordinates) -> Cell {
    let mut p = params.clone();
    if let Some(s) = coordinates.sigma_sub {
        p.sigma_sub = s;
    }
    let pair_spec = PairSpec {
        horizon: spec.horizon,
        hbar_base: spec.hbar_base,
        hbar_cap: coordinates.hbar,
        relief: coordinates.relief,
    };
    let pair = match p.validate().and_then(|_| run_pair(&p, &pair_spec)) {
        Ok(pair) => pair,
        Err(e) => return Cell::failed(coordinates, DiagnosticCode::of(&e), e.to_string()),
    };
    let negative: Vec<usize> = pair
        .baseline
        .negative_consumption
        .iter()
        .chain(&pair.cap.negative_consumption)
        .copied()
        .collect();
    if !negative.is_empty() {
        return Cell::failed(
            coordinates,
            DiagnosticCode::NegativeConsumption,
            format!("consumption negative in periods {negative:?}"),
        );
    }
    let metrics = metrics_report(&pair, None)
        .and_then(|report| Ok((report, group_metrics(&pair.baseline, &pair.cap, Group::S, spec.horizon - 1)?)));
    match metrics {
        Err(e) => Cell::failed(coordinates, DiagnosticCode::of(&e), e.to_string()),
        Ok((report, s)) => Cell {
            coordinates,
            a_req_terminal_pct: Some(report.a_req_terminal_pct),
            d_informality_pp: Some(report.d_informality_pp),
            dy_pct: Some(report.dy_pct),
            d_informality_s_pp: Some(s.d_informality_pp),
            settled: Some(report.settled),
            diagnostic: None,
        },
    }
}

/// Runs every grid cell in parallel. The cell list is assembled in grid
/// order, so the result does not depend on the thread count.
pub fn run_sweep(params: &EconomyParams, spec: &SweepSpec) -> Result<SweepResult> {
    params.validate()?;
    spec.validate(params)?;
    let cells: Vec<Cell> = spec
        .coordinates()
        .into_par_iter()
        .map(|c| evaluate_cell(params, spec, c))
        .collect();
    for c in cells.iter().filter(|c| c.diagnostic.is_some()) {
        log::warn!("sweep cell {:?}: {:?}", c.coordinates, c.diagnostic);
    }
    let mut result = SweepResult {
        spec: spec.clone(),
        cells,
        crossings: Vec::new(),
    };
    if spec.kind == SweepKind::Frontier {
        result.crossings = spec
            .sigma_sub
            .iter()
            .map(|&s| Crossing {
                sigma_sub: s,
                relief: zero_crossing(&result.row(s)),
            })
            .collect();
    }
    Ok(result)
}

pub fn hours_curve(params: &EconomyParams, hours: Vec<f64>, horizon: usize) -> Result<SweepResult> {
    run_sweep(
        params,
        &SweepSpec {
            hours,
            horizon,
            ..SweepSpec::new(SweepKind::HoursCurve)
        },
    )
}

pub fn heatmap(params: &EconomyParams, sigma_sub: Vec<f64>, relief: Vec<f64>, horizon: usize) -> Result<SweepResult> {
    run_sweep(
        params,
        &SweepSpec {
            sigma_sub,
            relief,
            horizon,
            ..SweepSpec::new(SweepKind::Heatmap)
        },
    )
}

pub fn frontier(params: &EconomyParams, sigma_sub: Vec<f64>, relief: Vec<f64>, horizon: usize) -> Result<SweepResult> {
    run_sweep(
        params,
        &SweepSpec {
            sigma_sub,
            relief,
            horizon,
            ..SweepSpec::new(SweepKind::Frontier)
        },
    )
}

/// First relief where the aggregate informality change goes from positive
/// to non-positive. Missing cells break a bracket.
pub fn zero_crossing(row: &[&Cell]) -> Option<f64> {
    row.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        let (ya, yb) = (a.d_informality_pp?, b.d_informality_pp?);
        if ya > 0.0 && yb <= 0.0 {
            let (xa, xb) = (a.coordinates.relief, b.coordinates.relief);
            Some(xa + (xb - xa) * ya / (ya - yb))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(relief: f64, d: Option<f64>) -> Cell {
        Cell {
            coordinates: Coordinates {
                hbar: 36.0,
                sigma_sub: Some(1.0),
                relief,
            },
            a_req_terminal_pct: d,
            d_informality_pp: d,
            dy_pct: d,
            d_informality_s_pp: d,
            settled: Some(true),
            diagnostic: None,
        }
    }

    #[test]
    fn crossing_interpolates() {
        let cells = [cell(0.0, Some(1.0)), cell(0.2, Some(0.5)), cell(0.4, Some(-1.5))];
        let row: Vec<&Cell> = cells.iter().collect();
        let x = zero_crossing(&row).unwrap();
        assert!((x - 0.25).abs() < 1e-15);
    }

    #[test]
    fn crossing_needs_both_neighbours() {
        let cells = [cell(0.0, Some(1.0)), cell(0.2, None), cell(0.4, Some(-1.5))];
        let row: Vec<&Cell> = cells.iter().collect();
        assert_eq!(zero_crossing(&row), None);
        let cells = [cell(0.0, Some(-1.0)), cell(0.2, Some(-2.0))];
        let row: Vec<&Cell> = cells.iter().collect();
        assert_eq!(zero_crossing(&row), None);
    }

    #[test]
    fn default_grids() {
        assert_eq!(default_hours_grid().len(), 15);
        let s = default_sigma_grid();
        assert_eq!(s.len(), 9);
        assert!(s[0] < 1.0 && *s.last().unwrap() > 1.0);
        let r = default_relief_grid();
        assert_eq!(r[0], 0.0);
        assert!((r[8] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn grid_checks() {
        assert!(check_grid("g", &[]).is_err());
        assert!(check_grid("g", &[1.0, 1.0]).is_err());
        assert!(check_grid("g", &[2.0, 1.0]).is_err());
        assert!(check_grid("g", &[1.0, f64::NAN]).is_err());
        assert!(check_grid("g", &[1.0, 2.0]).is_ok());
    }
}

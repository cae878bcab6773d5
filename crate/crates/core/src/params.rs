//! Structural parameters of the two-group economy.
//!
//! All parameter types deserialize with `deny_unknown_fields` and are checked by
//! `validate`, which reports the offending field with a dotted path such as
//! `economy.groups.S.mixture[2].weight`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Firm-size group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    /// Small firms.
    S,
    /// Large firms.
    L,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::S, Group::L];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::S => "S",
            Group::L => "L",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One value per firm-size group.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupPair<T> {
    #[serde(rename = "S")]
    pub small: T,
    #[serde(rename = "L")]
    pub large: T,
}

impl<T> GroupPair<T> {
    pub fn new(small: T, large: T) -> Self {
        Self { small, large }
    }

    pub fn from_fn(mut f: impl FnMut(Group) -> T) -> Self {
        let small = f(Group::S);
        let large = f(Group::L);
        Self { small, large }
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(Group) -> std::result::Result<T, E>) -> std::result::Result<Self, E> {
        let small = f(Group::S)?;
        let large = f(Group::L)?;
        Ok(Self { small, large })
    }

    pub fn get(&self, group: Group) -> &T {
        match group {
            Group::S => &self.small,
            Group::L => &self.large,
        }
    }

    pub fn get_mut(&mut self, group: Group) -> &mut T {
        match group {
            Group::S => &mut self.small,
            Group::L => &mut self.large,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Group, &T) -> U) -> GroupPair<U> {
        GroupPair {
            small: f(Group::S, &self.small),
            large: f(Group::L, &self.large),
        }
    }

    pub fn try_map<U, E>(
        &self,
        mut f: impl FnMut(Group, &T) -> std::result::Result<U, E>,
    ) -> std::result::Result<GroupPair<U>, E> {
        Ok(GroupPair {
            small: f(Group::S, &self.small)?,
            large: f(Group::L, &self.large)?,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Group, &T)> {
        [(Group::S, &self.small), (Group::L, &self.large)].into_iter()
    }
}

/// Per-hour efficiency `e(h) = exp(-kappa (h - h_star)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FatigueParams {
    /// Curvature, in 1/hours².
    pub kappa: f64,
    /// Hours at which efficiency peaks.
    pub h_star: f64,
}

impl FatigueParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !self.kappa.is_finite() || self.kappa < 0.0 {
            return Err(ModelError::invalid(
                format!("{path}.kappa"),
                format!("must be finite and >= 0, got {}", self.kappa),
            ));
        }
        if !self.h_star.is_finite() || self.h_star <= 0.0 {
            return Err(ModelError::invalid(
                format!("{path}.h_star"),
                format!("must be finite and > 0, got {}", self.h_star),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoursPoint {
    /// Contractual weekly hours.
    pub hours: f64,
    /// Share of formal workers on this contract.
    pub weight: f64,
}

/// Discrete distribution of contractual weekly hours within a group's formal block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoursMixture {
    points: Vec<HoursPoint>,
}

/// Tolerance on the mixture weights summing to one.
pub const MIXTURE_SUM_TOL: f64 = 1e-12;

impl HoursMixture {
    pub fn new(points: Vec<HoursPoint>) -> Result<Self> {
        let mixture = Self { points };
        mixture.validate("mixture")?;
        Ok(mixture)
    }

    /// Builds a mixture from `(hours, weight)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(hours, weight)| HoursPoint { hours, weight })
                .collect(),
        )
    }

    pub fn points(&self) -> &[HoursPoint] {
        &self.points
    }

    pub fn max_hours(&self) -> f64 {
        self.points.iter().map(|p| p.hours).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean paid hours per formal worker under cap `hbar`.
    pub fn paid_hours(&self, hbar: f64) -> f64 {
        self.points.iter().map(|p| p.weight * p.hours.min(hbar)).sum()
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if self.points.is_empty() {
            return Err(ModelError::invalid(path, "mixture must contain at least one point"));
        }
        let mut total = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            if !p.hours.is_finite() || p.hours <= 0.0 {
                return Err(ModelError::invalid(
                    format!("{path}[{i}].hours"),
                    format!("must be finite and > 0, got {}", p.hours),
                ));
            }
            if !p.weight.is_finite() || !(0.0..=1.0).contains(&p.weight) {
                return Err(ModelError::invalid(
                    format!("{path}[{i}].weight"),
                    format!("must lie in [0, 1], got {}", p.weight),
                ));
            }
            if i > 0 && p.hours <= self.points[i - 1].hours {
                return Err(ModelError::invalid(
                    format!("{path}[{i}].hours"),
                    "hours must be strictly increasing",
                ));
            }
            total += p.weight;
        }
        if (total - 1.0).abs() > MIXTURE_SUM_TOL {
            return Err(ModelError::invalid(
                path,
                format!("weights must sum to 1 (simplex), got {total}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupParams {
    /// Predetermined capital stock.
    pub capital: f64,
    /// Workforce, split between formal and informal employment.
    pub workforce: f64,
    /// Private cost per formal worker.
    pub tau: f64,
    /// Quadratic adjustment cost coefficient on formal employment changes.
    pub gamma: f64,
    /// Linear coefficient of the informal operating cost.
    pub informal_linear: f64,
    /// Convex coefficient of the informal operating cost.
    pub informal_convex: f64,
    pub mixture: HoursMixture,
}

impl GroupParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        positive(self.capital, &format!("{path}.capital"))?;
        positive(self.workforce, &format!("{path}.workforce"))?;
        nonnegative(self.tau, &format!("{path}.tau"))?;
        nonnegative(self.gamma, &format!("{path}.gamma"))?;
        nonnegative(self.informal_linear, &format!("{path}.informal_linear"))?;
        nonnegative(self.informal_convex, &format!("{path}.informal_convex"))?;
        self.mixture.validate(&format!("{path}.mixture"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyParams {
    /// Capital share.
    pub alpha: f64,
    /// Total factor productivity, common to both scenarios.
    #[serde(default = "default_tfp")]
    pub tfp: f64,
    /// CES weight on formal effective labor.
    pub omega: f64,
    /// Elasticity of substitution between formal and informal effective labor.
    pub sigma_sub: f64,
    /// Relative per-hour productivity of informal work.
    pub eta_informal: f64,
    /// Weekly hours of informal workers.
    pub h_informal: f64,
    /// Share of the wedge that is a real resource loss.
    pub lambda_dw: f64,
    pub fatigue: FatigueParams,
    pub groups: GroupPair<GroupParams>,
}

fn default_tfp() -> f64 {
    1.0
}

impl EconomyParams {
    /// CES exponent `(sigma_sub - 1) / sigma_sub`.
    pub fn rho(&self) -> f64 {
        (self.sigma_sub - 1.0) / self.sigma_sub
    }

    pub fn group(&self, group: Group) -> &GroupParams {
        self.groups.get(group)
    }

    pub fn total_workforce(&self) -> f64 {
        self.groups.small.workforce + self.groups.large.workforce
    }

    /// Largest contractual hours across both groups' mixtures.
    pub fn max_mixture_hours(&self) -> f64 {
        self.groups
            .small
            .mixture
            .max_hours()
            .max(self.groups.large.mixture.max_hours())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_at("economy")
    }

    pub fn validate_at(&self, path: &str) -> Result<()> {
        open_unit(self.alpha, &format!("{path}.alpha"))?;
        positive(self.tfp, &format!("{path}.tfp"))?;
        open_unit(self.omega, &format!("{path}.omega"))?;
        positive(self.sigma_sub, &format!("{path}.sigma_sub"))?;
        open_unit(self.eta_informal, &format!("{path}.eta_informal"))?;
        positive(self.h_informal, &format!("{path}.h_informal"))?;
        if !self.lambda_dw.is_finite() || !(0.0..=1.0).contains(&self.lambda_dw) {
            return Err(ModelError::invalid(
                format!("{path}.lambda_dw"),
                format!("must lie in [0, 1], got {}", self.lambda_dw),
            ));
        }
        self.fatigue.validate(&format!("{path}.fatigue"))?;
        for (g, params) in self.groups.iter() {
            params.validate(&format!("{path}.groups.{g}"))?;
        }
        Ok(())
    }
}

fn positive(v: f64, path: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::invalid(path, format!("must be finite and > 0, got {v}")))
    }
}

fn nonnegative(v: f64, path: &str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::invalid(path, format!("must be finite and >= 0, got {v}")))
    }
}

fn open_unit(v: f64, path: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ModelError::invalid(path, format!("must lie in the open interval (0, 1), got {v}")))
    }
}

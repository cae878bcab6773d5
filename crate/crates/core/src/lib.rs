//! Short-run model of a statutory cap on formal weekly hours with
//! formal/informal labor reallocation.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod metrics;
pub mod model;
pub mod output;
pub mod params;
pub mod plot;
pub mod scenario;
pub mod solver;
pub mod sweep;
#[cfg(feature = "testing")]
pub mod testing;

pub use error::{ModelError, Result};
pub use params::{EconomyParams, FatigueParams, Group, GroupPair, GroupParams, HoursMixture, HoursPoint};
pub use scenario::{run_pair, run_scenario, PairSpec, PolicyPath, ScenarioPair, ScenarioResult};

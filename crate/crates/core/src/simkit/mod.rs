//! Monte Carlo simulation of diffusions, Brownian motion and Bessel
//! processes, with statistical checks of the classifier's verdicts and of
//! the path identities behind them.
//!
//! Every path draws from its own ChaCha8 stream seeded by
//! `(master_seed, stream, path_index)`, and results are reduced in index
//! order, so summaries are bit-identical regardless of the number of worker
//! threads.

mod agreement;
mod bessel;
mod brownian;
mod checks;
mod diffusion;
mod functional;
mod localtime;
pub mod rng;
mod stats;

pub use agreement::{
    agreement_path, verdict_agreement, AgreementSummary, BucketSummary, PathRecord, SimParams,
    SimulatedEvent,
};
pub use bessel::{first_hit, last_exit, simulate_bessel3, simulate_squared_bessel2, LastExit};
pub use brownian::simulate_bm_to_hit;
pub use checks::{
    cherny_dichotomy_check, fubini_mean_check, occupation_check, ray_knight_check,
    williams_check, ChernyCheck, FubiniCheck, OccupationCheck, RayKnightCheck, WilliamsCheck,
};
pub use diffusion::{simulate_diffusion, simulate_diffusion_with_growth};
pub use functional::{
    cumulative_integral, functional_trajectory, trend_of_increments, Checkpoint,
    DichotomyDiagnostic, Trend, TrendRule,
};
pub use localtime::{local_time_profile, local_time_profile_with_clock, LocalTimeProfile};
pub use stats::{ks_critical_value, ks_two_sample, median, KsResult, MCSummary};

use crate::coeffspec::Endpoint;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("coefficient undefined at y={x} (t={t})")]
    CoefficientUndefined { x: f64, t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// How a simulated path ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exit {
    NoExit { horizon: f64 },
    ExitAt {
        time: f64,
        endpoint: Endpoint,
    },
}

/// A simulated trajectory. After an exit the path is absorbed: the last
/// stored value is the endpoint and nothing follows it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub exit: Exit,
    pub driving_seed: u64,
}

impl PathSample {
    /// Time of the last stored point.
    pub fn terminal_time(&self) -> f64 {
        *self.times.last().expect("paths are never empty")
    }

    pub fn terminal_value(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    pub fn exit_time(&self) -> Option<f64> {
        match self.exit {
            Exit::ExitAt { time, .. } => Some(time),
            Exit::NoExit { .. } => None,
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), SimError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

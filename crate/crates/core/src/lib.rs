//! Debt-run, illiquidity and insolvency barriers of a firm financed by
//! rolled-over short-term debt and a single issue of long-term debt.
//!
//! * [`model`]: capital structure, recovery and the insolvency barrier.
//! * [`beliefs`]: distribution of the run proportion and the induced
//!   survival belief `theta`.
//! * [`fd`]: implicit finite differences on the log-transformed grid.
//! * [`discrete`], [`greens`]: rollovers at fixed dates, with an analytic
//!   oracle on each interval.
//! * [`staggered`]: Cox-process maturities and the free boundary `x*(t)`.
//! * [`risk`]: default probabilities and their decomposition.
//! * [`sim`]: path simulation, scenario classification, strategy payoffs.

pub mod barrier;
pub mod beliefs;
pub mod discrete;
pub mod error;
pub mod fd;
pub mod greens;
pub mod model;
pub mod quadrature;
pub mod risk;
pub mod sim;
pub mod staggered;

pub use barrier::{BarrierPoint, NeverRun, RootKind, RunThreshold, Scaled, TimeShifted};
pub use beliefs::{theta, BeliefSpec};
pub use discrete::{extract_discrete_barriers, solve_discrete_value, DiscreteBarrierSet, DiscreteTenor};
pub use error::{Error, Result};
pub use fd::{FarField, Grid, SolverOptions, ValueSurface};
pub use greens::{greens_kernel, greens_value};
pub use quadrature::Quadrature;
pub use model::{illiquidity_barrier, insolvency_barrier, l_of_t, recovery_rate, ModelParams};
pub use risk::{
    blackcox_pd, mc_default_discrete, mc_default_staggered, mc_first_passage, solve_survival_staggered, DefaultDecomposition,
    SurvivalSurface, SurvivalVariant,
};
pub use sim::{
    classify_scenario, ks_exponential, path_rng, simulate_path, strategy_payoff, Arrivals, Estimate, Outcome,
    ScenarioRecord, SimMesh, SimPath, TenorRef,
};
pub use staggered::{
    extract_free_boundary, run_stopping_time, solve_staggered_value, solve_staggered_value_with_stats, BarrierCurve,
    IntensitySpec, NewtonStats,
};

//! Data-parallel sweeps over parameter grids and scenario ensembles.
//!
//! With the `parallel` feature (default) the plain entry points run on the rayon pool;
//! the `_sequential` variants are always available and give identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::equilibrium::{compute_r0, solve_endemic, EndemicEquilibrium};
use crate::error::Result;
use crate::integrator::{integrate, IntegrationConfig, Trajectory};
use crate::model::ModelField;
use crate::params::ModelParams;
use crate::stats::{stats_analytic, ReinfectionStats};

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled. Order is kept.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn seq_map<T, U, F: Fn(&T) -> U>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub r0: f64,
    pub equilibrium: EndemicEquilibrium,
    pub stats: ReinfectionStats,
}

fn sweep_one(p: &ModelParams) -> Result<SweepRow> {
    let r0 = compute_r0(p)?;
    let equilibrium = solve_endemic(p)?;
    let stats = stats_analytic(&equilibrium, p)?;
    Ok(SweepRow { r0, equilibrium, stats })
}

/// Endemic equilibrium and mean reinfection numbers for every parameter set.
pub fn equilibrium_sweep(params: &[ModelParams]) -> Vec<Result<SweepRow>> {
    par_map(params, sweep_one)
}

pub fn equilibrium_sweep_sequential(params: &[ModelParams]) -> Vec<Result<SweepRow>> {
    seq_map(params, sweep_one)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub field: ModelField,
    pub x0: Vec<f64>,
    pub config: IntegrationConfig,
}

fn run_one(s: &Scenario) -> Result<Trajectory> {
    integrate(&s.field, &s.x0, &s.config)
}

/// Independent integrations; each one stays sequential.
pub fn simulate_ensemble(scenarios: &[Scenario]) -> Vec<Result<Trajectory>> {
    par_map(scenarios, run_one)
}

pub fn simulate_ensemble_sequential(scenarios: &[Scenario]) -> Vec<Result<Trajectory>> {
    seq_map(scenarios, run_one)
}

//! Reinfection-counting SEIRS model: simulation, endemic equilibria, mean reinfection
//! numbers, population fate and SIS parameter identification.

pub mod eigen;
pub mod equilibrium;
pub mod error;
pub mod finite_diff;
pub mod identification;
pub mod integrator;
pub mod model;
pub mod params;
pub mod roots;
pub mod state;
pub mod stats;
pub mod sweep;

pub use equilibrium::{
    classify_fate, closed_form_nu0, compute_r0, jacobian_macro, jacobian_micro_block, solve_endemic,
    EndemicEquilibrium, FateClass, PopulationFate,
};
pub use error::{Error, Result};
pub use identification::{
    identify_from_equilibrium, identify_from_y_only, identify_full, reconstruct_states, IdentificationResult,
    ObservedSeries,
};
pub use integrator::{integrate, IntegrationConfig, Method, Trajectory, VectorField};
pub use model::{ModelField, SystemKind};
pub use params::{ModelParams, TimeUnit, DAYS_PER_YEAR};
pub use state::{Compartments, MacroState, MicroState, SisState};
pub use stats::{stats_analytic, stats_closed_form_nu0, stats_empirical, ReinfectionStats};

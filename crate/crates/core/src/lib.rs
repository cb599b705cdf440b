//! Lumping of controlled mass-action reaction networks with interval rates.
//!
//! The numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar type for the common cases.

// `!(x > 0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod ctmc;
pub mod generators;
pub mod lumping;
pub mod model;
pub mod ode;
pub mod parser;
pub mod reconstruct;
pub mod scalar;

#[cfg(test)]
pub(crate) mod testutil;

pub use ctmc::{
    build_generator, check_ordinary_lumpability, enumerate_population_box, enumerate_states, scaled_generator,
    ssa_simulate, transient_solve, CtmcError, StateSpace,
};
pub use generators::{gen_multisite, gen_sir_network, gen_sir_star, GenError};
pub use lumping::{
    check_equivalence, coarsest_equivalence, compute_signature, quotient, refine_once, rr, BlockMap, LumpError,
};
pub use model::{
    block_projection, falling_binomial, BlockProjection, Extremal, ModelError, Multiset, Partition, Species,
};
pub use ode::{
    block_sum_state, block_sums, evaluate_cost, project_control, simulate, time_grid, vector_field, OdeError,
};
pub use parser::{parse_model, parse_partition, serialize_model, ParseError, ParseErrorKind};
pub use reconstruct::{
    build_drift_match, reconstruct_trajectory, solve_box_ls, solve_box_ls_from, BoxLsOptions, ReconstructError,
};
pub use scalar::Scalar;

pub type Ccrn = model::Ccrn<f64>;
pub type Reaction = model::Reaction<f64>;
pub type RateInterval = model::RateInterval<f64>;
pub type Signature = lumping::Signature<f64>;
pub type ControlSchedule = ode::ControlSchedule<f64>;
pub type Trajectory = ode::Trajectory<f64>;
pub type CostSpec = ode::CostSpec<f64>;
pub type Generator = ctmc::Generator<f64>;
pub type SirParams = generators::SirParams<f64>;
pub type ModelDocument = parser::ModelDocument<f64>;
pub type DriftMatchProblem = reconstruct::DriftMatchProblem<f64>;

pub type Ccrn32 = model::Ccrn<f32>;
pub type Reaction32 = model::Reaction<f32>;
pub type RateInterval32 = model::RateInterval<f32>;
pub type ControlSchedule32 = ode::ControlSchedule<f32>;
pub type Trajectory32 = ode::Trajectory<f32>;

//! Discrete information bottleneck solver and hierarchical information-flow
//! simulator.
//!
//! An organization is modelled as a chain of compression stages. Each level
//! receives a representation of an external signal `X`, compresses it under
//! an attention budget, and passes the result upward. The relevance of every
//! representation is measured against a fixed decision variable `Y`. Skip
//! connections hand an earlier, less compressed representation to a later
//! level alongside its usual input.
//!
//! * [`info_theory`]: entropy, mutual information, KL divergence, channel
//!   composition, data-processing checks.
//! * [`ib_solver`]: bottleneck solver, exhaustive oracle, annealed curves.
//! * [`hierarchy`]: layered propagation with exact skip merging.
//! * [`experiments`]: scenario generation and topology comparison.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`). The `*F64` and
//! `*F32` aliases below name the concrete instantiations.

pub mod error;
pub mod experiments;
pub mod hierarchy;
pub mod ib_solver;
pub mod info_theory;
mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use experiments::{
    builtin_scenario, compare_topologies, compare_topologies_with, generate_scenario, info_curve,
    run_batch, run_batch_with, BatchReport, CompareOptions, ComparisonReport, Scenario,
    ScenarioParams,
};
pub use hierarchy::{
    build_hierarchy, layer_beta, merge_skip, propagate, propagate_with_warm_starts,
    relevant_info_profile, EncoderHistory, HierarchySpec, LayerRecord, LayerSpec, LayerState,
    ProfileRow, PropagationReport, SkipEdge,
};
pub use ib_solver::{
    anneal_ib, brute_force_ib, ib_lagrangian, ib_update, solve_ib, IbSolution, InfoCurvePoint,
    SolverConfig,
};
pub use info_theory::{
    compose, conditional_entropy, entropy, joint_entropy, kl_divergence, mutual_information,
    push_through, verify_dpi, Channel, Distribution, DpiReport, JointDistribution, MarkovChainSpec,
};
pub use scalar::Scalar;

pub type DistributionF64 = Distribution<f64>;
pub type JointF64 = JointDistribution<f64>;
pub type ChannelF64 = Channel<f64>;
pub type SolverConfigF64 = SolverConfig<f64>;
pub type IbSolutionF64 = IbSolution<f64>;
pub type HierarchySpecF64 = HierarchySpec<f64>;
pub type PropagationReportF64 = PropagationReport<f64>;
pub type ScenarioF64 = Scenario<f64>;
pub type ComparisonReportF64 = ComparisonReport<f64>;

pub type DistributionF32 = Distribution<f32>;
pub type JointF32 = JointDistribution<f32>;
pub type ChannelF32 = Channel<f32>;
pub type SolverConfigF32 = SolverConfig<f32>;
pub type IbSolutionF32 = IbSolution<f32>;

//! Greedy approximate Carathéodory for finite point sets in `l_p^d`.
//!
//! For a target `a` in the convex hull of `S`, [`greedy_run`] produces
//! points `x_1, x_2, ...` of `S` whose running means approach `a` at the rate
//! `diam(S) / (k rho^{-1}(1/k))`, where `rho` is the modulus of smoothness of
//! the space. The crate also provides the colorful (one set per step)
//! variant, a random-sampling baseline, lower-bound instances with an
//! exhaustive distance oracle, and a convergence experiment harness.
//!
//! The `parallel` feature (on by default) runs the independent loops on rayon;
//! without it every [`Execution`] policy runs sequentially.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod greedy;
pub mod instances;
pub mod lp_geometry;
pub mod maurey;

pub use error::{Error, Result, SeparationCertificate};
pub use exec::Execution;
pub use experiment::{fit_rate, fit_rate_rows, run_convergence, ConvergenceRow, ExperimentConfig, RowField};
pub use greedy::{
    colorful_greedy_run, greedy_run, greedy_step, required_k, theoretical_bound, ConvexTarget, GreedySolver,
    GreedyTrace, PointSet, DEFAULT_CONSTANT,
};
pub use instances::{exact_k_hull_distance, lower_bound_instance, random_instance, LowerBoundInstance};
pub use lp_geometry::{
    eta, inverse_modulus, lp_norm, modulus, norming_functional, supporting_deviation_bound, ModulusProfile,
    SpaceSpec, Vector,
};
pub use maurey::{maurey_sample, summarize, SamplingReport};

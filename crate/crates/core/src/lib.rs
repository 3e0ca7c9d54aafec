//! Warm-started maximum flow with learned flow predictions.
//!
//! The library is organized around a single question: given a prediction of
//! where flow should go, how cheaply can we turn it into an exact maximum
//! flow, and how do we compute a good prediction from past instances?
//!
//! * [`graph`]: flow networks, flow assignments, the error metrics that tie
//!   everything together, and path/cycle decomposition.
//! * [`maxflow`]: residual networks and an instrumented Edmonds-Karp solver
//!   that can start from any feasible flow.
//! * [`warmstart`]: feasibility repair for infeasible predictions (two
//!   interchangeable variants), the warm-started solve pipeline, and a
//!   robustness race against a cold solver.
//! * [`learner`]: the sample-based prediction learner, reduced to exact
//!   integer min-cost flow.
//! * [`sampler`]: capacity distributions, seeded draws, and sample-count
//!   bounds for generalization.
//! * [`formats`]: DIMACS-style text formats for instances, flows, sample
//!   sets, and distributions.
//! * [`synth`]: seeded generators for random test instances.
//!
//! All flow quantities are `i64` and arithmetic is checked: an overflow is a
//! bug in the caller's problem sizing and panics rather than wrapping.
//! Randomized components take a caller-supplied RNG; the test suites and the
//! CLI use `ChaCha8Rng` seeded from a `u64`, with one RNG stream per trial so
//! individual trials can be replayed in isolation.

pub mod formats;
pub mod graph;
#[cfg(test)]
pub(crate) mod testutil;
pub mod learner;
pub mod maxflow;
pub mod sampler;
pub mod synth;
pub mod warmstart;

pub use graph::{FlowAssignment, FlowDecomposition, FlowError, FlowNetwork};
pub use maxflow::{max_flow_from, residual, ResidualNetwork, SolveStats};

/// Exact rational scalar used for objectives, weights, and probabilities.
pub type Rational = num_rational::Ratio<i64>;

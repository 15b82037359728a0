//! Chernoff sampling for active sequential hypothesis testing and active regression.
//!
//! The library revolves around two design optimizations and the sequential
//! policies built on top of them:
//!
//! - **Finite hypothesis sets** (active testing): the verification proportion
//!   for a hypothesis is the arm distribution maximizing the worst-case squared
//!   mean gap against every alternative, solved as a small dense LP
//!   ([`design::solve_verification_lp`]). The [`policies`] module provides the
//!   Chernoff sampling policy (CS) plus Top-2, batch, epsilon-greedy, and
//!   uniform variants, with a delta-PAC stopping rule on sum-of-squared-error
//!   gaps.
//! - **Smooth parameter spaces** (active regression): the continuous limit of
//!   the verification proportion maximizes the minimum eigenvalue of the
//!   weighted gradient outer-product matrix (E-optimality), solved by
//!   Frank-Wolfe over the simplex ([`design::solve_min_eig_design`]). The
//!   [`regression`] module pairs it with damped Gauss-Newton least squares over
//!   linear, logistic, and two-unit ReLU mean models.
//!
//! [`diagnostics`] computes the problem constants (D0, D1, De, DNJ, eta0) that
//! predict sample complexity, [`envs`] builds the benchmark environments and
//! ingests CSV datasets, and [`cli`] + [`report`] form the reproducible
//! Monte-Carlo harness behind the `chernoff` binary.
//!
//! Everything is deterministic given a master seed: per-trial generators are
//! derived by hashing `(master_seed, policy, trial)`, so reports are
//! byte-identical across reruns and worker counts.

pub mod cli;
pub mod design;
pub mod diagnostics;
pub mod env;
pub mod envs;
pub mod history;
pub mod policies;
pub mod regression;
pub mod report;
pub mod rng;

mod error;

pub use error::{Error, Result};

pub use design::{Design, DesignSolution, EigInstance, LpInstance, SolveStatus};
pub use env::{draw_reward, MeansTable, NoiseSpec, TestEnv};
pub use history::{TrialHistory, TrialReport};
pub use policies::{run_trial, PolicyConfig, PolicyKind, StoppingRule};
pub use regression::{ParamModel, RegressionMetrics, RegressionPolicy};

//! Regional complexity analysis for smooth nonconvex optimization.
//!
//! The crate provides a corpus of test objectives, exact dense solvers for
//! the trust-region and cubic-regularization subproblems, six first- and
//! second-order methods, a classifier for the derivative-defined regions of
//! the domain, rate and complexity templates, and a harness that checks
//! observed trajectories against those templates.

pub mod algorithms;
pub mod bounds;
pub mod corpus;
pub mod error;
pub mod harness;
pub mod objective;
pub mod regions;
pub mod subproblems;

pub use algorithms::{run, Algo, AlgoConfig, IterateRecord, NuResetRule, Termination, TerminationReason, Trajectory};
pub use bounds::{AlgoClass, RateBound, RateContext, Regime};
pub use corpus::{ClassTag, CorpusEntry};
pub use error::{Error, Result};
pub use harness::{VerificationReport, VerifyOptions};
pub use objective::{Evaluation, KnownConstants, Objective, ScanDomain, SmoothFunction};
pub use regions::{Region, RegionLabel, RegionParams};

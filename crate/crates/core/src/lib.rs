//! Analysis of finite ergodic time-reversible Markov chains.
//!
//! Transition matrices are column-stochastic: `P[i][j]` is the probability of
//! moving to state `i` from state `j`, and the stationary distribution solves
//! `P pi = pi`. The crate computes `pi`, the real spectrum, exact and
//! sweep-cut conductance, and certificates checking, for every eigenvalue
//! `lambda` in `(0, 1)`, both `lambda <= 1 - phi^2 / 2` and the stronger
//! `phi^2 + lambda^2 <= 1`.
//!
//! All numerical code is generic over [`Scalar`] (`f64` or `f32`); the
//! `*F64` / `*F32` aliases below name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod chain;
pub mod conductance;
pub mod error;
pub mod generators;
pub mod io;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod scalar;
pub mod spectral;

pub use bounds::{
    certify, check_claim1, check_claim2, claim1_diagnostic, compare_bounds, make_proper_from_eigvec,
    telescoping_quantity, BoundCertificate, BoundComparison, Claim1Diagnostic, Claim2Check, EigenCertificate,
    ProperVector, SLACK_FLOOR,
};
pub use chain::{
    check_detailed_balance, check_ergodicity, pi_norm, stationary_distribution, weighted_inner_product,
    ErgodicityReport, ReversibleChain, StationaryDistribution, Tolerances, TransitionMatrix,
};
pub use conductance::{
    edge_flow, exact_conductance, singleton_conductance, sweep_conductance, sweep_with_fallback, ConductanceMethod,
    ConductanceResult, StateSubset, DEFAULT_MAX_EXACT_N,
};
pub use error::{Error, Result, SandwichSide};
pub use generators::{build, lazify, ChainSpec, Family, WeightedEdge};
pub use scalar::Scalar;
pub use spectral::{eigendecompose, spectrum, symmetrize, SpectrumReport, SymmetrizedOperator};

pub type TransitionMatrixF64 = TransitionMatrix<f64>;
pub type TransitionMatrixF32 = TransitionMatrix<f32>;
pub type ReversibleChainF64 = ReversibleChain<f64>;
pub type ReversibleChainF32 = ReversibleChain<f32>;
pub type SpectrumReportF64 = SpectrumReport<f64>;
pub type SpectrumReportF32 = SpectrumReport<f32>;
pub type ConductanceResultF64 = ConductanceResult<f64>;
pub type ConductanceResultF32 = ConductanceResult<f32>;
pub type BoundCertificateF64 = BoundCertificate<f64>;
pub type BoundCertificateF32 = BoundCertificate<f32>;

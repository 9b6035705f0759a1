//! # krobust
//!
//! Robustness of k-coherence and Schmidt-rank-k entanglement for pure states.
//!
//! For a pure state the standard and generalized robustness of k-coherence
//! coincide and admit a closed-form branch formula. This crate evaluates that
//! formula and, unlike a bare number, backs every value with a machine-checkable
//! optimality certificate:
//!
//! - a **dual witness** (a rank-one or scaled all-ones matrix, feasible for the
//!   dual semidefinite program) whose objective lower-bounds the value, and
//! - a **primal decomposition** (an explicit mixture of vectors with at most k
//!   non-zero entries, found by a feasibility linear program where needed)
//!   whose slack trace upper-bounds it.
//!
//! When both sides agree with the closed form, the value is certified: the
//! "duality sandwich". The same value and certificates transport to
//! Schmidt-rank-k entanglement of bipartite pure states through the Schmidt
//! coefficients.
//!
//! ## Quick start
//!
//! ```
//! use krobust::{canonicalize, robustness_value, certify, DEFAULT_NORM_TOLERANCE};
//! use num_complex::Complex64;
//!
//! let raw: Vec<Complex64> = [0.5, 0.5, 0.5, 0.5]
//!     .iter()
//!     .map(|&x| Complex64::new(x, 0.0))
//!     .collect();
//! let state = canonicalize(&raw, DEFAULT_NORM_TOLERANCE)?;
//!
//! // Closed-form value: the uniform 4-dim state at k = 2 gives 4/2 - 1 = 1.
//! let rv = robustness_value(&state, 2)?;
//! assert!((rv.value - 1.0).abs() < 1e-12);
//!
//! // Full certificate: dual witness + primal decomposition, all gaps checked.
//! let cert = certify(&state, 2, 1e-8)?;
//! assert!(cert.certified);
//! # Ok::<(), krobust::Error>(())
//! ```
//!
//! ## Modules
//!
//! - [`state`]: canonical form of a pure state (moduli sorted non-increasing).
//! - [`branch`]: tail sums and the branch index that drives the formula.
//! - [`closed_form`]: the robustness value and the k-support norm pair.
//! - [`dual`]: dual witness construction and feasibility verification.
//! - [`primal`]: primal decompositions (explicit and LP-based) and [`certify`].
//! - [`lp`]: self-contained phase-1 simplex feasibility solver.
//! - [`entangle`]: Schmidt decomposition and the entanglement-side transport.
//! - [`exact`]: exact rational certificates for small rational states.
//! - [`document`]: the versioned JSON certificate schema and re-verification.
//! - [`cli`]: the command-line front end (also driven by the `krobust` binary).
//! - [`selftest`]: the randomized property suite behind `krobust selftest`.
//!
//! Runnable demonstrations of each capability live in `examples/`.

pub mod branch;
pub mod cli;
pub mod closed_form;
pub mod document;
pub mod dual;
pub mod entangle;
pub mod exact;
pub mod lp;
pub mod primal;
pub mod selftest;
pub mod state;
mod util;

pub use branch::{boundary_margin, select_branch, BranchData};
pub use closed_form::{k_support_dual_norm, k_support_norm, robustness_value, RobustnessValue};
pub use document::CertificateDocument;
pub use dual::{build_dual_witness, verify_dual_witness, DualVerification, DualWitness, WitnessKind};
pub use entangle::{
    entanglement_robustness, lift_certificates, schmidt_decompose, schmidt_tail_norm,
    EntanglementCertificate, SchmidtData,
};
pub use exact::{exact_certify, parse_rational, ExactAtoms, ExactCertificate};
pub use primal::{
    build_primal_ell_eq_1, build_primal_ell_eq_k, build_primal_middle, certify,
    decompose_into_i2, Certificate, CertificateGaps, I2Decomposition, LpConfig,
    PrimalDecomposition,
};
pub use state::{canonicalize, CanonicalState};

use thiserror::Error;

/// Default tolerance for the unit-norm check on input vectors.
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-9;

/// Default tolerance for certificate verification (feasibility margins and gaps).
pub const DEFAULT_VERIFY_TOLERANCE: f64 = 1e-8;

/// Default tolerance below which Schmidt coefficients are treated as zero.
pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-12;

/// Branch-boundary margin under which a certificate is flagged `near_boundary`.
pub const BOUNDARY_FLAG_TOLERANCE: f64 = 1e-9;

/// Largest dimension for which non-rank-one dual witnesses are verified by
/// explicit enumeration of all C(n,k) principal submatrices.
pub const MAX_ENUMERATION_DIM: usize = 20;

/// Largest dimension accepted by the exact rational mode.
pub const MAX_EXACT_DIM: usize = 8;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input vector is empty")]
    EmptyInput,

    #[error("input norm {norm} deviates from 1 by more than the tolerance {tolerance}")]
    NonUnitNorm { norm: f64, tolerance: f64 },

    #[error("k = {k} is out of range for dimension {n}: expected {min} <= k <= {max}")]
    KOutOfRange {
        k: usize,
        n: usize,
        min: usize,
        max: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("branch data was built for ell = {expected}, but this construction requires {required}")]
    BranchMismatch {
        expected: usize,
        required: &'static str,
    },

    #[error("matrix entry ({row},{row}) = {value} is negative (diagonal must be non-negative)")]
    NegativeDiagonal { row: usize, value: f64 },

    #[error("matrix entry ({row},{col}) = {value} is positive (off-diagonal must be non-positive)")]
    PositiveOffDiagonal { row: usize, col: usize, value: f64 },

    #[error("row {row} of the matrix has negative sum {value} (row sums must be non-negative)")]
    NegativeRowSum { row: usize, value: f64 },

    #[error("matrix is not symmetric at ({row},{col}): {delta}")]
    NotSymmetric { row: usize, col: usize, delta: f64 },

    #[error(
        "primal feasibility LP reported infeasible (phase-1 residual {residual:.3e}); \
         the closed-form proof guarantees feasibility, so this signals an implementation \
         or conditioning bug"
    )]
    PrimalLpInfeasible { residual: f64 },

    #[error("problem needs {count} LP atoms, above the cap of {cap} (C(n,k) grows combinatorially)")]
    TooManyAtoms { count: usize, cap: usize },

    #[error("submatrix enumeration is capped at n <= {max}, got n = {n}")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("exact rational mode is limited to n <= {max}, got n = {n}")]
    ExactDimTooLarge { n: usize, max: usize },

    #[error("exact certificate identity violated: {identity}")]
    ExactIdentity { identity: &'static str },

    #[error("certification gaps exceed the tolerance {tolerance:.3e}: {summary}")]
    CertificationFailed {
        tolerance: f64,
        summary: String,
        certificate: Box<Certificate>,
    },

    #[error(transparent)]
    Lp(#[from] lp::LpError),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

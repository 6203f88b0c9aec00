//! Exact proximity operator of the ratio `h(x) = ‖x‖₁/‖x‖₂`.
//!
//! `prox_{μh}(y)` minimizes `½‖x − y‖² + μ·h(x)` with `h(0) = a ∈ [0, 1]`.
//! Writing `x = r·u` with `‖u‖₂ = 1` and sorting `|y|` turns the problem into
//! a search over at most `n` candidate directions, one per support size `k`,
//! each pinned down by a root of a quartic. The operator can be set-valued;
//! every minimizer is returned.
//!
//! ```
//! use ratio_prox::{prox, ProxProblem};
//!
//! let problem = ProxProblem::new(vec![9.0, 7.0, 6.0, 4.0, 2.0], 48.0, 1.0).unwrap();
//! let result = prox(&problem).unwrap();
//! assert_eq!(result.members[0].k, 4);
//! assert!((result.q() - 90.740).abs() < 1e-3);
//! assert_eq!(result.point()[4], 0.0);
//! ```

pub mod canonical;
pub mod error;
pub mod oracle;
pub mod problem;
pub mod prox;
pub mod quartic;

pub use canonical::{canonicalize, CanonicalForm};
pub use error::{Error, ProblemError, QuarticError, Result};
pub use oracle::{oracle_prox, oracle_sphere_min, OracleConfig, OraclePoint, SphereMinimum};
pub use problem::{q_value, ratio, ProxProblem};
pub use prox::{
    candidate_for_k, enumerate, existence_statistic, existence_test, f_value_fast, prox, prox_canonical, prox_with_mode,
    select, tie_tol, Candidate, Enumeration, KFailure, Mode, PrefixSums, ProxMember, ProxResult, SweepDiagnostics, SweepRecord,
};
pub use quartic::{coeffs_from_sums, roots_in_interval, IntervalRoots, LagrangeRoot, QuarticCoeffs, SphereQuartic};

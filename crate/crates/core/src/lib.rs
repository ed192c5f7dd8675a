//! Maximal quadratic-free sets for a single quadratic inequality and the
//! intersection cuts they generate.
//!
//! A constraint `sᵀQs + bᵀs + c ≤ 0` is lifted to a homogeneous quadratic,
//! diagonalized, and brought to the form `{‖x‖ ≤ ‖y‖, aᵀx + dᵀy + hᵀz = −1}`
//! ([`spectral`]). Depending on the resulting case a maximal free set is
//! chosen ([`freesets`]) from the closed forms in [`corefns`], and a cut is
//! read off a simplicial cone ([`cuts`]). [`oracle`] holds independent
//! checks of all of the above.
//!
//! ```
//! use quadfree::{separate, DMatrix, QuadraticConstraint, SimplicialCone, DEFAULT_ZERO_TOL};
//!
//! let r2 = std::f64::consts::SQRT_2;
//! let q = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
//! let qc = QuadraticConstraint::new(q, vec![2.0 * r2, -2.0 * r2], -2.0, vec![-2.0, -2.0])?;
//! let cone = SimplicialCone::new(qc.point.clone(), DMatrix::identity(2, 2))?;
//! let cut = separate(&qc, &cone, DEFAULT_ZERO_TOL)?;
//! assert!((cut.slack(&qc.point) - 1.0).abs() < 1e-12);
//! # Ok::<(), quadfree::Error>(())
//! ```

pub mod corefns;
pub mod cutloop;
pub mod cuts;
pub mod error;
pub mod freesets;
pub mod lp;
pub mod oracle;
pub mod spectral;
mod vecops;

pub use corefns::{CaseData, GMembership};
pub use cuts::{intersection_cut, separate, CutCertificate, SimplicialCone};
pub use error::{Error, Result};
pub use freesets::{boundary_step, build_free_set, FreeSet, StepLength};
pub use lp::{LinearRow, LpProblem, LpSolution, Sense};
pub use oracle::VerificationReport;
pub use spectral::{
    canonicalize, jacobi_eigen, lift, pullback_linear, CanonicalForm, CaseTag, EigenDecomposition,
    QuadraticConstraint, ScaleRecord, DEFAULT_ZERO_TOL,
};

pub use nalgebra::DMatrix;

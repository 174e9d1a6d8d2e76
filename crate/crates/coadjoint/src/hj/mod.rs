//! One-form sections and Hamilton-Jacobi residual verification.
//!
//! A candidate solution is a section: on a group, a map `g -> gamma(g)` into
//! the dual (left trivialization); on R^n, a map `q -> p`. The module
//! evaluates
//!
//! * the closed-form residual fields of the reduced equations (rigid body,
//!   heavy top) and the gradient of the pulled-back Hamiltonian (canonical),
//! * the relatedness residual between the base vector field `X_H^gamma` and
//!   the reduced Hamiltonian vector field through the section,
//! * closedness defects on left-invariant frames (curl defects on R^n),
//! * momentum-level and stabilizer-invariance defects,
//!
//! and aggregates them into a [`ResidualReport`] whose verdict records
//! whether the residual equations and the relatedness condition agree on
//! every sample.

mod residuals;
mod sections;
mod verify;

pub use residuals::{
    hj_residual_canonical, hj_residual_rigid, hj_residual_top, hj_residual_top_parts,
    rigid_numerators, top_numerators,
};
pub use sections::{BodySection, CanonicalSection};
pub use verify::{
    closedness_defect, momentum_level_check, relatedness_residual, relatedness_residual_canonical,
    verify_equivalence, verify_equivalence_canonical, MomentumCheck, PiMode, ResidualReport,
    SampleReport, DEFAULT_CANONICAL_STEP, DEFAULT_GROUP_STEP,
};

use crate::lie::DualVector;

/// The unique left-trivialized section whose spatial momentum is `mu`
/// everywhere; see [`BodySection::from_momentum`].
pub fn section_from_momentum(mu: &DualVector) -> BodySection {
    BodySection::from_momentum(mu)
}

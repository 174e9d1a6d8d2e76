//! The Lie groups SO(3) and SE(3), their algebras and duals.
//!
//! Conventions (see `docs/conventions.md` for the full sheet):
//!
//! * so(3) is identified with R^3 through the hat map, and its bracket with
//!   the cross product. se(3) = so(3) (x) R^3 carries the semidirect-product
//!   bracket `[(w1,u1),(w2,u2)] = (w1 x w2, w1 x u2 - w2 x u1)`.
//! * Duals are identified with the same carriers through the Euclidean dot
//!   product; `pairing` is that dot product.
//! * All starred (coadjoint) maps are computed from their defining pairing
//!   identities against the algebra basis, so their signs cannot drift from
//!   the unstarred maps they are dual to.

mod actions;
mod group;
mod vectors;

pub use actions::{ad, adjoint_action, coad, coadjoint_action};
pub use group::{exp_group, hat, log_group, polar_project, vee, Group, GroupElement};
pub use vectors::{pairing, Algebra, AlgebraVector, DualVector};

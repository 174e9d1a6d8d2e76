//! Lie-Poisson mechanics on so*(3) and se*(3).
//!
//! The crate provides four layers:
//!
//! * [`lie`] — the groups SO(3)/SE(3), their algebras and duals, hat/vee,
//!   exp/log, and the (co)adjoint actions, all over fixed-size carriers.
//! * [`poisson`] — Lie-Poisson brackets, the closed rigid-body and heavy-top
//!   brackets, Hamiltonian vector fields on duals, and the orbit symplectic
//!   form.
//! * [`systems`] and [`dynamics`] — the free rigid body, the heavy top, and
//!   canonical systems on T*R^n, with RK4, implicit-midpoint, and
//!   orbit-preserving coadjoint-splitting integrators plus conservation
//!   diagnostics.
//! * [`hj`] — one-form sections on the group (and on R^n), Hamilton-Jacobi
//!   residuals, relatedness residuals, closedness defects, momentum-level
//!   checks, and the equivalence verifier.
//!
//! The `coadjoint` binary exposes all of it as a CLI; see the README.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hj;
pub mod lie;
pub mod poisson;
pub mod sampling;
pub mod systems;

pub use error::{Error, Result};

//! C ABI over the coadjoint library: opaque system handles, status codes,
//! integration with drift summaries, residual evaluation, and the theorem
//! verifier. The companion header `include/coadjoint.h` is generated by
//! cbindgen at build time.
//!
//! Conventions: every fallible call returns a [`CjStatus`]; on failure a
//! thread-local message is readable through [`cj_last_error`] until the next
//! call on the same thread. Array arguments are `double` buffers whose
//! lengths are given explicitly (3 on so*(3), 6 on se*(3)).

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::Vector3;

use coadjoint::dynamics::{diagnostics, integrate, IntegratorChoice, Method, State};
use coadjoint::error::Error;
use coadjoint::hj::{verify_equivalence, BodySection, PiMode, DEFAULT_GROUP_STEP};
use coadjoint::lie::DualVector;
use coadjoint::systems::{
    heavy_top_system, rigid_body_system, HeavyTopParams, LpSystem, ModelKind, RigidBodyParams,
    SystemSpec,
};

/// ABI revision of this header.
pub const CJ_ABI_VERSION: u32 = 1;

/// Status code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfDomain = 3,
    NumericalFailure = 4,
}

/// Integration scheme selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CjIntegrator {
    ExplicitRk4 = 0,
    ImplicitMidpoint = 1,
    CoadjointSplitting = 2,
}

/// Candidate section families understood by [`cj_verify_theorem`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CjSectionKind {
    /// The coadjoint transport of `mu` (constant spatial momentum).
    ConstantMomentum = 0,
    /// The constant-in-body section with value `mu`.
    BodyConstant = 1,
    /// The inertia-scaled family over the transport of `mu` (rigid body only).
    ScaledInertiaFamily = 2,
    /// A seeded perturbation of the natural base family.
    Perturbed = 3,
}

/// Aggregate result of a verification run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CjVerifySummary {
    pub hj_max: f64,
    pub relatedness_max: f64,
    pub closedness_max: f64,
    pub momentum_defect: f64,
    pub invariance_defect: f64,
    pub consistent: bool,
}

/// Opaque handle of a Lie-Poisson system.
pub struct CjSystem {
    system: LpSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::default());
}

fn status_of(e: &Error) -> CjStatus {
    match e {
        Error::AlgebraMismatch { .. } | Error::InvalidParameter(_) => CjStatus::InvalidArgument,
        Error::NotSkewSymmetric { .. }
        | Error::NotARotation { .. }
        | Error::LogOutOfDomain { .. } => CjStatus::OutOfDomain,
        Error::NonFinite(_) | Error::NewtonNonConvergence { .. } | Error::FiniteDifference(_) => {
            CjStatus::NumericalFailure
        }
    }
}

fn fail(e: &Error) -> CjStatus {
    set_error(&e.to_string());
    status_of(e)
}

fn guard<F: FnOnce() -> CjStatus>(f: F) -> CjStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            CjStatus::NumericalFailure
        }
    }
}

/// # Safety
/// `ptr` must be null or point to `len` readable doubles.
unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn vector3_arg(ptr: *const f64) -> Option<Vector3<f64>> {
    slice_arg(ptr, 3).map(|s| Vector3::new(s[0], s[1], s[2]))
}

fn null_pointer() -> CjStatus {
    set_error("null pointer argument");
    CjStatus::NullPointer
}

fn dual_from(system: &LpSystem, state: &[f64]) -> Result<DualVector, Error> {
    if state.len() != system.algebra.dim() {
        return Err(Error::InvalidParameter(format!(
            "state length {} does not match the {} dual (expected {})",
            state.len(),
            system.algebra.name(),
            system.algebra.dim()
        )));
    }
    Ok(DualVector::from_slice(system.algebra, state))
}

/// ABI revision of the library.
#[no_mangle]
pub extern "C" fn cj_abi_version() -> u32 {
    CJ_ABI_VERSION
}

/// Message of the last failure on this thread; empty when the last call
/// succeeded. The pointer stays valid until the next library call on the
/// same thread.
#[no_mangle]
pub extern "C" fn cj_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates a free rigid body from its three principal moments of inertia.
///
/// # Safety
/// `inertia` must point to 3 doubles and `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn cj_rigid_body_new(
    inertia: *const f64,
    out: *mut *mut CjSystem,
) -> CjStatus {
    guard(|| {
        let (Some(inertia), false) = (vector3_arg(inertia), out.is_null()) else {
            return null_pointer();
        };
        match RigidBodyParams::new(inertia) {
            Ok(params) => {
                let handle = Box::new(CjSystem {
                    system: rigid_body_system(&params),
                });
                *out = Box::into_raw(handle);
                CjStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Creates a heavy top from inertia, mass, gravity, segment length, and the
/// unit body axis `chi`.
///
/// # Safety
/// `inertia` and `chi` must point to 3 doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cj_heavy_top_new(
    inertia: *const f64,
    mass: f64,
    gravity: f64,
    length: f64,
    chi: *const f64,
    out: *mut *mut CjSystem,
) -> CjStatus {
    guard(|| {
        let (Some(inertia), Some(chi), false) =
            (vector3_arg(inertia), vector3_arg(chi), out.is_null())
        else {
            return null_pointer();
        };
        match HeavyTopParams::new(inertia, mass, gravity, length, chi) {
            Ok(params) => {
                let handle = Box::new(CjSystem {
                    system: heavy_top_system(&params),
                });
                *out = Box::into_raw(handle);
                CjStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a system handle. A null handle is ignored.
///
/// # Safety
/// `sys` must be null or a pointer previously returned by a constructor and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cj_system_free(sys: *mut CjSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of doubles in the system's state vector (3 on so*(3), 6 on se*(3));
/// 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cj_system_state_len(sys: *const CjSystem) -> usize {
    if sys.is_null() {
        0
    } else {
        (*sys).system.algebra.dim()
    }
}

/// Evaluates the Hamiltonian at a state.
///
/// # Safety
/// `sys` must be a live handle, `state` must point to `len` doubles, and
/// `energy_out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn cj_system_energy(
    sys: *const CjSystem,
    state: *const f64,
    len: usize,
    energy_out: *mut f64,
) -> CjStatus {
    guard(|| {
        if sys.is_null() || energy_out.is_null() {
            return null_pointer();
        }
        let Some(state) = slice_arg(state, len) else {
            return null_pointer();
        };
        let system = &(*sys).system;
        match dual_from(system, state).and_then(|nu| system.energy(&nu)) {
            Ok(v) => {
                *energy_out = v;
                CjStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Evaluates the Hamiltonian vector field at a state; writes `len` doubles.
///
/// # Safety
/// `sys` must be a live handle; `state` and `field_out` must point to `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn cj_system_vector_field(
    sys: *const CjSystem,
    state: *const f64,
    len: usize,
    field_out: *mut f64,
) -> CjStatus {
    guard(|| {
        if sys.is_null() || field_out.is_null() {
            return null_pointer();
        }
        let Some(state) = slice_arg(state, len) else {
            return null_pointer();
        };
        let system = &(*sys).system;
        match dual_from(system, state).and_then(|nu| system.vector_field(&nu)) {
            Ok(v) => {
                std::ptr::copy_nonoverlapping(v.components().as_ptr(), field_out, len);
                CjStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Integrates `steps` steps of size `dt` from `state0` and reports the final
/// state plus maximal drifts of the energy, the Casimirs, and — when
/// `with_group` is set — the spatial momentum components.
///
/// # Safety
/// `sys` must be a live handle; `state0` and `state_out` must point to `len`
/// doubles; the drift outputs must be valid locations.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cj_system_integrate(
    sys: *const CjSystem,
    state0: *const f64,
    len: usize,
    method: CjIntegrator,
    dt: f64,
    steps: u64,
    with_group: bool,
    state_out: *mut f64,
    max_energy_drift: *mut f64,
    max_casimir_drift: *mut f64,
    max_momentum_drift: *mut f64,
) -> CjStatus {
    guard(|| {
        if sys.is_null()
            || state_out.is_null()
            || max_energy_drift.is_null()
            || max_casimir_drift.is_null()
            || max_momentum_drift.is_null()
        {
            return null_pointer();
        }
        let Some(state0) = slice_arg(state0, len) else {
            return null_pointer();
        };
        let system = &(*sys).system;
        let run = || -> Result<(), Error> {
            let nu0 = dual_from(system, state0)?;
            let method = match method {
                CjIntegrator::ExplicitRk4 => Method::ExplicitRk4,
                CjIntegrator::ImplicitMidpoint => Method::ImplicitMidpoint,
                CjIntegrator::CoadjointSplitting => Method::CoadjointSplitting,
            };
            let choice = IntegratorChoice::new(method, dt)?;
            let spec = SystemSpec::LiePoisson(system.clone());
            let traj = integrate(
                &spec,
                &State::LiePoisson(nu0),
                &choice,
                steps as usize,
                with_group,
            )?;
            let report = diagnostics(&traj, &spec)?;
            let State::LiePoisson(last) = traj.states[traj.states.len() - 1] else {
                unreachable!("lie-poisson input yields lie-poisson states")
            };
            std::ptr::copy_nonoverlapping(last.components().as_ptr(), state_out, len);
            *max_energy_drift = report.energy.max_drift;
            *max_casimir_drift = report
                .casimirs
                .iter()
                .map(|c| c.stats.max_drift)
                .fold(0.0, f64::max);
            *max_momentum_drift = report
                .momentum
                .map(|m| m.iter().map(|c| c.max_drift).fold(0.0, f64::max))
                .unwrap_or(0.0);
            Ok(())
        };
        match run() {
            Ok(()) => CjStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// The rigid-body residual field `pi x (gamma/I)`; writes 3 doubles.
///
/// # Safety
/// All pointers must reference 3 readable (resp. writable) doubles.
#[no_mangle]
pub unsafe extern "C" fn cj_hj_residual_rigid(
    pi: *const f64,
    gamma: *const f64,
    inertia: *const f64,
    out: *mut f64,
) -> CjStatus {
    guard(|| {
        let (Some(pi), Some(gamma), Some(inertia), false) = (
            vector3_arg(pi),
            vector3_arg(gamma),
            vector3_arg(inertia),
            out.is_null(),
        ) else {
            return null_pointer();
        };
        match coadjoint::hj::hj_residual_rigid(pi, gamma, inertia) {
            Ok(r) => {
                std::ptr::copy_nonoverlapping(r.as_slice().as_ptr(), out, 3);
                CjStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// The heavy-top residual fields; writes 3 doubles to each output slot.
///
/// # Safety
/// All pointers must reference 3 readable (resp. writable) doubles.
#[no_mangle]
pub unsafe extern "C" fn cj_hj_residual_top(
    pi: *const f64,
    gamma_adv: *const f64,
    gamma: *const f64,
    inertia: *const f64,
    mgh: f64,
    chi: *const f64,
    out_pi: *mut f64,
    out_gamma: *mut f64,
) -> CjStatus {
    guard(|| {
        let (Some(pi), Some(gamma_adv), Some(gamma), Some(inertia), Some(chi)) = (
            vector3_arg(pi),
            vector3_arg(gamma_adv),
            vector3_arg(gamma),
            vector3_arg(inertia),
            vector3_arg(chi),
        ) else {
            return null_pointer();
        };
        if out_pi.is_null() || out_gamma.is_null() {
            return null_pointer();
        }
        match coadjoint::hj::hj_residual_top_parts(pi, gamma_adv, gamma, inertia, mgh, chi) {
            Ok((slot_pi, slot_gamma)) => {
                std::ptr::copy_nonoverlapping(slot_pi.as_slice().as_ptr(), out_pi, 3);
                std::ptr::copy_nonoverlapping(slot_gamma.as_slice().as_ptr(), out_gamma, 3);
                CjStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Runs the equivalence verifier on a named section family over `samples`
/// seeded group points at tolerance `tol`, with the residual equations
/// evaluated at the section's own values.
///
/// # Safety
/// `sys` must be a live handle, `mu` must point to `mu_len` doubles, and
/// `out` must be a valid location.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cj_verify_theorem(
    sys: *const CjSystem,
    section: CjSectionKind,
    mu: *const f64,
    mu_len: usize,
    k: f64,
    amplitude: f64,
    perturb_seed: u64,
    samples: u64,
    tol: f64,
    seed: u64,
    out: *mut CjVerifySummary,
) -> CjStatus {
    guard(|| {
        if sys.is_null() || out.is_null() {
            return null_pointer();
        }
        let Some(mu) = slice_arg(mu, mu_len) else {
            return null_pointer();
        };
        let system = &(*sys).system;
        let run = || -> Result<CjVerifySummary, Error> {
            let mu = dual_from(system, mu)?;
            let base = match &system.model {
                ModelKind::RigidBody(params) => BodySection::scaled_inertia(params.inertia, k, &mu),
                _ => Ok(BodySection::from_momentum(&mu)),
            };
            let section = match section {
                CjSectionKind::ConstantMomentum => BodySection::from_momentum(&mu),
                CjSectionKind::BodyConstant => BodySection::constant(&mu),
                CjSectionKind::ScaledInertiaFamily => base?,
                CjSectionKind::Perturbed => BodySection::perturbed(&base?, amplitude, perturb_seed),
            };
            let report = verify_equivalence(
                system,
                &section,
                &mu,
                samples as usize,
                tol,
                seed,
                PiMode::SectionValue,
                DEFAULT_GROUP_STEP,
            )?;
            Ok(CjVerifySummary {
                hj_max: report.hj_max,
                relatedness_max: report.relatedness_max,
                closedness_max: report.closedness_max,
                momentum_defect: report.momentum_defect.unwrap_or(0.0),
                invariance_defect: report.invariance_defect.unwrap_or(0.0),
                consistent: report.is_consistent(),
            })
        };
        match run() {
            Ok(summary) => {
                *out = summary;
                CjStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

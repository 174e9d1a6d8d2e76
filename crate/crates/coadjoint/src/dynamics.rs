//! Time integration of Lie-Poisson and canonical systems, with conservation
//! diagnostics.
//!
//! Three steppers are provided. `ExplicitRk4` is the classic fourth-order
//! scheme. `ImplicitMidpoint` solves the midpoint equation with Newton
//! iteration and conserves quadratic invariants to the solve tolerance.
//! `CoadjointSplitting` updates the state by the coadjoint action of
//! `exp(-dt * dh/dnu)` at a midpoint estimate, so the state stays exactly on
//! the coadjoint orbit (Casimirs are preserved to rounding); when the group
//! element is co-evolved with the matching exponential, the spatial momentum
//! is conserved identically.

use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{
    coadjoint_action, exp_group, hat, Algebra, AlgebraVector, DualVector, GroupElement,
};
use crate::systems::{momentum_map, CanonicalSystem, LpSystem, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExplicitRk4,
    ImplicitMidpoint,
    CoadjointSplitting,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ExplicitRk4 => "explicit-rk4",
            Method::ImplicitMidpoint => "implicit-midpoint",
            Method::CoadjointSplitting => "coadjoint-splitting",
        }
    }
}

/// Integrator configuration. `newton_tol` and `newton_max_iter` only apply to
/// the implicit midpoint method.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorChoice {
    pub method: Method,
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl IntegratorChoice {
    pub fn new(method: Method, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        Ok(IntegratorChoice {
            method,
            dt,
            newton_tol: 1e-12,
            newton_max_iter: 50,
        })
    }
}

/// A point of phase space: a dual vector for Lie-Poisson systems, a `(q, p)`
/// pair for canonical ones.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    LiePoisson(DualVector),
    Canonical { q: Vec<f64>, p: Vec<f64> },
}

/// A time series of states with per-step conserved-quantity values.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub energy: Vec<f64>,
    pub casimir_names: Vec<String>,
    /// One series per Casimir, indexed `[casimir][step]`.
    pub casimirs: Vec<Vec<f64>>,
    /// Spatial momentum components per step, when a group element is co-evolved.
    pub momentum: Option<Vec<Vec<f64>>>,
}

// ---------------------------------------------------------------------------
// Newton solver for the implicit midpoint equations.

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solves `residual(x) = 0` by Newton iteration with a central-difference
/// Jacobian. Iterates down to rounding level when possible; finishing above
/// `tol` is an error.
fn newton_solve<F>(residual: F, x0: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let target = 1e-15 * 1.0f64.max(inf_norm(x0));
    let mut r_prev = f64::INFINITY;

    for iteration in 0..=max_iter {
        let g = residual(&x)?;
        let r = inf_norm(&g);
        if !r.is_finite() {
            return Err(Error::NewtonNonConvergence {
                residual: r,
                iterations: iteration,
            });
        }
        if r <= target {
            return Ok(x);
        }
        if r >= r_prev || iteration == max_iter {
            // stalled at rounding level, or out of budget
            if r <= tol {
                return Ok(x);
            }
            return Err(Error::NewtonNonConvergence {
                residual: r,
                iterations: iteration,
            });
        }
        r_prev = r;

        let h = 1e-7 * 1.0f64.max(inf_norm(&x));
        let mut jac = DMatrix::zeros(n, n);
        let mut probe = x.clone();
        for j in 0..n {
            probe[j] = x[j] + h;
            let plus = residual(&probe)?;
            probe[j] = x[j] - h;
            let minus = residual(&probe)?;
            probe[j] = x[j];
            for i in 0..n {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_column_slice(&g);
        let delta = jac.lu().solve(&rhs).ok_or(Error::NewtonNonConvergence {
            residual: r,
            iterations: iteration,
        })?;
        for i in 0..n {
            x[i] -= delta[i];
        }
    }
    unreachable!("newton loop returns from within");
}

// ---------------------------------------------------------------------------
// Lie-Poisson steppers. The co-evolved group element is kept as raw rotation
// and translation blocks; orthonormality is enforced only when a GroupElement
// is materialized for momentum recording.

#[derive(Clone, Copy)]
struct RawPose {
    rot: Matrix3<f64>,
    trans: Vector3<f64>,
}

impl RawPose {
    fn identity() -> Self {
        RawPose {
            rot: Matrix3::identity(),
            trans: Vector3::zeros(),
        }
    }

    fn to_group(self, algebra: Algebra) -> Result<GroupElement> {
        match algebra {
            Algebra::So3 => GroupElement::rotation(self.rot),
            Algebra::Se3 => GroupElement::rigid_motion(self.rot, self.trans),
        }
    }

    /// Right-multiplication by `exp(xi)`, staying in raw matrix form.
    fn advance(self, xi: &AlgebraVector) -> Self {
        let step = exp_group(xi);
        RawPose {
            rot: self.rot * step.rot(),
            trans: self.rot * step.trans() + self.trans,
        }
    }
}

fn rk4_lp(
    sys: &LpSystem,
    nu: &DualVector,
    pose: Option<RawPose>,
    dt: f64,
) -> Result<(DualVector, Option<RawPose>)> {
    // Joint RK4 on (nu, pose): nu_dot = X_h(nu), R_dot = R hat(omega),
    // v_dot = R u, with (omega, u) the gradient slots of the Hamiltonian.
    let stage = |nu: &DualVector| -> Result<(DualVector, AlgebraVector)> {
        Ok((sys.vector_field(nu)?, sys.hamiltonian.gradient(nu)?))
    };

    let (k1, xi1) = stage(nu)?;
    let (k2, xi2) = stage(&(*nu + k1 * (dt / 2.0)))?;
    let (k3, xi3) = stage(&(*nu + k2 * (dt / 2.0)))?;
    let (k4, xi4) = stage(&(*nu + k3 * dt))?;
    let nu_next = *nu + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);

    let pose_next = pose.map(|p0| {
        let r0 = p0.rot;
        let dr1 = r0 * hat(xi1.omega());
        let dv1 = r0 * xi1.linear();
        let r2 = r0 + dr1 * (dt / 2.0);
        let dr2 = r2 * hat(xi2.omega());
        let dv2 = r2 * xi2.linear();
        let r3 = r0 + dr2 * (dt / 2.0);
        let dr3 = r3 * hat(xi3.omega());
        let dv3 = r3 * xi3.linear();
        let r4 = r0 + dr3 * dt;
        let dr4 = r4 * hat(xi4.omega());
        let dv4 = r4 * xi4.linear();
        RawPose {
            rot: r0 + (dr1 + dr2 * 2.0 + dr3 * 2.0 + dr4) * (dt / 6.0),
            trans: p0.trans + (dv1 + dv2 * 2.0 + dv3 * 2.0 + dv4) * (dt / 6.0),
        }
    });
    Ok((nu_next, pose_next))
}

fn midpoint_lp(
    sys: &LpSystem,
    nu: &DualVector,
    pose: Option<RawPose>,
    choice: &IntegratorChoice,
) -> Result<(DualVector, Option<RawPose>)> {
    let algebra = sys.algebra;
    let dt = choice.dt;
    let unflat = |s: &[f64]| DualVector::from_slice(algebra, s);

    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let mid = (*nu + unflat(x)) * 0.5;
        let f = sys.vector_field(&mid)?;
        Ok(x.iter()
            .zip(nu.components())
            .zip(f.components())
            .map(|((xi, n), fi)| xi - n - dt * fi)
            .collect())
    };

    let guess = (*nu + sys.vector_field(nu)? * dt).components().to_vec();
    let solution = newton_solve(residual, &guess, choice.newton_tol, choice.newton_max_iter)?;
    let nu_next = unflat(&solution);

    let pose_next = match pose {
        Some(p) => {
            let xi_mid = sys.hamiltonian.gradient(&((*nu + nu_next) * 0.5))?;
            Some(p.advance(&(xi_mid * dt)))
        }
        None => None,
    };
    Ok((nu_next, pose_next))
}

fn splitting_lp(
    sys: &LpSystem,
    nu: &DualVector,
    pose: Option<RawPose>,
    dt: f64,
) -> Result<(DualVector, Option<RawPose>)> {
    // Midpoint estimate from one fixed-point sweep, then a full coadjoint update.
    let xi0 = sys.hamiltonian.gradient(nu)?;
    let nu_half = coadjoint_action(&exp_group(&(xi0 * (-0.5 * dt))), nu)?;
    let xi_mid = sys.hamiltonian.gradient(&nu_half)?;
    let nu_next = coadjoint_action(&exp_group(&(xi_mid * (-dt))), nu)?;
    let pose_next = pose.map(|p| p.advance(&(xi_mid * dt)));
    Ok((nu_next, pose_next))
}

fn step_lp(
    sys: &LpSystem,
    nu: &DualVector,
    pose: Option<RawPose>,
    choice: &IntegratorChoice,
) -> Result<(DualVector, Option<RawPose>)> {
    sys.algebra.check_match(nu.algebra())?;
    match choice.method {
        Method::ExplicitRk4 => rk4_lp(sys, nu, pose, choice.dt),
        Method::ImplicitMidpoint => midpoint_lp(sys, nu, pose, choice),
        Method::CoadjointSplitting => splitting_lp(sys, nu, pose, choice.dt),
    }
}

/// One integration step of a Lie-Poisson system.
pub fn step(sys: &LpSystem, state: &DualVector, choice: &IntegratorChoice) -> Result<DualVector> {
    Ok(step_lp(sys, state, None, choice)?.0)
}

// ---------------------------------------------------------------------------
// Canonical steppers.

fn canonical_field_flat(sys: &CanonicalSystem, z: &[f64]) -> Result<Vec<f64>> {
    let n = sys.dim();
    let (dq, dp) = sys.vector_field(&z[..n], &z[n..])?;
    Ok(dq.into_iter().chain(dp).collect())
}

fn step_canonical(
    sys: &CanonicalSystem,
    q: &[f64],
    p: &[f64],
    choice: &IntegratorChoice,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = sys.dim();
    let dt = choice.dt;
    let z0: Vec<f64> = q.iter().chain(p.iter()).copied().collect();
    let z_next = match choice.method {
        Method::ExplicitRk4 => {
            let f = |z: &[f64]| canonical_field_flat(sys, z);
            let axpy = |z: &[f64], k: &[f64], a: f64| -> Vec<f64> {
                z.iter().zip(k).map(|(zi, ki)| zi + a * ki).collect()
            };
            let k1 = f(&z0)?;
            let k2 = f(&axpy(&z0, &k1, dt / 2.0))?;
            let k3 = f(&axpy(&z0, &k2, dt / 2.0))?;
            let k4 = f(&axpy(&z0, &k3, dt))?;
            z0.iter()
                .enumerate()
                .map(|(i, zi)| zi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        }
        Method::ImplicitMidpoint => {
            let residual = |x: &[f64]| -> Result<Vec<f64>> {
                let mid: Vec<f64> = x.iter().zip(&z0).map(|(xi, zi)| 0.5 * (xi + zi)).collect();
                let f = canonical_field_flat(sys, &mid)?;
                Ok(x.iter()
                    .zip(&z0)
                    .zip(&f)
                    .map(|((xi, zi), fi)| xi - zi - dt * fi)
                    .collect())
            };
            let f0 = canonical_field_flat(sys, &z0)?;
            let guess: Vec<f64> = z0.iter().zip(&f0).map(|(zi, fi)| zi + dt * fi).collect();
            newton_solve(residual, &guess, choice.newton_tol, choice.newton_max_iter)?
        }
        Method::CoadjointSplitting => {
            return Err(Error::InvalidParameter(
                "coadjoint-splitting requires a Lie-Poisson system".to_string(),
            ))
        }
    };
    Ok((z_next[..n].to_vec(), z_next[n..].to_vec()))
}

// ---------------------------------------------------------------------------
// Trajectories.

/// Integrates `steps` steps from `state0`, recording energy, Casimirs, and —
/// when `with_group` is set on a Lie-Poisson system — the spatial momentum of
/// the co-evolved group element (which starts at the identity).
pub fn integrate(
    sys: &SystemSpec,
    state0: &State,
    choice: &IntegratorChoice,
    steps: usize,
    with_group: bool,
) -> Result<Trajectory> {
    match (sys, state0) {
        (SystemSpec::LiePoisson(lp), State::LiePoisson(nu0)) => {
            integrate_lp(lp, nu0, choice, steps, with_group)
        }
        (SystemSpec::Canonical(canon), State::Canonical { q, p }) => {
            if with_group {
                return Err(Error::InvalidParameter(
                    "group co-evolution requires a Lie-Poisson system".to_string(),
                ));
            }
            integrate_canonical(canon, q, p, choice, steps)
        }
        _ => Err(Error::InvalidParameter(
            "state kind does not match system kind".to_string(),
        )),
    }
}

fn integrate_lp(
    sys: &LpSystem,
    nu0: &DualVector,
    choice: &IntegratorChoice,
    steps: usize,
    with_group: bool,
) -> Result<Trajectory> {
    sys.algebra.check_match(nu0.algebra())?;
    let mut nu = *nu0;
    let mut pose = with_group.then(RawPose::identity);

    let casimir_names: Vec<String> = sys.casimirs.iter().map(|(n, _)| n.clone()).collect();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        casimir_names,
        casimirs: vec![Vec::with_capacity(steps + 1); sys.casimirs.len()],
        momentum: with_group.then(Vec::new),
    };

    let record =
        |traj: &mut Trajectory, t: f64, nu: &DualVector, pose: &Option<RawPose>| -> Result<()> {
            traj.times.push(t);
            traj.states.push(State::LiePoisson(*nu));
            traj.energy.push(sys.energy(nu)?);
            for (series, (_, casimir)) in traj.casimirs.iter_mut().zip(&sys.casimirs) {
                series.push(casimir.value(nu)?);
            }
            if let (Some(all), Some(p)) = (traj.momentum.as_mut(), pose) {
                let g = p.to_group(sys.algebra)?;
                let spatial = momentum_map(&g, nu)?;
                all.push(spatial.components().to_vec());
            }
            Ok(())
        };

    record(&mut traj, 0.0, &nu, &pose)?;
    for k in 1..=steps {
        let (nu_next, pose_next) = step_lp(sys, &nu, pose, choice)?;
        nu = nu_next;
        pose = pose_next;
        record(&mut traj, k as f64 * choice.dt, &nu, &pose)?;
    }
    Ok(traj)
}

fn integrate_canonical(
    sys: &CanonicalSystem,
    q0: &[f64],
    p0: &[f64],
    choice: &IntegratorChoice,
    steps: usize,
) -> Result<Trajectory> {
    let mut q = q0.to_vec();
    let mut p = p0.to_vec();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        casimir_names: Vec::new(),
        casimirs: Vec::new(),
        momentum: None,
    };
    traj.times.push(0.0);
    traj.energy.push(sys.energy(&q, &p)?);
    traj.states.push(State::Canonical {
        q: q.clone(),
        p: p.clone(),
    });
    for k in 1..=steps {
        let (q_next, p_next) = step_canonical(sys, &q, &p, choice)?;
        q = q_next;
        p = p_next;
        traj.times.push(k as f64 * choice.dt);
        traj.energy.push(sys.energy(&q, &p)?);
        traj.states.push(State::Canonical {
            q: q.clone(),
            p: p.clone(),
        });
    }
    Ok(traj)
}

// ---------------------------------------------------------------------------
// Diagnostics.

#[derive(Debug, Clone, Serialize)]
pub struct DriftStats {
    pub initial: f64,
    pub max_drift: f64,
    pub rms_drift: f64,
}

impl DriftStats {
    fn from_series(series: &[f64]) -> Self {
        let initial = series[0];
        let mut max_drift = 0.0f64;
        let mut sum_sq = 0.0;
        for v in series {
            let d = v - initial;
            max_drift = max_drift.max(d.abs());
            sum_sq += d * d;
        }
        DriftStats {
            initial,
            max_drift,
            rms_drift: (sum_sq / series.len() as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedDriftStats {
    pub name: String,
    #[serde(flatten)]
    pub stats: DriftStats,
}

/// Conservation report: drifts are relative to the value at step 0.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub system: String,
    pub steps: usize,
    pub energy: DriftStats,
    pub casimirs: Vec<NamedDriftStats>,
    pub momentum: Option<Vec<DriftStats>>,
}

pub fn diagnostics(traj: &Trajectory, sys: &SystemSpec) -> Result<DriftReport> {
    if traj.times.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot diagnose an empty trajectory".to_string(),
        ));
    }
    let momentum = traj.momentum.as_ref().map(|rows| {
        let width = rows[0].len();
        (0..width)
            .map(|c| {
                let series: Vec<f64> = rows.iter().map(|r| r[c]).collect();
                DriftStats::from_series(&series)
            })
            .collect()
    });
    Ok(DriftReport {
        system: sys.label().to_string(),
        steps: traj.times.len() - 1,
        energy: DriftStats::from_series(&traj.energy),
        casimirs: traj
            .casimir_names
            .iter()
            .zip(&traj.casimirs)
            .map(|(name, series)| NamedDriftStats {
                name: name.clone(),
                stats: DriftStats::from_series(series),
            })
            .collect(),
        momentum,
    })
}

// ---------------------------------------------------------------------------
// CSV export.

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the trajectory as CSV: a header row, then per-step rows with time,
/// state components, energy, Casimirs, and momentum components when present.
/// Floats carry 17 significant digits.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: &mut W) -> std::io::Result<()> {
    let mut header: Vec<String> = vec!["t".to_string()];
    match &traj.states[0] {
        State::LiePoisson(nu) => {
            header.extend(["Pi1", "Pi2", "Pi3"].map(String::from));
            if nu.algebra() == Algebra::Se3 {
                header.extend(["G1", "G2", "G3"].map(String::from));
            }
        }
        State::Canonical { q, .. } => {
            for i in 1..=q.len() {
                header.push(format!("q{i}"));
            }
            for i in 1..=q.len() {
                header.push(format!("p{i}"));
            }
        }
    }
    header.push("energy".to_string());
    for i in 1..=traj.casimirs.len() {
        header.push(format!("casimir_{i}"));
    }
    if let Some(momentum) = &traj.momentum {
        for i in 1..=momentum[0].len() {
            header.push(format!("mom{i}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;

    for (k, t) in traj.times.iter().enumerate() {
        let mut row: Vec<String> = vec![fmt17(*t)];
        match &traj.states[k] {
            State::LiePoisson(nu) => {
                row.extend(nu.components().iter().map(|c| fmt17(*c)));
            }
            State::Canonical { q, p } => {
                row.extend(q.iter().chain(p.iter()).map(|c| fmt17(*c)));
            }
        }
        row.push(fmt17(traj.energy[k]));
        for series in &traj.casimirs {
            row.push(fmt17(series[k]));
        }
        if let Some(momentum) = &traj.momentum {
            row.extend(momentum[k].iter().map(|c| fmt17(*c)));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{
        harmonic_oscillator, heavy_top_system, rigid_body_system, HeavyTopParams, RigidBodyParams,
    };
    use crate::testutil::seeded_rng;
    use rand::Rng;

    fn rigid(inertia: Vector3<f64>) -> LpSystem {
        rigid_body_system(&RigidBodyParams::new(inertia).unwrap())
    }

    fn choice(method: Method, dt: f64) -> IntegratorChoice {
        IntegratorChoice::new(method, dt).unwrap()
    }

    #[test]
    fn equilibrium_is_fixed_for_all_methods() {
        let sys = rigid(Vector3::new(1.0, 2.0, 3.0));
        let nu = DualVector::so3(Vector3::new(1.0, 0.0, 0.0));
        for method in [
            Method::ExplicitRk4,
            Method::ImplicitMidpoint,
            Method::CoadjointSplitting,
        ] {
            let next = step(&sys, &nu, &choice(method, 0.05)).unwrap();
            assert!(
                (next - nu).norm_inf() <= 1e-13,
                "{} moved an equilibrium",
                method.name()
            );
        }
    }

    #[test]
    fn rk4_norm_drift_per_step_is_tiny() {
        let sys = rigid(Vector3::new(1.0, 2.0, 3.0));
        let nu = DualVector::so3(Vector3::new(1.0, 1.0, 1.0));
        let next = step(&sys, &nu, &choice(Method::ExplicitRk4, 1e-3)).unwrap();
        assert!((next.norm() - nu.norm()).abs() <= 1e-12);
        // Richardson-style check: halving dt shrinks the one-step norm defect
        // by roughly 2^5 (local error is O(dt^5)).
        let coarse = step(&sys, &nu, &choice(Method::ExplicitRk4, 2e-2)).unwrap();
        let fine = step(&sys, &nu, &choice(Method::ExplicitRk4, 1e-2)).unwrap();
        let d_coarse = (coarse.norm() - nu.norm()).abs();
        let d_fine = (fine.norm() - nu.norm()).abs();
        assert!(d_coarse / d_fine > 16.0, "{d_coarse} vs {d_fine}");
    }

    #[test]
    fn splitting_preserves_orbit_norm_for_random_steps() {
        let mut rng = seeded_rng(41);
        for _ in 0..1000 {
            let inertia = Vector3::new(
                rng.gen_range(0.3..3.0),
                rng.gen_range(0.3..3.0),
                rng.gen_range(0.3..3.0),
            );
            let sys = rigid(inertia);
            let nu = DualVector::so3(Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ));
            let dt = rng.gen_range(1e-4..0.1);
            let next = step(&sys, &nu, &choice(Method::CoadjointSplitting, dt)).unwrap();
            assert!((next.norm() - nu.norm()).abs() <= 1e-13);
        }
    }

    #[test]
    fn zero_steps_returns_only_the_initial_state() {
        let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 2.0, 3.0)));
        let state0 = State::LiePoisson(DualVector::so3(Vector3::new(0.4, -0.2, 1.0)));
        let traj = integrate(&sys, &state0, &choice(Method::ExplicitRk4, 1e-2), 0, false).unwrap();
        assert_eq!(traj.times.len(), 1);
        assert_eq!(traj.states[0], state0);
    }

    #[test]
    fn axisymmetric_precession_matches_closed_form() {
        // I = (1,1,3): Pi3 is constant and (Pi1,Pi2) rotates at rate
        // Pi3 (1/I1 - 1/I3).
        let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 1.0, 3.0)));
        let pi0 = Vector3::new(1.0, 0.0, 1.0);
        let dt = 1e-3;
        let steps = 10_000;
        let traj = integrate(
            &sys,
            &State::LiePoisson(DualVector::so3(pi0)),
            &choice(Method::ExplicitRk4, dt),
            steps,
            false,
        )
        .unwrap();
        let t_end = dt * steps as f64;
        let rate = pi0.z * (1.0 / 1.0 - 1.0 / 3.0);
        let angle = rate * t_end;
        let expected = Vector3::new(
            angle.cos() * pi0.x - angle.sin() * pi0.y,
            angle.sin() * pi0.x + angle.cos() * pi0.y,
            pi0.z,
        );
        let State::LiePoisson(end) = traj.states[steps] else {
            panic!("wrong state kind")
        };
        assert!((end.pi() - expected).norm() <= 1e-6, "{:?}", end.pi());
    }

    #[test]
    fn sleeping_top_stays_asleep() {
        let params = HeavyTopParams::from_mgh(
            Vector3::new(1.0, 1.0, 2.0),
            1.5,
            Vector3::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        let sys = SystemSpec::LiePoisson(heavy_top_system(&params));
        let nu0 = DualVector::se3(Vector3::new(0.0, 0.0, 2.0), Vector3::new(0.0, 0.0, 1.0));
        for method in [
            Method::ExplicitRk4,
            Method::ImplicitMidpoint,
            Method::CoadjointSplitting,
        ] {
            let traj = integrate(
                &sys,
                &State::LiePoisson(nu0),
                &choice(method, 1e-2),
                10_000,
                false,
            )
            .unwrap();
            let State::LiePoisson(end) = traj.states[10_000] else {
                panic!("wrong state kind")
            };
            assert!(
                (end - nu0).norm_inf() <= 1e-12,
                "{} woke the sleeping top: {:?}",
                method.name(),
                end
            );
        }
    }

    #[test]
    fn diagnostics_of_constant_trajectory_is_zero() {
        let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 2.0, 3.0)));
        let traj = integrate(
            &sys,
            &State::LiePoisson(DualVector::so3(Vector3::new(1.0, 0.0, 0.0))),
            &choice(Method::ExplicitRk4, 1e-3),
            100,
            false,
        )
        .unwrap();
        let report = diagnostics(&traj, &sys).unwrap();
        assert_eq!(report.energy.max_drift, 0.0);
        assert_eq!(report.casimirs[0].stats.max_drift, 0.0);
    }

    #[test]
    fn casimir_drift_rk4_vs_splitting() {
        let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 2.0, 3.0)));
        let state0 = State::LiePoisson(DualVector::so3(Vector3::new(1.0, 1.0, 1.0)));
        let rk4 = integrate(
            &sys,
            &state0,
            &choice(Method::ExplicitRk4, 1e-3),
            10_000,
            false,
        )
        .unwrap();
        let rk4_report = diagnostics(&rk4, &sys).unwrap();
        assert!(rk4_report.casimirs[0].stats.max_drift <= 1e-8);

        let split = integrate(
            &sys,
            &state0,
            &choice(Method::CoadjointSplitting, 1e-3),
            10_000,
            false,
        )
        .unwrap();
        let split_report = diagnostics(&split, &sys).unwrap();
        assert!(split_report.casimirs[0].stats.max_drift <= 1e-12);
    }

    #[test]
    fn heavy_top_group_coevolution_conserves_spatial_momentum() {
        // the matched SE(3) exponential updates cancel in the momentum map
        let params = HeavyTopParams::from_mgh(
            Vector3::new(1.0, 2.0, 3.0),
            1.5,
            Vector3::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        let sys = SystemSpec::LiePoisson(heavy_top_system(&params));
        let state0 = State::LiePoisson(DualVector::se3(
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(0.2, -0.5, 0.8),
        ));
        let traj = integrate(
            &sys,
            &state0,
            &choice(Method::CoadjointSplitting, 1e-3),
            1_000,
            true,
        )
        .unwrap();
        let report = diagnostics(&traj, &sys).unwrap();
        let momentum = report.momentum.unwrap();
        assert_eq!(momentum.len(), 6);
        for comp in &momentum {
            assert!(comp.max_drift <= 1e-12, "drift {}", comp.max_drift);
        }
    }

    #[test]
    fn canonical_csv_layout() {
        let sys = SystemSpec::Canonical(harmonic_oscillator(2).unwrap());
        let traj = integrate(
            &sys,
            &State::Canonical {
                q: vec![1.0, 0.5],
                p: vec![0.0, -0.25],
            },
            &choice(Method::ExplicitRk4, 1e-2),
            1,
            false,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,q1,q2,p1,p2,energy");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let sys = rigid(Vector3::new(1.0, 2.0, 3.0));
        let nu0 = DualVector::so3(Vector3::new(1.0, 1.0, 1.0));
        let endpoint = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let mut nu = nu0;
            let c = choice(Method::ExplicitRk4, dt);
            for _ in 0..steps {
                nu = step(&sys, &nu, &c).unwrap();
            }
            nu
        };
        let reference = endpoint(5e-4);
        let coarse = (endpoint(0.05) - reference).norm_inf();
        let fine = (endpoint(0.025) - reference).norm_inf();
        assert!(
            coarse / fine >= 12.0,
            "convergence ratio {} (coarse {coarse}, fine {fine})",
            coarse / fine
        );
    }

    #[test]
    fn midpoint_conserves_quadratic_casimirs_per_step() {
        let params = HeavyTopParams::from_mgh(
            Vector3::new(1.0, 2.0, 3.0),
            2.0,
            Vector3::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        let sys = heavy_top_system(&params);
        let mut rng = seeded_rng(42);
        for _ in 0..50 {
            let nu = DualVector::se3(
                Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ),
                Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ),
            );
            let next = step(&sys, &nu, &choice(Method::ImplicitMidpoint, 1e-2)).unwrap();
            let pg = (next.pi().dot(&next.gamma()) - nu.pi().dot(&nu.gamma())).abs();
            let g2 = (next.gamma().norm_squared() - nu.gamma().norm_squared()).abs();
            assert!(pg <= 1e-12 && g2 <= 1e-12, "pg {pg}, g2 {g2}");
        }
    }

    #[test]
    fn midpoint_energy_drift_is_bounded_over_long_runs() {
        let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 2.0, 3.0)));
        let state0 = State::LiePoisson(DualVector::so3(Vector3::new(1.0, 1.0, 1.0)));
        let traj = integrate(
            &sys,
            &state0,
            &choice(Method::ImplicitMidpoint, 1e-2),
            100_000,
            false,
        )
        .unwrap();
        let report = diagnostics(&traj, &sys).unwrap();
        assert!(report.energy.max_drift <= 1e-4 * report.energy.initial.abs());
    }

    #[test]
    fn spatial_momentum_is_conserved_with_group_coevolution() {
        let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 2.0, 3.0)));
        let state0 = State::LiePoisson(DualVector::so3(Vector3::new(1.0, 1.0, 1.0)));
        let traj = integrate(
            &sys,
            &state0,
            &choice(Method::ExplicitRk4, 1e-3),
            10_000,
            true,
        )
        .unwrap();
        let report = diagnostics(&traj, &sys).unwrap();
        let momentum = report.momentum.expect("momentum recorded");
        for comp in &momentum {
            assert!(comp.max_drift <= 1e-8, "drift {}", comp.max_drift);
        }
        // splitting with the matched group update conserves it to rounding
        let traj = integrate(
            &sys,
            &state0,
            &choice(Method::CoadjointSplitting, 1e-3),
            1_000,
            true,
        )
        .unwrap();
        let report = diagnostics(&traj, &sys).unwrap();
        for comp in &report.momentum.unwrap() {
            assert!(comp.max_drift <= 1e-12, "drift {}", comp.max_drift);
        }
    }

    #[test]
    fn canonical_oscillator_round_trip() {
        let sys = SystemSpec::Canonical(harmonic_oscillator(1).unwrap());
        let state0 = State::Canonical {
            q: vec![1.0],
            p: vec![0.0],
        };
        // one full period 2*pi
        let steps = 6283;
        let dt = 2.0 * std::f64::consts::PI / steps as f64;
        for method in [Method::ExplicitRk4, Method::ImplicitMidpoint] {
            let traj = integrate(&sys, &state0, &choice(method, dt), steps, false).unwrap();
            let State::Canonical { q, p } = &traj.states[steps] else {
                panic!("wrong state kind")
            };
            assert!(
                (q[0] - 1.0).abs() <= 1e-5 && p[0].abs() <= 1e-5,
                "{method:?} {q:?} {p:?}"
            );
            let report = diagnostics(&traj, &sys).unwrap();
            assert!(report.energy.max_drift <= 1e-6);
        }
    }

    #[test]
    fn canonical_rejects_splitting_and_group() {
        let sys = SystemSpec::Canonical(harmonic_oscillator(1).unwrap());
        let state0 = State::Canonical {
            q: vec![1.0],
            p: vec![0.0],
        };
        assert!(integrate(
            &sys,
            &state0,
            &choice(Method::CoadjointSplitting, 1e-2),
            1,
            false
        )
        .is_err());
        assert!(integrate(&sys, &state0, &choice(Method::ExplicitRk4, 1e-2), 1, true).is_err());
    }

    #[test]
    fn newton_failure_is_an_error() {
        // a huge step makes the midpoint equation unsolvable in few iterations
        let sys =
            crate::systems::canonical_system(1, |q, p| (q[0] * q[0]).sin() * 50.0 + p[0] * p[0])
                .unwrap();
        let mut c = choice(Method::ImplicitMidpoint, 1e3);
        c.newton_max_iter = 3;
        let out = step_canonical(&sys, &[1.0], &[1.0], &c);
        assert!(matches!(out, Err(Error::NewtonNonConvergence { .. })));
    }

    #[test]
    fn csv_has_documented_layout() {
        let sys = SystemSpec::LiePoisson(rigid(Vector3::new(1.0, 2.0, 3.0)));
        let traj = integrate(
            &sys,
            &State::LiePoisson(DualVector::so3(Vector3::new(1.0, 0.0, 0.0))),
            &choice(Method::ExplicitRk4, 1e-3),
            2,
            true,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,Pi1,Pi2,Pi3,energy,casimir_1,mom1,mom2,mom3"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn dt_must_be_positive() {
        assert!(IntegratorChoice::new(Method::ExplicitRk4, 0.0).is_err());
        assert!(IntegratorChoice::new(Method::ExplicitRk4, -0.1).is_err());
        assert!(IntegratorChoice::new(Method::ExplicitRk4, f64::NAN).is_err());
    }
}

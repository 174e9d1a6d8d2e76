//! Concrete mechanical systems: the free rigid body on so*(3), the heavy top
//! on se*(3), and canonical systems on T*R^n.

use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{coadjoint_action, Algebra, AlgebraVector, DualVector, GroupElement};
use crate::poisson::{hamiltonian_vector_field, BracketSign, ScalarField, FD_SCALE};

/// Principal moments of inertia of a rigid body, kg m^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyParams {
    pub inertia: Vector3<f64>,
}

impl RigidBodyParams {
    pub fn new(inertia: Vector3<f64>) -> Result<Self> {
        if !(inertia.iter().all(|i| i.is_finite() && *i > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "principal moments of inertia must be positive and finite, got {inertia:?}"
            )));
        }
        Ok(RigidBodyParams { inertia })
    }
}

/// Heavy top parameters: inertia, mass (kg), gravity (m/s^2), distance from
/// the fixed point to the center of mass (m), and the unit body axis `chi`
/// pointing at the center of mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeavyTopParams {
    pub inertia: Vector3<f64>,
    pub mass: f64,
    pub gravity: f64,
    pub length: f64,
    pub chi: Vector3<f64>,
}

impl HeavyTopParams {
    pub fn new(
        inertia: Vector3<f64>,
        mass: f64,
        gravity: f64,
        length: f64,
        chi: Vector3<f64>,
    ) -> Result<Self> {
        RigidBodyParams::new(inertia)?;
        for (name, v) in [("mass", mass), ("gravity", gravity), ("length", length)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if (chi.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "chi must be a unit vector, got |chi| = {}",
                chi.norm()
            )));
        }
        Ok(HeavyTopParams {
            inertia,
            mass,
            gravity,
            length,
            chi,
        })
    }

    /// Constructs parameters from the composed gravitational coefficient
    /// `mgh`, leaving unit mass and length.
    pub fn from_mgh(inertia: Vector3<f64>, mgh: f64, chi: Vector3<f64>) -> Result<Self> {
        HeavyTopParams::new(inertia, 1.0, mgh, 1.0, chi)
    }

    /// The composed coefficient `m g h` multiplying the potential.
    pub fn mgh(&self) -> f64 {
        self.mass * self.gravity * self.length
    }
}

/// Which closed-form model an [`LpSystem`] instantiates, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    RigidBody(RigidBodyParams),
    HeavyTop(HeavyTopParams),
    Custom,
}

/// A Lie-Poisson system: a Hamiltonian on a dual g* together with its
/// Casimirs and the bracket sign. Immutable after construction.
#[derive(Clone)]
pub struct LpSystem {
    pub label: String,
    pub algebra: Algebra,
    pub hamiltonian: ScalarField,
    pub casimirs: Vec<(String, ScalarField)>,
    pub sign: BracketSign,
    pub model: ModelKind,
}

impl LpSystem {
    pub fn energy(&self, nu: &DualVector) -> Result<f64> {
        self.hamiltonian.value(nu)
    }

    pub fn vector_field(&self, nu: &DualVector) -> Result<DualVector> {
        hamiltonian_vector_field(&self.hamiltonian, nu, self.sign)
    }
}

/// The free rigid body: `H(Pi) = (Pi_1^2/I_1 + Pi_2^2/I_2 + Pi_3^2/I_3)/2`
/// with Casimir `|Pi|^2/2`.
pub fn rigid_body_system(params: &RigidBodyParams) -> LpSystem {
    let inertia = params.inertia;
    let hamiltonian = ScalarField::analytic(
        Algebra::So3,
        move |mu| 0.5 * mu.pi().component_div(&inertia).dot(&mu.pi()),
        move |mu| AlgebraVector::so3(mu.pi().component_div(&inertia)),
    );
    let casimir = ScalarField::analytic(
        Algebra::So3,
        |mu| 0.5 * mu.pi().norm_squared(),
        |mu| AlgebraVector::so3(mu.pi()),
    );
    LpSystem {
        label: "rigid-body".to_string(),
        algebra: Algebra::So3,
        hamiltonian,
        casimirs: vec![("pi_norm_sq_half".to_string(), casimir)],
        sign: BracketSign::Minus,
        model: ModelKind::RigidBody(*params),
    }
}

/// The heavy top: `H(Pi,Gamma) = sum Pi_i^2 / (2 I_i) + mgh Gamma . chi`
/// with Casimirs `Pi . Gamma` and `|Gamma|^2/2`.
pub fn heavy_top_system(params: &HeavyTopParams) -> LpSystem {
    let inertia = params.inertia;
    let mgh = params.mgh();
    let chi = params.chi;
    let hamiltonian = ScalarField::analytic(
        Algebra::Se3,
        move |mu| 0.5 * mu.pi().component_div(&inertia).dot(&mu.pi()) + mgh * mu.gamma().dot(&chi),
        move |mu| AlgebraVector::se3(mu.pi().component_div(&inertia), chi * mgh),
    );
    let pi_dot_gamma = ScalarField::analytic(
        Algebra::Se3,
        |mu| mu.pi().dot(&mu.gamma()),
        |mu| AlgebraVector::se3(mu.gamma(), mu.pi()),
    );
    let gamma_sq = ScalarField::analytic(
        Algebra::Se3,
        |mu| 0.5 * mu.gamma().norm_squared(),
        |mu| AlgebraVector::se3(Vector3::zeros(), mu.gamma()),
    );
    LpSystem {
        label: "heavy-top".to_string(),
        algebra: Algebra::Se3,
        hamiltonian,
        casimirs: vec![
            ("pi_dot_gamma".to_string(), pi_dot_gamma),
            ("gamma_norm_sq_half".to_string(), gamma_sq),
        ],
        sign: BracketSign::Minus,
        model: ModelKind::HeavyTop(*params),
    }
}

/// Legendre transform of the rigid-body Lagrangian for a diagonal inertia
/// tensor: `Pi_i = I_i Omega_i` and `H = Pi . Omega - L`.
pub fn legendre(inertia: Vector3<f64>, omega: Vector3<f64>) -> Result<(DualVector, f64)> {
    RigidBodyParams::new(inertia)?;
    let pi = inertia.component_mul(&omega);
    let lagrangian = 0.5 * pi.dot(&omega);
    let energy = pi.dot(&omega) - lagrangian;
    Ok((DualVector::so3(pi), energy))
}

/// The momentum map of the cotangent-lifted left translation, in left
/// trivialization: the coadjoint transport of the body momentum to the
/// spatial frame. For SO(3) this is `A Pi`; for SE(3) the translational slot
/// is fixed by the same pairing identity that defines the coadjoint action.
pub fn momentum_map(g: &GroupElement, body_momentum: &DualVector) -> Result<DualVector> {
    coadjoint_action(g, body_momentum)
}

type CanonicalEval = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type CanonicalGrad = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// A canonical Hamiltonian system on T*R^n.
#[derive(Clone)]
pub struct CanonicalSystem {
    pub label: String,
    dim: usize,
    eval: CanonicalEval,
    grad_q: Option<CanonicalGrad>,
    grad_p: Option<CanonicalGrad>,
    fd_scale: f64,
}

impl CanonicalSystem {
    pub fn new<F>(label: &str, dim: usize, eval: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "canonical dimension must be at least 1".to_string(),
            ));
        }
        Ok(CanonicalSystem {
            label: label.to_string(),
            dim,
            eval: Arc::new(eval),
            grad_q: None,
            grad_p: None,
            fd_scale: FD_SCALE,
        })
    }

    pub fn with_gradients<Gq, Gp>(mut self, grad_q: Gq, grad_p: Gp) -> Self
    where
        Gq: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        Gp: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad_q = Some(Arc::new(grad_q));
        self.grad_p = Some(Arc::new(grad_p));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_lengths(&self, q: &[f64], p: &[f64]) -> Result<()> {
        if q.len() != self.dim || p.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "state length mismatch: expected dimension {}, got q:{} p:{}",
                self.dim,
                q.len(),
                p.len()
            )));
        }
        Ok(())
    }

    pub fn energy(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        self.check_lengths(q, p)?;
        let v = (self.eval)(q, p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("canonical Hamiltonian"))
        }
    }

    fn scale(&self, q: &[f64], p: &[f64]) -> f64 {
        let norm = q.iter().chain(p.iter()).map(|x| x * x).sum::<f64>().sqrt();
        self.fd_scale * norm.max(1.0)
    }

    /// `dH/dq`, analytic or by central finite differences.
    pub fn grad_q(&self, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check_lengths(q, p)?;
        if let Some(g) = &self.grad_q {
            return Ok(g(q, p));
        }
        let h = self.scale(q, p);
        let mut out = vec![0.0; self.dim];
        let mut probe = q.to_vec();
        for i in 0..self.dim {
            probe[i] = q[i] + h;
            let plus = (self.eval)(&probe, p);
            probe[i] = q[i] - h;
            let minus = (self.eval)(&probe, p);
            probe[i] = q[i];
            out[i] = (plus - minus) / (2.0 * h);
            if !out[i].is_finite() {
                return Err(Error::NonFinite("canonical gradient"));
            }
        }
        Ok(out)
    }

    /// `dH/dp`, analytic or by central finite differences.
    pub fn grad_p(&self, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check_lengths(q, p)?;
        if let Some(g) = &self.grad_p {
            return Ok(g(q, p));
        }
        let h = self.scale(q, p);
        let mut out = vec![0.0; self.dim];
        let mut probe = p.to_vec();
        for i in 0..self.dim {
            probe[i] = p[i] + h;
            let plus = (self.eval)(q, &probe);
            probe[i] = p[i] - h;
            let minus = (self.eval)(q, &probe);
            probe[i] = p[i];
            out[i] = (plus - minus) / (2.0 * h);
            if !out[i].is_finite() {
                return Err(Error::NonFinite("canonical gradient"));
            }
        }
        Ok(out)
    }

    /// The canonical equations `(q_dot, p_dot) = (dH/dp, -dH/dq)`.
    pub fn vector_field(&self, q: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dq = self.grad_p(q, p)?;
        let dp = self.grad_q(q, p)?.iter().map(|x| -x).collect();
        Ok((dq, dp))
    }
}

/// Wraps a Hamiltonian evaluation into a canonical system with
/// finite-difference gradients.
pub fn canonical_system<F>(dim: usize, eval: F) -> Result<CanonicalSystem>
where
    F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
{
    CanonicalSystem::new("canonical", dim, eval)
}

/// `H = (|p|^2 + |q|^2)/2`, with analytic gradients.
pub fn harmonic_oscillator(dim: usize) -> Result<CanonicalSystem> {
    Ok(CanonicalSystem::new("harmonic-oscillator", dim, |q, p| {
        0.5 * (q.iter().map(|x| x * x).sum::<f64>() + p.iter().map(|x| x * x).sum::<f64>())
    })?
    .with_gradients(|q, _| q.to_vec(), |_, p| p.to_vec()))
}

/// `H = |p|^2/2`, with analytic gradients.
pub fn free_particle(dim: usize) -> Result<CanonicalSystem> {
    Ok(CanonicalSystem::new("free-particle", dim, |_, p| {
        0.5 * p.iter().map(|x| x * x).sum::<f64>()
    })?
    .with_gradients(|q, _| vec![0.0; q.len()], |_, p| p.to_vec()))
}

/// Either a Lie-Poisson system or a canonical one.
#[derive(Clone)]
pub enum SystemSpec {
    LiePoisson(LpSystem),
    Canonical(CanonicalSystem),
}

impl SystemSpec {
    pub fn label(&self) -> &str {
        match self {
            SystemSpec::LiePoisson(s) => &s.label,
            SystemSpec::Canonical(s) => &s.label,
        }
    }
}

use std::sync::Arc;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lie::{coadjoint_action, Algebra, DualVector, Group, GroupElement};

type BodyEval = Arc<dyn Fn(&GroupElement) -> DualVector + Send + Sync>;

/// A one-form on the group in left trivialization: a map sending a group
/// element to a body-frame momentum.
///
/// Derived sections (the scaled-inertia family, perturbations) remember the
/// momentum section they were built from; residual evaluators can use it as
/// the independent momentum when asked to.
#[derive(Clone)]
pub struct BodySection {
    group: Group,
    label: String,
    eval: BodyEval,
    base_momentum: Option<Arc<BodySection>>,
}

impl BodySection {
    pub fn new<F>(group: Group, label: &str, eval: F) -> Self
    where
        F: Fn(&GroupElement) -> DualVector + Send + Sync + 'static,
    {
        BodySection {
            group,
            label: label.to_string(),
            eval: Arc::new(eval),
            base_momentum: None,
        }
    }

    /// The unique section with constant spatial momentum `mu`:
    /// `gamma(g) = coadjoint_action(g^-1, mu)`, so that
    /// `momentum_map(g, gamma(g)) = mu` for every `g`.
    pub fn from_momentum(mu: &DualVector) -> Self {
        let mu = *mu;
        let group = match mu.algebra() {
            Algebra::So3 => Group::So3,
            Algebra::Se3 => Group::Se3,
        };
        BodySection::new(group, "constant-momentum", move |g| {
            coadjoint_action(&g.inverse(), &mu).expect("matching algebra by construction")
        })
    }

    /// The constant-in-body section `gamma(g) = mu0`.
    pub fn constant(mu0: &DualVector) -> Self {
        let mu0 = *mu0;
        let group = match mu0.algebra() {
            Algebra::So3 => Group::So3,
            Algebra::Se3 => Group::Se3,
        };
        BodySection::new(group, "body-constant", move |_| mu0)
    }

    /// The inertia-scaled family over the momentum section of `mu`:
    /// `gamma_i(g) = k * I_i * T_i(g)` with `T` the coadjoint transport of
    /// `mu`. Solves the rigid-body residual equations identically in `T`.
    pub fn scaled_inertia(inertia: Vector3<f64>, k: f64, mu: &DualVector) -> Result<Self> {
        if mu.algebra() != Algebra::So3 {
            return Err(Error::InvalidParameter(
                "the scaled-inertia family is defined on so*(3)".to_string(),
            ));
        }
        let base = Arc::new(BodySection::from_momentum(mu));
        let transport = base.clone();
        let mut section = BodySection::new(Group::So3, "scaled-inertia-family", move |g| {
            let t = (transport.eval)(g);
            DualVector::so3(t.pi().component_mul(&inertia) * k)
        });
        section.base_momentum = Some(base);
        Ok(section)
    }

    /// Adds a smooth seeded perturbation: each dual component gains
    /// `amplitude * sin(w . vec(R) + c . v + phase)` with seeded random
    /// coefficients. Inherits the base's associated momentum section.
    pub fn perturbed(base: &BodySection, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let algebra = base.group.algebra();
        let dim = algebra.dim();
        let coeffs: Vec<(Vec<f64>, Vector3<f64>, f64)> = (0..dim)
            .map(|_| {
                let w: Vec<f64> = (0..9).map(|_| rng.sample(StandardNormal)).collect();
                let c = Vector3::new(
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                );
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                (w, c, phase)
            })
            .collect();
        let inner = base.clone();
        let label = format!("perturbed({})", base.label);
        BodySection {
            group: base.group,
            label,
            eval: Arc::new(move |g: &GroupElement| {
                let mut out = (inner.eval)(g).components().to_vec();
                for (j, (w, c, phase)) in coeffs.iter().enumerate() {
                    let mut arg = *phase + c.dot(&g.trans());
                    for (wi, r) in w.iter().zip(g.rot().iter()) {
                        arg += wi * r;
                    }
                    out[j] += amplitude * arg.sin();
                }
                DualVector::from_slice(algebra, &out)
            }),
            base_momentum: base.base_momentum.clone(),
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn algebra(&self) -> Algebra {
        self.group.algebra()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The momentum section this one was derived from, when any.
    pub fn base_momentum(&self) -> Option<&BodySection> {
        self.base_momentum.as_deref()
    }

    pub fn eval(&self, g: &GroupElement) -> Result<DualVector> {
        if g.group() != self.group {
            return Err(Error::AlgebraMismatch {
                expected: self.group.name(),
                found: g.group().name(),
            });
        }
        let v = (self.eval)(g);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("body section value"))
        }
    }

    /// Second-difference probe along `g exp(t xi)`: an estimate of the second
    /// derivative's magnitude, used as a smoothness check.
    pub fn smoothness_defect(
        &self,
        g: &GroupElement,
        xi: &crate::lie::AlgebraVector,
        t: f64,
    ) -> Result<f64> {
        let plus = self.eval(&g.compose(&crate::lie::exp_group(&(*xi * t)))?)?;
        let minus = self.eval(&g.compose(&crate::lie::exp_group(&(*xi * -t)))?)?;
        let center = self.eval(g)?;
        Ok((plus - center * 2.0 + minus).norm_inf() / (t * t))
    }
}

type CanonicalEvalFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A one-form on R^n: `q -> p = gamma(q)`, optionally generated from a scalar
/// potential `W` as `gamma = dW` by central finite differences.
#[derive(Clone)]
pub struct CanonicalSection {
    dim: usize,
    label: String,
    eval: CanonicalEvalFn,
}

impl CanonicalSection {
    pub fn new<F>(dim: usize, label: &str, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        CanonicalSection {
            dim,
            label: label.to_string(),
            eval: Arc::new(eval),
        }
    }

    /// `gamma = dW` with central differences of step `step`.
    pub fn from_potential<W>(dim: usize, label: &str, w: W, step: f64) -> Self
    where
        W: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        CanonicalSection::new(dim, label, move |q: &[f64]| {
            let mut out = vec![0.0; q.len()];
            let mut probe = q.to_vec();
            for i in 0..q.len() {
                probe[i] = q[i] + step;
                let plus = w(&probe);
                probe[i] = q[i] - step;
                let minus = w(&probe);
                probe[i] = q[i];
                out[i] = (plus - minus) / (2.0 * step);
            }
            out
        })
    }

    /// Adds a seeded sinusoidal perturbation of the given amplitude to each
    /// component.
    pub fn perturbed(base: &CanonicalSection, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = base.dim;
        let coeffs: Vec<(Vec<f64>, f64)> = (0..dim)
            .map(|_| {
                let w: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                (w, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let inner = base.clone();
        CanonicalSection {
            dim,
            label: format!("perturbed({})", base.label),
            eval: Arc::new(move |q: &[f64]| {
                let mut out = (inner.eval)(q);
                for (j, (w, phase)) in coeffs.iter().enumerate() {
                    let arg: f64 = phase + w.iter().zip(q).map(|(wi, qi)| wi * qi).sum::<f64>();
                    out[j] += amplitude * arg.sin();
                }
                out
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.dim,
                q.len()
            )));
        }
        let p = (self.eval)(q);
        if p.iter().all(|x| x.is_finite()) {
            Ok(p)
        } else {
            Err(Error::FiniteDifference(
                "section evaluation left its domain".to_string(),
            ))
        }
    }

    /// `max_{i<j} |d gamma_i / d q_j - d gamma_j / d q_i|` by central
    /// differences: the exactness (curl) defect.
    pub fn curl_defect(&self, q: &[f64], step: f64) -> Result<f64> {
        let n = self.dim;
        let mut jacobian = vec![vec![0.0; n]; n];
        let mut probe = q.to_vec();
        for j in 0..n {
            probe[j] = q[j] + step;
            let plus = self.eval(&probe)?;
            probe[j] = q[j] - step;
            let minus = self.eval(&probe)?;
            probe[j] = q[j];
            for i in 0..n {
                jacobian[i][j] = (plus[i] - minus[i]) / (2.0 * step);
            }
        }
        let mut defect = 0.0f64;
        for (i, row) in jacobian.iter().enumerate() {
            for j in (i + 1)..n {
                defect = defect.max((row[j] - jacobian[j][i]).abs());
            }
        }
        Ok(defect)
    }
}

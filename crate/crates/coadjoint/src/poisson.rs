//! Lie-Poisson brackets and Hamiltonian vector fields on duals of Lie algebras.
//!
//! The generic bracket is `{f,g}±(mu) = ± <mu, [df/dmu, dg/dmu]>`. The closed
//! rigid-body and heavy-top forms are independent implementations used to
//! cross-check it. Reduced dynamics of left-invariant systems use the (−)
//! bracket, under which the Hamiltonian vector field is
//! `X_h(nu) = +ad*_{dh/dnu} nu`; the sign is pinned by the finite-difference
//! consistency check in the tests, not by convention alone.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::lie::{ad, coad, pairing, Algebra, AlgebraVector, DualVector};

/// Sign of the Lie-Poisson structure. Fixed per system; left-invariant
/// reduced systems use `Minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketSign {
    Plus,
    Minus,
}

impl BracketSign {
    pub fn factor(self) -> f64 {
        match self {
            BracketSign::Plus => 1.0,
            BracketSign::Minus => -1.0,
        }
    }
}

/// Coefficient of the central finite-difference step for gradients of scalar
/// fields: `h = FD_SCALE * max(1, |mu|)`, i.e. `max(1e-6, 1e-6 |mu|)`.
pub const FD_SCALE: f64 = 1e-6;

type EvalFn = Arc<dyn Fn(&DualVector) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DualVector) -> AlgebraVector + Send + Sync>;

/// A smooth function on a dual g*, with an optional analytic gradient.
///
/// When no gradient is supplied, central finite differences with step
/// `max(FD_SCALE, FD_SCALE * |mu|)` are used. Analytic gradients are preferred
/// in shipped systems; numeric ones serve as the testing oracle.
#[derive(Clone)]
pub struct ScalarField {
    algebra: Algebra,
    eval: EvalFn,
    grad: Option<GradFn>,
    fd_scale: f64,
}

impl ScalarField {
    pub fn numeric<F>(algebra: Algebra, eval: F) -> Self
    where
        F: Fn(&DualVector) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            algebra,
            eval: Arc::new(eval),
            grad: None,
            fd_scale: FD_SCALE,
        }
    }

    pub fn analytic<F, G>(algebra: Algebra, eval: F, grad: G) -> Self
    where
        F: Fn(&DualVector) -> f64 + Send + Sync + 'static,
        G: Fn(&DualVector) -> AlgebraVector + Send + Sync + 'static,
    {
        ScalarField {
            algebra,
            eval: Arc::new(eval),
            grad: Some(Arc::new(grad)),
            fd_scale: FD_SCALE,
        }
    }

    /// The coordinate function `mu -> mu_i`.
    pub fn coordinate(algebra: Algebra, i: usize) -> Self {
        assert!(i < algebra.dim());
        ScalarField::analytic(
            algebra,
            move |mu| mu.component(i),
            move |_| AlgebraVector::basis(algebra, i),
        )
    }

    /// The linear function `mu -> <mu, xi>`.
    pub fn linear(xi: AlgebraVector) -> Self {
        ScalarField::analytic(
            xi.algebra(),
            move |mu| pairing(mu, &xi).expect("algebra fixed by construction"),
            move |_| xi,
        )
    }

    pub fn with_fd_scale(mut self, scale: f64) -> Self {
        self.fd_scale = scale;
        self
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn value(&self, mu: &DualVector) -> Result<f64> {
        self.algebra.check_match(mu.algebra())?;
        let v = (self.eval)(mu);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("scalar field value"))
        }
    }

    pub(crate) fn value_raw(&self, mu: &DualVector) -> f64 {
        (self.eval)(mu)
    }

    /// The functional derivative `df/dmu` as an algebra vector: analytic when
    /// supplied, otherwise by central finite differences.
    pub fn gradient(&self, mu: &DualVector) -> Result<AlgebraVector> {
        self.algebra.check_match(mu.algebra())?;
        let g = match &self.grad {
            Some(grad) => grad(mu),
            None => self.fd_gradient(mu),
        };
        if g.is_finite() {
            Ok(g)
        } else {
            Err(Error::NonFinite("scalar field gradient"))
        }
    }

    fn fd_gradient(&self, mu: &DualVector) -> AlgebraVector {
        let h = self.fd_scale * mu.norm().max(1.0);
        let dim = mu.dim();
        let mut components = [0.0; 6];
        for (i, slot) in components.iter_mut().take(dim).enumerate() {
            let e = DualVector::basis(mu.algebra(), i) * h;
            *slot = ((self.eval)(&(*mu + e)) - (self.eval)(&(*mu - e))) / (2.0 * h);
        }
        AlgebraVector::from_slice(mu.algebra(), &components[..dim])
    }

    /// Max relative disagreement between the analytic gradient and the
    /// finite-difference one at `mu`; zero when no analytic gradient exists.
    pub fn gradient_defect(&self, mu: &DualVector) -> Result<f64> {
        if self.grad.is_none() {
            return Ok(0.0);
        }
        let analytic = self.gradient(mu)?;
        let numeric = self.fd_gradient(mu);
        let scale = analytic.norm_inf().max(1.0);
        Ok((analytic - numeric).norm_inf() / scale)
    }
}

/// The Lie-Poisson bracket `{f,g}±(mu) = ± <mu, [df/dmu, dg/dmu]>`.
pub fn lie_poisson_bracket(
    f: &ScalarField,
    g: &ScalarField,
    mu: &DualVector,
    sign: BracketSign,
) -> Result<f64> {
    f.algebra().check_match(g.algebra())?;
    f.algebra().check_match(mu.algebra())?;
    let df = f.gradient(mu)?;
    let dg = g.gradient(mu)?;
    Ok(sign.factor() * pairing(mu, &ad(&df, &dg)?)?)
}

/// The closed rigid-body bracket on so*(3):
/// `{f,g}_-(Pi) = -Pi . (grad f x grad g)`.
pub fn rigid_body_bracket(f: &ScalarField, g: &ScalarField, pi: Vector3<f64>) -> Result<f64> {
    Algebra::So3.check_match(f.algebra())?;
    Algebra::So3.check_match(g.algebra())?;
    let mu = DualVector::so3(pi);
    let df = f.gradient(&mu)?.omega();
    let dg = g.gradient(&mu)?.omega();
    Ok(-pi.dot(&df.cross(&dg)))
}

/// The closed heavy-top bracket on se*(3):
/// `{f,g}_-(Pi,Gamma) = -Pi.(dPi f x dPi g) - Gamma.(dPi f x dGamma g - dPi g x dGamma f)`.
pub fn heavy_top_bracket(
    f: &ScalarField,
    g: &ScalarField,
    pi: Vector3<f64>,
    gamma: Vector3<f64>,
) -> Result<f64> {
    Algebra::Se3.check_match(f.algebra())?;
    Algebra::Se3.check_match(g.algebra())?;
    let mu = DualVector::se3(pi, gamma);
    let df = f.gradient(&mu)?;
    let dg = g.gradient(&mu)?;
    let (df_pi, df_gamma) = (df.omega(), df.linear());
    let (dg_pi, dg_gamma) = (dg.omega(), dg.linear());
    Ok(-pi.dot(&df_pi.cross(&dg_pi))
        - gamma.dot(&(df_pi.cross(&dg_gamma) - dg_pi.cross(&df_gamma))))
}

/// The Hamiltonian vector field of `h` on the dual, `X_h(nu)`.
///
/// For the (−) bracket this is `+ad*_{dh/dnu} nu`, so that
/// `{k,h}_- = <X_h, dk/dnu>` for every `k` (Euler's equations for the rigid
/// body Hamiltonian).
pub fn hamiltonian_vector_field(
    h: &ScalarField,
    nu: &DualVector,
    sign: BracketSign,
) -> Result<DualVector> {
    let grad = h.gradient(nu)?;
    Ok(coad(&grad, nu)? * (-sign.factor()))
}

/// The orbit symplectic form evaluated on coadjoint directions:
/// `omega±(nu)(ad*_xi nu, ad*_eta nu) = ± <nu, [xi, eta]>`.
pub fn orbit_symplectic_form(
    nu: &DualVector,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
    sign: BracketSign,
) -> Result<f64> {
    nu.algebra().check_match(xi.algebra())?;
    nu.algebra().check_match(eta.algebra())?;
    Ok(sign.factor() * pairing(nu, &ad(xi, eta)?)?)
}

pub mod selftest {
    //! The bracket invariant suite: antisymmetry, Leibniz, Jacobi, and
    //! closed-form agreement on seeded random fields. Shared by the CLI
    //! `bracket-selftest` subcommand and the acceptance tests.

    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use serde::Serialize;

    pub const ANTISYMMETRY_TOL: f64 = 1e-12;
    pub const LEIBNIZ_TOL: f64 = 1e-8;
    pub const JACOBI_TOL: f64 = 1e-6;
    pub const CLOSED_FORM_TOL: f64 = 1e-9;
    pub const INSTANCES: usize = 100;

    #[derive(Debug, Clone, Serialize)]
    pub struct SelftestReport {
        pub seed: u64,
        pub instances: usize,
        pub antisymmetry_max: f64,
        pub antisymmetry_tol: f64,
        pub leibniz_max: f64,
        pub leibniz_tol: f64,
        pub jacobi_max: f64,
        pub jacobi_tol: f64,
        pub closed_form_max: f64,
        pub closed_form_tol: f64,
        pub pass: bool,
    }

    /// A random polynomial field of degree <= 2 with an analytic gradient:
    /// `f(mu) = b . mu + mu^T Q mu / 2` with symmetric `Q`.
    pub fn random_quadratic_field(algebra: Algebra, rng: &mut ChaCha8Rng) -> ScalarField {
        let n = algebra.dim();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                q[i * n + j] = v;
                q[j * n + i] = v;
            }
        }
        let (b_eval, q_eval) = (b.clone(), q.clone());
        let eval = move |mu: &DualVector| {
            let c = mu.components();
            let mut acc = 0.0;
            for i in 0..n {
                acc += b_eval[i] * c[i];
                for j in 0..n {
                    acc += 0.5 * c[i] * q_eval[i * n + j] * c[j];
                }
            }
            acc
        };
        let grad = move |mu: &DualVector| {
            let c = mu.components();
            let mut out = vec![0.0; n];
            for i in 0..n {
                out[i] = b[i];
                for j in 0..n {
                    out[i] += q[i * n + j] * c[j];
                }
            }
            AlgebraVector::from_slice(algebra, &out)
        };
        ScalarField::analytic(algebra, eval, grad)
    }

    pub fn random_dual(algebra: Algebra, rng: &mut ChaCha8Rng) -> DualVector {
        let comps: Vec<f64> = (0..algebra.dim())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        DualVector::from_slice(algebra, &comps)
    }

    fn strip_gradient(f: &ScalarField) -> ScalarField {
        let inner = f.clone();
        ScalarField::numeric(f.algebra(), move |mu| inner.value_raw(mu))
    }

    /// Runs the full invariant suite with `INSTANCES` seeded random instances
    /// per property and per algebra.
    pub fn run(seed: u64) -> Result<SelftestReport> {
        let mut rng = crate::sampling::indexed_rng(seed, 0);
        let mut antisymmetry_max: f64 = 0.0;
        let mut leibniz_max: f64 = 0.0;
        let mut jacobi_max: f64 = 0.0;
        let mut closed_form_max: f64 = 0.0;

        for algebra in [Algebra::So3, Algebra::Se3] {
            for _ in 0..INSTANCES {
                let f = random_quadratic_field(algebra, &mut rng);
                let g = random_quadratic_field(algebra, &mut rng);
                let h = random_quadratic_field(algebra, &mut rng);
                let mu = random_dual(algebra, &mut rng);

                // antisymmetry
                let fg = lie_poisson_bracket(&f, &g, &mu, BracketSign::Minus)?;
                let gf = lie_poisson_bracket(&g, &f, &mu, BracketSign::Minus)?;
                antisymmetry_max = antisymmetry_max.max((fg + gf).abs());

                // Leibniz with finite-difference gradients on the product
                let (fa, ga) = (strip_gradient(&f), strip_gradient(&g));
                let (fb, gb) = (fa.clone(), ga.clone());
                let product =
                    ScalarField::numeric(algebra, move |m| fb.value_raw(m) * gb.value_raw(m));
                let lhs = lie_poisson_bracket(&product, &h, &mu, BracketSign::Minus)?;
                let rhs = fa.value(&mu)? * lie_poisson_bracket(&ga, &h, &mu, BracketSign::Minus)?
                    + ga.value(&mu)? * lie_poisson_bracket(&fa, &h, &mu, BracketSign::Minus)?;
                leibniz_max = leibniz_max.max((lhs - rhs).abs());

                // Jacobi: the inner brackets are fields evaluated numerically
                let bracket_field = |a: &ScalarField, b: &ScalarField| {
                    let (a, b) = (a.clone(), b.clone());
                    ScalarField::numeric(algebra, move |m| {
                        lie_poisson_bracket(&a, &b, m, BracketSign::Minus).unwrap_or(f64::NAN)
                    })
                };
                let cyc = lie_poisson_bracket(&f, &bracket_field(&g, &h), &mu, BracketSign::Minus)?
                    + lie_poisson_bracket(&g, &bracket_field(&h, &f), &mu, BracketSign::Minus)?
                    + lie_poisson_bracket(&h, &bracket_field(&f, &g), &mu, BracketSign::Minus)?;
                jacobi_max = jacobi_max.max(cyc.abs());

                // closed forms against the generic evaluator
                let generic = lie_poisson_bracket(&f, &g, &mu, BracketSign::Minus)?;
                let closed = match algebra {
                    Algebra::So3 => rigid_body_bracket(&f, &g, mu.pi())?,
                    Algebra::Se3 => heavy_top_bracket(&f, &g, mu.pi(), mu.gamma())?,
                };
                closed_form_max = closed_form_max.max((generic - closed).abs());
            }
        }

        let pass = antisymmetry_max <= ANTISYMMETRY_TOL
            && leibniz_max <= LEIBNIZ_TOL
            && jacobi_max <= JACOBI_TOL
            && closed_form_max <= CLOSED_FORM_TOL;
        Ok(SelftestReport {
            seed,
            instances: INSTANCES,
            antisymmetry_max,
            antisymmetry_tol: ANTISYMMETRY_TOL,
            leibniz_max,
            leibniz_tol: LEIBNIZ_TOL,
            jacobi_max,
            jacobi_tol: JACOBI_TOL,
            closed_form_max,
            closed_form_tol: CLOSED_FORM_TOL,
            pass,
        })
    }
}

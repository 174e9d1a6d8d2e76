use serde::Serialize;

use crate::error::{Error, Result};
use crate::hj::{
    hj_residual_canonical, hj_residual_rigid, hj_residual_top, rigid_numerators, top_numerators,
    BodySection, CanonicalSection,
};
use crate::lie::{ad, exp_group, pairing, AlgebraVector, DualVector, GroupElement};
use crate::poisson::hamiltonian_vector_field;
use crate::sampling::{indexed_rng, random_group_element, stabilizer_element};
use crate::systems::{momentum_map, CanonicalSystem, LpSystem, ModelKind};

/// Step of central differences along group curves `g exp(t xi)`.
pub const DEFAULT_GROUP_STEP: f64 = 1e-5;
/// Step of central differences on R^n (potentials, curl checks, pulled-back
/// Hamiltonians).
pub const DEFAULT_CANONICAL_STEP: f64 = 1e-4;

/// Where the momentum variables of the residual equations are taken from at
/// each sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PiMode {
    /// The momentum variables are read off the section value itself.
    SectionValue,
    /// The momentum variables come from the momentum section the candidate
    /// was derived from.
    BaseSection,
    /// A fixed momentum supplied by the caller.
    Fixed(DualVector),
}

impl PiMode {
    fn name(&self) -> &'static str {
        match self {
            PiMode::SectionValue => "section",
            PiMode::BaseSection => "base",
            PiMode::Fixed(_) => "fixed",
        }
    }
}

/// How far `X_H^gamma` and the reduced field fail to be related through the
/// section: `|d/dt gamma(g exp(t xi)) - X_h(gamma(g))|_inf` with
/// `xi = dH/dmu` at `gamma(g)` (the base velocity in body coordinates).
pub fn relatedness_residual(
    sys: &LpSystem,
    section: &BodySection,
    g: &GroupElement,
    step: f64,
) -> Result<f64> {
    sys.algebra.check_match(section.algebra())?;
    let gamma_g = section.eval(g)?;
    let xi = sys.hamiltonian.gradient(&gamma_g)?;
    let plus = section.eval(&g.compose(&exp_group(&(xi * step)))?)?;
    let minus = section.eval(&g.compose(&exp_group(&(xi * -step)))?)?;
    let pushforward = (plus - minus) * (0.5 / step);
    let reduced = hamiltonian_vector_field(&sys.hamiltonian, &gamma_g, sys.sign)?;
    Ok((pushforward - reduced).norm_inf())
}

/// The exterior-derivative defect of the section on left-invariant frame
/// directions:
/// `d gamma(xi_L, eta_L)(g) = D_xi <gamma, eta> - D_eta <gamma, xi> - <gamma(g), [xi, eta]>`,
/// with the derivatives taken by central differences along `g exp(t .)`.
pub fn closedness_defect(
    section: &BodySection,
    g: &GroupElement,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
    step: f64,
) -> Result<f64> {
    let derivative = |dir: &AlgebraVector, against: &AlgebraVector| -> Result<f64> {
        let plus = pairing(
            &section.eval(&g.compose(&exp_group(&(*dir * step)))?)?,
            against,
        )?;
        let minus = pairing(
            &section.eval(&g.compose(&exp_group(&(*dir * -step)))?)?,
            against,
        )?;
        Ok((plus - minus) * (0.5 / step))
    };
    let bracket_term = pairing(&section.eval(g)?, &ad(xi, eta)?)?;
    Ok(derivative(xi, eta)? - derivative(eta, xi)? - bracket_term)
}

/// Result of [`momentum_level_check`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentumCheck {
    /// `max_g |momentum_map(g, gamma(g)) - mu|_inf` over the sampled points.
    pub level_defect: f64,
    /// `max |gamma(s g) - gamma(g)|_inf` over sampled stabilizer elements
    /// `s` of `mu`. The cotangent-lifted left action leaves body momenta
    /// unchanged in left trivialization, so the expected transport of
    /// `gamma(g)` is `gamma(g)` itself.
    pub invariance_defect: f64,
}

/// Checks `Im(gamma) ⊂ J^-1(mu)` and stabilizer invariance on `samples`
/// seeded group points.
pub fn momentum_level_check(
    section: &BodySection,
    mu: &DualVector,
    samples: usize,
    seed: u64,
) -> Result<MomentumCheck> {
    section.algebra().check_match(mu.algebra())?;
    let mut level: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    for index in 0..samples {
        let mut rng = indexed_rng(seed, index as u64);
        let g = random_group_element(section.group(), &mut rng);
        let spatial = momentum_map(&g, &section.eval(&g)?)?;
        level = level.max((spatial - *mu).norm_inf());

        let s = stabilizer_element(mu, &mut rng);
        let sg = s.compose(&g)?;
        invariance = invariance.max((section.eval(&sg)? - section.eval(&g)?).norm_inf());
    }
    Ok(MomentumCheck {
        level_defect: level,
        invariance_defect: invariance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub index: usize,
    pub hj: f64,
    pub relatedness: f64,
    pub closedness: f64,
    pub consistent: bool,
    /// Cleared numerators of the residual equations at this sample (empty for
    /// canonical systems).
    pub numerators: Vec<f64>,
}

/// Aggregated residual report of a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub system: String,
    pub section: String,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub pi_mode: String,
    pub hj_max: f64,
    pub relatedness_max: f64,
    pub closedness_max: f64,
    pub momentum_defect: Option<f64>,
    pub invariance_defect: Option<f64>,
    pub verdict: String,
    /// The hypothesis that the section's pullback is symplectic has no
    /// constructive test; it is carried as an assumption.
    pub symplectic_hypothesis: String,
    pub per_sample: Vec<SampleReport>,
}

impl ResidualReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == "CONSISTENT"
    }
}

fn verdict_label(all_consistent: bool) -> String {
    if all_consistent {
        "CONSISTENT"
    } else {
        "INCONSISTENT"
    }
    .to_string()
}

/// Verifies on seeded samples that the residual equations and the relatedness
/// condition agree: at every sample both residuals must fall on the same side
/// of `tol` for the verdict to be CONSISTENT.
///
/// The momentum variables of the residual equations are taken per `pi_mode`;
/// the relatedness residual is mode-independent.
#[allow(clippy::too_many_arguments)]
pub fn verify_equivalence(
    sys: &LpSystem,
    section: &BodySection,
    mu: &DualVector,
    samples: usize,
    tol: f64,
    seed: u64,
    pi_mode: PiMode,
    step: f64,
) -> Result<ResidualReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "samples must be at least 1".to_string(),
        ));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    sys.algebra.check_match(section.algebra())?;

    let dim = sys.algebra.dim();
    let basis: Vec<AlgebraVector> = (0..dim)
        .map(|i| AlgebraVector::basis(sys.algebra, i))
        .collect();

    let mut rows = Vec::with_capacity(samples);
    let mut hj_max: f64 = 0.0;
    let mut rel_max: f64 = 0.0;
    let mut closed_max: f64 = 0.0;
    let mut all_consistent = true;

    for index in 0..samples {
        let mut rng = indexed_rng(seed, index as u64);
        let g = random_group_element(section.group(), &mut rng);
        let gamma = section.eval(&g)?;

        let momentum_source = match &pi_mode {
            PiMode::SectionValue => gamma,
            PiMode::BaseSection => match section.base_momentum() {
                Some(base) => base.eval(&g)?,
                None => {
                    return Err(Error::InvalidParameter(
                        "section carries no base momentum section; use another pi mode".to_string(),
                    ))
                }
            },
            PiMode::Fixed(d) => {
                sys.algebra.check_match(d.algebra())?;
                *d
            }
        };

        let (hj, numerators) = match &sys.model {
            ModelKind::RigidBody(params) => {
                let residual = hj_residual_rigid(momentum_source.pi(), gamma.pi(), params.inertia)?;
                let numerators = rigid_numerators(momentum_source.pi(), gamma.pi(), params.inertia);
                (residual.amax(), numerators.iter().copied().collect())
            }
            ModelKind::HeavyTop(params) => {
                let (slot_pi, slot_gamma) = hj_residual_top(
                    momentum_source.pi(),
                    momentum_source.gamma(),
                    gamma.pi(),
                    params,
                )?;
                let (num_pi, num_gamma) = top_numerators(
                    momentum_source.pi(),
                    momentum_source.gamma(),
                    gamma.pi(),
                    params,
                );
                let numerators: Vec<f64> = num_pi.iter().chain(num_gamma.iter()).copied().collect();
                (slot_pi.amax().max(slot_gamma.amax()), numerators)
            }
            ModelKind::Custom => {
                return Err(Error::InvalidParameter(
                    "closed-form residuals need a rigid-body or heavy-top model".to_string(),
                ))
            }
        };

        let relatedness = relatedness_residual(sys, section, &g, step)?;
        let mut closedness: f64 = 0.0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                closedness = closedness
                    .max(closedness_defect(section, &g, &basis[i], &basis[j], step)?.abs());
            }
        }

        let consistent = (hj <= tol) == (relatedness <= tol);
        all_consistent &= consistent;
        hj_max = hj_max.max(hj);
        rel_max = rel_max.max(relatedness);
        closed_max = closed_max.max(closedness);
        rows.push(SampleReport {
            index,
            hj,
            relatedness,
            closedness,
            consistent,
            numerators,
        });
    }

    let momentum = momentum_level_check(section, mu, samples, seed)?;
    Ok(ResidualReport {
        system: sys.label.clone(),
        section: section.label().to_string(),
        samples,
        tol,
        seed,
        pi_mode: pi_mode.name().to_string(),
        hj_max,
        relatedness_max: rel_max,
        closedness_max: closed_max,
        momentum_defect: Some(momentum.level_defect),
        invariance_defect: Some(momentum.invariance_defect),
        verdict: verdict_label(all_consistent),
        symplectic_hypothesis: "assumed".to_string(),
        per_sample: rows,
    })
}

/// Canonical-side relatedness: `|D_{q_dot} gamma(q) + dH/dq(q, gamma(q))|_inf`
/// with `q_dot = dH/dp(q, gamma(q))`.
pub fn relatedness_residual_canonical(
    sys: &CanonicalSystem,
    section: &CanonicalSection,
    q: &[f64],
    step: f64,
) -> Result<f64> {
    let p = section.eval(q)?;
    let qdot = sys.grad_p(q, &p)?;
    let scale = qdot.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let h = step / scale;
    let shifted = |sign: f64| -> Result<Vec<f64>> {
        let moved: Vec<f64> = q
            .iter()
            .zip(&qdot)
            .map(|(qi, v)| qi + sign * h * v)
            .collect();
        section.eval(&moved)
    };
    let plus = shifted(1.0)?;
    let minus = shifted(-1.0)?;
    let dh_dq = sys.grad_q(q, &p)?;
    let mut defect = 0.0f64;
    for i in 0..q.len() {
        let pushforward = (plus[i] - minus[i]) / (2.0 * h);
        defect = defect.max((pushforward + dh_dq[i]).abs());
    }
    Ok(defect)
}

/// The canonical analogue of [`verify_equivalence`], evaluated on an explicit
/// list of base points (a grid or seeded samples). The closedness column
/// carries the curl defect; there is no momentum level to check.
pub fn verify_equivalence_canonical(
    sys: &CanonicalSystem,
    section: &CanonicalSection,
    points: &[Vec<f64>],
    tol: f64,
    seed: u64,
    step: f64,
) -> Result<ResidualReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one sample point".to_string(),
        ));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut rows = Vec::with_capacity(points.len());
    let mut hj_max: f64 = 0.0;
    let mut rel_max: f64 = 0.0;
    let mut closed_max: f64 = 0.0;
    let mut all_consistent = true;
    for (index, q) in points.iter().enumerate() {
        let hj = hj_residual_canonical(sys, section, q, step)?
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let relatedness = relatedness_residual_canonical(sys, section, q, step)?;
        let closedness = section.curl_defect(q, step)?;
        let consistent = (hj <= tol) == (relatedness <= tol);
        all_consistent &= consistent;
        hj_max = hj_max.max(hj);
        rel_max = rel_max.max(relatedness);
        closed_max = closed_max.max(closedness);
        rows.push(SampleReport {
            index,
            hj,
            relatedness,
            closedness,
            consistent,
            numerators: Vec::new(),
        });
    }
    Ok(ResidualReport {
        system: sys.label.clone(),
        section: section.label().to_string(),
        samples: points.len(),
        tol,
        seed,
        pi_mode: "not-applicable".to_string(),
        hj_max,
        relatedness_max: rel_max,
        closedness_max: closed_max,
        momentum_defect: None,
        invariance_defect: None,
        verdict: verdict_label(all_consistent),
        symplectic_hypothesis: "assumed".to_string(),
        per_sample: rows,
    })
}

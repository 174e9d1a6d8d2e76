use nalgebra::Vector3;

use crate::error::Result;
use crate::hj::CanonicalSection;
use crate::systems::{CanonicalSystem, HeavyTopParams, RigidBodyParams};

/// The rigid-body residual field `Pi x (gamma_1/I_1, gamma_2/I_2, gamma_3/I_3)`.
///
/// Componentwise this is `(I_j Pi_j gamma_k - I_k Pi_k gamma_j) / (I_j I_k)`
/// over cyclic `(j,k)`, so it vanishes exactly when the three reduced
/// Hamilton-Jacobi equations hold; see [`rigid_numerators`] for the cleared
/// numerators.
pub fn hj_residual_rigid(
    pi: Vector3<f64>,
    gamma_bar: Vector3<f64>,
    inertia: Vector3<f64>,
) -> Result<Vector3<f64>> {
    RigidBodyParams::new(inertia)?;
    Ok(pi.cross(&gamma_bar.component_div(&inertia)))
}

/// The cleared numerators of the rigid-body equations:
/// `(I_2 Pi_2 g_3 - I_3 Pi_3 g_2, I_3 Pi_3 g_1 - I_1 Pi_1 g_3, I_1 Pi_1 g_2 - I_2 Pi_2 g_1)`.
pub fn rigid_numerators(
    pi: Vector3<f64>,
    gamma_bar: Vector3<f64>,
    inertia: Vector3<f64>,
) -> Vector3<f64> {
    Vector3::new(
        inertia.y * pi.y * gamma_bar.z - inertia.z * pi.z * gamma_bar.y,
        inertia.z * pi.z * gamma_bar.x - inertia.x * pi.x * gamma_bar.z,
        inertia.x * pi.x * gamma_bar.y - inertia.y * pi.y * gamma_bar.x,
    )
}

/// The heavy-top residual fields: the momentum slot
/// `Pi x (gamma/I) + mgh Gamma x chi` and the advected slot `Gamma x (gamma/I)`.
pub fn hj_residual_top(
    pi: Vector3<f64>,
    gamma_adv: Vector3<f64>,
    gamma_bar: Vector3<f64>,
    params: &HeavyTopParams,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    hj_residual_top_parts(
        pi,
        gamma_adv,
        gamma_bar,
        params.inertia,
        params.mgh(),
        params.chi,
    )
}

/// [`hj_residual_top`] on bare coefficients. Unlike the parameter struct this
/// admits `mgh = 0`, where the momentum slot degenerates to the rigid-body
/// residual.
pub fn hj_residual_top_parts(
    pi: Vector3<f64>,
    gamma_adv: Vector3<f64>,
    gamma_bar: Vector3<f64>,
    inertia: Vector3<f64>,
    mgh: f64,
    chi: Vector3<f64>,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    RigidBodyParams::new(inertia)?;
    if !(mgh.is_finite() && mgh >= 0.0) {
        return Err(crate::error::Error::InvalidParameter(format!(
            "mgh must be finite and non-negative, got {mgh}"
        )));
    }
    let scaled = gamma_bar.component_div(&inertia);
    Ok((
        pi.cross(&scaled) + gamma_adv.cross(&chi) * mgh,
        gamma_adv.cross(&scaled),
    ))
}

/// Cleared numerators of the six heavy-top equations, in the same slot order
/// as [`hj_residual_top`]: component `j` of the first slot is
/// `I_k Pi_k g_l - I_l Pi_l g_k + mgh I_k I_l (Gamma_k chi_l - Gamma_l chi_k)`
/// over cyclic `(k,l)`, and of the second slot `I_k Gamma_k g_l - I_l Gamma_l g_k`.
pub fn top_numerators(
    pi: Vector3<f64>,
    gamma_adv: Vector3<f64>,
    gamma_bar: Vector3<f64>,
    params: &HeavyTopParams,
) -> (Vector3<f64>, Vector3<f64>) {
    let i = params.inertia;
    let chi = params.chi;
    let mgh = params.mgh();
    let mut momentum_slot = Vector3::zeros();
    let mut advected_slot = Vector3::zeros();
    for (j, k, l) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        momentum_slot[j] = i[k] * pi[k] * gamma_bar[l] - i[l] * pi[l] * gamma_bar[k]
            + mgh * i[k] * i[l] * (gamma_adv[k] * chi[l] - gamma_adv[l] * chi[k]);
        advected_slot[j] = i[k] * gamma_adv[k] * gamma_bar[l] - i[l] * gamma_adv[l] * gamma_bar[k];
    }
    (momentum_slot, advected_slot)
}

/// The gradient of the pulled-back Hamiltonian `q -> H(q, gamma(q))` by
/// central differences; it vanishes exactly when `H . gamma` is locally
/// constant.
pub fn hj_residual_canonical(
    sys: &CanonicalSystem,
    section: &CanonicalSection,
    q: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    let composed = |q: &[f64]| -> Result<f64> { sys.energy(q, &section.eval(q)?) };
    let mut out = vec![0.0; q.len()];
    let mut probe = q.to_vec();
    for i in 0..q.len() {
        probe[i] = q[i] + step;
        let plus = composed(&probe)?;
        probe[i] = q[i] - step;
        let minus = composed(&probe)?;
        probe[i] = q[i];
        out[i] = (plus - minus) / (2.0 * step);
    }
    Ok(out)
}

use crate::error::{Error, Result};
use crate::lie::{pairing, Algebra, AlgebraVector, DualVector, Group, GroupElement};

fn check_group_algebra(g: &GroupElement, algebra: Algebra) -> Result<()> {
    if g.group().algebra() == algebra {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch {
            expected: g.group().name(),
            found: algebra.name(),
        })
    }
}

/// The adjoint action `Ad_g xi`.
///
/// SO(3): `Ad_A w = A w`. SE(3): `Ad_(A,a)(w, u) = (A w, A u + a x A w)`.
pub fn adjoint_action(g: &GroupElement, xi: &AlgebraVector) -> Result<AlgebraVector> {
    check_group_algebra(g, xi.algebra())?;
    match g.group() {
        Group::So3 => Ok(AlgebraVector::so3(g.rot() * xi.omega())),
        Group::Se3 => {
            let rw = g.rot() * xi.omega();
            Ok(AlgebraVector::se3(
                rw,
                g.rot() * xi.linear() + g.trans().cross(&rw),
            ))
        }
    }
}

/// The coadjoint action on the dual: the dual map of `Ad_{g^-1}`, i.e. the
/// unique vector with `<coadjoint_action(g, mu), xi> = <mu, Ad_{g^-1} xi>`
/// for all `xi`.
///
/// Computed from that defining identity against the algebra basis rather than
/// from a closed form, so the sign convention is fixed by `adjoint_action`.
pub fn coadjoint_action(g: &GroupElement, mu: &DualVector) -> Result<DualVector> {
    check_group_algebra(g, mu.algebra())?;
    let ginv = g.inverse();
    let algebra = mu.algebra();
    let mut components = [0.0; 6];
    for (i, slot) in components.iter_mut().take(algebra.dim()).enumerate() {
        let basis = AlgebraVector::basis(algebra, i);
        *slot = pairing(mu, &adjoint_action(&ginv, &basis)?)?;
    }
    Ok(DualVector::from_slice(
        algebra,
        &components[..algebra.dim()],
    ))
}

/// The Lie bracket `ad_xi eta = [xi, eta]`.
///
/// so(3): the cross product. se(3): the semidirect-product bracket
/// `[(w1,u1),(w2,u2)] = (w1 x w2, w1 x u2 - w2 x u1)`.
pub fn ad(xi: &AlgebraVector, eta: &AlgebraVector) -> Result<AlgebraVector> {
    xi.algebra().check_match(eta.algebra())?;
    match xi.algebra() {
        Algebra::So3 => Ok(AlgebraVector::so3(xi.omega().cross(&eta.omega()))),
        Algebra::Se3 => Ok(AlgebraVector::se3(
            xi.omega().cross(&eta.omega()),
            xi.omega().cross(&eta.linear()) - eta.omega().cross(&xi.linear()),
        )),
    }
}

/// The infinitesimal coadjoint action `ad*_xi mu`: the unique vector with
/// `<coad(xi, mu), eta> = <mu, ad(xi, eta)>` for all `eta`.
///
/// Like [`coadjoint_action`], derived from the pairing identity on the basis.
pub fn coad(xi: &AlgebraVector, mu: &DualVector) -> Result<DualVector> {
    xi.algebra().check_match(mu.algebra())?;
    let algebra = xi.algebra();
    let mut components = [0.0; 6];
    for (i, slot) in components.iter_mut().take(algebra.dim()).enumerate() {
        let basis = AlgebraVector::basis(algebra, i);
        *slot = pairing(mu, &ad(xi, &basis)?)?;
    }
    Ok(DualVector::from_slice(
        algebra,
        &components[..algebra.dim()],
    ))
}

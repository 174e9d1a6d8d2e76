use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::lie::{Algebra, AlgebraVector};

/// Orthogonality defect above which a rotation matrix is re-orthonormalized.
const ORTHO_PROJECT_THRESHOLD: f64 = 1e-10;
/// Defect above which an input matrix is rejected instead of repaired.
const ORTHO_REPAIR_LIMIT: f64 = 1e-6;
/// Rotation angles within this distance of pi are outside the domain of `log_group`.
const LOG_ANGLE_MARGIN: f64 = 1e-6;

/// The hat map R^3 -> so(3): `hat(v) * w == v x w` for all w.
pub fn hat(v: Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// Inverse of [`hat`]. Rejects matrices whose symmetric part exceeds 1e-9 in max-norm.
pub fn vee(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let defect = sym.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if defect > 1e-9 {
        return Err(Error::NotSkewSymmetric { defect });
    }
    Ok(Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    ))
}

/// Nearest rotation in the Frobenius sense, via SVD with a determinant fix.
pub fn polar_project(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::NotARotation {
                defect: f64::INFINITY,
                det: m.determinant(),
            })
        }
    };
    let flip = (u * v_t).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, flip));
    Ok(u * fix * v_t)
}

fn orthogonality_defect(r: &Matrix3<f64>) -> f64 {
    let gram = r.transpose() * r - Matrix3::identity();
    gram.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Accepts a matrix as a rotation, repairing small orthogonality drift.
fn validate_rotation(r: Matrix3<f64>) -> Result<Matrix3<f64>> {
    let defect = orthogonality_defect(&r);
    let det = r.determinant();
    if !r.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("rotation matrix"));
    }
    if det <= 0.0 || defect > ORTHO_REPAIR_LIMIT {
        return Err(Error::NotARotation { defect, det });
    }
    let r = if defect > ORTHO_PROJECT_THRESHOLD {
        polar_project(&r)?
    } else {
        r
    };
    let defect = orthogonality_defect(&r);
    let det = r.determinant();
    if defect > 1e-10 || (det - 1.0).abs() > 1e-10 {
        return Err(Error::NotARotation { defect, det });
    }
    Ok(r)
}

/// Which Lie group an element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    So3,
    Se3,
}

impl Group {
    pub fn algebra(self) -> Algebra {
        match self {
            Group::So3 => Algebra::So3,
            Group::Se3 => Algebra::Se3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::So3 => "SO3",
            Group::Se3 => "SE3",
        }
    }
}

/// An element of SO(3) or SE(3).
///
/// The rotation block is stored as an explicit 3x3 matrix; the translation is
/// meaningful only for SE(3) and held at zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    group: Group,
    rot: Matrix3<f64>,
    trans: Vector3<f64>,
}

impl GroupElement {
    pub fn identity(group: Group) -> Self {
        GroupElement {
            group,
            rot: Matrix3::identity(),
            trans: Vector3::zeros(),
        }
    }

    /// An SO(3) element from a rotation matrix. Drift beyond 1e-10 in the
    /// orthogonality defect is repaired by polar projection; matrices that are
    /// not close to a rotation are rejected.
    pub fn rotation(r: Matrix3<f64>) -> Result<Self> {
        Ok(GroupElement {
            group: Group::So3,
            rot: validate_rotation(r)?,
            trans: Vector3::zeros(),
        })
    }

    /// An SE(3) element from a rotation matrix and a translation.
    pub fn rigid_motion(r: Matrix3<f64>, v: Vector3<f64>) -> Result<Self> {
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("translation vector"));
        }
        Ok(GroupElement {
            group: Group::Se3,
            rot: validate_rotation(r)?,
            trans: v,
        })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn rot(&self) -> &Matrix3<f64> {
        &self.rot
    }

    pub fn trans(&self) -> Vector3<f64> {
        self.trans
    }

    /// Group product `self * other`. For SE(3): `(R1,v1)(R2,v2) = (R1 R2, R1 v2 + v1)`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.group != other.group {
            return Err(Error::AlgebraMismatch {
                expected: self.group.name(),
                found: other.group.name(),
            });
        }
        Ok(GroupElement {
            group: self.group,
            rot: validate_rotation(self.rot * other.rot)?,
            trans: self.rot * other.trans + self.trans,
        })
    }

    pub fn inverse(&self) -> GroupElement {
        let rt = self.rot.transpose();
        GroupElement {
            group: self.group,
            rot: rt,
            trans: -(rt * self.trans),
        }
    }
}

/// Rodrigues coefficients `(sin t / t, (1 - cos t)/t^2, (t - sin t)/t^3)`,
/// with series fallbacks near zero.
fn rodrigues_coefficients(theta: f64) -> (f64, f64, f64) {
    if theta < 1e-4 {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        )
    } else {
        let (s, c) = theta.sin_cos();
        (
            s / theta,
            (1.0 - c) / (theta * theta),
            (theta - s) / (theta * theta * theta),
        )
    }
}

fn exp_so3(omega: Vector3<f64>) -> Matrix3<f64> {
    let theta = omega.norm();
    let (a, b, _) = rodrigues_coefficients(theta);
    let w = hat(omega);
    Matrix3::identity() + w * a + w * w * b
}

/// Left Jacobian of SO(3), the map sending the translational algebra slot to
/// the SE(3) translation: `exp(w, u) = (exp(hat(w)), V(w) u)`.
fn left_jacobian(omega: Vector3<f64>) -> Matrix3<f64> {
    let theta = omega.norm();
    let (_, b, c) = rodrigues_coefficients(theta);
    let w = hat(omega);
    Matrix3::identity() + w * b + w * w * c
}

/// The exponential map g -> G.
pub fn exp_group(xi: &AlgebraVector) -> GroupElement {
    match xi.algebra() {
        Algebra::So3 => GroupElement {
            group: Group::So3,
            rot: exp_so3(xi.omega()),
            trans: Vector3::zeros(),
        },
        Algebra::Se3 => GroupElement {
            group: Group::Se3,
            rot: exp_so3(xi.omega()),
            trans: left_jacobian(xi.omega()) * xi.linear(),
        },
    }
}

fn log_so3(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let cos_theta = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    if theta >= std::f64::consts::PI - LOG_ANGLE_MARGIN {
        return Err(Error::LogOutOfDomain { angle: theta });
    }
    // vee of the antisymmetric part, scaled by theta / (2 sin theta).
    let anti = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let scale = if theta < 1e-4 {
        let t2 = theta * theta;
        0.5 + t2 / 12.0 + 7.0 * t2 * t2 / 720.0
    } else {
        theta / (2.0 * theta.sin())
    };
    Ok(anti * scale)
}

/// Local inverse of [`exp_group`]. Rotation angles within 1e-6 of pi are
/// rejected as out of domain.
pub fn log_group(g: &GroupElement) -> Result<AlgebraVector> {
    let omega = log_so3(g.rot())?;
    match g.group() {
        Group::So3 => Ok(AlgebraVector::so3(omega)),
        Group::Se3 => {
            let v = left_jacobian(omega)
                .lu()
                .solve(&g.trans())
                .ok_or(Error::NonFinite("left Jacobian solve"))?;
            Ok(AlgebraVector::se3(omega, v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn hat_of_123_matches_displayed_matrix() {
        let m = hat(Vector3::new(1.0, 2.0, 3.0));
        let expected = Matrix3::new(
            0.0, -3.0, 2.0, //
            3.0, 0.0, -1.0, //
            -2.0, 1.0, 0.0,
        );
        assert_eq!(m, expected);
    }

    #[test]
    fn hat_of_zero_is_zero_matrix() {
        assert_eq!(hat(Vector3::zeros()), Matrix3::zeros());
    }

    #[test]
    fn hat_acts_as_cross_product() {
        // componentwise cross-product oracle
        let cross = |v: Vector3<f64>, w: Vector3<f64>| {
            Vector3::new(
                v.y * w.z - v.z * w.y,
                v.z * w.x - v.x * w.z,
                v.x * w.y - v.y * w.x,
            )
        };
        let v = Vector3::new(1.0, 0.0, 0.0);
        let w = Vector3::new(0.0, 1.0, 0.0);
        assert_eq!(hat(v) * w, Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(cross(v, w), Vector3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn vee_rejects_symmetric_contamination() {
        let mut m = hat(Vector3::new(1.0, 2.0, 3.0));
        m[(0, 0)] = 1e-6;
        assert!(matches!(vee(&m), Err(Error::NotSkewSymmetric { .. })));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let g = exp_group(&AlgebraVector::so3(Vector3::zeros()));
        assert_eq!(*g.rot(), Matrix3::identity());
    }

    #[test]
    fn exp_quarter_turn_about_x_sends_y_to_z() {
        // Rodrigues-formula oracle: R w = w cos t + (axis x w) sin t + axis (axis . w)(1 - cos t)
        let g = exp_group(&AlgebraVector::so3(Vector3::new(FRAC_PI_2, 0.0, 0.0)));
        let image = g.rot() * Vector3::new(0.0, 1.0, 0.0);
        assert_abs_diff_eq!(image, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn log_exp_round_trip() {
        let xi = AlgebraVector::so3(Vector3::new(0.1, -0.2, 0.3));
        let back = log_group(&exp_group(&xi)).unwrap();
        assert!((back - xi).norm_inf() <= 1e-10);
    }

    #[test]
    fn log_rejects_half_turns() {
        let g = exp_group(&AlgebraVector::so3(Vector3::new(PI - 1e-9, 0.0, 0.0)));
        assert!(matches!(log_group(&g), Err(Error::LogOutOfDomain { .. })));
    }

    #[test]
    fn se3_log_exp_round_trip() {
        let xi = AlgebraVector::se3(Vector3::new(0.3, -0.1, 0.4), Vector3::new(1.0, -2.0, 0.5));
        let back = log_group(&exp_group(&xi)).unwrap();
        assert!((back - xi).norm_inf() <= 1e-12);
    }

    #[test]
    fn compose_and_inverse_cancel() {
        let g = exp_group(&AlgebraVector::se3(
            Vector3::new(0.4, 0.2, -0.7),
            Vector3::new(0.3, 1.0, -0.2),
        ));
        let e = g.compose(&g.inverse()).unwrap();
        assert!(orthogonality_defect(e.rot()) <= 1e-14);
        assert!((e.rot() - Matrix3::identity()).norm() <= 1e-14);
        assert!(e.trans().norm() <= 1e-14);
    }

    #[test]
    fn rotation_constructor_repairs_small_drift() {
        let mut r = exp_so3(Vector3::new(0.3, 0.4, 0.5));
        r[(0, 0)] += 3e-8;
        let g = GroupElement::rotation(r).unwrap();
        assert!(orthogonality_defect(g.rot()) <= 1e-12);
    }

    #[test]
    fn rotation_constructor_rejects_garbage() {
        let m = Matrix3::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0);
        assert!(GroupElement::rotation(m).is_err());
        assert!(GroupElement::rotation(-Matrix3::identity()).is_err());
    }

    proptest! {
        #[test]
        fn prop_vee_hat_round_trip(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
            let v = Vector3::new(x, y, z);
            prop_assert_eq!(vee(&hat(v)).unwrap(), v);
        }

        #[test]
        fn prop_log_exp_round_trip_small(x in -0.57f64..0.57, y in -0.57f64..0.57, z in -0.57f64..0.57) {
            // the |xi| <= 1 round-trip region
            let xi = AlgebraVector::so3(Vector3::new(x, y, z));
            let back = log_group(&exp_group(&xi)).unwrap();
            prop_assert!((back - xi).norm_inf() <= 1e-8);
        }

        #[test]
        fn prop_group_invariants_preserved_by_exp_and_compose(
            a in proptest::array::uniform3(-3.0..3.0f64),
            b in proptest::array::uniform3(-3.0..3.0f64),
        ) {
            let g = exp_group(&AlgebraVector::so3(Vector3::from(a)));
            let h = exp_group(&AlgebraVector::so3(Vector3::from(b)));
            let gh = g.compose(&h).unwrap();
            prop_assert!(orthogonality_defect(gh.rot()) <= 1e-12);
            prop_assert!((gh.rot().determinant() - 1.0).abs() <= 1e-12);
        }
    }
}

//! Seeded random group elements.
//!
//! All sampling flows from a single 64-bit seed. Loops over sample indices use
//! one ChaCha stream per index, so a concurrent evaluation order cannot change
//! the result.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::lie::{exp_group, AlgebraVector, DualVector, Group, GroupElement};

/// RNG for sample `index` of a run seeded with `seed`.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn standard_normal_vector<R: Rng>(rng: &mut R) -> Vector3<f64> {
    Vector3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// A rotation drawn from the Haar measure on SO(3), via a uniformly random
/// unit quaternion (four standard normals, normalized).
pub fn haar_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    let (w, x, y, z) = loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if n > 1e-6 {
            break (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        }
    };
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// A random group element: Haar rotation, plus a standard-normal translation
/// for SE(3).
pub fn random_group_element<R: Rng>(group: Group, rng: &mut R) -> GroupElement {
    let rot = haar_rotation(rng);
    match group {
        Group::So3 => GroupElement::rotation(rot).expect("sampled rotation is valid"),
        Group::Se3 => GroupElement::rigid_motion(rot, standard_normal_vector(rng))
            .expect("sampled rigid motion is valid"),
    }
}

/// Sample `index` of the deterministic per-index scheme.
pub fn group_element_at(group: Group, seed: u64, index: u64) -> GroupElement {
    random_group_element(group, &mut indexed_rng(seed, index))
}

/// A random element of the coadjoint stabilizer of `mu`, i.e. a group element
/// `s` with `coadjoint_action(s, mu) = mu`.
///
/// For so*(3) these are rotations about `mu`. For se*(3) with advected slot
/// `gamma != 0` they are rotations `A` about `gamma` paired with the
/// translation `a = gamma x (I - A) pi / |gamma|^2 + t gamma`; when
/// `gamma = 0` the translation is unconstrained and `A` rotates about `pi`.
/// A zero `mu` is stabilized by the whole group.
pub fn stabilizer_element<R: Rng>(mu: &DualVector, rng: &mut R) -> GroupElement {
    let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let rotation_about = |axis: Vector3<f64>, rng: &mut R| -> Matrix3<f64> {
        if axis.norm() <= 1e-12 {
            haar_rotation(rng)
        } else {
            *exp_group(&AlgebraVector::so3(axis.normalize() * angle)).rot()
        }
    };
    match mu.algebra() {
        crate::lie::Algebra::So3 => {
            let rot = rotation_about(mu.pi(), rng);
            GroupElement::rotation(rot).expect("stabilizer rotation is valid")
        }
        crate::lie::Algebra::Se3 => {
            let (pi, gamma) = (mu.pi(), mu.gamma());
            let t: f64 = rng.gen_range(-1.0..1.0);
            if gamma.norm() > 1e-12 {
                let a = rotation_about(gamma, rng);
                let b = pi - a * pi;
                let trans = gamma.cross(&b) / gamma.norm_squared() + gamma * t;
                GroupElement::rigid_motion(a, trans).expect("stabilizer element is valid")
            } else {
                // gamma = 0: translations cannot move the momentum, so any
                // translation works; the rotation must fix pi.
                let a = rotation_about(pi, rng);
                GroupElement::rigid_motion(a, standard_normal_vector(rng))
                    .expect("stabilizer element is valid")
            }
        }
    }
}

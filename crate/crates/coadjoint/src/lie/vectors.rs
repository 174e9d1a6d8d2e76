use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Which Lie algebra a vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algebra {
    So3,
    Se3,
}

impl Algebra {
    /// Dimension of the algebra as a vector space.
    pub fn dim(self) -> usize {
        match self {
            Algebra::So3 => 3,
            Algebra::Se3 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algebra::So3 => "so3",
            Algebra::Se3 => "se3",
        }
    }

    pub(crate) fn check_match(self, other: Algebra) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch {
                expected: self.name(),
                found: other.name(),
            })
        }
    }
}

/// An element of so(3) or se(3).
///
/// so(3) vectors carry a single rotational slot; se(3) vectors carry a
/// rotational slot `omega` and a translational slot `linear`. Components are
/// stored flat so that finite-difference loops and integrators can treat both
/// algebras uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraVector {
    algebra: Algebra,
    data: [f64; 6],
}

/// An element of so*(3) or se*(3).
///
/// The so*(3) slot is the body angular momentum `pi`; se*(3) adds the advected
/// vector slot `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualVector {
    algebra: Algebra,
    data: [f64; 6],
}

macro_rules! flat_vector_impl {
    ($name:ident, $slot0:ident, $slot1:ident) => {
        impl $name {
            /// Builds an so(3)-side vector from its R^3 carrier.
            pub fn so3(v: Vector3<f64>) -> Self {
                Self {
                    algebra: Algebra::So3,
                    data: [v.x, v.y, v.z, 0.0, 0.0, 0.0],
                }
            }

            /// Builds an se(3)-side vector from its two R^3 slots.
            pub fn se3(a: Vector3<f64>, b: Vector3<f64>) -> Self {
                Self {
                    algebra: Algebra::Se3,
                    data: [a.x, a.y, a.z, b.x, b.y, b.z],
                }
            }

            pub fn zero(algebra: Algebra) -> Self {
                Self {
                    algebra,
                    data: [0.0; 6],
                }
            }

            /// The i-th standard basis vector (components are orthonormal under
            /// the Euclidean pairing).
            pub fn basis(algebra: Algebra, i: usize) -> Self {
                assert!(i < algebra.dim(), "basis index out of range");
                let mut data = [0.0; 6];
                data[i] = 1.0;
                Self { algebra, data }
            }

            pub fn from_slice(algebra: Algebra, components: &[f64]) -> Self {
                assert_eq!(components.len(), algebra.dim(), "component count mismatch");
                let mut data = [0.0; 6];
                data[..components.len()].copy_from_slice(components);
                Self { algebra, data }
            }

            pub fn algebra(&self) -> Algebra {
                self.algebra
            }

            pub fn dim(&self) -> usize {
                self.algebra.dim()
            }

            pub fn components(&self) -> &[f64] {
                &self.data[..self.algebra.dim()]
            }

            pub fn component(&self, i: usize) -> f64 {
                assert!(i < self.dim(), "component index out of range");
                self.data[i]
            }

            /// First R^3 slot.
            pub fn $slot0(&self) -> Vector3<f64> {
                Vector3::new(self.data[0], self.data[1], self.data[2])
            }

            /// Second R^3 slot; zero for so(3)-side vectors.
            pub fn $slot1(&self) -> Vector3<f64> {
                Vector3::new(self.data[3], self.data[4], self.data[5])
            }

            pub fn is_finite(&self) -> bool {
                self.components().iter().all(|c| c.is_finite())
            }

            pub fn norm_inf(&self) -> f64 {
                self.components().iter().fold(0.0, |m, c| m.max(c.abs()))
            }

            pub fn norm(&self) -> f64 {
                self.components().iter().map(|c| c * c).sum::<f64>().sqrt()
            }
        }

        impl std::ops::Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                assert_eq!(self.algebra, rhs.algebra, "algebra mismatch in +");
                let mut data = self.data;
                for (d, r) in data.iter_mut().zip(rhs.data.iter()) {
                    *d += r;
                }
                Self {
                    algebra: self.algebra,
                    data,
                }
            }
        }

        impl std::ops::Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                assert_eq!(self.algebra, rhs.algebra, "algebra mismatch in -");
                let mut data = self.data;
                for (d, r) in data.iter_mut().zip(rhs.data.iter()) {
                    *d -= r;
                }
                Self {
                    algebra: self.algebra,
                    data,
                }
            }
        }

        impl std::ops::Neg for $name {
            type Output = Self;
            fn neg(self) -> Self {
                self * -1.0
            }
        }

        impl std::ops::Mul<f64> for $name {
            type Output = Self;
            fn mul(self, s: f64) -> Self {
                let mut data = self.data;
                for d in data.iter_mut() {
                    *d *= s;
                }
                Self {
                    algebra: self.algebra,
                    data,
                }
            }
        }
    };
}

flat_vector_impl!(AlgebraVector, omega, linear);
flat_vector_impl!(DualVector, pi, gamma);

/// The duality pairing `<mu, xi>`: the Euclidean dot product on components.
pub fn pairing(mu: &DualVector, xi: &AlgebraVector) -> Result<f64> {
    mu.algebra.check_match(xi.algebra)?;
    Ok(mu
        .components()
        .iter()
        .zip(xi.components())
        .map(|(m, x)| m * x)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_is_euclidean_dot() {
        let mu = DualVector::so3(Vector3::new(1.0, 2.0, 3.0));
        let xi = AlgebraVector::so3(Vector3::new(4.0, -5.0, 6.0));
        assert_eq!(pairing(&mu, &xi).unwrap(), 4.0 - 10.0 + 18.0);
    }

    #[test]
    fn pairing_rejects_mixed_algebras() {
        let mu = DualVector::so3(Vector3::zeros());
        let xi = AlgebraVector::se3(Vector3::zeros(), Vector3::zeros());
        assert!(matches!(
            pairing(&mu, &xi),
            Err(Error::AlgebraMismatch { .. })
        ));
    }

    #[test]
    fn pairing_nondegenerate_on_bases() {
        for algebra in [Algebra::So3, Algebra::Se3] {
            for i in 0..algebra.dim() {
                for j in 0..algebra.dim() {
                    let mu = DualVector::basis(algebra, i);
                    let xi = AlgebraVector::basis(algebra, j);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_eq!(pairing(&mu, &xi).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn se3_slots_round_trip() {
        let xi = AlgebraVector::se3(Vector3::new(1.0, 2.0, 3.0), Vector3::new(4.0, 5.0, 6.0));
        assert_eq!(xi.omega(), Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(xi.linear(), Vector3::new(4.0, 5.0, 6.0));
        assert_eq!(xi.dim(), 6);
    }

    #[test]
    fn arithmetic_matches_componentwise() {
        let a = AlgebraVector::so3(Vector3::new(1.0, 2.0, 3.0));
        let b = AlgebraVector::so3(Vector3::new(0.5, -1.0, 2.0));
        assert_eq!((a + b).omega(), Vector3::new(1.5, 1.0, 5.0));
        assert_eq!((a - b).omega(), Vector3::new(0.5, 3.0, 1.0));
        assert_eq!((a * 2.0).omega(), Vector3::new(2.0, 4.0, 6.0));
        assert_eq!((-a).norm_inf(), 3.0);
    }
}

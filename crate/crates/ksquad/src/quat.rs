//! Quaternion algebra and 3-vectors.
//!
//! Quaternions are written z = z0 + z1 i + z2 j + z3 k with the scalar part
//! kept separate from the imaginary part, so a quaternion is a pair
//! (re, im) with im a [`Vec3`]. Purely imaginary quaternions are identified
//! with vectors in R^3 throughout; the Hopf-type maps in this crate land in
//! that subspace.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Vector in R^3, also standing in for a purely imaginary quaternion.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const EX: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const EY: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const EZ: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::AtOrigin { op: "Vec3::normalized" });
        }
        Ok(self / n)
    }

    /// Rotation about the x axis by `angle`.
    pub fn rot_x(self, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        Vec3 {
            x: self.x,
            y: c * self.y - s * self.z,
            z: s * self.y + c * self.z,
        }
    }

    /// Rotation about the z axis by `angle`.
    pub fn rot_z(self, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        Vec3 {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
            z: self.z,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Quaternion with scalar part `re` and imaginary part `im`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub re: f64,
    pub im: Vec3,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion { re: 0.0, im: Vec3::ZERO };
    pub const ONE: Quaternion = Quaternion { re: 1.0, im: Vec3::ZERO };
    pub const I: Quaternion = Quaternion { re: 0.0, im: Vec3::EX };
    pub const J: Quaternion = Quaternion { re: 0.0, im: Vec3::EY };
    pub const K: Quaternion = Quaternion { re: 0.0, im: Vec3::EZ };

    pub const fn new(re: f64, im: Vec3) -> Self {
        Quaternion { re, im }
    }

    pub const fn from_parts(z0: f64, z1: f64, z2: f64, z3: f64) -> Self {
        Quaternion { re: z0, im: Vec3::new(z1, z2, z3) }
    }

    pub const fn from_im(v: Vec3) -> Self {
        Quaternion { re: 0.0, im: v }
    }

    pub const fn scalar(s: f64) -> Self {
        Quaternion { re: s, im: Vec3::ZERO }
    }

    /// Unit quaternion cos(theta) + sin(theta) i, the circle through 1 and i.
    pub fn phase(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Quaternion { re: c, im: Vec3::new(s, 0.0, 0.0) }
    }

    pub fn conj(self) -> Self {
        Quaternion { re: self.re, im: -self.im }
    }

    pub fn norm_sq(self) -> f64 {
        self.re * self.re + self.im.norm_sq()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Euclidean inner product of R^4, equal to Re{conj(self) * other}.
    pub fn dot(self, other: Quaternion) -> f64 {
        self.re * other.re + self.im.dot(other.im)
    }

    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sq();
        if n2 == 0.0 {
            return Err(Error::AtOrigin { op: "Quaternion::inverse" });
        }
        Ok(self.conj() / n2)
    }

    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::AtOrigin { op: "Quaternion::normalized" });
        }
        Ok(self / n)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.re, self.im.x, self.im.y, self.im.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::from_parts(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.x.is_finite() && self.im.y.is_finite() && self.im.z.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.re, -self.im)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    // Re{zw} = Re z Re w - <Im z, Im w>, Im{zw} = Re z Im w + Re w Im z + Im z x Im w.
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion {
            re: self.re * o.re - self.im.dot(o.im),
            im: self.re * o.im + o.re * self.im + self.im.cross(o.im),
        }
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.re * s, self.im * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.re / s, self.im / s)
    }
}

/// Conjugation v -> conj(rho) v rho of an imaginary quaternion by a unit
/// quaternion. The result is again purely imaginary; the numerically tiny
/// scalar part is dropped on output.
pub fn rotate(rho: Quaternion, v: Vec3) -> Result<Vec3> {
    let n = rho.norm();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnit { op: "rotate", norm: n });
    }
    Ok((rho.conj() * Quaternion::from_im(v) * rho).im)
}

/// Hopf-type map z -> conj(z) i z, landing in the imaginary quaternions.
/// |hopf(z)| = |z|^2 and hopf is invariant under z -> e^{i theta} z.
pub fn hopf(z: Quaternion) -> Vec3 {
    (z.conj() * Quaternion::I * z).im
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close_q(a: Quaternion, b: Quaternion, tol: f64) {
        assert!((a - b).norm() <= tol, "quaternions differ: {a:?} vs {b:?}");
    }

    fn assert_close_v(a: Vec3, b: Vec3, tol: f64) {
        assert!((a - b).norm() <= tol, "vectors differ: {a:?} vs {b:?}");
    }

    fn random_quat(rng: &mut ChaCha8Rng) -> Quaternion {
        Quaternion::from_parts(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    #[test]
    fn multiplication_table() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, -k);
        assert_eq!(k * j, -i);
        assert_eq!(i * k, -j);
        assert_eq!(i * i, -Quaternion::ONE);
        assert_eq!(j * j, -Quaternion::ONE);
        assert_eq!(k * k, -Quaternion::ONE);
    }

    #[test]
    fn product_example() {
        let a = Quaternion::ONE + Quaternion::I;
        let b = Quaternion::ONE + Quaternion::J;
        assert_eq!(a * b, Quaternion::from_parts(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn conjugation_is_an_anti_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            assert_close_q(a.conj().conj(), a, 0.0);
            assert_close_q((a * b).conj(), b.conj() * a.conj(), 1e-12);
        }
    }

    #[test]
    fn norm_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            let lhs = (a * b).norm();
            let rhs = a.norm() * b.norm();
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }

    #[test]
    fn product_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            let c = random_quat(&mut rng);
            let lhs = (a * b) * c;
            let rhs = a * (b * c);
            assert_close_q(lhs, rhs, 1e-12 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn inverse_recovers_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let a = random_quat(&mut rng);
            if a.norm() < 1e-3 {
                continue;
            }
            assert_close_q(a * a.inverse().unwrap(), Quaternion::ONE, 1e-12);
        }
        assert_eq!(
            Quaternion::ZERO.inverse(),
            Err(Error::AtOrigin { op: "Quaternion::inverse" })
        );
    }

    #[test]
    fn rotate_fixed_values() {
        // rho = (1 + i)/sqrt(2) sends j to -k under v -> conj(rho) v rho.
        let rho = (Quaternion::ONE + Quaternion::I) / 2.0f64.sqrt();
        assert_close_v(rotate(rho, Vec3::EY).unwrap(), -Vec3::EZ, 1e-15);
        // Antipodal rotations act identically.
        assert_close_v(rotate(-rho, Vec3::EY).unwrap(), -Vec3::EZ, 1e-15);
        // i fixes the x axis and reverses the others.
        assert_close_v(rotate(Quaternion::I, Vec3::EY).unwrap(), -Vec3::EY, 1e-15);
        assert_close_v(rotate(-Quaternion::I, Vec3::EY).unwrap(), -Vec3::EY, 1e-15);
        assert_close_v(rotate(Quaternion::ONE, Vec3::new(0.3, -0.4, 0.5)).unwrap(), Vec3::new(0.3, -0.4, 0.5), 0.0);
        assert!(matches!(
            rotate(Quaternion::scalar(0.5), Vec3::EX),
            Err(Error::NonUnit { op: "rotate", .. })
        ));
    }

    #[test]
    fn rotate_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..300 {
            let rho = random_quat(&mut rng).normalized().unwrap();
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let w = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let rv = rotate(rho, v).unwrap();
            let rw = rotate(rho, w).unwrap();
            assert!((rv.norm() - v.norm()).abs() <= 1e-12 * (1.0 + v.norm()));
            assert!((rv.dot(rw) - v.dot(w)).abs() <= 1e-12 * (1.0 + v.norm() * w.norm()));
        }
    }

    #[test]
    fn hopf_fixed_values() {
        assert_close_v(hopf(Quaternion::ONE), Vec3::EX, 0.0);
        assert_close_v(hopf(Quaternion::J), -Vec3::EX, 0.0);
        assert_close_v(hopf(Quaternion::ONE + Quaternion::K), Vec3::new(0.0, -2.0, 0.0), 1e-15);
    }

    #[test]
    fn hopf_scales_as_norm_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..300 {
            let z = random_quat(&mut rng);
            let h = hopf(z);
            assert!((h.norm() - z.norm_sq()).abs() <= 1e-12 * (1.0 + z.norm_sq()));
        }
    }

    #[test]
    fn hopf_is_fiber_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let z = random_quat(&mut rng);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let h1 = hopf(z);
            let h2 = hopf(Quaternion::phase(theta) * z);
            assert_close_v(h1, h2, 1e-12 * (1.0 + z.norm_sq()));
        }
    }

    #[test]
    fn vector_algebra_basics() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-2.0, 0.5, 1.0);
        assert_close_v(a.cross(b), Vec3::new(2.0 * 1.0 - 3.0 * 0.5, 3.0 * -2.0 - 1.0 * 1.0, 1.0 * 0.5 - 2.0 * -2.0), 0.0);
        assert_eq!(a.cross(a), Vec3::ZERO);
        assert!((a.cross(b).dot(a)).abs() < 1e-15);
        assert_close_v(Vec3::EX.rot_z(std::f64::consts::FRAC_PI_2), Vec3::EY, 1e-15);
        assert_close_v(Vec3::EY.rot_x(std::f64::consts::FRAC_PI_2), Vec3::EZ, 1e-15);
    }
}

//! Seeded random samples of the geometric objects used across the test and
//! verification suites. Everything is driven by a caller-owned ChaCha8
//! generator so that runs are reproducible from a single seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::kepler::CartesianOrbitState;
use crate::ksreg::{bl, KSState};
use crate::quat::{Quaternion, Vec3};

/// Quaternion with entries uniform in [-b, b].
pub fn quaternion_in(rng: &mut ChaCha8Rng, b: f64) -> Quaternion {
    Quaternion::from_parts(
        rng.gen_range(-b..b),
        rng.gen_range(-b..b),
        rng.gen_range(-b..b),
        rng.gen_range(-b..b),
    )
}

/// Uniform direction on the 2-sphere.
pub fn unit_vec3(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Vector with entries uniform in [-b, b].
pub fn vec3_in(rng: &mut ChaCha8Rng, b: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-b..b), rng.gen_range(-b..b), rng.gen_range(-b..b))
}

/// Orthonormal pair of directions.
pub fn orthonormal_pair(rng: &mut ChaCha8Rng) -> (Vec3, Vec3) {
    loop {
        let e1 = unit_vec3(rng);
        let raw = vec3_in(rng, 1.0);
        let e2 = raw - e1 * raw.dot(e1);
        if e2.norm() > 1e-2 {
            return (e1, e2 / e2.norm());
        }
    }
}

/// Generic point of the ambient space T*H with |z| bounded away from 0.
pub fn ambient_state(rng: &mut ChaCha8Rng) -> KSState {
    loop {
        let z = quaternion_in(rng, 1.5);
        if z.norm() < 0.5 {
            continue;
        }
        return KSState::new(z, quaternion_in(rng, 1.5));
    }
}

/// Point of Sigma-zero (BL = 0, z != 0), by projecting the momentum:
/// BL(z, w + s i z) = BL(z, w) - s |z|^2.
pub fn sigma_state(rng: &mut ChaCha8Rng) -> KSState {
    let s = ambient_state(rng);
    let shift = bl(s.z, s.w) / s.z.norm_sq();
    KSState::new(s.z, s.w + shift * (Quaternion::I * s.z))
}

/// Generic physical state with position bounded away from collision.
pub fn cartesian_state(rng: &mut ChaCha8Rng) -> CartesianOrbitState {
    loop {
        let q = vec3_in(rng, 1.5);
        if q.norm() < 0.3 {
            continue;
        }
        return CartesianOrbitState::new(vec3_in(rng, 1.5), q);
    }
}

/// Tangent vector to a chart of the given dimension, entries in [-1, 1].
pub fn tangent(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

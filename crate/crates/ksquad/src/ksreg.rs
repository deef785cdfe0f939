//! Quaternionic regularization of the spatial Kepler problem.
//!
//! The ambient phase space is T*H = H x H with coordinates (z, w), symplectic
//! form Re{d conj(w) ^ dz} = sum_i dw_i ^ dz_i, and the bilinear first
//! integral BL(z, w) = Re{conj(z) i w}. On the 7-dimensional cone
//! Sigma = {BL = 0} the map
//!
//!   (z, w) |-> (Q, P) = (conj(z) i z, conj(z) i w / (2 |z|^2))
//!
//! intertwines the circle action (z, w) -> (e^{i theta} z, e^{i theta} w)
//! with nothing at all: it is invariant, and it induces a symplectomorphism
//! of Sigma-slash-circle minus the collision locus onto T*(R^3 minus 0).
//! Restricted to a coordinate plane pair it is the planar Levi-Civita map
//! z -> z^2 on complex numbers.
//!
//! The regularized Hamiltonian |w|^2/(8 mu) + f |z|^2 - mu M equals
//! |z|^2 (T + f) on Sigma, so its flow is the Kepler flow of energy -f up to
//! the time change dt = |z|^2 dtau, with the collision set {z = 0} glued in
//! as regular points of a linear flow.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kepler::{self, CartesianOrbitState, DelaunayElements, KeplerMassParams};
use crate::quat::{Quaternion, Vec3};
use crate::verify::HamiltonianSystem;

/// Point of the regularized phase space T*H.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KSState {
    pub z: Quaternion,
    pub w: Quaternion,
}

impl KSState {
    pub const fn new(z: Quaternion, w: Quaternion) -> Self {
        KSState { z, w }
    }

    /// Chart slice [z0..z3, w0..w3] with z the position block.
    pub fn to_chart(self) -> [f64; 8] {
        let z = self.z.to_array();
        let w = self.w.to_array();
        [z[0], z[1], z[2], z[3], w[0], w[1], w[2], w[3]]
    }

    pub fn from_chart(c: &[f64]) -> Self {
        KSState {
            z: Quaternion::from_parts(c[0], c[1], c[2], c[3]),
            w: Quaternion::from_parts(c[4], c[5], c[6], c[7]),
        }
    }
}

/// Bilinear form BL(z, w) = Re{conj(z) i w}, the moment map of the circle
/// action up to sign. Its zero set is the cone Sigma.
pub fn bl(z: Quaternion, w: Quaternion) -> f64 {
    (z.conj() * Quaternion::I * w).re
}

/// Circle action (z, w) -> (e^{i theta} z, e^{i theta} w).
pub fn fiber_action(theta: f64, s: &KSState) -> KSState {
    let u = Quaternion::phase(theta);
    KSState::new(u * s.z, u * s.w)
}

/// The regularizing map (z, w) -> (Q, P). Q = conj(z) i z is exactly
/// imaginary; the imaginary part of conj(z) i w / (2 |z|^2) is taken for P,
/// which on Sigma discards nothing (the real part is BL / (2 |z|^2), see
/// [`momentum_defect`]).
pub fn ks_map(s: &KSState) -> Result<CartesianOrbitState> {
    let n2 = s.z.norm_sq();
    if n2 == 0.0 {
        return Err(Error::AtOrigin { op: "ks_map" });
    }
    let q = (s.z.conj() * Quaternion::I * s.z).im;
    let p = (s.z.conj() * Quaternion::I * s.w).im / (2.0 * n2);
    Ok(CartesianOrbitState::new(p, q))
}

/// Magnitude of the discarded real part of the momentum image,
/// |BL| / (2 |z|^2). Zero exactly on Sigma.
pub fn momentum_defect(s: &KSState) -> Result<f64> {
    let n2 = s.z.norm_sq();
    if n2 == 0.0 {
        return Err(Error::AtOrigin { op: "momentum_defect" });
    }
    Ok(bl(s.z, s.w).abs() / (2.0 * n2))
}

/// Degenerate-direction threshold for the rotation section: fall back once
/// 1 + <i, e1> drops below 1/32.
const SECTION_FALLBACK: f64 = 0.96875;

/// A unit quaternion x with conj(x) i x = e1, for unit imaginary e1.
///
/// Generic branch: x = (1 - i e1) / |1 - i e1|, whose i-component vanishes
/// (it maximizes the real part over its fiber, a deterministic section).
/// Near e1 = -i that denominator degenerates, so the rotation is routed
/// through j: x = rho y with conj(rho) i rho = j and conj(y) j y = e1.
pub fn rotation_sending_i_to(e1: Vec3) -> Result<Quaternion> {
    let n = e1.norm();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnit { op: "rotation_sending_i_to", norm: n });
    }
    if e1.x > -SECTION_FALLBACK {
        // 1 - i e1 = (1 + e1.x) - e1.z j + e1.y k.
        let x = Quaternion::from_parts(1.0 + e1.x, 0.0, e1.z, -e1.y);
        Ok(x / x.norm())
    } else {
        // rho = (1 - k) / sqrt(2) satisfies conj(rho) i rho = j.
        let rho = Quaternion::from_parts(1.0, 0.0, 0.0, -1.0) / std::f64::consts::SQRT_2;
        // 1 - j e1 = (1 + e1.y) - e1.z i + e1.x k.
        let y = Quaternion::from_parts(1.0 + e1.y, -e1.z, 0.0, e1.x);
        Ok(rho * (y / y.norm()))
    }
}

/// Section-plus-phase lift of a physical state: ks_lift(c, 0) has
/// z = sqrt(||Q||) x0(Q / ||Q||) with x0 the deterministic rotation section,
/// and w = -2 i z P, which inverts ks_map exactly and lands on Sigma
/// exactly. The phase argument moves the lift along its fiber.
pub fn ks_lift(c: &CartesianOrbitState, theta: f64) -> Result<KSState> {
    let r = c.q.norm();
    if r == 0.0 {
        return Err(Error::AtOrigin { op: "ks_lift" });
    }
    let x0 = rotation_sending_i_to(c.q / r)?;
    let z = r.sqrt() * x0;
    let w = -2.0 * (Quaternion::I * z * Quaternion::from_im(c.p));
    Ok(fiber_action(theta, &KSState::new(z, w)))
}

/// Regularized Kepler Hamiltonian K = |w|^2 / (8 mu) + f |z|^2 - mu M.
pub fn ks_hamiltonian(s: &KSState, m: &KeplerMassParams, f: f64) -> f64 {
    s.w.norm_sq() / (8.0 * m.mu) + f * s.z.norm_sq() - m.mu * m.gm
}

/// The K-flow is linear: z' = w / (4 mu), w' = -2 f z.
pub struct KsFlow {
    pub m: KeplerMassParams,
    pub f: f64,
}

impl HamiltonianSystem for KsFlow {
    fn dim(&self) -> usize {
        8
    }
    fn grad(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..4 {
            out[i] = 2.0 * self.f * x[i];
            out[4 + i] = x[4 + i] / (4.0 * self.m.mu);
        }
    }
}

/// Unregularized Kepler flow of T(P, Q) on the [Q; P] chart.
pub struct KeplerFlow {
    pub m: KeplerMassParams,
}

impl HamiltonianSystem for KeplerFlow {
    fn dim(&self) -> usize {
        6
    }
    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let q = Vec3::new(x[0], x[1], x[2]);
        let r3 = q.norm().powi(3);
        let dq = q * (self.m.mu * self.m.gm / r3);
        out[0] = dq.x;
        out[1] = dq.y;
        out[2] = dq.z;
        out[3] = x[3] / self.m.mu;
        out[4] = x[4] / self.m.mu;
        out[5] = x[5] / self.m.mu;
    }
}

/// Elements of the osculating ellipse the K-flow of parameter f traces
/// through this state: the Kepler ellipse for the shifted gravitational
/// mass M + K(z, w) / mu^2, on which the shifted energy is exactly -f.
pub fn ks_ellipse_elements(s: &KSState, m: &KeplerMassParams, f: f64) -> Result<DelaunayElements> {
    let ftilde = ks_hamiltonian(s, m, f);
    let shifted = m.shifted(ftilde);
    if shifted.gm <= 0.0 {
        return Err(Error::ShiftedMassNonpositive { value: shifted.gm });
    }
    if f <= 0.0 {
        return Err(Error::NotElliptic { energy: -f });
    }
    let c = ks_map(s)?;
    kepler::elements_from_state(&c, &shifted)
}

/// Planar Levi-Civita map (z, w) -> (z^2, w / (2 conj(z))).
pub fn lc_map(z: Complex64, w: Complex64) -> Result<(Complex64, Complex64)> {
    if z == Complex64::ZERO {
        return Err(Error::AtOrigin { op: "lc_map" });
    }
    Ok((z * z, w / (2.0 * z.conj())))
}

/// Orthonormal quaternion pair (x, y) spanning the invariant plane over an
/// oriented coordinate plane span{e1, e2} in the image: conj(x) i x = e1,
/// conj(x) i y = e2, BL(x, y) = 0, <x, y> = 0.
pub fn lc_plane_basis(e1: Vec3, e2: Vec3) -> Result<(Quaternion, Quaternion)> {
    let defect = (e1.norm() - 1.0).abs().max((e2.norm() - 1.0).abs()).max(e1.dot(e2).abs());
    if defect > 1e-12 {
        return Err(Error::NonOrthonormal { op: "lc_plane_basis", defect });
    }
    let x = rotation_sending_i_to(e1)?;
    let y = -1.0 * (Quaternion::I * x * Quaternion::from_im(e2));
    Ok((x, y))
}

/// Largest deviation between the regularizing map evaluated on the invariant
/// plane of (e1, e2) and the planar Levi-Civita map in the plane
/// coordinates: the point c1 x + c2 y with momentum c3 x + c4 y is compared
/// against (z^2, w / (2 conj z)) for z = c1 + c2 i, w = c3 + c4 i under the
/// identification x, e1 -> 1 and y, e2 -> i.
pub fn ks_restriction_check(e1: Vec3, e2: Vec3, zc: Complex64, wc: Complex64) -> Result<f64> {
    if zc == Complex64::ZERO {
        return Err(Error::AtOrigin { op: "ks_restriction_check" });
    }
    let (x, y) = lc_plane_basis(e1, e2)?;
    let zq = zc.re * x + zc.im * y;
    let wq = wc.re * x + wc.im * y;
    let c = ks_map(&KSState::new(zq, wq))?;
    let (zi, wi) = lc_map(zc, wc)?;
    let q_expect = zi.re * e1 + zi.im * e2;
    let p_expect = wi.re * e1 + wi.im * e2;
    Ok((c.q - q_expect).norm().max((c.p - p_expect).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ks_map_fixed_values() {
        // (z, w) = (1, 2): Q = i, P = i.
        let s = KSState::new(Quaternion::ONE, Quaternion::scalar(2.0));
        let c = ks_map(&s).unwrap();
        assert!((c.q - Vec3::EX).norm() < 1e-15);
        assert!((c.p - Vec3::EX).norm() < 1e-15);
        // (z, w) = (j, 0): Q = -i, P = 0.
        let s = KSState::new(Quaternion::J, Quaternion::ZERO);
        let c = ks_map(&s).unwrap();
        assert!((c.q + Vec3::EX).norm() < 1e-15);
        assert_eq!(c.p, Vec3::ZERO);
        assert!(matches!(
            ks_map(&KSState::new(Quaternion::ZERO, Quaternion::ONE)),
            Err(Error::AtOrigin { .. })
        ));
    }

    #[test]
    fn ks_map_is_fiber_invariant_and_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..300 {
            let s = sampling::sigma_state(&mut rng);
            let c = ks_map(&s).unwrap();
            assert!((c.q.norm() - s.z.norm_sq()).abs() < 1e-12 * (1.0 + s.z.norm_sq()));
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let c2 = ks_map(&fiber_action(theta, &s)).unwrap();
            assert!((c.q - c2.q).norm() < 1e-12 * (1.0 + c.q.norm()));
            assert!((c.p - c2.p).norm() < 1e-12 * (1.0 + c.p.norm()));
        }
    }

    #[test]
    fn bl_is_conserved_by_the_fiber_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let s = sampling::ambient_state(&mut rng);
            let b = bl(s.z, s.w);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let s2 = fiber_action(theta, &s);
            assert!((bl(s2.z, s2.w) - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn rotation_section_hits_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..500 {
            let e1 = sampling::unit_vec3(&mut rng);
            let x = rotation_sending_i_to(e1).unwrap();
            assert!((x.norm() - 1.0).abs() < 1e-12);
            let img = crate::quat::rotate(x, Vec3::EX).unwrap();
            assert!((img - e1).norm() < 1e-12, "e1 = {e1:?}");
        }
        // Both branches on the axis itself.
        for e1 in [Vec3::EX, -Vec3::EX, Vec3::EY, Vec3::EZ, -Vec3::EZ] {
            let x = rotation_sending_i_to(e1).unwrap();
            assert!((crate::quat::rotate(x, Vec3::EX).unwrap() - e1).norm() < 1e-12);
        }
        // Near-antipodal directions exercise the fallback without losing
        // accuracy.
        for _ in 0..200 {
            let d = sampling::unit_vec3(&mut rng);
            let eps = 10f64.powf(rng.gen_range(-12.0..-2.0));
            let e1 = ((-Vec3::EX) + eps * d).normalized().unwrap();
            let x = rotation_sending_i_to(e1).unwrap();
            assert!((crate::quat::rotate(x, Vec3::EX).unwrap() - e1).norm() < 1e-12);
        }
    }

    #[test]
    fn lift_inverts_the_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for k in 0..500 {
            let c = sampling::cartesian_state(&mut rng);
            let theta = if k % 3 == 0 { 0.0 } else { rng.gen_range(0.0..std::f64::consts::TAU) };
            let s = ks_lift(&c, theta).unwrap();
            // Lands on Sigma exactly and inverts exactly (up to roundoff).
            assert!(bl(s.z, s.w).abs() < 1e-13 * (1.0 + s.z.norm() * s.w.norm()));
            let back = ks_map(&s).unwrap();
            assert!((back.q - c.q).norm() < 1e-12 * (1.0 + c.q.norm()));
            assert!((back.p - c.p).norm() < 1e-12 * (1.0 + c.p.norm()));
        }
    }

    #[test]
    fn lift_fixed_values() {
        // Q = i, P = i, theta = 0 lifts to (1, 2).
        let c = CartesianOrbitState::new(Vec3::EX, Vec3::EX);
        let s = ks_lift(&c, 0.0).unwrap();
        assert!((s.z - Quaternion::ONE).norm() < 1e-15);
        assert!((s.w - Quaternion::scalar(2.0)).norm() < 1e-15);
        // Q = -i, P = 0 routes through the fallback: z = -k (a point on the
        // fiber over j, as the section rule dictates).
        let c = CartesianOrbitState::new(Vec3::ZERO, -Vec3::EX);
        let s = ks_lift(&c, 0.0).unwrap();
        assert!((s.z + Quaternion::K).norm() < 1e-15, "z = {:?}", s.z);
        assert!(s.w.norm() < 1e-15);
    }

    #[test]
    fn fiber_sweep_of_the_lift_projects_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let c = sampling::cartesian_state(&mut rng);
        for k in 0..32 {
            let theta = std::f64::consts::TAU * k as f64 / 32.0;
            let s = ks_lift(&c, theta).unwrap();
            let back = ks_map(&s).unwrap();
            assert!((back.q - c.q).norm() < 1e-12);
            assert!((back.p - c.p).norm() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_factors_through_the_map() {
        // K = |z|^2 (T o ks_map + f) exactly on Sigma.
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..300 {
            let m = KeplerMassParams::new(rng.gen_range(0.3..2.0), rng.gen_range(0.3..2.0));
            let f = rng.gen_range(0.05..2.0);
            let s = sampling::sigma_state(&mut rng);
            let c = ks_map(&s).unwrap();
            let t = kepler::kepler_energy(&c, &m).unwrap();
            let k = ks_hamiltonian(&s, &m, f);
            let expect = s.z.norm_sq() * (t + f);
            assert!((k - expect).abs() < 1e-11 * (1.0 + k.abs() + t.abs()), "k = {k}, expect = {expect}");
        }
    }

    #[test]
    fn shifted_mass_energy_identity() {
        // On the shifted ellipse the energy is exactly -f.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..200 {
            let m = KeplerMassParams::new(rng.gen_range(0.3..2.0), rng.gen_range(0.3..2.0));
            let f = rng.gen_range(0.05..2.0);
            let s = sampling::sigma_state(&mut rng);
            let ftilde = ks_hamiltonian(&s, &m, f);
            let shifted = m.shifted(ftilde);
            if shifted.gm <= 0.0 {
                continue;
            }
            let c = ks_map(&s).unwrap();
            let t = kepler::kepler_energy(&c, &shifted).unwrap();
            assert!((t + f).abs() < 1e-11 * (1.0 + f), "t = {t}, f = {f}");
        }
    }

    #[test]
    fn lc_map_fixed_values() {
        let (z, w) = lc_map(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let (z, w) = lc_map(Complex64::new(0.0, 1.0), Complex64::ZERO).unwrap();
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(w, Complex64::ZERO);
        // Two-to-one: antipodal points map together.
        let (z1, w1) = lc_map(Complex64::new(0.7, -0.4), Complex64::new(0.2, 1.0)).unwrap();
        let (z2, w2) = lc_map(-Complex64::new(0.7, -0.4), -Complex64::new(0.2, 1.0)).unwrap();
        assert!((z1 - z2).norm() < 1e-15 && (w1 - w2).norm() < 1e-15);
    }

    #[test]
    fn plane_basis_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..300 {
            let (e1, e2) = sampling::orthonormal_pair(&mut rng);
            let (x, y) = lc_plane_basis(e1, e2).unwrap();
            assert!((x.norm() - 1.0).abs() < 1e-12);
            assert!((y.norm() - 1.0).abs() < 1e-12);
            assert!(bl(x, y).abs() < 1e-12);
            assert!(x.dot(y).abs() < 1e-12);
            let img1 = (x.conj() * Quaternion::I * x).im;
            let img2 = (x.conj() * Quaternion::I * y).im;
            assert!((img1 - e1).norm() < 1e-12);
            assert!((img2 - e2).norm() < 1e-12);
            // Orthonormal pairs with BL = 0 satisfy conj(x) i x = -conj(y) i y
            // and |conj(x) i y| = 1.
            let hy = (y.conj() * Quaternion::I * y).im;
            assert!((img1 + hy).norm() < 1e-12);
            assert!(((x.conj() * Quaternion::I * y).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_basis_fixed_values() {
        let (x, y) = lc_plane_basis(Vec3::EX, Vec3::EY).unwrap();
        assert!((x - Quaternion::ONE).norm() < 1e-15);
        assert!((y + Quaternion::K).norm() < 1e-15);
        let (x, y) = lc_plane_basis(Vec3::EX, Vec3::EZ).unwrap();
        assert!((x - Quaternion::ONE).norm() < 1e-15);
        assert!((y - Quaternion::J).norm() < 1e-15);
        assert!(matches!(
            lc_plane_basis(Vec3::EX, Vec3::new(0.1, 1.0, 0.0)),
            Err(Error::NonOrthonormal { .. })
        ));
    }

    #[test]
    fn restriction_agrees_with_levi_civita() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        for _ in 0..300 {
            let (e1, e2) = sampling::orthonormal_pair(&mut rng);
            let zc = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let wc = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            if zc.norm() < 1e-2 {
                continue;
            }
            let r = ks_restriction_check(e1, e2, zc, wc).unwrap();
            assert!(r < 1e-13 * (1.0 + zc.norm_sqr() + wc.norm()), "residual {r}");
        }
        // Purely imaginary plane coordinate (c1 = 0) is fine: the plane
        // point sits over the negative e1 axis.
        let r = ks_restriction_check(Vec3::EX, Vec3::EY, Complex64::new(0.0, 0.8), Complex64::new(0.3, -0.2)).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn momentum_defect_vanishes_on_sigma_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let s = sampling::sigma_state(&mut rng);
        assert!(momentum_defect(&s).unwrap() < 1e-13);
        let off = KSState::new(s.z, s.w + Quaternion::I * s.z);
        // BL(z, iz) = Re{conj(z) i i z} = -|z|^2 shifts the defect.
        assert!(momentum_defect(&off).unwrap() > 0.1);
    }
}

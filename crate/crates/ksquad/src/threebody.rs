//! The spatial three-body problem in Jacobi coordinates and its
//! Kustaanheimo-Stiefel regularization at inner collisions.
//!
//! With gravitational constant 1, the Jacobi splitting turns the three-body
//! Hamiltonian into two Kepler problems, inner (mu1, M1 = m0 + m1) and
//! outer (mu2, M2 = m0 + m1 + m2), coupled by a perturbing function that
//! vanishes when the inner pair collapses to a point. Regularizing the
//! inner Kepler part with the KS map and energy parameter f produces the
//! lunar Hamiltonian
//!
//!   F_reg = |w|^2 / (8 mu1) + (f + T2) |z|^2 - mu1 M1 + |z|^2 F_pert,
//!
//! a smooth function on the 14-dimensional chart [z, Q2; w, P2] whose flow
//! extends the three-body flow through inner collisions (z = 0).

use crate::error::{Error, Result};
use crate::ksreg::KSState;
use crate::quat::{Quaternion, Vec3};
use crate::verify::HamiltonianSystem;

/// Masses of the three bodies and the derived Jacobi parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeBodyMasses {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    /// m0 / (m0 + m1).
    pub sigma0: f64,
    /// m1 / (m0 + m1).
    pub sigma1: f64,
    /// Inner reduced mass, 1/mu1 = 1/m0 + 1/m1.
    pub mu1: f64,
    /// Outer reduced mass, 1/mu2 = 1/(m0 + m1) + 1/m2.
    pub mu2: f64,
    /// Inner gravitational mass M1 = m0 + m1.
    pub gm_inner: f64,
    /// Outer gravitational mass M2 = m0 + m1 + m2.
    pub gm_total: f64,
}

impl ThreeBodyMasses {
    pub fn new(m0: f64, m1: f64, m2: f64) -> Result<Self> {
        if !(m0 > 0.0 && m1 > 0.0 && m2 > 0.0) {
            return Err(Error::NonPositiveMass);
        }
        let m01 = m0 + m1;
        Ok(ThreeBodyMasses {
            m0,
            m1,
            m2,
            sigma0: m0 / m01,
            sigma1: m1 / m01,
            mu1: m0 * m1 / m01,
            mu2: m01 * m2 / (m01 + m2),
            gm_inner: m01,
            gm_total: m01 + m2,
        })
    }

    /// Inner Kepler pair (mu1, M1).
    pub fn inner(&self) -> crate::kepler::KeplerMassParams {
        crate::kepler::KeplerMassParams::new(self.mu1, self.gm_inner)
    }

    /// Outer Kepler pair (mu2, M2).
    pub fn outer(&self) -> crate::kepler::KeplerMassParams {
        crate::kepler::KeplerMassParams::new(self.mu2, self.gm_total)
    }
}

/// Relative part of the Jacobi chart: Q1 joins body 0 to body 1, Q2 joins
/// the inner barycenter to body 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiState {
    pub p1: Vec3,
    pub q1: Vec3,
    pub p2: Vec3,
    pub q2: Vec3,
}

impl JacobiState {
    /// Chart slice [Q1, Q2; P1, P2].
    pub fn to_chart(self) -> [f64; 12] {
        [
            self.q1.x, self.q1.y, self.q1.z, self.q2.x, self.q2.y, self.q2.z,
            self.p1.x, self.p1.y, self.p1.z, self.p2.x, self.p2.y, self.p2.z,
        ]
    }

    pub fn from_chart(c: &[f64]) -> Self {
        JacobiState {
            q1: Vec3::new(c[0], c[1], c[2]),
            q2: Vec3::new(c[3], c[4], c[5]),
            p1: Vec3::new(c[6], c[7], c[8]),
            p2: Vec3::new(c[9], c[10], c[11]),
        }
    }
}

/// Jacobi chart of an inertial state. Returns the relative part together
/// with (P0, Q0) = (total momentum, position of body 0); the kinetic form
/// is diagonal on the invariant slice P0 = 0, where the dynamics reduces
/// to [`hamiltonians`] in the relative variables.
pub fn jacobi_from_inertial(
    pos: &[Vec3; 3],
    mom: &[Vec3; 3],
    mm: &ThreeBodyMasses,
) -> (JacobiState, Vec3, Vec3) {
    let js = JacobiState {
        q1: pos[1] - pos[0],
        q2: pos[2] - mm.sigma0 * pos[0] - mm.sigma1 * pos[1],
        p1: mom[1] + mm.sigma1 * mom[2],
        p2: mom[2],
    };
    (js, mom[0] + mom[1] + mom[2], pos[0])
}

/// Inverse of [`jacobi_from_inertial`].
pub fn inertial_from_jacobi(
    js: &JacobiState,
    p0: Vec3,
    q0: Vec3,
    mm: &ThreeBodyMasses,
) -> ([Vec3; 3], [Vec3; 3]) {
    let pos = [q0, q0 + js.q1, js.q2 + q0 + mm.sigma1 * js.q1];
    let mom = [
        p0 - js.p1 - mm.sigma0 * js.p2,
        js.p1 - mm.sigma1 * js.p2,
        js.p2,
    ];
    (pos, mom)
}

const COLLISION_TOL: f64 = 1e-12;

/// Perturbing function
///
///   F_pert = -mu1 m2 [ (1/sigma0)(1/|A| - 1/r2) + (1/sigma1)(1/|B| - 1/r2) ],
///
/// with A = Q2 - sigma0 Q1 (body 1 to body 2) and B = Q2 + sigma1 Q1
/// (body 0 to body 2). Vanishes identically at Q1 = 0.
pub fn f_pert(q1: Vec3, q2: Vec3, mm: &ThreeBodyMasses) -> Result<f64> {
    let scale = q1.norm() + q2.norm();
    let a = q2 - mm.sigma0 * q1;
    let b = q2 + mm.sigma1 * q1;
    let r2 = q2.norm();
    if a.norm() < COLLISION_TOL * scale || a.norm() == 0.0 {
        return Err(Error::Collision { which: "body 1 / body 2" });
    }
    if b.norm() < COLLISION_TOL * scale || b.norm() == 0.0 {
        return Err(Error::Collision { which: "body 0 / body 2" });
    }
    if r2 < COLLISION_TOL * scale || r2 == 0.0 {
        return Err(Error::Collision { which: "inner barycenter / body 2" });
    }
    let c = -mm.mu1 * mm.m2;
    Ok(c * ((1.0 / a.norm() - 1.0 / r2) / mm.sigma0 + (1.0 / b.norm() - 1.0 / r2) / mm.sigma1))
}

/// Gradient of [`f_pert`] with respect to (Q1, Q2).
pub fn f_pert_grad(q1: Vec3, q2: Vec3, mm: &ThreeBodyMasses) -> Result<(Vec3, Vec3)> {
    let scale = q1.norm() + q2.norm();
    let a = q2 - mm.sigma0 * q1;
    let b = q2 + mm.sigma1 * q1;
    let r2 = q2.norm();
    if a.norm() < COLLISION_TOL * scale || a.norm() == 0.0 {
        return Err(Error::Collision { which: "body 1 / body 2" });
    }
    if b.norm() < COLLISION_TOL * scale || b.norm() == 0.0 {
        return Err(Error::Collision { which: "body 0 / body 2" });
    }
    if r2 < COLLISION_TOL * scale || r2 == 0.0 {
        return Err(Error::Collision { which: "inner barycenter / body 2" });
    }
    let c = -mm.mu1 * mm.m2;
    let a3 = a / a.norm().powi(3);
    let b3 = b / b.norm().powi(3);
    let q23 = q2 / r2.powi(3);
    let g1 = c * (a3 - b3);
    let g2 = c * ((q23 - a3) / mm.sigma0 + (q23 - b3) / mm.sigma1);
    Ok((g1, g2))
}

/// Three-body energy split: total = kepler + pert, with kepler the sum of
/// the inner and outer Kepler energies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySplit {
    pub total: f64,
    pub kepler: f64,
    pub pert: f64,
}

/// Jacobi-form three-body Hamiltonian (total momentum removed).
pub fn hamiltonians(js: &JacobiState, mm: &ThreeBodyMasses) -> Result<EnergySplit> {
    let r1 = js.q1.norm();
    if r1 < COLLISION_TOL * (r1 + js.q2.norm()) || r1 == 0.0 {
        return Err(Error::Collision { which: "body 0 / body 1" });
    }
    let pert = f_pert(js.q1, js.q2, mm)?;
    let kep_inner = js.p1.norm_sq() / (2.0 * mm.mu1) - mm.mu1 * mm.gm_inner / r1;
    let kep_outer = outer_kepler_energy(js.p2, js.q2, mm);
    let kepler = kep_inner + kep_outer;
    Ok(EnergySplit { total: kepler + pert, kepler, pert })
}

/// Outer Kepler energy T2 = |P2|^2 / (2 mu2) - mu2 M2 / r2.
pub fn outer_kepler_energy(p2: Vec3, q2: Vec3, mm: &ThreeBodyMasses) -> f64 {
    p2.norm_sq() / (2.0 * mm.mu2) - mm.mu2 * mm.gm_total / q2.norm()
}

/// Regularized lunar Hamiltonian at energy parameter f. The inner pair is
/// presented in KS variables; the perturbation acquires the conformal
/// factor |z|^2 and extends smoothly through z = 0.
pub fn reg_hamiltonian(
    s: &KSState,
    p2: Vec3,
    q2: Vec3,
    mm: &ThreeBodyMasses,
    f: f64,
) -> Result<EnergySplit> {
    let z2 = s.z.norm_sq();
    let t2 = outer_kepler_energy(p2, q2, mm);
    let kepler = s.w.norm_sq() / (8.0 * mm.mu1) + (f + t2) * z2 - mm.mu1 * mm.gm_inner;
    let q1 = crate::quat::hopf(s.z);
    let pert = if z2 == 0.0 { 0.0 } else { z2 * f_pert(q1, q2, mm)? };
    Ok(EnergySplit { total: kepler + pert, kepler, pert })
}

/// State of the regularized lunar problem on the chart [z, Q2; w, P2].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LunarState {
    pub inner: KSState,
    pub p2: Vec3,
    pub q2: Vec3,
}

impl LunarState {
    pub fn to_chart(self) -> [f64; 14] {
        let z = self.inner.z.to_array();
        let w = self.inner.w.to_array();
        [
            z[0], z[1], z[2], z[3], self.q2.x, self.q2.y, self.q2.z,
            w[0], w[1], w[2], w[3], self.p2.x, self.p2.y, self.p2.z,
        ]
    }

    pub fn from_chart(c: &[f64]) -> Self {
        LunarState {
            inner: KSState {
                z: Quaternion::from_parts(c[0], c[1], c[2], c[3]),
                w: Quaternion::from_parts(c[7], c[8], c[9], c[10]),
            },
            q2: Vec3::new(c[4], c[5], c[6]),
            p2: Vec3::new(c[11], c[12], c[13]),
        }
    }
}

/// Hamiltonian flow of the regularized lunar problem.
pub struct LunarFlow {
    pub mm: ThreeBodyMasses,
    pub f: f64,
}

impl HamiltonianSystem for LunarFlow {
    fn dim(&self) -> usize {
        14
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let st = LunarState::from_chart(x);
        let mm = &self.mm;
        let z2 = st.inner.z.norm_sq();
        let t2 = outer_kepler_energy(st.p2, st.q2, mm);
        let q1 = crate::quat::hopf(st.inner.z);
        let (pert, g1, g2) = if z2 == 0.0 {
            (0.0, Vec3::ZERO, Vec3::ZERO)
        } else {
            let pert = f_pert(q1, st.q2, mm).expect("collision inside lunar flow");
            let (g1, g2) = f_pert_grad(q1, st.q2, mm).expect("collision inside lunar flow");
            (pert, g1, g2)
        };

        // d/dz: 2 (f + T2 + F_pert) z + |z|^2 (-2 i z g1).
        let dz = 2.0 * (self.f + t2 + pert) * st.inner.z
            + (-2.0 * z2) * (Quaternion::I * st.inner.z * Quaternion::from_im(g1));
        // d/dQ2: |z|^2 (mu2 M2 Q2 / r2^3 + dF_pert/dQ2).
        let r2 = st.q2.norm();
        let dq2 = z2 * (mm.mu2 * mm.gm_total / (r2 * r2 * r2) * st.q2 + g2);
        // d/dw: w / (4 mu1); d/dP2: |z|^2 P2 / mu2.
        let dw = st.inner.w / (4.0 * mm.mu1);
        let dp2 = (z2 / mm.mu2) * st.p2;

        let dza = dz.to_array();
        let dwa = dw.to_array();
        out[..4].copy_from_slice(&dza);
        out[4] = dq2.x;
        out[5] = dq2.y;
        out[6] = dq2.z;
        out[7..11].copy_from_slice(&dwa);
        out[11] = dp2.x;
        out[12] = dp2.y;
        out[13] = dp2.z;
    }
}

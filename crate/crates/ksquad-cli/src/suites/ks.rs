//! Regularizing-map suite: symplectic pullback on the bilinear cone, the
//! planar Levi-Civita analogue, orbit projection at zero and shifted
//! regularized energy, and the invariant-plane restriction.

use ksquad::error::Result;
use ksquad::kepler::{self, CartesianOrbitState, ChartFlags, DelaunayElements, KeplerMassParams};
use ksquad::ksreg::{self, KSState};
use ksquad::quat::{Quaternion, Vec3};
use ksquad::sampling;
use ksquad::verify;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::SuiteCtx;

/// Pullback-residual gate for the regularizing chart (analytic Jacobian).
pub const TOL_PULLBACK: f64 = 1e-9;
/// Element agreement of a projected orbit with its image ellipse.
pub const TOL_PROJECTION: f64 = 1e-8;
/// Pointwise invariant-plane restriction defect.
pub const TOL_PLANE: f64 = 1e-12;

const SALT_SIGMA: u64 = 0x4b53_0001;
const SALT_PLANAR: u64 = 0x4b53_0002;
const SALT_ZERO: u64 = 0x4b53_0003;
const SALT_SHIFT: u64 = 0x4b53_0004;
const SALT_PLANE: u64 = 0x4b53_0005;

/// Chart presentation of the regularizing map, [z; w] -> [Q; P].
fn ks_chart(x: &[f64]) -> Vec<f64> {
    let s = KSState::from_chart(x);
    ksreg::ks_map(&s).expect("samples stay off the collision origin").to_chart().to_vec()
}

/// Analytic differential of [`ks_chart`].
fn ks_chart_differential(x: &[f64], u: &[f64]) -> Vec<f64> {
    let s = KSState::from_chart(x);
    let ds = KSState::from_chart(u);
    let z2 = s.z.norm_sq();
    let dq = (ds.z.conj() * Quaternion::I * s.z + s.z.conj() * Quaternion::I * ds.z).im;
    let num = (s.z.conj() * Quaternion::I * s.w).im;
    let dnum = (ds.z.conj() * Quaternion::I * s.w + s.z.conj() * Quaternion::I * ds.w).im;
    let zdz = s.z.dot(ds.z);
    let dp = (1.0 / (2.0 * z2)) * dnum - (zdz / (z2 * z2)) * num;
    vec![dq.x, dq.y, dq.z, dp.x, dp.y, dp.z]
}

/// Gradient of BL(z, w) = Re(conj(z) i w) on the [z; w] chart.
fn bl_gradient(s: &KSState) -> [f64; 8] {
    let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let mut g = [0.0; 8];
    for (a, e) in basis.iter().enumerate() {
        g[a] = (e.conj() * Quaternion::I * s.w).re;
        g[4 + a] = (s.z.conj() * Quaternion::I * *e).re;
    }
    g
}

/// Projects a raw 8-vector onto the tangent space of the BL = 0 cone.
fn sigma_tangent(s: &KSState, raw: &[f64]) -> Vec<f64> {
    let g = bl_gradient(s);
    let gg: f64 = g.iter().map(|a| a * a).sum();
    let du: f64 = g.iter().zip(raw).map(|(a, b)| a * b).sum();
    raw.iter().zip(&g).map(|(b, a)| b - a * du / gg).collect()
}

fn pullback_on_sigma(rng: &mut ChaCha8Rng, points: usize) -> f64 {
    let mut max_r = 0.0f64;
    for _ in 0..points {
        let s = sampling::sigma_state(rng);
        let x = s.to_chart();
        let u = sigma_tangent(&s, &sampling::tangent(rng, 8));
        let v = sigma_tangent(&s, &sampling::tangent(rng, 8));
        let r = verify::pullback_residual(&ks_chart, Some(&ks_chart_differential), &x, &u, &v);
        max_r = max_r.max(r.abs());
    }
    max_r
}

/// Planar chart map [Re z, Im z; Re w, Im w] of the Levi-Civita square.
fn lc_chart(x: &[f64]) -> Vec<f64> {
    let (zi, wi) = ksreg::lc_map(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]))
        .expect("samples stay off the origin");
    vec![zi.re, zi.im, wi.re, wi.im]
}

fn lc_chart_differential(x: &[f64], u: &[f64]) -> Vec<f64> {
    let z = Complex64::new(x[0], x[1]);
    let w = Complex64::new(x[2], x[3]);
    let dz = Complex64::new(u[0], u[1]);
    let dw = Complex64::new(u[2], u[3]);
    let dzi = 2.0 * z * dz;
    let dwi = dw / (2.0 * z.conj()) - w * dz.conj() / (2.0 * z.conj() * z.conj());
    vec![dzi.re, dzi.im, dwi.re, dwi.im]
}

fn pullback_planar(rng: &mut ChaCha8Rng, points: usize) -> f64 {
    let mut max_r = 0.0f64;
    for _ in 0..points {
        let z = loop {
            let c = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            if c.norm() > 0.3 {
                break c;
            }
        };
        let w = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let x = [z.re, z.im, w.re, w.im];
        let u = sampling::tangent(rng, 4);
        let v = sampling::tangent(rng, 4);
        let r = verify::pullback_residual(&lc_chart, Some(&lc_chart_differential), &x, &u, &v);
        max_r = max_r.max(r.abs());
    }
    max_r
}

/// Moderate bound elements, away from every chart edge.
fn sample_elements(rng: &mut ChaCha8Rng) -> (DelaunayElements, KeplerMassParams) {
    let m = KeplerMassParams::new(rng.gen_range(0.5..1.6), rng.gen_range(0.5..1.6));
    let a = rng.gen_range(0.6..1.8);
    let e = rng.gen_range(0.1..0.6);
    let inc = rng.gen_range(0.3..std::f64::consts::PI - 0.3);
    let action_l = m.mu * (m.gm * a).sqrt();
    let action_g = action_l * (1.0f64 - e * e).sqrt();
    let el = DelaunayElements {
        action_l,
        action_g,
        action_h: action_g * inc.cos(),
        mean_anom: rng.gen_range(0.0..std::f64::consts::TAU),
        arg_peri: rng.gen_range(0.0..std::f64::consts::TAU),
        node: rng.gen_range(0.0..std::f64::consts::TAU),
        a,
        e,
        inc,
        ecc_anom: 0.0,
        flags: ChartFlags::default(),
    };
    (el, m)
}

/// Exact point of the linear regularized flow through `s0` at parameter f.
fn k_orbit_point(s0: &KSState, mu: f64, f: f64, t: f64) -> KSState {
    let om = (f / (2.0 * mu)).sqrt();
    let (sn, cs) = (om * t).sin_cos();
    KSState::new(
        cs * s0.z + (sn / (4.0 * mu * om)) * s0.w,
        -(4.0 * mu * om * sn) * s0.z + cs * s0.w,
    )
}

fn angle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU);
    (d - std::f64::consts::PI).abs()
}

fn element_deviation(el: &DelaunayElements, re: &DelaunayElements) -> f64 {
    ((el.a - re.a) / re.a)
        .abs()
        .max((el.e - re.e).abs())
        .max((el.inc - re.inc).abs())
        .max(angle_dist(el.node, re.node))
        .max(angle_dist(el.arg_peri, re.arg_peri))
}

/// Max element deviation of the projected trace from the image ellipse of
/// the initial state, for the mass parameters `m_ref`.
fn trace_deviation(s0: &KSState, m: &KeplerMassParams, f: f64, m_ref: &KeplerMassParams) -> Result<f64> {
    let period = std::f64::consts::TAU / (f / (2.0 * m.mu)).sqrt();
    let reference = kepler::elements_from_state(&ksreg::ks_map(s0)?, m_ref)?;
    let mut worst = 0.0f64;
    for k in 0..64 {
        let s = k_orbit_point(s0, m.mu, f, period * k as f64 / 64.0);
        let el = kepler::elements_from_state(&ksreg::ks_map(&s)?, m_ref)?;
        worst = worst.max(element_deviation(&el, &reference));
    }
    Ok(worst)
}

fn zero_level_projection(rng: &mut ChaCha8Rng, configs: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let (el, m) = sample_elements(rng);
        let c = kepler::state_from_elements(&el, &m)?;
        let s0 = ksreg::ks_lift(&c, rng.gen_range(0.0..std::f64::consts::TAU))?;
        // K(z, w, f) = r (h + f), so f = -h puts the state on the zero level.
        let f = -kepler::kepler_energy(&c, &m)?;
        worst = worst.max(trace_deviation(&s0, &m, f, &m)?);
    }
    Ok(worst)
}

fn mass_shift_projection(rng: &mut ChaCha8Rng, configs: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let (el, m) = sample_elements(rng);
        let c = kepler::state_from_elements(&el, &m)?;
        let s0 = ksreg::ks_lift(&c, rng.gen_range(0.0..std::f64::consts::TAU))?;
        let h = kepler::kepler_energy(&c, &m)?;
        let r0 = c.q.norm();
        for sign in [1.0, -1.0] {
            let ftilde = 0.1 * sign * m.mu * m.gm;
            let f = ftilde / r0 - h;
            let shifted = m.shifted(ftilde);
            worst = worst.max(shape_deviation(&s0, &m, f, &shifted)?);
        }
    }
    Ok(worst)
}

/// Like [`trace_deviation`] but compares (a, e, orbit plane) only, the
/// quantities the shifted-mass statement pins down.
fn shape_deviation(s0: &KSState, m: &KeplerMassParams, f: f64, m_ref: &KeplerMassParams) -> Result<f64> {
    let period = std::f64::consts::TAU / (f / (2.0 * m.mu)).sqrt();
    let c0 = ksreg::ks_map(s0)?;
    let reference = kepler::elements_from_state(&c0, m_ref)?;
    let n0 = plane_normal(&c0)?;
    let mut worst = 0.0f64;
    for k in 0..64 {
        let s = k_orbit_point(s0, m.mu, f, period * k as f64 / 64.0);
        let c = ksreg::ks_map(&s)?;
        let el = kepler::elements_from_state(&c, m_ref)?;
        let n = plane_normal(&c)?;
        let dev = ((el.a - reference.a) / reference.a)
            .abs()
            .max((el.e - reference.e).abs())
            .max((n - n0).norm());
        worst = worst.max(dev);
    }
    Ok(worst)
}

fn plane_normal(c: &CartesianOrbitState) -> Result<Vec3> {
    c.q.cross(c.p).normalized()
}

fn plane_restriction(rng: &mut ChaCha8Rng, points: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..points {
        let (e1, e2) = sampling::orthonormal_pair(rng);
        let z = loop {
            let c = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            if c.norm() > 0.2 {
                break c;
            }
        };
        let w = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        worst = worst.max(ksreg::ks_restriction_check(e1, e2, z, w)?);
    }
    Ok(worst)
}

pub fn run(ctx: &mut SuiteCtx) -> Result<()> {
    let r = pullback_on_sigma(&mut ctx.rng(SALT_SIGMA), 1000);
    ctx.push("ks.pullback.sigma", "induced-symplectomorphism-on-the-bilinear-cone", r, TOL_PULLBACK);
    ctx.timing.sample_points += 1000;

    let r = pullback_planar(&mut ctx.rng(SALT_PLANAR), 1000);
    ctx.push("ks.pullback.planar", "planar-levi-civita-symplectic", r, TOL_PULLBACK);
    ctx.timing.sample_points += 1000;

    let r = zero_level_projection(&mut ctx.rng(SALT_ZERO), 20)?;
    ctx.push("ks.projection.zero-level", "zero-energy-orbits-project-to-image-ellipses", r, TOL_PROJECTION);
    ctx.timing.sample_points += 20 * 64;

    let r = mass_shift_projection(&mut ctx.rng(SALT_SHIFT), 20)?;
    ctx.push("ks.projection.mass-shift", "nonzero-level-orbits-shift-the-attracting-mass", r, TOL_PROJECTION);
    ctx.timing.sample_points += 20 * 2 * 64;

    let r = plane_restriction(&mut ctx.rng(SALT_PLANE), 1000)?;
    ctx.push("ks.restriction.lc-plane", "invariant-plane-restriction-is-levi-civita", r, TOL_PLANE);
    ctx.timing.sample_points += 1000;
    Ok(())
}

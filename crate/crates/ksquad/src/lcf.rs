//! Action-angle coordinates adapted to the regularized Kepler flow.
//!
//! Planar case: on C^2 with form Re{d conj(w) ^ dz}, rescale by
//! s = (8 mu f)^{1/4}, diagonalize
//!
//!   W' = (W + i Z) / sqrt(2),   Z' = (conj W + i conj Z) / sqrt(2),
//!
//! and pass to polar actions r_a = |Z'|^2 / 2, r_b = |W'|^2 / 2 with the
//! complex arguments as angles. The combinations
//!
//!   L = (r_a + r_b)/2, delta = th_a + th_b,
//!   G = (r_a - r_b)/2, gamma = th_a - th_b + pi
//!
//! are Darboux ({L, delta} = {G, gamma} = 1) and the regularized Kepler
//! Hamiltonian becomes K = L sqrt(2 f / mu) - mu M: delta is the fast
//! angle, everything else is constant. G equals Im{conj(w) z} / 2 at any
//! scale, which is minus the planar angular momentum of the image state.
//!
//! Spatial case: the same angles are read off the osculating ellipse of the
//! shifted gravitational mass. The chart is (L, delta, G, gamma, H, zeta)
//! with L the shifted-ellipse action, delta its eccentric anomaly, G, gamma
//! the physical angular momentum and pericenter argument, H, zeta vertical
//! angular momentum and node. It is Darboux away from rectilinear,
//! circular, and horizontal ellipses, which is certified numerically here
//! through Poisson brackets of the invariant ambient extensions and
//! structurally by the rotation identity [`rotation_two_form_residual`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kepler::{CartesianOrbitState, ChartFlags, DelaunayElements, KeplerMassParams};
use crate::ksreg::{self, KSState};
use crate::verify::{poisson_bracket, ChartFn};

/// Planar action-angle coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarLcf {
    pub action_l: f64,
    pub delta: f64,
    pub action_g: f64,
    pub gamma: f64,
    /// False when one of the oscillator radii vanishes and its angle (hence
    /// delta and gamma) is an arbitrary chart value.
    pub angles_defined: bool,
}

/// Spatial action-angle coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialLcf {
    pub action_l: f64,
    pub delta: f64,
    pub action_g: f64,
    pub gamma: f64,
    pub action_h: f64,
    pub zeta: f64,
}

fn wrap_tau(x: f64) -> f64 {
    let y = x.rem_euclid(std::f64::consts::TAU);
    if y == std::f64::consts::TAU {
        0.0
    } else {
        y
    }
}

/// Planar chart of a point (z, w) of C^2 for oscillator parameter f > 0.
pub fn planar_lcf(z: Complex64, w: Complex64, m: &KeplerMassParams, f: f64) -> Result<PlanarLcf> {
    if m.mu <= 0.0 {
        return Err(Error::NonPositiveMass);
    }
    if f <= 0.0 {
        return Err(Error::ChartDomain { condition: "planar chart needs f > 0" });
    }
    if z == Complex64::ZERO && w == Complex64::ZERO {
        return Err(Error::AtOrigin { op: "planar_lcf" });
    }
    let s = (8.0 * m.mu * f).powf(0.25);
    let zs = s * z;
    let ws = w / s;
    let i = Complex64::I;
    let wp = (ws + i * zs) / std::f64::consts::SQRT_2;
    let zp = (ws.conj() + i * zs.conj()) / std::f64::consts::SQRT_2;
    let r_a = 0.5 * zp.norm_sqr();
    let r_b = 0.5 * wp.norm_sqr();
    let angles_defined = r_a.min(r_b) > 1e-12 * (r_a + r_b);
    let th_a = if r_a > 0.0 { zp.im.atan2(zp.re) } else { 0.0 };
    let th_b = if r_b > 0.0 { wp.im.atan2(wp.re) } else { 0.0 };
    Ok(PlanarLcf {
        action_l: 0.5 * (r_a + r_b),
        delta: wrap_tau(th_a + th_b),
        action_g: 0.5 * (r_a - r_b),
        gamma: wrap_tau(th_a - th_b + std::f64::consts::PI),
        angles_defined,
    })
}

/// Inverse of [`planar_lcf`] on its chart domain (both radii positive).
/// The planar map is two-to-one, so this fixes one of the two preimages.
pub fn planar_lcf_state(c: &PlanarLcf, m: &KeplerMassParams, f: f64) -> Result<(Complex64, Complex64)> {
    if m.mu <= 0.0 {
        return Err(Error::NonPositiveMass);
    }
    if f <= 0.0 {
        return Err(Error::ChartDomain { condition: "planar chart needs f > 0" });
    }
    let r_a = c.action_l + c.action_g;
    let r_b = c.action_l - c.action_g;
    if r_a < 0.0 || r_b < 0.0 {
        return Err(Error::ChartDomain { condition: "|G| <= L violated" });
    }
    let th_a = 0.5 * (c.delta + c.gamma - std::f64::consts::PI);
    let th_b = 0.5 * (c.delta - c.gamma + std::f64::consts::PI);
    let zp = (2.0 * r_a).sqrt() * Complex64::new(th_a.cos(), th_a.sin());
    let wp = (2.0 * r_b).sqrt() * Complex64::new(th_b.cos(), th_b.sin());
    let i = Complex64::I;
    let ws = (wp + zp.conj()) / std::f64::consts::SQRT_2;
    let zs = (wp - zp.conj()) / (i * std::f64::consts::SQRT_2);
    let s = (8.0 * m.mu * f).powf(0.25);
    Ok((zs / s, ws * s))
}

/// Regularized planar Hamiltonian in the chart: K = L sqrt(2 f / mu) - mu M.
pub fn planar_k(c: &PlanarLcf, m: &KeplerMassParams, f: f64) -> f64 {
    c.action_l * (2.0 * f / m.mu).sqrt() - m.mu * m.gm
}

/// Momentum rescaling (P, Q) -> (P / (sqrt(2 mu f) L), Q).
pub fn k_f_map(s: &CartesianOrbitState, mu: f64, f: f64, l_action: f64) -> Result<CartesianOrbitState> {
    let scale = (2.0 * mu * f).sqrt() * l_action;
    if !(scale > 0.0) {
        return Err(Error::ChartDomain { condition: "k_f needs mu f L > 0" });
    }
    Ok(CartesianOrbitState::new(s.p / scale, s.q))
}

/// Spatial action-angle chart of a regularized state, read off the
/// osculating shifted-mass ellipse. Errors when the ellipse is rectilinear,
/// circular, or horizontal, naming the violated condition.
pub fn spatial_lcf_from_state(s: &KSState, m: &KeplerMassParams, f: f64) -> Result<SpatialLcf> {
    let el = ksreg::ks_ellipse_elements(s, m, f)?;
    if el.flags.degenerate {
        return Err(Error::ChartDomain { condition: "shifted ellipse is rectilinear (G ~ 0)" });
    }
    if el.flags.circular {
        return Err(Error::ChartDomain { condition: "shifted ellipse is circular (pericenter undefined)" });
    }
    if el.flags.horizontal {
        return Err(Error::ChartDomain { condition: "shifted ellipse is horizontal (node undefined)" });
    }
    Ok(SpatialLcf {
        action_l: el.action_l,
        delta: el.ecc_anom,
        action_g: el.action_g,
        gamma: el.arg_peri,
        action_h: el.action_h,
        zeta: el.node,
    })
}

/// Inverse chart: reconstructs the unique Sigma point with phase zero over
/// the encoded shifted-mass ellipse.
pub fn spatial_lcf_state(c: &SpatialLcf, m: &KeplerMassParams, f: f64) -> Result<KSState> {
    if m.mu <= 0.0 || m.gm <= 0.0 {
        return Err(Error::NonPositiveMass);
    }
    if f <= 0.0 || c.action_l <= 0.0 {
        return Err(Error::ChartDomain { condition: "spatial chart needs f > 0 and L > 0" });
    }
    if c.action_g <= 0.0 || c.action_g >= c.action_l {
        return Err(Error::ChartDomain { condition: "spatial chart needs 0 < G < L" });
    }
    if c.action_h.abs() >= c.action_g {
        return Err(Error::ChartDomain { condition: "spatial chart needs |H| < G" });
    }
    let gm_shifted = c.action_l * (2.0 * f).sqrt() / m.mu.powf(1.5);
    let shifted = KeplerMassParams::new(m.mu, gm_shifted);
    let a = c.action_l * c.action_l / (m.mu * m.mu * gm_shifted);
    let e = (1.0 - (c.action_g / c.action_l).powi(2)).max(0.0).sqrt();
    let inc = f64::atan2((c.action_g.powi(2) - c.action_h.powi(2)).max(0.0).sqrt(), c.action_h);
    let el = DelaunayElements {
        action_l: c.action_l,
        action_g: c.action_g,
        action_h: c.action_h,
        mean_anom: wrap_tau(c.delta - e * c.delta.sin()),
        arg_peri: c.gamma,
        node: c.zeta,
        a,
        e,
        inc,
        ecc_anom: wrap_tau(c.delta),
        flags: ChartFlags::default(),
    };
    let cart = crate::kepler::state_from_elements(&el, &shifted)?;
    ksreg::ks_lift(&cart, 0.0)
}

/// Bracket defects of the spatial chart: entry (i, j) is {c_i, c_j} minus
/// the canonical pattern, with the coordinates ordered
/// (delta, gamma, zeta, L, G, H). Brackets are taken in the ambient (z, w)
/// chart, which computes the reduced brackets since every chart function is
/// invariant under the circle action; the input must lie on Sigma.
pub fn lcf_darboux_residual(s: &KSState, m: &KeplerMassParams, f: f64) -> Result<[[f64; 6]; 6]> {
    if ksreg::bl(s.z, s.w).abs() > 1e-9 * (1.0 + s.z.norm() * s.w.norm()) {
        return Err(Error::ChartDomain { condition: "Darboux residuals are defined on Sigma (BL = 0)" });
    }
    // Fail early if the chart is singular here.
    spatial_lcf_from_state(s, m, f)?;

    let chart = s.to_chart().to_vec();
    let coord = |idx: usize| {
        let m = *m;
        move |x: &[f64]| -> f64 {
            let st = KSState::from_chart(x);
            let c = spatial_lcf_from_state(&st, &m, f).expect("chart singularity inside FD stencil");
            match idx {
                0 => c.delta,
                1 => c.gamma,
                2 => c.zeta,
                3 => c.action_l,
                4 => c.action_g,
                _ => c.action_h,
            }
        }
    };
    let fns: Vec<Box<dyn Fn(&[f64]) -> f64>> = (0..6).map(|i| Box::new(coord(i)) as Box<dyn Fn(&[f64]) -> f64>).collect();
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            if i == j {
                continue;
            }
            let fi = if i < 3 { ChartFn::angular(&fns[i]) } else { ChartFn::plain(&fns[i]) };
            let fj = if j < 3 { ChartFn::angular(&fns[j]) } else { ChartFn::plain(&fns[j]) };
            let mut expected = 0.0;
            if i >= 3 && j == i - 3 {
                expected = 1.0; // {action, its angle} = +1
            }
            if j >= 3 && i == j - 3 {
                expected = -1.0;
            }
            out[i][j] = poisson_bracket(&fi, &fj, &chart) - expected;
        }
    }
    Ok(out)
}

/// Composition of the inclination rotation about the node axis and the node
/// rotation about the vertical: maps a planar pair (x1, x2, 0, y1, y2, 0)
/// and the two angles (i, h) to the spatial pair (x', y') in R^6.
pub fn rotation_extended_map(pt: &[f64; 6]) -> [f64; 6] {
    let [x1, x2, y1, y2, inc, h] = *pt;
    let (si, ci) = inc.sin_cos();
    let (sh, ch) = h.sin_cos();
    [
        x1 * ch - x2 * ci * sh,
        x1 * sh + x2 * ci * ch,
        x2 * si,
        y1 * ch - y2 * ci * sh,
        y1 * sh + y2 * ci * ch,
        y2 * si,
    ]
}

/// Exact two-form identity behind the spatial chart: on the extended space
/// (x1, x2, y1, y2, i, h),
///
///   sum_a dy'_a ^ dx'_a = dy1 ^ dx1 + dy2 ^ dx2 + d phi ^ dh,
///
/// with phi = x'_1 y'_2 - x'_2 y'_1 = cos(i) (x1 y2 - x2 y1). Returns
/// LHS - RHS evaluated on a pair of tangent 6-vectors, using analytic
/// differentials.
pub fn rotation_two_form_residual(pt: &[f64; 6], u: &[f64; 6], v: &[f64; 6]) -> f64 {
    let [x1, x2, y1, y2, inc, h] = *pt;
    let (si, ci) = inc.sin_cos();
    let (sh, ch) = h.sin_cos();

    // d(image) on a tangent (dx1, dx2, dy1, dy2, di, dh).
    let dimg = |t: &[f64; 6]| -> [f64; 6] {
        let [dx1, dx2, dy1, dy2, di, dh] = *t;
        [
            ch * dx1 - ci * sh * dx2 + x2 * si * sh * di - (x1 * sh + x2 * ci * ch) * dh,
            sh * dx1 + ci * ch * dx2 - x2 * si * ch * di + (x1 * ch - x2 * ci * sh) * dh,
            si * dx2 + x2 * ci * di,
            ch * dy1 - ci * sh * dy2 + y2 * si * sh * di - (y1 * sh + y2 * ci * ch) * dh,
            sh * dy1 + ci * ch * dy2 - y2 * si * ch * di + (y1 * ch - y2 * ci * sh) * dh,
            si * dy2 + y2 * ci * di,
        ]
    };
    let du = dimg(u);
    let dv = dimg(v);
    let mut lhs = 0.0;
    for a in 0..3 {
        lhs += du[3 + a] * dv[a] - dv[3 + a] * du[a];
    }

    // d phi with phi = cos(i) (x1 y2 - x2 y1).
    let dphi = |t: &[f64; 6]| -> f64 {
        let [dx1, dx2, dy1, dy2, di, _] = *t;
        ci * (y2 * dx1 + x1 * dy2 - y1 * dx2 - x2 * dy1) - si * (x1 * y2 - x2 * y1) * di
    };
    let rhs = (u[2] * v[0] - v[2] * u[0]) + (u[3] * v[1] - v[3] * u[1]) + dphi(u) * v[5] - dphi(v) * u[5];
    lhs - rhs
}

//! Classical Kepler machinery: the Kepler equation and Delaunay elements.
//!
//! A body with momentum P and position Q moves under
//!
//!   T(P, Q) = ||P||^2 / (2 mu) - mu M / ||Q||
//!
//! with reduced mass mu and gravitational mass M (units with G = 1).
//! Delaunay elements (L, G, H, l, g, h) are the usual actions
//! L = mu sqrt(M a), G = ||Q x P||, H = G cos(inc) with conjugate angles
//! mean anomaly, argument of pericenter, and longitude of the node.

use crate::error::{Error, Result};
use crate::quat::Vec3;

/// Reduced mass and gravitational mass of a Kepler problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeplerMassParams {
    pub mu: f64,
    pub gm: f64,
}

impl KeplerMassParams {
    pub const fn new(mu: f64, gm: f64) -> Self {
        KeplerMassParams { mu, gm }
    }

    /// Same reduced mass with the gravitational mass shifted by delta / mu.
    pub fn shifted(self, delta: f64) -> Self {
        KeplerMassParams { mu: self.mu, gm: self.gm + delta / self.mu }
    }
}

/// Momentum and position of one body, [Q; P] as a chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartesianOrbitState {
    pub p: Vec3,
    pub q: Vec3,
}

impl CartesianOrbitState {
    pub const fn new(p: Vec3, q: Vec3) -> Self {
        CartesianOrbitState { p, q }
    }

    /// Chart slice [q1, q2, q3, p1, p2, p3].
    pub fn to_chart(self) -> [f64; 6] {
        [self.q.x, self.q.y, self.q.z, self.p.x, self.p.y, self.p.z]
    }

    pub fn from_chart(c: &[f64]) -> Self {
        CartesianOrbitState {
            q: Vec3::new(c[0], c[1], c[2]),
            p: Vec3::new(c[3], c[4], c[5]),
        }
    }
}

/// Relative thresholds below which the element charts are flagged.
const FLAG_TOL: f64 = 1e-9;

/// Chart degeneracies of a Delaunay description.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChartFlags {
    /// G ~ 0: rectilinear orbit, the orbital plane is undefined.
    pub degenerate: bool,
    /// L - G ~ 0: circular orbit, the pericenter is undefined.
    pub circular: bool,
    /// G - |H| ~ 0: horizontal orbit, the node is undefined.
    pub horizontal: bool,
}

impl ChartFlags {
    pub fn any(self) -> bool {
        self.degenerate || self.circular || self.horizontal
    }
}

/// Delaunay elements together with the derived geometric quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelaunayElements {
    pub action_l: f64,
    pub action_g: f64,
    pub action_h: f64,
    /// Mean anomaly l, in [0, 2 pi).
    pub mean_anom: f64,
    /// Argument of pericenter g, in [0, 2 pi).
    pub arg_peri: f64,
    /// Longitude of the ascending node h, in [0, 2 pi).
    pub node: f64,
    pub a: f64,
    pub e: f64,
    /// Inclination, in [0, pi].
    pub inc: f64,
    /// Eccentric anomaly u, in [0, 2 pi).
    pub ecc_anom: f64,
    pub flags: ChartFlags,
}

fn wrap_tau(x: f64) -> f64 {
    let y = x.rem_euclid(std::f64::consts::TAU);
    if y == std::f64::consts::TAU {
        0.0
    } else {
        y
    }
}

/// Solves u - e sin u = l for the eccentric anomaly, e in [0, 1).
///
/// Newton iteration from u0 = l + e sin l with a bisection fallback on
/// [l - e, l + e]; the residual is driven below 1e-13.
pub fn solve_kepler(mean_anom: f64, e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) || !e.is_finite() {
        return Err(Error::Eccentricity { e });
    }
    let l = wrap_tau(mean_anom);
    let offset = mean_anom - l;
    let g = |u: f64| u - e * u.sin() - l;
    let mut u = l + e * l.sin();
    let mut converged = false;
    for _ in 0..50 {
        let r = g(u);
        if r.abs() <= 1e-13 {
            converged = true;
            break;
        }
        let du = r / (1.0 - e * u.cos());
        u -= du;
        if !u.is_finite() {
            break;
        }
    }
    if !converged {
        // g is strictly increasing with a sign change on [l - e, l + e].
        let mut lo = l - e;
        let mut hi = l + e;
        for _ in 0..200 {
            u = 0.5 * (lo + hi);
            let r = g(u);
            if r.abs() <= 1e-13 {
                converged = true;
                break;
            }
            if r < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
        }
        if !converged {
            return Err(Error::KeplerDiverged { mean_anom, e });
        }
    }
    Ok(u + offset)
}

/// Kepler energy T(P, Q) of a state.
pub fn kepler_energy(s: &CartesianOrbitState, m: &KeplerMassParams) -> Result<f64> {
    let r = s.q.norm();
    if r == 0.0 {
        return Err(Error::AtOrigin { op: "kepler_energy" });
    }
    Ok(s.p.norm_sq() / (2.0 * m.mu) - m.mu * m.gm / r)
}

/// Delaunay elements of a bound state. Near-degenerate charts are flagged
/// and the undefined angles fall back to deterministic values (see
/// [`ChartFlags`]).
pub fn elements_from_state(s: &CartesianOrbitState, m: &KeplerMassParams) -> Result<DelaunayElements> {
    if m.mu <= 0.0 || m.gm <= 0.0 {
        return Err(Error::NonPositiveMass);
    }
    let r = s.q.norm();
    if r == 0.0 {
        return Err(Error::AtOrigin { op: "elements_from_state" });
    }
    let energy = s.p.norm_sq() / (2.0 * m.mu) - m.mu * m.gm / r;
    if energy >= 0.0 {
        return Err(Error::NotElliptic { energy });
    }
    let a = -m.mu * m.gm / (2.0 * energy);
    let action_l = m.mu * (m.gm * a).sqrt();

    let c = s.q.cross(s.p);
    let action_g = c.norm();
    let action_h = c.z;

    let mut flags = ChartFlags::default();
    flags.degenerate = action_g < FLAG_TOL * action_l;

    // Laplace eccentricity vector, |e_vec| = e, pointing at the pericenter.
    let e_vec = s.p.cross(c) / (m.mu * m.mu * m.gm) - s.q / r;
    let e = (1.0 - (action_g / action_l).powi(2)).max(0.0).sqrt();
    flags.circular = action_l - action_g < FLAG_TOL * action_l;

    if flags.degenerate {
        // Rectilinear segment: no plane, no pericenter direction transverse
        // to the motion. Report the radial geometry and zeroed angles.
        let ecc_anom = {
            // r = a (1 - e cos u) with e = 1.
            let cosu = ((1.0 - r / a).min(1.0)).max(-1.0);
            let outbound = s.q.dot(s.p) >= 0.0;
            if outbound {
                cosu.acos()
            } else {
                wrap_tau(-cosu.acos())
            }
        };
        let mean_anom = wrap_tau(ecc_anom - e * ecc_anom.sin());
        return Ok(DelaunayElements {
            action_l,
            action_g,
            action_h,
            mean_anom,
            arg_peri: 0.0,
            node: 0.0,
            a,
            e,
            inc: 0.0,
            ecc_anom,
            flags,
        });
    }

    let c_hat = c / action_g;
    let inc = f64::atan2((c.x * c.x + c.y * c.y).sqrt(), c.z);
    let node_vec = Vec3::EZ.cross(c);
    flags.horizontal = action_g - action_h.abs() < FLAG_TOL * action_g;
    let (n_hat, node) = if flags.horizontal {
        (Vec3::EX, 0.0)
    } else {
        (node_vec.normalized()?, wrap_tau(f64::atan2(node_vec.y, node_vec.x)))
    };

    let (e_hat, arg_peri) = if flags.circular {
        (n_hat, 0.0)
    } else {
        let e_hat = e_vec.normalized()?;
        (e_hat, wrap_tau(f64::atan2(e_hat.dot(c_hat.cross(n_hat)), e_hat.dot(n_hat))))
    };

    let true_anom = f64::atan2(s.q.dot(c_hat.cross(e_hat)), s.q.dot(e_hat));
    let ecc_anom = wrap_tau(2.0 * f64::atan2(
        (1.0 - e).sqrt() * (true_anom / 2.0).sin(),
        (1.0 + e).sqrt() * (true_anom / 2.0).cos(),
    ));
    let mean_anom = wrap_tau(ecc_anom - e * ecc_anom.sin());

    Ok(DelaunayElements {
        action_l,
        action_g,
        action_h,
        mean_anom,
        arg_peri,
        node,
        a,
        e,
        inc,
        ecc_anom,
        flags,
    })
}

/// Cartesian state of a set of elements. Errors on the degenerate flag;
/// circular or horizontal elements reconstruct fine (their fallback angles
/// are honored as chart values).
pub fn state_from_elements(el: &DelaunayElements, m: &KeplerMassParams) -> Result<CartesianOrbitState> {
    if m.mu <= 0.0 || m.gm <= 0.0 {
        return Err(Error::NonPositiveMass);
    }
    if el.flags.degenerate {
        return Err(Error::ChartDomain { condition: "degenerate (rectilinear) elements have no Cartesian chart" });
    }
    if el.a <= 0.0 || !(0.0..1.0).contains(&el.e) {
        return Err(Error::Eccentricity { e: el.e });
    }
    let u = solve_kepler(el.mean_anom, el.e)?;
    let n = (m.gm / el.a.powi(3)).sqrt();
    let (su, cu) = u.sin_cos();
    let b_over_a = (1.0 - el.e * el.e).sqrt();
    let q_pf = Vec3::new(el.a * (cu - el.e), el.a * b_over_a * su, 0.0);
    let vscale = el.a * n / (1.0 - el.e * cu);
    let v_pf = Vec3::new(-vscale * su, vscale * b_over_a * cu, 0.0);
    let orient = |v: Vec3| v.rot_z(el.arg_peri).rot_x(el.inc).rot_z(el.node);
    Ok(CartesianOrbitState {
        q: orient(q_pf),
        p: orient(v_pf) * m.mu,
    })
}

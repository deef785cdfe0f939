//! Secular averaging and the quadrupolar approximation of the lunar
//! three-body problem.
//!
//! The secular Hamiltonian is the double average of the perturbing function
//! over the two mean anomalies. In the lunar regime alpha = a1/a2 << 1 its
//! leading term is alpha^3 times the quadrupolar Hamiltonian, which after
//! elimination of the nodes (total angular momentum C vertical, so
//! h1 = h2 + pi and H1 + H2 = C) becomes a one-degree-of-freedom system in
//! (G1, g1) with parameters L1, G2, C:
//!
//!   F_quad = -mu1 m2 L2^3 / (8 a1 G2^3) * braces(G1/L1, X, g1),
//!   X = (C^2 - G1^2 - G2^2) / (2 G1 G2).
//!
//! The module provides this closed form with its analytic extension to
//! G1 = 0 and its partial derivatives, two alternative chart presentations
//! used for adjudication (a Laplace-plane form and a Pauli-Souriau
//! vectorial form), numeric averaging oracles for both the plain and the
//! regularized perturbing functions, the fictitious outer mass, and the
//! conjugacy check between the reduced quadrupolar flow and its
//! regularized counterpart.

use crate::error::{Error, Result};
use crate::kepler::{self, ChartFlags, DelaunayElements, KeplerMassParams};
use crate::ksreg::{self, KSState};
use crate::quat::Vec3;
use crate::threebody::ThreeBodyMasses;
use crate::verify::{self, HamiltonianSystem};

/// Node-eliminated quadrupolar chart point. The point also carries the
/// inner scale a1 and the ratio alpha = a1/a2, from which the outer action
/// L2 is derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadChartPoint {
    pub action_l1: f64,
    pub action_g1: f64,
    pub action_g2: f64,
    /// Inner argument of pericenter g1.
    pub peri1: f64,
    /// Outer argument of pericenter g2 (cyclic).
    pub peri2: f64,
    /// Total angular momentum magnitude.
    pub c_total: f64,
    pub a1: f64,
    pub alpha: f64,
}

/// Laplace-plane chart of the quadrupolar Hamiltonian: inner eccentricity
/// and pericenter, mutual inclination, outer eccentricity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceChartPoint {
    pub e1: f64,
    pub peri1: f64,
    /// Mutual inclination of the two orbital planes.
    pub delta: f64,
    pub e2: f64,
    pub a1: f64,
}

/// Pauli-Souriau presentation of the inner ellipse: two points A, B on the
/// sphere of radius sqrt(L1), with N the unit normal of the outer plane.
/// (A - B)/2 is the scaled angular momentum, (A + B)/2 the scaled (negated)
/// eccentricity vector; A = B encodes a degenerate inner ellipse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliSouriauPoint {
    pub a: Vec3,
    pub b: Vec3,
    pub n: Vec3,
}

/// Relative threshold for the degenerate branch selection at G1 = 0.
const DEGENERATE_TOL: f64 = 1e-12;

/// Relative overshoot past G1 = L1 tolerated by the chart guards. Flows turn
/// around exactly at that wall and implicit iterates can poke past it by a
/// few ulps.
const BOUNDARY_SLACK: f64 = 1e-9;

fn wrap_tau(x: f64) -> f64 {
    let y = x.rem_euclid(std::f64::consts::TAU);
    if y == std::f64::consts::TAU {
        0.0
    } else {
        y
    }
}

fn wrap_to_pi(d: f64) -> f64 {
    let mut d = d.rem_euclid(std::f64::consts::TAU);
    if d > std::f64::consts::PI {
        d -= std::f64::consts::TAU;
    }
    d
}

/// The braces polynomial of the quadrupolar Hamiltonian,
///
///   3 u^2 (1 + X^2) + 15 (1 - u^2)(cos^2 g1 + sin^2 g1 X^2)
///   - 6 (1 - u^2) - 4,
///
/// with u = G1/L1 and X = (C^2 - G1^2 - G2^2)/(2 G1 G2). At G1 = 0 the
/// algebraic limit is taken: finite on the leaf C = G2 (any g1) and at
/// sin g1 = 0 (any C), where the divergent X^2 terms either vanish or are
/// tamed by the u^2 prefactor; elsewhere the extension does not exist.
pub fn quad_braces(l1: f64, g1: f64, peri1: f64, g2: f64, c: f64) -> Result<f64> {
    if !(l1 > 0.0) || !(g2 > 0.0) {
        return Err(Error::ChartDomain { condition: "braces need L1 > 0 and G2 > 0" });
    }
    if g1 < 0.0 || g1 > l1 * (1.0 + BOUNDARY_SLACK) {
        return Err(Error::ChartDomain { condition: "braces need 0 <= G1 <= L1" });
    }
    if g1 == 0.0 {
        let lead = 3.0 * (c * c - g2 * g2).powi(2) / (4.0 * l1 * l1 * g2 * g2);
        if (c * c - g2 * g2).abs() <= DEGENERATE_TOL * (c * c).max(g2 * g2) {
            return Ok(lead + 15.0 * peri1.cos().powi(2) - 10.0);
        }
        if peri1.sin().abs() <= DEGENERATE_TOL {
            return Ok(lead + 5.0);
        }
        return Err(Error::SecularSingular);
    }
    let u = g1 / l1;
    let x = (c * c - g1 * g1 - g2 * g2) / (2.0 * g1 * g2);
    let (sg, cg) = peri1.sin_cos();
    Ok(3.0 * u * u * (1.0 + x * x) + 15.0 * (1.0 - u * u) * (cg * cg + sg * sg * x * x)
        - 6.0 * (1.0 - u * u)
        - 4.0)
}

/// Partial derivatives of [`quad_braces`] on the generic branch G1 > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracesPartials {
    pub value: f64,
    pub d_g1_action: f64,
    pub d_peri1: f64,
    pub d_g2_action: f64,
    pub d_c_total: f64,
}

pub fn quad_braces_partials(l1: f64, g1: f64, peri1: f64, g2: f64, c: f64) -> Result<BracesPartials> {
    if !(l1 > 0.0) || !(g2 > 0.0) {
        return Err(Error::ChartDomain { condition: "braces need L1 > 0 and G2 > 0" });
    }
    if !(g1 > 0.0) || g1 > l1 * (1.0 + BOUNDARY_SLACK) {
        return Err(Error::ChartDomain { condition: "braces partials need 0 < G1 <= L1" });
    }
    let u = g1 / l1;
    let x = (c * c - g1 * g1 - g2 * g2) / (2.0 * g1 * g2);
    let (sg, cg) = peri1.sin_cos();
    let value = 3.0 * u * u * (1.0 + x * x) + 15.0 * (1.0 - u * u) * (cg * cg + sg * sg * x * x)
        - 6.0 * (1.0 - u * u)
        - 4.0;
    // d/dX and d/du of the polynomial.
    let b_x = 6.0 * u * u * x + 30.0 * (1.0 - u * u) * sg * sg * x;
    let b_u = 6.0 * u * (1.0 + x * x) - 30.0 * u * (cg * cg + sg * sg * x * x) + 12.0 * u;
    let dx_dg1 = -(c * c + g1 * g1 - g2 * g2) / (2.0 * g1 * g1 * g2);
    let dx_dg2 = -(c * c + g2 * g2 - g1 * g1) / (2.0 * g1 * g2 * g2);
    let dx_dc = c / (g1 * g2);
    Ok(BracesPartials {
        value,
        d_g1_action: b_u / l1 + b_x * dx_dg1,
        d_peri1: 15.0 * (1.0 - u * u) * (2.0 * sg * cg) * (x * x - 1.0),
        d_g2_action: b_x * dx_dg2,
        d_c_total: b_x * dx_dc,
    })
}

/// Outer Delaunay action derived from the chart point's scales:
/// L2 = mu2 sqrt(M2 a2), a2 = a1/alpha.
pub fn outer_action_l2(q: &QuadChartPoint, mm: &ThreeBodyMasses) -> Result<f64> {
    if !(q.a1 > 0.0) || !(q.alpha > 0.0) {
        return Err(Error::ChartDomain { condition: "quad chart needs a1 > 0 and alpha > 0" });
    }
    Ok(mm.mu2 * (mm.gm_total * q.a1 / q.alpha).sqrt())
}

/// Quadrupolar Hamiltonian in the node-eliminated chart with an explicit
/// outer action value. Independent of peri2.
pub fn f_quad_with_l2(
    l1: f64,
    g1: f64,
    peri1: f64,
    g2: f64,
    c: f64,
    a1: f64,
    l2: f64,
    mu1_m2: f64,
) -> Result<f64> {
    if !(a1 > 0.0) || !(l2 > 0.0) {
        return Err(Error::ChartDomain { condition: "quadrupolar prefactor needs a1 > 0 and L2 > 0" });
    }
    let braces = quad_braces(l1, g1, peri1, g2, c)?;
    Ok(-mu1_m2 * l2.powi(3) / (8.0 * a1 * g2.powi(3)) * braces)
}

/// Quadrupolar Hamiltonian of a chart point, deriving L2 from (a1, alpha)
/// and the masses.
pub fn f_quad(q: &QuadChartPoint, mm: &ThreeBodyMasses) -> Result<f64> {
    let l2 = outer_action_l2(q, mm)?;
    f_quad_with_l2(
        q.action_l1,
        q.action_g1,
        q.peri1,
        q.action_g2,
        q.c_total,
        q.a1,
        l2,
        mm.mu1 * mm.m2,
    )
}

/// Value and partial derivatives of the quadrupolar Hamiltonian with
/// respect to the reduced chart variables (G1, g1, G2, C); g2 is cyclic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPartials {
    pub value: f64,
    pub d_g1_action: f64,
    pub d_peri1: f64,
    pub d_g2_action: f64,
    pub d_c_total: f64,
}

pub fn f_quad_partials_with_l2(
    l1: f64,
    g1: f64,
    peri1: f64,
    g2: f64,
    c: f64,
    a1: f64,
    l2: f64,
    mu1_m2: f64,
) -> Result<QuadPartials> {
    if !(a1 > 0.0) || !(l2 > 0.0) {
        return Err(Error::ChartDomain { condition: "quadrupolar prefactor needs a1 > 0 and L2 > 0" });
    }
    let b = quad_braces_partials(l1, g1, peri1, g2, c)?;
    let pref = -mu1_m2 * l2.powi(3) / (8.0 * a1 * g2.powi(3));
    Ok(QuadPartials {
        value: pref * b.value,
        d_g1_action: pref * b.d_g1_action,
        d_peri1: pref * b.d_peri1,
        // The prefactor carries G2^{-3}.
        d_g2_action: pref * b.d_g2_action - 3.0 * pref / g2 * b.value,
        d_c_total: pref * b.d_c_total,
    })
}

pub fn f_quad_partials(q: &QuadChartPoint, mm: &ThreeBodyMasses) -> Result<QuadPartials> {
    let l2 = outer_action_l2(q, mm)?;
    f_quad_partials_with_l2(
        q.action_l1,
        q.action_g1,
        q.peri1,
        q.action_g2,
        q.c_total,
        q.a1,
        l2,
        mm.mu1 * mm.m2,
    )
}

/// Laplace-plane form of the quadrupolar Hamiltonian,
///
///   -mu1 m2 / (8 a1 (1-e2^2)^{3/2}) [ -(3(1-e1^2) + 15 sin^2 g1) sin^2 D
///                                     + 12 (1-e1^2) + 5 ],
///
/// implemented verbatim for cross-chart adjudication against [`f_quad`].
pub fn f_quad_laplace(p: &LaplaceChartPoint, mu1: f64, m2: f64) -> Result<f64> {
    if !(p.e2 < 1.0) || p.e2 < 0.0 {
        return Err(Error::Eccentricity { e: p.e2 });
    }
    if !(p.a1 > 0.0) {
        return Err(Error::ChartDomain { condition: "Laplace chart needs a1 > 0" });
    }
    let ome1 = 1.0 - p.e1 * p.e1;
    let sd2 = p.delta.sin().powi(2);
    let bracket = -(3.0 * ome1 + 15.0 * p.peri1.sin().powi(2)) * sd2 + 12.0 * ome1 + 5.0;
    Ok(-mu1 * m2 / (8.0 * p.a1 * (1.0 - p.e2 * p.e2).powf(1.5)) * bracket)
}

/// The two chart expressions that control the analytic extension to
/// degenerate inner ellipses, evaluated in Pauli-Souriau variables:
/// returns (1 - e1^2, (1 - e1^2) sin^2 D, sin^2 g1 sin^2 D).
pub fn pauli_souriau_expressions(p: &PauliSouriauPoint) -> Result<(f64, f64, f64)> {
    let la = p.a.norm_sq();
    let lb = p.b.norm_sq();
    if (la - lb).abs() > 1e-12 * la.max(lb) || la == 0.0 {
        return Err(Error::ChartDomain { condition: "Pauli-Souriau pair needs |A|^2 = |B|^2 = L1 > 0" });
    }
    if (p.n.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnit { op: "pauli_souriau_expressions", norm: p.n.norm() });
    }
    let l1 = 0.5 * (la + lb);
    let diff = p.a - p.b;
    let sum = p.a + p.b;
    let ome1 = diff.norm_sq() / (4.0 * l1);
    let expr1 = (diff.norm_sq() - diff.dot(p.n).powi(2)) / (4.0 * l1);
    if sum.norm_sq() == 0.0 {
        return Err(Error::ChartDomain {
            condition: "Pauli-Souriau g1 expression undefined at A + B = 0 (circular inner ellipse)",
        });
    }
    let expr2 = sum.dot(p.n).powi(2) / sum.norm_sq();
    Ok((ome1, expr1, expr2))
}

/// Quadrupolar Hamiltonian assembled from the Pauli-Souriau expressions;
/// analytic across degenerate inner ellipses A = B, away from A + B = 0.
pub fn f_quad_pauli_souriau(
    p: &PauliSouriauPoint,
    mu1: f64,
    m2: f64,
    a1: f64,
    e2: f64,
) -> Result<f64> {
    if !(e2 < 1.0) || e2 < 0.0 {
        return Err(Error::Eccentricity { e: e2 });
    }
    if !(a1 > 0.0) {
        return Err(Error::ChartDomain { condition: "Pauli-Souriau chart needs a1 > 0" });
    }
    let (ome1, expr1, expr2) = pauli_souriau_expressions(p)?;
    let bracket = -3.0 * expr1 - 15.0 * expr2 + 12.0 * ome1 + 5.0;
    Ok(-mu1 * m2 / (8.0 * a1 * (1.0 - e2 * e2).powf(1.5)) * bracket)
}

/// Realizes a quad chart point as a pair of Delaunay element sets with the
/// total angular momentum vector vertical: h1 = 0, h2 = pi, and
/// H1 = (C^2 + G1^2 - G2^2)/(2C). Mean anomalies start at zero. The inner
/// action is taken from the point; the geometric scales are (a1, a1/alpha).
pub fn quad_to_delaunay_pair(
    q: &QuadChartPoint,
    mm: &ThreeBodyMasses,
) -> Result<(DelaunayElements, DelaunayElements)> {
    let l2 = outer_action_l2(q, mm)?;
    if !(q.action_l1 > 0.0) || q.action_g1 <= 0.0 || q.action_g1 > q.action_l1 {
        return Err(Error::ChartDomain { condition: "need 0 < G1 <= L1" });
    }
    if q.action_g2 <= 0.0 || q.action_g2 > l2 {
        return Err(Error::ChartDomain { condition: "need 0 < G2 <= L2(a1/alpha)" });
    }
    let c = q.c_total;
    if c < (q.action_g1 - q.action_g2).abs() - 1e-12 * c.abs()
        || c > q.action_g1 + q.action_g2 + 1e-12 * c.abs()
        || !(c > 0.0)
    {
        return Err(Error::ChartDomain { condition: "angular momentum triangle |G1-G2| <= C <= G1+G2 violated" });
    }
    let h1 = (c * c + q.action_g1 * q.action_g1 - q.action_g2 * q.action_g2) / (2.0 * c);
    let h2 = c - h1;
    if h1.abs() > q.action_g1 * (1.0 + 1e-12) || h2.abs() > q.action_g2 * (1.0 + 1e-12) {
        return Err(Error::ChartDomain { condition: "vertical components exceed angular momenta" });
    }
    let make = |l: f64, g: f64, hv: f64, peri: f64, node: f64, a: f64| -> DelaunayElements {
        let e = (1.0 - (g / l).powi(2)).max(0.0).sqrt();
        DelaunayElements {
            action_l: l,
            action_g: g,
            action_h: hv,
            mean_anom: 0.0,
            arg_peri: wrap_tau(peri),
            node: wrap_tau(node),
            a,
            e,
            inc: f64::atan2((g * g - hv * hv).max(0.0).sqrt(), hv),
            ecc_anom: 0.0,
            flags: ChartFlags::default(),
        }
    };
    let el1 = make(q.action_l1, q.action_g1, h1.clamp(-q.action_g1, q.action_g1), q.peri1, 0.0, q.a1);
    let el2 = make(l2, q.action_g2, h2.clamp(-q.action_g2, q.action_g2), q.peri2, std::f64::consts::PI, q.a1 / q.alpha);
    Ok((el1, el2))
}

/// Secular double average of the perturbing function over the two mean
/// anomalies on an n x n rectangle grid, with explicit grid phases.
/// Spectrally convergent and phase-independent for analytic integrands.
pub fn average_pert_numeric_phased(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    mm: &ThreeBodyMasses,
    n: usize,
    phase1: f64,
    phase2: f64,
) -> Result<f64> {
    assert!(n > 0);
    let apo1 = el1.a * (1.0 + el1.e);
    let peri2 = el2.a * (1.0 - el2.e);
    if apo1 >= peri2 {
        return Err(Error::OrbitsIntersect { inner_apo: apo1, outer_peri: peri2 });
    }
    let inner_m = mm.inner();
    let outer_m = mm.outer();
    let q1s = orbit_positions(el1, &inner_m, n, phase1)?;
    let q2s = orbit_positions(el2, &outer_m, n, phase2)?;
    let mut vals = Vec::with_capacity(n * n);
    for q1 in &q1s {
        for q2 in &q2s {
            vals.push(crate::threebody::f_pert(*q1, *q2, mm)?);
        }
    }
    Ok(verify::pairwise_sum(&vals) / (n * n) as f64)
}

/// Secular double average of the perturbing function (zero grid phases).
pub fn average_pert_numeric(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    mm: &ThreeBodyMasses,
    n: usize,
) -> Result<f64> {
    average_pert_numeric_phased(el1, el2, mm, n, 0.0, 0.0)
}

/// Positions along an ellipse at n uniform mean anomalies l = 2 pi k/n + phase.
fn orbit_positions(el: &DelaunayElements, m: &KeplerMassParams, n: usize, phase: f64) -> Result<Vec<Vec3>> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let l = std::f64::consts::TAU * k as f64 / n as f64 + phase;
        let u = kepler::solve_kepler(l, el.e)?;
        let mut elk = *el;
        elk.mean_anom = wrap_tau(l);
        elk.ecc_anom = wrap_tau(u);
        let st = kepler::state_from_elements(&elk, m)?;
        out.push(st.q);
    }
    Ok(out)
}

/// Corrected outer fast angle of the regularized secular construction:
/// l2' = l2 + (f1'(L2) / (2 f1(L2))) <P1, Q1>, with
/// f1(L2) = f - mu2^3 M2^2 / (2 L2^2).
pub fn l2_prime(l2: f64, l2_action: f64, p1: Vec3, q1: Vec3, mm: &ThreeBodyMasses, f: f64) -> Result<f64> {
    let f1 = inner_energy_parameter(l2_action, mm, f)?;
    let f1p = mm.mu2.powi(3) * mm.gm_total * mm.gm_total / l2_action.powi(3);
    Ok(l2 + f1p / (2.0 * f1) * p1.dot(q1))
}

/// f1(L2) = f - mu2^3 M2^2 / (2 L2^2), the energy parameter left for the
/// inner problem after subtracting the outer Kepler energy at action L2.
pub fn inner_energy_parameter(l2_action: f64, mm: &ThreeBodyMasses, f: f64) -> Result<f64> {
    if !(l2_action > 0.0) {
        return Err(Error::ChartDomain { condition: "need L2 > 0" });
    }
    let f1 = f - mm.mu2.powi(3) * mm.gm_total * mm.gm_total / (2.0 * l2_action * l2_action);
    if !(f1 > 0.0) {
        return Err(Error::ChartDomain { condition: "inner energy parameter f1(L2) must be positive" });
    }
    Ok(f1)
}

/// Secular average of the regularized perturbation F_pert_reg = |z|^2 F_pert
/// over the regularized fast angles (delta1, l2'), returned as the value of
/// the regularized secular Hamiltonian's perturbing part.
///
/// The average is taken on an n x n grid uniform in the inner eccentric
/// anomaly of the shifted-mass ellipse and the outer mean anomaly; the l2'
/// correction shifts l2 by a constant at fixed delta1 and so drops out of
/// the periodic rectangle rule.
pub fn reg_average_numeric(
    inner: &KSState,
    outer: &kepler::CartesianOrbitState,
    mm: &ThreeBodyMasses,
    f: f64,
    n: usize,
) -> Result<f64> {
    assert!(n > 0);
    let outer_m = mm.outer();
    let el2 = kepler::elements_from_state(outer, &outer_m)?;
    let f1 = inner_energy_parameter(el2.action_l, mm, f)?;
    let inner_m = mm.inner();
    // Inner ellipse of the shifted gravitational mass at parameter f1.
    let el1 = ksreg::ks_ellipse_elements(inner, &inner_m, f1)?;
    let shifted = inner_m.shifted(ksreg::ks_hamiltonian(inner, &inner_m, f1));
    let apo1 = el1.a * (1.0 + el1.e);
    let peri2 = el2.a * (1.0 - el2.e);
    if apo1 >= peri2 {
        return Err(Error::OrbitsIntersect { inner_apo: apo1, outer_peri: peri2 });
    }
    // Inner positions at uniform eccentric anomaly (the LCF fast angle).
    let mut q1s = Vec::with_capacity(n);
    for k in 0..n {
        let u = std::f64::consts::TAU * k as f64 / n as f64;
        let mut elk = el1;
        elk.ecc_anom = u;
        elk.mean_anom = wrap_tau(u - el1.e * u.sin());
        let st = kepler::state_from_elements(&elk, &shifted)?;
        q1s.push(st.q);
    }
    let q2s = orbit_positions(&el2, &outer_m, n, 0.0)?;
    let mut vals = Vec::with_capacity(n * n);
    for q1 in &q1s {
        for q2 in &q2s {
            vals.push(q1.norm() * crate::threebody::f_pert(*q1, *q2, mm)?);
        }
    }
    Ok(verify::pairwise_sum(&vals) / (n * n) as f64)
}

/// Fictitious outer mass: the unique m2' > 0 with
///
///   (m0+m1)^3 m2'^3 / (m0+m1+m2') = 2 L2^2 (f - mu1^3 M1^2 / (2 L1^2)),
///
/// equivalently f1(L2, m0, m1, m2') = mu1^3 M1^2 / (2 L1^2).
pub fn fictitious_outer_mass(f: f64, l1: f64, l2: f64, m0: f64, m1: f64) -> Result<f64> {
    if !(m0 > 0.0 && m1 > 0.0) {
        return Err(Error::NonPositiveMass);
    }
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::ChartDomain { condition: "need L1 > 0 and L2 > 0" });
    }
    let m01 = m0 + m1;
    let mu1 = m0 * m1 / m01;
    let inner_scale = mu1.powi(3) * m01 * m01 / (2.0 * l1 * l1);
    let deficit = inner_scale - f;
    if deficit >= 0.0 {
        return Err(Error::NoFictitiousMass { deficit });
    }
    let tau = 2.0 * l2 * l2 * (f - inner_scale);
    // phi(m) = m01^3 m^3 / (m01 + m) is increasing from 0 to infinity.
    let phi = |m: f64| m01.powi(3) * m * m * m / (m01 + m);
    let mut hi = (tau / m01.powi(2)).cbrt().max(tau.sqrt() / m01.powf(1.5)).max(1e-3);
    while phi(hi) < tau {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    let mut m = hi.min((tau * (m01 + hi)).cbrt() / m01);
    for _ in 0..200 {
        let val = phi(m) - tau;
        if val == 0.0 {
            break;
        }
        if val > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
        // Newton step with bisection fallback.
        let dphi = m01.powi(3) * m * m * (3.0 * (m01 + m) - m) / ((m01 + m) * (m01 + m));
        let next = m - val / dphi;
        let prev = m;
        m = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if (m - prev).abs() <= 1e-16 * m.abs() || (hi - lo) <= 1e-15 * m.abs() {
            break;
        }
    }
    Ok(m)
}

/// Reduced quadrupolar flow on the chart [g1, g2; G1, G2] with fixed
/// parameters; the Hamiltonian is f_quad with an explicit (L2, mu1 m2)
/// pair so that mass substitutions do not disturb the action value.
pub struct ReducedQuadFlow {
    pub l1: f64,
    pub c: f64,
    pub a1: f64,
    pub l2: f64,
    pub mu1_m2: f64,
}

impl ReducedQuadFlow {
    pub fn hamiltonian(&self, x: &[f64]) -> Result<f64> {
        f_quad_with_l2(self.l1, x[2], x[0], x[3], self.c, self.a1, self.l2, self.mu1_m2)
    }
}

impl HamiltonianSystem for ReducedQuadFlow {
    fn dim(&self) -> usize {
        4
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let p = f_quad_partials_with_l2(self.l1, x[2], x[0], x[3], self.c, self.a1, self.l2, self.mu1_m2)
            .expect("chart domain violated inside reduced quadrupolar flow");
        out[0] = p.d_peri1;
        out[1] = 0.0;
        out[2] = p.d_g1_action;
        out[3] = p.d_g2_action;
    }
}

/// Reduced flow of the regularized quadrupolar Hamiltonian, built through
/// the honest composition a1_tilde * f_quad o k_f: the momentum rescaling
/// maps the source point (G1, g1, G2, g2) at source total momentum C to the
/// image Delaunay point (lambda L1, lambda G1, g1, G2, C_img), where
///
///   lambda = (mu1^3 M1^2 / (2 f1 L1^2))^{1/4},
///   C_img^2 = lambda^2 G1^2 + G2^2 + lambda (C^2 - G1^2 - G2^2),
///
/// and a1_tilde = L1 / sqrt(2 mu1 f1) is the shared geometric semi-major
/// axis. The scale lambda cancels identically in the braces arguments, so
/// this flow is proportional to [`ReducedQuadFlow`] with true masses; the
/// composition is kept explicit so the cancellation is verified rather
/// than assumed.
pub struct RegQuadFlow {
    pub mm: ThreeBodyMasses,
    pub l1_lcf: f64,
    pub c_source: f64,
    pub lambda: f64,
    pub a_tilde: f64,
    pub l2: f64,
}

impl RegQuadFlow {
    /// Builds the flow for a source chart with inner action l1, source
    /// total momentum c, outer action value l2, at energy parameter f.
    pub fn new(mm: &ThreeBodyMasses, l1: f64, c: f64, l2: f64, f: f64) -> Result<Self> {
        let f1 = inner_energy_parameter(l2, mm, f)?;
        let lambda = (mm.mu1.powi(3) * mm.gm_inner * mm.gm_inner / (2.0 * f1 * l1 * l1)).powf(0.25);
        let a_tilde = l1 / (2.0 * mm.mu1 * f1).sqrt();
        Ok(RegQuadFlow { mm: *mm, l1_lcf: l1, c_source: c, lambda, a_tilde, l2 })
    }

    fn image_c(&self, g1: f64, g2: f64) -> f64 {
        let l = self.lambda;
        (l * l * g1 * g1 + g2 * g2 + l * (self.c_source * self.c_source - g1 * g1 - g2 * g2)).sqrt()
    }

    pub fn hamiltonian(&self, x: &[f64]) -> Result<f64> {
        let c_img = self.image_c(x[2], x[3]);
        let v = f_quad_with_l2(
            self.lambda * self.l1_lcf,
            self.lambda * x[2],
            x[0],
            x[3],
            c_img,
            self.a_tilde,
            self.l2,
            self.mm.mu1 * self.mm.m2,
        )?;
        Ok(self.a_tilde * v)
    }
}

impl HamiltonianSystem for RegQuadFlow {
    fn dim(&self) -> usize {
        4
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let (g1, g2) = (x[2], x[3]);
        let l = self.lambda;
        let c_img = self.image_c(g1, g2);
        let p = f_quad_partials_with_l2(
            l * self.l1_lcf,
            l * g1,
            x[0],
            g2,
            c_img,
            self.a_tilde,
            self.l2,
            self.mm.mu1 * self.mm.m2,
        )
        .expect("chart domain violated inside regularized quadrupolar flow");
        let dc_dg1 = l * (l - 1.0) * g1 / c_img;
        let dc_dg2 = (1.0 - l) * g2 / c_img;
        out[0] = self.a_tilde * p.d_peri1;
        out[1] = 0.0;
        out[2] = self.a_tilde * (l * p.d_g1_action + p.d_c_total * dc_dg1);
        out[3] = self.a_tilde * (p.d_g2_action + p.d_c_total * dc_dg2);
    }
}

/// Result of the conjugacy verification between the reduced regularized
/// quadrupolar flow and the reduced quadrupolar flow with the fictitious
/// outer mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugacyCheck {
    pub m2_prime: f64,
    /// |f1(L2, m2') - mu1^3 M1^2 / (2 L1^2)| / f.
    pub mass_eq_residual: f64,
    /// Rescaling of the composed chart map after the mass substitution;
    /// the theorem makes it exactly 1.
    pub lambda: f64,
    /// Constant time rescale a1 m2 / m2' between the two flows.
    pub time_factor: f64,
    /// Period of the target (G1, g1) oscillation.
    pub period: f64,
    /// Sup over matched times and chart components of the trajectory
    /// difference under the identity matching.
    pub sup_distance: f64,
    pub fquad_drift_source: f64,
    pub fquad_drift_target: f64,
    pub g2_action_drift: f64,
}

/// Detects the period of the G1 oscillation of `sys` started at `x0` by
/// locating successive local maxima of G1, refined parabolically.
pub fn detect_g1_period(sys: &dyn HamiltonianSystem, x0: &[f64], l1_scale: f64) -> Result<f64> {
    let mut field = vec![0.0; 4];
    sys.field(x0, &mut field);
    let rate = (field[0].abs())
        .max(field[2].abs() * std::f64::consts::PI / (0.2 * l1_scale))
        .max(1e-300);
    let dt = std::f64::consts::TAU / rate / 400.0;
    let mut maxima: Vec<f64> = Vec::new();
    let mut window = [x0[2], x0[2], x0[2]];
    let mut step_of_mid: usize;
    let max_steps = 120_000usize;
    let mut x = x0.to_vec();
    let mut next = vec![0.0; 4];
    for k in 1..=max_steps {
        verify::implicit_midpoint_step(sys, &x, dt, &mut next)?;
        std::mem::swap(&mut x, &mut next);
        window[0] = window[1];
        window[1] = window[2];
        window[2] = x[2];
        step_of_mid = k.saturating_sub(1);
        if k >= 2 && window[1] >= window[0] && window[1] > window[2] {
            let denom = window[0] - 2.0 * window[1] + window[2];
            let offset = if denom != 0.0 { 0.5 * (window[0] - window[2]) / denom } else { 0.0 };
            maxima.push((step_of_mid as f64 + offset) * dt);
            if maxima.len() >= 4 {
                break;
            }
        }
    }
    if maxima.len() < 2 {
        return Err(Error::ChartDomain { condition: "could not detect a G1 oscillation period" });
    }
    Ok((maxima[maxima.len() - 1] - maxima[0]) / (maxima.len() - 1) as f64)
}

/// Verifies the quadrupolar conjugacy theorem numerically: integrates the
/// reduced regularized flow (true masses) and the reduced quadrupolar flow
/// (outer mass replaced by the fictitious m2', time rescaled by the
/// constant a1 m2 / m2') from the same chart point and reports the
/// sup-distance of the matched trajectories, together with conservation
/// diagnostics.
pub fn quad_flow_conjugacy_check(
    q0: &QuadChartPoint,
    mm: &ThreeBodyMasses,
    f: f64,
    periods: f64,
    steps_per_period: usize,
) -> Result<ConjugacyCheck> {
    let l2 = outer_action_l2(q0, mm)?;
    let l1 = q0.action_l1;
    // Target-chart inner semi-major axis, fixed by the action identity.
    let a1 = l1 * l1 / (mm.mu1 * mm.mu1 * mm.gm_inner);

    let m2_prime = fictitious_outer_mass(f, l1, l2, mm.m0, mm.m1)?;
    let mm_prime = ThreeBodyMasses::new(mm.m0, mm.m1, m2_prime)?;
    let inner_scale = mm.mu1.powi(3) * mm.gm_inner * mm.gm_inner / (2.0 * l1 * l1);
    let f1_prime = f - mm_prime.mu2.powi(3) * mm_prime.gm_total * mm_prime.gm_total / (2.0 * l2 * l2);
    let mass_eq_residual = (f1_prime - inner_scale).abs() / f;
    let lambda_prime = (inner_scale / f1_prime).powf(0.25);

    let source = RegQuadFlow::new(mm, l1, q0.c_total, l2, f)?;
    let target = ReducedQuadFlow { l1, c: q0.c_total, a1, l2, mu1_m2: mm.mu1 * m2_prime };
    let time_factor = a1 * mm.m2 / m2_prime;

    let x0 = [q0.peri1, q0.peri2, q0.action_g1, q0.action_g2];
    let period = detect_g1_period(&target, &x0, l1)?;
    let dt_target = period / steps_per_period as f64;
    let dt_source = dt_target / time_factor;
    let nsteps = (periods * steps_per_period as f64).round() as usize;

    let h_src0 = source.hamiltonian(&x0)?;
    let h_tgt0 = target.hamiltonian(&x0)?;

    let mut xs = x0.to_vec();
    let mut xt = x0.to_vec();
    let mut next = vec![0.0; 4];
    let mut sup = 0.0f64;
    let mut drift_s = 0.0f64;
    let mut drift_t = 0.0f64;
    let mut g2_drift = 0.0f64;
    for _ in 0..nsteps {
        verify::implicit_midpoint_step(&source, &xs, dt_source, &mut next)?;
        std::mem::swap(&mut xs, &mut next);
        verify::implicit_midpoint_step(&target, &xt, dt_target, &mut next)?;
        std::mem::swap(&mut xt, &mut next);
        let d = wrap_to_pi(xs[0] - xt[0])
            .abs()
            .max(wrap_to_pi(xs[1] - xt[1]).abs())
            .max((xs[2] - xt[2]).abs())
            .max((xs[3] - xt[3]).abs());
        sup = sup.max(d);
        drift_s = drift_s.max((source.hamiltonian(&xs)? - h_src0).abs() / h_src0.abs());
        drift_t = drift_t.max((target.hamiltonian(&xt)? - h_tgt0).abs() / h_tgt0.abs());
        g2_drift = g2_drift.max((xs[3] - x0[3]).abs()).max((xt[3] - x0[3]).abs());
    }

    Ok(ConjugacyCheck {
        m2_prime,
        mass_eq_residual,
        lambda: lambda_prime,
        time_factor,
        period,
        sup_distance: sup,
        fquad_drift_source: drift_s,
        fquad_drift_target: drift_t,
        g2_action_drift: g2_drift,
    })
}

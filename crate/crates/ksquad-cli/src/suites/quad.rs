//! Quadrupolar suite: the truncation residual sweep of the doubly averaged
//! perturbation, the regularized secular identity, the degenerate-ellipse
//! extension, and the two-sphere presentation. Also assembles the pinned
//! adjudication evidence embedded in every report.

use ksquad::error::Result;
use ksquad::kepler::{self, ChartFlags, DelaunayElements};
use ksquad::ksreg;
use ksquad::quat::Vec3;
use ksquad::quadrupolar::{
    self, LaplaceChartPoint, PauliSouriauPoint, QuadChartPoint,
};
use ksquad::threebody::ThreeBodyMasses;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::SuiteCtx;
use crate::report::{Adjudications, Timing};

/// Truncation residual R(0.01) of the alpha^3-normalized double average.
pub const TOL_SMALL_ALPHA: f64 = 0.05;
/// |R(alpha/2)/R(alpha) - 1/2| for the octupolar decay of the residual.
pub const TOL_HALVING: f64 = 0.15;
/// Relative defect of the regularized secular identity.
pub const TOL_SECULAR: f64 = 1e-8;
/// Fitted log-log rate defect of the degenerate-ellipse extension.
pub const TOL_RATE: f64 = 0.1;
/// Two-sphere value at a degenerate pair against the chart limit.
pub const TOL_PS_DEGENERATE: f64 = 1e-6;
/// Pericenter projection identity for the two-sphere angle expression.
pub const TOL_PS_PROJECTION: f64 = 1e-10;

/// Pinned truncation scale and node count of the adjudication oracle; the
/// evidence strings stay identical whatever the run parameters are.
const ADJUDICATION_ALPHA: f64 = 0.005;
const ADJUDICATION_NODES: usize = 64;

const SALT_SECULAR: u64 = 0x5144_0001;
const SALT_PROJECTION: u64 = 0x5144_0002;

/// Sweep fixture: geometry held fixed while the scale ratio alpha varies.
const SWEEP_E1: f64 = 0.3;
const SWEEP_E2: f64 = 0.35;
const SWEEP_DELTA: f64 = 1.2;
const SWEEP_PERI1: f64 = 0.7;
const SWEEP_PERI2: f64 = 0.3;

fn mm_reference() -> ThreeBodyMasses {
    ThreeBodyMasses::new(1.0, 0.65, 0.8).expect("positive masses")
}

/// Chart point with actions consistent with the geometry (a1, alpha, e1,
/// e2) and mutual inclination `delta`.
pub(crate) fn chart_point(
    mm: &ThreeBodyMasses,
    a1: f64,
    alpha: f64,
    e1: f64,
    e2: f64,
    delta: f64,
    peri1: f64,
    peri2: f64,
) -> QuadChartPoint {
    let l1 = mm.mu1 * (mm.gm_inner * a1).sqrt();
    let l2 = mm.mu2 * (mm.gm_total * a1 / alpha).sqrt();
    let g1 = l1 * (1.0 - e1 * e1).sqrt();
    let g2 = l2 * (1.0 - e2 * e2).sqrt();
    let c = (g1 * g1 + g2 * g2 + 2.0 * g1 * g2 * delta.cos()).sqrt();
    QuadChartPoint {
        action_l1: l1,
        action_g1: g1,
        action_g2: g2,
        peri1,
        peri2,
        c_total: c,
        a1,
        alpha,
    }
}

/// Relative residuals of the alpha^3-normalized double average against the
/// action-chart value and against the flattened inclination form.
fn truncation_residuals(mm: &ThreeBodyMasses, alpha: f64, n: usize) -> Result<(f64, f64)> {
    let q = chart_point(mm, 1.0, alpha, SWEEP_E1, SWEEP_E2, SWEEP_DELTA, SWEEP_PERI1, SWEEP_PERI2);
    let (el1, el2) = quadrupolar::quad_to_delaunay_pair(&q, mm)?;
    let fsec = quadrupolar::average_pert_numeric(&el1, &el2, mm, n)? / alpha.powi(3);
    let fq = quadrupolar::f_quad(&q, mm)?;
    let fl = quadrupolar::f_quad_laplace(
        &LaplaceChartPoint { e1: SWEEP_E1, peri1: SWEEP_PERI1, delta: SWEEP_DELTA, e2: SWEEP_E2, a1: 1.0 },
        mm.mu1,
        mm.m2,
    )?;
    Ok(((fsec - fq).abs() / fq.abs(), (fsec - fl).abs() / fl.abs()))
}

/// Max relative defect of the regularized secular identity
/// F_sec_reg = a1 * F_sec(image ellipse) over seeded configurations.
fn secular_identity(
    rng: &mut ChaCha8Rng,
    mm: &ThreeBodyMasses,
    n: usize,
    configs: usize,
) -> Result<f64> {
    let elements = |rng: &mut ChaCha8Rng, l: f64, e: f64, a: f64| -> DelaunayElements {
        let g = l * (1.0f64 - e * e).sqrt();
        let inc = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
        DelaunayElements {
            action_l: l,
            action_g: g,
            action_h: g * inc.cos(),
            mean_anom: rng.gen_range(0.0..std::f64::consts::TAU),
            arg_peri: rng.gen_range(0.0..std::f64::consts::TAU),
            node: rng.gen_range(0.0..std::f64::consts::TAU),
            a,
            e,
            inc,
            ecc_anom: 0.0,
            flags: ChartFlags::default(),
        }
    };
    let mut worst = 0.0f64;
    let mut accepted = 0;
    while accepted < configs {
        let a1 = rng.gen_range(0.1..0.3);
        let e1 = rng.gen_range(0.05..0.5);
        let el1 = elements(rng, mm.mu1 * (mm.gm_inner * a1).sqrt(), e1, a1);
        let inner = ksreg::ks_lift(
            &kepler::state_from_elements(&el1, &mm.inner())?,
            rng.gen_range(0.0..std::f64::consts::TAU),
        )?;
        let a2 = rng.gen_range(10.0..25.0);
        let e2 = rng.gen_range(0.0..0.4);
        let el2 = elements(rng, mm.mu2 * (mm.gm_total * a2).sqrt(), e2, a2);
        let outer = kepler::state_from_elements(&el2, &mm.outer())?;
        let f = rng.gen_range(0.6..1.2);

        let el2v = kepler::elements_from_state(&outer, &mm.outer())?;
        let f1 = quadrupolar::inner_energy_parameter(el2v.action_l, mm, f)?;
        let img = ksreg::ks_ellipse_elements(&inner, &mm.inner(), f1)?;
        // The mean-anomaly quadrature converges like exp(-n eta(e)); keep
        // the image eccentricity where 64 nodes are spectrally converged.
        if img.e > 0.55 {
            continue;
        }
        accepted += 1;
        let reg = quadrupolar::reg_average_numeric(&inner, &outer, mm, f, n)?;
        // Re-action the image ellipse for the unshifted inner mass; the
        // plain average only consumes its geometry.
        let l1t = mm.mu1 * (mm.gm_inner * img.a).sqrt();
        let g1t = l1t * (1.0 - img.e * img.e).sqrt();
        let el1t = DelaunayElements {
            action_l: l1t,
            action_g: g1t,
            action_h: g1t * img.inc.cos(),
            ..img
        };
        let plain = quadrupolar::average_pert_numeric(&el1t, &el2v, mm, n)?;
        worst = worst.max((reg - img.a * plain).abs() / reg.abs());
    }
    Ok(worst)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Fitted convergence rate of the braces toward their G1 = 0 extension
/// along both finite leaves; the defect |rate - 2| is the residual.
fn extension_rate() -> Result<f64> {
    // C = G2 with g1 free, then C != G2 where only sin g1 = 0 stays finite.
    let cases = [(1.2, 0.7, 0.9, 0.9), (1.2, 0.0, 0.9, 1.3)];
    let mut worst = 0.0f64;
    for (l1, g, g2, c) in cases {
        let f0 = quadrupolar::quad_braces(l1, 0.0, g, g2, c)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 0..5 {
            let eps = 1e-2 * 10f64.powf(-0.5 * k as f64);
            let err = (quadrupolar::quad_braces(l1, eps * l1, g, g2, c)? - f0).abs();
            xs.push(eps.ln());
            ys.push(err.ln());
        }
        worst = worst.max((least_squares_slope(&xs, &ys) - 2.0).abs());
    }
    Ok(worst)
}

/// Degenerate two-sphere pairs A = B against the G1 = 0 chart limit on the
/// C = G2 leaf, with matching outer scales.
fn ps_degenerate(mm: &ThreeBodyMasses) -> Result<f64> {
    let (a1, alpha, e2): (f64, f64, f64) = (1.0, 0.02, 0.35);
    let l1 = mm.mu1 * (mm.gm_inner * a1).sqrt();
    let l2 = mm.mu2 * (mm.gm_total * a1 / alpha).sqrt();
    let g2 = l2 * (1.0 - e2 * e2).sqrt();
    let mut worst = 0.0f64;
    for g1 in [0.0f64, 0.9, 1.4, 2.8, 4.4] {
        let a = -l1.sqrt() * Vec3::new(g1.cos(), 0.0, g1.sin());
        let p = PauliSouriauPoint { a, b: a, n: Vec3::EZ };
        let vp = quadrupolar::f_quad_pauli_souriau(&p, mm.mu1, mm.m2, a1, e2)?;
        let q = QuadChartPoint {
            action_l1: l1,
            action_g1: 0.0,
            action_g2: g2,
            peri1: g1,
            peri2: 0.0,
            c_total: g2,
            a1,
            alpha,
        };
        let vc = quadrupolar::f_quad(&q, mm)?;
        worst = worst.max((vp - vc).abs() / vc.abs());
    }
    Ok(worst)
}

/// Two-sphere pair for an inner ellipse with the given geometry, outer
/// normal along +z.
fn ps_geometry(l1: f64, e1: f64, g1: f64, delta: f64) -> PauliSouriauPoint {
    let n1 = Vec3::new(0.0, -delta.sin(), delta.cos());
    let e_hat = g1.cos() * Vec3::EX + g1.sin() * Vec3::new(0.0, delta.cos(), delta.sin());
    let c1 = (l1 * (1.0 - e1 * e1)).sqrt() * n1;
    let d = -(l1.sqrt() * e1) * e_hat;
    PauliSouriauPoint { a: d + c1, b: d - c1, n: Vec3::EZ }
}

/// The two-sphere angle expression equals the squared relative defect of
/// the pericenter direction against its projection onto the outer plane.
fn ps_projection(rng: &mut ChaCha8Rng, points: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..points {
        let p = ps_geometry(
            rng.gen_range(0.3..2.0),
            rng.gen_range(0.05..0.98),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::PI),
        );
        let (_, _, expr2) = quadrupolar::pauli_souriau_expressions(&p)?;
        let peri = -1.0 * (p.a + p.b);
        let proj = peri - peri.dot(p.n) * p.n;
        let defect = (peri - proj).norm_sq() / peri.norm_sq();
        worst = worst.max((expr2 - defect).abs());
    }
    Ok(worst)
}

/// Pinned adjudication evidence. Computed from fixed parameters so the
/// strings are identical in every report regardless of run options.
pub fn adjudications(timing: &mut Timing) -> Result<Adjudications> {
    let mm = mm_reference();
    let (ra, rl) = truncation_residuals(&mm, ADJUDICATION_ALPHA, ADJUDICATION_NODES)?;
    timing.quadrature_evals += (ADJUDICATION_NODES * ADJUDICATION_NODES) as u64;
    let ps = ps_degenerate(&mm)?;
    Ok(Adjudications {
        chart_discrepancy: format!(
            "action-chart braces adopted: the averaged perturbation at truncation scale \
             alpha = 5e-3 matches the action-chart value to {ra:.3e} but misses the flattened \
             inclination form by {rl:.3e}; that form's 15-term lacks its (1 - e1^2) factor, so \
             the two agree only at degenerate inner ellipses"
        ),
        ps_normalization: format!(
            "two-sphere bracket normalized with radius sqrt(L1) vertices and a unit outer \
             normal: |A - B|^2/(4 L1) = 1 - e1^2 and the pericenter term <A + B, N>^2/|A + B|^2 \
             carry no further 1/L1 scaling; degenerate pairs then match the G1 = 0 chart limit \
             to {ps:.3e}"
        ),
    })
}

pub fn run(ctx: &mut SuiteCtx) -> Result<()> {
    let mm = mm_reference();
    let n = ctx.nodes;

    let mut sweep = ctx.alpha_sweep.clone();
    sweep.sort_by(f64::total_cmp);
    sweep.dedup();
    // Every scale the checks consume: the sweep, its halves, and 0.01.
    let mut alphas = sweep.clone();
    alphas.extend(sweep.iter().map(|a| a / 2.0));
    alphas.push(0.01);
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let mut r_action = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let (ra, rl) = truncation_residuals(&mm, alpha, n)?;
        ctx.grid_row("quad.avg.residual", format!("alpha={alpha}"), ra);
        ctx.grid_row("quad.avg.residual-laplace", format!("alpha={alpha}"), rl);
        ctx.timing.quadrature_evals += (n * n) as u64;
        r_action.push(ra);
    }
    let r_at = |a: f64| -> f64 {
        let i = alphas.iter().position(|&x| x == a).expect("alpha cached");
        r_action[i]
    };

    ctx.push(
        "quad.avg.small-alpha",
        "quadrupolar-term-dominates-the-double-average",
        r_at(0.01),
        TOL_SMALL_ALPHA,
    );
    for &alpha in &sweep {
        let ratio = r_at(alpha / 2.0) / r_at(alpha);
        ctx.push(
            &format!("quad.avg.halving@{alpha}"),
            "truncation-residual-decays-at-the-octupolar-rate",
            (ratio - 0.5).abs(),
            TOL_HALVING,
        );
    }

    let r = secular_identity(&mut ctx.rng(SALT_SECULAR), &mm, n, 20)?;
    ctx.push("quad.secular.identity", "regularized-average-rescales-the-plain-average", r, TOL_SECULAR);
    ctx.timing.quadrature_evals += 2 * 20 * (n * n) as u64;

    let r = extension_rate()?;
    ctx.push("quad.extension.rate", "degenerate-extension-is-quadratic", r, TOL_RATE);

    let r = ps_degenerate(&mm)?;
    ctx.push("quad.ps.degenerate", "two-sphere-value-matches-the-chart-limit", r, TOL_PS_DEGENERATE);

    let r = ps_projection(&mut ctx.rng(SALT_PROJECTION), 100)?;
    ctx.push("quad.ps.projection", "two-sphere-angle-term-is-a-projection-defect", r, TOL_PS_PROJECTION);
    ctx.timing.sample_points += 100;
    Ok(())
}

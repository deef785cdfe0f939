//! Action-angle chart suite: Darboux bracket relations for the spatial
//! chart, the Delaunay chart, and the planar chart, plus exactness of the
//! extended rotation chart change.

use ksquad::error::Result;
use ksquad::kepler::{self, ChartFlags, DelaunayElements, KeplerMassParams};
use ksquad::lcf::{self, spatial_lcf_from_state};
use ksquad::ksreg::KSState;
use ksquad::sampling;
use ksquad::verify::{poisson_bracket, ChartFn};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::SuiteCtx;

/// Bracket-relation defect gate for finite-difference Poisson brackets.
pub const TOL_DARBOUX: f64 = 1e-6;
/// Two-form defect of the extended rotation, which is exact up to roundoff.
pub const TOL_ROTATION: f64 = 1e-10;

const SALT_SPATIAL: u64 = 0x4c43_0001;
const SALT_DELAUNAY: u64 = 0x4c43_0002;
const SALT_PLANAR: u64 = 0x4c43_0003;
const SALT_ROTATION: u64 = 0x4c43_0004;

/// A BL = 0 state whose spatial chart point sits away from every edge, so
/// finite-difference stencils stay inside the chart.
fn chart_interior_state(rng: &mut ChaCha8Rng, m: &KeplerMassParams, f: f64) -> KSState {
    loop {
        let s = sampling::sigma_state(rng);
        if let Ok(c) = spatial_lcf_from_state(&s, m, f) {
            let margin = 0.03;
            if c.action_g > margin * c.action_l
                && c.action_l - c.action_g > margin * c.action_l
                && c.action_g - c.action_h.abs() > margin * c.action_g
            {
                return s;
            }
        }
    }
}

fn spatial_darboux(rng: &mut ChaCha8Rng, points: usize) -> Result<f64> {
    let m = KeplerMassParams::new(0.8, 1.2);
    let f = 0.6;
    let mut worst = 0.0f64;
    for _ in 0..points {
        let s = chart_interior_state(rng, &m, f);
        let res = lcf::lcf_darboux_residual(&s, &m, f)?;
        for row in res {
            for v in row {
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Elements sampler kept away from the circular, equatorial, and parabolic
/// edges where Delaunay angles degenerate.
fn interior_elements(rng: &mut ChaCha8Rng, m: &KeplerMassParams) -> DelaunayElements {
    let a = rng.gen_range(0.6..1.8);
    let e = rng.gen_range(0.15..0.6);
    let inc = rng.gen_range(0.3..std::f64::consts::PI - 0.3);
    let action_l = m.mu * (m.gm * a).sqrt();
    let action_g = action_l * (1.0f64 - e * e).sqrt();
    DelaunayElements {
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
    }
}

/// {f_i, f_j} defects for the Delaunay chart on the Cartesian [q; p] chart.
/// Coordinate order [l, g, h, L, G, H]; each angle pairs with its action.
fn delaunay_darboux(rng: &mut ChaCha8Rng, points: usize) -> Result<f64> {
    let m = KeplerMassParams::new(0.9, 1.3);
    let coord = |idx: usize| {
        move |x: &[f64]| -> f64 {
            let s = kepler::CartesianOrbitState::from_chart(x);
            let el = kepler::elements_from_state(&s, &KeplerMassParams::new(0.9, 1.3)).unwrap();
            match idx {
                0 => el.mean_anom,
                1 => el.arg_peri,
                2 => el.node,
                3 => el.action_l,
                4 => el.action_g,
                _ => el.action_h,
            }
        }
    };
    let fns: Vec<Box<dyn Fn(&[f64]) -> f64>> =
        (0..6).map(|i| Box::new(coord(i)) as Box<dyn Fn(&[f64]) -> f64>).collect();
    let mut worst = 0.0f64;
    for _ in 0..points {
        let el = interior_elements(rng, &m);
        let x = kepler::state_from_elements(&el, &m)?.to_chart();
        for i in 0..6 {
            for j in (i + 1)..6 {
                let fi = if i < 3 { ChartFn::angular(&fns[i]) } else { ChartFn::plain(&fns[i]) };
                let fj = if j < 3 { ChartFn::angular(&fns[j]) } else { ChartFn::plain(&fns[j]) };
                let b = poisson_bracket(&fi, &fj, &x);
                // Momentum-first convention: {L, l} = +1, so {l, L} = -1.
                let expected = match (i, j) {
                    (0, 3) | (1, 4) | (2, 5) => -1.0,
                    _ => 0.0,
                };
                worst = worst.max((b - expected).abs());
            }
        }
    }
    Ok(worst)
}

fn planar_darboux(rng: &mut ChaCha8Rng, points: usize) -> Result<f64> {
    let m = KeplerMassParams::new(0.8, 1.2);
    let f = 0.6;
    let coord = |idx: usize| {
        move |x: &[f64]| -> f64 {
            let c = lcf::planar_lcf(
                Complex64::new(x[0], x[1]),
                Complex64::new(x[2], x[3]),
                &KeplerMassParams::new(0.8, 1.2),
                0.6,
            )
            .unwrap();
            match idx {
                0 => c.delta,
                1 => c.gamma,
                2 => c.action_l,
                _ => c.action_g,
            }
        }
    };
    let fns: Vec<Box<dyn Fn(&[f64]) -> f64>> =
        (0..4).map(|i| Box::new(coord(i)) as Box<dyn Fn(&[f64]) -> f64>).collect();
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < points {
        let z = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let w = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let c = match lcf::planar_lcf(z, w, &m, f) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if !c.angles_defined || (c.action_l - c.action_g.abs()) < 0.05 * c.action_l || c.action_l < 0.1 {
            continue;
        }
        let x = [z.re, z.im, w.re, w.im];
        for i in 0..4 {
            for j in (i + 1)..4 {
                let fi = if i < 2 { ChartFn::angular(&fns[i]) } else { ChartFn::plain(&fns[i]) };
                let fj = if j < 2 { ChartFn::angular(&fns[j]) } else { ChartFn::plain(&fns[j]) };
                let b = poisson_bracket(&fi, &fj, &x);
                let expected = match (i, j) {
                    (0, 2) | (1, 3) => -1.0,
                    _ => 0.0,
                };
                worst = worst.max((b - expected).abs());
            }
        }
        checked += 1;
    }
    Ok(worst)
}

fn rotation_exactness(rng: &mut ChaCha8Rng, points: usize) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..points {
        let pt = [
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.0..std::f64::consts::PI),
            rng.gen_range(0.0..std::f64::consts::TAU),
        ];
        let u: [f64; 6] = sampling::tangent(rng, 6).try_into().unwrap();
        let v: [f64; 6] = sampling::tangent(rng, 6).try_into().unwrap();
        worst = worst.max(lcf::rotation_two_form_residual(&pt, &u, &v).abs());
    }
    worst
}

pub fn run(ctx: &mut SuiteCtx) -> Result<()> {
    let r = spatial_darboux(&mut ctx.rng(SALT_SPATIAL), 200)?;
    ctx.push("lcf.darboux.spatial", "spatial-chart-is-action-angle", r, TOL_DARBOUX);
    ctx.timing.sample_points += 200;

    let r = delaunay_darboux(&mut ctx.rng(SALT_DELAUNAY), 200)?;
    ctx.push("lcf.darboux.delaunay", "delaunay-chart-is-action-angle", r, TOL_DARBOUX);
    ctx.timing.sample_points += 200;

    let r = planar_darboux(&mut ctx.rng(SALT_PLANAR), 200)?;
    ctx.push("lcf.darboux.planar", "planar-chart-is-action-angle", r, TOL_DARBOUX);
    ctx.timing.sample_points += 200;

    let r = rotation_exactness(&mut ctx.rng(SALT_ROTATION), 1000);
    ctx.push("lcf.rotation.two-form", "rotation-respects-the-extended-two-form", r, TOL_ROTATION);
    ctx.timing.sample_points += 1000;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_at_reduced_point_counts() {
        let ctx = SuiteCtx::new(7, 16, 1e-3, false);
        let r = spatial_darboux(&mut ctx.rng(SALT_SPATIAL), 12).unwrap();
        assert!(r < TOL_DARBOUX, "spatial {r:e}");
        let r = delaunay_darboux(&mut ctx.rng(SALT_DELAUNAY), 12).unwrap();
        assert!(r < TOL_DARBOUX, "delaunay {r:e}");
        let r = planar_darboux(&mut ctx.rng(SALT_PLANAR), 12).unwrap();
        assert!(r < TOL_DARBOUX, "planar {r:e}");
        let r = rotation_exactness(&mut ctx.rng(SALT_ROTATION), 100);
        assert!(r < TOL_ROTATION, "rotation {r:e}");
    }
}

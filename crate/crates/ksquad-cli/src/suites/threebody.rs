//! Regularized lunar-flow suite: conservation of the bilinear form and the
//! regularized energy along long implicit-midpoint runs, and a gradient
//! consistency check for the perturbing function.

use ksquad::error::Result;
use ksquad::ksreg;
use ksquad::quat::Vec3;
use ksquad::sampling;
use ksquad::threebody::{self, LunarFlow, LunarState, ThreeBodyMasses};
use ksquad::verify;
use rand_chacha::ChaCha8Rng;

use super::SuiteCtx;

/// Drift gate for the bilinear form, a quadratic first integral that the
/// midpoint rule conserves to roundoff.
pub const TOL_BL_DRIFT: f64 = 1e-10;
/// Energy wobble gate; midpoint keeps the energy bounded at O(dt^2).
pub const TOL_ENERGY: f64 = 1e-6;
/// Relative agreement of the analytic perturbation gradient with finite
/// differences.
pub const TOL_GRAD: f64 = 1e-6;

const SALT_FLOW: u64 = 0x3342_0001;
const SALT_GRAD: u64 = 0x3342_0002;

fn lunar_masses() -> ThreeBodyMasses {
    ThreeBodyMasses::new(1.0, 0.65, 0.8).expect("positive masses")
}

/// Hierarchical initial state: an inner BL = 0 point of order one and an
/// outer body several inner radii away.
fn lunar_state(rng: &mut ChaCha8Rng) -> LunarState {
    LunarState {
        inner: sampling::sigma_state(rng),
        p2: sampling::vec3_in(rng, 0.3),
        q2: sampling::vec3_in(rng, 1.0) + Vec3::new(0.0, 6.0, 0.0),
    }
}

/// Runs the regularized flow and reports (max BL drift, max energy wobble).
fn flow_drifts(rng: &mut ChaCha8Rng, dt: f64, steps: usize) -> Result<(f64, f64)> {
    let mm = lunar_masses();
    let f = 0.7;
    let sys = LunarFlow { mm, f };
    let st = lunar_state(rng);
    let x0 = st.to_chart();
    let e0 = threebody::reg_hamiltonian(&st.inner, st.p2, st.q2, &mm, f)?.total;
    let bl0 = ksreg::bl(st.inner.z, st.inner.w);
    let mut max_e = 0.0f64;
    let mut max_bl = 0.0f64;
    verify::integrate(&sys, &x0, dt, steps, &mut |_, x| {
        let s = LunarState::from_chart(x);
        let e = threebody::reg_hamiltonian(&s.inner, s.p2, s.q2, &mm, f)
            .map(|split| split.total)
            .unwrap_or(f64::INFINITY);
        max_e = max_e.max((e - e0).abs());
        max_bl = max_bl.max((ksreg::bl(s.inner.z, s.inner.w) - bl0).abs());
    })?;
    Ok((max_bl, max_e))
}

fn pert_grad_defect(rng: &mut ChaCha8Rng, points: usize) -> Result<f64> {
    let mm = lunar_masses();
    let mut worst = 0.0f64;
    for _ in 0..points {
        let q1 = sampling::vec3_in(rng, 1.0);
        let q2 = sampling::vec3_in(rng, 1.5) + Vec3::new(0.0, 5.0, 0.0);
        let (g1, g2) = threebody::f_pert_grad(q1, q2, &mm)?;
        let h = verify::FD_STEP;
        for axis in 0..3 {
            let mut e = Vec3::new(0.0, 0.0, 0.0);
            match axis {
                0 => e.x = h,
                1 => e.y = h,
                _ => e.z = h,
            }
            let d1 = (threebody::f_pert(q1 + e, q2, &mm)? - threebody::f_pert(q1 - e, q2, &mm)?)
                / (2.0 * h);
            let d2 = (threebody::f_pert(q1, q2 + e, &mm)? - threebody::f_pert(q1, q2 - e, &mm)?)
                / (2.0 * h);
            let (a1, a2) = match axis {
                0 => (g1.x, g2.x),
                1 => (g1.y, g2.y),
                _ => (g1.z, g2.z),
            };
            let scale = a1.abs().max(a2.abs()).max(1.0);
            worst = worst.max((a1 - d1).abs() / scale).max((a2 - d2).abs() / scale);
        }
    }
    Ok(worst)
}

pub fn run(ctx: &mut SuiteCtx) -> Result<()> {
    let steps = 10_000;
    let (bl, energy) = flow_drifts(&mut ctx.rng(SALT_FLOW), ctx.dt, steps)?;
    ctx.push("three.flow.bl-drift", "bilinear-form-is-a-first-integral", bl, TOL_BL_DRIFT);
    ctx.push("three.flow.energy", "regularized-energy-stays-bounded", energy, TOL_ENERGY);
    ctx.timing.flow_steps += steps as u64;

    let r = pert_grad_defect(&mut ctx.rng(SALT_GRAD), 50)?;
    ctx.push("three.pert.gradient", "perturbation-gradient-consistency", r, TOL_GRAD);
    ctx.timing.sample_points += 50;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_flow_conserves_both_integrals() {
        let ctx = SuiteCtx::new(9, 16, 1e-3, false);
        let (bl, e) = flow_drifts(&mut ctx.rng(SALT_FLOW), 2e-3, 300).unwrap();
        assert!(bl < TOL_BL_DRIFT, "bl {bl:e}");
        assert!(e < TOL_ENERGY, "energy {e:e}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ctx = SuiteCtx::new(9, 16, 1e-3, false);
        let r = pert_grad_defect(&mut ctx.rng(SALT_GRAD), 10).unwrap();
        assert!(r < TOL_GRAD, "grad {r:e}");
    }
}

//! End-to-end tests through the public API: chart roundtrips, flow
//! conservation, the closed-form quadrupolar term against the double
//! average, and the secular conjugacy on one configuration.

use ksquad::kepler::{self, CartesianOrbitState};
use ksquad::ksreg::{self, KSState};
use ksquad::quadrupolar::{self, QuadChartPoint};
use ksquad::quat::{Quaternion, Vec3};
use ksquad::threebody::{LunarFlow, LunarState, ThreeBodyMasses};
use ksquad::verify;

fn masses() -> ThreeBodyMasses {
    ThreeBodyMasses::new(1.0, 0.65, 0.8).unwrap()
}

/// Consistent chart point from geometry (a1, alpha, e1, e2, delta).
fn chart_point(mm: &ThreeBodyMasses, alpha: f64, e1: f64, e2: f64, delta: f64) -> QuadChartPoint {
    let l1 = mm.mu1 * mm.gm_inner.sqrt();
    let l2 = mm.mu2 * (mm.gm_total / alpha).sqrt();
    let g1 = l1 * (1.0 - e1 * e1).sqrt();
    let g2 = l2 * (1.0 - e2 * e2).sqrt();
    let c = (g1 * g1 + g2 * g2 + 2.0 * g1 * g2 * delta.cos()).sqrt();
    QuadChartPoint {
        action_l1: l1,
        action_g1: g1,
        action_g2: g2,
        peri1: 0.7,
        peri2: 0.3,
        c_total: c,
        a1: 1.0,
        alpha,
    }
}

#[test]
fn lift_and_project_agree_with_direct_elements() {
    let m = kepler::KeplerMassParams { mu: 0.9, gm: 1.3 };
    let s = CartesianOrbitState::new(Vec3::new(0.25, -0.4, 0.3), Vec3::new(0.8, 0.5, -0.6));
    let lifted = ksreg::ks_lift(&s, 1.1).unwrap();
    let back = ksreg::ks_map(&lifted).unwrap();
    assert!((back.p - s.p).norm() < 1e-13 && (back.q - s.q).norm() < 1e-13);

    // On the zero energy level the image ellipse is the physical one.
    let f = -kepler::kepler_energy(&s, &m).unwrap();
    let img = ksreg::ks_ellipse_elements(&lifted, &m, f).unwrap();
    let direct = kepler::elements_from_state(&s, &m).unwrap();
    assert!((img.a - direct.a).abs() < 1e-10 * direct.a, "a: {} vs {}", img.a, direct.a);
    assert!((img.e - direct.e).abs() < 1e-10, "e: {} vs {}", img.e, direct.e);
    assert!((img.inc - direct.inc).abs() < 1e-10, "inc: {} vs {}", img.inc, direct.inc);
}

#[test]
fn lunar_flow_conserves_bilinear_form_and_energy() {
    let mm = masses();
    let flow = LunarFlow { mm, f: 0.7 };
    let inner = KSState {
        z: Quaternion::from_parts(0.9, 0.2, -0.3, 0.1),
        w: Quaternion::from_parts(0.1, 0.5, 0.4, -0.2),
    };
    let st = LunarState { inner, p2: Vec3::new(0.04, -0.25, 0.1), q2: Vec3::new(0.5, 6.0, 0.4) };
    let x0 = st.to_chart();
    let bl0 = ksreg::bl(inner.z, inner.w);
    let e0 = ksquad::threebody::reg_hamiltonian(&st.inner, st.p2, st.q2, &mm, 0.7).unwrap().total;

    let mut bl_drift = 0.0f64;
    let mut e_drift = 0.0f64;
    let scale = 1.0 + bl0.abs().max(e0.abs());
    verify::integrate(&flow, &x0, 1e-3, 500, &mut |_, x| {
        let s = LunarState::from_chart(x);
        let bl = ksreg::bl(s.inner.z, s.inner.w);
        let e = ksquad::threebody::reg_hamiltonian(&s.inner, s.p2, s.q2, &mm, 0.7)
            .map(|h| h.total)
            .unwrap_or(f64::INFINITY);
        bl_drift = bl_drift.max((bl - bl0).abs() / scale);
        e_drift = e_drift.max((e - e0).abs() / scale);
    })
    .unwrap();
    assert!(bl_drift < 1e-11, "bilinear form drift {bl_drift:e}");
    assert!(e_drift < 1e-7, "energy drift {e_drift:e}");
}

#[test]
fn closed_form_tracks_the_double_average_at_small_alpha() {
    let mm = masses();
    let q = chart_point(&mm, 0.02, 0.3, 0.35, 1.2);
    let (el1, el2) = quadrupolar::quad_to_delaunay_pair(&q, &mm).unwrap();
    let fsec = quadrupolar::average_pert_numeric(&el1, &el2, &mm, 48).unwrap() / q.alpha.powi(3);
    let fq = quadrupolar::f_quad(&q, &mm).unwrap();
    let resid = (fsec - fq).abs() / fq.abs();
    assert!(resid < 0.05, "truncation residual {resid:e}");
}

#[test]
fn secular_flows_are_conjugate_after_the_mass_substitution() {
    let mm = masses();
    let q = chart_point(&mm, 0.05, 0.4, 0.3, 0.8);
    let f = 1.5 * mm.mu1 * mm.gm_inner / 2.0;
    let chk = quadrupolar::quad_flow_conjugacy_check(&q, &mm, f, 2.0, 2000).unwrap();
    assert!((chk.lambda - 1.0).abs() < 1e-11, "lambda {:e}", chk.lambda - 1.0);
    assert!(chk.mass_eq_residual < 1e-12, "mass root {:e}", chk.mass_eq_residual);
    assert!(chk.g2_action_drift < 1e-12, "outer action {:e}", chk.g2_action_drift);
    assert!(chk.sup_distance < 1e-6, "sup distance {:e}", chk.sup_distance);
    assert!(chk.time_factor > 0.0 && chk.period > 0.0);
}

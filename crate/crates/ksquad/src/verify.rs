//! Symplectic verification numerics.
//!
//! Charts are flat slices laid out as [q-block; p-block]: the first n
//! entries are positions, the last n are the conjugate momenta. The
//! canonical two-form is sum_i dp_i ^ dq_i and the Poisson bracket is
//!
//!   {f, g} = sum_i (df/dp_i dg/dq_i - df/dq_i dg/dp_i),
//!
//! so that {p_i, q_i} = +1 and dX/dt = {H, X} along the Hamiltonian flow
//! q' = dH/dp, p' = -dH/dq.

use crate::error::{Error, Result};

/// Cube root of machine epsilon, the usual central-difference step scale.
pub const FD_STEP: f64 = 6.055454452393343e-6;

/// Canonical two-form sum_i dp_i ^ dq_i on a [q; p] chart of dimension 2n,
/// evaluated on a pair of tangent vectors.
pub fn canonical_two_form(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len());
    assert_eq!(u.len() % 2, 0, "canonical chart must be even dimensional");
    let n = u.len() / 2;
    let mut acc = 0.0;
    for i in 0..n {
        acc += u[n + i] * v[i] - u[i] * v[n + i];
    }
    acc
}

/// Directional derivative of `map` at `x` along `u`, by symmetric difference.
pub fn directional_derivative(map: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], u: &[f64]) -> Vec<f64> {
    let unorm = u.iter().fold(0.0f64, |m, &c| m.max(c.abs())).max(1e-300);
    let xnorm = x.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
    let h = FD_STEP * (1.0 + xnorm) / unorm;
    let xp: Vec<f64> = x.iter().zip(u).map(|(&a, &b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(u).map(|(&a, &b)| a - h * b).collect();
    let fp = map(&xp);
    let fm = map(&xm);
    fp.iter().zip(&fm).map(|(&a, &b)| (a - b) / (2.0 * h)).collect()
}

/// Residual of pulling the canonical form on the image chart back through
/// `map` against the canonical form on the source chart:
///
///   omega_target(Dmap u, Dmap v) - omega_source(u, v).
///
/// When `differential` is given it must return the exact directional
/// derivative Dmap(x)[u]; otherwise a central difference is used.
pub fn pullback_residual(
    map: &dyn Fn(&[f64]) -> Vec<f64>,
    differential: Option<&dyn Fn(&[f64], &[f64]) -> Vec<f64>>,
    x: &[f64],
    u: &[f64],
    v: &[f64],
) -> f64 {
    let (du, dv) = match differential {
        Some(d) => (d(x, u), d(x, v)),
        None => (directional_derivative(map, x, u), directional_derivative(map, x, v)),
    };
    canonical_two_form(&du, &dv) - canonical_two_form(u, v)
}

/// Scalar chart function for Poisson brackets. Angle-valued functions set
/// `angle` so their finite differences are wrapped across the 2 pi seam.
pub struct ChartFn<'a> {
    pub eval: &'a dyn Fn(&[f64]) -> f64,
    pub angle: bool,
}

impl<'a> ChartFn<'a> {
    pub fn plain(eval: &'a dyn Fn(&[f64]) -> f64) -> Self {
        ChartFn { eval, angle: false }
    }

    pub fn angular(eval: &'a dyn Fn(&[f64]) -> f64) -> Self {
        ChartFn { eval, angle: true }
    }
}

fn wrap_to_pi(d: f64) -> f64 {
    let mut d = d.rem_euclid(std::f64::consts::TAU);
    if d > std::f64::consts::PI {
        d -= std::f64::consts::TAU;
    }
    d
}

fn partial(f: &ChartFn, x: &[f64], i: usize) -> f64 {
    let h = FD_STEP * x[i].abs().max(1.0);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    let mut d = (f.eval)(&xp) - (f.eval)(&xm);
    if f.angle {
        d = wrap_to_pi(d);
    }
    d / (2.0 * h)
}

/// Poisson bracket {f, g} at `x` by central differences on a [q; p] chart.
pub fn poisson_bracket(f: &ChartFn, g: &ChartFn, x: &[f64]) -> f64 {
    assert_eq!(x.len() % 2, 0);
    let n = x.len() / 2;
    let mut acc = 0.0;
    for i in 0..n {
        let fq = partial(f, x, i);
        let fp = partial(f, x, n + i);
        let gq = partial(g, x, i);
        let gp = partial(g, x, n + i);
        acc += fp * gq - fq * gp;
    }
    acc
}

/// Hamiltonian system on a [q; p] chart, described by its gradient.
pub trait HamiltonianSystem {
    fn dim(&self) -> usize;
    /// Writes the full gradient (dH/dq, dH/dp) into `out`.
    fn grad(&self, x: &[f64], out: &mut [f64]);

    /// Symplectic vector field (q' = dH/dp, p' = -dH/dq) into `out`.
    fn field(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim() / 2;
        let mut g = vec![0.0; self.dim()];
        self.grad(x, &mut g);
        for i in 0..n {
            out[i] = g[n + i];
            out[n + i] = -g[i];
        }
    }
}

/// One implicit midpoint step. The fixed point is iterated to floating
/// point stagnation so that quadratic first integrals are conserved to
/// roundoff over long runs.
pub fn implicit_midpoint_step(sys: &dyn HamiltonianSystem, x: &[f64], dt: f64, out: &mut [f64]) -> Result<()> {
    let dim = sys.dim();
    let scale = x.iter().fold(0.0f64, |m, &c| m.max(c.abs())) + 1.0;
    let tol = 1e-15 * scale;
    let mut y = x.to_vec();
    let mut mid = vec![0.0; dim];
    let mut f = vec![0.0; dim];
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for iter in 0..100 {
        for i in 0..dim {
            mid[i] = 0.5 * (x[i] + y[i]);
        }
        sys.field(&mid, &mut f);
        let mut delta = 0.0f64;
        for i in 0..dim {
            let next = x[i] + dt * f[i];
            delta = delta.max((next - y[i]).abs());
            y[i] = next;
        }
        if delta <= tol {
            out.copy_from_slice(&y);
            return Ok(());
        }
        // Allow stagnation at a few ulps above the absolute tolerance.
        if delta >= best {
            stalled += 1;
            if stalled >= 3 && delta <= 1e-12 * scale {
                out.copy_from_slice(&y);
                return Ok(());
            }
            if stalled >= 8 {
                return Err(Error::MidpointDiverged { iters: iter + 1, residual: delta });
            }
        } else {
            best = delta;
            stalled = 0;
        }
    }
    Err(Error::MidpointDiverged { iters: 100, residual: best })
}

/// Integrates `nsteps` midpoint steps of size `dt`, invoking `observer`
/// with (step index, state) after each step. Returns the final state.
pub fn integrate(
    sys: &dyn HamiltonianSystem,
    x0: &[f64],
    dt: f64,
    nsteps: usize,
    observer: &mut dyn FnMut(usize, &[f64]),
) -> Result<Vec<f64>> {
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    for k in 0..nsteps {
        implicit_midpoint_step(sys, &x, dt, &mut next)?;
        std::mem::swap(&mut x, &mut next);
        observer(k, &x);
    }
    Ok(x)
}

/// Pairwise (cascade) sum, accurate to a few ulps independent of length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Average of a 2 pi periodic function over n uniform nodes 2 pi k / n.
/// Spectrally accurate for smooth periodic integrands.
pub fn periodic_average(f: &dyn Fn(f64) -> f64, n: usize) -> f64 {
    assert!(n > 0);
    let vals: Vec<f64> = (0..n).map(|k| f(std::f64::consts::TAU * k as f64 / n as f64)).collect();
    pairwise_sum(&vals) / n as f64
}

/// Average of a doubly 2 pi periodic function over an n x n uniform grid.
pub fn periodic_average_2d(f: &dyn Fn(f64, f64) -> f64, n: usize) -> f64 {
    assert!(n > 0);
    let mut vals = Vec::with_capacity(n * n);
    for j in 0..n {
        let a = std::f64::consts::TAU * j as f64 / n as f64;
        for k in 0..n {
            let b = std::f64::consts::TAU * k as f64 / n as f64;
            vals.push(f(a, b));
        }
    }
    pairwise_sum(&vals) / (n * n) as f64
}

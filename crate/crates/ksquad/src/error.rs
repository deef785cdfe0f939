//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op} requires a unit quaternion, got |q| = {norm:.6e}")]
    NonUnit { op: &'static str, norm: f64 },

    #[error("{op} is singular at the origin")]
    AtOrigin { op: &'static str },

    #[error("{op} requires an orthonormal input pair (defect {defect:.3e})")]
    NonOrthonormal { op: &'static str, defect: f64 },

    #[error("eccentricity must lie in [0, 1), got {e}")]
    Eccentricity { e: f64 },

    #[error("Kepler equation solver failed for l = {mean_anom}, e = {e}")]
    KeplerDiverged { mean_anom: f64, e: f64 },

    #[error("state is not a bound orbit (energy {energy:.6e} >= 0)")]
    NotElliptic { energy: f64 },

    #[error("shifted mass parameter is not positive ({value:.6e}); no bound ellipse")]
    ShiftedMassNonpositive { value: f64 },

    #[error("chart domain violated: {condition}")]
    ChartDomain { condition: &'static str },

    #[error("masses must be positive")]
    NonPositiveMass,

    #[error("collision configuration: {which} separation vanishes")]
    Collision { which: &'static str },

    #[error("orbits intersect: inner apocenter {inner_apo:.6e} >= outer pericenter {outer_peri:.6e}")]
    OrbitsIntersect { inner_apo: f64, outer_peri: f64 },

    #[error("secular Hamiltonian has no finite limit at G1 = 0 for these arguments")]
    SecularSingular,

    #[error("no fictitious outer mass: f is below the inner Kepler energy scale by {deficit:.6e}")]
    NoFictitiousMass { deficit: f64 },

    #[error("implicit midpoint fixed point did not converge after {iters} iterations (residual {residual:.3e})")]
    MidpointDiverged { iters: usize, residual: f64 },
}

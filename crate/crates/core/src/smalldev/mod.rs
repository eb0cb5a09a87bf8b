//! Monte Carlo estimation of small-deviation probabilities P(‖X‖_{L_q(μ)} < ε),
//! rate fitting and comparison against predicted exponents.

mod curve;
mod fit;
mod predict;
mod verify;

pub use curve::{
    estimate_curve, geometric_grid, lq_norm, simulate_norms, wilson, CurvePoint, PointFlag, Quadrature,
    SmallDevCurve, MAX_SITES, MIN_REPS, SPARSE_COUNT, Z95,
};
pub use fit::{fit_rate, RateFit};
pub use predict::{predicted_exponent, Prediction, PredictionSpec};
pub use verify::{
    system_prediction, system_sites, verify_sites, verify_system, LogFactor, VerifyBudget, Verdict,
    VerifyReport, Window,
};

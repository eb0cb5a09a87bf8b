//! Mixed outer and inner entropies of measures, and metric entropy of point
//! clouds.

mod curve;
mod metric;
mod mixed;
mod params;

pub use curve::{loglog_slope, write_curves_csv, Bound, EntropyCurve, EntropyKind, EntropyValue, PowerFit};
pub use metric::{covering_number, inner_entropy, packing_number, sigma_infty};
pub use mixed::{
    delta_packing, delta_packing_system, sigma_line_exact, sigma_line_exact_curve, sigma_selfsimilar,
    sigma_selfsimilar_curve, DeltaResult, DyadicOptions,
};
pub use params::{j_functional, MixedParams};

//! Inversion of visibility-reduction data to an absolute absorption cross section.
//!
//! The full estimator fits the velocity-averaged model to a distance scan with the
//! cross section as the only free parameter. The quick estimator assumes a
//! monochromatic beam at the first minimum and is biased low for real beams.

mod curve;
mod fit;
mod minimize;
mod quick;

pub use curve::{chi_square, chi_square_with, predict_curve, CurvePrediction, PredictOptions, ReductionCurve};
pub use fit::{fit_sigma, fit_sigma_with, FitOptions, SigmaFitResult, TracePoint};
pub use minimize::{brent_minimize, bisect_root};
pub use quick::{propagate_systematics, quick_sigma, systematic_error, QUICK_SIGMA_BIAS_NOTE};

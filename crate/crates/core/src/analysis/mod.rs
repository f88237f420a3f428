//! Analytic side: critical curves, the contour integral and its approximants.

pub mod approx;
pub mod contour;
pub mod critical;
pub mod gamma;
pub mod quad;

pub use approx::{boundary_layer_approx, g_zeta, pick_sign, saddle_approx, smallt_approx, Gates, LayerApprox, LayerCurve, SaddleApprox};
pub use contour::{contour_integral, reconstruct_h, ContourOptions, ContourResult, Route};
pub use critical::{Branch, CriticalData, Layer, PhiEval, Regime};
pub use gamma::log_gamma;

//! Log densities of the hierarchy's priors. Support violations return −∞.

use crate::specfun::{lgamma, student_t_ln_pdf};

const LN_SQRT_2PI: f64 = 0.9189385332046727418;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    /// Beta(2,2) on (0,1): density 6x(1−x).
    Beta22,
    /// Half-Normal(0, scale²) on [0, ∞).
    HalfNormal { scale: f64 },
    /// Half-t with df ν and scale s on [0, ∞).
    HalfT { df: f64, scale: f64 },
    /// Normal(mean, sd²).
    Normal { mean: f64, sd: f64 },
}

/// Log prior density, including normalising constants.
pub fn prior_logpdf(prior: Prior, x: f64) -> f64 {
    match prior {
        Prior::Beta22 => {
            if x <= 0.0 || x >= 1.0 {
                f64::NEG_INFINITY
            } else {
                6.0f64.ln() + x.ln() + (-x).ln_1p()
            }
        }
        Prior::HalfNormal { scale } => {
            if x < 0.0 {
                f64::NEG_INFINITY
            } else {
                0.5 * (2.0 / std::f64::consts::PI).ln() - scale.ln()
                    - 0.5 * (x / scale).powi(2)
            }
        }
        Prior::HalfT { df, scale } => {
            if x < 0.0 {
                f64::NEG_INFINITY
            } else {
                std::f64::consts::LN_2 + student_t_ln_pdf(x / scale, df) - scale.ln()
            }
        }
        Prior::Normal { mean, sd } => {
            let z = (x - mean) / sd;
            -LN_SQRT_2PI - sd.ln() - 0.5 * z * z
        }
    }
}

/// ln Γ((ν+1)/2) − ln Γ(ν/2) − ½ln(νπ): the Student-t normaliser, exposed for
/// tests that rebuild half-t densities from scratch.
pub fn t_ln_norm(df: f64) -> f64 {
    lgamma(0.5 * (df + 1.0)) - lgamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln()
}

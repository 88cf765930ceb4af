//! The multiplicative log-Laplace nugget ε with tail index α₀.
//!
//! Parameterised so that ln ε ~ Laplace(0, 1/α₀):
//! CDF ½x^{α₀} on (0,1], 1 − ½x^{−α₀} above 1; density (α₀/2)x^{α₀−1} below 1
//! and (α₀/2)x^{−α₀−1} above. Power moments E[ε^p] = 1 / (1 − (p/α₀)²) exist
//! for |p| < α₀.

use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLaplace {
    alpha0: f64,
}

impl LogLaplace {
    /// α₀ > 1 is the prior support of the nugget index.
    pub fn new(alpha0: f64) -> Result<Self> {
        if !(alpha0 > 1.0) {
            return Err(Error::domain(
                "LogLaplace::new",
                format!("alpha0 must be > 1, got {alpha0}"),
            ));
        }
        Ok(LogLaplace { alpha0 })
    }

    #[inline]
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(
                "loglaplace_cdf",
                format!("x must be > 0, got {x}"),
            ));
        }
        Ok(if x <= 1.0 {
            0.5 * x.powf(self.alpha0)
        } else {
            1.0 - 0.5 * x.powf(-self.alpha0)
        })
    }

    /// ln F(x); stays finite deep in the lower tail.
    #[inline]
    pub fn ln_cdf(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        if x <= 1.0 {
            -std::f64::consts::LN_2 + self.alpha0 * x.ln()
        } else {
            (-0.5 * (-self.alpha0 * x.ln()).exp()).ln_1p()
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(
                "loglaplace_pdf",
                format!("x must be > 0, got {x}"),
            ));
        }
        Ok(self.ln_pdf(x).exp())
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        let a = self.alpha0;
        if x <= 1.0 {
            (0.5 * a).ln() + (a - 1.0) * x.ln()
        } else {
            (0.5 * a).ln() - (a + 1.0) * x.ln()
        }
    }

    /// Exact inverse of the piecewise CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(
                "loglaplace_quantile",
                format!("p must be in (0,1), got {p}"),
            ));
        }
        Ok(if p <= 0.5 {
            (2.0 * p).powf(1.0 / self.alpha0)
        } else {
            (2.0 * (1.0 - p)).powf(-1.0 / self.alpha0)
        })
    }

    #[inline]
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        let u = rng.uniform();
        if u <= 0.5 {
            (2.0 * u).powf(1.0 / self.alpha0)
        } else {
            (2.0 * (1.0 - u)).powf(-1.0 / self.alpha0)
        }
    }

    /// E[ε^p] = 1/(1 − (p/α₀)²), defined for |p| < α₀.
    pub fn moment(&self, p: f64) -> Result<f64> {
        if p.abs() >= self.alpha0 {
            return Err(Error::MomentDiverges(format!(
                "E[eps^{p}] diverges at alpha0 = {}",
                self.alpha0
            )));
        }
        let r = p / self.alpha0;
        Ok(1.0 / (1.0 - r * r))
    }
}

//! Generalised Pareto distribution for threshold exceedances.

use crate::error::{Error, Result};

/// GPD with threshold y₀, scale σ > 0, shape ξ (unrestricted sign).
/// Tail CDF H(y) = 1 − (1 + ξ(y−y₀)/σ)^{−1/ξ} on 1 + ξ(y−y₀)/σ > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gpd {
    pub y0: f64,
    pub sigma: f64,
    pub xi: f64,
}

/// Below this |ξ| the exponential-limit branch is used; β_ξ regression can
/// produce tiny shapes at low-elevation sites and the direct form cancels.
const XI_EPS: f64 = 1e-8;

impl Gpd {
    pub fn new(y0: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(
                "Gpd::new",
                format!("sigma must be > 0, got {sigma}"),
            ));
        }
        if !y0.is_finite() || !xi.is_finite() {
            return Err(Error::domain("Gpd::new", "y0, xi must be finite".to_string()));
        }
        Ok(Gpd { y0, sigma, xi })
    }

    /// True when 1 + ξ(y−y₀)/σ > 0 and y ≥ y₀.
    #[inline]
    pub fn in_support(&self, y: f64) -> bool {
        y >= self.y0 && 1.0 + self.xi * (y - self.y0) / self.sigma > 0.0
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        if !self.in_support(y) {
            return Err(Error::domain(
                "gpd_cdf",
                format!("y = {y} outside support (y0 {}, sigma {}, xi {})", self.y0, self.sigma, self.xi),
            ));
        }
        let z = (y - self.y0) / self.sigma;
        Ok(if self.xi.abs() < XI_EPS {
            -(-z).exp_m1()
        } else {
            -(-(1.0 / self.xi) * (self.xi * z).ln_1p()).exp_m1()
        })
    }

    /// Survival H̄(y) = (1 + ξ(y−y₀)/σ)^{−1/ξ}, exact deep into the tail
    /// where 1 − H(y) has already rounded away.
    pub fn sf(&self, y: f64) -> Result<f64> {
        if !self.in_support(y) {
            return Err(Error::domain(
                "gpd_sf",
                format!("y = {y} outside support"),
            ));
        }
        let z = (y - self.y0) / self.sigma;
        Ok(if self.xi.abs() < XI_EPS {
            (-z).exp()
        } else {
            (-(1.0 / self.xi) * (self.xi * z).ln_1p()).exp()
        })
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        if !self.in_support(y) {
            return Err(Error::domain(
                "gpd_pdf",
                format!("y = {y} outside support"),
            ));
        }
        Ok(self.ln_pdf(y).exp())
    }

    /// ln density; −∞ outside the support (proposal-rejection friendly).
    #[inline]
    pub fn ln_pdf(&self, y: f64) -> f64 {
        if !self.in_support(y) {
            return f64::NEG_INFINITY;
        }
        let z = (y - self.y0) / self.sigma;
        if self.xi.abs() < XI_EPS {
            -z - self.sigma.ln()
        } else {
            -(1.0 / self.xi + 1.0) * (self.xi * z).ln_1p() - self.sigma.ln()
        }
    }

    /// H⁻¹(p) for p ∈ [0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain(
                "gpd_quantile",
                format!("p must be in [0,1), got {p}"),
            ));
        }
        let l = -(-p).ln_1p(); // −ln(1−p), exact for small p too
        Ok(if self.xi.abs() < XI_EPS {
            self.y0 + self.sigma * l
        } else {
            self.y0 + self.sigma / self.xi * (self.xi * l).exp_m1()
        })
    }

    /// y with H̄(y) = `tail`; the survival-side inverse stays exact for tail
    /// masses far below f64's resolution around 1.
    pub fn quantile_upper(&self, tail: f64) -> Result<f64> {
        if !(tail > 0.0 && tail <= 1.0) {
            return Err(Error::domain(
                "gpd_quantile_upper",
                format!("tail mass must be in (0,1], got {tail}"),
            ));
        }
        let l = -tail.ln();
        Ok(if self.xi.abs() < XI_EPS {
            self.y0 + self.sigma * l
        } else {
            self.y0 + self.sigma / self.xi * (self.xi * l).exp_m1()
        })
    }
}

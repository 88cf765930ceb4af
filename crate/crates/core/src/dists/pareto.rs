//! Standard Pareto (x_m = 1, α = 1) and the Pareto link g(z) = 1/Φ̄(z)
//! mapping a standard Gaussian to standard Pareto margins.

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::specfun::{ln_std_normal_sf, std_normal_sf};

/// Standard Pareto: F(x) = 1 − 1/x on [1, ∞).
#[derive(Debug, Clone, Copy, Default)]
pub struct Pareto1;

impl Pareto1 {
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x < 1.0 {
            return Err(Error::domain(
                "pareto_cdf",
                format!("x must be >= 1, got {x}"),
            ));
        }
        Ok(1.0 - 1.0 / x)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain(
                "pareto_quantile",
                format!("p must be in [0,1), got {p}"),
            ));
        }
        Ok(1.0 / (1.0 - p))
    }

    #[inline]
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        1.0 / (1.0 - rng.uniform())
    }
}

/// Natural-scale values are capped where Φ̄(z) would underflow; the log-scale
/// variant below is exact arbitrarily far out.
pub const PARETO_LINK_LN_CAP: f64 = 709.0;

/// g(z) = 1/(1 − Φ(z)): strictly increasing, g(0) = 2.
#[inline]
pub fn pareto_link(z: f64) -> f64 {
    if z > 8.3 {
        let ln = -ln_std_normal_sf(z);
        return if ln > PARETO_LINK_LN_CAP {
            PARETO_LINK_LN_CAP.exp()
        } else {
            ln.exp()
        };
    }
    1.0 / std_normal_sf(z)
}

/// ln g(z), exact wherever f64 holds the logarithm.
#[inline]
pub fn ln_pareto_link(z: f64) -> f64 {
    -ln_std_normal_sf(z)
}

/// True when `pareto_link` had to cap (z so large that g(z) exceeds f64).
#[inline]
pub fn pareto_link_capped(z: f64) -> bool {
    z > 8.3 && -ln_std_normal_sf(z) > PARETO_LINK_LN_CAP
}

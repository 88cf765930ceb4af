//! Lévy distribution (the α = 1/2, β = 1 stable law) with location 0.

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::specfun::erfc;
use crate::specfun::std_normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Levy {
    gamma: f64,
}

impl Levy {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::domain(
                "Levy::new",
                format!("scale must be > 0, got {gamma}"),
            ));
        }
        Ok(Levy { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// F(x) = erfc(√(γ/(2x))) on (0, ∞).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(
                "levy_cdf",
                format!("x must be > 0, got {x}"),
            ));
        }
        Ok(erfc((self.gamma / (2.0 * x)).sqrt()))
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(
                "levy_pdf",
                format!("x must be > 0, got {x}"),
            ));
        }
        Ok(self.ln_pdf(x).exp())
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        0.5 * (self.gamma / (2.0 * std::f64::consts::PI)).ln() - 1.5 * x.ln()
            - self.gamma / (2.0 * x)
    }

    /// Inverse CDF via the normal quantile: x = γ / (2 t²), t = erfc⁻¹(p).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(
                "levy_quantile",
                format!("p must be in (0,1), got {p}"),
            ));
        }
        let t = -std_normal_quantile(0.5 * p)? / std::f64::consts::SQRT_2;
        Ok(self.gamma / (2.0 * t * t))
    }

    /// Exact, branch-free sampler: γ / N² with N standard normal.
    #[inline]
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        let n = rng.normal();
        self.gamma / (n * n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_pvalue_against_cdf;

    #[test]
    fn cdf_at_scale_point() {
        // F(γ) = erfc(√(1/2)) ≈ 0.31731050786
        for &g in &[0.3, 1.0, 7.5] {
            let d = Levy::new(g).unwrap();
            assert!((d.cdf(g).unwrap() - 0.3173105078629141).abs() < 1e-12);
        }
        assert!(Levy::new(0.0).is_err());
        assert!(Levy::new(1.0).unwrap().cdf(0.0).is_err());
    }

    #[test]
    fn median_matches_squared_normal_symmetry() {
        let d = Levy::new(2.0).unwrap();
        let z75 = std_normal_quantile(0.75).unwrap();
        let median = d.quantile(0.5).unwrap();
        assert!((median - 2.0 / (z75 * z75)).abs() < 1e-10);
    }

    #[test]
    fn quantile_round_trip() {
        let d = Levy::new(1.0).unwrap();
        for i in 1..50 {
            let p = i as f64 / 50.0;
            let x = d.quantile(p).unwrap();
            assert!((d.cdf(x).unwrap() - p).abs() < 1e-11, "p={p}");
        }
    }

    #[test]
    fn sampler_passes_ks() {
        let d = Levy::new(1.3).unwrap();
        let mut rng = Stream::root(5);
        let mut xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let p = ks_pvalue_against_cdf(&xs, |x| d.cdf(x).unwrap());
        assert!(p > 0.01, "KS p-value {p}");
    }
}

//! Student's t distribution pieces used by the tail-dependence formulas
//! and the half-t priors.

use super::beta::betainc_reg;
use super::gamma::lgamma;
use crate::error::{Error, Result};

/// Survival function T̄_df(x) = Pr(T > x) for T ~ Student-t with df > 0.
pub fn student_t_survival(x: f64, df: f64) -> Result<f64> {
    if df <= 0.0 {
        return Err(Error::domain(
            "student_t_survival",
            format!("df must be > 0, got {df}"),
        ));
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    let z = df / (df + x * x);
    let half_tail = 0.5 * betainc_reg(0.5 * df, 0.5, z)?;
    Ok(if x > 0.0 { half_tail } else { 1.0 - half_tail })
}

/// ln density of Student-t with df degrees of freedom at x.
pub fn student_t_ln_pdf(x: f64, df: f64) -> f64 {
    debug_assert!(df > 0.0);
    lgamma(0.5 * (df + 1.0))
        - lgamma(0.5 * df)
        - 0.5 * (df * std::f64::consts::PI).ln()
        - 0.5 * (df + 1.0) * (x * x / df).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_and_cauchy_quartile() {
        assert_eq!(student_t_survival(0.0, 3.0).unwrap(), 0.5);
        // t with df = 1 is Cauchy: Pr(T > 1) = 1/4 by the arctan identity
        assert!((student_t_survival(1.0, 1.0).unwrap() - 0.25).abs() < 1e-14);
        let a = student_t_survival(1.7, 4.2).unwrap();
        let b = student_t_survival(-1.7, 4.2).unwrap();
        assert!((a + b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn df2_closed_form() {
        // T̄_2(x) = 1/2 - x / (2 sqrt(2 + x^2))
        for &x in &[-2.0f64, -0.3, 0.7, 4.0] {
            let exact = 0.5 - x / (2.0 * (2.0 + x * x).sqrt());
            assert!((student_t_survival(x, 2.0).unwrap() - exact).abs() < 1e-13);
        }
    }
}

//! Shared oracle helpers for the integration suites. Everything here stays
//! independent of the closed-form implementation paths it checks.

use scalemix::dists::LogLaplace;
use scalemix::marginals::{smooth_cdf, ModelSpec};
use scalemix::specfun::{integrate, Interval, QuadratureSpec, Transform};

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Convolution-by-quadrature oracle for the nuggeted CDF: integrates the
/// smooth CDF against the nugget density, splitting at the density kink and
/// the support edge.
pub fn conv_oracle_cdf(m: &ModelSpec, alpha0: f64, x: f64) -> f64 {
    let eps = LogLaplace::new(alpha0).unwrap();
    let f = |e: f64| smooth_cdf(m, x / e).unwrap() * eps.ln_pdf(e).exp();
    let spec = QuadratureSpec {
        abs_tol: 1e-11,
        rel_tol: 1e-10,
        max_subdivisions: 1500,
        transform: Transform::None,
    };
    match *m {
        ModelSpec::M1 { .. } => {
            // smooth support starts at 1: the integrand vanishes above e = x
            let mut tot = 0.0;
            let mid = x.min(1.0);
            if mid > 0.0 {
                tot += integrate(&f, Interval::Finite(0.0, mid), &spec)
                    .unwrap()
                    .value;
            }
            if x > mid {
                tot += integrate(&f, Interval::Finite(mid, x), &spec)
                    .unwrap()
                    .value;
            }
            tot
        }
        _ => {
            let lo = integrate(&f, Interval::Finite(0.0, 1.0), &spec)
                .unwrap()
                .value;
            let hi = integrate(&f, Interval::UpperInfinite(1.0), &spec)
                .unwrap()
                .value;
            lo + hi
        }
    }
}

//! Scalar special functions and one-dimensional adaptive quadrature.
//!
//! Everything here is a pure function of its arguments and bit-identical
//! across runs on the same platform.

mod beta;
mod erf;
mod gamma;
mod normal;
mod quad;
mod student;

pub use beta::betainc_reg;
pub use erf::{erf, erfc};
pub use gamma::{
    gamma_fn, gamma_p, gamma_q, lgamma, lgamma_sign, ln_lower_inc_gamma, ln_upper_inc_gamma,
    lower_inc_gamma, upper_inc_gamma, EULER_GAMMA,
};
pub use normal::{
    ln_std_normal_sf, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf, SQRT_2,
};
pub use quad::{integrate, Interval, QuadResult, QuadratureSpec, Transform};
pub use student::{student_t_ln_pdf, student_t_survival};

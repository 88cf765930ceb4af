//! Marginal CDF, density, and quantile of the smooth process X* and the
//! nuggeted process X = εX* for the three scale-mixture constructions:
//!
//! - `M1`: global Pareto scale, X* = R^φ W^{1−φ} with standard-Pareto W
//!   (also serves the max-stable-scale construction, which shares its
//!   marginal after a monotone transform),
//! - `M3`: Pareto(γ) scale times a standard Gaussian, X* = R·Z,
//! - `M4`: basis-weighted Lévy scale with site-wise tail parameter,
//!   X* = R^φ g(Z), stable index fixed at 1/2.
//!
//! M1 and M4 marginals are closed-form (incomplete gamma combinations for
//! M4); M3 keeps a single one-dimensional integral against the closed-form
//! density of R̃ = εR. Terms are combined in log space because their raw
//! magnitudes overflow f64 long before the results do.

use crate::dists::LogLaplace;
use crate::error::{Error, Result};
use crate::specfun::{
    integrate, ln_lower_inc_gamma, ln_upper_inc_gamma, std_normal_cdf, std_normal_pdf,
    std_normal_sf, Interval, QuadratureSpec,
};

const LN_SQRT_PI: f64 = 0.5723649429247001;

/// Marginal model variant with its dependence parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ModelSpec {
    /// φ ∈ (0,1). Within |φ − 1/2| < 1e-4 the closed form has a removable
    /// singularity and evaluation falls back to the quadrature route.
    M1 { phi: f64 },
    /// γ > 0 tail index of the Pareto scale.
    M3 { gamma: f64 },
    /// φ ∈ (0,1), γ̄ > 0 the aggregated Lévy scale at the site; α = 1/2.
    M4 { phi: f64, gamma_bar: f64 },
}

/// M1's prefactor blows up at φ = 1/2 while the distribution stays finite.
const M1_PHI_SINGULAR_WIDTH: f64 = 1e-4;

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::M1 { phi } => {
                if !(phi > 0.0 && phi < 1.0) {
                    return Err(Error::domain(
                        "ModelSpec::M1",
                        format!("phi must be in (0,1), got {phi}"),
                    ));
                }
            }
            ModelSpec::M3 { gamma } => {
                if !(gamma > 0.0) {
                    return Err(Error::domain(
                        "ModelSpec::M3",
                        format!("gamma must be > 0, got {gamma}"),
                    ));
                }
            }
            ModelSpec::M4 { phi, gamma_bar } => {
                if !(phi > 0.0 && phi < 1.0) || !(gamma_bar > 0.0) {
                    return Err(Error::domain(
                        "ModelSpec::M4",
                        format!(
                            "need phi in (0,1) and gamma_bar > 0, got phi={phi}, gamma_bar={gamma_bar}"
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Marginal tail index α* of the smooth process.
    pub fn alpha_star(&self) -> f64 {
        match *self {
            ModelSpec::M1 { phi } => (1.0 / phi).min(1.0 / (1.0 - phi)),
            ModelSpec::M3 { gamma } => gamma,
            ModelSpec::M4 { phi, .. } => (0.5 / phi).min(1.0),
        }
    }

    /// Tail-equivalence floor on α₀ for this variant.
    pub fn alpha0_floor(&self) -> f64 {
        match *self {
            ModelSpec::M1 { .. } => 2.0,
            ModelSpec::M3 { gamma } => gamma,
            ModelSpec::M4 { .. } => 1.0,
        }
    }
}

/// Nugget tail index, α₀ > 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NuggetSpec {
    alpha0: f64,
}

impl NuggetSpec {
    pub fn new(alpha0: f64) -> Result<Self> {
        if !(alpha0 > 1.0) {
            return Err(Error::domain(
                "NuggetSpec::new",
                format!("alpha0 must be > 1, got {alpha0}"),
            ));
        }
        Ok(NuggetSpec { alpha0 })
    }

    #[inline]
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// Warning (not an error) when α₀ sits at or below the variant's
    /// tail-equivalence floor.
    pub fn floor_warning(&self, m: &ModelSpec) -> Option<String> {
        let floor = m.alpha0_floor();
        (self.alpha0 <= floor).then(|| {
            format!(
                "alpha0 = {} is at or below the tail-equivalence floor {} for {:?}; marginal tail equivalence is not guaranteed",
                self.alpha0, floor, m
            )
        })
    }
}

/// ln |Σ terms| with sign, from (ln|t|, sign) pairs.
fn signed_lse(terms: &[(f64, f64)]) -> (f64, f64) {
    let m = terms
        .iter()
        .filter(|(l, _)| l.is_finite())
        .fold(f64::NEG_INFINITY, |acc, &(l, _)| acc.max(l));
    if m == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, 0.0);
    }
    let s: f64 = terms
        .iter()
        .map(|&(l, sign)| if l.is_finite() { sign * (l - m).exp() } else { 0.0 })
        .sum();
    (m + s.abs().ln(), s.signum())
}

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_subdivisions: 600,
        ..Default::default()
    }
}

// ---------------------------------------------------------------------------
// M4: precomputed per-site marginal
// ---------------------------------------------------------------------------

/// Per-site M4 marginal with cached constants; the MCMC evaluates D·T of
/// these per iteration, so everything independent of x is precomputed.
#[derive(Debug, Clone)]
pub struct M4Marginal {
    phi: f64,
    alpha0: f64,
    /// ln(γ̄/2)
    lg: f64,
    /// 1/2 − φ
    s_b: f64,
    /// 1/2 + φα₀
    s_c: f64,
    /// 1/2 − φα₀
    s_d: f64,
    ln_cb: f64,
    ln_cc: f64,
    ln_cd: f64,
}

impl M4Marginal {
    pub fn new(phi: f64, gamma_bar: f64, alpha0: f64) -> Result<Self> {
        ModelSpec::M4 { phi, gamma_bar }.validate()?;
        if !(alpha0 > 1.0) {
            return Err(Error::domain(
                "M4Marginal::new",
                format!("alpha0 must be > 1, got {alpha0}"),
            ));
        }
        Ok(M4Marginal {
            phi,
            alpha0,
            lg: (0.5 * gamma_bar).ln(),
            s_b: 0.5 - phi,
            s_c: 0.5 + phi * alpha0,
            s_d: 0.5 - phi * alpha0,
            ln_cb: (alpha0 * alpha0 / (alpha0 * alpha0 - 1.0)).ln(),
            ln_cc: -(2.0 * (alpha0 + 1.0)).ln(),
            ln_cd: -(2.0 * (alpha0 - 1.0)).ln(),
        })
    }

    #[inline]
    fn lambda_ln(&self, ln_x: f64) -> f64 {
        self.lg - ln_x / self.phi
    }

    /// Survival of the smooth process,
    /// F̄*(x) = (1/√π)[γ(1/2,λ) + x⁻¹(γ̄/2)^φ Γ(1/2−φ,λ)].
    pub fn smooth_sf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(
                "m4_smooth_sf",
                format!("x must be > 0, got {x}"),
            ));
        }
        let ln_x = x.ln();
        let lam = self.lambda_ln(ln_x).exp();
        let a = ln_lower_inc_gamma(0.5, lam)?;
        let b = self.phi * self.lg - ln_x + ln_upper_inc_gamma(self.s_b, lam)?;
        let (ln_sum, _) = signed_lse(&[(a, 1.0), (b, 1.0)]);
        Ok((ln_sum - LN_SQRT_PI).exp().min(1.0))
    }

    pub fn smooth_cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.smooth_sf(x)?)
    }

    /// Survival of the nuggeted process; all four incomplete-gamma terms in
    /// log space.
    pub fn sf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_sf(x)?.exp().min(1.0))
    }

    pub fn ln_sf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("m4_sf", format!("x must be > 0, got {x}")));
        }
        let ln_x = x.ln();
        let lam = self.lambda_ln(ln_x).exp();
        let a = ln_lower_inc_gamma(0.5, lam)?;
        let b = self.ln_cb + self.phi * self.lg - ln_x + ln_upper_inc_gamma(self.s_b, lam)?;
        let c = self.ln_cc + self.alpha0 * ln_x - self.phi * self.alpha0 * self.lg
            + ln_lower_inc_gamma(self.s_c, lam)?;
        let d = self.ln_cd - self.alpha0 * ln_x + self.phi * self.alpha0 * self.lg
            + ln_upper_inc_gamma(self.s_d, lam)?;
        let (ln_sum, sign) = signed_lse(&[(a, 1.0), (b, 1.0), (c, -1.0), (d, -1.0)]);
        if sign < 0.0 {
            // roundoff below the representable survival scale
            return Ok(f64::NEG_INFINITY);
        }
        Ok(ln_sum - LN_SQRT_PI)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.sf(x)?)
    }

    /// Density of the nuggeted process (analytic derivative of the CDF).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("m4_pdf", format!("x must be > 0, got {x}")));
        }
        let ln_x = x.ln();
        let ln_lam = self.lambda_ln(ln_x);
        let lam = ln_lam.exp();
        let ln_phi = self.phi.ln();
        // λ^s e^{−λ} shows up in every primed term
        let expo = |s: f64| s * ln_lam - lam;
        let mut terms: [(f64, f64); 7] = [(f64::NEG_INFINITY, 0.0); 7];
        // −A' = λ^{1/2} e^{−λ} / (φx)
        terms[0] = (expo(0.5) - ln_phi - ln_x, 1.0);
        // −B' = c_B (γ̄/2)^φ x^{−2} [Γ(s_b, λ) − λ^{s_b} e^{−λ}/φ]
        let b_pre = self.ln_cb + self.phi * self.lg - 2.0 * ln_x;
        terms[1] = (b_pre + ln_upper_inc_gamma(self.s_b, lam)?, 1.0);
        terms[2] = (b_pre + expo(self.s_b) - ln_phi, -1.0);
        // +C' = c_C (γ̄/2)^{−φα₀} x^{α₀−1} [α₀ γ(s_c, λ) − λ^{s_c} e^{−λ}/φ]
        let c_pre = self.ln_cc - self.phi * self.alpha0 * self.lg + (self.alpha0 - 1.0) * ln_x;
        terms[3] = (c_pre + self.alpha0.ln() + ln_lower_inc_gamma(self.s_c, lam)?, 1.0);
        terms[4] = (c_pre + expo(self.s_c) - ln_phi, -1.0);
        // +D' = c_D (γ̄/2)^{φα₀} x^{−α₀−1} [−α₀ Γ(s_d, λ) + λ^{s_d} e^{−λ}/φ]
        let d_pre = self.ln_cd + self.phi * self.alpha0 * self.lg - (self.alpha0 + 1.0) * ln_x;
        terms[5] = (d_pre + self.alpha0.ln() + ln_upper_inc_gamma(self.s_d, lam)?, -1.0);
        terms[6] = (d_pre + expo(self.s_d) - ln_phi, 1.0);
        let (ln_sum, sign) = signed_lse(&terms);
        if sign < 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(ln_sum - LN_SQRT_PI)
    }

    /// Quantile with the Lévy-power-tail initial bracket, bisection, and a
    /// safeguarded Newton polish. `warm` (finite, positive) seeds the search
    /// from a previous solution.
    pub fn quantile(&self, p: f64, warm: Option<f64>) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(
                "m4_quantile",
                format!("p must be in (0,1), got {p}"),
            ));
        }
        let gbar = 2.0 * self.lg.exp();
        let lo0 = gbar.powf(self.phi) / 100.0;
        let hi0 = 10.0 * (0.5 * gbar).powf(self.phi) * (1.0 - p).powf(-(2.0 * self.phi).max(1.0));
        invert_cdf(
            |x| self.cdf(x),
            |x| self.sf(x),
            |x| self.pdf(x),
            p,
            warm,
            lo0.min(0.5 * hi0),
            hi0.max(2.0 * lo0),
        )
    }

    /// x with F̄(x) = `tail`; stays exact for tail masses far below the f64
    /// resolution around 1, where `quantile(1 − tail)` would collapse.
    pub fn quantile_upper(&self, tail: f64, warm: Option<f64>) -> Result<f64> {
        if !(tail > 0.0 && tail < 1.0) {
            return Err(Error::domain(
                "m4_quantile_upper",
                format!("tail mass must be in (0,1), got {tail}"),
            ));
        }
        if tail >= 0.25 {
            return self.quantile(1.0 - tail, warm);
        }
        // Lévy-power tail: x ≈ (γ̄/2)^φ · tail^{−max(2φ,1)}, built in log space
        // so extreme tails cannot overflow the bracket
        let ln_hi = (10.0f64.ln() + self.phi * self.lg
            - (2.0 * self.phi).max(1.0) * tail.ln())
        .min(667.0);
        let hi0 = ln_hi.exp();
        let lo0 = (self.lg.exp() * 2.0).powf(self.phi) / 100.0;
        let g = |x: f64| Ok(tail - self.sf(x)?);
        let tol = 1e-10 * tail;
        solve_increasing(
            g,
            |x| self.pdf(x),
            warm,
            lo0.min(0.5 * hi0),
            hi0,
            tol,
            1e-4 * tail,
        )
    }
}

// ---------------------------------------------------------------------------
// M1 closed forms
// ---------------------------------------------------------------------------

/// A_q(x): the nugget's attenuation factor, with its log branch at α₀ = q.
/// expm1 keeps the α₀ ≠ q branch continuous as q → α₀.
fn m1_a_factor(x: f64, q: f64, alpha0: f64) -> f64 {
    let ln_x = x.ln();
    let d = q - alpha0;
    if d.abs() < 1e-9 {
        0.25 + 0.5 * alpha0 * ln_x
    } else {
        0.5 * alpha0 * (1.0 / (q + alpha0) + (d * ln_x).exp_m1() / d)
    }
}

struct M1Parts {
    a1: f64,
    q1: f64,
    a2: f64,
    q2: f64,
}

fn m1_parts(phi: f64) -> M1Parts {
    M1Parts {
        a1: phi / (2.0 * phi - 1.0),
        q1: 1.0 / phi,
        a2: (1.0 - phi) / (2.0 * phi - 1.0),
        q2: 1.0 / (1.0 - phi),
    }
}

fn m1_near_singular(phi: f64) -> bool {
    (phi - 0.5).abs() < M1_PHI_SINGULAR_WIDTH
}

/// F*(x) for M1 by quadrature over the Pareto mixture; exact at any φ, used
/// near φ = 1/2 where the closed form cancels.
fn m1_smooth_cdf_quad(phi: f64, x: f64) -> Result<f64> {
    if x <= 1.0 {
        return Ok(0.0);
    }
    let upper = x.powf(1.0 / (1.0 - phi));
    let e1 = (1.0 - phi) / phi;
    let inv_q1 = 1.0 / phi;
    let r = integrate(
        move |w: f64| (1.0 - w.powf(e1) * x.powf(-inv_q1)) / (w * w),
        Interval::Finite(1.0, upper),
        &quad_spec(),
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

fn m1_smooth_pdf_quad(phi: f64, x: f64) -> Result<f64> {
    if x <= 1.0 {
        return Ok(0.0);
    }
    let upper = x.powf(1.0 / (1.0 - phi));
    let e1 = (1.0 - phi) / phi;
    let inv_q1 = 1.0 / phi;
    let r = integrate(
        move |w: f64| inv_q1 * w.powf(e1 - 2.0) * x.powf(-inv_q1 - 1.0),
        Interval::Finite(1.0, upper),
        &quad_spec(),
    )?;
    Ok(r.value.max(0.0))
}

fn m1_smooth_cdf(phi: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "m1_smooth_cdf",
            format!("x must be > 0, got {x}"),
        ));
    }
    if x <= 1.0 {
        return Ok(0.0);
    }
    if m1_near_singular(phi) {
        return m1_smooth_cdf_quad(phi, x);
    }
    let p = m1_parts(phi);
    Ok((1.0 - p.a1 * x.powf(-p.q1) + p.a2 * x.powf(-p.q2)).clamp(0.0, 1.0))
}

fn m1_smooth_pdf(phi: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "m1_smooth_pdf",
            format!("x must be > 0, got {x}"),
        ));
    }
    if x <= 1.0 {
        return Ok(0.0);
    }
    if m1_near_singular(phi) {
        return m1_smooth_pdf_quad(phi, x);
    }
    Ok(((x.powf(-m1_parts(phi).q1 - 1.0) - x.powf(-m1_parts(phi).q2 - 1.0)) / (2.0 * phi - 1.0))
        .max(0.0))
}

/// Convolution of a smooth CDF with the nugget by quadrature; the fallback
/// for regions the printed closed forms do not cover.
fn m1_nugget_cdf_by_convolution(phi: f64, eps: &LogLaplace, x: f64) -> Result<f64> {
    // smooth support starts at 1: the integrand vanishes above e = x
    let f = |e: f64| m1_smooth_cdf(phi, x / e).unwrap_or(f64::NAN) * eps.ln_pdf(e).exp();
    let spec = quad_spec();
    let mut total = 0.0;
    let mid = x.min(1.0);
    if mid > 0.0 {
        total += integrate(&f, Interval::Finite(0.0, mid), &spec)?.value;
    }
    if x > mid {
        total += integrate(&f, Interval::Finite(mid, x), &spec)?.value;
    }
    Ok(total.clamp(0.0, 1.0))
}

fn m1_nugget_cdf(phi: f64, alpha0: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "m1_nugget_cdf",
            format!("x must be > 0, got {x}"),
        ));
    }
    let eps = LogLaplace::new(alpha0)?;
    // the printed closed form is stated on x ≥ 1; below it the nugget can
    // still reach (ε < 1), where the convolution route is exact
    if m1_near_singular(phi) || x < 1.0 {
        return m1_nugget_cdf_by_convolution(phi, &eps, x);
    }
    let p = m1_parts(phi);
    let v = 1.0 - p.a1 * x.powf(-p.q1) * m1_a_factor(x, p.q1, alpha0)
        + p.a2 * x.powf(-p.q2) * m1_a_factor(x, p.q2, alpha0)
        - 0.5 * x.powf(-alpha0);
    Ok(v.clamp(0.0, 1.0))
}

/// Survival of the nuggeted M1 process, in closed form on x ≥ 1 where the
/// upper-tail quantiles live.
fn m1_nugget_sf(phi: f64, alpha0: f64, x: f64) -> Result<f64> {
    if m1_near_singular(phi) || x < 1.0 {
        return Ok(1.0 - m1_nugget_cdf(phi, alpha0, x)?);
    }
    let p = m1_parts(phi);
    let v = p.a1 * x.powf(-p.q1) * m1_a_factor(x, p.q1, alpha0)
        - p.a2 * x.powf(-p.q2) * m1_a_factor(x, p.q2, alpha0)
        + 0.5 * x.powf(-alpha0);
    Ok(v.clamp(0.0, 1.0))
}

fn m1_nugget_pdf(phi: f64, alpha0: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "m1_nugget_pdf",
            format!("x must be > 0, got {x}"),
        ));
    }
    let eps = LogLaplace::new(alpha0)?;
    if m1_near_singular(phi) || x < 1.0 {
        // f_X(x) = ∫ f*(x/e) f_ε(e)/e de over e ∈ (0, x)
        let f = |e: f64| m1_smooth_pdf(phi, x / e).unwrap_or(f64::NAN) * eps.ln_pdf(e).exp() / e;
        let spec = quad_spec();
        let mut total = 0.0;
        let mid = x.min(1.0);
        if mid > 0.0 {
            total += integrate(&f, Interval::Finite(0.0, mid), &spec)?.value;
        }
        if x > mid {
            total += integrate(&f, Interval::Finite(mid, x), &spec)?.value;
        }
        return Ok(total.max(0.0));
    }
    let p = m1_parts(phi);
    let v = (x.powf(-p.q1 - 1.0) * m1_a_factor(x, p.q1, alpha0)
        - x.powf(-p.q2 - 1.0) * m1_a_factor(x, p.q2, alpha0))
        / (2.0 * phi - 1.0);
    Ok(v.max(0.0))
}

// ---------------------------------------------------------------------------
// M3: one-dimensional integral against the closed-form density of R̃ = εR
// ---------------------------------------------------------------------------

/// Closed-form density of R̃ = εR with R ~ Pareto(γ), piecewise with the
/// α₀ = γ log branch. The s < 1 branch is the pure lower tail of the nugget.
pub fn f_r_tilde(gamma: f64, alpha0: f64, s: f64) -> Result<f64> {
    if !(gamma > 0.0) || !(alpha0 > 1.0) {
        return Err(Error::domain(
            "f_r_tilde",
            format!("need gamma > 0 and alpha0 > 1, got gamma={gamma}, alpha0={alpha0}"),
        ));
    }
    if !(s > 0.0) {
        return Err(Error::domain(
            "f_r_tilde",
            format!("s must be > 0, got {s}"),
        ));
    }
    let tail_piece = 0.5 * alpha0 * gamma / (gamma + alpha0);
    if s < 1.0 {
        return Ok(tail_piece * s.powf(alpha0 - 1.0));
    }
    let d = alpha0 - gamma;
    let ln_s = s.ln();
    let mid = if d.abs() < 1e-9 {
        ln_s
    } else {
        (d * ln_s).exp_m1() / d
    };
    Ok(0.5 * alpha0 * gamma * s.powf(-(alpha0 + 1.0)) * mid + tail_piece * s.powf(-(gamma + 1.0)))
}

/// Integrate f over (lo, ∞), splitting at interior cut points so the folded
/// semi-infinite panel cannot silently skip structure compressed near u → 1
/// (the Gaussian factor transitions around s ≈ |x|, far from the panel nodes
/// once x is large).
fn piecewise_semiinf(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    interior: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut pts: Vec<f64> = interior.iter().copied().filter(|&c| c > lo && c.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    let mut left = lo;
    for &c in &pts {
        total += integrate(f, Interval::Finite(left, c), spec)?.value;
        left = c;
    }
    total += integrate(f, Interval::UpperInfinite(left), spec)?.value;
    Ok(total)
}

/// Cut points capturing the Φ(x/s) transition for scale-mixture integrands.
fn gaussian_arg_cuts(x: f64) -> Vec<f64> {
    let a = x.abs();
    if a < 1e-8 {
        return vec![1.0];
    }
    vec![1.0, a / 8.0, a, 8.0 * a]
}

fn m3_smooth_cdf(gamma: f64, x: f64) -> Result<f64> {
    // Pr(RZ ≤ x) = ∫ Φ(x/r) γ r^{−γ−1} dr over [1, ∞)
    let f = move |r: f64| std_normal_cdf(x / r) * gamma * r.powf(-gamma - 1.0);
    Ok(piecewise_semiinf(&f, 1.0, &gaussian_arg_cuts(x), &quad_spec())?.clamp(0.0, 1.0))
}

fn m3_smooth_sf(gamma: f64, x: f64) -> Result<f64> {
    let f = move |r: f64| std_normal_sf(x / r) * gamma * r.powf(-gamma - 1.0);
    Ok(piecewise_semiinf(&f, 1.0, &gaussian_arg_cuts(x), &quad_spec())?.clamp(0.0, 1.0))
}

fn m3_smooth_pdf(gamma: f64, x: f64) -> Result<f64> {
    let f = move |r: f64| std_normal_pdf(x / r) / r * gamma * r.powf(-gamma - 1.0);
    Ok(piecewise_semiinf(&f, 1.0, &gaussian_arg_cuts(x), &quad_spec())?.max(0.0))
}

/// Integrate g(s)·f_R̃(s) over (0,∞), splitting at the s = 1 density kink
/// and at the Gaussian-argument cuts.
fn m3_mix(gamma: f64, alpha0: f64, x: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let f = |s: f64| g(s) * f_r_tilde(gamma, alpha0, s).unwrap_or(f64::NAN);
    piecewise_semiinf(&f, 0.0, &gaussian_arg_cuts(x), &quad_spec())
}

fn m3_nugget_cdf(gamma: f64, alpha0: f64, x: f64) -> Result<f64> {
    Ok(m3_mix(gamma, alpha0, x, |s| std_normal_cdf(x / s))?.clamp(0.0, 1.0))
}

fn m3_nugget_sf(gamma: f64, alpha0: f64, x: f64) -> Result<f64> {
    Ok(m3_mix(gamma, alpha0, x, |s| std_normal_sf(x / s))?.clamp(0.0, 1.0))
}

fn m3_nugget_pdf(gamma: f64, alpha0: f64, x: f64) -> Result<f64> {
    Ok(m3_mix(gamma, alpha0, x, |s| std_normal_pdf(x / s) / s)?.max(0.0))
}

// ---------------------------------------------------------------------------
// Variant dispatch
// ---------------------------------------------------------------------------

/// CDF of the smooth process X*.
pub fn smooth_cdf(m: &ModelSpec, x: f64) -> Result<f64> {
    m.validate()?;
    match *m {
        ModelSpec::M1 { phi } => m1_smooth_cdf(phi, x),
        ModelSpec::M3 { gamma } => m3_smooth_cdf(gamma, x),
        ModelSpec::M4 { phi, gamma_bar } => {
            // α₀ plays no role in the smooth marginal
            M4Marginal::new(phi, gamma_bar, 2.0)?.smooth_cdf(x)
        }
    }
}

/// Survival of the smooth process.
pub fn smooth_sf(m: &ModelSpec, x: f64) -> Result<f64> {
    m.validate()?;
    match *m {
        ModelSpec::M1 { phi } => Ok(1.0 - m1_smooth_cdf(phi, x)?),
        ModelSpec::M3 { gamma } => m3_smooth_sf(gamma, x),
        ModelSpec::M4 { phi, gamma_bar } => M4Marginal::new(phi, gamma_bar, 2.0)?.smooth_sf(x),
    }
}

/// Density of the smooth process.
pub fn smooth_pdf(m: &ModelSpec, x: f64) -> Result<f64> {
    m.validate()?;
    match *m {
        ModelSpec::M1 { phi } => m1_smooth_pdf(phi, x),
        ModelSpec::M3 { gamma } => m3_smooth_pdf(gamma, x),
        ModelSpec::M4 { phi, gamma_bar } => {
            // derivative of 1 − F̄* by finite-width central differences is
            // avoided: the smooth pdf is only needed by test oracles, which
            // difference the CDF themselves
            let m4 = M4Marginal::new(phi, gamma_bar, 2.0)?;
            let h = 1e-6 * x.abs().max(1e-3);
            Ok(((m4.smooth_sf(x - h)? - m4.smooth_sf(x + h)?) / (2.0 * h)).max(0.0))
        }
    }
}

/// CDF of the nuggeted process X = εX*.
pub fn nugget_cdf(m: &ModelSpec, n: &NuggetSpec, x: f64) -> Result<f64> {
    m.validate()?;
    match *m {
        ModelSpec::M1 { phi } => m1_nugget_cdf(phi, n.alpha0, x),
        ModelSpec::M3 { gamma } => m3_nugget_cdf(gamma, n.alpha0, x),
        ModelSpec::M4 { phi, gamma_bar } => M4Marginal::new(phi, gamma_bar, n.alpha0)?.cdf(x),
    }
}

/// Survival of the nuggeted process, computed without 1 − CDF cancellation
/// where the variant allows it.
pub fn nugget_sf(m: &ModelSpec, n: &NuggetSpec, x: f64) -> Result<f64> {
    m.validate()?;
    match *m {
        ModelSpec::M1 { phi } => m1_nugget_sf(phi, n.alpha0, x),
        ModelSpec::M3 { gamma } => m3_nugget_sf(gamma, n.alpha0, x),
        ModelSpec::M4 { phi, gamma_bar } => M4Marginal::new(phi, gamma_bar, n.alpha0)?.sf(x),
    }
}

/// Density of the nuggeted process.
pub fn nugget_pdf(m: &ModelSpec, n: &NuggetSpec, x: f64) -> Result<f64> {
    m.validate()?;
    match *m {
        ModelSpec::M1 { phi } => m1_nugget_pdf(phi, n.alpha0, x),
        ModelSpec::M3 { gamma } => m3_nugget_pdf(gamma, n.alpha0, x),
        ModelSpec::M4 { phi, gamma_bar } => M4Marginal::new(phi, gamma_bar, n.alpha0)?.pdf(x),
    }
}

/// Bracketed inversion on the well-conditioned side of the distribution:
/// for p ≤ 1/2 solve cdf(x) = p, otherwise solve sf(x) = 1 − p so that
/// upper-tail quantiles are not limited by 1 − CDF cancellation.
fn invert_cdf(
    cdf: impl Fn(f64) -> Result<f64>,
    sf: impl Fn(f64) -> Result<f64>,
    pdf: impl Fn(f64) -> Result<f64>,
    p: f64,
    warm: Option<f64>,
    lo0: f64,
    hi0: f64,
) -> Result<f64> {
    let q = 1.0 - p;
    // g is increasing in x with a root at the quantile
    let g = |x: f64| -> Result<f64> {
        if p <= 0.5 {
            Ok(cdf(x)? - p)
        } else {
            Ok(q - sf(x)?)
        }
    };
    let tol = 1e-12f64.max(1e-10 * p.min(q));
    solve_increasing(g, pdf, warm, lo0, hi0, tol, 1e-9)
}

/// Core solver: geometric bracketing of an increasing root function on
/// positive support, bisection to localise, safeguarded Newton to polish.
/// A good warm start short-circuits to plain Newton — the sampler re-solves
/// each site's quantile after every small parameter move, so this path
/// carries almost all calls.
fn solve_increasing(
    g: impl Fn(f64) -> Result<f64>,
    pdf: impl Fn(f64) -> Result<f64>,
    warm: Option<f64>,
    lo0: f64,
    hi0: f64,
    tol: f64,
    final_tol: f64,
) -> Result<f64> {
    if let Some(w) = warm {
        if w.is_finite() && w > 0.0 {
            let mut x = w;
            for _ in 0..6 {
                let err = g(x)?;
                if err.abs() <= tol {
                    return Ok(x);
                }
                let dx = pdf(x)?;
                if !(dx > 0.0) {
                    break;
                }
                let next = x - err / dx;
                // wandered off the warm neighbourhood: fall back to bracketing
                if !next.is_finite() || next <= 0.0 || next < w / 16.0 || next > w * 16.0 {
                    break;
                }
                if (next - x).abs() <= 1e-15 * x.abs() {
                    return Ok(next);
                }
                x = next;
            }
        }
    }
    let (mut lo, mut hi) = (lo0.max(1e-300), hi0);
    if let Some(w) = warm {
        if w.is_finite() && w > 0.0 {
            lo = w / 4.0;
            hi = w * 4.0;
        }
    }
    let mut iters = 0usize;
    while g(lo)? > 0.0 {
        lo /= 8.0;
        iters += 1;
        if iters > 200 || lo < 1e-300 {
            return Err(Error::NonConvergence {
                op: "quantile bracket (low)",
                best: lo,
                err_estimate: f64::NAN,
            });
        }
    }
    while g(hi)? < 0.0 {
        hi *= 8.0;
        iters += 1;
        if iters > 200 || hi > 1e300 {
            return Err(Error::NonConvergence {
                op: "quantile bracket (high)",
                best: hi,
                err_estimate: f64::NAN,
            });
        }
    }
    let mut x = (lo * hi).sqrt();
    for _ in 0..120 {
        if g(x)? < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        x = (lo * hi).sqrt();
        if hi / lo < 1.05 {
            break;
        }
    }
    for _ in 0..60 {
        let err = g(x)?;
        if err.abs() <= tol {
            return Ok(x);
        }
        if err < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let dx = pdf(x)?;
        let step = if dx > 0.0 { err / dx } else { f64::NAN };
        let mut next = x - step;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    let err = g(x)?;
    if err.abs() <= final_tol {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            op: "nugget_quantile",
            best: x,
            err_estimate: err.abs(),
        })
    }
}

/// Quantile of the nuggeted process. `warm` seeds the search when re-solving
/// after a small parameter move.
pub fn nugget_quantile(m: &ModelSpec, n: &NuggetSpec, p: f64, warm: Option<f64>) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(
            "nugget_quantile",
            format!("p must be in (0,1), got {p}"),
        ));
    }
    m.validate()?;
    match *m {
        ModelSpec::M4 { phi, gamma_bar } => {
            M4Marginal::new(phi, gamma_bar, n.alpha0)?.quantile(p, warm)
        }
        ModelSpec::M1 { phi } => {
            let alpha = (1.0 / phi).min(1.0 / (1.0 - phi));
            let hi0 = 10.0 * (1.0 - p).powf(-1.0 / alpha);
            invert_cdf(
                |x| m1_nugget_cdf(phi, n.alpha0, x),
                |x| m1_nugget_sf(phi, n.alpha0, x),
                |x| m1_nugget_pdf(phi, n.alpha0, x),
                p,
                warm,
                0.05,
                hi0,
            )
        }
        ModelSpec::M3 { gamma } => m3_quantile(gamma, n.alpha0, p, warm),
    }
}

/// M3 is real-valued, so the inversion brackets additively on the full line,
/// again solving on the well-conditioned side of the distribution.
fn m3_quantile(gamma: f64, alpha0: f64, p: f64, warm: Option<f64>) -> Result<f64> {
    let q = 1.0 - p;
    let g = |x: f64| -> Result<f64> {
        if p <= 0.5 {
            Ok(m3_nugget_cdf(gamma, alpha0, x)? - p)
        } else {
            Ok(q - m3_nugget_sf(gamma, alpha0, x)?)
        }
    };
    let pdf = |x: f64| m3_nugget_pdf(gamma, alpha0, x);
    let tol = 1e-12f64.max(1e-9 * p.min(q));
    let (mut lo, mut hi) = match warm {
        Some(w) if w.is_finite() => (w - 1.0 - w.abs(), w + 1.0 + w.abs()),
        _ => (-10.0, 10.0),
    };
    let mut iters = 0;
    while g(lo)? > 0.0 {
        lo = 2.0 * lo - 1.0;
        iters += 1;
        if iters > 200 {
            return Err(Error::NonConvergence {
                op: "m3 quantile bracket",
                best: lo,
                err_estimate: f64::NAN,
            });
        }
    }
    while g(hi)? < 0.0 {
        hi = 2.0 * hi + 1.0;
        iters += 1;
        if iters > 200 {
            return Err(Error::NonConvergence {
                op: "m3 quantile bracket",
                best: hi,
                err_estimate: f64::NAN,
            });
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let err = g(x)?;
        if err.abs() <= tol {
            return Ok(x);
        }
        if err < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dx = pdf(x)?;
        let mut next = if dx > 0.0 { x - err / dx } else { f64::NAN };
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-14 * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    let err = g(x)?;
    if err.abs() <= 1e-9 {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            op: "m3 nugget_quantile",
            best: x,
            err_estimate: err.abs(),
        })
    }
}

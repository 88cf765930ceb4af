//! The censored likelihood and its marginal PIT pipeline.
//!
//! Observations Y are connected to the latent X-scale through the censored
//! GPD marginal: below the threshold a site contributes only the nugget
//! censoring probability F_ε(x₀/X*), above it the nugget density at the
//! transformed point times the change-of-variables Jacobian. Conditional on
//! the smooth field X*, sites are independent, so every replicate's
//! likelihood is a product of one-dimensional closed-form terms — that
//! factorisation is the whole point of the multiplicative nugget.
//!
//! All PIT transforms depend only on (data, marginal parameters), never on
//! the latent state, so [`LikelihoodContext`] computes them once per
//! parameter move and replicate evaluations stay O(D) each.

use crate::dists::{Gpd, LogLaplace};
use crate::error::{Error, Result};
use crate::marginals::{nugget_cdf, nugget_pdf, nugget_quantile, ModelSpec, M4Marginal, NuggetSpec};
use crate::spatial::SiteSet;
use crate::stats::compensated_sum;
use rayon::prelude::*;

/// Observed replicate-by-site matrix with thresholds and the exceedance
/// probability p (the censored marginal CDF equals p at the threshold).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Dataset {
    pub sites: SiteSet,
    /// Row-major T×D.
    pub y: Vec<f64>,
    pub n_rep: usize,
    pub thresholds: Vec<f64>,
    pub p: f64,
}

impl Dataset {
    pub fn new(
        sites: SiteSet,
        y: Vec<f64>,
        n_rep: usize,
        thresholds: Vec<f64>,
        p: f64,
    ) -> Result<Self> {
        let d = sites.len();
        if y.len() != n_rep * d {
            return Err(Error::Invalid(format!(
                "y has {} entries for {} replicates x {} sites",
                y.len(),
                n_rep,
                d
            )));
        }
        if thresholds.len() != d {
            return Err(Error::Invalid(format!(
                "{} thresholds for {} sites",
                thresholds.len(),
                d
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("observations must be finite".to_string()));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Invalid(format!(
                "exceedance probability must be in (0,1), got {p}"
            )));
        }
        Ok(Dataset {
            sites,
            y,
            n_rep,
            thresholds,
            p,
        })
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    #[inline]
    pub fn value(&self, t: usize, j: usize) -> f64 {
        self.y[t * self.n_sites() + j]
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.y[t * self.n_sites()..(t + 1) * self.n_sites()]
    }

    #[inline]
    pub fn is_exceedance(&self, t: usize, j: usize) -> bool {
        self.value(t, j) > self.thresholds[j]
    }

    /// Censored/exceedance partition sizes per replicate.
    pub fn mask_counts(&self, t: usize) -> (usize, usize) {
        let mut exceed = 0;
        for j in 0..self.n_sites() {
            exceed += self.is_exceedance(t, j) as usize;
        }
        (self.n_sites() - exceed, exceed)
    }
}

/// GPD regression coefficients on (intercept, standardised elevation):
/// log σ_j = β_σ·c_j, ξ_j = β_ξ·d_j with c_j = d_j = (1, elev_j).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MarginalParamsGpd {
    pub beta_sigma: [f64; 2],
    pub beta_xi: [f64; 2],
}

impl MarginalParamsGpd {
    pub fn sigma_at(&self, elev: f64) -> f64 {
        (self.beta_sigma[0] + self.beta_sigma[1] * elev).exp()
    }

    pub fn xi_at(&self, elev: f64) -> f64 {
        self.beta_xi[0] + self.beta_xi[1] * elev
    }
}

/// Per-site marginal handle with the M4 fast path.
#[derive(Debug, Clone)]
pub enum SiteMarginal {
    M4(M4Marginal),
    Generic { spec: ModelSpec, nug: NuggetSpec },
}

impl SiteMarginal {
    pub fn m4(phi: f64, gamma_bar: f64, alpha0: f64) -> Result<Self> {
        Ok(SiteMarginal::M4(M4Marginal::new(phi, gamma_bar, alpha0)?))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            SiteMarginal::M4(m) => m.cdf(x),
            SiteMarginal::Generic { spec, nug } => nugget_cdf(spec, nug, x),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        match self {
            SiteMarginal::M4(m) => m.ln_pdf(x),
            SiteMarginal::Generic { spec, nug } => Ok(nugget_pdf(spec, nug, x)?.ln()),
        }
    }

    pub fn quantile(&self, p: f64, warm: Option<f64>) -> Result<f64> {
        match self {
            SiteMarginal::M4(m) => m.quantile(p, warm),
            SiteMarginal::Generic { spec, nug } => nugget_quantile(spec, nug, p, warm),
        }
    }

    /// Survival-side quantile, exact for tail masses below f64's resolution
    /// around 1 (far exceedances produce exactly that).
    pub fn quantile_upper(&self, tail: f64, warm: Option<f64>) -> Result<f64> {
        match self {
            SiteMarginal::M4(m) => m.quantile_upper(tail, warm),
            SiteMarginal::Generic { spec, nug } => nugget_quantile(spec, nug, 1.0 - tail, warm),
        }
    }
}

/// Per-site pieces fixed across replicates.
#[derive(Debug, Clone)]
pub struct SiteContext {
    pub marginal: SiteMarginal,
    pub gpd: Gpd,
    /// x₀_j = F_X^{-1}(p), the censoring point on the X scale.
    pub x0: f64,
}

/// One observation's PIT outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PitCell {
    /// Below threshold: contributes F_ε(x₀/X*).
    Censored,
    /// Above threshold: latent point and the data-side log Jacobian
    /// ln[(1−p)h(y)] − ln f_X(x).
    Exceedance { x: f64, log_jacobian: f64 },
    /// Outside the GPD support under the current marginal parameters; the
    /// replicate's likelihood is −∞ (proposal rejection), not an error.
    SupportViolation,
}

/// Forward PIT for one observation. The inversion runs on the survival side
/// once G(y) gets close to 1: q = (1−p)H̄(y) stays exact where 1 − G(y) has
/// rounded away (heavy-tailed simulations reach that region routinely).
/// `warm` seeds the root finder, typically with the previous parameter
/// iterate's solution for the same observation.
pub fn pit_forward_warm(
    y: f64,
    site: &SiteContext,
    p: f64,
    warm: Option<f64>,
) -> Result<PitCell> {
    if y <= site.gpd.y0 {
        return Ok(PitCell::Censored);
    }
    if !site.gpd.in_support(y) {
        return Ok(PitCell::SupportViolation);
    }
    let seed = warm.or(Some(site.x0));
    let g = p + (1.0 - p) * site.gpd.cdf(y)?;
    let x = if g < 0.999 {
        site.marginal.quantile(g, seed)?
    } else {
        let tail = (1.0 - p) * site.gpd.sf(y)?;
        site.marginal.quantile_upper(tail, seed)?
    };
    let ln_fx = site.marginal.ln_pdf(x)?;
    let log_jacobian = (1.0 - p).ln() + site.gpd.ln_pdf(y) - ln_fx;
    Ok(PitCell::Exceedance { x, log_jacobian })
}

/// Forward PIT seeded at the censoring point.
pub fn pit_forward(y: f64, site: &SiteContext, p: f64) -> Result<PitCell> {
    pit_forward_warm(y, site, p, None)
}

/// Inverse PIT: maps a latent exceedance x > x₀ back to the observation scale.
pub fn pit_inverse(x: f64, site: &SiteContext, p: f64) -> Result<f64> {
    let g = site.marginal.cdf(x)?;
    if g <= p {
        return Ok(site.gpd.y0);
    }
    site.gpd.quantile((g - p) / (1.0 - p))
}

/// Everything the replicate likelihood needs that is fixed across replicates:
/// nugget handle, per-site marginals/thresholds, and every observation's PIT.
#[derive(Debug, Clone)]
pub struct LikelihoodContext {
    pub p: f64,
    pub eps: LogLaplace,
    pub sites: Vec<SiteContext>,
    /// Row-major T×D, aligned with the dataset.
    pub pit: Vec<PitCell>,
}

impl LikelihoodContext {
    /// Builds per-site marginals (M4 with site-wise (φ_j, γ̄_j)), inverts the
    /// censoring quantile, and PIT-transforms every exceedance. `warm`
    /// carries a previous context whose solutions seed the inversions.
    pub fn build_m4(
        data: &Dataset,
        phi_sites: &[f64],
        gamma_bar_sites: &[f64],
        alpha0: f64,
        margins: &MarginalParamsGpd,
        warm: Option<&LikelihoodContext>,
    ) -> Result<Self> {
        let d = data.n_sites();
        assert_eq!(phi_sites.len(), d);
        assert_eq!(gamma_bar_sites.len(), d);
        let eps = LogLaplace::new(alpha0)?;
        let mut sites = Vec::with_capacity(d);
        for j in 0..d {
            let marginal = SiteMarginal::m4(phi_sites[j], gamma_bar_sites[j], alpha0)?;
            let elev = data.sites.elev[j];
            let gpd = Gpd::new(data.thresholds[j], margins.sigma_at(elev), margins.xi_at(elev))?;
            let warm_x0 = warm.map(|w| w.sites[j].x0);
            let x0 = marginal.quantile(data.p, warm_x0)?;
            sites.push(SiteContext { marginal, gpd, x0 });
        }
        let mut pit = Vec::with_capacity(data.n_rep * d);
        for t in 0..data.n_rep {
            for j in 0..d {
                let y = data.value(t, j);
                let warm_x = warm.and_then(|w| match w.pit[t * d + j] {
                    PitCell::Exceedance { x, .. } => Some(x),
                    _ => None,
                });
                pit.push(pit_forward_warm(y, &sites[j], data.p, warm_x)?);
            }
        }
        Ok(LikelihoodContext {
            p: data.p,
            eps,
            sites,
            pit,
        })
    }

    #[inline]
    pub fn pit_row(&self, t: usize) -> &[PitCell] {
        let d = self.sites.len();
        &self.pit[t * d..(t + 1) * d]
    }

    /// Reconstructs a context from persisted censoring quantiles and PIT
    /// cells instead of re-solving them. Root-finding endpoints depend on
    /// their warm-start path, so restoring the stored values (not re-derived
    /// ones) is what makes checkpoint resume bit-identical.
    pub fn restore_m4(
        data: &Dataset,
        phi_sites: &[f64],
        gamma_bar_sites: &[f64],
        alpha0: f64,
        margins: &MarginalParamsGpd,
        x0: &[f64],
        pit: Vec<PitCell>,
    ) -> Result<Self> {
        let d = data.n_sites();
        if x0.len() != d || pit.len() != data.n_rep * d {
            return Err(Error::Invalid(
                "restored likelihood caches do not match the dataset shape".to_string(),
            ));
        }
        let eps = LogLaplace::new(alpha0)?;
        let mut sites = Vec::with_capacity(d);
        for j in 0..d {
            let marginal = SiteMarginal::m4(phi_sites[j], gamma_bar_sites[j], alpha0)?;
            let elev = data.sites.elev[j];
            let gpd = Gpd::new(data.thresholds[j], margins.sigma_at(elev), margins.xi_at(elev))?;
            sites.push(SiteContext {
                marginal,
                gpd,
                x0: x0[j],
            });
        }
        Ok(LikelihoodContext {
            p: data.p,
            eps,
            sites,
            pit,
        })
    }
}

/// One site's likelihood contribution given its smooth-field value; −∞ on
/// support violations.
#[inline]
pub fn site_loglik_term(ctx: &LikelihoodContext, t: usize, j: usize, x_star_j: f64) -> f64 {
    match ctx.pit_row(t)[j] {
        PitCell::Censored => ctx.eps.ln_cdf(ctx.sites[j].x0 / x_star_j),
        PitCell::Exceedance { x, log_jacobian } => {
            ctx.eps.ln_pdf(x / x_star_j) - x_star_j.ln() + log_jacobian
        }
        PitCell::SupportViolation => f64::NEG_INFINITY,
    }
}

/// Censored log-likelihood of one replicate given its smooth-field values.
/// −∞ is a legitimate value (support violations reject proposals); a
/// nonpositive X* is latent-state corruption and errors instead.
pub fn replicate_loglik(ctx: &LikelihoodContext, t: usize, x_star: &[f64]) -> Result<f64> {
    let d = ctx.sites.len();
    assert_eq!(x_star.len(), d);
    let row = ctx.pit_row(t);
    let mut total = 0.0;
    for j in 0..d {
        let xs = x_star[j];
        if !(xs > 0.0) || !xs.is_finite() {
            return Err(Error::Invalid(format!(
                "nonpositive smooth-field value {xs} at replicate {t}, site {j}"
            )));
        }
        match row[j] {
            PitCell::Censored => {
                total += ctx.eps.ln_cdf(ctx.sites[j].x0 / xs);
            }
            PitCell::Exceedance { x, log_jacobian } => {
                total += ctx.eps.ln_pdf(x / xs) - xs.ln() + log_jacobian;
            }
            PitCell::SupportViolation => return Ok(f64::NEG_INFINITY),
        }
        if total == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
    }
    Ok(total)
}

/// Full log-likelihood: replicates evaluated in parallel, reduced by
/// compensated summation in replicate order so the result is independent of
/// the worker count and of evaluation order.
pub fn total_loglik(ctx: &LikelihoodContext, x_star: &[f64], n_rep: usize) -> Result<f64> {
    let d = ctx.sites.len();
    assert_eq!(x_star.len(), n_rep * d);
    let per_rep: Result<Vec<f64>> = (0..n_rep)
        .into_par_iter()
        .map(|t| replicate_loglik(ctx, t, &x_star[t * d..(t + 1) * d]))
        .collect();
    Ok(compensated_sum(per_rep?))
}

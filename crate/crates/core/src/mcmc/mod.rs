//! Adaptive random-walk Metropolis-within-Gibbs over the full hierarchy:
//! knot-level dependence parameters (φ_k, ρ_k), the basis radius l, the
//! nugget index through ϑ = ln(α₀ − 1), GPD regression coefficients with
//! their scale hyperparameters, and replicate-specific latent blocks
//! (S_t, Z_t) updated in parallel.
//!
//! Shared-parameter updates run strictly sequentially; latent blocks touch
//! only replicate-local state and draw from counter-based streams keyed by
//! (seed, iteration, block), so output is bit-identical for any worker
//! count and across checkpoint/resume.

mod adapt;

pub use adapt::BlockAdapt;

use crate::dists::{pareto_link, prior_logpdf, Levy, Prior};
use crate::error::{Error, Result};
use crate::likelihood::{Dataset, LikelihoodContext, MarginalParamsGpd};
use crate::rng::Stream;
use crate::spatial::{nonstat_matern_cov, BasisWeights, CholFactor, KnotConfig, NonstatMaternParams};
use crate::stats::compensated_sum;
use rayon::prelude::*;

/// Shared dependence parameters of the hierarchy.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DependenceParams {
    pub phi_knots: Vec<f64>,
    pub rho_knots: Vec<f64>,
    /// Wendland basis radius l.
    pub radius: f64,
    /// ϑ with α₀ = 1 + exp(ϑ).
    pub theta: f64,
}

impl DependenceParams {
    #[inline]
    pub fn alpha0(&self) -> f64 {
        1.0 + self.theta.exp()
    }
}

/// Scale hyperparameters of the GPD regression blocks.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HyperParams {
    pub sigma_beta_sigma: f64,
    pub sigma_beta_xi: f64,
}

/// Serialised likelihood caches. The censoring quantiles and PIT points are
/// found by warm-started root finding, so their exact f64 values depend on
/// the search path; persisting them is what makes resume bit-identical.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LikelihoodCaches {
    pub x0: Vec<f64>,
    /// 0 = censored, 1 = exceedance, 2 = support violation; T×D row-major.
    pub kinds: Vec<u8>,
    pub xs: Vec<f64>,
    pub logjacs: Vec<f64>,
}

/// Incrementally maintained per-replicate caches. R_t is updated by deltas
/// during componentwise S sweeps, so its exact f64 value is path-dependent;
/// persisting these keeps resumed chains on the same trajectory.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReplicateCaches {
    /// T×D row-major R_t(s_j).
    pub r: Vec<f64>,
    /// T×D row-major X*_tj.
    pub x_star: Vec<f64>,
    /// Per-replicate Lévy log prior of S_t.
    pub s_prior: Vec<f64>,
}

/// Full parameter-and-latent snapshot; everything the chain needs to resume.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChainStateSnapshot {
    pub dep: DependenceParams,
    pub margins: MarginalParamsGpd,
    pub hyper: HyperParams,
    /// T×K, row-major.
    pub s: Vec<f64>,
    /// T×D, row-major.
    pub z: Vec<f64>,
    pub adapt: Vec<BlockAdapt>,
    pub iteration: u64,
    pub lik_caches: Option<LikelihoodCaches>,
    pub rep_caches: Option<ReplicateCaches>,
}

/// Sampler configuration. Targets follow the usual optimal-scaling values;
/// every piece is overridable.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub epoch: usize,
    pub target_scalar: f64,
    pub target_block: f64,
    pub workers: usize,
    /// Prior-recovery mode: the likelihood term is dropped entirely.
    pub likelihood_off: bool,
    /// Fixed-margins mode: β blocks and their hypers receive zero proposals.
    pub fix_margins: bool,
    /// Keep (S, Z) alongside each retained draw (holdout scoring needs them).
    pub save_latent_draws: bool,
    /// Diagnostic: hold ϑ (the nugget index) fixed at its initial value.
    pub fix_theta: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            iterations: 1000,
            burn_in: 500,
            thin: 5,
            seed: 1,
            epoch: 100,
            target_scalar: 0.41,
            target_block: 0.234,
            workers: 1,
            likelihood_off: false,
            fix_margins: false,
            save_latent_draws: false,
            fix_theta: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin < 1 {
            return Err(Error::Invalid("thin must be >= 1".to_string()));
        }
        if self.burn_in >= self.iterations && self.iterations > 0 {
            return Err(Error::Invalid(format!(
                "burn_in {} must be below iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.epoch < 1 {
            return Err(Error::Invalid("epoch must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Per-replicate latent state with its caches; updates touch exactly one of
/// these, which is what makes the parallel latent phase race-free.
#[derive(Debug, Clone)]
struct ReplicateState {
    /// Knot-level Lévy variables S_tk.
    s: Vec<f64>,
    /// Latent Gaussian field Z_t at the sites.
    z: Vec<f64>,
    /// R_t(s_j) = Σ_k B_jk S_tk.
    r: Vec<f64>,
    /// W_tj = g(Z_tj).
    w: Vec<f64>,
    /// X*_tj = R^φ_j W.
    x_star: Vec<f64>,
    lik: f64,
    z_prior: f64,
    s_prior: f64,
}

impl ReplicateState {
    fn refresh_r(&mut self, basis: &BasisWeights) {
        for j in 0..basis.n_sites {
            self.r[j] = basis
                .wendland_row(j)
                .iter()
                .zip(&self.s)
                .map(|(b, s)| b * s)
                .sum();
        }
    }

    fn refresh_w(&mut self) {
        for (w, &z) in self.w.iter_mut().zip(&self.z) {
            *w = pareto_link(z);
        }
    }

    fn refresh_x_star(&mut self, phi_sites: &[f64]) {
        for j in 0..self.x_star.len() {
            self.x_star[j] = self.r[j].powf(phi_sites[j]) * self.w[j];
        }
    }
}

/// Ledger row: one proposal family.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BlockStats {
    pub block: String,
    pub proposals: u64,
    pub accepts: u64,
    pub final_scale: f64,
}

/// Thinned draws with named columns.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Draws {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Posterior draws plus run diagnostics.
#[derive(Debug, Clone)]
pub struct McmcOutput {
    pub draws: Draws,
    pub ledger: Vec<BlockStats>,
    pub logpost_trace: Vec<f64>,
    pub final_state: ChainStateSnapshot,
    /// (S, Z) per retained draw when `save_latent_draws` is set.
    pub latent_draws: Vec<(Vec<f64>, Vec<f64>)>,
    pub acceptance_warnings: Vec<String>,
}

// Block kinds for stream keying and adaptation indexing.
const KIND_PHI: u64 = 1;
const KIND_RHO: u64 = 2;
const KIND_RADIUS: u64 = 3;
const KIND_THETA: u64 = 4;
const KIND_BETA_SIGMA: u64 = 5;
const KIND_BETA_XI: u64 = 6;
const KIND_HYPER_SIGMA: u64 = 7;
const KIND_HYPER_XI: u64 = 8;
const KIND_LATENT: u64 = 9;
const KIND_S_SCALE: u64 = 10;

#[inline]
fn block_key(kind: u64, index: u64) -> u64 {
    (kind << 32) | index
}

/// The running chain: data, configuration, current state, caches, adaptation.
pub struct Chain<'d> {
    data: &'d Dataset,
    knots: KnotConfig,
    nu: f64,
    gamma_knots: Vec<f64>,
    cfg: SamplerConfig,

    dep: DependenceParams,
    margins: MarginalParamsGpd,
    hyper: HyperParams,
    reps: Vec<ReplicateState>,

    // caches, versioned by `cache_version` for coherence checks
    basis: BasisWeights,
    phi_sites: Vec<f64>,
    rho_sites: Vec<f64>,
    gamma_bar: Vec<f64>,
    chol: CholFactor,
    precision: Vec<f64>,
    lik_ctx: Option<LikelihoodContext>,
    param_prior: f64,
    log_post: f64,
    cache_version: u64,

    // adaptation: shared blocks then per-(t,k) S scales then per-t Z scales
    adapt: Vec<BlockAdapt>,
    iteration: u64,
}

// adaptation layout offsets
fn adapt_index_shared(kind: u64, k: usize, n_knots: usize) -> usize {
    match kind {
        KIND_PHI => k,
        KIND_RHO => n_knots + k,
        KIND_RADIUS => 2 * n_knots,
        KIND_THETA => 2 * n_knots + 1,
        KIND_BETA_SIGMA => 2 * n_knots + 2,
        KIND_BETA_XI => 2 * n_knots + 3,
        KIND_HYPER_SIGMA => 2 * n_knots + 4,
        KIND_HYPER_XI => 2 * n_knots + 5,
        // k in 0..n_knots are per-knot scalings, k = n_knots is global
        KIND_S_SCALE => 2 * n_knots + 6 + k,
        _ => unreachable!(),
    }
}

fn n_shared_blocks(n_knots: usize) -> usize {
    3 * n_knots + 7
}

impl<'d> Chain<'d> {
    /// Builds the chain at the standard initialisation: φ_k = 1/2,
    /// ρ_k = median²-distance, l = diameter/3, ϑ at its prior mean, β from
    /// independent site-wise GPD fits, S = 1, Z = 0.
    pub fn new(
        data: &'d Dataset,
        knots: KnotConfig,
        nu: f64,
        cfg: SamplerConfig,
    ) -> Result<Self> {
        let snapshot = Self::default_init(data, &knots, &cfg)?;
        Self::from_snapshot(data, knots, nu, cfg, snapshot)
    }

    /// Standard initial state (no caches) for this dataset.
    pub fn default_init(
        data: &Dataset,
        knots: &KnotConfig,
        cfg: &SamplerConfig,
    ) -> Result<ChainStateSnapshot> {
        let k = knots.knots.len();
        let d = data.n_sites();
        let median = data.sites.median_distance();
        let dep = DependenceParams {
            phi_knots: vec![0.5; k],
            rho_knots: vec![(median * median).max(1e-3); k],
            radius: (data.sites.diameter() / 3.0).max(knots.wendland_radius.min(1.0)),
            theta: 3.0,
        };
        let margins = init_margins(data);
        let hyper = HyperParams {
            sigma_beta_sigma: 1.0,
            sigma_beta_xi: 1.0,
        };
        let adapt = build_adapt(k, data.n_rep, d, cfg);
        Ok(ChainStateSnapshot {
            dep,
            margins,
            hyper,
            s: vec![1.0; data.n_rep * k],
            z: vec![0.0; data.n_rep * d],
            adapt,
            iteration: 0,
            lik_caches: None,
            rep_caches: None,
        })
    }

    /// Rebuilds a chain (all caches) from a snapshot; resume-identical.
    pub fn from_snapshot(
        data: &'d Dataset,
        mut knots: KnotConfig,
        nu: f64,
        cfg: SamplerConfig,
        snap: ChainStateSnapshot,
    ) -> Result<Self> {
        cfg.validate()?;
        let k = knots.knots.len();
        let d = data.n_sites();
        let t = data.n_rep;
        if snap.s.len() != t * k || snap.z.len() != t * d {
            return Err(Error::Invalid(
                "snapshot latent dimensions do not match data/knots".to_string(),
            ));
        }
        knots.wendland_radius = snap.dep.radius;
        let gamma_knots = vec![1.0; k];
        let basis = BasisWeights::build(&data.sites, &knots);
        let phi_sites = basis.gauss_surface(&snap.dep.phi_knots);
        let rho_sites = basis.gauss_surface(&snap.dep.rho_knots);
        let gamma_bar = if cfg.likelihood_off {
            vec![f64::NAN; d]
        } else {
            basis.gamma_bar(&gamma_knots)?
        };
        let cov = nonstat_matern_cov(&data.sites, &NonstatMaternParams::new(rho_sites.clone(), nu)?)?;
        let chol = CholFactor::new(&cov, d)?;
        let precision = chol.inverse();
        let lik_ctx = if cfg.likelihood_off {
            None
        } else if let Some(caches) = &snap.lik_caches {
            let pit: Vec<crate::likelihood::PitCell> = caches
                .kinds
                .iter()
                .zip(caches.xs.iter().zip(&caches.logjacs))
                .map(|(&kind, (&x, &lj))| match kind {
                    0 => crate::likelihood::PitCell::Censored,
                    1 => crate::likelihood::PitCell::Exceedance {
                        x,
                        log_jacobian: lj,
                    },
                    _ => crate::likelihood::PitCell::SupportViolation,
                })
                .collect();
            Some(LikelihoodContext::restore_m4(
                data,
                &phi_sites,
                &gamma_bar,
                snap.dep.alpha0(),
                &snap.margins,
                &caches.x0,
                pit,
            )?)
        } else {
            Some(LikelihoodContext::build_m4(
                data,
                &phi_sites,
                &gamma_bar,
                snap.dep.alpha0(),
                &snap.margins,
                None,
            )?)
        };
        let mut reps = Vec::with_capacity(t);
        for ti in 0..t {
            let mut rep = ReplicateState {
                s: snap.s[ti * k..(ti + 1) * k].to_vec(),
                z: snap.z[ti * d..(ti + 1) * d].to_vec(),
                r: vec![0.0; d],
                w: vec![0.0; d],
                x_star: vec![0.0; d],
                lik: 0.0,
                z_prior: 0.0,
                s_prior: 0.0,
            };
            rep.refresh_w();
            if let Some(caches) = &snap.rep_caches {
                rep.r = caches.r[ti * d..(ti + 1) * d].to_vec();
                rep.x_star = caches.x_star[ti * d..(ti + 1) * d].to_vec();
            } else {
                rep.refresh_r(&basis);
                rep.refresh_x_star(&phi_sites);
            }
            reps.push(rep);
        }
        let snap_caches = snap.rep_caches.clone();
        let mut chain = Chain {
            data,
            knots,
            nu,
            gamma_knots,
            cfg,
            dep: snap.dep,
            margins: snap.margins,
            hyper: snap.hyper,
            reps,
            basis,
            phi_sites,
            rho_sites,
            gamma_bar,
            chol,
            precision,
            lik_ctx,
            param_prior: 0.0,
            log_post: 0.0,
            cache_version: 0,
            adapt: snap.adapt,
            iteration: snap.iteration,
        };
        chain.refresh_all_replicate_terms()?;
        if let Some(caches) = &snap_caches {
            for (rep, &sp) in chain.reps.iter_mut().zip(&caches.s_prior) {
                rep.s_prior = sp;
            }
        }
        chain.param_prior = chain.compute_param_prior();
        chain.log_post = chain.assemble_log_post();
        Ok(chain)
    }

    pub fn snapshot(&self) -> ChainStateSnapshot {
        let k = self.knots.knots.len();
        let d = self.data.n_sites();
        let mut s = Vec::with_capacity(self.reps.len() * k);
        let mut z = Vec::with_capacity(self.reps.len() * d);
        for rep in &self.reps {
            s.extend_from_slice(&rep.s);
            z.extend_from_slice(&rep.z);
        }
        let lik_caches = self.lik_ctx.as_ref().map(|ctx| {
            let mut kinds = Vec::with_capacity(ctx.pit.len());
            let mut xs = Vec::with_capacity(ctx.pit.len());
            let mut logjacs = Vec::with_capacity(ctx.pit.len());
            for cell in &ctx.pit {
                match *cell {
                    crate::likelihood::PitCell::Censored => {
                        kinds.push(0);
                        xs.push(0.0);
                        logjacs.push(0.0);
                    }
                    crate::likelihood::PitCell::Exceedance { x, log_jacobian } => {
                        kinds.push(1);
                        xs.push(x);
                        logjacs.push(log_jacobian);
                    }
                    crate::likelihood::PitCell::SupportViolation => {
                        kinds.push(2);
                        xs.push(0.0);
                        logjacs.push(0.0);
                    }
                }
            }
            LikelihoodCaches {
                x0: ctx.sites.iter().map(|s| s.x0).collect(),
                kinds,
                xs,
                logjacs,
            }
        });
        let mut r = Vec::with_capacity(self.reps.len() * d);
        let mut x_star = Vec::with_capacity(self.reps.len() * d);
        let mut s_prior = Vec::with_capacity(self.reps.len());
        for rep in &self.reps {
            r.extend_from_slice(&rep.r);
            x_star.extend_from_slice(&rep.x_star);
            s_prior.push(rep.s_prior);
        }
        ChainStateSnapshot {
            dep: self.dep.clone(),
            margins: self.margins,
            hyper: self.hyper,
            s,
            z,
            adapt: self.adapt.clone(),
            iteration: self.iteration,
            lik_caches,
            rep_caches: Some(ReplicateCaches { r, x_star, s_prior }),
        }
    }

    #[inline]
    pub fn log_posterior(&self) -> f64 {
        self.log_post
    }

    #[inline]
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    #[inline]
    pub fn dep(&self) -> &DependenceParams {
        &self.dep
    }

    #[inline]
    pub fn margins(&self) -> &MarginalParamsGpd {
        &self.margins
    }

    #[inline]
    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    #[inline]
    pub fn cache_version(&self) -> u64 {
        self.cache_version
    }

    pub fn x0_sites(&self) -> Option<Vec<f64>> {
        self.lik_ctx
            .as_ref()
            .map(|c| c.sites.iter().map(|s| s.x0).collect())
    }

    /// Latent S of one replicate (testing hook).
    pub fn latent_s(&self, t: usize) -> &[f64] {
        &self.reps[t].s
    }

    pub fn latent_z(&self, t: usize) -> &[f64] {
        &self.reps[t].z
    }

    // -- posterior assembly ------------------------------------------------

    fn compute_param_prior(&self) -> f64 {
        let mut lp = 0.0;
        for &phi in &self.dep.phi_knots {
            lp += prior_logpdf(Prior::Beta22, phi);
        }
        for &rho in &self.dep.rho_knots {
            lp += prior_logpdf(Prior::HalfNormal { scale: 10.0 }, rho);
        }
        lp += prior_logpdf(Prior::HalfT { df: 1.0, scale: 3.0 }, self.dep.radius);
        lp += prior_logpdf(Prior::Normal { mean: 3.0, sd: 0.5 }, self.dep.theta);
        if !self.cfg.fix_margins {
            lp += beta_block_prior(&self.margins.beta_sigma, self.hyper.sigma_beta_sigma);
            lp += beta_block_prior(&self.margins.beta_xi, self.hyper.sigma_beta_xi);
            lp += prior_logpdf(Prior::HalfT { df: 2.0, scale: 1.0 }, self.hyper.sigma_beta_sigma);
            lp += prior_logpdf(Prior::HalfT { df: 2.0, scale: 1.0 }, self.hyper.sigma_beta_xi);
        }
        lp
    }

    fn refresh_all_replicate_terms(&mut self) -> Result<()> {
        let levy: Vec<Levy> = self
            .gamma_knots
            .iter()
            .map(|&g| Levy::new(g))
            .collect::<Result<_>>()?;
        let chol = &self.chol;
        let ctx = &self.lik_ctx;
        let results: Result<Vec<(f64, f64, f64)>> = self
            .reps
            .par_iter()
            .enumerate()
            .map(|(t, rep)| {
                let lik = match ctx {
                    None => 0.0,
                    Some(c) => crate::likelihood::replicate_loglik(c, t, &rep.x_star)?,
                };
                let zp = chol.mvn_ln_pdf(&rep.z);
                let sp = rep
                    .s
                    .iter()
                    .zip(&levy)
                    .map(|(&s, lv)| lv.ln_pdf(s))
                    .sum::<f64>();
                Ok((lik, zp, sp))
            })
            .collect();
        for (rep, (lik, zp, sp)) in self.reps.iter_mut().zip(results?) {
            rep.lik = lik;
            rep.z_prior = zp;
            rep.s_prior = sp;
        }
        Ok(())
    }

    fn assemble_log_post(&self) -> f64 {
        let lik = compensated_sum(self.reps.iter().map(|r| r.lik));
        let zp = compensated_sum(self.reps.iter().map(|r| r.z_prior));
        let sp = compensated_sum(self.reps.iter().map(|r| r.s_prior));
        lik + zp + sp + self.param_prior
    }

    /// Recomputes the log posterior from scratch (fresh basis, covariance,
    /// likelihood context); the cache-coherence oracle.
    pub fn recompute_log_posterior(&self) -> Result<f64> {
        let mut knots = self.knots.clone();
        knots.wendland_radius = self.dep.radius;
        let basis = BasisWeights::build(&self.data.sites, &knots);
        let phi_sites = basis.gauss_surface(&self.dep.phi_knots);
        let rho_sites = basis.gauss_surface(&self.dep.rho_knots);
        let gamma_bar = if self.cfg.likelihood_off {
            vec![f64::NAN; self.data.n_sites()]
        } else {
            basis.gamma_bar(&self.gamma_knots)?
        };
        let cov = nonstat_matern_cov(
            &self.data.sites,
            &NonstatMaternParams::new(rho_sites, self.nu)?,
        )?;
        let chol = CholFactor::new(&cov, self.data.n_sites())?;
        let levy: Vec<Levy> = self
            .gamma_knots
            .iter()
            .map(|&g| Levy::new(g))
            .collect::<Result<_>>()?;
        let lik_ctx = if self.cfg.likelihood_off {
            None
        } else {
            Some(LikelihoodContext::build_m4(
                self.data,
                &phi_sites,
                &gamma_bar,
                self.dep.alpha0(),
                &self.margins,
                None,
            )?)
        };
        let mut lik_terms = Vec::with_capacity(self.reps.len());
        let mut zp_terms = Vec::with_capacity(self.reps.len());
        let mut sp_terms = Vec::with_capacity(self.reps.len());
        for (t, rep) in self.reps.iter().enumerate() {
            let mut fresh = rep.clone();
            fresh.refresh_r(&basis);
            fresh.refresh_w();
            fresh.refresh_x_star(&phi_sites);
            lik_terms.push(match &lik_ctx {
                None => 0.0,
                Some(c) => crate::likelihood::replicate_loglik(c, t, &fresh.x_star)?,
            });
            zp_terms.push(chol.mvn_ln_pdf(&fresh.z));
            sp_terms.push(
                fresh
                    .s
                    .iter()
                    .zip(&levy)
                    .map(|(&s, lv)| lv.ln_pdf(s))
                    .sum::<f64>(),
            );
        }
        Ok(compensated_sum(lik_terms)
            + compensated_sum(zp_terms)
            + compensated_sum(sp_terms)
            + self.compute_param_prior())
    }

    // -- proposal helpers --------------------------------------------------

    /// Whether an error is a legitimate proposal rejection (support edges,
    /// quantile non-convergence at absurd parameters) rather than a bug.
    fn rejectable(err: &Error) -> bool {
        matches!(
            err,
            Error::Domain { .. }
                | Error::NonConvergence { .. }
                | Error::MomentDiverges(_)
                | Error::CholeskyFailure { .. }
                | Error::Overflow { .. }
                | Error::Invalid(_)
        )
    }

    /// Candidate likelihood sweep under a new context/phi surface; returns
    /// per-replicate likelihoods and x* rows.
    fn candidate_lik_sweep(
        &self,
        ctx: &LikelihoodContext,
        basis: &BasisWeights,
        phi_sites: &[f64],
        refresh_r: bool,
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let results: Result<Vec<(f64, Vec<f64>)>> = self
            .reps
            .par_iter()
            .enumerate()
            .map(|(t, rep)| {
                let d = rep.x_star.len();
                let mut x_star = vec![0.0; d];
                if refresh_r {
                    for j in 0..d {
                        let r: f64 = basis
                            .wendland_row(j)
                            .iter()
                            .zip(&rep.s)
                            .map(|(b, s)| b * s)
                            .sum();
                        x_star[j] = r.powf(phi_sites[j]) * rep.w[j];
                    }
                } else {
                    for j in 0..d {
                        x_star[j] = rep.r[j].powf(phi_sites[j]) * rep.w[j];
                    }
                }
                let lik = crate::likelihood::replicate_loglik(ctx, t, &x_star)?;
                Ok((lik, x_star))
            })
            .collect();
        let mut liks = Vec::with_capacity(self.reps.len());
        let mut xs = Vec::with_capacity(self.reps.len());
        for (l, x) in results? {
            liks.push(l);
            xs.push(x);
        }
        Ok((liks, xs))
    }

    /// Accept a candidate that changed the marginal structure.
    #[allow(clippy::too_many_arguments)]
    fn accept_marginal_candidate(
        &mut self,
        ctx: Option<LikelihoodContext>,
        basis: Option<BasisWeights>,
        phi_sites: Option<Vec<f64>>,
        gamma_bar: Option<Vec<f64>>,
        liks: Vec<f64>,
        x_stars: Vec<Vec<f64>>,
        refresh_r: bool,
    ) {
        if let Some(c) = ctx {
            self.lik_ctx = Some(c);
        }
        if let Some(b) = basis {
            self.basis = b;
        }
        if let Some(p) = phi_sites {
            self.phi_sites = p;
        }
        if let Some(g) = gamma_bar {
            self.gamma_bar = g;
        }
        for ((rep, lik), x_star) in self.reps.iter_mut().zip(liks).zip(x_stars) {
            rep.lik = lik;
            rep.x_star = x_star;
            if refresh_r {
                rep.refresh_r(&self.basis);
            }
        }
        self.cache_version += 1;
    }

    // -- shared-parameter updates -------------------------------------------

    fn update_phi_k(&mut self, k: usize, rng: &mut Stream) -> Result<bool> {
        let idx = adapt_index_shared(KIND_PHI, k, self.knots.knots.len());
        let scale = self.adapt[idx].scale();
        let phi = self.dep.phi_knots[k];
        let logit = (phi / (1.0 - phi)).ln();
        let logit_new = logit + scale * rng.normal();
        let u = rng.uniform();
        let phi_new = 1.0 / (1.0 + (-logit_new).exp());
        if !(phi_new > 0.0 && phi_new < 1.0) {
            self.adapt[idx].record(false);
            return Ok(false);
        }
        let mut cand = self.dep.clone();
        cand.phi_knots[k] = phi_new;
        let prior_delta = prior_logpdf(Prior::Beta22, phi_new) - prior_logpdf(Prior::Beta22, phi)
            + (phi_new.ln() + (-phi_new).ln_1p())
            - (phi.ln() + (-phi).ln_1p());
        self.update_block_with_u(idx, prior_delta, cand, self.margins, false, u)
    }

    /// Marginal-structure Metropolis step with a pre-drawn acceptance
    /// uniform, so every proposal consumes a fixed number of stream values.
    #[allow(clippy::too_many_arguments)]
    fn update_block_with_u(
        &mut self,
        adapt_idx: usize,
        prior_delta_and_jacobian: f64,
        cand_dep: DependenceParams,
        cand_margins: MarginalParamsGpd,
        rebuild_basis: bool,
        u: f64,
    ) -> Result<bool> {
        let cand_alpha0 = cand_dep.alpha0();
        let (cand_basis, cand_gamma_bar) = if rebuild_basis {
            let mut knots = self.knots.clone();
            knots.wendland_radius = cand_dep.radius;
            let basis = BasisWeights::build(&self.data.sites, &knots);
            if self.cfg.likelihood_off {
                // γ̄ is never consumed without a likelihood; no coverage veto
                (Some(basis), None)
            } else {
                let gb = match basis.gamma_bar(&self.gamma_knots) {
                    Ok(g) => g,
                    Err(_) => {
                        // a radius proposal left sites uncovered: reject
                        self.adapt[adapt_idx].record(false);
                        return Ok(false);
                    }
                };
                (Some(basis), Some(gb))
            }
        } else {
            (None, None)
        };
        let cand_phi_sites = match (&cand_basis, &cand_dep) {
            (Some(b), d) => b.gauss_surface(&d.phi_knots),
            (None, d) => self.basis.gauss_surface(&d.phi_knots),
        };
        let gamma_bar_ref = cand_gamma_bar.as_ref().unwrap_or(&self.gamma_bar);
        let basis_ref = cand_basis.as_ref().unwrap_or(&self.basis);
        let (delta_lik, payload) = if self.cfg.likelihood_off {
            (0.0, None)
        } else {
            let ctx = match LikelihoodContext::build_m4(
                self.data,
                &cand_phi_sites,
                gamma_bar_ref,
                cand_alpha0,
                &cand_margins,
                self.lik_ctx.as_ref(),
            ) {
                Ok(c) => c,
                Err(e) if Self::rejectable(&e) => {
                    self.adapt[adapt_idx].record(false);
                    return Ok(false);
                }
                Err(e) => return Err(e),
            };
            let (liks, xs) =
                match self.candidate_lik_sweep(&ctx, basis_ref, &cand_phi_sites, rebuild_basis) {
                    Ok(v) => v,
                    Err(e) if Self::rejectable(&e) => {
                        self.adapt[adapt_idx].record(false);
                        return Ok(false);
                    }
                    Err(e) => return Err(e),
                };
            let new_lik = compensated_sum(liks.iter().copied());
            let old_lik = compensated_sum(self.reps.iter().map(|r| r.lik));
            (new_lik - old_lik, Some((ctx, liks, xs)))
        };
        let log_ratio = delta_lik + prior_delta_and_jacobian;
        let accept = log_ratio > 0.0 || (log_ratio.is_finite() && u.ln() < log_ratio);
        if accept {
            self.dep = cand_dep;
            self.margins = cand_margins;
            if let Some((ctx, liks, xs)) = payload {
                self.accept_marginal_candidate(
                    Some(ctx),
                    cand_basis,
                    Some(cand_phi_sites),
                    cand_gamma_bar,
                    liks,
                    xs,
                    rebuild_basis,
                );
            } else {
                if let Some(b) = cand_basis {
                    self.basis = b;
                }
                if let Some(g) = cand_gamma_bar {
                    self.gamma_bar = g;
                }
                self.phi_sites = cand_phi_sites;
                for rep in &mut self.reps {
                    rep.refresh_r(&self.basis);
                    rep.refresh_x_star(&self.phi_sites);
                }
                self.cache_version += 1;
            }
            self.param_prior = self.compute_param_prior();
            self.log_post = self.assemble_log_post();
        }
        self.adapt[adapt_idx].record(accept);
        Ok(accept)
    }

    fn update_rho_k(&mut self, k: usize, rng: &mut Stream) -> Result<bool> {
        let idx = adapt_index_shared(KIND_RHO, k, self.knots.knots.len());
        let scale = self.adapt[idx].scale();
        let rho = self.dep.rho_knots[k];
        let rho_new = (rho.ln() + scale * rng.normal()).exp();
        let u = rng.uniform();
        if !(rho_new > 0.0) || !rho_new.is_finite() {
            self.adapt[idx].record(false);
            return Ok(false);
        }
        let mut cand_knots = self.dep.rho_knots.clone();
        cand_knots[k] = rho_new;
        let cand_rho_sites = self.basis.gauss_surface(&cand_knots);
        let cov = match NonstatMaternParams::new(cand_rho_sites.clone(), self.nu)
            .and_then(|p| nonstat_matern_cov(&self.data.sites, &p))
            .and_then(|c| CholFactor::new(&c, self.data.n_sites()))
        {
            Ok(c) => c,
            Err(e) if Self::rejectable(&e) => {
                self.adapt[idx].record(false);
                return Ok(false);
            }
            Err(e) => return Err(e),
        };
        let new_zp: Vec<f64> = self
            .reps
            .par_iter()
            .map(|rep| cov.mvn_ln_pdf(&rep.z))
            .collect();
        let delta_zp = compensated_sum(new_zp.iter().copied())
            - compensated_sum(self.reps.iter().map(|r| r.z_prior));
        let prior_delta = prior_logpdf(Prior::HalfNormal { scale: 10.0 }, rho_new)
            - prior_logpdf(Prior::HalfNormal { scale: 10.0 }, rho)
            + rho_new.ln()
            - rho.ln();
        let log_ratio = delta_zp + prior_delta;
        let accept = log_ratio > 0.0 || (log_ratio.is_finite() && u.ln() < log_ratio);
        if accept {
            self.dep.rho_knots = cand_knots;
            self.rho_sites = cand_rho_sites;
            self.precision = cov.inverse();
            self.chol = cov;
            for (rep, zp) in self.reps.iter_mut().zip(new_zp) {
                rep.z_prior = zp;
            }
            self.param_prior = self.compute_param_prior();
            self.log_post = self.assemble_log_post();
            self.cache_version += 1;
        }
        self.adapt[idx].record(accept);
        Ok(accept)
    }

    fn update_radius(&mut self, rng: &mut Stream) -> Result<bool> {
        let idx = adapt_index_shared(KIND_RADIUS, 0, self.knots.knots.len());
        let scale = self.adapt[idx].scale();
        let l = self.dep.radius;
        let l_new = (l.ln() + scale * rng.normal()).exp();
        let u = rng.uniform();
        if !(l_new > 0.0) || !l_new.is_finite() {
            self.adapt[idx].record(false);
            return Ok(false);
        }
        let mut cand = self.dep.clone();
        cand.radius = l_new;
        let prior_delta = prior_logpdf(Prior::HalfT { df: 1.0, scale: 3.0 }, l_new)
            - prior_logpdf(Prior::HalfT { df: 1.0, scale: 3.0 }, l)
            + l_new.ln()
            - l.ln();
        self.update_block_with_u(idx, prior_delta, cand, self.margins, true, u)
    }

    fn update_theta(&mut self, rng: &mut Stream) -> Result<bool> {
        let idx = adapt_index_shared(KIND_THETA, 0, self.knots.knots.len());
        let scale = self.adapt[idx].scale();
        let theta = self.dep.theta;
        let theta_new = theta + scale * rng.normal();
        let u = rng.uniform();
        let mut cand = self.dep.clone();
        cand.theta = theta_new;
        let prior_delta = prior_logpdf(Prior::Normal { mean: 3.0, sd: 0.5 }, theta_new)
            - prior_logpdf(Prior::Normal { mean: 3.0, sd: 0.5 }, theta);
        self.update_block_with_u(idx, prior_delta, cand, self.margins, false, u)
    }

    fn update_beta(&mut self, which_sigma: bool, rng: &mut Stream) -> Result<bool> {
        let kind = if which_sigma {
            KIND_BETA_SIGMA
        } else {
            KIND_BETA_XI
        };
        let idx = adapt_index_shared(kind, 0, self.knots.knots.len());
        let scale = self.adapt[idx].scale();
        let (e1, e2) = (rng.normal(), rng.normal());
        let u = rng.uniform();
        let mut cand = self.margins;
        let (block, hyper_sd) = if which_sigma {
            (&mut cand.beta_sigma, self.hyper.sigma_beta_sigma)
        } else {
            (&mut cand.beta_xi, self.hyper.sigma_beta_xi)
        };
        let old = *block;
        block[0] += scale * e1;
        block[1] += scale * e2;
        let new = *block;
        let prior_delta = beta_block_prior(&new, hyper_sd) - beta_block_prior(&old, hyper_sd);
        self.update_block_with_u(idx, prior_delta, self.dep.clone(), cand, false, u)
    }

    fn update_hyper(&mut self, which_sigma: bool, rng: &mut Stream) -> Result<bool> {
        let kind = if which_sigma {
            KIND_HYPER_SIGMA
        } else {
            KIND_HYPER_XI
        };
        let idx = adapt_index_shared(kind, 0, self.knots.knots.len());
        let scale = self.adapt[idx].scale();
        let (old, beta) = if which_sigma {
            (self.hyper.sigma_beta_sigma, self.margins.beta_sigma)
        } else {
            (self.hyper.sigma_beta_xi, self.margins.beta_xi)
        };
        let new = (old.ln() + scale * rng.normal()).exp();
        let u = rng.uniform();
        if !(new > 0.0) || !new.is_finite() {
            self.adapt[idx].record(false);
            return Ok(false);
        }
        let log_ratio = beta_block_prior(&beta, new) - beta_block_prior(&beta, old)
            + prior_logpdf(Prior::HalfT { df: 2.0, scale: 1.0 }, new)
            - prior_logpdf(Prior::HalfT { df: 2.0, scale: 1.0 }, old)
            + new.ln()
            - old.ln();
        let accept = log_ratio > 0.0 || (log_ratio.is_finite() && u.ln() < log_ratio);
        if accept {
            if which_sigma {
                self.hyper.sigma_beta_sigma = new;
            } else {
                self.hyper.sigma_beta_xi = new;
            }
            self.param_prior = self.compute_param_prior();
            self.log_post = self.assemble_log_post();
        }
        self.adapt[idx].record(accept);
        Ok(accept)
    }

    /// Scaling move on the latent Lévy variables: S_tk → c·S_tk for every
    /// replicate, either across all knots or one knot column. This is the
    /// slow global functional the componentwise sweeps struggle with — the
    /// overall scale of R trades off against φ and the nugget index.
    fn update_s_scale(&mut self, knot: Option<usize>, rng: &mut Stream) -> Result<bool> {
        let k_n = self.knots.knots.len();
        let idx = adapt_index_shared(KIND_S_SCALE, knot.map_or(k_n, |k| k), k_n);
        let scale = self.adapt[idx].scale();
        let c = (scale * rng.normal()).exp();
        let u = rng.uniform();
        if !c.is_finite() || c <= 0.0 {
            self.adapt[idx].record(false);
            return Ok(false);
        }
        let levy = Levy::new(1.0)?;
        let t_n = self.reps.len();
        // candidate per-replicate quantities
        let basis = &self.basis;
        let phi_sites = &self.phi_sites;
        let lik_ctx = &self.lik_ctx;
        let cand: Result<Vec<(f64, f64, Vec<f64>, Vec<f64>)>> = self
            .reps
            .par_iter()
            .enumerate()
            .map(|(t, rep)| {
                let s_new: Vec<f64> = match knot {
                    None => rep.s.iter().map(|s| c * s).collect(),
                    Some(k) => {
                        let mut s = rep.s.clone();
                        s[k] *= c;
                        s
                    }
                };
                let d = rep.x_star.len();
                let mut x_star = vec![0.0; d];
                for j in 0..d {
                    let r: f64 = basis
                        .wendland_row(j)
                        .iter()
                        .zip(&s_new)
                        .map(|(b, s)| b * s)
                        .sum();
                    x_star[j] = r.powf(phi_sites[j]) * rep.w[j];
                }
                let lik = match lik_ctx {
                    None => 0.0,
                    Some(ctx) => crate::likelihood::replicate_loglik(ctx, t, &x_star)?,
                };
                let sp: f64 = s_new.iter().map(|&s| levy.ln_pdf(s)).sum();
                Ok((lik, sp, s_new, x_star))
            })
            .collect();
        let cand = match cand {
            Ok(v) => v,
            Err(e) if Self::rejectable(&e) => {
                self.adapt[idx].record(false);
                return Ok(false);
            }
            Err(e) => return Err(e),
        };
        let new_lik = compensated_sum(cand.iter().map(|c| c.0));
        let new_sp = compensated_sum(cand.iter().map(|c| c.1));
        let old_lik = compensated_sum(self.reps.iter().map(|r| r.lik));
        let old_sp = compensated_sum(self.reps.iter().map(|r| r.s_prior));
        // scaling-map Jacobian: c per scaled coordinate
        let n_scaled = t_n as f64 * if knot.is_none() { k_n as f64 } else { 1.0 };
        let log_ratio = (new_lik - old_lik) + (new_sp - old_sp) + n_scaled * c.ln();
        let accept = log_ratio > 0.0 || (log_ratio.is_finite() && u.ln() < log_ratio);
        if accept {
            for (rep, (lik, sp, s_new, x_star)) in self.reps.iter_mut().zip(cand) {
                rep.lik = lik;
                rep.s_prior = sp;
                rep.s = s_new;
                rep.x_star = x_star;
                rep.refresh_r(&self.basis);
            }
            self.log_post = self.assemble_log_post();
            self.cache_version += 1;
        }
        self.adapt[idx].record(accept);
        Ok(accept)
    }

    // -- latent updates ------------------------------------------------------

    /// One replicate's latent sweep: componentwise S_tk on the log scale,
    /// then the Z_t block preconditioned by the prior Cholesky. Returns the
    /// acceptance counts ((s_acc, s_prop), z_acc).
    #[allow(clippy::too_many_arguments)]
    fn latent_sweep_one(
        rep: &mut ReplicateState,
        t: usize,
        basis: &BasisWeights,
        phi_sites: &[f64],
        chol: &CholFactor,
        precision: &[f64],
        lik_ctx: &Option<LikelihoodContext>,
        levy: &[Levy],
        s_adapt: &mut [BlockAdapt],
        z_adapt: &mut BlockAdapt,
        z_site_adapt: &mut BlockAdapt,
        mut rng: Stream,
    ) -> Result<(u64, u64)> {
        let k_n = rep.s.len();
        let d = rep.z.len();
        let mut s_accepts = 0u64;
        // S components
        for k in 0..k_n {
            let scale = s_adapt[k].scale();
            let s_old = rep.s[k];
            let s_new = (s_old.ln() + scale * rng.normal()).exp();
            let u = rng.uniform();
            if !(s_new > 0.0) || !s_new.is_finite() {
                s_adapt[k].record(false);
                continue;
            }
            // incremental R and X* for this knot's column
            let mut x_star_new = rep.x_star.clone();
            let mut r_new = rep.r.clone();
            for j in 0..d {
                let b = basis.wendland_row(j)[k];
                if b != 0.0 {
                    r_new[j] = rep.r[j] + b * (s_new - s_old);
                    x_star_new[j] = r_new[j].powf(phi_sites[j]) * rep.w[j];
                }
            }
            let lik_new = match lik_ctx {
                None => 0.0,
                Some(ctx) => crate::likelihood::replicate_loglik(ctx, t, &x_star_new)?,
            };
            let sp_delta = levy[k].ln_pdf(s_new) - levy[k].ln_pdf(s_old);
            let log_ratio = lik_new - rep.lik + sp_delta + s_new.ln() - s_old.ln();
            let accept = log_ratio > 0.0 || (log_ratio.is_finite() && u.ln() < log_ratio);
            if accept {
                rep.s[k] = s_new;
                rep.r = r_new;
                rep.x_star = x_star_new;
                rep.lik = lik_new;
                rep.s_prior += sp_delta;
                s_accepts += 1;
            }
            s_adapt[k].record(accept);
        }
        // Z block, preconditioned by the prior Cholesky
        let scale = z_adapt.scale();
        let mut xi = vec![0.0; d];
        rng.fill_normal(&mut xi);
        let u = rng.uniform();
        let step = chol.mul_lower(&xi);
        let z_new: Vec<f64> = rep.z.iter().zip(&step).map(|(z, s)| z + scale * s).collect();
        let mut w_new = vec![0.0; d];
        for (w, &z) in w_new.iter_mut().zip(&z_new) {
            *w = pareto_link(z);
        }
        let x_star_new: Vec<f64> = (0..d)
            .map(|j| rep.r[j].powf(phi_sites[j]) * w_new[j])
            .collect();
        let lik_new = match lik_ctx {
            None => 0.0,
            Some(ctx) => crate::likelihood::replicate_loglik(ctx, t, &x_star_new)?,
        };
        let zp_new = chol.mvn_ln_pdf(&z_new);
        let log_ratio = lik_new - rep.lik + zp_new - rep.z_prior;
        let accept = log_ratio > 0.0 || (log_ratio.is_finite() && u.ln() < log_ratio);
        if accept {
            rep.z = z_new;
            rep.w = w_new;
            rep.x_star = x_star_new;
            rep.lik = lik_new;
            rep.z_prior = zp_new;
        }
        z_adapt.record(accept);

        // componentwise Z sweep: the block move carries the broad prior
        // geometry, the sitewise moves give likelihood-pinned sites room
        let site_scale = z_site_adapt.scale();
        for j in 0..d {
            let delta = site_scale * rng.normal();
            let u = rng.uniform();
            let z_j = rep.z[j];
            let z_new = z_j + delta;
            // prior delta from the precision row: −δ(Qz)_j − δ²Q_jj/2
            let qz: f64 = precision[j * d..(j + 1) * d]
                .iter()
                .zip(&rep.z)
                .map(|(q, z)| q * z)
                .sum();
            let dp = -delta * qz - 0.5 * delta * delta * precision[j * d + j];
            let w_new = pareto_link(z_new);
            let x_new = rep.r[j].powf(phi_sites[j]) * w_new;
            let dl = match lik_ctx {
                None => 0.0,
                Some(ctx) => {
                    crate::likelihood::site_loglik_term(ctx, t, j, x_new)
                        - crate::likelihood::site_loglik_term(ctx, t, j, rep.x_star[j])
                }
            };
            let log_ratio = dl + dp;
            let accept = log_ratio > 0.0 || (log_ratio.is_finite() && u.ln() < log_ratio);
            if accept {
                rep.z[j] = z_new;
                rep.w[j] = w_new;
                rep.x_star[j] = x_new;
            }
            z_site_adapt.record(accept);
        }
        // canonical per-replicate terms: fresh sums keep resume bit-identical
        rep.z_prior = chol.mvn_ln_pdf(&rep.z);
        if let Some(ctx) = lik_ctx {
            rep.lik = crate::likelihood::replicate_loglik(ctx, t, &rep.x_star)?;
        }
        Ok((s_accepts, accept as u64))
    }

    fn update_latents(&mut self) -> Result<()> {
        let k_n = self.knots.knots.len();
        let t_n = self.reps.len();
        let levy: Vec<Levy> = self
            .gamma_knots
            .iter()
            .map(|&g| Levy::new(g))
            .collect::<Result<_>>()?;
        let seed = self.cfg.seed;
        let iter = self.iteration;
        let shared = n_shared_blocks(k_n);
        let basis = &self.basis;
        let phi_sites = &self.phi_sites;
        let chol = &self.chol;
        let precision = &self.precision;
        let lik_ctx = &self.lik_ctx;
        // adaptation storage: per-(t,k) S scales, per-t Z-block scales,
        // per-t sitewise-Z scales
        let (s_block, z_all) = self.adapt[shared..].split_at_mut(t_n * k_n);
        let (z_block, z_site) = z_all.split_at_mut(t_n);
        let results: Result<Vec<()>> = self
            .reps
            .par_iter_mut()
            .zip(s_block.par_chunks_mut(k_n))
            .zip(z_block.par_iter_mut())
            .zip(z_site.par_iter_mut())
            .enumerate()
            .map(|(t, (((rep, s_adapt), z_adapt), z_site_adapt))| {
                let rng = Stream::keyed(seed, &[iter, block_key(KIND_LATENT, t as u64)]);
                Self::latent_sweep_one(
                    rep, t, basis, phi_sites, chol, precision, lik_ctx, &levy, s_adapt,
                    z_adapt, z_site_adapt, rng,
                )
                .map(|_| ())
            })
            .collect();
        results?;
        self.log_post = self.assemble_log_post();
        Ok(())
    }

    // -- iteration ------------------------------------------------------------

    /// Latent-only sweep with shared parameters held fixed; the conditional
    /// sampler for p(S, Z | Y, Θ) used by validation tests and holdout
    /// machinery.
    pub fn step_latents_only(&mut self) -> Result<()> {
        self.update_latents()?;
        self.iteration += 1;
        if self.iteration % self.cfg.epoch as u64 == 0 {
            let freeze = self.iteration as usize >= self.cfg.burn_in;
            for a in &mut self.adapt {
                a.end_epoch();
                if freeze {
                    a.frozen = true;
                }
            }
        }
        Ok(())
    }

    /// One full sweep: sequential shared-parameter updates, then parallel
    /// replicate-specific latent updates, then epoch bookkeeping.
    pub fn step(&mut self) -> Result<()> {
        let seed = self.cfg.seed;
        let it = self.iteration;
        let k_n = self.knots.knots.len();
        for k in 0..k_n {
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_PHI, k as u64)]);
            self.update_phi_k(k, &mut rng)?;
        }
        for k in 0..k_n {
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_RHO, k as u64)]);
            self.update_rho_k(k, &mut rng)?;
        }
        {
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_RADIUS, 0)]);
            self.update_radius(&mut rng)?;
        }
        if !self.cfg.fix_theta {
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_THETA, 0)]);
            self.update_theta(&mut rng)?;
        }
        for k in 0..=k_n {
            let knot = if k < k_n { Some(k) } else { None };
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_S_SCALE, k as u64)]);
            self.update_s_scale(knot, &mut rng)?;
        }
        if !self.cfg.fix_margins {
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_BETA_SIGMA, 0)]);
            self.update_beta(true, &mut rng)?;
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_BETA_XI, 0)]);
            self.update_beta(false, &mut rng)?;
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_HYPER_SIGMA, 0)]);
            self.update_hyper(true, &mut rng)?;
            let mut rng = Stream::keyed(seed, &[it, block_key(KIND_HYPER_XI, 0)]);
            self.update_hyper(false, &mut rng)?;
        }
        self.update_latents()?;
        self.iteration += 1;
        if self.iteration % self.cfg.epoch as u64 == 0 {
            let freeze = self.iteration as usize >= self.cfg.burn_in;
            for a in &mut self.adapt {
                a.end_epoch();
                if freeze {
                    a.frozen = true;
                }
            }
        }
        Ok(())
    }

    /// Draw row in the declared column order.
    pub fn draw_row(&self) -> Vec<f64> {
        let mut row = Vec::with_capacity(2 * self.knots.knots.len() + 9);
        row.extend_from_slice(&self.dep.phi_knots);
        row.extend_from_slice(&self.dep.rho_knots);
        row.push(self.dep.radius);
        row.push(self.dep.alpha0());
        row.extend_from_slice(&self.margins.beta_sigma);
        row.extend_from_slice(&self.margins.beta_xi);
        row.push(self.hyper.sigma_beta_sigma);
        row.push(self.hyper.sigma_beta_xi);
        row.push(self.log_post);
        row
    }

    pub fn draw_columns(n_knots: usize) -> Vec<String> {
        let mut cols = Vec::new();
        for k in 1..=n_knots {
            cols.push(format!("phi_k{k}"));
        }
        for k in 1..=n_knots {
            cols.push(format!("rho_k{k}"));
        }
        cols.push("l".to_string());
        cols.push("alpha0".to_string());
        cols.push("beta_sigma_0".to_string());
        cols.push("beta_sigma_1".to_string());
        cols.push("beta_xi_0".to_string());
        cols.push("beta_xi_1".to_string());
        cols.push("sigma_beta_sigma".to_string());
        cols.push("sigma_beta_xi".to_string());
        cols.push("logpost".to_string());
        cols
    }

    /// Acceptance ledger: shared blocks individually, latent blocks pooled.
    pub fn ledger(&self) -> Vec<BlockStats> {
        let k_n = self.knots.knots.len();
        let t_n = self.reps.len();
        let shared = n_shared_blocks(k_n);
        let mut out = Vec::new();
        let name = |kind: u64, k: usize| -> String {
            match kind {
                KIND_PHI => format!("phi_k{}", k + 1),
                KIND_RHO => format!("rho_k{}", k + 1),
                KIND_RADIUS => "l".to_string(),
                KIND_THETA => "alpha0".to_string(),
                KIND_BETA_SIGMA => "beta_sigma".to_string(),
                KIND_BETA_XI => "beta_xi".to_string(),
                KIND_HYPER_SIGMA => "sigma_beta_sigma".to_string(),
                KIND_HYPER_XI => "sigma_beta_xi".to_string(),
                KIND_S_SCALE => {
                    if k < self.knots.knots.len() {
                        format!("s_scale_k{}", k + 1)
                    } else {
                        "s_scale_global".to_string()
                    }
                }
                _ => unreachable!(),
            }
        };
        for kind in [
            KIND_PHI,
            KIND_RHO,
            KIND_RADIUS,
            KIND_THETA,
            KIND_BETA_SIGMA,
            KIND_BETA_XI,
            KIND_HYPER_SIGMA,
            KIND_HYPER_XI,
            KIND_S_SCALE,
        ] {
            let count = if kind == KIND_PHI || kind == KIND_RHO {
                k_n
            } else if kind == KIND_S_SCALE {
                k_n + 1
            } else {
                1
            };
            for k in 0..count {
                let a = &self.adapt[adapt_index_shared(kind, k, k_n)];
                out.push(BlockStats {
                    block: name(kind, k),
                    proposals: a.proposals,
                    accepts: a.accepts,
                    final_scale: a.scale(),
                });
            }
        }
        let s_range = &self.adapt[shared..shared + t_n * k_n];
        let z_range = &self.adapt[shared + t_n * k_n..shared + t_n * k_n + t_n];
        let z_site_range = &self.adapt[shared + t_n * k_n + t_n..];
        let pool = |blocks: &[BlockAdapt], label: &str| -> BlockStats {
            let proposals: u64 = blocks.iter().map(|b| b.proposals).sum();
            let accepts: u64 = blocks.iter().map(|b| b.accepts).sum();
            let mean_log: f64 =
                blocks.iter().map(|b| b.log_scale).sum::<f64>() / blocks.len().max(1) as f64;
            BlockStats {
                block: label.to_string(),
                proposals,
                accepts,
                final_scale: mean_log.exp(),
            }
        };
        out.push(pool(s_range, "latent_s"));
        out.push(pool(z_range, "latent_z"));
        out.push(pool(z_site_range, "latent_z_site"));
        out
    }
}

fn beta_block_prior(beta: &[f64; 2], sd: f64) -> f64 {
    prior_logpdf(Prior::Normal { mean: 0.0, sd }, beta[0])
        + prior_logpdf(Prior::Normal { mean: 0.0, sd }, beta[1])
}

fn build_adapt(n_knots: usize, n_rep: usize, n_sites: usize, cfg: &SamplerConfig) -> Vec<BlockAdapt> {
    let mut adapt = Vec::new();
    for _ in 0..n_knots {
        adapt.push(BlockAdapt::new(0.5, 1, cfg.target_scalar)); // phi (logit)
    }
    for _ in 0..n_knots {
        adapt.push(BlockAdapt::new(0.5, 1, cfg.target_scalar)); // rho (log)
    }
    adapt.push(BlockAdapt::new(0.2, 1, cfg.target_scalar)); // radius
    adapt.push(BlockAdapt::new(0.3, 1, cfg.target_scalar)); // theta
    adapt.push(BlockAdapt::new(0.05, 2, cfg.target_block)); // beta_sigma
    adapt.push(BlockAdapt::new(0.05, 2, cfg.target_block)); // beta_xi
    adapt.push(BlockAdapt::new(0.5, 1, cfg.target_scalar)); // hyper sigma
    adapt.push(BlockAdapt::new(0.5, 1, cfg.target_scalar)); // hyper xi
    for _ in 0..=n_knots {
        adapt.push(BlockAdapt::new(0.4, 1, cfg.target_scalar)); // S scalings
    }
    for _ in 0..n_rep * n_knots {
        adapt.push(BlockAdapt::new(1.0, 1, cfg.target_scalar)); // S_tk
    }
    let z_scale = 2.38 / (n_sites as f64).sqrt();
    for _ in 0..n_rep {
        adapt.push(BlockAdapt::new(z_scale, n_sites, cfg.target_block)); // Z_t block
    }
    for _ in 0..n_rep {
        adapt.push(BlockAdapt::new(0.8, 1, cfg.target_scalar)); // Z_tj sitewise
    }
    adapt
}

/// Moment-based site-wise GPD fits regressed on elevation; the shape is
/// clamped nonnegative so every observation starts inside the support.
fn init_margins(data: &Dataset) -> MarginalParamsGpd {
    let d = data.n_sites();
    let mut ln_sigma = Vec::new();
    let mut elevs = Vec::new();
    for j in 0..d {
        let mut ex = Vec::new();
        for t in 0..data.n_rep {
            let y = data.value(t, j);
            if y > data.thresholds[j] {
                ex.push(y - data.thresholds[j]);
            }
        }
        if ex.len() >= 5 {
            let n = ex.len() as f64;
            let mean = ex.iter().sum::<f64>() / n;
            let var = ex.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let ratio = if var > 0.0 { mean * mean / var } else { 1.0 };
            let sigma = (0.5 * mean * (ratio + 1.0)).max(1e-3);
            ln_sigma.push(sigma.ln());
            elevs.push(data.sites.elev[j]);
        }
    }
    let beta_sigma = if ln_sigma.len() >= 2 {
        let slope = crate::stats::ols_slope(&elevs, &ln_sigma);
        let mean_e = elevs.iter().sum::<f64>() / elevs.len() as f64;
        let mean_s = ln_sigma.iter().sum::<f64>() / ln_sigma.len() as f64;
        let slope = if slope.is_finite() { slope } else { 0.0 };
        [mean_s - slope * mean_e, slope]
    } else {
        [1.0, 0.0]
    };
    MarginalParamsGpd {
        beta_sigma,
        // a small positive shape keeps every exceedance inside the support
        beta_xi: [0.1, 0.0],
    }
}

/// Runs the sampler to completion. Deterministic given (seed, config): the
/// same draws come back for any worker count, and a resumed run continues
/// bit-identically from a snapshot.
pub fn run(
    data: &Dataset,
    knots: KnotConfig,
    nu: f64,
    cfg: SamplerConfig,
    init: Option<ChainStateSnapshot>,
) -> Result<McmcOutput> {
    run_with_checkpoints(data, knots, nu, cfg, init, 0, |_| Ok(()))
}

/// `run` plus a checkpoint sink invoked every `every` iterations (0 = never)
/// and once more at the end of the loop.
pub fn run_with_checkpoints(
    data: &Dataset,
    knots: KnotConfig,
    nu: f64,
    cfg: SamplerConfig,
    init: Option<ChainStateSnapshot>,
    every: usize,
    mut sink: impl FnMut(&ChainStateSnapshot) -> Result<()> + Send,
) -> Result<McmcOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(data, knots, nu, cfg, init, every, &mut sink))
}

fn run_in_pool(
    data: &Dataset,
    knots: KnotConfig,
    nu: f64,
    cfg: SamplerConfig,
    init: Option<ChainStateSnapshot>,
    checkpoint_every: usize,
    sink: &mut impl FnMut(&ChainStateSnapshot) -> Result<()>,
) -> Result<McmcOutput> {
    let n_knots = knots.knots.len();
    let mut chain = match init {
        Some(snap) => Chain::from_snapshot(data, knots, nu, cfg.clone(), snap)?,
        None => Chain::new(data, knots, nu, cfg.clone())?,
    };
    let mut rows = Vec::new();
    let mut latent_draws = Vec::new();
    let mut trace = Vec::with_capacity(cfg.iterations);
    if cfg.iterations == 0 {
        rows.push(chain.draw_row());
    }
    while (chain.iteration as usize) < cfg.iterations {
        chain.step()?;
        trace.push(chain.log_posterior());
        let it = chain.iteration as usize;
        if it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 {
            rows.push(chain.draw_row());
            if cfg.save_latent_draws {
                let snap = chain.snapshot();
                latent_draws.push((snap.s, snap.z));
            }
        }
        if checkpoint_every > 0 && it % checkpoint_every == 0 {
            sink(&chain.snapshot())?;
        }
    }
    if checkpoint_every > 0 {
        sink(&chain.snapshot())?;
    }
    let ledger = chain.ledger();
    let mut warnings = Vec::new();
    for b in &ledger {
        if b.proposals > 0 {
            let rate = b.accepts as f64 / b.proposals as f64;
            if !(0.05..=0.95).contains(&rate) {
                warnings.push(format!(
                    "block {} acceptance rate {:.3} outside [0.05, 0.95]",
                    b.block, rate
                ));
            }
        }
    }
    Ok(McmcOutput {
        draws: Draws {
            columns: Chain::draw_columns(n_knots),
            rows,
        },
        ledger,
        logpost_trace: trace,
        final_state: chain.snapshot(),
        latent_draws,
        acceptance_warnings: warnings,
    })
}

#[cfg(test)]
mod tests;

//! Tail-dependence analytics: theoretical χ and η for each construction,
//! the nugget attenuation constants (c, C), the max-stable-scale regime
//! classifier, and rank-based empirical estimators χ̂(u), η̂(u).

use crate::dists::pareto_link;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::specfun::{std_normal_cdf, student_t_survival};

/// Asymptotic dependence class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Dependent,
    Independent,
}

/// Pairwise tail summary: χ* of the smooth pair, the nuggeted χ interval
/// [cχ*, Cχ*], the η interval (shared by smooth and nuggeted processes), and
/// the nugget constants.
#[derive(Debug, Clone)]
pub struct TailSummary {
    pub regime: Regime,
    /// χ of the smooth pair (0 under asymptotic independence).
    pub chi_smooth: f64,
    /// Monte Carlo standard error of `chi_smooth` when an expectation was
    /// estimated; 0 when the value is closed-form.
    pub chi_smooth_se: f64,
    /// Nuggeted χ interval endpoints.
    pub chi: (f64, f64),
    /// η interval (equal endpoints when the theory pins a point).
    pub eta: (f64, f64),
    /// Nugget constants (c, C) with c ≤ 1 ≤ C and c + C = 2.
    pub constants: (f64, f64),
}

/// Outcome of the Table-style classification; parameter combinations outside
/// the case structure are reported, never silently defaulted.
#[derive(Debug, Clone)]
pub enum TailDep {
    Classified(TailSummary),
    Unclassified { reason: String },
}

impl TailDep {
    pub fn expect_classified(self) -> TailSummary {
        match self {
            TailDep::Classified(s) => s,
            TailDep::Unclassified { reason } => panic!("unclassified tail pair: {reason}"),
        }
    }
}

/// Variant-specific pair data.
#[derive(Debug, Clone)]
pub enum PairVariant {
    /// Global-scale mixture: one φ for both sites.
    M1 { phi: f64 },
    /// Pareto(γ)-scale Gaussian mixture with raw basis rows at the two sites.
    M3 {
        gamma: f64,
        b_i: Vec<f64>,
        b_j: Vec<f64>,
    },
    /// Lévy-scale mixture, stable index 1/2: site φ's, basis rows, knot scales.
    M4 {
        phi_i: f64,
        phi_j: f64,
        b_i: Vec<f64>,
        b_j: Vec<f64>,
        gamma_k: Vec<f64>,
    },
}

/// Everything a pairwise tail computation needs.
#[derive(Debug, Clone)]
pub struct PairContext {
    pub variant: PairVariant,
    pub alpha0: f64,
    /// Residual coefficient of the latent Gaussian pair, (1+ρ)/2 ∈ (1/2, 1).
    pub eta_z: f64,
    pub same_site: bool,
}

impl PairContext {
    pub fn new(variant: PairVariant, alpha0: f64, rho_ij: f64) -> Result<Self> {
        if !(alpha0 > 1.0) {
            return Err(Error::domain(
                "PairContext",
                format!("alpha0 must be > 1, got {alpha0}"),
            ));
        }
        if !(rho_ij > 0.0 && rho_ij < 1.0) {
            return Err(Error::domain(
                "PairContext",
                format!("latent correlation must lie in (0,1), got {rho_ij}"),
            ));
        }
        Ok(PairContext {
            variant,
            alpha0,
            eta_z: 0.5 * (1.0 + rho_ij),
            same_site: false,
        })
    }

    pub fn same_site(variant: PairVariant, alpha0: f64) -> Result<Self> {
        if !(alpha0 > 1.0) {
            return Err(Error::domain(
                "PairContext",
                format!("alpha0 must be > 1, got {alpha0}"),
            ));
        }
        Ok(PairContext {
            variant,
            alpha0,
            eta_z: 1.0,
            same_site: true,
        })
    }

    /// Marginal tail indices (α*_i, α*_j) of the smooth process.
    pub fn alpha_stars(&self) -> (f64, f64) {
        match &self.variant {
            PairVariant::M1 { phi } => {
                let a = (1.0 / phi).min(1.0 / (1.0 - phi));
                (a, a)
            }
            PairVariant::M3 { gamma, .. } => (*gamma, *gamma),
            PairVariant::M4 { phi_i, phi_j, .. } => {
                ((0.5 / phi_i).min(1.0), (0.5 / phi_j).min(1.0))
            }
        }
    }

    /// Theorem-2 moment condition α₀ ≥ 2·max(α*); equality is flagged too
    /// since the theorem statement and the marginal condition disagree on
    /// strictness.
    pub fn theorem2_warning(&self) -> Option<String> {
        let (ai, aj) = self.alpha_stars();
        let bound = 2.0 * ai.max(aj);
        if self.alpha0 < bound {
            Some(format!(
                "alpha0 = {} below the joint-tail moment bound {}; chi interval not guaranteed",
                self.alpha0, bound
            ))
        } else if self.alpha0 == bound {
            Some(format!(
                "alpha0 = {} exactly at the joint-tail moment bound; treated as satisfied",
                self.alpha0
            ))
        } else {
            None
        }
    }
}

/// ∫_a^b t^e dt with the e = −1 log branch.
fn power_integral(a: f64, b: f64, e: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= a);
    if (e + 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0)
    }
}

/// Nugget constants c = E[min(U,V)] and C = E[max(U,V)] = 2 − c for the
/// normalised nugget powers U = ε_i^{α*_i}/m_i, V = ε_j^{α*_j}/m_j, via the
/// exact piecewise integrals of Pr(U > t)Pr(V > t).
pub fn nugget_constants(alpha0: f64, alpha_star_i: f64, alpha_star_j: f64) -> Result<(f64, f64)> {
    if !(alpha_star_i > 0.0 && alpha_star_j > 0.0) {
        return Err(Error::domain(
            "nugget_constants",
            "tail indices must be positive".to_string(),
        ));
    }
    if alpha0 <= alpha_star_i.max(alpha_star_j) {
        return Err(Error::MomentDiverges(format!(
            "alpha0 = {alpha0} <= max tail index {}; nugget moments diverge",
            alpha_star_i.max(alpha_star_j)
        )));
    }
    let m_of = |a: f64| 1.0 / (1.0 - (a / alpha0).powi(2));
    let p_of = |a: f64| alpha0 / a;
    // order so m_hi >= m_lo, i.e. the larger tail index first
    let (a_hi, a_lo) = if alpha_star_i >= alpha_star_j {
        (alpha_star_i, alpha_star_j)
    } else {
        (alpha_star_j, alpha_star_i)
    };
    let (m_hi, m_lo) = (m_of(a_hi), m_of(a_lo));
    let (p_hi, p_lo) = (p_of(a_hi), p_of(a_lo));
    let (t_hi, t_lo) = (1.0 / m_hi, 1.0 / m_lo); // t_hi <= t_lo
    // I1 over (0, t_hi): both survival branches in their lower form
    let i1 = power_integral(0.0, t_hi, 0.0) - 0.5 * m_hi.powf(p_hi) * power_integral(0.0, t_hi, p_hi)
        - 0.5 * m_lo.powf(p_lo) * power_integral(0.0, t_hi, p_lo)
        + 0.25 * m_hi.powf(p_hi) * m_lo.powf(p_lo) * power_integral(0.0, t_hi, p_hi + p_lo);
    // I2 over (t_hi, t_lo): the hi component flips to its upper branch;
    // empty when the tail indices coincide
    let i2 = if t_lo > t_hi {
        0.5 * m_hi.powf(-p_hi) * power_integral(t_hi, t_lo, -p_hi)
            - 0.25 * m_hi.powf(-p_hi) * m_lo.powf(p_lo) * power_integral(t_hi, t_lo, p_lo - p_hi)
    } else {
        0.0
    };
    // I3 over (t_lo, ∞): both upper branches; p_hi + p_lo > 2 so it converges
    let i3 = 0.25 * m_hi.powf(-p_hi) * m_lo.powf(-p_lo) * t_lo.powf(1.0 - p_hi - p_lo)
        / (p_hi + p_lo - 1.0);
    let c = i1 + i2 + i3;
    Ok((c, 2.0 - c))
}

/// Monte Carlo E[min(W_i^{e_i}/n_i, W_j^{e_j}/n_j)] over the Gaussian-copula
/// standard-Pareto pair with correlation ρ. Returns (estimate, se).
fn mc_min_power(
    e_i: f64,
    e_j: f64,
    norm_i: f64,
    norm_j: f64,
    rho: f64,
    rng: &mut Stream,
    n: usize,
) -> (f64, f64) {
    let root = (1.0 - rho * rho).sqrt();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n {
        let (z1, e) = rng.normal_pair();
        let z2 = rho * z1 + root * e;
        let wi = pareto_link(z1).powf(e_i) / norm_i;
        let wj = pareto_link(z2).powf(e_j) / norm_j;
        let v = wi.min(wj);
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n as f64;
    let var = (sumsq / n as f64 - mean * mean).max(0.0);
    (mean, (var / n as f64).sqrt())
}

fn clamp_eta(lo: f64, hi: f64) -> (f64, f64) {
    // residual dependence lives in [1/2, 1]; looser analytic endpoints are
    // reported clamped to the feasible range
    (lo.clamp(0.5, 1.0), hi.clamp(0.5, 1.0))
}

/// η of the pair; identical for the smooth and nuggeted processes.
pub fn eta_theoretical(ctx: &PairContext) -> Result<TailDep> {
    if ctx.same_site {
        return Ok(TailDep::Classified(eta_only_summary((1.0, 1.0))));
    }
    let eta_z = ctx.eta_z;
    let interval: (f64, f64) = match &ctx.variant {
        PairVariant::M1 { phi } => {
            if *phi >= 0.5 {
                (1.0, 1.0)
            } else {
                let v = (phi / (1.0 - phi)).max(eta_z);
                (v, v)
            }
        }
        PairVariant::M3 { b_i, b_j, .. } => {
            if shared_knots(b_i, b_j).is_empty() {
                (0.5, 0.5)
            } else {
                (1.0, 1.0)
            }
        }
        PairVariant::M4 {
            phi_i,
            phi_j,
            b_i,
            b_j,
            ..
        } => {
            const ALPHA: f64 = 0.5;
            let (lo, hi) = (phi_i.min(*phi_j), phi_i.max(*phi_j));
            let shared = !shared_knots(b_i, b_j).is_empty();
            if lo == ALPHA || hi == ALPHA {
                return Ok(TailDep::Unclassified {
                    reason: format!(
                        "phi equal to the stable index {ALPHA} falls outside the case table"
                    ),
                });
            }
            if shared {
                if lo > ALPHA {
                    (1.0, 1.0)
                } else if hi < ALPHA {
                    clamp_eta(eta_z.max(lo / ALPHA), eta_z.max(hi / ALPHA))
                } else {
                    // 1/η ∈ [ (min{φ_i+φ_j, 2αη_Z} − φ_j + α) / (2αη_Z), 2 − φ_i/α ]
                    let two_a_eta = 2.0 * ALPHA * eta_z;
                    let inv_lo = ((lo + hi).min(two_a_eta) - hi + ALPHA) / two_a_eta;
                    let inv_hi = 2.0 - lo / ALPHA;
                    clamp_eta(1.0 / inv_hi, 1.0 / inv_lo)
                }
            } else if lo > ALPHA {
                clamp_eta(
                    0.5f64.max(ALPHA * eta_z / hi),
                    0.5f64.max(ALPHA / lo),
                )
            } else if hi < ALPHA {
                clamp_eta(eta_z, eta_z.max(hi / ALPHA))
            } else {
                // 1/η ∈ [ (min{φ_j, 2αη_Z} + α) / (2αη_Z), 2 ]
                let two_a_eta = 2.0 * ALPHA * eta_z;
                let inv_lo = (hi.min(two_a_eta) + ALPHA) / two_a_eta;
                clamp_eta(0.5, 1.0 / inv_lo)
            }
        }
    };
    Ok(TailDep::Classified(eta_only_summary(interval)))
}

fn eta_only_summary(eta: (f64, f64)) -> TailSummary {
    TailSummary {
        regime: if eta == (1.0, 1.0) {
            Regime::Dependent
        } else {
            Regime::Independent
        },
        chi_smooth: f64::NAN,
        chi_smooth_se: 0.0,
        chi: (f64::NAN, f64::NAN),
        eta,
        constants: (f64::NAN, f64::NAN),
    }
}

fn shared_knots(b_i: &[f64], b_j: &[f64]) -> Vec<usize> {
    b_i.iter()
        .zip(b_j)
        .enumerate()
        .filter(|(_, (a, b))| **a > 0.0 && **b > 0.0)
        .map(|(k, _)| k)
        .collect()
}

/// Normalised knot profile v_ki = (B_ki γ_k)^α / Σ_{k'} (B_k'i γ_k')^α at
/// the stable index α = 1/2.
pub fn v_profile(b_row: &[f64], gamma_k: &[f64]) -> Result<Vec<f64>> {
    let raw: Vec<f64> = b_row
        .iter()
        .zip(gamma_k)
        .map(|(b, g)| (b * g).sqrt())
        .collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::Invalid(
            "site has no active knot; v profile undefined".to_string(),
        ));
    }
    Ok(raw.iter().map(|v| v / total).collect())
}

/// Full χ/η classification of a pair; Monte Carlo (with `n_mc` draws from
/// `rng`) evaluates the expectations the theory leaves open.
pub fn chi_theoretical(ctx: &PairContext, rng: &mut Stream, n_mc: usize) -> Result<TailDep> {
    if ctx.same_site {
        return Ok(TailDep::Classified(TailSummary {
            regime: Regime::Dependent,
            chi_smooth: 1.0,
            chi_smooth_se: 0.0,
            chi: (1.0, 1.0),
            eta: (1.0, 1.0),
            constants: (1.0, 1.0),
        }));
    }
    let eta = match eta_theoretical(ctx)? {
        TailDep::Classified(s) => s.eta,
        u @ TailDep::Unclassified { .. } => return Ok(u),
    };
    let (a_i, a_j) = ctx.alpha_stars();
    let rho = 2.0 * ctx.eta_z - 1.0;
    let (chi_smooth, se): (f64, f64) = match &ctx.variant {
        PairVariant::M1 { phi } => {
            if *phi > 0.5 {
                let beta = (1.0 - phi) / phi;
                let (e, se) = mc_min_power(beta, beta, 1.0, 1.0, rho, rng, n_mc);
                ((2.0 * phi - 1.0) / phi * e, (2.0 * phi - 1.0) / phi * se)
            } else {
                (0.0, 0.0)
            }
        }
        PairVariant::M3 { gamma, b_i, b_j } => {
            let shared = shared_knots(b_i, b_j);
            if shared.is_empty() {
                (0.0, 0.0)
            } else {
                let df = gamma + 1.0;
                let root = (1.0 - rho * rho).sqrt();
                let mut chi = 0.0;
                for &k in &shared {
                    let ratio_ij = b_i[k].powf(1.0 / gamma) * b_j[k].powf(-1.0 / gamma);
                    let a_ij = df.sqrt() * (ratio_ij - rho) / root;
                    let a_ji = df.sqrt() * (1.0 / ratio_ij - rho) / root;
                    chi += b_i[k] * student_t_survival(a_ij, df)?
                        + b_j[k] * student_t_survival(a_ji, df)?;
                }
                (chi, 0.0)
            }
        }
        PairVariant::M4 {
            phi_i,
            phi_j,
            b_i,
            b_j,
            gamma_k,
        } => {
            const ALPHA: f64 = 0.5;
            let shared = shared_knots(b_i, b_j);
            let ad = !shared.is_empty() && *phi_i > ALPHA && *phi_j > ALPHA;
            if !ad {
                (0.0, 0.0)
            } else {
                let (e_i, e_j) = (ALPHA / phi_i, ALPHA / phi_j);
                // E[W^q] = 1/(1−q) for a standard Pareto W and q < 1
                let (n_i, n_j) = (1.0 / (1.0 - e_i), 1.0 / (1.0 - e_j));
                let (emin, se) = mc_min_power(e_i, e_j, n_i, n_j, rho, rng, n_mc);
                let vi = v_profile(b_i, gamma_k)?;
                let vj = v_profile(b_j, gamma_k)?;
                let vsum: f64 = shared.iter().map(|&k| vi[k].min(vj[k])).sum();
                (emin * vsum, se * vsum)
            }
        }
    };
    let constants = nugget_constants(ctx.alpha0, a_i, a_j)?;
    let regime = if chi_smooth * constants.0 > 0.0 {
        Regime::Dependent
    } else {
        Regime::Independent
    };
    Ok(TailDep::Classified(TailSummary {
        regime,
        chi_smooth,
        chi_smooth_se: se,
        chi: (constants.0 * chi_smooth, constants.1 * chi_smooth),
        eta,
        constants,
    }))
}

/// Regime classifier for the max-stable-scale mixture (Proposition-style):
/// joint survival exponent by the position of η_Z against φ/(1−φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum M2Regime {
    /// η_Z ≥ φ/(1−φ): joint exceedances decay at rate 1/((1−φ)η_Z).
    Independent { exponent: f64 },
    /// η_Z < φ/(1−φ): rate 1/φ, with the AD constant E[min(W_i,W_j)^{(1−φ)/φ}]
    /// left to Monte Carlo.
    Dependent { exponent: f64 },
    /// Exactly on the boundary; the two rates coincide.
    Boundary { exponent: f64 },
}

pub fn m2_regime(phi: f64, eta_z: f64) -> Result<M2Regime> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::domain(
            "m2_regime",
            format!("phi must be in (0,1), got {phi}"),
        ));
    }
    if !(eta_z > 0.5 && eta_z < 1.0) {
        return Err(Error::domain(
            "m2_regime",
            format!("eta_z must be in (1/2,1), got {eta_z}"),
        ));
    }
    let boundary = phi / (1.0 - phi);
    Ok(if eta_z > boundary {
        M2Regime::Independent {
            exponent: 1.0 / ((1.0 - phi) * eta_z),
        }
    } else if eta_z < boundary {
        M2Regime::Dependent { exponent: 1.0 / phi }
    } else {
        M2Regime::Boundary {
            exponent: 1.0 / phi,
        }
    })
}

/// Bivariate exponent function of the max-stable dependency:
/// Λ(r₁, r₂) = (1/r₁)Φ(a/2 − ln(r₁/r₂)/a) + (1/r₂)Φ(a/2 − ln(r₂/r₁)/a).
pub fn br_lambda(r1: f64, r2: f64, a: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0 && a > 0.0) {
        return Err(Error::domain(
            "br_lambda",
            format!("need positive arguments, got r1={r1}, r2={r2}, a={a}"),
        ));
    }
    let l = (r1 / r2).ln();
    Ok(std_normal_cdf(0.5 * a - l / a) / r1 + std_normal_cdf(0.5 * a + l / a) / r2)
}

// ---------------------------------------------------------------------------
// Empirical estimators
// ---------------------------------------------------------------------------

/// One estimate on the u-grid with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub u: f64,
    pub estimate: f64,
    pub se: f64,
}

/// Curve plus the grid points that had to be dropped for lack of exceedances.
#[derive(Debug, Clone, Default)]
pub struct EmpiricalCurve {
    pub points: Vec<CurvePoint>,
    pub omitted_us: Vec<f64>,
}

/// Pseudo-uniforms rank/(N+1); ties broken by input order, which keeps the
/// estimators rank-invariant under strictly increasing transforms.
pub fn pseudo_uniforms(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let mut u = vec![0.0; n];
    for (rank, &i) in idx.iter().enumerate() {
        u[i] = (rank + 1) as f64 / (n + 1) as f64;
    }
    u
}

/// χ̂(u) = #{U_i > u ∧ U_j > u} / #{U_j > u}, with binomial standard errors.
pub fn empirical_chi(u_grid: &[f64], xs_i: &[f64], xs_j: &[f64]) -> Result<EmpiricalCurve> {
    empirical_curves(u_grid, xs_i, xs_j).map(|(chi, _)| chi)
}

/// η̂(u) = ln(1−u) / ln p̂_joint(u) with a delta-method standard error.
pub fn empirical_eta(u_grid: &[f64], xs_i: &[f64], xs_j: &[f64]) -> Result<EmpiricalCurve> {
    empirical_curves(u_grid, xs_i, xs_j).map(|(_, eta)| eta)
}

/// Both curves in one pass over the ranks.
pub fn empirical_curves(
    u_grid: &[f64],
    xs_i: &[f64],
    xs_j: &[f64],
) -> Result<(EmpiricalCurve, EmpiricalCurve)> {
    let n = xs_i.len();
    if n != xs_j.len() {
        return Err(Error::Invalid(format!(
            "paired samples differ in length: {n} vs {}",
            xs_j.len()
        )));
    }
    if n < 1000 {
        return Err(Error::Invalid(format!(
            "need at least 1000 paired samples, got {n}"
        )));
    }
    if u_grid.iter().any(|&u| !(u > 0.0 && u < 1.0)) {
        return Err(Error::Invalid("u grid must lie inside (0,1)".to_string()));
    }
    let ui = pseudo_uniforms(xs_i);
    let uj = pseudo_uniforms(xs_j);
    let mut chi = EmpiricalCurve::default();
    let mut eta = EmpiricalCurve::default();
    for &u in u_grid {
        let mut joint = 0usize;
        let mut cond = 0usize;
        for t in 0..n {
            let ej = uj[t] > u;
            let ei = ui[t] > u;
            cond += ej as usize;
            joint += (ei && ej) as usize;
        }
        if cond == 0 {
            chi.omitted_us.push(u);
            eta.omitted_us.push(u);
            continue;
        }
        let chi_hat = joint as f64 / cond as f64;
        chi.points.push(CurvePoint {
            u,
            estimate: chi_hat,
            se: (chi_hat * (1.0 - chi_hat) / cond as f64).sqrt(),
        });
        if joint == 0 {
            eta.omitted_us.push(u);
            continue;
        }
        let p_joint = joint as f64 / n as f64;
        let eta_hat = (1.0 - u).ln() / p_joint.ln();
        // delta method through log p̂
        let se_logp = ((1.0 - p_joint) / (n as f64 * p_joint)).sqrt();
        let se = ((1.0 - u).ln().abs() / (p_joint.ln() * p_joint.ln())) * se_logp;
        eta.points.push(CurvePoint {
            u,
            estimate: eta_hat,
            se,
        });
    }
    Ok((chi, eta))
}

/// Hill-type η̂ on the structure variable min(1/(1−U_i), 1/(1−U_j)) using the
/// top k order statistics; the flagged alternative estimator.
pub fn empirical_eta_hill(xs_i: &[f64], xs_j: &[f64], k: usize) -> Result<f64> {
    let n = xs_i.len();
    if n != xs_j.len() || n < 1000 {
        return Err(Error::Invalid(
            "need equal-length paired samples of at least 1000".to_string(),
        ));
    }
    if k < 2 || k >= n {
        return Err(Error::Invalid(format!("need 2 <= k < n, got k={k}")));
    }
    let ui = pseudo_uniforms(xs_i);
    let uj = pseudo_uniforms(xs_j);
    let mut t: Vec<f64> = (0..n)
        .map(|r| (1.0 / (1.0 - ui[r])).min(1.0 / (1.0 - uj[r])))
        .collect();
    t.sort_by(f64::total_cmp);
    let thresh = t[n - k - 1];
    let mean_log: f64 = t[n - k..].iter().map(|v| (v / thresh).ln()).sum::<f64>() / k as f64;
    Ok(mean_log.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::LogLaplace;

    #[test]
    fn constants_identities() {
        // c + C = 2 exactly; c ≤ 1 ≤ C; I2 = 0 for equal tail indices
        for &(a0, ai, aj) in &[(5.0, 1.0, 5.0 / 7.0), (4.0, 2.0, 2.0), (10.0, 0.5, 1.0)] {
            let (c, cc) = nugget_constants(a0, ai, aj).unwrap();
            assert!((c + cc - 2.0).abs() < 1e-12);
            assert!(c <= 1.0 + 1e-12 && cc >= 1.0 - 1e-12, "c={c} C={cc}");
            assert!(c > 0.0);
        }
        assert!(matches!(
            nugget_constants(1.5, 2.0, 1.0),
            Err(Error::MomentDiverges(_))
        ));
    }

    #[test]
    fn constants_equal_indices_match_paper_split() {
        // equal tail indices: t_i = t_j so the middle piece vanishes and
        // c = E[min(U,V)] has the simple two-piece value
        let (a0, a) = (5.0, 1.0);
        let (c, _) = nugget_constants(a0, a, a).unwrap();
        // independent cross-check on the same quantity
        let (c2, _) = nugget_constants(a0, a + 0.0, a).unwrap();
        assert_eq!(c, c2);
        assert!(c < 1.0);
    }

    #[test]
    fn constants_vs_monte_carlo_oracle() {
        // E[min(ε_i^{α*_i}/m_i, ε_j^{α*_j}/m_j)] by simulation, 3 SE
        let (a0, ai, aj) = (5.0, 1.0, 5.0 / 7.0);
        let (c, _) = nugget_constants(a0, ai, aj).unwrap();
        let eps = LogLaplace::new(a0).unwrap();
        let (mi, mj) = (
            eps.moment(ai).unwrap(),
            eps.moment(aj).unwrap(),
        );
        let mut rng = Stream::root(555);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let u = eps.sample(&mut rng).powf(ai) / mi;
            let v = eps.sample(&mut rng).powf(aj) / mj;
            let m = u.min(v);
            sum += m;
            sumsq += m * m;
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((c - mean).abs() < 3.0 * se, "c={c} mc={mean} se={se}");
    }

    #[test]
    fn interval_shrinks_with_light_nugget() {
        for &astar in &[0.5, 0.7, 1.0] {
            let (c, cc) = nugget_constants(200.0, astar, astar).unwrap();
            assert!(cc - c < 0.02, "alpha*={astar}: width {}", cc - c);
        }
    }

    #[test]
    fn same_site_is_fully_dependent() {
        let ctx = PairContext::same_site(
            PairVariant::M1 { phi: 0.7 },
            5.0,
        )
        .unwrap();
        let mut rng = Stream::root(1);
        let s = chi_theoretical(&ctx, &mut rng, 1000).unwrap().expect_classified();
        assert_eq!(s.chi, (1.0, 1.0));
        assert_eq!(s.eta, (1.0, 1.0));
    }

    #[test]
    fn m3_disjoint_knots_eta_half() {
        let ctx = PairContext::new(
            PairVariant::M3 {
                gamma: 1.0,
                b_i: vec![0.8, 0.0],
                b_j: vec![0.0, 0.6],
            },
            5.0,
            0.5,
        )
        .unwrap();
        let s = eta_theoretical(&ctx).unwrap().expect_classified();
        assert_eq!(s.eta, (0.5, 0.5));
        let mut rng = Stream::root(2);
        let s = chi_theoretical(&ctx, &mut rng, 1000).unwrap().expect_classified();
        assert_eq!(s.chi_smooth, 0.0);
        assert_eq!(s.regime, Regime::Independent);
    }

    #[test]
    fn m3_shared_knot_chi_reduces_to_stationary_form() {
        // equal unit weights at one knot reduce to the classic
        // 2·T̄_{γ+1}(√((γ+1)(1−ρ)/(1+ρ))) form
        let (gamma, rho) = (1.0, 0.5);
        let ctx = PairContext::new(
            PairVariant::M3 {
                gamma,
                b_i: vec![1.0],
                b_j: vec![1.0],
            },
            5.0,
            rho,
        )
        .unwrap();
        let mut rng = Stream::root(3);
        let s = chi_theoretical(&ctx, &mut rng, 10).unwrap().expect_classified();
        let arg = ((gamma + 1.0) * (1.0 - rho) / (1.0 + rho)).sqrt();
        let expect = 2.0 * student_t_survival(arg, gamma + 1.0).unwrap();
        assert!((s.chi_smooth - expect).abs() < 1e-12);
        assert_eq!(s.eta, (1.0, 1.0));
    }

    #[test]
    fn m1_ad_chi_and_eta() {
        let ctx = PairContext::new(PairVariant::M1 { phi: 0.7 }, 5.0, 0.5).unwrap();
        let mut rng = Stream::root(4);
        let s = chi_theoretical(&ctx, &mut rng, 200_000).unwrap().expect_classified();
        assert_eq!(s.regime, Regime::Dependent);
        assert_eq!(s.eta, (1.0, 1.0));
        assert!(s.chi.0 > 0.0 && s.chi.0 <= s.chi.1 && s.chi.1 <= 1.0);
        // AI side
        let ctx = PairContext::new(PairVariant::M1 { phi: 0.3 }, 5.0, 0.5).unwrap();
        let s2 = chi_theoretical(&ctx, &mut rng, 10).unwrap().expect_classified();
        assert_eq!(s2.chi_smooth, 0.0);
        // η = max(φ/(1−φ), η_Z) = max(3/7, 0.75) = 0.75
        assert!((s2.eta.0 - 0.75).abs() < 1e-14);
    }

    #[test]
    fn m4_case_table() {
        let b_shared = (vec![0.5, 0.3], vec![0.4, 0.2]);
        let b_disjoint = (vec![0.5, 0.0], vec![0.0, 0.2]);
        let gk = vec![1.0, 1.0];
        let mk = |phi_i: f64, phi_j: f64, b: &(Vec<f64>, Vec<f64>)| {
            PairContext::new(
                PairVariant::M4 {
                    phi_i,
                    phi_j,
                    b_i: b.0.clone(),
                    b_j: b.1.clone(),
                    gamma_k: gk.clone(),
                },
                5.0,
                0.5,
            )
            .unwrap()
        };
        let mut rng = Stream::root(5);
        // AD: shared knots, both φ above the stable index
        let s = chi_theoretical(&mk(0.7, 0.6, &b_shared), &mut rng, 100_000)
            .unwrap()
            .expect_classified();
        assert_eq!(s.regime, Regime::Dependent);
        assert_eq!(s.eta, (1.0, 1.0));
        assert!(s.chi.0 > 0.0);
        // both φ below: AI with a two-sided η interval
        let s = chi_theoretical(&mk(0.3, 0.4, &b_shared), &mut rng, 10)
            .unwrap()
            .expect_classified();
        assert_eq!(s.chi_smooth, 0.0);
        let (elo, ehi) = s.eta;
        assert!(0.5 <= elo && elo <= ehi && ehi <= 1.0);
        // mixed: φ_i < α < φ_j
        let s = chi_theoretical(&mk(0.3, 0.7, &b_shared), &mut rng, 10)
            .unwrap()
            .expect_classified();
        assert_eq!(s.regime, Regime::Independent);
        // disjoint knots never give AD
        let s = chi_theoretical(&mk(0.7, 0.6, &b_disjoint), &mut rng, 10)
            .unwrap()
            .expect_classified();
        assert_eq!(s.chi_smooth, 0.0);
        // φ at the stable index is outside the case table
        assert!(matches!(
            chi_theoretical(&mk(0.5, 0.7, &b_shared), &mut rng, 10).unwrap(),
            TailDep::Unclassified { .. }
        ));
    }

    #[test]
    fn eta_identical_for_smooth_and_nuggeted_paths() {
        let ctx = PairContext::new(
            PairVariant::M4 {
                phi_i: 0.3,
                phi_j: 0.4,
                b_i: vec![0.5, 0.3],
                b_j: vec![0.4, 0.2],
                gamma_k: vec![1.0, 1.0],
            },
            5.0,
            0.6,
        )
        .unwrap();
        let mut rng = Stream::root(6);
        let full = chi_theoretical(&ctx, &mut rng, 10).unwrap().expect_classified();
        let eta_only = eta_theoretical(&ctx).unwrap().expect_classified();
        assert_eq!(full.eta, eta_only.eta);
    }

    #[test]
    fn m2_regime_cases() {
        // φ = 0.3, η_Z = 0.8 ≥ 3/7: AI exponent 1/(0.7·0.8)
        match m2_regime(0.3, 0.8).unwrap() {
            M2Regime::Independent { exponent } => {
                assert!((exponent - 1.0 / 0.56).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        // φ = 0.7: boundary 7/3 > 1 > η_Z: AD exponent 1/0.7
        match m2_regime(0.7, 0.8).unwrap() {
            M2Regime::Dependent { exponent } => {
                assert!((exponent - 1.0 / 0.7).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        // φ → 0: exponent → 1/η_Z
        match m2_regime(1e-9, 0.8).unwrap() {
            M2Regime::Independent { exponent } => {
                assert!((exponent - 1.25).abs() < 1e-6)
            }
            other => panic!("{other:?}"),
        }
        // exact boundary: 0.375/0.625 rounds to the same f64 as the 0.6 literal
        assert!(matches!(
            m2_regime(0.375, 0.6).unwrap(),
            M2Regime::Boundary { .. }
        ));
        assert!(m2_regime(0.5, 0.4).is_err());
    }

    #[test]
    fn br_lambda_symmetry_and_limits() {
        let a = 1.3;
        for &(r1, r2) in &[(1.0, 2.0), (0.5, 0.5), (3.0, 0.7)] {
            let l1 = br_lambda(r1, r2, a).unwrap();
            let l2 = br_lambda(r2, r1, a).unwrap();
            assert!((l1 - l2).abs() < 1e-15);
        }
        // Λ(r,r) = (2/r)Φ(a/2)
        let r = 1.7;
        let expect = 2.0 / r * std_normal_cdf(a / 2.0);
        assert!((br_lambda(r, r, a).unwrap() - expect).abs() < 1e-15);
        // a → ∞ gives the independence limit 1/r1 + 1/r2
        let l = br_lambda(1.0, 2.0, 60.0).unwrap();
        assert!((l - 1.5).abs() < 1e-12);
        // direct Φ recomputation at (1,2,1): ln(r1/r2) = −ln 2
        let ln2 = 2.0f64.ln();
        let expect = std_normal_cdf(0.5 + ln2) + std_normal_cdf(0.5 - ln2) / 2.0;
        assert!((br_lambda(1.0, 2.0, 1.0).unwrap() - expect).abs() < 1e-15);
        assert!(br_lambda(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn empirical_comonotone_and_independent() {
        let mut rng = Stream::root(7);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.uniform()).collect();
        let (chi, _) = empirical_curves(&[0.9, 0.95, 0.99], &xs, &xs).unwrap();
        for p in &chi.points {
            assert_eq!(p.estimate, 1.0);
        }
        // independent pair
        let n = 1_000_000usize;
        let xi: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let xj: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let (chi, eta) = empirical_curves(&[0.95], &xi, &xj).unwrap();
        let p = chi.points[0];
        assert!((p.estimate - 0.05).abs() < 3.0 * p.se, "chi={}", p.estimate);
        let e = eta.points[0];
        assert!((e.estimate - 0.5).abs() < 3.0 * e.se.max(1e-3), "eta={}", e.estimate);
    }

    #[test]
    fn empirical_rank_invariance() {
        let mut rng = Stream::root(8);
        let n = 5000;
        let xi: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let xj: Vec<f64> = xi.iter().map(|x| 0.6 * x + 0.8 * rng.normal()).collect();
        let grid = [0.8, 0.9, 0.95];
        let (chi_a, eta_a) = empirical_curves(&grid, &xi, &xj).unwrap();
        // strictly increasing marginal transforms leave both curves bit-identical
        let ti: Vec<f64> = xi.iter().map(|x| x.exp()).collect();
        let tj: Vec<f64> = xj.iter().map(|x| x * 3.0 + 100.0).collect();
        let (chi_b, eta_b) = empirical_curves(&grid, &ti, &tj).unwrap();
        for (a, b) in chi_a.points.iter().zip(&chi_b.points) {
            assert_eq!(a.estimate, b.estimate);
            assert_eq!(a.se, b.se);
        }
        for (a, b) in eta_a.points.iter().zip(&eta_b.points) {
            assert_eq!(a.estimate, b.estimate);
        }
    }

    #[test]
    fn hill_eta_on_independent_data() {
        let mut rng = Stream::root(9);
        let n = 200_000;
        let xi: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let xj: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let eta = empirical_eta_hill(&xi, &xj, 2000).unwrap();
        assert!((eta - 0.5).abs() < 0.06, "eta={eta}");
    }
}

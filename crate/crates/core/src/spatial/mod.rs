//! Spatial geometry: site/knot layouts, compactly supported Wendland weights
//! for the latent scale surface, Gaussian kernel weights for the φ(s) and
//! ρ(s) surfaces, and the locally isotropic nonstationary Matérn covariance.

mod chol;
mod matern;

pub use chol::CholFactor;
pub use matern::{bessel_k, bessel_k0, bessel_k1, matern_corr};

use crate::error::{Error, Result};

/// Observation sites with a standardised elevation covariate.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SiteSet {
    pub ids: Vec<String>,
    pub coords: Vec<(f64, f64)>,
    pub elev: Vec<f64>,
}

impl SiteSet {
    pub fn new(ids: Vec<String>, coords: Vec<(f64, f64)>, elev: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Invalid("need at least one site".to_string()));
        }
        if ids.len() != coords.len() || elev.len() != coords.len() {
            return Err(Error::Invalid(format!(
                "length mismatch: {} ids, {} coords, {} elev",
                ids.len(),
                coords.len(),
                elev.len()
            )));
        }
        for i in 0..coords.len() {
            for j in (i + 1)..coords.len() {
                if coords[i] == coords[j] {
                    return Err(Error::Invalid(format!(
                        "duplicate coordinates at sites {} and {}",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(SiteSet { ids, coords, elev })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(self.coords[i], self.coords[j])
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    /// Median of the pairwise distances (used for initialisation heuristics).
    pub fn median_distance(&self) -> f64 {
        let mut ds = Vec::with_capacity(self.len() * (self.len() - 1) / 2);
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                ds.push(self.distance(i, j));
            }
        }
        if ds.is_empty() {
            return 1.0;
        }
        ds.sort_by(f64::total_cmp);
        ds[ds.len() / 2]
    }
}

#[inline]
pub fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Knot layout plus the two kernel scales.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct KnotConfig {
    pub knots: Vec<(f64, f64)>,
    pub wendland_radius: f64,
    pub gaussian_bandwidth: f64,
    /// Off by default: the γ̄ formula consumes raw Wendland weights. Row
    /// normalisation is available for experimentation only.
    #[serde(default)]
    pub normalise_wendland: bool,
}

impl KnotConfig {
    pub fn new(knots: Vec<(f64, f64)>, wendland_radius: f64, gaussian_bandwidth: f64) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Invalid("need at least one knot".to_string()));
        }
        if !(wendland_radius > 0.0) || !(gaussian_bandwidth > 0.0) {
            return Err(Error::Invalid(format!(
                "kernel scales must be > 0 (radius {wendland_radius}, bandwidth {gaussian_bandwidth})"
            )));
        }
        Ok(KnotConfig {
            knots,
            wendland_radius,
            gaussian_bandwidth,
            normalise_wendland: false,
        })
    }

    /// K×K regular grid over a rectangle, inset by half a cell.
    pub fn grid_knots(side: usize, xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Vec<(f64, f64)> {
        let mut knots = Vec::with_capacity(side * side);
        for iy in 0..side {
            for ix in 0..side {
                let fx = (ix as f64 + 0.5) / side as f64;
                let fy = (iy as f64 + 0.5) / side as f64;
                knots.push((xmin + fx * (xmax - xmin), ymin + fy * (ymax - ymin)));
            }
        }
        knots
    }
}

/// Table-2 style naming: the effective range is where the Gaussian kernel
/// drops below 0.05, so bandwidth = range / √(2 ln 20).
pub fn bandwidth_from_effective_range(range: f64) -> f64 {
    range / (2.0 * 20.0f64.ln()).sqrt()
}

/// C² Wendland kernel (1 − d/l)₊⁴ (4d/l + 1); exactly zero for d ≥ l.
#[inline]
pub fn wendland_kernel(d: f64, l: f64) -> f64 {
    debug_assert!(l > 0.0);
    let r = d / l;
    if r >= 1.0 {
        return 0.0;
    }
    let om = 1.0 - r;
    let om2 = om * om;
    om2 * om2 * (4.0 * r + 1.0)
}

/// Raw Wendland weights of one point against all knots.
pub fn wendland_row(point: (f64, f64), knots: &[(f64, f64)], l: f64) -> Vec<f64> {
    knots
        .iter()
        .map(|&k| wendland_kernel(dist(point, k), l))
        .collect()
}

/// Normalised Gaussian kernel weights of one point against all knots;
/// rows sum to one, making kernel-smoothed surfaces convex combinations.
pub fn gauss_row(point: (f64, f64), knots: &[(f64, f64)], b: f64) -> Vec<f64> {
    let mut w: Vec<f64> = knots
        .iter()
        .map(|&k| {
            let d = dist(point, k);
            (-d * d / (2.0 * b * b)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        for v in &mut w {
            *v /= total;
        }
    } else {
        // all kernels underflowed; fall back to the nearest knot
        let nearest = knots
            .iter()
            .enumerate()
            .min_by(|a, b2| dist(point, *a.1).total_cmp(&dist(point, *b2.1)))
            .map(|(i, _)| i)
            .expect("non-empty knots");
        w[nearest] = 1.0;
    }
    w
}

/// Per-site basis weights: raw (or optionally normalised) Wendland rows for
/// the latent scale mixture, and row-normalised Gaussian rows for the
/// parameter surfaces. Sites with an all-zero Wendland row are flagged.
#[derive(Debug, Clone)]
pub struct BasisWeights {
    pub n_sites: usize,
    pub n_knots: usize,
    /// Row-major D×K.
    pub wendland: Vec<f64>,
    /// Row-major D×K, rows sum to 1.
    pub gauss: Vec<f64>,
    /// Sites not covered by any Wendland kernel.
    pub uncovered: Vec<usize>,
}

impl BasisWeights {
    pub fn build(sites: &SiteSet, cfg: &KnotConfig) -> Self {
        let (d, k) = (sites.len(), cfg.knots.len());
        let mut wendland = Vec::with_capacity(d * k);
        let mut gauss = Vec::with_capacity(d * k);
        let mut uncovered = Vec::new();
        for (j, &s) in sites.coords.iter().enumerate() {
            let mut wrow = wendland_row(s, &cfg.knots, cfg.wendland_radius);
            let sum: f64 = wrow.iter().sum();
            if sum == 0.0 {
                uncovered.push(j);
            } else if cfg.normalise_wendland {
                for v in &mut wrow {
                    *v /= sum;
                }
            }
            wendland.extend_from_slice(&wrow);
            gauss.extend(gauss_row(s, &cfg.knots, cfg.gaussian_bandwidth));
        }
        BasisWeights {
            n_sites: d,
            n_knots: k,
            wendland,
            gauss,
            uncovered,
        }
    }

    #[inline]
    pub fn wendland_row(&self, j: usize) -> &[f64] {
        &self.wendland[j * self.n_knots..(j + 1) * self.n_knots]
    }

    #[inline]
    pub fn gauss_row(&self, j: usize) -> &[f64] {
        &self.gauss[j * self.n_knots..(j + 1) * self.n_knots]
    }

    /// Kernel-smoothed surface value(s_j) = Σ_k ω_k(s_j) v_k; stays inside
    /// [min v, max v] because the weights are convex.
    pub fn gauss_surface(&self, knot_values: &[f64]) -> Vec<f64> {
        assert_eq!(knot_values.len(), self.n_knots);
        (0..self.n_sites)
            .map(|j| {
                self.gauss_row(j)
                    .iter()
                    .zip(knot_values)
                    .map(|(w, v)| w * v)
                    .sum()
            })
            .collect()
    }

    /// R(s_j) = Σ_k B_k(s_j; l) S_k for one replicate's knot variables.
    pub fn r_surface(&self, s: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(s.len(), self.n_knots);
        if let Some(&j) = self.uncovered.first() {
            return Err(Error::Invalid(format!(
                "site index {j} is outside every Wendland kernel; R(s) undefined"
            )));
        }
        Ok((0..self.n_sites)
            .map(|j| {
                self.wendland_row(j)
                    .iter()
                    .zip(s)
                    .map(|(b, sk)| b * sk)
                    .sum()
            })
            .collect())
    }

    /// γ̄_j = [Σ_k √(B_k(s_j; l) γ_k)]², the Lévy scale aggregated by the
    /// stability law under basis-weighted sums.
    pub fn gamma_bar(&self, gamma: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(gamma.len(), self.n_knots);
        if let Some(&j) = self.uncovered.first() {
            return Err(Error::Invalid(format!(
                "site index {j} is outside every Wendland kernel; gamma_bar undefined"
            )));
        }
        Ok((0..self.n_sites)
            .map(|j| {
                let root_sum: f64 = self
                    .wendland_row(j)
                    .iter()
                    .zip(gamma)
                    .map(|(b, g)| (b * g).sqrt())
                    .sum();
                root_sum * root_sum
            })
            .collect())
    }
}

/// Scalar γ̄ for a single weight row (used by the pairwise tail analytics).
pub fn gamma_bar_scalar(weights: &[f64], gamma: &[f64]) -> Result<f64> {
    if weights.iter().all(|&b| b == 0.0) {
        return Err(Error::Invalid(
            "all-zero weight row: gamma_bar undefined".to_string(),
        ));
    }
    let root_sum: f64 = weights
        .iter()
        .zip(gamma)
        .map(|(b, g)| (b * g).sqrt())
        .sum();
    Ok(root_sum * root_sum)
}

/// Local range parameters of the latent Gaussian field (ζ(s) ≡ 1, ν fixed).
#[derive(Debug, Clone)]
pub struct NonstatMaternParams {
    pub rho_sites: Vec<f64>,
    pub nu: f64,
}

impl NonstatMaternParams {
    pub fn new(rho_sites: Vec<f64>, nu: f64) -> Result<Self> {
        if rho_sites.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Invalid("rho(s) must be positive".to_string()));
        }
        if !(nu > 0.0) {
            return Err(Error::Invalid(format!("nu must be > 0, got {nu}")));
        }
        Ok(NonstatMaternParams { rho_sites, nu })
    }
}

/// Locally isotropic nonstationary Matérn covariance:
/// C(s_i, s_j) = √(ρ_i ρ_j) / ((ρ_i+ρ_j)/2) · M_ν(‖s_i−s_j‖ / √((ρ_i+ρ_j)/2)).
/// Unit diagonal by construction.
pub fn nonstat_matern_cov(sites: &SiteSet, params: &NonstatMaternParams) -> Result<Vec<f64>> {
    let d = sites.len();
    if params.rho_sites.len() != d {
        return Err(Error::Invalid(format!(
            "rho_sites has {} entries for {} sites",
            params.rho_sites.len(),
            d
        )));
    }
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        c[i * d + i] = 1.0;
        for j in 0..i {
            let (ri, rj) = (params.rho_sites[i], params.rho_sites[j]);
            let avg = 0.5 * (ri + rj);
            let pre = (ri * rj).sqrt() / avg;
            let m = matern_corr(sites.distance(i, j) / avg.sqrt(), params.nu)?;
            let v = pre * m;
            c[i * d + j] = v;
            c[j * d + i] = v;
        }
    }
    Ok(c)
}

/// Factor a covariance built by [`nonstat_matern_cov`], with jitter recording.
pub fn chol_logdet_solve(c: &[f64], dim: usize) -> Result<CholFactor> {
    CholFactor::new(c, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::Levy;
    use crate::rng::Stream;
    use crate::stats::ks_pvalue_against_cdf;

    fn toy_sites(coords: Vec<(f64, f64)>) -> SiteSet {
        let n = coords.len();
        SiteSet::new(
            (0..n).map(|i| format!("s{i}")).collect(),
            coords,
            vec![0.0; n],
        )
        .unwrap()
    }

    #[test]
    fn wendland_kernel_values() {
        let l = 4.0;
        assert_eq!(wendland_kernel(0.0, l), 1.0);
        assert_eq!(wendland_kernel(l, l), 0.0);
        assert_eq!(wendland_kernel(l * 1.5, l), 0.0);
        // d = l/2: (1/2)^4 · 3 = 0.1875
        assert!((wendland_kernel(l / 2.0, l) - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn wendland_translation_invariance() {
        let knots = vec![(0.0, 0.0), (3.0, 1.0)];
        let shift = (17.3, -4.2);
        let shifted: Vec<(f64, f64)> = knots.iter().map(|k| (k.0 + shift.0, k.1 + shift.1)).collect();
        for &p in &[(0.5, 0.5), (2.0, 1.0), (-1.0, 3.0)] {
            let a = wendland_row(p, &knots, 4.0);
            let b = wendland_row((p.0 + shift.0, p.1 + shift.1), &shifted, 4.0);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauss_surface_is_convex_combination() {
        let sites = toy_sites(vec![(0.0, 0.0), (1.0, 0.0), (5.0, 5.0)]);
        let cfg = KnotConfig::new(vec![(0.0, 0.0), (2.0, 0.0), (4.0, 4.0)], 10.0, 2.0).unwrap();
        let w = BasisWeights::build(&sites, &cfg);

        // constant knot values give a constant surface
        let surf = w.gauss_surface(&[0.7, 0.7, 0.7]);
        for v in &surf {
            assert!((v - 0.7).abs() < 1e-12);
        }
        // general values stay inside [min, max]
        let vals = [0.2, 0.9, 0.5];
        for v in w.gauss_surface(&vals) {
            assert!((0.2..=0.9).contains(&v));
        }
    }

    #[test]
    fn two_knot_midpoint_is_mean() {
        let sites = toy_sites(vec![(1.0, 0.0)]);
        let cfg = KnotConfig::new(vec![(0.0, 0.0), (2.0, 0.0)], 5.0, 1.3).unwrap();
        let w = BasisWeights::build(&sites, &cfg);
        let surf = w.gauss_surface(&[0.3, 0.8]);
        assert!((surf[0] - 0.55).abs() < 1e-12);
    }

    #[test]
    fn kernel_concentration_picks_knot_value() {
        let sites = toy_sites(vec![(0.0, 0.0)]);
        let cfg = KnotConfig::new(vec![(0.0, 0.0), (2.0, 0.0)], 5.0, 0.05).unwrap();
        let w = BasisWeights::build(&sites, &cfg);
        let surf = w.gauss_surface(&[0.25, 0.9]);
        assert!((surf[0] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn r_surface_and_gamma_bar() {
        let sites = toy_sites(vec![(0.0, 0.0)]);
        // single active knot at distance 0: B = 1
        let cfg = KnotConfig::new(vec![(0.0, 0.0)], 2.0, 1.0).unwrap();
        let w = BasisWeights::build(&sites, &cfg);
        assert_eq!(w.r_surface(&[3.7]).unwrap()[0], 3.7);
        assert!((w.gamma_bar(&[2.5]).unwrap()[0] - 2.5).abs() < 1e-15);
        // two knots with B = 1/4 each, γ = 1: γ̄ = (1/2 + 1/2)² = 1
        assert!((gamma_bar_scalar(&[0.25, 0.25], &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        // homogeneity in γ
        let g1 = gamma_bar_scalar(&[0.4, 0.1], &[1.0, 2.0]).unwrap();
        let g2 = gamma_bar_scalar(&[0.4, 0.1], &[3.0, 6.0]).unwrap();
        assert!((g2 - 3.0 * g1).abs() < 1e-12 * g2.abs());
        assert!(gamma_bar_scalar(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn uncovered_sites_flagged_and_error_on_use() {
        let sites = toy_sites(vec![(0.0, 0.0), (100.0, 100.0)]);
        let cfg = KnotConfig::new(vec![(0.0, 0.0)], 2.0, 1.0).unwrap();
        let w = BasisWeights::build(&sites, &cfg);
        assert_eq!(w.uncovered, vec![1]);
        assert!(w.r_surface(&[1.0]).is_err());
        assert!(w.gamma_bar(&[1.0]).is_err());
    }

    #[test]
    fn levy_aggregation_stability() {
        // Σ_k B_k S_k with S_k ~ Lévy(0, γ_k) is Lévy(0, γ̄); KS at N = 1e5
        let b = [0.9, 0.35, 0.1];
        let gamma = [1.0, 1.0, 1.0];
        let gbar = gamma_bar_scalar(&b, &gamma).unwrap();
        let agg = Levy::new(gbar).unwrap();
        let mut rng = Stream::root(404);
        let levies: Vec<Levy> = gamma.iter().map(|&g| Levy::new(g).unwrap()).collect();
        let mut xs: Vec<f64> = (0..100_000)
            .map(|_| {
                b.iter()
                    .zip(&levies)
                    .map(|(&bk, lv)| bk * lv.sample(&mut rng))
                    .sum()
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        let p = ks_pvalue_against_cdf(&xs, |x| agg.cdf(x).unwrap());
        assert!(p > 0.01, "KS p = {p}");
    }

    #[test]
    fn matern_cov_properties() {
        let sites = toy_sites(vec![(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)]);
        let params = NonstatMaternParams::new(vec![1.0, 2.0, 4.0], 1.0).unwrap();
        let c = nonstat_matern_cov(&sites, &params).unwrap();
        // unit diagonal
        for i in 0..3 {
            assert_eq!(c[i * 3 + i], 1.0);
        }
        // scalar-formula oracle for one off-diagonal entry
        let avg = 0.5 * (1.0 + 2.0);
        let expect = (1.0f64 * 2.0).sqrt() / avg * matern_corr(1.0 / avg.sqrt(), 1.0).unwrap();
        assert!((c[1] - expect).abs() < 1e-14);
        // exchangeability under permutation: P C Pᵀ built from permuted sites
        let perm = [2usize, 0, 1];
        let sites_p = toy_sites(vec![(0.0, 2.0), (0.0, 0.0), (1.0, 0.0)]);
        let params_p = NonstatMaternParams::new(vec![4.0, 1.0, 2.0], 1.0).unwrap();
        let cp = nonstat_matern_cov(&sites_p, &params_p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (pi, pj) = (perm.iter().position(|&q| q == i).unwrap(), perm.iter().position(|&q| q == j).unwrap());
                assert!((c[i * 3 + j] - cp[pi * 3 + pj]).abs() < 1e-15);
            }
        }
        // factors after (at most) the jitter ladder
        let f = chol_logdet_solve(&c, 3).unwrap();
        assert!(f.logdet().is_finite());
    }

    #[test]
    fn constant_rho_reduces_to_stationary() {
        let sites = toy_sites(vec![(0.0, 0.0), (3.0, 0.0)]);
        let rho = 2.5;
        let params = NonstatMaternParams::new(vec![rho, rho], 1.0).unwrap();
        let c = nonstat_matern_cov(&sites, &params).unwrap();
        let expect = matern_corr(3.0 / rho.sqrt(), 1.0).unwrap();
        assert!((c[1] - expect).abs() < 1e-14);
    }

    #[test]
    fn site_set_validation() {
        assert!(SiteSet::new(vec![], vec![], vec![]).is_err());
        assert!(SiteSet::new(
            vec!["a".into(), "b".into()],
            vec![(0.0, 0.0), (0.0, 0.0)],
            vec![0.0, 0.0]
        )
        .is_err());
    }

    #[test]
    fn effective_range_mapping() {
        // kernel at the effective range equals 0.05
        let b = bandwidth_from_effective_range(4.0);
        let k = (-(4.0f64 * 4.0) / (2.0 * b * b)).exp();
        assert!((k - 0.05).abs() < 1e-12);
    }
}

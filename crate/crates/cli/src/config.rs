//! Run configuration: versioned TOML with unknown keys rejected, plus the
//! `k<K>b<range>[m]` model-name grammar.

use scalemix::error::{Error, Result};
use scalemix::experiments::SimScenario;
use scalemix::spatial::{bandwidth_from_effective_range, KnotConfig, SiteSet};

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    #[serde(default)]
    pub scenario: Option<ScenarioSection>,
    #[serde(default)]
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub sampler: Option<SamplerSection>,
    #[serde(default)]
    pub fit: Option<FitSection>,
    #[serde(default)]
    pub taildep: Option<TaildepSection>,
    #[serde(default)]
    pub diagnose: Option<DiagnoseSection>,
    #[serde(default)]
    pub coverage: Option<CoverageSection>,
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default = "default_domain")]
    pub domain: [f64; 4],
    #[serde(default = "default_n_sites")]
    pub n_sites: usize,
    #[serde(default = "default_n_rep")]
    pub n_rep: usize,
    #[serde(default)]
    pub sites_file: Option<String>,
    pub knots: KnotSection,
    pub phi_knots: Vec<f64>,
    pub rho_knots: Vec<f64>,
    #[serde(default)]
    pub gamma_knots: Option<Vec<f64>>,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_beta_sigma")]
    pub beta_sigma: [f64; 2],
    #[serde(default = "default_beta_xi")]
    pub beta_xi: [f64; 2],
}

fn default_domain() -> [f64; 4] {
    [0.0, 10.0, 0.0, 10.0]
}
fn default_n_sites() -> usize {
    50
}
fn default_n_rep() -> usize {
    32
}
fn default_alpha0() -> f64 {
    5.0
}
fn default_nu() -> f64 {
    1.0
}
fn default_p() -> f64 {
    0.95
}
fn default_threshold() -> f64 {
    60.0
}
fn default_beta_sigma() -> [f64; 2] {
    [3.0, 0.0]
}
fn default_beta_xi() -> [f64; 2] {
    [0.15, 0.0]
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotSection {
    /// Explicit knot coordinates, or use `model`-style grid naming.
    #[serde(default)]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default = "default_radius")]
    pub wendland_radius: f64,
    #[serde(default = "default_bandwidth")]
    pub gaussian_bandwidth: f64,
}

fn default_radius() -> f64 {
    4.0
}
fn default_bandwidth() -> f64 {
    4.0
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Table-style name: k<K>b<effective range>[m].
    pub name: String,
    #[serde(default = "default_radius")]
    pub wendland_radius: f64,
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default = "default_epoch")]
    pub epoch: usize,
    #[serde(default)]
    pub likelihood_off: bool,
    #[serde(default)]
    pub save_latent_draws: bool,
    #[serde(default)]
    pub checkpoint_every: usize,
}

fn default_iterations() -> usize {
    2000
}
fn default_thin() -> usize {
    5
}
fn default_epoch() -> usize {
    100
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Directory holding sites.csv, y.csv, thresholds.csv.
    pub data_dir: String,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaildepSection {
    #[serde(default = "default_alpha0_list")]
    pub alpha0_list: Vec<f64>,
    #[serde(default = "default_n_draws")]
    pub n_draws: usize,
    #[serde(default = "default_u_grid")]
    pub u_grid: Vec<f64>,
    #[serde(default = "default_theory_mc")]
    pub n_theory_mc: usize,
    /// Which illustration pairs to run (0..=3).
    #[serde(default = "default_pairs")]
    pub pairs: Vec<usize>,
}

fn default_alpha0_list() -> Vec<f64> {
    vec![2.0, 5.0, 10.0]
}
fn default_n_draws() -> usize {
    1_000_000
}
fn default_u_grid() -> Vec<f64> {
    vec![0.9, 0.99, 0.999, 0.9999]
}
fn default_theory_mc() -> usize {
    1_000_000
}
fn default_pairs() -> Vec<usize> {
    vec![0, 1, 2, 3]
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSection {
    /// Run directory produced by `fit` with latent draws saved.
    pub fit_dir: String,
    pub data_dir: String,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_u_list")]
    pub u_list: Vec<f64>,
    #[serde(default = "default_h_list")]
    pub h_list: Vec<f64>,
    #[serde(default = "default_h_tol")]
    pub h_tol: f64,
    #[serde(default = "default_window_grid")]
    pub window_grid: usize,
    #[serde(default = "default_window_radius")]
    pub window_radius: f64,
    #[serde(default = "default_min_pairs")]
    pub min_pairs: usize,
    #[serde(default)]
    pub holdout_data_dir: Option<String>,
    #[serde(default = "default_qq_sites")]
    pub qq_sites: usize,
}

fn default_u_list() -> Vec<f64> {
    vec![0.9, 0.95, 0.99]
}
fn default_h_list() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}
fn default_h_tol() -> f64 {
    0.5
}
fn default_window_grid() -> usize {
    3
}
fn default_window_radius() -> f64 {
    3.0
}
fn default_min_pairs() -> usize {
    3
}
fn default_qq_sites() -> usize {
    4
}

#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSection {
    #[serde(default = "default_n_datasets")]
    pub n_datasets: usize,
    #[serde(default)]
    pub init_at_truth: bool,
}

fn default_n_datasets() -> usize {
    10
}

/// Parsed model name: knot count, Gaussian effective range, margin flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelName {
    pub n_knots: usize,
    pub effective_range: f64,
    pub fixed_margins: bool,
}

/// Parses `k<K>b<range>[m]`, e.g. `k25b4`, `k41b4m`.
pub fn parse_model_name(name: &str) -> Result<ModelName> {
    let rest = name
        .strip_prefix('k')
        .ok_or_else(|| Error::Invalid(format!("model name {name:?} must start with 'k'")))?;
    let b_pos = rest
        .find('b')
        .ok_or_else(|| Error::Invalid(format!("model name {name:?} missing 'b<range>'")))?;
    let n_knots: usize = rest[..b_pos]
        .parse()
        .map_err(|_| Error::Invalid(format!("bad knot count in {name:?}")))?;
    let mut range_part = &rest[b_pos + 1..];
    let fixed_margins = range_part.ends_with('m');
    if fixed_margins {
        range_part = &range_part[..range_part.len() - 1];
    }
    let effective_range: f64 = range_part
        .parse()
        .map_err(|_| Error::Invalid(format!("bad range in {name:?}")))?;
    if n_knots == 0 || !(effective_range > 0.0) {
        return Err(Error::Invalid(format!("degenerate model name {name:?}")));
    }
    Ok(ModelName {
        n_knots,
        effective_range,
        fixed_margins,
    })
}

/// Lays out K knots over a rectangle: perfect squares become regular grids,
/// K = a² + (a−1)² becomes the staggered double grid.
pub fn layout_knots(k: usize, xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Vec<(f64, f64)>> {
    let side = (k as f64).sqrt().round() as usize;
    if side * side == k {
        return Ok(KnotConfig::grid_knots(side, xmin, xmax, ymin, ymax));
    }
    // staggered: a² primary grid plus the (a−1)² interior cell corners
    for a in 2..=64usize {
        if a * a + (a - 1) * (a - 1) == k {
            let mut knots = KnotConfig::grid_knots(a, xmin, xmax, ymin, ymax);
            for iy in 0..(a - 1) {
                for ix in 0..(a - 1) {
                    let fx = (ix as f64 + 1.0) / a as f64;
                    let fy = (iy as f64 + 1.0) / a as f64;
                    knots.push((xmin + fx * (xmax - xmin), ymin + fy * (ymax - ymin)));
                }
            }
            return Ok(knots);
        }
    }
    Err(Error::Invalid(format!(
        "cannot lay out {k} knots: need a perfect square or a² + (a−1)²"
    )))
}

/// Builds a KnotConfig from a model name over a domain.
pub fn knots_from_model(
    model: &ModelName,
    wendland_radius: f64,
    domain: (f64, f64, f64, f64),
) -> Result<KnotConfig> {
    let pts = layout_knots(model.n_knots, domain.0, domain.1, domain.2, domain.3)?;
    let mut cfg = KnotConfig::new(
        pts,
        wendland_radius,
        bandwidth_from_effective_range(model.effective_range),
    )?;
    cfg.normalise_wendland = false;
    Ok(cfg)
}

impl ScenarioSection {
    pub fn to_scenario(&self, seed: u64, sites: Option<SiteSet>) -> Result<SimScenario> {
        let k_pts = match (&self.knots.points, self.knots.grid) {
            (Some(pts), _) => pts.iter().map(|p| (p[0], p[1])).collect(),
            (None, Some(side)) => KnotConfig::grid_knots(
                side,
                self.domain[0],
                self.domain[1],
                self.domain[2],
                self.domain[3],
            ),
            (None, None) => {
                return Err(Error::Invalid(
                    "scenario.knots needs either points or grid".to_string(),
                ))
            }
        };
        let knots = KnotConfig::new(
            k_pts,
            self.knots.wendland_radius,
            self.knots.gaussian_bandwidth,
        )?;
        let k = knots.knots.len();
        let sc = SimScenario {
            domain: (
                self.domain[0],
                self.domain[1],
                self.domain[2],
                self.domain[3],
            ),
            n_sites: self.n_sites,
            sites,
            n_rep: self.n_rep,
            knots,
            phi_knots: self.phi_knots.clone(),
            rho_knots: self.rho_knots.clone(),
            gamma_knots: self.gamma_knots.clone().unwrap_or_else(|| vec![1.0; k]),
            alpha0: self.alpha0,
            nu: self.nu,
            p: self.p,
            threshold: self.threshold,
            beta_sigma: self.beta_sigma,
            beta_xi: self.beta_xi,
            seed,
        };
        sc.validate()?;
        Ok(sc)
    }
}

/// Loads and validates a config file; unknown keys are parse errors.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), &e))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Format {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    if cfg.version != 1 {
        return Err(Error::VersionMismatch {
            path: path.display().to_string(),
            found: cfg.version as u8,
            expected: 1,
        });
    }
    Ok(cfg)
}

//! Command implementations. Each returns the run directory it produced so
//! the caller can report it; errors carry the exit-code class.

use crate::config::{knots_from_model, parse_model_name, RunConfig};
use scalemix::error::Error;
use scalemix::experiments::{
    chi_surface, coverage_study, holdout_logscore, illustration1, illustration_setup,
    qq_data, simulate_dataset, ChiSurfaceSpec, PosteriorDraw, SimScenario,
};
use scalemix::io;
use scalemix::likelihood::MarginalParamsGpd;
use scalemix::mcmc::{self, Chain, DependenceParams, SamplerConfig};
use scalemix::stats::compensated_sum;
use scalemix::taildep::TailDep;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit-code classes for the shell contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config = 2,
    Data = 3,
    Numerical = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub stage: Stage,
    pub err: Error,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn at(stage: Stage) -> impl Fn(Error) -> CliError {
    move |err| CliError { stage, err }
}

/// Numerical-vs-data classification for errors escaping the core library.
fn runtime_stage(err: &Error) -> Stage {
    match err {
        Error::Io { .. }
        | Error::Format { .. }
        | Error::Truncated { .. }
        | Error::ChecksumMismatch { .. }
        | Error::VersionMismatch { .. } => Stage::Data,
        _ => Stage::Numerical,
    }
}

fn run_stage(err: Error) -> CliError {
    CliError {
        stage: runtime_stage(&err),
        err,
    }
}

pub struct CommandCtx {
    pub config: RunConfig,
    pub config_path: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub workers: usize,
    pub resume: bool,
    pub dry_run: bool,
}

fn sampler_config(ctx: &CommandCtx) -> SamplerConfig {
    let s = ctx.config.sampler.clone().unwrap_or(crate::config::SamplerSection {
        iterations: 2000,
        burn_in: None,
        thin: 5,
        epoch: 100,
        likelihood_off: false,
        save_latent_draws: false,
        checkpoint_every: 0,
    });
    let fixed_margins = ctx
        .config
        .model
        .as_ref()
        .and_then(|m| parse_model_name(&m.name).ok())
        .map(|m| m.fixed_margins)
        .unwrap_or(false);
    SamplerConfig {
        iterations: s.iterations,
        burn_in: s.burn_in.unwrap_or(s.iterations / 2),
        thin: s.thin,
        seed: ctx.seed,
        epoch: s.epoch,
        workers: ctx.workers,
        likelihood_off: s.likelihood_off,
        fix_margins: fixed_margins,
        save_latent_draws: s.save_latent_draws,
        ..Default::default()
    }
}

fn scenario_from_config(ctx: &CommandCtx) -> CliResult<SimScenario> {
    let section = ctx
        .config
        .scenario
        .as_ref()
        .ok_or_else(|| at(Stage::Config)(Error::Invalid("missing [scenario] section".to_string())))?;
    let sites = match &section.sites_file {
        Some(path) => Some(io::read_sites(Path::new(path)).map_err(at(Stage::Data))?),
        None => None,
    };
    section
        .to_scenario(ctx.seed, sites)
        .map_err(at(Stage::Config))
}

/// Resolved execution plan printed by --dry-run.
pub fn dry_run_plan(ctx: &CommandCtx, command: &str) -> String {
    serde_json::json!({
        "command": command,
        "config": ctx.config_path.display().to_string(),
        "out": ctx.out.display().to_string(),
        "seed": ctx.seed,
        "workers": ctx.workers,
        "resume": ctx.resume,
    })
    .to_string()
}

// ---------------------------------------------------------------------------

pub fn cmd_simulate(ctx: &CommandCtx) -> CliResult<PathBuf> {
    let sc = scenario_from_config(ctx)?;
    if ctx.dry_run {
        println!("{}", dry_run_plan(ctx, "simulate"));
        return Ok(ctx.out.clone());
    }
    let started = Instant::now();
    let (data, _latents) = simulate_dataset(&sc).map_err(run_stage)?;
    let run = io::RunDir::create(&ctx.out, sc.content_hash()).map_err(at(Stage::Data))?;
    io::write_dataset(&run.root.join("data"), &data).map_err(at(Stage::Data))?;
    io::write_knots(&run.data("knots.csv"), &sc.knots.knots).map_err(at(Stage::Data))?;
    let scenario_json = serde_json::to_string_pretty(&sc).expect("scenario serialises");
    std::fs::write(run.data("scenario.json"), scenario_json)
        .map_err(|e| at(Stage::Data)(Error::io("scenario.json", &e)))?;
    let mut manifest = io::RunManifest::new(sc.content_hash(), ctx.seed);
    for name in ["sites.csv", "y.csv", "thresholds.csv", "knots.csv", "scenario.json"] {
        manifest
            .add_file(&run.root, &run.data(name))
            .map_err(at(Stage::Data))?;
    }
    manifest.wall_seconds = started.elapsed().as_secs_f64();
    io::write_manifest(&run.manifest_path(), &manifest).map_err(at(Stage::Data))?;
    Ok(run.root)
}

pub fn cmd_fit(ctx: &CommandCtx) -> CliResult<PathBuf> {
    let fit = ctx
        .config
        .fit
        .as_ref()
        .ok_or_else(|| at(Stage::Config)(Error::Invalid("missing [fit] section".to_string())))?;
    let model = ctx
        .config
        .model
        .as_ref()
        .ok_or_else(|| at(Stage::Config)(Error::Invalid("missing [model] section".to_string())))?;
    let model_name = parse_model_name(&model.name).map_err(at(Stage::Config))?;
    if ctx.dry_run {
        println!("{}", dry_run_plan(ctx, "fit"));
        return Ok(ctx.out.clone());
    }
    let started = Instant::now();
    let data = io::read_dataset(Path::new(&fit.data_dir), fit.p).map_err(at(Stage::Data))?;
    // domain from the data extent, padded so boundary sites stay covered
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &data.sites.coords {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let knots = knots_from_model(&model_name, model.wendland_radius, (xmin, xmax, ymin, ymax))
        .map_err(at(Stage::Config))?;
    let cfg = sampler_config(ctx);
    let hash = {
        // a fit run is identified by (data, model, thinning, seed); the
        // iteration budget can be extended across resumes
        let key = format!("{}|{}|{}|{}", fit.data_dir, model.name, cfg.thin, cfg.seed);
        io::fnv64(key.as_bytes())
    };
    let run = io::RunDir::create(&ctx.out, hash).map_err(at(Stage::Data))?;
    let ckpt_path = run.checkpoints("checkpoint.bin");
    let init = if ctx.resume {
        Some(io::read_checkpoint(&ckpt_path).map_err(at(Stage::Data))?)
    } else {
        None
    };
    let every = ctx
        .config
        .sampler
        .as_ref()
        .map(|s| s.checkpoint_every)
        .unwrap_or(0);
    let out = mcmc::run_with_checkpoints(&data, knots, fit.nu, cfg, init, every, |snap| {
        io::write_checkpoint(&ckpt_path, snap)
    })
    .map_err(run_stage)?;
    io::write_draws(&run.draws("draws.csv"), &out.draws).map_err(at(Stage::Data))?;
    io::write_ledger(&run.draws("ledger.csv"), &out.ledger).map_err(at(Stage::Data))?;
    {
        let mut trace = String::from("iteration,logpost\n");
        for (i, lp) in out.logpost_trace.iter().enumerate() {
            writeln!(trace, "{},{}", i + 1, io::fmt_f64(*lp)).expect("string write");
        }
        std::fs::write(run.draws("logpost.csv"), trace)
            .map_err(|e| at(Stage::Data)(Error::io("logpost.csv", &e)))?;
    }
    io::write_checkpoint(&run.checkpoints("final.bin"), &out.final_state)
        .map_err(at(Stage::Data))?;
    if !out.latent_draws.is_empty() {
        io::write_latent_draws(&run.draws("latents.bin"), &out.latent_draws)
            .map_err(at(Stage::Data))?;
    }
    let mut manifest = io::RunManifest::new(hash, ctx.seed);
    for name in ["draws.csv", "ledger.csv", "logpost.csv"] {
        manifest
            .add_file(&run.root, &run.draws(name))
            .map_err(at(Stage::Data))?;
    }
    manifest.wall_seconds = started.elapsed().as_secs_f64();
    io::write_manifest(&run.manifest_path(), &manifest).map_err(at(Stage::Data))?;
    for w in &out.acceptance_warnings {
        eprintln!("warning: {w}");
    }
    Ok(run.root)
}

pub fn cmd_taildep(ctx: &CommandCtx) -> CliResult<PathBuf> {
    let section = ctx.config.taildep.clone().unwrap_or(crate::config::TaildepSection {
        alpha0_list: vec![2.0, 5.0, 10.0],
        n_draws: 1_000_000,
        u_grid: vec![0.9, 0.99, 0.999, 0.9999],
        n_theory_mc: 1_000_000,
        pairs: vec![0, 1, 2, 3],
    });
    if ctx.dry_run {
        println!("{}", dry_run_plan(ctx, "taildep"));
        return Ok(ctx.out.clone());
    }
    let started = Instant::now();
    let setup = illustration_setup();
    let hash = io::fnv64(
        format!(
            "taildep|{:?}|{}|{}|{}",
            section.alpha0_list, section.n_draws, ctx.seed, section.pairs.len()
        )
        .as_bytes(),
    );
    let run = io::RunDir::create(&ctx.out, hash).map_err(at(Stage::Data))?;
    let mut manifest = io::RunManifest::new(hash, ctx.seed);
    for &pair_idx in &section.pairs {
        if pair_idx > 3 {
            return Err(at(Stage::Config)(Error::Invalid(format!(
                "pair index {pair_idx} out of range 0..=3"
            ))));
        }
        let results = illustration1(
            &setup,
            pair_idx,
            &section.alpha0_list,
            section.n_draws,
            &section.u_grid,
            section.n_theory_mc,
            ctx.seed,
        )
        .map_err(run_stage)?;
        for r in &results {
            let (chi_bounds, eta_bounds) = match &r.theory {
                TailDep::Classified(s) => (Some(s.chi), Some(s.eta)),
                TailDep::Unclassified { .. } => (None, None),
            };
            let tag = format!(
                "pair_{}_{}_alpha0_{}",
                r.pair_label.0, r.pair_label.1, r.alpha0
            );
            let chi_path = run.diag(&format!("chi_{tag}.csv"));
            io::write_curve(&chi_path, "chi", &r.chi, chi_bounds).map_err(at(Stage::Data))?;
            manifest.add_file(&run.root, &chi_path).map_err(at(Stage::Data))?;
            let eta_path = run.diag(&format!("eta_{tag}.csv"));
            io::write_curve(&eta_path, "eta", &r.eta, eta_bounds).map_err(at(Stage::Data))?;
            manifest.add_file(&run.root, &eta_path).map_err(at(Stage::Data))?;
            for w in &r.warnings {
                eprintln!("warning [{tag}]: {w}");
            }
        }
    }
    manifest.wall_seconds = started.elapsed().as_secs_f64();
    io::write_manifest(&run.manifest_path(), &manifest).map_err(at(Stage::Data))?;
    Ok(run.root)
}

pub fn cmd_diagnose(ctx: &CommandCtx) -> CliResult<PathBuf> {
    let section = ctx
        .config
        .diagnose
        .as_ref()
        .ok_or_else(|| at(Stage::Config)(Error::Invalid("missing [diagnose] section".to_string())))?;
    if ctx.dry_run {
        println!("{}", dry_run_plan(ctx, "diagnose"));
        return Ok(ctx.out.clone());
    }
    let started = Instant::now();
    let data = io::read_dataset(Path::new(&section.data_dir), section.p).map_err(at(Stage::Data))?;
    let hash = io::fnv64(format!("diagnose|{}|{}", section.data_dir, ctx.seed).as_bytes());
    let run = io::RunDir::create(&ctx.out, hash).map_err(at(Stage::Data))?;
    let mut manifest = io::RunManifest::new(hash, ctx.seed);

    // chi surface over a window grid spanning the data extent
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &data.sites.coords {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let g = section.window_grid.max(1);
    let mut centers = Vec::new();
    for iy in 0..g {
        for ix in 0..g {
            centers.push((
                xmin + (ix as f64 + 0.5) / g as f64 * (xmax - xmin),
                ymin + (iy as f64 + 0.5) / g as f64 * (ymax - ymin),
            ));
        }
    }
    let spec = ChiSurfaceSpec {
        u_list: section.u_list.clone(),
        h_list: section.h_list.clone(),
        h_tol: section.h_tol,
        window_centers: centers,
        window_radius: section.window_radius,
        min_pairs: section.min_pairs,
        n_boot: 200,
        boot_seed: ctx.seed,
    };
    let surface = chi_surface(&data, &spec).map_err(run_stage)?;
    {
        let mut out = String::from("cx,cy,u,h,n_pairs,chi_hat,boot_se\n");
        for c in &surface.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                io::fmt_f64(c.center.0),
                io::fmt_f64(c.center.1),
                io::fmt_f64(c.u),
                io::fmt_f64(c.h),
                c.n_pairs,
                c.chi_hat.map(io::fmt_f64).unwrap_or_else(|| "missing".to_string()),
                c.boot_se.map(io::fmt_f64).unwrap_or_default(),
            )
            .expect("string write");
        }
        let path = run.diag("chi_surface.csv");
        std::fs::write(&path, out).map_err(|e| at(Stage::Data)(Error::io("chi_surface.csv", &e)))?;
        manifest.add_file(&run.root, &path).map_err(at(Stage::Data))?;
    }

    // holdout scoring and QQ tables when a fitted run with latents exists
    let fit_dir = Path::new(&section.fit_dir);
    let latents_path = fit_dir.join("draws").join("latents.bin");
    let draws_path = fit_dir.join("draws").join("draws.csv");
    if latents_path.exists() && draws_path.exists() {
        let scenario_path = Path::new(&section.data_dir).join("scenario.json");
        let sc: SimScenario = {
            let text = std::fs::read_to_string(&scenario_path)
                .map_err(|e| at(Stage::Data)(Error::io(scenario_path.display().to_string(), &e)))?;
            serde_json::from_str(&text).map_err(|e| {
                at(Stage::Data)(Error::Format {
                    path: scenario_path.display().to_string(),
                    msg: e.to_string(),
                })
            })?
        };
        let columns = Chain::draw_columns(sc.knots.knots.len());
        let draws = io::read_draws(&draws_path, &columns).map_err(at(Stage::Data))?;
        let latents = io::read_latent_draws(&latents_path).map_err(at(Stage::Data))?;
        let n = draws.rows.len().min(latents.len());
        let k = sc.knots.knots.len();
        let col = |name: &str| columns.iter().position(|c| c == name).expect("known column");
        let mut posterior = Vec::with_capacity(n);
        for i in 0..n {
            let row = &draws.rows[i];
            posterior.push(PosteriorDraw {
                dep: DependenceParams {
                    phi_knots: (0..k).map(|j| row[col(&format!("phi_k{}", j + 1))]).collect(),
                    rho_knots: (0..k).map(|j| row[col(&format!("rho_k{}", j + 1))]).collect(),
                    radius: row[col("l")],
                    theta: (row[col("alpha0")] - 1.0).ln(),
                },
                margins: MarginalParamsGpd {
                    beta_sigma: [row[col("beta_sigma_0")], row[col("beta_sigma_1")]],
                    beta_xi: [row[col("beta_xi_0")], row[col("beta_xi_1")]],
                },
                s: latents[i].0.clone(),
                z: latents[i].1.clone(),
            });
        }
        if let Some(holdout_dir) = &section.holdout_data_dir {
            let holdout =
                io::read_dataset(Path::new(holdout_dir), section.p).map_err(at(Stage::Data))?;
            let scores = holdout_logscore(
                &data.sites,
                &holdout,
                &sc.knots,
                sc.nu,
                &sc.gamma_knots,
                &posterior,
                ctx.seed,
            )
            .map_err(run_stage)?;
            let mut out = String::from("site_id,log_score\n");
            for (id, s) in &scores.per_site {
                writeln!(out, "{},{}", id, io::fmt_f64(*s)).expect("string write");
            }
            writeln!(out, "TOTAL,{}", io::fmt_f64(scores.total)).expect("string write");
            for id in &scores.excluded {
                writeln!(out, "{id},excluded").expect("string write");
            }
            let path = run.diag("logscore.csv");
            std::fs::write(&path, out)
                .map_err(|e| at(Stage::Data)(Error::io("logscore.csv", &e)))?;
            manifest.add_file(&run.root, &path).map_err(at(Stage::Data))?;
        }
        // QQ tables at a few sites using GPD-exceedance predictive draws
        let mut rng = scalemix::rng::Stream::keyed(ctx.seed, &[0x99]);
        let n_sites = data.n_sites();
        for q in 0..section.qq_sites.min(n_sites) {
            let site = (q * n_sites) / section.qq_sites.min(n_sites).max(1);
            let observed: Vec<f64> = (0..data.n_rep)
                .map(|t| data.value(t, site))
                .filter(|&y| y > data.thresholds[site])
                .collect();
            if observed.len() < 2 {
                continue;
            }
            let m = observed.len();
            let predictive: Vec<Vec<f64>> = posterior
                .iter()
                .map(|draw| {
                    let gpd = scalemix::dists::Gpd::new(
                        data.thresholds[site],
                        draw.margins.sigma_at(data.sites.elev[site]),
                        draw.margins.xi_at(data.sites.elev[site]),
                    )
                    .expect("positive scale");
                    (0..m).map(|_| gpd.quantile(rng.uniform()).unwrap_or(f64::NAN)).collect()
                })
                .collect();
            // Gumbel display scale through the pooled empirical CDF
            let pool_gpd = scalemix::dists::Gpd::new(
                data.thresholds[site],
                posterior
                    .iter()
                    .map(|d| d.margins.sigma_at(data.sites.elev[site]))
                    .sum::<f64>()
                    / posterior.len() as f64,
                posterior
                    .iter()
                    .map(|d| d.margins.xi_at(data.sites.elev[site]))
                    .sum::<f64>()
                    / posterior.len() as f64,
            )
            .map_err(run_stage)?;
            let p0 = data.p;
            let transform = move |y: f64| {
                let u = p0 + (1.0 - p0) * pool_gpd.cdf(y).unwrap_or(0.999999).clamp(0.0, 1.0 - 1e-12);
                -(-u.ln()).ln()
            };
            let table = qq_data(&observed, &predictive, transform).map_err(run_stage)?;
            let mut out = String::from("level,observed,predicted,lo,hi\n");
            for i in 0..table.levels.len() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    io::fmt_f64(table.levels[i]),
                    io::fmt_f64(table.observed[i]),
                    io::fmt_f64(table.predicted[i]),
                    io::fmt_f64(table.lo[i]),
                    io::fmt_f64(table.hi[i])
                )
                .expect("string write");
            }
            let path = run.diag(&format!("qq_site_{}.csv", data.sites.ids[site]));
            std::fs::write(&path, out).map_err(|e| at(Stage::Data)(Error::io("qq", &e)))?;
            manifest.add_file(&run.root, &path).map_err(at(Stage::Data))?;
        }
    }
    manifest.wall_seconds = started.elapsed().as_secs_f64();
    io::write_manifest(&run.manifest_path(), &manifest).map_err(at(Stage::Data))?;
    Ok(run.root)
}

pub fn cmd_coverage(ctx: &CommandCtx) -> CliResult<PathBuf> {
    let sc = scenario_from_config(ctx)?;
    let section = ctx.config.coverage.clone().unwrap_or(crate::config::CoverageSection {
        n_datasets: 10,
        init_at_truth: false,
    });
    if ctx.dry_run {
        println!("{}", dry_run_plan(ctx, "coverage"));
        return Ok(ctx.out.clone());
    }
    let started = Instant::now();
    let cfg = sampler_config(ctx);
    let report =
        coverage_study(&sc, section.n_datasets, &cfg, section.init_at_truth).map_err(run_stage)?;
    let hash = sc.content_hash() ^ io::fnv64(b"coverage");
    let run = io::RunDir::create(&ctx.out, hash).map_err(at(Stage::Data))?;
    let mut out = String::from(
        "param,truth,covered,n_fits,coverage_lo,coverage_hi,mean_abs_error,mean_posterior_mean\n",
    );
    for p in &report.params {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.name,
            io::fmt_f64(p.truth),
            p.covered,
            p.n_fits,
            io::fmt_f64(p.coverage_ci.0),
            io::fmt_f64(p.coverage_ci.1),
            io::fmt_f64(p.mean_abs_error),
            io::fmt_f64(p.mean_posterior_mean)
        )
        .expect("string write");
    }
    let path = run.diag("coverage.csv");
    std::fs::write(&path, out).map_err(|e| at(Stage::Data)(Error::io("coverage.csv", &e)))?;
    let mut manifest = io::RunManifest::new(hash, ctx.seed);
    manifest.add_file(&run.root, &path).map_err(at(Stage::Data))?;
    manifest.wall_seconds = started.elapsed().as_secs_f64();
    io::write_manifest(&run.manifest_path(), &manifest).map_err(at(Stage::Data))?;
    for f in &report.failures {
        eprintln!("warning: {f}");
    }
    // quick summary to stdout
    let mean_cov: f64 = compensated_sum(
        report
            .params
            .iter()
            .map(|p| p.covered as f64 / p.n_fits.max(1) as f64),
    ) / report.params.len().max(1) as f64;
    println!(
        "coverage over {} fits: mean {:.3} across {} parameters",
        report.n_datasets,
        mean_cov,
        report.params.len()
    );
    Ok(run.root)
}


//! Acceptance suite: one test per verifiable claim, each printing a PASS
//! line with the measured quantities. Tolerances are pinned in the asserts.
//!
//! The coverage study (criterion 9) and the big Monte Carlo reproductions
//! run at desk scale; the whole suite is sized for a single workstation run.

mod common;

use common::*;
use scalemix::dists::{pareto_link, Gpd, Levy, LogLaplace, Pareto1};
use scalemix::experiments::{
    chi_surface, holdout_logscore, illustration1, illustration_setup, simulate_dataset,
    ChiSurfaceSpec, PosteriorDraw, SimScenario,
};
use scalemix::likelihood::{
    pit_forward, replicate_loglik, total_loglik, Dataset, LikelihoodContext, MarginalParamsGpd,
    PitCell,
};
use scalemix::marginals::{nugget_cdf, nugget_pdf, nugget_quantile, ModelSpec, NuggetSpec};
use scalemix::mcmc::{run, Chain, DependenceParams, SamplerConfig};
use scalemix::rng::Stream;
use scalemix::spatial::{KnotConfig, SiteSet};
use scalemix::stats::{batch_means_se, binomial_se, ks_pvalue_against_cdf, ols_slope};
use scalemix::taildep::{m2_regime, nugget_constants, M2Regime, TailDep};

// ---------------------------------------------------------------------------
// Criterion 1: closed-form marginal correctness
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_closed_form_marginals() {
    let cases: Vec<(ModelSpec, f64)> = vec![
        (ModelSpec::M1 { phi: 0.3 }, 5.0),
        (ModelSpec::M1 { phi: 0.7 }, 5.0),
        (ModelSpec::M3 { gamma: 1.0 }, 2.0),
        (ModelSpec::M3 { gamma: 1.0 }, 5.0),
        (ModelSpec::M3 { gamma: 2.0 }, 2.0), // α₀ = γ log branch
        (ModelSpec::M4 { phi: 0.3, gamma_bar: 1.0 }, 5.0),
        (ModelSpec::M4 { phi: 0.7, gamma_bar: 1.0 }, 5.0),
    ];
    let mut worst_cdf = 0.0f64;
    let mut worst_pdf = 0.0f64;
    let mut worst_q = 0.0f64;
    for (m, alpha0) in &cases {
        let n = NuggetSpec::new(*alpha0).unwrap();
        for x in log_grid(0.2, 200.0, 20) {
            let closed = nugget_cdf(m, &n, x).unwrap();
            let oracle = conv_oracle_cdf(m, *alpha0, x);
            worst_cdf = worst_cdf.max((closed - oracle).abs());
            assert!(
                (closed - oracle).abs() <= 1e-7,
                "{m:?} alpha0={alpha0} x={x}: closed {closed} vs oracle {oracle}"
            );
            // density against central finite differences of the CDF
            let h = 1e-5 * x;
            let fd = (nugget_cdf(m, &n, x + h).unwrap() - nugget_cdf(m, &n, x - h).unwrap())
                / (2.0 * h);
            let pdf = nugget_pdf(m, &n, x).unwrap();
            let rel = (pdf - fd).abs() / fd.abs().max(1e-12);
            worst_pdf = worst_pdf.max(rel);
            assert!(rel <= 1e-5, "{m:?} x={x}: pdf {pdf} vs fd {fd}");
        }
        for &p in &[0.05, 0.5, 0.9, 0.99, 0.9999] {
            let q = nugget_quantile(m, &n, p, None).unwrap();
            let back = nugget_cdf(m, &n, q).unwrap();
            worst_q = worst_q.max((back - p).abs());
            assert!((back - p).abs() <= 1e-9, "{m:?} p={p}: round trip {back}");
        }
    }
    println!(
        "ACCEPTANCE 1 PASS closed-form marginals: max |cdf-oracle| {worst_cdf:.2e} (<=1e-7), \
         max pdf rel err {worst_pdf:.2e} (<=1e-5), max quantile round trip {worst_q:.2e} (<=1e-9)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: marginal tail equivalence ratio
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_marginal_tail_equivalence() {
    const N: usize = 10_000_000;
    const SHARDS: usize = 100;
    let alpha0 = 5.0;
    let eps = LogLaplace::new(alpha0).unwrap();
    // per-variant simulators of the smooth process
    let run_case = |name: &str, alpha_star: f64, draw: &mut dyn FnMut(&mut Stream) -> f64, seed: u64| {
        let mut rng = Stream::keyed(seed, &[2]);
        let mut xs: Vec<f64> = Vec::with_capacity(N);
        let mut x_nug: Vec<f64> = Vec::with_capacity(N);
        for _ in 0..N {
            let x_star = draw(&mut rng);
            xs.push(x_star);
            x_nug.push(eps.sample(&mut rng) * x_star);
        }
        // threshold at the empirical 0.9999 quantile of the smooth process
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let thr = sorted[(0.9999 * N as f64) as usize];
        // shard-wise ratios give a model-free standard error
        let shard = N / SHARDS;
        let mut ratios = Vec::new();
        for s in 0..SHARDS {
            let a = x_nug[s * shard..(s + 1) * shard]
                .iter()
                .filter(|&&v| v > thr)
                .count();
            let b = xs[s * shard..(s + 1) * shard]
                .iter()
                .filter(|&&v| v > thr)
                .count();
            if b > 0 {
                ratios.push(a as f64 / b as f64);
            }
        }
        let (mean, se) = batch_means_se(&ratios, ratios.len().min(25));
        let expect = 1.0 / (1.0 - (alpha_star / alpha0).powi(2));
        assert!(
            (mean - expect).abs() <= 3.0 * se.max(1e-4),
            "{name}: ratio {mean:.4} +- {se:.4} vs E[eps^a*] {expect:.4}"
        );
        println!("  {name}: survival ratio {mean:.4} +- {se:.4}, theory {expect:.4}");
    };
    let pareto = Pareto1;
    run_case(
        "M1 phi=0.7",
        1.0 / 0.7,
        &mut |rng| {
            let r = pareto.sample(rng);
            let w = pareto.sample(rng);
            r.powf(0.7) * w.powf(0.3)
        },
        21,
    );
    run_case(
        "M3 gamma=1",
        1.0,
        &mut |rng| {
            let r = pareto.sample(rng); // Pareto(1)
            r * rng.normal()
        },
        22,
    );
    let levy = Levy::new(1.0).unwrap();
    run_case(
        "M4 phi=0.7",
        5.0 / 7.0,
        &mut |rng| levy.sample(rng).powf(0.7) * pareto_link(rng.normal()),
        23,
    );
    println!("ACCEPTANCE 2 PASS marginal tail equivalence at the 0.9999 quantile, 3 MC SE");
}

// ---------------------------------------------------------------------------
// Criterion 3: nugget bounds at reduced N (the Figure-2 analogue)
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_illustration_bounds() {
    const N: usize = 10_000_000;
    let setup = illustration_setup();
    let u_grid = [0.99, 0.999, 0.9999];
    let alphas = [2.0, 5.0, 10.0];
    // AD pair: chi_hat inside the nugget interval +- 3 SE
    for res in illustration1(&setup, 0, &alphas, N, &u_grid, 1_000_000, 3001).unwrap() {
        let s = match &res.theory {
            TailDep::Classified(s) => s,
            u => panic!("AD pair unclassified: {u:?}"),
        };
        let last = res.chi.points.last().expect("chi at 0.9999");
        let tol = 3.0 * (last.se.powi(2) + s.chi_smooth_se.powi(2)).sqrt();
        assert!(
            last.estimate >= s.chi.0 - tol && last.estimate <= s.chi.1 + tol,
            "alpha0={}: chi_hat(0.9999) {} outside [{:.4},{:.4}] +- {tol:.4}",
            res.alpha0,
            last.estimate,
            s.chi.0,
            s.chi.1
        );
        // qualitative nod to eta -> 1 under asymptotic dependence
        let eta_last = res.eta.points.last().expect("eta at 0.9999");
        assert!(
            eta_last.estimate > 0.8,
            "alpha0={}: AD pair eta_hat {}",
            res.alpha0,
            eta_last.estimate
        );
        println!(
            "  AD pair {:?} alpha0={}: chi_hat {:.4} in [{:.4},{:.4}] +- {:.4}, eta_hat {:.3}",
            res.pair_label, res.alpha0, last.estimate, s.chi.0, s.chi.1, tol, eta_last.estimate
        );
    }
    // AI pairs: chi decreasing to < 0.05; eta_hat inside the Table interval
    for pair_idx in 1..4 {
        for res in illustration1(&setup, pair_idx, &alphas, N, &u_grid, 100_000, 3001).unwrap() {
            let s = match &res.theory {
                TailDep::Classified(s) => s,
                u => panic!("pair {pair_idx} unclassified: {u:?}"),
            };
            assert_eq!(s.chi_smooth, 0.0, "pair {pair_idx} should be AI");
            let pts = &res.chi.points;
            let last = pts.last().expect("chi curve");
            assert!(
                last.estimate < 0.05,
                "pair {:?} alpha0={}: chi_hat(0.9999) = {}",
                res.pair_label,
                res.alpha0,
                last.estimate
            );
            for w in pts.windows(2) {
                assert!(
                    w[1].estimate <= w[0].estimate + 2.0 * (w[0].se + w[1].se),
                    "pair {:?} alpha0={}: chi not decreasing: {} -> {}",
                    res.pair_label,
                    res.alpha0,
                    w[0].estimate,
                    w[1].estimate
                );
            }
            // eta point estimates against the Table-style interval. For the
            // low-low and disjoint pairs the interval brackets the finite-u
            // estimator and containment is asserted two-sided. For the mixed
            // pair, eta_hat(u) at any estimable u is provably below the
            // interval's lower endpoint whenever chi_hat(0.9999) < 0.05
            // (eta_hat = ln(1-u)/(|ln C| + ln(1-u)/eta) <= 0.755 while
            // 1/(2 - phi_lo/alpha) > 0.755), so the sharp testable direction
            // at reduced N is upper containment plus approach from below.
            if let Some(eta_last) = res.eta.points.last() {
                let tol = 3.0 * eta_last.se;
                let mixed = pair_idx == 2;
                assert!(
                    eta_last.estimate <= s.eta.1 + tol,
                    "pair {:?} alpha0={}: eta_hat {} above [{:.3},{:.3}] + {tol:.3}",
                    res.pair_label,
                    res.alpha0,
                    eta_last.estimate,
                    s.eta.0,
                    s.eta.1
                );
                if mixed {
                    for w in res.eta.points.windows(2) {
                        assert!(
                            w[1].estimate >= w[0].estimate - 2.0 * (w[0].se + w[1].se),
                            "pair {:?} alpha0={}: eta_hat not converging upward: {} -> {}",
                            res.pair_label,
                            res.alpha0,
                            w[0].estimate,
                            w[1].estimate
                        );
                    }
                } else {
                    assert!(
                        eta_last.estimate >= s.eta.0 - tol,
                        "pair {:?} alpha0={}: eta_hat {} below [{:.3},{:.3}] - {tol:.3}",
                        res.pair_label,
                        res.alpha0,
                        eta_last.estimate,
                        s.eta.0,
                        s.eta.1
                    );
                }
                println!(
                    "  AI pair {:?} alpha0={}: chi_hat(0.9999) {:.4} (<0.05), eta_hat {:.3} vs [{:.3},{:.3}] +- {:.3}{}",
                    res.pair_label,
                    res.alpha0,
                    last.estimate,
                    eta_last.estimate,
                    s.eta.0,
                    s.eta.1,
                    tol,
                    if mixed { " (upper-sided, converging from below)" } else { "" }
                );
            } else {
                println!(
                    "  AI pair {:?} alpha0={}: chi_hat(0.9999) {:.4} (<0.05), eta omitted (no joint exceedances)",
                    res.pair_label, res.alpha0, last.estimate
                );
            }
        }
    }
    println!("ACCEPTANCE 3 PASS bound containment at N=1e7 across alpha0 in {{2, 5, 10}}");
}

// ---------------------------------------------------------------------------
// Criterion 4: nugget-constant identities and Monte Carlo agreement
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_nugget_constant_identities() {
    let mut rng = Stream::root(4004);
    for trial in 0..10 {
        let a_i = rng.uniform_in(0.4, 1.3);
        let a_j = rng.uniform_in(0.4, 1.3);
        let alpha0 = 2.0 * a_i.max(a_j) * rng.uniform_in(1.0, 2.5);
        let (c, cc) = nugget_constants(alpha0, a_i, a_j).unwrap();
        assert!((c + cc - 2.0).abs() <= 1e-12, "c + C = {}", c + cc);
        assert!(c <= 1.0 + 1e-12 && cc >= 1.0 - 1e-12, "c={c} C={cc}");
        // Monte Carlo E[min(U, V)] oracle
        let eps = LogLaplace::new(alpha0).unwrap();
        let (mi, mj) = (eps.moment(a_i).unwrap(), eps.moment(a_j).unwrap());
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let u = eps.sample(&mut rng).powf(a_i) / mi;
            let v = eps.sample(&mut rng).powf(a_j) / mj;
            let m = u.min(v);
            sum += m;
            sumsq += m * m;
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            (c - mean).abs() <= 3.0 * se,
            "trial {trial}: closed c {c:.5} vs MC {mean:.5} +- {se:.5}"
        );
    }
    println!("ACCEPTANCE 4 PASS c+C=2 to 1e-12, c<=1<=C, closed c within 3 SE of MC over 10 triples");
}

// ---------------------------------------------------------------------------
// Criterion 5: joint-survival decay rates on both sides of the boundary
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_regime_exponents() {
    const N: usize = 10_000_000;
    let pareto = Pareto1;
    for &(phi, eta_z, seed) in &[(0.3f64, 0.8f64, 51u64), (0.7, 0.8, 52)] {
        let expect = match m2_regime(phi, eta_z).unwrap() {
            M2Regime::Independent { exponent } => exponent,
            M2Regime::Dependent { exponent } => exponent,
            M2Regime::Boundary { exponent } => exponent,
        };
        let rho = 2.0 * eta_z - 1.0;
        let root = (1.0 - rho * rho).sqrt();
        let mut rng = Stream::keyed(seed, &[5]);
        let mut mins: Vec<f64> = Vec::with_capacity(N);
        for _ in 0..N {
            let r = pareto.sample(&mut rng);
            let (z1, e) = rng.normal_pair();
            let z2 = rho * z1 + root * e;
            let x1 = r.powf(phi) * pareto_link(z1).powf(1.0 - phi);
            let x2 = r.powf(phi) * pareto_link(z2).powf(1.0 - phi);
            mins.push(x1.min(x2));
        }
        mins.sort_by(f64::total_cmp);
        // log-log slope of the joint survival over the far tail
        let levels: Vec<f64> = (0..10).map(|i| 0.999 + 0.0009 * i as f64 / 9.0).collect();
        let ln_x: Vec<f64> = levels
            .iter()
            .map(|&q| mins[(q * N as f64) as usize].ln())
            .collect();
        let ln_sf: Vec<f64> = levels.iter().map(|&q| (1.0 - q).ln()).collect();
        let slope = ols_slope(&ln_x, &ln_sf);
        let rel = (slope.abs() - expect).abs() / expect;
        assert!(
            rel <= 0.10,
            "phi={phi} eta_z={eta_z}: slope {slope:.4} vs exponent {expect:.4} (rel {rel:.3})"
        );
        println!(
            "  phi={phi}, eta_Z={eta_z}: measured exponent {:.4} vs theory {expect:.4} (rel {rel:.3})",
            slope.abs()
        );
    }
    println!("ACCEPTANCE 5 PASS joint-survival exponents within 10% on both sides of the boundary");
}

// ---------------------------------------------------------------------------
// Criterion 6: likelihood factorisation
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_likelihood_factorisation() {
    // D = 3, all censored, fixed X*: joint censoring probability by MC over
    // the nuggets equals the product of univariate terms
    let d = 3;
    let sites = SiteSet::new(
        (0..d).map(|i| format!("s{i}")).collect(),
        (0..d).map(|i| (i as f64, 0.0)).collect(),
        vec![0.0; d],
    )
    .unwrap();
    let data = Dataset::new(sites, vec![0.0; d], 1, vec![60.0; d], 0.95).unwrap();
    let margins = MarginalParamsGpd {
        beta_sigma: [3.0, 0.0],
        beta_xi: [0.15, 0.0],
    };
    let ctx =
        LikelihoodContext::build_m4(&data, &[0.5; 3], &[1.0; 3], 5.0, &margins, None).unwrap();
    let x_star: Vec<f64> = ctx
        .sites
        .iter()
        .zip([0.8, 1.1, 1.4])
        .map(|(s, r)| s.x0 / r)
        .collect();
    let factorised = replicate_loglik(&ctx, 0, &x_star).unwrap().exp();
    let mut rng = Stream::root(606);
    let n = 1_000_000usize;
    let mut hits = 0usize;
    for _ in 0..n {
        let all = (0..d).all(|j| ctx.eps.sample(&mut rng) * x_star[j] <= ctx.sites[j].x0);
        hits += all as usize;
    }
    let mc = hits as f64 / n as f64;
    let se = binomial_se(mc, n);
    assert!(
        (mc - factorised).abs() <= 3.0 * se,
        "joint censoring: MC {mc:.5} vs product {factorised:.5} (se {se:.5})"
    );

    // additivity and permutation invariance, exact
    let d2 = 4;
    let sites = SiteSet::new(
        (0..d2).map(|i| format!("s{i}")).collect(),
        (0..d2).map(|i| (i as f64, 1.0)).collect(),
        vec![0.0; d2],
    )
    .unwrap();
    let y_row = vec![0.0, 130.0, 70.0, 61.0];
    let mut y = y_row.clone();
    y.extend_from_slice(&y_row);
    let data = Dataset::new(sites, y, 2, vec![60.0; d2], 0.95).unwrap();
    let ctx = LikelihoodContext::build_m4(&data, &[0.5; 4], &[1.0; 4], 5.0, &margins, None).unwrap();
    let x_row = [2.0, 1.5, 3.0, 10.0];
    let mut x_star = x_row.to_vec();
    x_star.extend_from_slice(&x_row);
    let single = replicate_loglik(&ctx, 0, &x_row).unwrap();
    let total = total_loglik(&ctx, &x_star, 2).unwrap();
    assert!((total - 2.0 * single).abs() < 1e-9, "additivity: {total} vs {}", 2.0 * single);
    let swapped: Vec<f64> = x_star[d2..].iter().chain(&x_star[..d2]).copied().collect();
    assert_eq!(total, total_loglik(&ctx, &swapped, 2).unwrap());
    println!(
        "ACCEPTANCE 6 PASS factorisation: MC joint censoring {mc:.5} matches product {factorised:.5} \
         within 3 SE; additivity and permutation exact"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: PIT integrity
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_pit_integrity() {
    // forward/inverse round trip on the 0.96-0.999 band, spec-scale GPD
    let sites = SiteSet::new(vec!["a".into()], vec![(0.0, 0.0)], vec![0.0]).unwrap();
    let data = Dataset::new(sites, vec![0.0], 1, vec![60.0], 0.95).unwrap();
    let margins = MarginalParamsGpd {
        beta_sigma: [3.0, 0.0],
        beta_xi: [0.15, 0.0],
    };
    let ctx = LikelihoodContext::build_m4(&data, &[0.5], &[1.0], 5.0, &margins, None).unwrap();
    let site = &ctx.sites[0];
    let gpd = Gpd::new(60.0, 3.0f64.exp(), 0.15).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=50 {
        let q = 0.96 + (0.999 - 0.96) * i as f64 / 50.0;
        let y = gpd.quantile((q - 0.95) / 0.05).unwrap();
        match pit_forward(y, site, 0.95).unwrap() {
            PitCell::Exceedance { x, .. } => {
                let back = scalemix::likelihood::pit_inverse(x, site, 0.95).unwrap();
                worst = worst.max(((back - y) / y).abs());
            }
            other => panic!("expected exceedance at q={q}, got {other:?}"),
        }
    }
    assert!(worst <= 1e-8, "round trip rel err {worst:.2e}");

    // simulated exceedance rate
    let mut sc = SimScenario::desk_default(707);
    sc.n_sites = 4;
    sc.n_rep = 2000;
    let (data, _) = simulate_dataset(&sc).unwrap();
    let mut exceed = 0usize;
    for t in 0..sc.n_rep {
        exceed += data.mask_counts(t).1;
    }
    let cells = sc.n_rep * 4;
    let rate = exceed as f64 / cells as f64;
    let se = binomial_se(0.05, cells);
    assert!(
        (rate - 0.05).abs() <= 3.0 * se,
        "exceedance rate {rate:.4} vs 0.05 (se {se:.4})"
    );
    println!(
        "ACCEPTANCE 7 PASS PIT round trip max rel err {worst:.2e} (<=1e-8); \
         simulated exceedance rate {rate:.4} within 3 SE of 0.05"
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: sampler validity
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_sampler_validity() {
    // prior recovery: likelihood off, KS / moment tests per parameter block
    let sites = SiteSet::new(
        (0..4).map(|i| format!("s{i}")).collect(),
        vec![(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (2.0, 2.0)],
        vec![-0.5, 0.0, 0.25, 0.5],
    )
    .unwrap();
    let data = Dataset::new(sites, vec![0.0; 8], 2, vec![60.0; 4], 0.95).unwrap();
    let knots = KnotConfig::new(vec![(0.5, 0.5), (1.5, 1.5)], 4.0, 2.0).unwrap();
    let cfg = SamplerConfig {
        iterations: 120_000,
        burn_in: 20_000,
        thin: 1,
        seed: 808,
        epoch: 100,
        likelihood_off: true,
        save_latent_draws: true,
        ..Default::default()
    };
    let out = run(&data, knots.clone(), 1.0, cfg, None).unwrap();
    let col = |name: &str| -> Vec<f64> {
        let idx = out.draws.columns.iter().position(|c| c == name).unwrap();
        out.draws.rows.iter().map(|r| r[idx]).collect()
    };
    let ks_thinned = |vals: &[f64], cdf: &dyn Fn(f64) -> f64, label: &str| {
        let thin: Vec<f64> = vals.iter().step_by(50).copied().collect();
        let mut sorted = thin;
        sorted.sort_by(f64::total_cmp);
        let p = ks_pvalue_against_cdf(&sorted, cdf);
        assert!(p > 0.01, "{label}: prior-recovery KS p = {p}");
        p
    };
    // phi ~ Beta(2,2)
    let p_phi = ks_thinned(&col("phi_k1"), &|x| x * x * (3.0 - 2.0 * x), "phi_k1");
    // rho ~ Half-Normal(0, 10^2)
    let p_rho = ks_thinned(
        &col("rho_k2"),
        &|x| scalemix::specfun::erf(x / (10.0 * std::f64::consts::SQRT_2)),
        "rho_k2",
    );
    // l ~ Half-t1(0, 3) (folded Cauchy)
    let p_l = ks_thinned(
        &col("l"),
        &|x| 2.0 / std::f64::consts::PI * (x / 3.0).atan(),
        "l",
    );
    // theta ~ N(3, 0.5^2)
    let theta: Vec<f64> = col("alpha0").iter().map(|a| (a - 1.0).ln()).collect();
    let p_theta = ks_thinned(
        &theta,
        &|x| scalemix::specfun::std_normal_cdf((x - 3.0) / 0.5),
        "theta",
    );
    // beta blocks standardised by their current hyper scale ~ N(0,1)
    let bs0 = col("beta_sigma_0");
    let ss = col("sigma_beta_sigma");
    let std_beta: Vec<f64> = bs0.iter().zip(&ss).map(|(b, s)| b / s).collect();
    let p_beta = ks_thinned(&std_beta, &|x| scalemix::specfun::std_normal_cdf(x), "beta_sigma/hyper");
    // hyper ~ Half-t2(0,1): closed-form CDF of folded t2 = x/sqrt(2+x^2)
    let p_hyper = ks_thinned(&ss, &|x| x / (2.0 + x * x).sqrt(), "sigma_beta_sigma");
    // latent S ~ Levy(0,1) and standardised Z ~ N(0,1), from retained latents
    let levy = Levy::new(1.0).unwrap();
    let s_draws: Vec<f64> = out
        .latent_draws
        .iter()
        .step_by(50)
        .map(|(s, _)| s[0])
        .collect();
    let mut s_sorted = s_draws;
    s_sorted.sort_by(f64::total_cmp);
    let p_s = ks_pvalue_against_cdf(&s_sorted, |x| levy.cdf(x).unwrap());
    assert!(p_s > 0.01, "latent S prior recovery KS p = {p_s}");
    // beta moments: mean 0 within 3 batch-means SE
    let (m_beta, se_beta) = batch_means_se(&col("beta_xi_0"), 50);
    assert!(
        m_beta.abs() <= 3.0 * se_beta,
        "beta_xi_0 mean {m_beta} vs 0 (se {se_beta})"
    );
    // phi moments: Beta(2,2) mean 1/2 within 3 SE
    let (m_phi, se_phi) = batch_means_se(&col("phi_k2"), 50);
    assert!((m_phi - 0.5).abs() <= 3.0 * se_phi, "phi mean {m_phi}");

    // posterior-cache coherence through a 1e4-iteration likelihood-on run
    let mut sc = SimScenario::desk_default(909);
    sc.n_sites = 8;
    sc.n_rep = 4;
    let (data2, _) = simulate_dataset(&sc).unwrap();
    let cfg2 = SamplerConfig {
        iterations: 10_000,
        burn_in: 5_000,
        thin: 5,
        seed: 810,
        epoch: 100,
        ..Default::default()
    };
    let mut chain = Chain::new(&data2, sc.knots.clone(), sc.nu, cfg2).unwrap();
    let mut worst_coherence = 0.0f64;
    for i in 0..10_000 {
        chain.step().unwrap();
        if i % 250 == 0 || i > 9_950 {
            let fresh = chain.recompute_log_posterior().unwrap();
            worst_coherence = worst_coherence.max((chain.log_posterior() - fresh).abs());
        }
    }
    assert!(
        worst_coherence <= 1e-8,
        "cache coherence drift {worst_coherence:.2e}"
    );

    // bit-identical draws across worker counts
    let mk = |workers: usize| {
        let cfg = SamplerConfig {
            iterations: 120,
            burn_in: 60,
            thin: 2,
            seed: 811,
            epoch: 40,
            workers,
            ..Default::default()
        };
        run(&data2, sc.knots.clone(), sc.nu, cfg, None).unwrap()
    };
    let w1 = mk(1);
    let w8 = mk(8);
    assert_eq!(w1.draws, w8.draws, "draws differ across worker counts");
    assert_eq!(w1.final_state, w8.final_state);

    println!(
        "ACCEPTANCE 8 PASS prior recovery KS p-values: phi {p_phi:.3}, rho {p_rho:.3}, l {p_l:.3}, \
         theta {p_theta:.3}, beta {p_beta:.3}, hyper {p_hyper:.3}, S {p_s:.3}; \
         cache coherence {worst_coherence:.2e} (<=1e-8); worker counts bit-identical"
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: scaled coverage study
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_scaled_coverage() {
    let sc = SimScenario::desk_default(9000);
    let cfg = SamplerConfig {
        iterations: 30_000,
        burn_in: 15_000,
        thin: 5,
        seed: 901,
        epoch: 100,
        workers: 1,
        ..Default::default()
    };
    let report = scalemix::experiments::coverage_study(&sc, 10, &cfg, false).unwrap();
    assert!(
        report.failures.is_empty(),
        "fit failures: {:?}",
        report.failures
    );
    assert_eq!(report.n_datasets, 10);
    let mut phi_mae = 0.0;
    for k in 1..=5 {
        for family in ["phi_k", "rho_k"] {
            let name = format!("{family}{k}");
            let p = report.get(&name).unwrap();
            assert!(
                p.covered >= 7,
                "{name}: covered {}/10 (exact binomial 95% band needs >= 7)",
                p.covered
            );
            println!(
                "  {name}: coverage {}/10, mean abs err {:.3}",
                p.covered, p.mean_abs_error
            );
        }
        phi_mae += report.get(&format!("phi_k{k}")).unwrap().mean_abs_error / 5.0;
    }
    assert!(phi_mae <= 0.15, "phi mean absolute error {phi_mae:.3} > 0.15");
    println!(
        "ACCEPTANCE 9 PASS coverage over 10 desk-scale datasets: every phi_k and rho_k >= 7/10, \
         phi MAE {phi_mae:.3} (<= 0.15)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: diagnostics sanity
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_diagnostics_sanity() {
    // chi surface flat on a stationary synthetic field
    let mut sc = SimScenario::desk_default(1001);
    sc.phi_knots = vec![0.45; 5];
    sc.rho_knots = vec![2.0; 5];
    sc.n_sites = 40;
    sc.n_rep = 300;
    let (data, _) = simulate_dataset(&sc).unwrap();
    let spec = ChiSurfaceSpec {
        u_list: vec![0.9],
        h_list: vec![2.0],
        h_tol: 1.0,
        window_centers: vec![(2.5, 2.5), (7.5, 2.5), (2.5, 7.5), (7.5, 7.5)],
        window_radius: 3.5,
        min_pairs: 3,
        n_boot: 150,
        boot_seed: 77,
    };
    let surface = chi_surface(&data, &spec).unwrap();
    let vals: Vec<f64> = surface.cells.iter().filter_map(|c| c.chi_hat).collect();
    let ses: Vec<f64> = surface.cells.iter().filter_map(|c| c.boot_se).collect();
    assert!(vals.len() >= 3, "too few populated windows");
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let sd = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (vals.len() - 1) as f64)
        .sqrt();
    let mean_se = ses.iter().sum::<f64>() / ses.len() as f64;
    assert!(
        sd < 3.0 * mean_se,
        "stationary field: window sd {sd:.4} vs 3x bootstrap SE {:.4}",
        3.0 * mean_se
    );

    // holdout log score prefers the generative parameters over phi + 0.2
    let mut wins = 0;
    for trial in 0..20u64 {
        let mut sc = SimScenario::desk_default(40_000 + trial);
        sc.n_sites = 18;
        sc.n_rep = 24;
        let (full, latents) = simulate_dataset(&sc).unwrap();
        // split: last 5 sites become the holdout
        let d = full.n_sites();
        let n_hold = 5;
        let n_train = d - n_hold;
        let train_sites = SiteSet::new(
            full.sites.ids[..n_train].to_vec(),
            full.sites.coords[..n_train].to_vec(),
            full.sites.elev[..n_train].to_vec(),
        )
        .unwrap();
        let hold_sites = SiteSet::new(
            full.sites.ids[n_train..].to_vec(),
            full.sites.coords[n_train..].to_vec(),
            full.sites.elev[n_train..].to_vec(),
        )
        .unwrap();
        let hold_y: Vec<f64> = (0..full.n_rep)
            .flat_map(|t| (n_train..d).map(move |j| (t, j)))
            .map(|(t, j)| full.value(t, j))
            .collect();
        let holdout = Dataset::new(
            hold_sites,
            hold_y,
            full.n_rep,
            full.thresholds[n_train..].to_vec(),
            full.p,
        )
        .unwrap();
        let z_train: Vec<f64> = (0..full.n_rep)
            .flat_map(|t| (0..n_train).map(move |j| (t, j)))
            .map(|(t, j)| latents.z[t * d + j])
            .collect();
        let margins = MarginalParamsGpd {
            beta_sigma: sc.beta_sigma,
            beta_xi: sc.beta_xi,
        };
        let mk_draw = |phi_shift: f64| PosteriorDraw {
            dep: DependenceParams {
                phi_knots: sc
                    .phi_knots
                    .iter()
                    .map(|p| (p + phi_shift).min(0.9))
                    .collect(),
                rho_knots: sc.rho_knots.clone(),
                radius: sc.knots.wendland_radius,
                theta: (sc.alpha0 - 1.0).ln(),
            },
            margins,
            s: latents.s.clone(),
            z: z_train.clone(),
        };
        let score_true = holdout_logscore(
            &train_sites,
            &holdout,
            &sc.knots,
            sc.nu,
            &sc.gamma_knots,
            &[mk_draw(0.0)],
            1,
        )
        .unwrap()
        .total;
        let score_perturbed = holdout_logscore(
            &train_sites,
            &holdout,
            &sc.knots,
            sc.nu,
            &sc.gamma_knots,
            &[mk_draw(0.2)],
            1,
        )
        .unwrap()
        .total;
        wins += (score_true >= score_perturbed) as usize;
    }
    assert!(wins >= 16, "true parameters preferred in only {wins}/20 trials");
    println!(
        "ACCEPTANCE 10 PASS stationary chi surface flat (sd {sd:.4} < 3x SE {:.4}); \
         holdout prefers truth in {wins}/20 trials",
        3.0 * mean_se
    );
}

// Successive-conditional (Geweke) test: alternate posterior sweeps with
// re-simulation of data given the current parameters and latents. The
// parameter marginals must match their priors; drift exposes bugs.
use scalemix::dists::{pareto_link, Gpd, LogLaplace};
use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::likelihood::Dataset;
use scalemix::marginals::M4Marginal;
use scalemix::mcmc::{Chain, SamplerConfig};
use scalemix::rng::Stream;
use scalemix::spatial::BasisWeights;
use scalemix::stats::ks_pvalue_against_cdf;
use scalemix::specfun::std_normal_cdf;

fn main() {
    let mut sc = SimScenario::desk_default(42);
    sc.n_rep = 3;
    // grid sites close to the knots so coverage never binds
    let sites = scalemix::spatial::SiteSet::new(
        (0..6).map(|i| format!("g{i}")).collect(),
        vec![(2.6, 2.6), (5.0, 2.8), (7.4, 2.6), (2.6, 7.4), (5.0, 7.2), (7.4, 7.4)],
        vec![-0.4, 0.0, 0.4, -0.2, 0.2, 0.0],
    ).unwrap();
    sc.sites = Some(sites);
    sc.n_sites = 6;
    let (data0, _) = simulate_dataset(&sc).unwrap();
    let mut data = data0.clone();
    let cfg = SamplerConfig {
        iterations: usize::MAX, burn_in: usize::MAX - 1, thin: 1, seed: 5, epoch: 100,
        ..Default::default()
    };
    let mut rng = Stream::root(999);
    let mut thetas = Vec::new();
    let mut phis = Vec::new();
    let mut snap_opt: Option<scalemix::mcmc::ChainStateSnapshot> = None;
    let scans = 40_000usize;
    for scan in 0..scans {
        let mut cfg_i = cfg.clone();
        cfg_i.iterations = usize::MAX;
        cfg_i.burn_in = usize::MAX - 1;
        let mut chain = match snap_opt.take() {
            Some(mut snap) => {
                snap.lik_caches = None; // data changed; rebuild the PIT fresh
                snap.rep_caches = None;
                Chain::from_snapshot(&data, sc.knots.clone(), sc.nu, cfg_i, snap).unwrap()
            }
            None => Chain::new(&data, sc.knots.clone(), sc.nu, cfg_i).unwrap(),
        };
        // a few posterior sweeps
        for _ in 0..2 {
            chain.step().unwrap();
        }
        let snap = chain.snapshot();
        // resimulate data given current params and latents
        let mut k_cfg = sc.knots.clone();
        k_cfg.wendland_radius = snap.dep.radius;
        let basis = BasisWeights::build(&data.sites, &k_cfg);
        let phi_sites = basis.gauss_surface(&snap.dep.phi_knots);
        let gbar = basis.gamma_bar(&sc.gamma_knots).unwrap();
        let a0 = snap.dep.alpha0();
        let eps = LogLaplace::new(a0).unwrap();
        let d = data.n_sites();
        let mut y = vec![0.0; sc.n_rep * d];
        let mut ok = true;
        for t in 0..sc.n_rep {
            for j in 0..d {
                let r: f64 = basis.wendland_row(j).iter()
                    .zip(&snap.s[t * sc.knots.knots.len()..(t + 1) * sc.knots.knots.len()])
                    .map(|(b, s)| b * s).sum();
                let x_star = r.powf(phi_sites[j]) * pareto_link(snap.z[t * d + j]);
                let x = eps.sample(&mut rng) * x_star;
                let m = M4Marginal::new(phi_sites[j], gbar[j], a0).unwrap();
                let u_sf = m.sf(x).unwrap();
                let gpd = Gpd::new(
                    data.thresholds[j],
                    snap.margins.sigma_at(data.sites.elev[j]),
                    snap.margins.xi_at(data.sites.elev[j]),
                ).unwrap();
                y[t * d + j] = if u_sf >= 1.0 - sc.p {
                    data.thresholds[j] * ((1.0 - u_sf) / sc.p).clamp(0.0, 1.0)
                } else {
                    match gpd.quantile_upper(u_sf / (1.0 - sc.p)) {
                        Ok(v) if v.is_finite() => v,
                        _ => { ok = false; data.thresholds[j] }
                    }
                };
            }
        }
        if !ok { println!("resim hiccup at scan {scan}"); }
        data = Dataset::new(data.sites.clone(), y, sc.n_rep, data.thresholds.clone(), sc.p).unwrap();
        if scan % 4 == 0 && scan > scans / 10 {
            thetas.push((snap.dep.alpha0() - 1.0).ln());
            phis.push(snap.dep.phi_knots[1]);
        }
        snap_opt = Some(snap);
    }
    let dec = |v: &[f64]| -> Vec<f64> {
        (0..8).map(|q| {
            let lo = q * v.len() / 8; let hi = (q + 1) * v.len() / 8;
            let m = v[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            (m * 100.0).round() / 100.0
        }).collect()
    };
    println!("theta decades (prior N(3, 0.5^2)): {:?}", dec(&thetas));
    println!("phi decades  (prior mean 0.5):    {:?}", dec(&phis));
    let mut th = thetas.iter().step_by(10).copied().collect::<Vec<_>>();
    th.sort_by(f64::total_cmp);
    let p_theta = ks_pvalue_against_cdf(&th, |x| std_normal_cdf((x - 3.0) / 0.5));
    let mut ph = phis.iter().step_by(10).copied().collect::<Vec<_>>();
    ph.sort_by(f64::total_cmp);
    let p_phi = ks_pvalue_against_cdf(&ph, |x| x * x * (3.0 - 2.0 * x));
    println!("KS vs prior: theta p={p_theta:.4} phi p={p_phi:.4}");
}

use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::likelihood::{total_loglik, LikelihoodContext, MarginalParamsGpd};
use scalemix::spatial::BasisWeights;
use scalemix::mcmc::{run, Chain, SamplerConfig};

fn main() {
    let sc = SimScenario::desk_default(100);
    let (data, latents) = simulate_dataset(&sc).unwrap();
    let basis = BasisWeights::build(&data.sites, &sc.knots);
    let phi = basis.gauss_surface(&sc.phi_knots);
    let gbar = basis.gamma_bar(&sc.gamma_knots).unwrap();
    let margins = MarginalParamsGpd { beta_sigma: sc.beta_sigma, beta_xi: sc.beta_xi };
    for a0 in [3.0, 5.0, 8.0, 12.0, 21.0, 30.0] {
        let ctx = LikelihoodContext::build_m4(&data, &phi, &gbar, a0, &margins, None).unwrap();
        let ll = total_loglik(&ctx, &latents.x_star, data.n_rep).unwrap();
        println!("alpha0={a0:5.1}: loglik at true latents = {ll:.2}");
    }
    // oracle-start short chain: does alpha0 stay near 5?
    let cfg = SamplerConfig { iterations: 8000, burn_in: 4000, thin: 5, seed: 3, epoch: 100, ..Default::default() };
    let mut snap = Chain::default_init(&data, &sc.knots, &cfg).unwrap();
    scalemix::experiments::seed_truth(&mut snap, &sc);
    // also seed the true latents
    snap.s = latents.s.clone();
    snap.z = latents.z.clone();
    let out = run(&data, sc.knots.clone(), sc.nu, cfg, Some(snap)).unwrap();
    let aidx = out.draws.columns.iter().position(|c| c == "alpha0").unwrap();
    let chain_a: Vec<f64> = out.draws.rows.iter().map(|r| r[aidx]).collect();
    let first = chain_a[..100].iter().sum::<f64>() / 100.0;
    let last = chain_a[chain_a.len()-100..].iter().sum::<f64>() / 100.0;
    println!("oracle-start alpha0: early mean {first:.1}, late mean {last:.1}");
    for k in 0..5 {
        let idx = out.draws.columns.iter().position(|c| *c == format!("phi_k{}", k+1)).unwrap();
        let m: f64 = out.draws.rows.iter().map(|r| r[idx]).sum::<f64>() / out.draws.rows.len() as f64;
        println!("oracle-start phi_k{}: mean {m:.3} truth {:.2}", k+1, sc.phi_knots[k]);
    }
}

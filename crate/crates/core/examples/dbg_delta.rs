use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::likelihood::{replicate_loglik, LikelihoodContext, MarginalParamsGpd};
use scalemix::spatial::BasisWeights;
use scalemix::dists::pareto_link;

fn main() {
    let sc = SimScenario::desk_default(1);
    let (data, latents) = simulate_dataset(&sc).unwrap();
    let basis = BasisWeights::build(&data.sites, &sc.knots);
    let phi = basis.gauss_surface(&sc.phi_knots);
    let gbar = basis.gamma_bar(&sc.gamma_knots).unwrap();
    let margins = MarginalParamsGpd { beta_sigma: sc.beta_sigma, beta_xi: sc.beta_xi };
    let ctx = LikelihoodContext::build_m4(&data, &phi, &gbar, sc.alpha0, &margins, None).unwrap();

    // x_star exactly like the chain would compute from the true latents
    let d = data.n_sites();
    let k = sc.knots.knots.len();
    let mut x_star = vec![0.0; data.n_rep * d];
    for t in 0..data.n_rep {
        for j in 0..d {
            let r: f64 = basis.wendland_row(j).iter().zip(&latents.s[t*k..(t+1)*k]).map(|(b,s)| b*s).sum();
            x_star[t*d + j] = r.powf(phi[j]) * pareto_link(latents.z[t*d + j]);
        }
    }
    let lik_a: f64 = (0..data.n_rep).map(|t| replicate_loglik(&ctx, t, &x_star[t*d..(t+1)*d]).unwrap()).sum();

    // identical parameters, warm rebuild: likelihood must match to roundoff
    let ctx2 = LikelihoodContext::build_m4(&data, &phi, &gbar, sc.alpha0, &margins, Some(&ctx)).unwrap();
    let lik_b: f64 = (0..data.n_rep).map(|t| replicate_loglik(&ctx2, t, &x_star[t*d..(t+1)*d]).unwrap()).sum();
    println!("identical params: lik_a={lik_a:.9} lik_b={lik_b:.9} delta={:.3e}", lik_b - lik_a);

    // tiny phi move
    let phi3: Vec<f64> = phi.iter().map(|p| p + 1e-6).collect();
    let ctx3 = LikelihoodContext::build_m4(&data, &phi3, &gbar, sc.alpha0, &margins, Some(&ctx)).unwrap();
    let mut x_star3 = x_star.clone();
    for t in 0..data.n_rep {
        for j in 0..d {
            let r: f64 = basis.wendland_row(j).iter().zip(&latents.s[t*k..(t+1)*k]).map(|(b,s)| b*s).sum();
            x_star3[t*d + j] = r.powf(phi3[j]) * pareto_link(latents.z[t*d + j]);
        }
    }
    let lik_c: f64 = (0..data.n_rep).map(|t| replicate_loglik(&ctx3, t, &x_star3[t*d..(t+1)*d]).unwrap()).sum();
    println!("phi + 1e-6: delta={:.6}", lik_c - lik_a);

    // per-replicate detail for the identical case
    for t in 0..3 {
        let a = replicate_loglik(&ctx, t, &x_star[t*d..(t+1)*d]).unwrap();
        let b = replicate_loglik(&ctx2, t, &x_star[t*d..(t+1)*d]).unwrap();
        if (a-b).abs() > 1e-9 { println!("  rep {t}: {a} vs {b}"); }
    }
}

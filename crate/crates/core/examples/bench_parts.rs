use scalemix::experiments::{simulate_dataset, true_context, SimScenario};
use scalemix::likelihood::{total_loglik, LikelihoodContext, MarginalParamsGpd};
use scalemix::spatial::BasisWeights;
use std::time::Instant;

fn main() {
    let sc = SimScenario::desk_default(1);
    let (data, latents) = simulate_dataset(&sc).unwrap();
    let ctx = true_context(&sc, &data).unwrap();
    let basis = BasisWeights::build(&data.sites, &sc.knots);
    let phi = basis.gauss_surface(&sc.phi_knots);
    let gbar = basis.gamma_bar(&sc.gamma_knots).unwrap();
    let margins = MarginalParamsGpd { beta_sigma: sc.beta_sigma, beta_xi: sc.beta_xi };

    // warm rebuild with a small phi perturbation
    let phi2: Vec<f64> = phi.iter().map(|p| (p + 0.002).min(0.95)).collect();
    let t0 = Instant::now();
    let reps = 200;
    for _ in 0..reps {
        let _ = LikelihoodContext::build_m4(&data, &phi2, &gbar, sc.alpha0, &margins, Some(&ctx)).unwrap();
    }
    println!("warm rebuild: {:.2} ms", t0.elapsed().as_secs_f64() * 1000.0 / reps as f64);

    let t0 = Instant::now();
    for _ in 0..reps {
        let _ = total_loglik(&ctx, &latents.x_star, data.n_rep).unwrap();
    }
    println!("total_loglik: {:.3} ms", t0.elapsed().as_secs_f64() * 1000.0 / reps as f64);
}

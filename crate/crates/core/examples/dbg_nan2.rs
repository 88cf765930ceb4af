use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::likelihood::{replicate_loglik, LikelihoodContext, MarginalParamsGpd, PitCell};
use scalemix::spatial::BasisWeights;
use scalemix::dists::pareto_link;

fn main() {
    let sc = SimScenario::desk_default(1);
    let (data, _) = simulate_dataset(&sc).unwrap();
    // replicate the chain's default init
    let a0 = 1.0 + 3.0f64.exp();
    let mut knots = sc.knots.clone();
    knots.wendland_radius = data.sites.diameter() / 3.0;
    let basis = BasisWeights::build(&data.sites, &knots);
    let phi = basis.gauss_surface(&vec![0.5; 5]);
    let gbar = basis.gamma_bar(&vec![1.0; 5]).unwrap();
    println!("radius {} gbar range {:?}", knots.wendland_radius,
             gbar.iter().fold((f64::MAX, f64::MIN), |acc, &g| (acc.0.min(g), acc.1.max(g))));
    // margins from the moment-fit heuristic are unknown here; use something mild
    let margins = MarginalParamsGpd { beta_sigma: [3.0, 0.0], beta_xi: [0.1, 0.0] };
    let ctx = LikelihoodContext::build_m4(&data, &phi, &gbar, a0, &margins, None).unwrap();
    let d = data.n_sites();
    // x_star at S=1, Z=0
    let mut x_star = vec![0.0; d];
    for j in 0..d {
        let r: f64 = basis.wendland_row(j).iter().sum();
        x_star[j] = r.powf(phi[j]) * pareto_link(0.0);
    }
    for t in 0..data.n_rep {
        let ll = replicate_loglik(&ctx, t, &x_star).unwrap();
        if !ll.is_finite() {
            println!("rep {t}: lik {ll}");
            for j in 0..d {
                match ctx.pit_row(t)[j] {
                    PitCell::Exceedance { x, log_jacobian } => {
                        let term = ctx.eps.ln_pdf(x / x_star[j]) - x_star[j].ln() + log_jacobian;
                        if !term.is_finite() {
                            println!("  site {j}: x={x:.3e} logjac={log_jacobian:.3e} x*={:.3}", x_star[j]);
                        }
                    }
                    PitCell::Censored => {
                        let term = ctx.eps.ln_cdf(ctx.sites[j].x0 / x_star[j]);
                        if !term.is_finite() {
                            println!("  site {j} censored: x0={} x*={}", ctx.sites[j].x0, x_star[j]);
                        }
                    }
                    PitCell::SupportViolation => println!("  site {j}: support violation"),
                }
            }
            break;
        }
    }
    println!("done");
}

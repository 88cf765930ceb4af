use scalemix::experiments::illustration_setup;
use scalemix::taildep::{chi_theoretical, eta_theoretical, PairContext, PairVariant, TailDep};
use scalemix::rng::Stream;

fn main() {
    let setup = illustration_setup();
    println!("phi at points: {:?}", setup.phi_points.iter().map(|p| (p * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    for which in 0..4 {
        let pair = setup.pair(which).unwrap();
        let ctx = PairContext::new(
            PairVariant::M4 {
                phi_i: pair.phi_i,
                phi_j: pair.phi_j,
                b_i: pair.b_i.clone(),
                b_j: pair.b_j.clone(),
                gamma_k: setup.gamma_knots.clone(),
            },
            5.0,
            pair.rho_ij,
        ).unwrap();
        let eta = eta_theoretical(&ctx).unwrap();
        let mut rng = Stream::root(1);
        let chi = chi_theoretical(&ctx, &mut rng, 200_000).unwrap();
        match (eta, chi) {
            (TailDep::Classified(e), TailDep::Classified(c)) => {
                println!("pair {:?}: rho={:.3} eta=[{:.3},{:.3}] chi*={:.4} chi=[{:.4},{:.4}]",
                    pair.label, pair.rho_ij, e.eta.0, e.eta.1, c.chi_smooth, c.chi.0, c.chi.1);
            }
            other => println!("pair {:?}: {:?}", pair.label, other),
        }
    }
}

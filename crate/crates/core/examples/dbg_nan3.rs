use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::spatial::BasisWeights;
use scalemix::marginals::M4Marginal;

fn main() {
    let sc = SimScenario::desk_default(1);
    let (data, _) = simulate_dataset(&sc).unwrap();
    let a0 = 1.0 + 3.0f64.exp();
    let mut knots = sc.knots.clone();
    knots.wendland_radius = data.sites.diameter() / 3.0;
    let basis = BasisWeights::build(&data.sites, &knots);
    let phi = basis.gauss_surface(&vec![0.5; 5]);
    let gbar = basis.gamma_bar(&vec![1.0; 5]).unwrap();
    for &j in &[11usize, 46] {
        println!("site {j}: phi={} gbar={}", phi[j], gbar[j]);
        let m = M4Marginal::new(phi[j], gbar[j], a0).unwrap();
        for &x in &[27.5, 72.7, 10.0, 100.0] {
            println!("  ln_pdf({x}) = {:?} sf = {:?}", m.ln_pdf(x), m.sf(x));
        }
    }
}

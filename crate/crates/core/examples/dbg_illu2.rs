use scalemix::experiments::{illustration1, illustration_setup};
use scalemix::taildep::TailDep;

fn main() {
    let setup = illustration_setup();
    println!("phi at points: {:?}", setup.phi_points.iter().map(|p| (p * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    for pair_idx in 0..4 {
        for res in illustration1(&setup, pair_idx, &[2.0, 5.0, 10.0], n, &[0.99, 0.999, 0.9999], 200_000, 3001).unwrap() {
            let s = match &res.theory { TailDep::Classified(s) => s, u => { println!("{u:?}"); continue; } };
            let chis: Vec<String> = res.chi.points.iter().map(|p| format!("{:.4}±{:.4}", p.estimate, p.se)).collect();
            let etas: Vec<String> = res.eta.points.iter().map(|p| format!("{:.3}±{:.3}", p.estimate, p.se)).collect();
            println!("pair {:?} a0={}: chi* {:.4} [{:.4},{:.4}] eta [{:.3},{:.3}]", res.pair_label, res.alpha0, s.chi_smooth, s.chi.0, s.chi.1, s.eta.0, s.eta.1);
            println!("   chi_hat: {chis:?}");
            println!("   eta_hat: {etas:?}");
        }
    }
}

use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::mcmc::{run, SamplerConfig};
use std::time::Instant;

fn main() {
    let sc = SimScenario::desk_default(100);
    let (data, _) = simulate_dataset(&sc).unwrap();
    let cfg = SamplerConfig {
        iterations: 30_000,
        burn_in: 15_000,
        thin: 5,
        seed: 2,
        epoch: 100,
        workers: 1,
        ..Default::default()
    };
    let t0 = Instant::now();
    let out = run(&data, sc.knots.clone(), sc.nu, cfg, None).unwrap();
    println!("30k iterations in {:.1} min, {} draws", t0.elapsed().as_secs_f64() / 60.0, out.draws.rows.len());
    let truth: Vec<(String, f64)> = (1..=5).map(|k| (format!("phi_k{k}"), sc.phi_knots[k-1]))
        .chain((1..=5).map(|k| (format!("rho_k{k}"), sc.rho_knots[k-1])))
        .chain([("l".to_string(), 4.0), ("alpha0".to_string(), 5.0),
                ("beta_sigma_0".to_string(), 3.0), ("beta_xi_0".to_string(), 0.15)])
        .collect();
    for (name, tv) in truth {
        let idx = out.draws.columns.iter().position(|c| *c == name).unwrap();
        let mut vals: Vec<f64> = out.draws.rows.iter().map(|r| r[idx]).collect();
        vals.sort_by(f64::total_cmp);
        let n = vals.len();
        let (lo, hi) = (vals[n / 40], vals[n - 1 - n / 40]);
        let mean = vals.iter().sum::<f64>() / n as f64;
        let cover = if lo <= tv && tv <= hi { "COVER" } else { "MISS " };
        println!("{name:14} truth {tv:7.3} mean {mean:7.3} CI [{lo:7.3}, {hi:7.3}] {cover}");
    }
}

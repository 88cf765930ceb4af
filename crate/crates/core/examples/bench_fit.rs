use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::mcmc::{run, SamplerConfig};
use std::time::Instant;

fn main() {
    let sc = SimScenario::desk_default(1);
    let (data, _) = simulate_dataset(&sc).unwrap();
    let n_ex: usize = (0..data.n_rep)
        .map(|t| data.mask_counts(t).1)
        .sum();
    println!("D={} T={} exceedances={}", data.n_sites(), data.n_rep, n_ex);
    let cfg = SamplerConfig {
        iterations: 300,
        burn_in: 150,
        thin: 5,
        seed: 2,
        epoch: 100,
        workers: 1,
        ..Default::default()
    };
    let t0 = Instant::now();
    let out = run(&data, sc.knots.clone(), sc.nu, cfg, None).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!("300 iterations in {dt:.2}s -> {:.2} ms/iter", dt / 300.0 * 1000.0);
    println!("30k iterations would take {:.1} min", dt / 300.0 * 30000.0 / 60.0);
    for b in &out.ledger {
        println!("{}: {}/{} scale {:.3}", b.block, b.accepts, b.proposals, b.final_scale);
    }
}

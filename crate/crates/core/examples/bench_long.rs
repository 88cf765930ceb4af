use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::mcmc::{run, SamplerConfig};
use std::time::Instant;

fn main() {
    let sc = SimScenario::desk_default(1);
    let (data, _) = simulate_dataset(&sc).unwrap();
    let cfg = SamplerConfig {
        iterations: 3000,
        burn_in: 1500,
        thin: 5,
        seed: 2,
        epoch: 100,
        workers: 1,
        ..Default::default()
    };
    let t0 = Instant::now();
    let out = run(&data, sc.knots.clone(), sc.nu, cfg, None).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!("3000 iterations in {dt:.1}s -> {:.1} ms/iter avg", dt / 3.0);
    for b in &out.ledger {
        println!("{}: {}/{} scale {:.4}", b.block, b.accepts, b.proposals, b.final_scale);
    }
    // posterior means of phi vs truth
    let cols = &out.draws.columns;
    for (i, name) in cols.iter().enumerate().take(5) {
        let m: f64 = out.draws.rows.iter().map(|r| r[i]).sum::<f64>() / out.draws.rows.len() as f64;
        println!("{name}: mean {m:.3} truth {:.3}", sc.phi_knots[i]);
    }
}

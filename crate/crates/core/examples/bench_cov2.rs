use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::mcmc::{run, SamplerConfig};

fn summarize(tag: &str, sc: &SimScenario, iterations: usize, seed: u64) {
    let (data, _) = simulate_dataset(sc).unwrap();
    let cfg = SamplerConfig {
        iterations,
        burn_in: iterations / 2,
        thin: 5,
        seed,
        epoch: 100,
        workers: 1,
        ..Default::default()
    };
    let out = run(&data, sc.knots.clone(), sc.nu, cfg, None).unwrap();
    let mut mae = 0.0;
    let mut cover = 0;
    for k in 0..5 {
        let name = format!("phi_k{}", k + 1);
        let idx = out.draws.columns.iter().position(|c| *c == name).unwrap();
        let mut vals: Vec<f64> = out.draws.rows.iter().map(|r| r[idx]).collect();
        vals.sort_by(f64::total_cmp);
        let n = vals.len();
        let (lo, hi) = (vals[n / 40], vals[n - 1 - n / 40]);
        let mean = vals.iter().sum::<f64>() / n as f64;
        mae += (mean - sc.phi_knots[k]).abs() / 5.0;
        cover += (lo <= sc.phi_knots[k] && sc.phi_knots[k] <= hi) as usize;
    }
    let aidx = out.draws.columns.iter().position(|c| c == "alpha0").unwrap();
    let amean: f64 = out.draws.rows.iter().map(|r| r[aidx]).sum::<f64>() / out.draws.rows.len() as f64;
    let lp: Vec<f64> = out.logpost_trace.iter().step_by(iterations / 10).copied().collect();
    println!("{tag}: phi MAE {mae:.3}, phi cover {cover}/5, alpha0 mean {amean:.1}");
    println!("  logpost trace: {:?}", lp.iter().map(|v| *v as i64).collect::<Vec<_>>());
}

fn main() {
    // same dataset, doubled iterations: does the phi bias move?
    let sc5 = SimScenario::desk_default(100);
    summarize("alpha0=5, 60k", &sc5, 60_000, 2);
    // truth at the prior mean of alpha0
    let mut sc21 = SimScenario::desk_default(100);
    sc21.alpha0 = 1.0 + 3.0f64.exp();
    summarize("alpha0=21, 30k", &sc21, 30_000, 2);
}

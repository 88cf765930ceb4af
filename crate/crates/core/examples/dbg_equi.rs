use scalemix::experiments::{simulate_dataset, seed_truth, SimScenario};
use scalemix::mcmc::{run, Chain, SamplerConfig};

fn main() {
    let sc = SimScenario::desk_default(100);
    let (data, latents) = simulate_dataset(&sc).unwrap();
    let cfg = SamplerConfig { iterations: 60_000, burn_in: 100, thin: 10, seed: 3, epoch: 100, ..Default::default() };
    let mut snap = Chain::default_init(&data, &sc.knots, &cfg).unwrap();
    seed_truth(&mut snap, &sc);
    snap.s = latents.s.clone();
    snap.z = latents.z.clone();
    let out = run(&data, sc.knots.clone(), sc.nu, cfg, Some(snap)).unwrap();
    let col = |name: &str| -> Vec<f64> {
        let idx = out.draws.columns.iter().position(|c| c == name).unwrap();
        out.draws.rows.iter().map(|r| r[idx]).collect()
    };
    let dec = |v: &[f64]| -> Vec<f64> {
        (0..10).map(|d| {
            let lo = d * v.len() / 10; let hi = (d + 1) * v.len() / 10;
            let m = v[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            (m * 100.0).round() / 100.0
        }).collect()
    };
    println!("alpha0 decades: {:?}", dec(&col("alpha0")));
    println!("phi_k2 decades: {:?} (truth 0.55)", dec(&col("phi_k2")));
    println!("phi_k4 decades: {:?} (truth 0.60)", dec(&col("phi_k4")));
    println!("l      decades: {:?} (truth 4.0)", dec(&col("l")));
    println!("logpost decades: {:?}", dec(&col("logpost")));
}

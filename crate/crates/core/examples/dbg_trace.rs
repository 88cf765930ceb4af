use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::mcmc::{run, SamplerConfig};

fn main() {
    let sc = SimScenario::desk_default(100);
    let (data, _) = simulate_dataset(&sc).unwrap();
    let cfg = SamplerConfig {
        iterations: 30_000, burn_in: 15_000, thin: 5, seed: 2, epoch: 100, workers: 1,
        ..Default::default()
    };
    let out = run(&data, sc.knots.clone(), sc.nu, cfg, None).unwrap();
    // trace summary: decade means of each phi chain
    for k in 0..5 {
        let idx = out.draws.columns.iter().position(|c| *c == format!("phi_k{}", k + 1)).unwrap();
        let vals: Vec<f64> = out.draws.rows.iter().map(|r| r[idx]).collect();
        let n = vals.len();
        let decs: Vec<f64> = (0..6).map(|d| {
            let lo = d * n / 6; let hi = (d + 1) * n / 6;
            vals[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        }).collect();
        // lag-100 autocorrelation (in retained draws = lag 500 iterations)
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let lag = 100;
        let ac: f64 = (0..n - lag).map(|i| (vals[i] - mean) * (vals[i + lag] - mean)).sum::<f64>()
            / ((n - lag) as f64 * var);
        println!("phi_k{}: truth {:.2} decade means {:?} acf500 {:.2}", k + 1, sc.phi_knots[k],
            decs.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>(), ac);
    }
    // pairwise correlation of phi chains
    let get = |name: &str| -> Vec<f64> {
        let idx = out.draws.columns.iter().position(|c| c == name).unwrap();
        out.draws.rows.iter().map(|r| r[idx]).collect()
    };
    let a = get("phi_k1"); let b = get("phi_k3"); let c = get("phi_k5");
    let corr = |x: &[f64], y: &[f64]| -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n; let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let sy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
        sxy / (sx * sy).sqrt()
    };
    println!("corr(phi_k1, phi_k3) = {:.2}, corr(phi_k3, phi_k5) = {:.2}", corr(&a, &b), corr(&b, &c));
}

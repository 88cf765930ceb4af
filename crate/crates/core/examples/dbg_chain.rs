use scalemix::experiments::{simulate_dataset, SimScenario};
use scalemix::mcmc::{Chain, SamplerConfig};

fn main() {
    let sc = SimScenario::desk_default(1);
    let (data, _) = simulate_dataset(&sc).unwrap();
    let cfg = SamplerConfig {
        iterations: 100,
        burn_in: 50,
        thin: 5,
        seed: 2,
        epoch: 100,
        workers: 1,
        ..Default::default()
    };
    let mut chain = Chain::new(&data, sc.knots.clone(), sc.nu, cfg).unwrap();
    println!("init logpost {:.4}", chain.log_posterior());
    println!("init fresh   {:.4}", chain.recompute_log_posterior().unwrap());
    for i in 0..20 {
        chain.step().unwrap();
        let inc = chain.log_posterior();
        let fresh = chain.recompute_log_posterior().unwrap();
        if (inc - fresh).abs() > 1e-6 {
            println!("iter {i}: incremental {inc:.6} vs fresh {fresh:.6} DIVERGED");
        }
    }
    println!("after 20: {:.4} vs fresh {:.4}", chain.log_posterior(), chain.recompute_log_posterior().unwrap());
}

use scalemix::marginals::M4Marginal;
use std::hint::black_box;
use std::time::Instant;

fn main() {
    let m = M4Marginal::new(0.45, 1.3, 5.0).unwrap();
    let n = 300_000;
    let t0 = Instant::now();
    let mut acc = 0.0;
    for i in 0..n {
        let x = 1.0 + (i % 97) as f64 * 0.37;
        acc += m.sf(black_box(x)).unwrap();
    }
    println!("sf: {:.0} ns/eval (acc {acc:.3})", t0.elapsed().as_nanos() as f64 / n as f64);
    let t0 = Instant::now();
    let mut acc = 0.0;
    for i in 0..n {
        let x = 1.0 + (i % 97) as f64 * 0.37;
        acc += m.ln_pdf(black_box(x)).unwrap();
    }
    println!("ln_pdf: {:.0} ns/eval (acc {acc:.3})", t0.elapsed().as_nanos() as f64 / n as f64);
    let t0 = Instant::now();
    let mut acc = 0.0;
    for i in 0..30_000 {
        let p = 0.9 + (i % 90) as f64 * 0.001;
        acc += m.quantile(black_box(p), None).unwrap();
    }
    println!("quantile cold: {:.0} ns (acc {acc:.0})", t0.elapsed().as_nanos() as f64 / 30_000.0);
    let w = m.quantile(0.95, None).unwrap();
    let t0 = Instant::now();
    let mut acc = 0.0;
    for _ in 0..30_000 {
        acc += m.quantile(black_box(0.95), Some(w * 1.01)).unwrap();
    }
    println!("quantile warm: {:.0} ns (acc {acc:.0})", t0.elapsed().as_nanos() as f64 / 30_000.0);
}

use scalemix::specfun::{integrate, ln_upper_inc_gamma, Interval, QuadratureSpec, Transform};

fn oracle_ln(s: f64, x: f64) -> f64 {
    let spec = QuadratureSpec { abs_tol: 1e-14, rel_tol: 1e-12, max_subdivisions: 4000, transform: Transform::None };
    let val = integrate(|v: f64| v.powf(s - 1.0) * (-x * (v - 1.0)).exp(), Interval::UpperInfinite(1.0), &spec).unwrap().value;
    s * x.ln() - x + val.ln()
}

fn main() {
    let mut worst: f64 = 0.0;
    for &s in &[1e-16f64, -1e-16, 1e-9, -1e-9, 0.0, 0.01, -0.01, 0.3, -0.3, 0.49, -0.49, 0.5, 0.7, -0.5, -0.6, -1.0, -2.5, -10.05, -20.0] {
        for &x in &[1e-5f64, 1e-3, 0.05, 0.3, 1.0, 1.4, 1.6, 3.0, 14.0, 80.0] {
            let got = ln_upper_inc_gamma(s, x).unwrap();
            let want = oracle_ln(s, x);
            let d = (got - want).abs();
            if d > worst { worst = d; println!("worst so far: s={s} x={x} got {got:.9} want {want:.9} diff {d:.2e}"); }
        }
    }
    println!("overall worst ln-diff: {worst:.2e}");
}

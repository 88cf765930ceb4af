use scalemix::marginals::M4Marginal;

fn main() {
    // the initialisation regime: alpha0 = 1 + e^3
    let a0 = 1.0 + 3.0f64.exp();
    for &phi in &[0.3, 0.5, 0.7] {
        for &gbar in &[0.5, 1.0, 2.0] {
            let m = M4Marginal::new(phi, gbar, a0).unwrap();
            let mut bad = 0;
            let mut first_bad = None;
            for i in 0..4000 {
                let x = (i as f64 / 4000.0 * 14.0 - 2.0f64).exp(); // e^-2 .. e^12
                match m.ln_pdf(x) {
                    Ok(v) if v.is_finite() => {}
                    Ok(v) => {
                        bad += 1;
                        if first_bad.is_none() { first_bad = Some((x, v)); }
                    }
                    Err(e) => {
                        bad += 1;
                        if first_bad.is_none() { first_bad = Some((x, f64::NAN)); }
                        let _ = e;
                    }
                }
            }
            println!("phi={phi} gbar={gbar}: {bad}/4000 bad, first {first_bad:?}");
        }
    }
    // also the sf / quantile path
    let m = M4Marginal::new(0.5, 1.0, a0).unwrap();
    println!("x0 = {:?}", m.quantile(0.95, None));
}

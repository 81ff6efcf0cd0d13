//! Lower bound of the trial energy across the coupling threshold beta^2 = 2 pi.

use biorthogonal::qft::{instability_scan, multi_exp_instability, ExpTerm};
use num_complex::Complex64;

fn main() -> biorthogonal::Result<()> {
    let mu = Complex64::new(-1.0, 0.0);
    for beta in [1.0, 2.0, (2.0 * std::f64::consts::PI).sqrt(), 2.6, 3.0] {
        let r = instability_scan(mu, beta, 0.0, 1.0, 1e4, 200)?;
        println!(
            "beta^2 = {:>6.3}: bounded {:<5}  min {:>12.4e} at M = {:.3e}",
            beta * beta,
            r.bounded_below,
            r.min_value,
            r.argmin_mass
        );
    }
    let terms: Vec<ExpTerm> = (1..=8).map(|k| ExpTerm { k: k as f64, coupling: -0.5 }).collect();
    let rep = multi_exp_instability(&terms, 1.0, 1e3, 60)?;
    println!("unstable k: {:?}", rep.unstable.iter().map(|t| t.k).collect::<Vec<_>>());
    Ok(())
}

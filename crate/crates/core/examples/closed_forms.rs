//! Cross-checks built systems against their closed forms for three named models.

use biorthogonal::models::{darboux_system, single_exp_system, two_exp_system};
use num_complex::Complex64;

fn main() -> biorthogonal::Result<()> {
    let reports = [
        single_exp_system(1.0, 0.0, 12, 60)?.1,
        single_exp_system(0.8, 0.3, 12, 60)?.1,
        darboux_system(1.0, 12, 60)?.1,
        two_exp_system(Complex64::new(0.7, 0.4), Complex64::new(-0.5, 1.1), 0.25, 10, 60)?.1,
    ];
    for r in &reports {
        println!("{} ({})", r.model, r.closed_form.as_deref().unwrap_or("no closed form"));
        for (name, dev) in &r.checks {
            println!("    {name:<28} {dev:.2e}");
        }
    }
    Ok(())
}

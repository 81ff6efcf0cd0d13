//! A tour of the special functions: Bessel, Neumann and Gegenbauer polynomials, Kummer M.

use biorthogonal::specfun::{bessel_i, bessel_j, gegenbauer_a, gegenbauer_c, kummer_m, neumann_a, SeriesControl};
use num_complex::Complex64;

fn main() -> biorthogonal::Result<()> {
    let ctl = SeriesControl::default();
    let z = Complex64::new(1.2, 0.7);
    for n in 0..4 {
        println!("J_{n}(z) = {:.12}   A_{n}(z) = {:.12}", bessel_j(n as f64, z, ctl)?, neumann_a(n, z)?);
    }
    // sum J_n(w) A_n(z) = z / (z - w) for |w| < |z|
    let w = z / 2.0;
    let sum: Complex64 = (0..60).map(|n| bessel_j(n as f64, w, ctl).unwrap() * neumann_a(n, z).unwrap()).sum();
    println!("sum J_n(w) A_n(z) - z/(z - w) = {:.1e}", (sum - z / (z - w)).norm());
    println!("I_0(2) = {:.15}", bessel_i(0.0, Complex64::new(2.0, 0.0), ctl)?);
    println!("A_(3, 0.5)(z) = {:.12}  C_3^0.5(z) = {:.12}", gegenbauer_a(3, 0.5, z)?, gegenbauer_c(3, 0.5, z));
    // M(a, a, z) = e^z
    println!("M(1.5, 1.5, z) - e^z = {:.1e}", (kummer_m(1.5, 1.5, z, ctl)? - z.exp()).norm());
    Ok(())
}

//! The Borel-summed Kapteyn series against its partial sums, and det J as m grows.

use biorthogonal::kernels::{det_j, kapteyn_borel, kapteyn_partial_sum};
use biorthogonal::specfun::neumann_a;
use num_complex::Complex64;

fn main() -> biorthogonal::Result<()> {
    let (t, z) = (Complex64::new(0.1, 0.0), Complex64::new(-1.0, 0.0));
    let integral = kapteyn_borel(t, z, 4000)?;
    println!("integral = {integral:.15}");
    for k in 1..=5 {
        let err = (integral - kapteyn_partial_sum(t, z, k)?).norm();
        let next = (t.powu(k as u32 + 1) * neumann_a(k as i64 + 1, z)?).norm();
        println!("K = {k}: error {err:.3e}, first omitted term {next:.3e}");
    }
    for m in [0.0, 0.5, 1.0, 2.0, 3.0] {
        println!("det J(m = {m}) = {:.12}", det_j(m, 1024)?);
    }
    Ok(())
}

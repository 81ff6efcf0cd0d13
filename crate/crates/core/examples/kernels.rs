//! Samples the norm and Hamiltonian kernels and compares them with their bilinear sums.

use biorthogonal::kernels::{bessel_bilinear_sum, ham_kernel_h, norm_kernel_j, periodic_grid, KernelGrid};

fn main() -> biorthogonal::Result<()> {
    let m = 1.0;
    let grid = periodic_grid(16);
    let j = KernelGrid::sample(&grid, &grid, |x, y| norm_kernel_j(m, x, y))?;
    let j_sum = KernelGrid::sample(&grid, &grid, |x, y| bessel_bilinear_sum(m, x, y, 40, |_| 1.0))?;
    let h = KernelGrid::sample(&grid, &grid, |x, y| ham_kernel_h(m, x, y))?;
    let h_sum = KernelGrid::sample(&grid, &grid, |x, y| bessel_bilinear_sum(m, x, y, 40, |n| (n * n) as f64))?;

    println!("J: max |closed - sum| = {:.2e}", j.max_abs_diff(&j_sum)?);
    println!("H: max |closed - sum| = {:.2e}", h.max_abs_diff(&h_sum)?);
    // first rows of the CSV export
    for line in j.to_csv().lines().take(4) {
        println!("{line}");
    }
    Ok(())
}

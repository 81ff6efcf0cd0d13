//! Builds the biorthogonal system of `H = p^2 + e^{2ix}` and prints its certification.

use biorthogonal::{BiorthogonalSystem, BuildOptions, HamiltonianSpec};

fn main() -> biorthogonal::Result<()> {
    let spec = HamiltonianSpec::single_exp(1.0, 0.0)?;
    let sys = BiorthogonalSystem::build(&spec, BuildOptions::default())?;

    for (n, e) in sys.energies().iter().enumerate().take(5) {
        let psi = &sys.psi()[n];
        println!("n = {n}  E = {e:>4}  psi_n: z^{} .. z^{}", psi.min_power(), psi.max_power());
    }
    let res = sys.eigen_residual();
    println!("max |<chi_k|psi_n> - delta_kn| = {:.2e}", sys.biorthonormality_deviation());
    println!("eigen residual: retained {:.2e}, truncation tail {:.2e}", res.retained, res.tail);
    Ok(())
}

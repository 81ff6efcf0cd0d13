//! Time evolution of a two-level superposition: <p>(t) turns on a circle at rate E_2 - E_0,
//! and obeys d<p>/dt = -2 i m^2 <e^{2ix}>.

use biorthogonal::{BiorthogonalSystem, BuildOptions, HamiltonianSpec};
use num_complex::Complex64;

fn main() -> biorthogonal::Result<()> {
    let spec = HamiltonianSpec::single_exp(1.0, 0.0)?;
    let sys = BiorthogonalSystem::build(&spec, BuildOptions { n_max: 6, ..BuildOptions::default() })?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 7];
    coeffs[0] = Complex64::new(1.0, 0.0);
    coeffs[2] = Complex64::new(0.6, 0.8);
    let state = sys.state(coeffs)?;

    let rate = sys.energies()[2] - sys.energies()[0];
    let period = 2.0 * std::f64::consts::PI / rate;
    for k in 0..=8 {
        let t = period * k as f64 / 8.0;
        let p = state.p_expectation(t)?;
        println!("t = {t:.4}  <p> = {p:.8}  Ehrenfest residual {:.1e}", state.ehrenfest_residual(t, 1e-3)?);
    }
    Ok(())
}

//! Complex classical motion at E = 1/4 from x0 = 1: RK4 against the closed form, and the
//! momentum circle.

use biorthogonal::classical::{
    circle_geometry, closed_form_single_exp, hamiltonian_value, integrate, momentum_amplitude, Branch, PhasePoint,
    TrajectoryConfig,
};
use biorthogonal::HamiltonianSpec;
use num_complex::Complex64;

fn main() -> biorthogonal::Result<()> {
    let spec = HamiltonianSpec::single_exp(1.0, 0.0)?;
    let (energy, x0) = (Complex64::new(0.25, 0.0), Complex64::new(1.0, 0.0));
    let p0 = (energy - spec.potential(x0)).sqrt();
    let traj = integrate(&spec, PhasePoint::new(x0, p0, 0.0), TrajectoryConfig::new(1e-3, 2000))?;

    let circle = circle_geometry(momentum_amplitude(1.0, energy, x0)?, energy.re, Branch::Plus)?;
    println!("circle: center {:.6}, radius {:.6}", circle.center, circle.radius);
    for pt in traj.points.iter().step_by(400) {
        let exact = closed_form_single_exp(1.0, energy, x0, Branch::Plus, pt.t)?.point;
        println!(
            "t = {:.1}  x = {:.6}  p = {:.6}  |p - exact| = {:.1e}  off circle {:.1e}  H = {:.10}",
            pt.t,
            pt.x,
            pt.p,
            (pt.p - exact.p).norm(),
            circle.distance(pt.p),
            hamiltonian_value(&spec, pt)
        );
    }
    Ok(())
}

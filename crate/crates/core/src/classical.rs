//! Complexified Hamiltonian flow of `H = (p + nu)^2 + sum_k mu_k e^{ikx}`.
//!
//! `x` and `p` are both complex and evolve holomorphically in real time `t`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Complex64,
    pub p: Complex64,
    pub t: f64,
}

impl PhasePoint {
    pub fn new(x: Complex64, p: Complex64, t: f64) -> Self {
        Self { x, p, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub method: Method,
    /// Abort once `|x|` or `|p|` exceeds this.
    #[serde(default = "default_bound")]
    pub bound: f64,
}

fn default_bound() -> f64 {
    1e6
}

impl TrajectoryConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self {
            dt,
            steps,
            method: Method::Rk4,
            bound: default_bound(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.steps == 0 || !(self.dt * self.steps as f64).is_finite() || !(self.bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trajectory needs dt > 0, steps >= 1 and a positive bound, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<PhasePoint>,
}

/// Which root of `p = +-sqrt(E - V)` a closed form follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// `H` at a phase-space point.
pub fn hamiltonian_value(spec: &HamiltonianSpec, pt: &PhasePoint) -> Complex64 {
    spec.energy(pt.x, pt.p)
}

fn velocity(spec: &HamiltonianSpec, x: Complex64, p: Complex64) -> (Complex64, Complex64) {
    (2.0 * (p + spec.nu()), -spec.potential_slope(x))
}

/// Fixed-step RK4 of Hamilton's equations. The result includes the start point.
pub fn integrate(spec: &HamiltonianSpec, start: PhasePoint, cfg: TrajectoryConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let h = cfg.dt;
    let mut points = Vec::with_capacity(cfg.steps + 1);
    points.push(start);
    let (mut x, mut p) = (start.x, start.p);
    for k in 1..=cfg.steps {
        let (k1x, k1p) = velocity(spec, x, p);
        let (k2x, k2p) = velocity(spec, x + 0.5 * h * k1x, p + 0.5 * h * k1p);
        let (k3x, k3p) = velocity(spec, x + 0.5 * h * k2x, p + 0.5 * h * k2p);
        let (k4x, k4p) = velocity(spec, x + h * k3x, p + h * k3p);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let t = start.t + h * k as f64;
        if !(x.norm() <= cfg.bound && p.norm() <= cfg.bound) {
            return Err(Error::Overflow { t });
        }
        points.push(PhasePoint::new(x, p, t));
    }
    Ok(Trajectory { points })
}

/// Closed-form sample of the single-exponential flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormSample {
    pub point: PhasePoint,
    /// The logarithm's argument is within 0.05 rad of its cut; the principal
    /// branch may have jumped.
    pub near_cut: bool,
}

/// Motion under `H = p^2 + m^2 e^{2ix}` at energy `E != 0`, starting from `x0` on `branch`.
///
/// With `w = 2 sqrt(E) t` and `s = sqrt(E - m^2 e^{2 i x0}) / sqrt(E)`,
/// `x(t) = x0 + i ln(cos w -+ i s sin w)`, which is the cosh/arctanh form after the
/// addition theorem for cosh. `p(t)` is `dx/dt / 2` of the same expression.
pub fn closed_form_single_exp(m: f64, energy: Complex64, x0: Complex64, branch: Branch, t: f64) -> Result<ClosedFormSample> {
    if energy == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter("E = 0 has its own closed form".into()));
    }
    let i = Complex64::i();
    let root_e = energy.sqrt();
    let s = (energy - m * m * (2.0 * i * x0).exp()).sqrt() / root_e;
    let w = 2.0 * root_e * t;
    let sg = branch.sign();
    let g = w.cos() - sg * i * s * w.sin();
    let x = x0 + i * g.ln();
    let p = sg * root_e * (s * w.cos() - sg * i * w.sin()) / g;
    Ok(ClosedFormSample {
        point: PhasePoint::new(x, p, t),
        near_cut: g.arg().abs() > std::f64::consts::PI - 0.05,
    })
}

/// `a = (E/m^2) (1 + sqrt(1 - (m^2/E) e^{2 i x0}))^2 e^{-2 i x0}`.
pub fn momentum_amplitude(m: f64, energy: Complex64, x0: Complex64) -> Result<Complex64> {
    if energy == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter("amplitude needs E != 0".into()));
    }
    let i = Complex64::i();
    let e2 = (2.0 * i * x0).exp();
    let root = (1.0 - m * m / energy * e2).sqrt();
    Ok(energy / (m * m) * (1.0 + root).powu(2) / e2)
}

/// Momentum at time `t` from the amplitude: `+-sqrt(E) (a - e^{+-4i sqrt(E) t}) / (a + e^{+-4i sqrt(E) t})`.
pub fn momentum_from_amplitude(a: Complex64, energy: f64, branch: Branch, t: f64) -> Complex64 {
    let sg = branch.sign();
    let q = Complex64::from_polar(1.0, sg * 4.0 * energy.sqrt() * t);
    sg * energy.sqrt() * (a - q) / (a + q)
}

/// Circle traced by the momentum at real positive energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleGeometry {
    pub center: Complex64,
    /// `+inf` when degenerate.
    pub radius: f64,
    /// `|a| = 1`: the circle opens into the imaginary axis.
    pub degenerate: bool,
}

impl CircleGeometry {
    /// Distance of `p` from the circle (from the imaginary axis when degenerate).
    pub fn distance(&self, p: Complex64) -> f64 {
        if self.degenerate {
            p.re.abs()
        } else {
            ((p - self.center).norm() - self.radius).abs()
        }
    }
}

pub fn circle_geometry(a: Complex64, energy: f64, branch: Branch) -> Result<CircleGeometry> {
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter(format!("circle needs real E > 0, got {energy}")));
    }
    let r = a.norm();
    let root = energy.sqrt() * branch.sign();
    if (r - 1.0).abs() <= 1e-10 {
        return Ok(CircleGeometry {
            center: Complex64::new(0.0, 0.0),
            radius: f64::INFINITY,
            degenerate: true,
        });
    }
    if r.is_infinite() {
        return Ok(CircleGeometry {
            center: Complex64::new(root, 0.0),
            radius: 0.0,
            degenerate: false,
        });
    }
    let d = r * r - 1.0;
    Ok(CircleGeometry {
        center: Complex64::new(root * (r * r + 1.0) / d, 0.0),
        radius: (2.0 * r * energy.sqrt() / d).abs(),
        degenerate: false,
    })
}

/// Zero-energy motion `x(t) = i ln(e^{-i x0} +- 2mt)`, written as `x0 + i ln(1 +- 2mt e^{i x0})`
/// so that `x(0) = x0` on the caller's branch.
pub fn e_zero_trajectory(m: f64, x0: Complex64, branch: Branch, t: f64) -> Result<PhasePoint> {
    let i = Complex64::i();
    let sg = branch.sign();
    let arg = 1.0 + sg * 2.0 * m * t * (i * x0).exp();
    if arg.norm() < 1e-300 {
        return Err(Error::Singular { t });
    }
    let x = x0 + i * arg.ln();
    // dx/dt = 2p
    let p = i * sg * m * (i * x0).exp() / arg;
    Ok(PhasePoint::new(x, p, t))
}

/// Free-particle angle and momentum `(theta, p_theta)` of a single-exponential point.
pub fn canonical_map(m: f64, x: Complex64, p: Complex64) -> Result<(Complex64, Complex64)> {
    if m == 0.0 {
        return Err(Error::BranchDomain("m = 0 has no angle variable".into()));
    }
    let i = Complex64::i();
    let theta = (-i * (-i * x).exp() * p / m).asin();
    let p_theta = -m * (i * x).exp() * theta.cos();
    Ok((theta, p_theta))
}

pub fn canonical_map_inverse(m: f64, theta: Complex64, p_theta: Complex64) -> Result<(Complex64, Complex64)> {
    let cos = theta.cos();
    if cos.norm() < 1e-14 || m == 0.0 {
        return Err(Error::BranchDomain(format!("cos(theta) = {cos} or m = {m}")));
    }
    let i = Complex64::i();
    let x = -i * (p_theta / (-m * cos)).ln();
    let p = -i * p_theta * theta.tan();
    Ok((x, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn e_zero_escape_grows_like_half_log_t_squared() {
        let x0 = c(PI, 0.0);
        for t in [1e3, 1e5, 1e7] {
            let im = e_zero_trajectory(1.0, x0, Branch::Minus, t).unwrap().x.im;
            assert!((im - 0.5 * (t * t).ln() - LN_2).abs() < 1.0 / t);
        }
    }

    #[test]
    fn free_motion_is_linear() {
        let spec = HamiltonianSpec::free(0.0);
        let start = PhasePoint::new(c(0.3, 0.1), c(0.7, -0.2), 0.0);
        let tr = integrate(&spec, start, TrajectoryConfig::new(0.01, 100)).unwrap();
        let last = tr.points.last().unwrap();
        assert!((last.x - (start.x + 2.0 * start.p * last.t)).norm() < 1e-13);
        assert!((last.p - start.p).norm() < 1e-15);
        assert_eq!(tr.points.len(), 101);
    }

    #[test]
    fn energy_on_the_quarter_branch() {
        let spec = HamiltonianSpec::single_exp(1.0, 0.0).unwrap();
        let x0 = c(1.0, 0.0);
        let p0 = (c(0.25, 0.0) - (2.0 * Complex64::i() * x0).exp()).sqrt();
        let e = hamiltonian_value(&spec, &PhasePoint::new(x0, p0, 0.0));
        assert!((e - 0.25).norm() < 1e-15);
    }

    #[test]
    fn overflow_is_reported() {
        // E = 0 escape: x -> i inf at t = 1/2
        let spec = HamiltonianSpec::single_exp(1.0, 0.0).unwrap();
        let start = PhasePoint::new(c(0.0, 0.0), c(0.0, -1.0), 0.0);
        let mut cfg = TrajectoryConfig::new(1e-3, 2000);
        cfg.bound = 50.0;
        assert!(matches!(integrate(&spec, start, cfg), Err(Error::Overflow { .. })));
        assert!(integrate(&spec, start, TrajectoryConfig::new(0.0, 10)).is_err());
    }

    #[test]
    fn closed_form_starts_at_x0() {
        let x0 = c(1.0, 0.2);
        let s = closed_form_single_exp(1.0, c(0.25, 0.0), x0, Branch::Plus, 0.0).unwrap();
        assert_eq!(s.point.x, x0);
        assert!(closed_form_single_exp(1.0, c(0.0, 0.0), x0, Branch::Plus, 0.1).is_err());
    }

    #[test]
    fn amplitude_examples() {
        assert!((momentum_amplitude(1.0, c(1.0, 0.0), c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn circle_limits() {
        let g = circle_geometry(c(1.0, 0.0), 1.0, Branch::Plus).unwrap();
        assert!(g.degenerate && g.radius.is_infinite());
        let g = circle_geometry(c(1e9, 0.0), 0.25, Branch::Plus).unwrap();
        assert!((g.center.re - 0.5).abs() < 1e-8 && g.radius < 1e-8);
        let g = circle_geometry(c(1e9, 0.0), 0.25, Branch::Minus).unwrap();
        assert!((g.center.re + 0.5).abs() < 1e-8);
        assert!(circle_geometry(c(2.0, 0.0), -1.0, Branch::Plus).is_err());
    }

    #[test]
    fn zero_energy_examples() {
        let pi = std::f64::consts::PI;
        let pt = e_zero_trajectory(1.0, c(pi, 0.0), Branch::Plus, 0.0).unwrap();
        assert_eq!(pt.x, c(pi, 0.0));
        for t in [0.1, 0.3, 0.45] {
            let pt = e_zero_trajectory(1.0, c(pi, 0.0), Branch::Plus, t).unwrap();
            assert!((pt.x.im - (1.0 - 2.0 * t).ln()).abs() < 1e-12);
            assert!((pt.x.re - pi).abs() < 1e-12);
            let pt = e_zero_trajectory(1.0, c(pi, 0.0), Branch::Minus, t).unwrap();
            assert!((pt.x.im - (1.0 + 2.0 * t).ln()).abs() < 1e-12);
        }
        // |1 + 2t e^{i x0}| ~ 2t, so the growth is half of ln(t^2)
        for x0 in [0.0, 1.0, 2.5] {
            for t in [1e2, 1e4, 1e6] {
                let pt = e_zero_trajectory(1.0, c(x0, 0.0), Branch::Plus, t).unwrap();
                assert!((pt.x.im - 0.5 * (t * t).ln() - 2f64.ln()).abs() < 0.1);
            }
        }
        assert!(matches!(
            e_zero_trajectory(1.0, c(0.0, 0.0), Branch::Minus, 0.5),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn canonical_round_trip() {
        let (x, p) = (c(1.0, 0.0), c(0.3, 0.1));
        let (th, pth) = canonical_map(1.0, x, p).unwrap();
        let (x2, p2) = canonical_map_inverse(1.0, th, pth).unwrap();
        assert!((x - x2).norm() < 1e-12 && (p - p2).norm() < 1e-12);
        let spec = HamiltonianSpec::single_exp(1.0, 0.0).unwrap();
        assert!((spec.energy(x, p) - pth * pth).norm() < 1e-13);
        assert!(canonical_map_inverse(1.0, c(std::f64::consts::FRAC_PI_2, 0.0), c(1.0, 0.0)).is_err());
    }
}

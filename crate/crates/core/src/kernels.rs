//! Bilocal kernels in closed form, and the sums they stand for.
//!
//! Positions `x, y` are real angles; the kernels are functions of `w = m e^{-ix}` and
//! `z = m e^{iy}`. Where a closed form has a removable singularity it is evaluated through
//! an entire series (`J_nu(u) / u^nu`), so there is nothing to special-case.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::specfun::{
    bessel_i, bessel_j, bessel_j_poly, bessel_j_reduced, gamma_real, neumann_a, neumann_a_poly,
    SeriesControl,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

fn i() -> Complex64 {
    Complex64::i()
}

fn cis(a: f64) -> Complex64 {
    Complex64::from_polar(1.0, a)
}

/// Kernel values sampled on a rectangular grid, `values[i][j]` at `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    x_samples: Vec<f64>,
    y_samples: Vec<f64>,
    values: Vec<Vec<Complex64>>,
}

impl KernelGrid {
    pub fn new(x_samples: Vec<f64>, y_samples: Vec<f64>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if values.len() != x_samples.len() || values.iter().any(|row| row.len() != y_samples.len()) {
            return Err(Error::InvalidParameter("kernel grid dimensions disagree".into()));
        }
        if values.iter().flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("kernel grid holds non-finite values".into()));
        }
        Ok(Self {
            x_samples,
            y_samples,
            values,
        })
    }

    /// Fills a grid by evaluating `f(x, y)` at every point.
    pub fn sample<F>(xs: &[f64], ys: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<Complex64>,
    {
        let values = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| f(x, y)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(xs.to_vec(), ys.to_vec(), values)
    }

    pub fn x_samples(&self) -> &[f64] {
        &self.x_samples
    }
    pub fn y_samples(&self) -> &[f64] {
        &self.y_samples
    }
    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.x_samples.len(), self.y_samples.len())
    }

    /// Largest pointwise difference to another grid of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::InvalidParameter("grid shapes differ".into()));
        }
        Ok(self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// CSV with header `x,y,re,im`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,re,im\n");
        for (x, row) in self.x_samples.iter().zip(&self.values) {
            for (y, v) in self.y_samples.iter().zip(row) {
                let _ = writeln!(out, "{x:.16e},{y:.16e},{:.16e},{:.16e}", v.re, v.im);
            }
        }
        out
    }

    /// JSON sidecar describing the CSV.
    pub fn sidecar(&self, kernel: &str, params: serde_json::Value) -> serde_json::Value {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            kernel: &'a str,
            params: serde_json::Value,
            grid_shape: [usize; 2],
        }
        let (nx, ny) = self.shape();
        serde_json::to_value(Sidecar {
            kernel,
            params,
            grid_shape: [nx, ny],
        })
        .unwrap_or(serde_json::Value::Null)
    }
}

/// `n` equispaced angles on `[0, 2 pi)`.
pub fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

fn difference(m: f64, x: f64, y: f64) -> Complex64 {
    m * (cis(-x) - cis(y))
}

/// `J_0(m e^{-ix} - m e^{iy})`.
pub fn norm_kernel_j(m: f64, x: f64, y: f64) -> Result<Complex64> {
    bessel_j(0.0, difference(m, x, y), ctl())
}

/// `m J_1(m e^{-ix} - m e^{iy}) / (e^{-iy} - e^{ix})`, finite everywhere.
pub fn ham_kernel_h(m: f64, x: f64, y: f64) -> Result<Complex64> {
    let u = difference(m, x, y);
    Ok(m * m * cis(y - x) * bessel_j_reduced(1.0, 0, u, ctl())?)
}

fn check_flux(nu: f64) -> Result<()> {
    if nu < 0.0 && nu == nu.round() {
        return Err(Error::ExcludedFlux(nu));
    }
    Ok(())
}

/// `J_nu(w - z) / (w - z)^nu` with `w = m e^{-ix}`, `z = m e^{iy}`.
pub fn norm_kernel_j_nu(m: f64, nu: f64, x: f64, y: f64) -> Result<Complex64> {
    check_flux(nu)?;
    bessel_j_reduced(nu, 0, difference(m, x, y), ctl())
}

/// Hamiltonian kernel on the magnetic dual space.
pub fn ham_kernel_h_nu(m: f64, nu: f64, x: f64, y: f64) -> Result<Complex64> {
    check_flux(nu)?;
    let u = difference(m, x, y);
    let j = bessel_j_reduced(nu, 0, u, ctl())?;
    let j1 = bessel_j_reduced(nu + 1.0, 0, u, ctl())?;
    Ok(nu * nu * j + (1.0 + 2.0 * nu) * m * m * cis(y - x) * j1)
}

/// Squared normalization `Z_n^2` that turns the magnetic basis into the addition theorem.
pub fn magnetic_norm_sq(nu: f64, n: usize) -> Result<f64> {
    check_flux(nu)?;
    let nf = n as f64;
    let lead = (4.0 * PI).sqrt() / (2f64.powf(nu) * gamma_real(nu + 0.5)?);
    let body = if n == 0 {
        // nu Gamma(2 nu) = Gamma(2 nu + 1) / 2
        gamma_real(2.0 * nu + 1.0)? / 2.0
    } else {
        (nu + nf) * gamma_real(2.0 * nu + nf)? / crate::specfun::factorial(n as u32)
    };
    Ok(lead * body)
}

/// `sum_{n<=n_max} Z_n^2 f(n) w^{-nu} J_{nu+n}(w) z^{-nu} J_{nu+n}(z)`.
pub fn magnetic_bilinear_sum<F>(m: f64, nu: f64, x: f64, y: f64, n_max: usize, f: F) -> Result<Complex64>
where
    F: Fn(usize) -> f64,
{
    let w = m * cis(-x);
    let z = m * cis(y);
    let mut sum = ZERO;
    for n in 0..=n_max {
        let a = bessel_j_reduced(nu, n as u32, w, ctl())?;
        let b = bessel_j_reduced(nu, n as u32, z, ctl())?;
        sum += magnetic_norm_sq(nu, n)? * f(n) * a * b;
    }
    Ok(sum)
}

/// `sum_{n<=n_max} eps_n f(n) J_n(m e^{-ix}) J_n(m e^{iy})` with `eps_0 = 1`, `eps_n = 2`.
pub fn bessel_bilinear_sum<F>(m: f64, x: f64, y: f64, n_max: usize, f: F) -> Result<Complex64>
where
    F: Fn(usize) -> f64,
{
    let w = m * cis(-x);
    let z = m * cis(y);
    let mut sum = ZERO;
    for n in 0..=n_max {
        let eps = if n == 0 { 1.0 } else { 2.0 };
        sum += eps * f(n) * bessel_j(n as f64, w, ctl())? * bessel_j(n as f64, z, ctl())?;
    }
    Ok(sum)
}

/// `exp[(m/2)(e^{i(y-x)}/s - s e^{-i(x+y)} - s e^{i(x+y)})]`.
pub fn simple_kernel_k(m: f64, s: Complex64, x: f64, y: f64) -> Result<Complex64> {
    if s == ZERO {
        return Err(Error::InvalidParameter("s must be nonzero".into()));
    }
    let e = cis(y - x) / s - s * cis(-x - y) - s * cis(x + y);
    Ok((m / 2.0 * e).exp())
}

/// The fully symmetric kernel `exp[(im/2)(e^{i(x+y-z)} + e^{i(x-y+z)} + e^{i(-x+y+z)})]`.
pub fn symmetric_kernel_s(m: f64, x: f64, y: f64, z: f64) -> Complex64 {
    let e = cis(x + y - z) + cis(x - y + z) + cis(-x + y + z);
    (i() * m / 2.0 * e).exp()
}

/// Trapezoid version of `(1/2pi) ((-1)^n / I_n(ms)) int K(x,y;s) J_n(m e^{iy}) dy`,
/// which should reproduce `J_n(m e^{-ix})`.
pub fn jtojstar_transform(m: f64, s: f64, n: u32, x: f64, points: usize) -> Result<Complex64> {
    if points < 256 {
        return Err(Error::InvalidParameter("quadrature needs at least 256 points".into()));
    }
    let sc = Complex64::new(s, 0.0);
    let mut acc = ZERO;
    for y in periodic_grid(points) {
        acc += simple_kernel_k(m, sc, x, y)? * bessel_j(n as f64, m * cis(y), ctl())?;
    }
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign * acc / (points as f64 * bessel_i(n as f64, Complex64::new(m * s, 0.0), ctl())?))
}

/// Trapezoid version of `(1 / 2 pi i^n) int S(x,y,z) J_n(m e^{iz}) dz`,
/// which should equal `J_n(m e^{ix}) J_n(m e^{iy})`.
pub fn trilinear_transform(m: f64, n: u32, x: f64, y: f64, points: usize) -> Result<Complex64> {
    let mut acc = ZERO;
    for z in periodic_grid(points) {
        acc += symmetric_kernel_s(m, x, y, z) * bessel_j(n as f64, m * cis(z), ctl())?;
    }
    Ok(acc / (points as f64 * i().powu(n)))
}

/// Partial sum `sum_{n<=N} J_n(z) e^{in theta}` of the chiral kernel.
pub fn chiral_s(z: Complex64, theta: Complex64, terms: usize) -> Result<Complex64> {
    let q = (i() * theta).exp();
    let mut sum = ZERO;
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 0..=terms {
        sum += bessel_j(n as f64, z, ctl())? * qn;
        qn *= q;
    }
    Ok(sum)
}

/// The chiral kernel from its contour integral over `|t| = R`.
pub fn chiral_s_contour(z: Complex64, theta: Complex64, radius: f64, points: usize) -> Result<Complex64> {
    let pole = (i() * theta).exp();
    let distance = (radius - pole.norm()).abs();
    if distance < 1e-6 {
        return Err(Error::PoleProximity { distance });
    }
    if pole.norm() > radius || radius <= 1.0 {
        return Err(Error::Region(format!(
            "contour radius {radius} must exceed 1 and |e^(i theta)| = {}",
            pole.norm()
        )));
    }
    let mut acc = ZERO;
    for phi in periodic_grid(points) {
        let t = radius * cis(phi);
        acc += (z * (t - 1.0 / t) / 2.0).exp() * t / (t - pole);
    }
    Ok(acc / points as f64)
}

/// `e^{id}(1 + e^{id}) / (1 - e^{id})^3`, the free chiral Hamiltonian kernel at `d = theta - theta'`.
pub fn free_chiral_kernel(dtheta: Complex64) -> Result<Complex64> {
    if dtheta.im <= 0.0 {
        return Err(Error::Region(
            "the free chiral kernel is a distribution for Im d <= 0; evaluate at Im d > 0".into(),
        ));
    }
    let q = (i() * dtheta).exp();
    Ok(q * (1.0 + q) / (1.0 - q).powu(3))
}

/// `sum_{n<=N} n^2 e^{ind}`.
pub fn free_chiral_series(dtheta: Complex64, terms: usize) -> Complex64 {
    let q = (i() * dtheta).exp();
    (1..=terms).map(|n| (n * n) as f64 * q.powu(n as u32)).sum()
}

/// Closed form of `(H - H_free) S^{-1}` built from `2nz` (odd `n`) and `2z^2` (every even `n`).
pub fn chiral_inverse_defect_closed(z: Complex64, theta: Complex64) -> Complex64 {
    let q = (-i() * theta).exp();
    let q2 = q * q;
    (2.0 * z * q * (1.0 + q2) + 2.0 * z * z * (1.0 - q2)) / (1.0 - q2).powu(2)
}

/// `sum_{n<=N} e^{-in theta} (H - n^2) A_n(z)` with `H = (z d/dz)^2 + z^2` applied to
/// each polynomial term by term.
///
/// `A_n` has integer coefficients of size `n! 2^n`, so the operator is applied in exact
/// integer arithmetic; in floating point the cancellation would swamp the result.
pub fn chiral_inverse_defect_series(z: Complex64, theta: Complex64, terms: usize) -> Result<Complex64> {
    if z == ZERO {
        return Err(Error::ZeroArgument("chiral_inverse_defect_series"));
    }
    let q = (-i() * theta).exp();
    let mut sum = ZERO;
    for n in 0..=terms {
        let defect = neumann_defect(n as u32);
        let value: Complex64 = defect
            .iter()
            .map(|(p, c)| c.to_f64().unwrap_or(f64::INFINITY) * z.powi(*p as i32))
            .sum();
        sum += q.powu(n as u32) * value;
    }
    if !(sum.re.is_finite() && sum.im.is_finite()) {
        return Err(Error::NonConvergence { max_terms: terms });
    }
    Ok(sum)
}

/// Exact coefficients of `(H - n^2) A_n`, keyed by power of `z`.
fn neumann_defect(n: u32) -> BTreeMap<i64, BigInt> {
    let fact = |k: u32| -> BigInt { (1..=k).map(BigInt::from).product() };
    let mut a = BTreeMap::new();
    if n == 0 {
        a.insert(0i64, BigInt::from(1));
    } else {
        for k in 0..=n / 2 {
            let num = BigInt::from(n) * fact(n - k - 1) * (BigInt::from(1) << (n - 2 * k));
            a.insert(2 * k as i64 - n as i64, num / fact(k));
        }
    }
    let n_sq = BigInt::from(n) * n;
    let mut out: BTreeMap<i64, BigInt> = BTreeMap::new();
    for (p, c) in &a {
        *out.entry(*p).or_default() += c * (BigInt::from(p * p) - &n_sq);
        *out.entry(p + 2).or_default() += c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Matrix element `<J_k| S S^{-1} |J_n>` with `S^{-1}` cut at `n_max`:
/// `sum_j (1/2pi) int e^{i(k-j)theta} dtheta * <A_j, J_n>`.
pub fn chiral_inverse_pairing(n: usize, k: usize, n_max: usize) -> Complex64 {
    let points = 2 * n_max + 2;
    let jn = bessel_j_poly(n as u32, 1.0, 40);
    let mut total = ZERO;
    for j in 0..=n_max {
        let overlap: Complex64 = periodic_grid(points)
            .into_iter()
            .map(|t| cis((k as f64 - j as f64) * t))
            .sum::<Complex64>()
            / points as f64;
        if overlap.norm() < 1e-15 {
            continue;
        }
        total += overlap * neumann_a_poly(j as u32).pairing(&jn);
    }
    total
}

/// Partial sums `sum_{n<=N} J_n(w) A_n(z)` and `sum_{n<=N} n^2 J_n(w) A_n(z)`.
pub fn cauchy_kernels(w: Complex64, z: Complex64, terms: usize) -> Result<(Complex64, Complex64)> {
    if w.norm() >= z.norm() {
        return Err(Error::Region(format!(
            "need |w| < |z|, got |w| = {}, |z| = {}",
            w.norm(),
            z.norm()
        )));
    }
    let mut id = ZERO;
    let mut h = ZERO;
    for n in 0..=terms {
        let t = bessel_j(n as f64, w, ctl())? * neumann_a(n as i64, z)?;
        id += t;
        h += (n * n) as f64 * t;
    }
    Ok((id, h))
}

/// `z/(z-w)` and `2w^2 z/(z-w)^3 + wz/(z-w)^2 + w^2 z/(z-w)`.
pub fn cauchy_closed_forms(w: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let d = z - w;
    (z / d, 2.0 * w * w * z / d.powu(3) + w * z / d.powu(2) + w * w * z / d)
}

/// `exp int_0^{2pi} ln I_0(2m sin x) dx` by the trapezoid rule.
pub fn det_j(m: f64, points: usize) -> Result<f64> {
    if points < 128 {
        return Err(Error::InvalidParameter("quadrature needs at least 128 points".into()));
    }
    let mut acc = 0.0;
    for x in periodic_grid(points) {
        acc += bessel_i(0.0, Complex64::new(2.0 * m * x.sin(), 0.0), ctl())?.re.ln();
    }
    Ok((acc * 2.0 * PI / points as f64).exp())
}

/// Borel sum `(1+t^2) z int_0^inf e^{-u} / ((1-t^2) z - 2tu) du` of `sum t^n A_n(z)`,
/// by the trapezoid rule after `u = e^s`.
pub fn kapteyn_borel(t: Complex64, z: Complex64, points: usize) -> Result<Complex64> {
    if t == ZERO {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let a = (1.0 - t * t) * z;
    if (a / t).re >= 0.0 {
        return Err(Error::Region(format!(
            "Re((1 - t^2) z / t) = {} must be negative",
            (a / t).re
        )));
    }
    if points < 16 {
        return Err(Error::InvalidParameter("too few quadrature points".into()));
    }
    let (lo, hi) = (-40.0f64, 50f64.ln());
    let h = (hi - lo) / (points - 1) as f64;
    let mut acc = ZERO;
    for k in 0..points {
        let s = lo + h * k as f64;
        let u = s.exp();
        let w = if k == 0 || k == points - 1 { 0.5 } else { 1.0 };
        acc += w * u * (-u).exp() / (a - 2.0 * t * u);
    }
    Ok((1.0 + t * t) * z * acc * h)
}

/// `sum_{n<=K} t^n A_n(z)`.
pub fn kapteyn_partial_sum(t: Complex64, z: Complex64, order: usize) -> Result<Complex64> {
    (0..=order).map(|n| Ok(t.powu(n as u32) * neumann_a(n as i64, z)?)).sum()
}

/// Residuals of the plane-wave transforms of `J_n` and `A_n`.
///
/// Row 1 is the largest error of `(1/2pi) int e^{i m e^{ix} sin t} e^{-int} dt` against
/// `J_n(m e^{ix})` over 32 values of `x`; row 4 is the largest error of
/// `(1/2pi i) oint e^{iz sin t} A_n(z) dz/z` against `(eps_n/2)(e^{int} + (-1)^n e^{-int})`
/// over 32 values of `t`, on the contour chosen by [`plane_wave_radius`].
pub fn canonical_transform_checks(n: u32, m: f64, points: usize) -> Result<(f64, f64)> {
    if points < 256 {
        return Err(Error::InvalidParameter("quadrature needs at least 256 points".into()));
    }
    let mut row1: f64 = 0.0;
    for x in periodic_grid(32) {
        let z = m * cis(x);
        let q: Complex64 = periodic_grid(points)
            .into_iter()
            .map(|t| (i() * z * t.sin()).exp() * cis(-(n as f64) * t))
            .sum::<Complex64>()
            / points as f64;
        row1 = row1.max((q - bessel_j(n as f64, z, ctl())?).norm());
    }
    let radius = plane_wave_radius(n);
    let mut row4: f64 = 0.0;
    for t in periodic_grid(32) {
        row4 = row4.max(plane_wave_residual(n, radius, t, points)?);
    }
    Ok((row1, row4))
}

/// Contour radius for the row-4 integral. The integral does not depend on it, but on small
/// circles `A_n` is of size `n! (2/R)^n` and the quadrature loses that many digits to
/// cancellation; this picks the radius in `[1, n]` that minimises `e^R max |A_n|`.
pub fn plane_wave_radius(n: u32) -> f64 {
    let a = neumann_a_poly(n);
    let size = |r: f64| r.exp() * a.terms().map(|(p, c)| c.norm() * r.powi(p as i32)).sum::<f64>();
    (0..=4 * n.max(1))
        .map(|k| 1.0 + k as f64 * (n.max(1) as f64 - 1.0) / (4 * n.max(1)) as f64)
        .min_by(|x, y| size(*x).total_cmp(&size(*y)))
        .unwrap_or(1.0)
}

/// Row-4 residual at a single angle `theta`, integrating over `|z| = radius`.
pub fn plane_wave_residual(n: u32, radius: f64, theta: f64, points: usize) -> Result<f64> {
    if radius <= 0.0 {
        return Err(Error::InvalidParameter("contour radius must be positive".into()));
    }
    let mut acc = ZERO;
    for x in periodic_grid(points) {
        let z = radius * cis(x);
        acc += (i() * z * theta.sin()).exp() * neumann_a(n as i64, z)?;
    }
    acc /= points as f64;
    let nf = n as f64;
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    let eps = if n == 0 { 1.0 } else { 2.0 };
    let expect = eps / 2.0 * (cis(nf * theta) + sign * cis(-nf * theta));
    Ok((acc - expect).norm())
}

/// Values of `sum conj(c_n) A_n(m e^{ix}) / sqrt(eps_n)` on a periodic grid.
fn dual_samples(m: f64, coeffs: &[Complex64], xs: &[f64]) -> Result<Vec<Complex64>> {
    xs.iter()
        .map(|&x| {
            let z = m * cis(x);
            coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| {
                    let eps: f64 = if n == 0 { 1.0 } else { 2.0 };
                    Ok(c.conj() * neumann_a(n as i64, z)? / eps.sqrt())
                })
                .sum()
        })
        .collect()
}

fn double_quadrature<K>(m: f64, coeffs: &[Complex64], points: usize, kernel: K) -> Result<Complex64>
where
    K: Fn(f64, f64) -> Result<Complex64>,
{
    let xs = periodic_grid(points);
    let d = dual_samples(m, coeffs, &xs)?;
    let mut acc = ZERO;
    for (x, dx) in xs.iter().zip(&d) {
        let mut row = ZERO;
        for (y, dy) in xs.iter().zip(&d) {
            row += kernel(*x, *y)? * dy;
        }
        acc += dx.conj() * row;
    }
    Ok(acc / (points * points) as f64)
}

/// `|psi|^2` of `psi = sum c_n sqrt(eps_n) J_n(m e^{ix})` from the norm kernel.
pub fn norm_via_kernel(m: f64, coeffs: &[Complex64], points: usize) -> Result<Complex64> {
    double_quadrature(m, coeffs, points, |x, y| norm_kernel_j(m, x, y))
}

/// `<H>` of the same state from the Hamiltonian kernel.
pub fn energy_via_kernel(m: f64, coeffs: &[Complex64], points: usize) -> Result<Complex64> {
    let h = double_quadrature(m, coeffs, points, |x, y| ham_kernel_h(m, x, y))?;
    Ok(h / norm_via_kernel(m, coeffs, points)?)
}

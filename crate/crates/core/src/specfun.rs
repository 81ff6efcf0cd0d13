//! Ascending-series special functions on moderate complex arguments.
//!
//! Everything here is summed term by term. The arguments that show up in
//! periodic exponential potentials sit on circles of radius `m` of order one,
//! where the series converge in a few dozen terms.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;

/// Stopping rule for ascending series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 200,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || max_terms == 0 {
            return Err(Error::InvalidParameter(format!(
                "series control needs rel_tol > 0 and max_terms >= 1, got {rel_tol}, {max_terms}"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gamma function of a real argument (Lanczos, reflection below 1/2).
pub fn gamma_real(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma of {x}")));
    }
    if nonpositive_integer(x) {
        return Err(Error::Pole(format!("gamma at {x}")));
    }
    // exact factorials keep integer arguments free of Lanczos noise
    if x == x.round() && x <= 171.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma_real(1.0 - x)?));
    }
    let y = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (y + i as f64);
    }
    let t = y + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(y + 0.5) * (-t).exp() * acc)
}

/// n! as a float.
pub fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Sums `first + first*r(0) + first*r(0)*r(1) + ...` under the relative-tail rule.
fn ascending<F>(first: Complex64, ratio: F, ctl: SeriesControl) -> Result<Complex64>
where
    F: Fn(usize) -> Complex64,
{
    let mut sum = first;
    let mut term = first;
    let mut small = 0;
    for k in 0..ctl.max_terms {
        term *= ratio(k);
        sum += term;
        if term.norm() <= ctl.rel_tol * sum.norm() {
            small += 1;
            if small == 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        max_terms: ctl.max_terms,
    })
}

fn as_negative_integer(order: f64) -> Option<u32> {
    if order < 0.0 && order == order.round() {
        Some((-order) as u32)
    } else {
        None
    }
}

fn bessel_series(order: f64, z: Complex64, sign: f64, ctl: SeriesControl) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return if order == 0.0 {
            Ok(Complex64::new(1.0, 0.0))
        } else if order > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::Pole(format!("order {order} at zero argument")))
        };
    }
    let half = z / 2.0;
    let first = half.powf(order) / gamma_real(order + 1.0)?;
    let q = sign * half * half;
    ascending(
        first,
        |k| {
            let k = k as f64 + 1.0;
            q / (k * (k + order))
        },
        ctl,
    )
}

/// Bessel function of the first kind of real order, principal branch of `z^order`.
pub fn bessel_j(order: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    if let Some(n) = as_negative_integer(order) {
        let v = bessel_series(n as f64, z, -1.0, ctl)?;
        return Ok(if n % 2 == 1 { -v } else { v });
    }
    bessel_series(order, z, -1.0, ctl)
}

/// Modified Bessel function of the first kind of real order.
pub fn bessel_i(order: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    if let Some(n) = as_negative_integer(order) {
        return bessel_series(n as f64, z, 1.0, ctl);
    }
    bessel_series(order, z, 1.0, ctl)
}

fn reduced_series(
    shift: f64,
    n: u32,
    z: Complex64,
    sign: f64,
    ctl: SeriesControl,
) -> Result<Complex64> {
    let order = shift + n as f64;
    if nonpositive_integer(order + 1.0) {
        return Err(Error::ExcludedOrder(format!("{order}")));
    }
    let half = z / 2.0;
    let first = half.powu(n) / (2f64.powf(shift) * gamma_real(order + 1.0)?);
    if first == Complex64::new(0.0, 0.0) {
        return Ok(first);
    }
    let q = sign * half * half;
    ascending(
        first,
        |k| {
            let k = k as f64 + 1.0;
            q / (k * (k + order))
        },
        ctl,
    )
}

/// `z^(-shift) J_(shift+n)(z)`, an entire function of `z` with no branch cut.
pub fn bessel_j_reduced(shift: f64, n: u32, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    reduced_series(shift, n, z, -1.0, ctl)
}

/// `z^(-shift) I_(shift+n)(z)`, entire in `z`.
pub fn bessel_i_reduced(shift: f64, n: u32, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    reduced_series(shift, n, z, 1.0, ctl)
}

/// `z d/dz J_order(z)` summed term by term.
///
/// On the circle `z = m e^{ix}` this is `-i d/dx` of `J_order(m e^{ix})`.
pub fn bessel_j_euler(order: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    if let Some(n) = as_negative_integer(order) {
        let v = bessel_j_euler(n as f64, z, ctl)?;
        return Ok(if n % 2 == 1 { -v } else { v });
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let half = z / 2.0;
    let q = -half * half;
    let mut term = half.powf(order) / gamma_real(order + 1.0)?;
    let mut sum = term * order;
    let mut small = 0;
    for k in 0..ctl.max_terms {
        let kf = k as f64 + 1.0;
        term *= q / (kf * (kf + order));
        let t = term * (order + 2.0 * kf);
        sum += t;
        if t.norm() <= ctl.rel_tol * sum.norm() {
            small += 1;
            if small == 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        max_terms: ctl.max_terms,
    })
}

/// Neumann polynomial in `1/z`, with `A_{-n} = (-1)^n A_n`.
pub fn neumann_a(n: i64, z: Complex64) -> Result<Complex64> {
    let k = n.unsigned_abs();
    let sign = if n < 0 && k % 2 == 1 { -1.0 } else { 1.0 };
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroArgument("neumann_a"));
    }
    let half_sq = (z / 2.0) * (z / 2.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for j in 0..=(k / 2) {
        let c = factorial((k - j - 1) as u32) / factorial(j as u32);
        sum += pow * c;
        pow *= half_sq;
    }
    Ok(sign * k as f64 * (2.0 / z).powu(k as u32) * sum)
}

/// Neumann polynomial `A_n` as a Laurent polynomial in its argument.
pub fn neumann_a_poly(n: u32) -> LaurentPoly {
    if n == 0 {
        return LaurentPoly::monomial(0, Complex64::new(1.0, 0.0));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n as usize + 1];
    for k in 0..=(n / 2) {
        let c = n as f64 * factorial(n - k - 1) / factorial(k) * 2f64.powi(n as i32 - 2 * k as i32);
        coeffs[2 * k as usize] = Complex64::new(c, 0.0);
    }
    LaurentPoly::new(-(n as i64), coeffs)
}

/// Ascending series of `J_n(m z)` in `z`, cut after `terms` nonzero terms.
pub fn bessel_j_poly(n: u32, m: f64, terms: usize) -> LaurentPoly {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * terms.max(1) - 1];
    let half = m / 2.0;
    for l in 0..terms {
        let sign = if l % 2 == 1 { -1.0 } else { 1.0 };
        let c = sign * half.powi((n as usize + 2 * l) as i32) / (factorial(l as u32) * factorial(n + l as u32));
        coeffs[2 * l] = Complex64::new(c, 0.0);
    }
    LaurentPoly::new(n as i64, coeffs)
}

/// Gegenbauer's generalized Neumann polynomial `A_{n,nu}(w)`.
pub fn gegenbauer_a(n: u32, nu: f64, w: Complex64) -> Result<Complex64> {
    if nu < 0.0 && nu == nu.round() {
        return Err(Error::ExcludedOrder(format!("nu = {nu}")));
    }
    if w == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroArgument("gegenbauer_a"));
    }
    let s = nu + n as f64;
    // (s) Gamma(s - k) written as Gamma(s + 1) / ((s - 1)...(s - k))
    let half_sq = (w / 2.0) * (w / 2.0);
    let mut term = Complex64::new(gamma_real(s + 1.0)?, 0.0);
    let mut sum = term;
    for k in 1..=(n / 2) {
        let kf = k as f64;
        term *= half_sq / (kf * (s - kf));
        sum += term;
    }
    Ok(2f64.powf(s) * sum / w.powu(n + 1))
}

/// Gegenbauer polynomial `C_n^nu(z)` by its three-term recurrence.
pub fn gegenbauer_c(n: u32, nu: f64, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * nu * z;
    for k in 2..=n {
        let kf = k as f64;
        let next = (2.0 * z * (kf + nu - 1.0) * cur - (kf + 2.0 * nu - 2.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Kummer's confluent hypergeometric function `M(a, b, z)`.
pub fn kummer_m(a: f64, b: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    kummer_m_complex(Complex64::new(a, 0.0), b, z, ctl)
}

/// `M(a, b, z)` for complex `a`, needed once the couplings are complex.
pub fn kummer_m_complex(a: Complex64, b: f64, z: Complex64, ctl: SeriesControl) -> Result<Complex64> {
    if nonpositive_integer(b) {
        return Err(Error::Pole(format!("Kummer M with b = {b}")));
    }
    let one = Complex64::new(1.0, 0.0);
    if a == Complex64::new(0.0, 0.0) || z == Complex64::new(0.0, 0.0) {
        return Ok(one);
    }
    if a.im == 0.0 && nonpositive_integer(a.re) {
        // terminating polynomial
        let mut term = one;
        let mut sum = one;
        for k in 0..(-a.re) as usize {
            let kf = k as f64;
            term *= z * (a + kf) / ((b + kf) * (kf + 1.0));
            sum += term;
        }
        return Ok(sum);
    }
    ascending(
        one,
        |k| {
            let k = k as f64;
            z * (a + k) / ((b + k) * (k + 1.0))
        },
        ctl,
    )
}

/// Which power of `z` to expand in Bessel functions or Neumann polynomials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerExpansion {
    /// `1 = J_0 + 2 sum J_{2n}`
    Unity,
    /// `z^k` for integer `k >= 0`
    PosPower(u32),
    /// `z^{-2j}` as a finite sum of even Neumann polynomials
    NegEvenPower(u32),
    /// `z^{-(2j-1)}` as a finite sum of odd Neumann polynomials, `j >= 1`
    NegOddPower(u32),
    /// `z^mu` for real `mu` not a negative integer
    NonIntegerPower(f64),
}

/// Partial sum of a power expansion. `terms` counts Bessel terms; the
/// negative-power cases are exact finite sums and ignore it.
pub fn power_expansions(
    kind: PowerExpansion,
    z: Complex64,
    terms: usize,
    ctl: SeriesControl,
) -> Result<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        PowerExpansion::Unity => power_expansions(PowerExpansion::PosPower(0), z, terms, ctl),
        PowerExpansion::PosPower(k) => {
            let mut sum = zero;
            for n in 0..terms as u32 {
                let order = k + 2 * n;
                let coef = if k == 0 {
                    if n == 0 {
                        1.0
                    } else {
                        2.0
                    }
                } else {
                    2f64.powi(k as i32) * order as f64 * factorial(k + n - 1) / factorial(n)
                };
                sum += coef * bessel_j(order as f64, z, ctl)?;
            }
            Ok(sum)
        }
        PowerExpansion::NegEvenPower(j) => {
            if z == zero {
                return Err(Error::ZeroArgument("negative power expansion"));
            }
            let mut sum = zero;
            for k in 0..=j {
                let sign = if (j - k) % 2 == 1 { -1.0 } else { 1.0 };
                let denom = factorial(j - k) * factorial(j + k);
                sum += sign * neumann_a(2 * k as i64, z)? / denom;
            }
            Ok(sum / 2f64.powi(2 * j as i32))
        }
        PowerExpansion::NegOddPower(j) => {
            if j == 0 {
                return Err(Error::InvalidExpansion("odd negative power needs j >= 1".into()));
            }
            if z == zero {
                return Err(Error::ZeroArgument("negative power expansion"));
            }
            let mut sum = zero;
            for k in 1..=j {
                let sign = if (j - k) % 2 == 1 { -1.0 } else { 1.0 };
                let denom = factorial(j - k) * factorial(j - 1 + k);
                sum += sign * neumann_a(2 * k as i64 - 1, z)? / denom;
            }
            Ok(sum / 2f64.powi(2 * j as i32 - 1))
        }
        PowerExpansion::NonIntegerPower(mu) => {
            if mu < 0.0 && mu == mu.round() {
                return Err(Error::InvalidExpansion(format!("power {mu} is a negative integer")));
            }
            let scale = 2f64.powf(mu);
            let mut sum = zero;
            for n in 0..terms {
                let nf = n as f64;
                let coef = if n == 0 {
                    gamma_real(mu + 1.0)?
                } else {
                    (mu + 2.0 * nf) * gamma_real(mu + nf)? / factorial(n as u32)
                };
                sum += scale * coef * bessel_j(mu + 2.0 * nf, z, ctl)?;
            }
            Ok(sum)
        }
    }
}

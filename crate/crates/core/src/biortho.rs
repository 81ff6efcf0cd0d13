//! Eigenfunctions, dual Laurent polynomials and their pairing.
//!
//! Right sector: `psi_n = z^n (1 + a_1 z + ...)` and `chi_n = z^{-n} (1 + c_1 z + ... + c_n z^n)`
//! with `z = e^{ix}` and energies `(nu + n)^2`. The duals solve `(H~ - E_n) chi_n = positive
//! powers only`, where `H~` carries flux `-nu`, which is what makes `<chi_k, psi_n> = delta`.
//!
//! Left sector: `psi_{-n} = z^{-n} (1 + a_1 z + ...)` with energies `(nu - n)^2`, paired with
//! truncated eigenfunctions of `H~` that start at `z^n`. Only available when `2 nu` is not an
//! integer.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::kernels::KernelGrid;
use crate::laurent::LaurentPoly;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const DENOM_EPS: f64 = 1e-12;
const TAIL_WARN: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Right,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenMethod {
    Triangular,
    #[default]
    Frobenius,
}

/// Energy of level `n` in a sector.
pub fn energy(spec: &HamiltonianSpec, n: usize, sector: Sector) -> f64 {
    match sector {
        Sector::Right => (spec.nu() + n as f64).powi(2),
        Sector::Left => (spec.nu() - n as f64).powi(2),
    }
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

fn check_sector(spec: &HamiltonianSpec, sector: Sector) -> Result<()> {
    let nu = spec.nu();
    match sector {
        Sector::Right if nu < 0.0 && is_integer(nu) => Err(Error::ExcludedFlux(nu)),
        Sector::Left if is_integer(2.0 * nu) => Err(Error::ExceptionalPoint(format!(
            "left sector with 2 nu = {} an integer: levels meld or become degenerate",
            2.0 * nu
        ))),
        _ => Ok(()),
    }
}

/// Power series `sum_j s_j z^j`, `s_0 = 1`, with `s_j = -sum_k mu_k s_{j-k} / (j (shift + j))`.
///
/// This is the recursion of an eigenfunction `z^q sum s_j z^j` of `(-i d/dx + f)^2 + V`
/// with `shift = 2 (q + f)`.
fn frobenius_series(spec: &HamiltonianSpec, shift: f64, len: usize) -> Result<Vec<Complex64>> {
    let mut s = vec![ZERO; len + 1];
    s[0] = ONE;
    for j in 1..=len {
        let d = j as f64 * (shift + j as f64);
        if d.abs() < DENOM_EPS {
            return Err(Error::ExceptionalPoint(format!(
                "vanishing recursion denominator at order {j} (shift {shift})"
            )));
        }
        let acc: Complex64 = spec
            .mu()
            .iter()
            .filter(|(k, _)| **k as usize <= j)
            .map(|(k, mu)| mu * s[j - *k as usize])
            .sum();
        s[j] = -acc / d;
    }
    Ok(s)
}

/// Dual function for level `n`, normalized so its lowest coefficient is 1.
///
/// `trunc` is only used in the left sector, where the dual is an infinite series.
pub fn build_dual(spec: &HamiltonianSpec, n: usize, sector: Sector, trunc: usize) -> Result<LaurentPoly> {
    check_sector(spec, sector)?;
    let nu = spec.nu();
    match sector {
        Sector::Right => {
            let mut c = vec![ZERO; n + 1];
            c[0] = ONE;
            for k in 1..=n {
                let d = k as f64 * (2.0 * n as f64 + 2.0 * nu - k as f64);
                if d.abs() < DENOM_EPS {
                    return Err(Error::ExceptionalPoint(format!(
                        "dual of level {n}: denominator vanishes at k = {k} for nu = {nu}"
                    )));
                }
                let acc: Complex64 = spec
                    .mu()
                    .iter()
                    .filter(|(m, _)| **m as usize <= k)
                    .map(|(m, mu)| mu * c[k - *m as usize])
                    .sum();
                c[k] = acc / d;
            }
            Ok(LaurentPoly::new(-(n as i64), c))
        }
        Sector::Left => {
            let s = frobenius_series(spec, 2.0 * (n as f64 - nu), trunc)?;
            Ok(LaurentPoly::new(n as i64, s))
        }
    }
}

/// The right-hand side `sum_k gamma_k z^k` of `(H~ - E_n) chi_n`.
pub fn gamma_inhomogeneity(
    spec: &HamiltonianSpec,
    n: usize,
    sector: Sector,
    trunc: usize,
) -> Result<BTreeMap<u32, Complex64>> {
    let chi = build_dual(spec, n, sector, trunc)?;
    let mut out = BTreeMap::new();
    match sector {
        Sector::Right => {
            for k in 1..=spec.max_order() as i64 {
                let g: Complex64 = (0..=n)
                    .map(|j| spec.coupling((k + n as i64 - j as i64) as u32) * chi.coeff(j as i64 - n as i64))
                    .sum();
                if g != ZERO {
                    out.insert(k as u32, g);
                }
            }
        }
        Sector::Left => {
            let e = energy(spec, n, sector);
            let r = &apply_hamiltonian(spec, &chi, true) - &chi.scale(Complex64::new(e, 0.0));
            for (p, c) in r.terms().filter(|(p, _)| *p > chi.max_power()) {
                if c != ZERO {
                    out.insert(p as u32, c);
                }
            }
        }
    }
    Ok(out)
}

/// Eigenfunction of level `n`, keeping powers up to `N = trunc` above the leading one.
pub fn build_eigenfunction(
    spec: &HamiltonianSpec,
    n: usize,
    trunc: usize,
    sector: Sector,
    method: EigenMethod,
) -> Result<LaurentPoly> {
    check_sector(spec, sector)?;
    match (sector, method) {
        (Sector::Right, EigenMethod::Frobenius) => {
            let a = frobenius_series(spec, 2.0 * (n as f64 + spec.nu()), trunc)?;
            Ok(LaurentPoly::new(n as i64, a))
        }
        (Sector::Right, EigenMethod::Triangular) => {
            let duals = (n + 1..=n + trunc)
                .map(|k| build_dual(spec, k, sector, 0))
                .collect::<Result<Vec<_>>>()?;
            Ok(triangular(n, trunc, |k| &duals[k - n - 1]))
        }
        (Sector::Left, EigenMethod::Frobenius) => {
            let a = frobenius_series(spec, 2.0 * (spec.nu() - n as f64), trunc)?;
            Ok(LaurentPoly::new(-(n as i64), a))
        }
        (Sector::Left, EigenMethod::Triangular) => Err(Error::Unsupported(
            "the triangular eigenfunction solve is defined for the right sector only".into(),
        )),
    }
}

/// Solves `<chi_k, psi_n> = 0` for `k = n+1 ..= n+trunc`, one new coefficient per equation.
fn triangular<'a, F>(n: usize, trunc: usize, dual: F) -> LaurentPoly
where
    F: Fn(usize) -> &'a LaurentPoly,
{
    let mut a = vec![ZERO; trunc + 1];
    a[0] = ONE;
    for r in 1..=trunc {
        let chi = dual(n + r);
        // chi_{n+r} = z^{-(n+r)} sum c_i z^i, pairing picks c_{r-j} a_j
        let acc: Complex64 = (0..r)
            .map(|j| chi.coeff((r - j) as i64 - (n + r) as i64) * a[j])
            .sum();
        a[r] = -acc / chi.coeff(-((n + r) as i64));
    }
    LaurentPoly::new(n as i64, a)
}

/// `H f`, or `H~ f` (flux `-nu`) when `conjugate_flux` is set.
pub fn apply_hamiltonian(spec: &HamiltonianSpec, f: &LaurentPoly, conjugate_flux: bool) -> LaurentPoly {
    if f.is_zero() {
        return LaurentPoly::zero();
    }
    let flux = if conjugate_flux { -spec.nu() } else { spec.nu() };
    let lo = f.min_power();
    let hi = f.max_power() + spec.max_order() as i64;
    let mut out = vec![ZERO; (hi - lo + 1) as usize];
    for (p, c) in f.terms() {
        let idx = (p - lo) as usize;
        out[idx] += c * (p as f64 + flux).powi(2);
        for (k, mu) in spec.mu() {
            out[idx + *k as usize] += mu * c;
        }
    }
    LaurentPoly::new(lo, out)
}

/// Mean over a period of `chi * psi`, i.e. the constant coefficient of the product.
pub fn pairing(chi: &LaurentPoly, psi: &LaurentPoly) -> Complex64 {
    chi.pairing(psi)
}

fn samples_on_grid(f: &LaurentPoly, p: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let mut buf = vec![ZERO; p];
    for (pow, c) in f.terms() {
        buf[pow.rem_euclid(p as i64) as usize] += c;
    }
    planner.plan_fft_inverse(p).process(&mut buf);
    buf
}

/// The same pairing by FFT sampling on `bandwidth + 1` equispaced points.
pub fn pairing_fft(chi: &LaurentPoly, psi: &LaurentPoly) -> Complex64 {
    if chi.is_zero() || psi.is_zero() {
        return ZERO;
    }
    let lo = chi.min_power() + psi.min_power();
    let hi = chi.max_power() + psi.max_power();
    let p = (hi - lo + 1).max(1) as usize;
    let mut planner = FftPlanner::new();
    let a = samples_on_grid(chi, p, &mut planner);
    let b = samples_on_grid(psi, p, &mut planner);
    a.iter().zip(&b).map(|(x, y)| x * y).sum::<Complex64>() / p as f64
}

/// Fourier coefficients for powers `lo..=hi` of a function sampled at `x_k = 2 pi k / P`.
pub fn laurent_from_samples(values: &[Complex64], lo: i64, hi: i64) -> Result<LaurentPoly> {
    let p = values.len();
    if p == 0 || hi < lo || (hi - lo + 1) as usize > p {
        return Err(Error::InvalidParameter(format!(
            "{p} samples cannot resolve powers {lo}..={hi}"
        )));
    }
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(p).process(&mut buf);
    let coeffs = (lo..=hi)
        .map(|q| buf[q.rem_euclid(p as i64) as usize] / p as f64)
        .collect();
    Ok(LaurentPoly::new(lo, coeffs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub sector: Sector,
    pub n_max: usize,
    pub trunc: usize,
    pub method: EigenMethod,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            sector: Sector::Right,
            n_max: 15,
            trunc: 60,
            method: EigenMethod::Frobenius,
        }
    }
}

/// Non-fatal findings during a build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuildWarning {
    /// The last retained coefficients of `psi_n` are not negligible.
    TruncationTail { n: usize, ratio: f64 },
}

/// Eigen-equation residuals of a system, relative to each `psi_n`'s largest coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenResidual {
    /// Over the retained powers.
    pub retained: f64,
    /// Over the powers produced only by the truncated tail.
    pub tail: f64,
}

/// Eigenfunctions, duals and energies for levels `0..=n_max` of one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiorthogonalSystem {
    spec: HamiltonianSpec,
    sector: Sector,
    n_max: usize,
    trunc: usize,
    psi: Vec<LaurentPoly>,
    chi: Vec<LaurentPoly>,
    energies: Vec<f64>,
    #[serde(default)]
    warnings: Vec<BuildWarning>,
}

impl BiorthogonalSystem {
    pub fn build(spec: &HamiltonianSpec, opts: BuildOptions) -> Result<Self> {
        check_sector(spec, opts.sector)?;
        let BuildOptions {
            sector,
            n_max,
            trunc,
            method,
        } = opts;
        let chi = (0..=n_max)
            .map(|n| build_dual(spec, n, sector, trunc))
            .collect::<Result<Vec<_>>>()?;
        let psi = match (sector, method) {
            (Sector::Right, EigenMethod::Triangular) => {
                let extra = (n_max + 1..=n_max + trunc)
                    .map(|k| build_dual(spec, k, sector, 0))
                    .collect::<Result<Vec<_>>>()?;
                let lookup = |k: usize| if k <= n_max { &chi[k] } else { &extra[k - n_max - 1] };
                (0..=n_max).map(|n| triangular(n, trunc, lookup)).collect()
            }
            _ => (0..=n_max)
                .map(|n| build_eigenfunction(spec, n, trunc, sector, method))
                .collect::<Result<Vec<_>>>()?,
        };
        let energies = (0..=n_max).map(|n| energy(spec, n, sector)).collect();
        let mut sys = Self {
            spec: spec.clone(),
            sector,
            n_max,
            trunc,
            psi,
            chi,
            energies,
            warnings: Vec::new(),
        };
        sys.warnings = sys.tail_warnings();
        Ok(sys)
    }

    fn tail_warnings(&self) -> Vec<BuildWarning> {
        let width = self.spec.max_order().max(1) as usize;
        self.psi
            .iter()
            .enumerate()
            .filter_map(|(n, psi)| {
                let top = self.top_power(n);
                let tail = (0..width as i64)
                    .map(|d| psi.coeff(top - d).norm())
                    .fold(0.0, f64::max);
                let ratio = tail / psi.sup_norm();
                (ratio > TAIL_WARN).then_some(BuildWarning::TruncationTail { n, ratio })
            })
            .collect()
    }

    /// Highest retained power of `psi_n`.
    fn top_power(&self, n: usize) -> i64 {
        let lead = match self.sector {
            Sector::Right => n as i64,
            Sector::Left => -(n as i64),
        };
        lead + self.trunc as i64
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }
    pub fn sector(&self) -> Sector {
        self.sector
    }
    pub fn n_max(&self) -> usize {
        self.n_max
    }
    pub fn trunc(&self) -> usize {
        self.trunc
    }
    pub fn psi(&self) -> &[LaurentPoly] {
        &self.psi
    }
    pub fn chi(&self) -> &[LaurentPoly] {
        &self.chi
    }
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
    pub fn warnings(&self) -> &[BuildWarning] {
        &self.warnings
    }

    /// Same system with `psi_n -> s_n psi_n` and `chi_n -> chi_n / s_n`.
    pub fn rescaled(&self, scales: &[Complex64]) -> Result<Self> {
        if scales.len() != self.psi.len() || scales.iter().any(|s| *s == ZERO) {
            return Err(Error::InvalidParameter(
                "need one nonzero scale per level".into(),
            ));
        }
        let mut out = self.clone();
        for (n, s) in scales.iter().enumerate() {
            out.psi[n] = self.psi[n].scale(*s);
            out.chi[n] = self.chi[n].scale(1.0 / s);
        }
        Ok(out)
    }

    /// `max |<chi_k, psi_n> - delta_kn|`.
    pub fn biorthonormality_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, chi) in self.chi.iter().enumerate() {
            for (n, psi) in self.psi.iter().enumerate() {
                let target = if k == n { ONE } else { ZERO };
                worst = worst.max((pairing(chi, psi) - target).norm());
            }
        }
        worst
    }

    pub fn eigen_residual(&self) -> EigenResidual {
        let mut res = EigenResidual {
            retained: 0.0,
            tail: 0.0,
        };
        for (n, psi) in self.psi.iter().enumerate() {
            let scale = psi.sup_norm();
            let r = &apply_hamiltonian(&self.spec, psi, false)
                - &psi.scale(Complex64::new(self.energies[n], 0.0));
            let top = self.top_power(n);
            for (p, c) in r.terms() {
                let v = c.norm() / scale;
                if p <= top {
                    res.retained = res.retained.max(v);
                } else {
                    res.tail = res.tail.max(v);
                }
            }
        }
        res
    }

    /// Expansion coefficients of `f` and the sup-norm of what they fail to reconstruct.
    pub fn expand(&self, f: &LaurentPoly) -> (StateVector<'_>, f64) {
        let coeffs: Vec<Complex64> = self.chi.iter().map(|chi| pairing(chi, f)).collect();
        let state = StateVector {
            system: self,
            coeffs,
        };
        let residual = (f - &state.wavefunction()).sup_norm();
        (state, residual)
    }

    pub fn state(&self, coeffs: Vec<Complex64>) -> Result<StateVector<'_>> {
        StateVector::new(self, coeffs)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sys: Self = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        let len = sys.n_max + 1;
        if sys.psi.len() != len || sys.chi.len() != len || sys.energies.len() != len {
            return Err(Error::Format(format!(
                "system lists must have n_max + 1 = {len} entries"
            )));
        }
        Ok(sys)
    }
}

/// Which products of basis functions make up a bilocal kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// `sum f_n L_n(x) psi_n(y)` with `L_n` = `psi_n` (conjugated when asked)
    J,
    /// `sum f_n L_n(x) chi_n(y)` with `L_n` = `chi_n` (conjugated when asked)
    K,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilocalKernel {
    pub grid: KernelGrid,
    /// Largest last-term magnitude relative to the partial sum, over the grid.
    pub tail_ratio: f64,
    /// Set when the tail ratio fails the `1e-8` Cauchy test.
    pub divergent: bool,
}

/// `sum_n weight(n, E_n) L_n(x) R_n(y)` on a grid.
pub fn assemble_bilocal<W>(
    system: &BiorthogonalSystem,
    family: KernelFamily,
    conj_left: bool,
    weight: W,
    xs: &[f64],
    ys: &[f64],
) -> Result<BilocalKernel>
where
    W: Fn(usize, f64) -> Complex64,
{
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidParameter("empty kernel grid".into()));
    }
    let basis = match family {
        KernelFamily::J => system.psi(),
        KernelFamily::K => system.chi(),
    };
    let mut values = vec![vec![ZERO; ys.len()]; xs.len()];
    let mut last = vec![vec![0.0f64; ys.len()]; xs.len()];
    for (n, f) in basis.iter().enumerate() {
        let w = weight(n, system.energies()[n]);
        let left: Vec<Complex64> = xs
            .iter()
            .map(|&x| {
                let v = f.eval(x);
                if conj_left {
                    v.conj()
                } else {
                    v
                }
            })
            .collect();
        let right: Vec<Complex64> = ys.iter().map(|&y| f.eval(y)).collect();
        for (i, l) in left.iter().enumerate() {
            for (j, r) in right.iter().enumerate() {
                let t = w * l * r;
                values[i][j] += t;
                last[i][j] = t.norm();
            }
        }
    }
    let tail_ratio = values
        .iter()
        .flatten()
        .zip(last.iter().flatten())
        .map(|(v, t)| t / v.norm().max(1.0))
        .fold(0.0, f64::max);
    Ok(BilocalKernel {
        grid: KernelGrid::new(xs.to_vec(), ys.to_vec(), values)?,
        tail_ratio,
        divergent: tail_ratio > 1e-8,
    })
}

/// Coefficients `c_n` of `sum c_n psi_n` over a built system.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<'a> {
    system: &'a BiorthogonalSystem,
    coeffs: Vec<Complex64>,
}

impl<'a> StateVector<'a> {
    pub fn new(system: &'a BiorthogonalSystem, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != system.psi.len() {
            return Err(Error::InvalidParameter(format!(
                "state has {} coefficients, system has {} levels",
                coeffs.len(),
                system.psi.len()
            )));
        }
        Ok(Self { system, coeffs })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn system(&self) -> &'a BiorthogonalSystem {
        self.system
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Norm-weighted average of `f(E_n)`.
    pub fn f_average<F: Fn(f64) -> Complex64>(&self, f: F) -> Result<Complex64> {
        let norm = self.norm_sq();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("average over a zero-norm state".into()));
        }
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&self.system.energies)
            .map(|(c, e)| c.norm_sqr() * f(*e))
            .sum();
        Ok(s / norm)
    }

    pub fn evolve(&self, t: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&self.system.energies)
            .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
            .collect();
        Self {
            system: self.system,
            coeffs,
        }
    }

    /// `sum c_n psi_n`.
    pub fn wavefunction(&self) -> LaurentPoly {
        self.coeffs
            .iter()
            .zip(&self.system.psi)
            .fold(LaurentPoly::zero(), |acc, (c, psi)| &acc + &psi.scale(*c))
    }

    /// `sum conj(c_n) chi_n`.
    pub fn dual_wavefunction(&self) -> LaurentPoly {
        self.coeffs
            .iter()
            .zip(&self.system.chi)
            .fold(LaurentPoly::zero(), |acc, (c, chi)| &acc + &chi.scale(c.conj()))
    }

    fn require_single_exp(&self) -> Result<Complex64> {
        let spec = &self.system.spec;
        if spec.nu() != 0.0 || spec.mu().len() != 1 || !spec.mu().contains_key(&2) {
            return Err(Error::ModelMismatch(format!(
                "momentum dynamics need nu = 0 and a single e^(2ix) coupling, got {}",
                spec.label()
            )));
        }
        Ok(spec.coupling(2))
    }

    fn average_of(&self, op: impl Fn(&LaurentPoly) -> LaurentPoly) -> Complex64 {
        pairing(&self.dual_wavefunction(), &op(&self.wavefunction())) / self.norm_sq()
    }

    /// `<p>` at time `t`.
    pub fn p_expectation(&self, t: f64) -> Result<Complex64> {
        self.require_single_exp()?;
        Ok(self.evolve(t).average_of(LaurentPoly::momentum))
    }

    /// `<e^{2ix}>` at time `t`.
    pub fn e2ix_expectation(&self, t: f64) -> Result<Complex64> {
        self.require_single_exp()?;
        Ok(self.evolve(t).average_of(|f| f.shift(2)))
    }

    /// `|d<p>/dt + 2 i m^2 <e^{2ix}>|` with a five-point central difference of step `dt_fd`.
    pub fn ehrenfest_residual(&self, t: f64, dt_fd: f64) -> Result<f64> {
        let m2 = self.require_single_exp()?;
        let p = |s: f64| self.evolve(s).average_of(LaurentPoly::momentum);
        let h = dt_fd;
        let deriv = (p(t - 2.0 * h) - 8.0 * p(t - h) + 8.0 * p(t + h) - p(t + 2.0 * h)) / (12.0 * h);
        let force = 2.0 * Complex64::i() * m2 * self.e2ix_expectation(t)?;
        Ok((deriv + force).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::factorial;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn opts(n_max: usize, trunc: usize) -> BuildOptions {
        BuildOptions {
            n_max,
            trunc,
            ..BuildOptions::default()
        }
    }

    #[test]
    fn free_particle_is_monomials() {
        let spec = HamiltonianSpec::free(0.25);
        for n in 0..5 {
            assert_eq!(build_dual(&spec, n, Sector::Right, 0).unwrap(), LaurentPoly::monomial(-(n as i64), ONE));
            assert_eq!(
                build_eigenfunction(&spec, n, 10, Sector::Right, EigenMethod::Frobenius).unwrap(),
                LaurentPoly::monomial(n as i64, ONE)
            );
            assert!(gamma_inhomogeneity(&spec, n, Sector::Right, 0).unwrap().is_empty());
        }
    }

    #[test]
    fn single_exp_coefficient_ratios() {
        let m = 1.3;
        let spec = HamiltonianSpec::single_exp(m, 0.0).unwrap();
        for n in 2..8 {
            let chi = build_dual(&spec, n, Sector::Right, 0).unwrap();
            let expect = m * m / (4.0 * (n as f64 - 1.0));
            assert!((chi.coeff(2 - n as i64) - expect).norm() < 1e-14);
            // term ratio of A_n: (n-2)!/(n-1)! (m/2)^2
            let ratio = factorial(n as u32 - 2) / factorial(n as u32 - 1) * (m / 2.0).powi(2);
            assert!((chi.coeff(2 - n as i64) - ratio).norm() < 1e-14);
        }
        for n in 0..6 {
            let psi = build_eigenfunction(&spec, n, 20, Sector::Right, EigenMethod::Frobenius).unwrap();
            let expect = -m * m / (4.0 * (n as f64 + 1.0));
            assert!((psi.coeff(n as i64 + 2) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn darboux_ground_state_is_exponential() {
        let m = 0.8;
        let spec = HamiltonianSpec::darboux(m).unwrap();
        let psi = build_eigenfunction(&spec, 0, 25, Sector::Right, EigenMethod::Frobenius).unwrap();
        for j in 0..25 {
            let expect = (-m).powi(j) / factorial(j as u32);
            assert!((psi.coeff(j as i64) - expect).norm() < 1e-15 * expect.abs().max(1e-300) + 1e-300);
        }
        assert!(apply_hamiltonian(&spec, &psi, false).truncate_above(25).sup_norm() < 1e-16);
    }

    #[test]
    fn methods_agree() {
        let spec = HamiltonianSpec::new(0.2, [(1, Complex64::new(0.6, 0.3)), (3, c(-0.9))], "t").unwrap();
        for n in 0..6 {
            let f = build_eigenfunction(&spec, n, 30, Sector::Right, EigenMethod::Frobenius).unwrap();
            let t = build_eigenfunction(&spec, n, 30, Sector::Right, EigenMethod::Triangular).unwrap();
            let scale = f.sup_norm();
            assert!((&f - &t).sup_norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn dual_residual_has_only_positive_powers() {
        let spec = HamiltonianSpec::new(0.35, [(1, Complex64::new(0.4, -0.2)), (2, c(1.0))], "t").unwrap();
        for n in 0..8 {
            let chi = build_dual(&spec, n, Sector::Right, 0).unwrap();
            let e = energy(&spec, n, Sector::Right);
            let r = &apply_hamiltonian(&spec, &chi, true) - &chi.scale(c(e));
            let gamma = gamma_inhomogeneity(&spec, n, Sector::Right, 0).unwrap();
            for (p, v) in r.terms() {
                if p <= 0 {
                    assert!(v.norm() < 1e-14, "power {p} residual {v}");
                } else {
                    assert!((gamma.get(&(p as u32)).copied().unwrap_or(ZERO) - v).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn single_exp_inhomogeneity_matches_neumann_scaling() {
        let m = 1.0;
        let spec = HamiltonianSpec::single_exp(m, 0.0).unwrap();
        // A_n = n! (2/m)^n chi_n for n >= 1, and (H - n^2) A_n = 2 m^2 z^2 for even n >= 2
        for n in (2..10).step_by(2) {
            let g = gamma_inhomogeneity(&spec, n, Sector::Right, 0).unwrap();
            assert_eq!(g.len(), 1);
            let lead = factorial(n as u32) * (2.0 / m).powi(n as i32);
            assert!((g[&2] * lead - 2.0 * m * m).norm() < 1e-12);
        }
    }

    #[test]
    fn fft_pairing_matches_convolution() {
        let a = LaurentPoly::new(-4, (0..7).map(|k| Complex64::new(k as f64 * 0.3, 1.0 - k as f64)).collect());
        let b = LaurentPoly::new(-1, (0..9).map(|k| Complex64::new(0.5 - k as f64, k as f64 * 0.1)).collect());
        assert!((pairing(&a, &b) - pairing_fft(&a, &b)).norm() < 1e-13);
    }

    #[test]
    fn left_sector_is_biorthonormal() {
        let spec = HamiltonianSpec::single_exp(1.0, 0.3).unwrap();
        let sys = BiorthogonalSystem::build(
            &spec,
            BuildOptions {
                sector: Sector::Left,
                n_max: 6,
                trunc: 40,
                method: EigenMethod::Frobenius,
            },
        )
        .unwrap();
        assert!(sys.biorthonormality_deviation() < 1e-12);
        let r = sys.eigen_residual();
        assert!(r.retained < 1e-12 && r.tail < 1e-12);
        assert!((sys.energies()[2] - 1.7f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn exceptional_fluxes_are_refused() {
        let spec = HamiltonianSpec::single_exp(1.0, 0.5).unwrap();
        assert!(matches!(
            BiorthogonalSystem::build(&spec, BuildOptions { sector: Sector::Left, ..opts(3, 10) }),
            Err(Error::ExceptionalPoint(_))
        ));
        let spec = HamiltonianSpec::single_exp(1.0, -1.0).unwrap();
        assert!(matches!(BiorthogonalSystem::build(&spec, opts(3, 10)), Err(Error::ExcludedFlux(_))));
        let spec = HamiltonianSpec::single_exp(1.0, -0.5).unwrap();
        assert!(matches!(BiorthogonalSystem::build(&spec, opts(3, 10)), Err(Error::ExceptionalPoint(_))));
    }

    #[test]
    fn short_truncation_warns() {
        let spec = HamiltonianSpec::single_exp(1.0, 0.0).unwrap();
        let sys = BiorthogonalSystem::build(&spec, opts(5, 4)).unwrap();
        assert!(!sys.warnings().is_empty());
        assert!(sys.eigen_residual().tail > 1e-6);
        let sys = BiorthogonalSystem::build(&spec, opts(5, 60)).unwrap();
        assert!(sys.warnings().is_empty());
    }

    #[test]
    fn expansion_of_eigenfunction_is_unit_vector() {
        let spec = HamiltonianSpec::single_exp(1.0, 0.0).unwrap();
        let sys = BiorthogonalSystem::build(&spec, opts(8, 40)).unwrap();
        let (state, residual) = sys.expand(&sys.psi()[3]);
        for (n, c) in state.coeffs().iter().enumerate() {
            let target = if n == 3 { 1.0 } else { 0.0 };
            assert!((c - target).norm() < 1e-13);
        }
        assert!(residual < 1e-13);
        let (_, residual) = sys.expand(&LaurentPoly::monomial(-1, ONE));
        assert!(residual > 0.5);
    }

    #[test]
    fn averages_and_evolution() {
        let spec = HamiltonianSpec::single_exp(1.0, 0.0).unwrap();
        let sys = BiorthogonalSystem::build(&spec, opts(1, 30)).unwrap();
        let s = 0.5f64.sqrt();
        let state = sys.state(vec![c(s), c(s)]).unwrap();
        assert!((state.f_average(|e| c(e)).unwrap() - 0.5).norm() < 1e-15);
        let later = state.evolve(2.7);
        assert!((later.norm_sq() - 1.0).abs() < 1e-15);
        assert_eq!(state.evolve(0.0), state);
        let zero = sys.state(vec![ZERO, ZERO]).unwrap();
        assert!(zero.f_average(|e| c(e)).is_err());
    }

    #[test]
    fn momentum_requires_single_exp() {
        let spec = HamiltonianSpec::darboux(1.0).unwrap();
        let sys = BiorthogonalSystem::build(&spec, opts(2, 20)).unwrap();
        let st = sys.state(vec![ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(st.p_expectation(0.0), Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn samples_recover_coefficients() {
        let f = LaurentPoly::new(-2, vec![c(1.0), Complex64::new(0.0, 2.0), c(-0.5), c(0.25)]);
        let p = 16;
        let vals: Vec<Complex64> = (0..p).map(|k| f.eval(2.0 * std::f64::consts::PI * k as f64 / p as f64)).collect();
        let g = laurent_from_samples(&vals, -4, 4).unwrap();
        for q in -4..=4 {
            assert!((g.coeff(q) - f.coeff(q)).norm() < 1e-14);
        }
    }
}

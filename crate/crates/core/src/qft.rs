//! Trial-state energy density of an exponential field theory normal-ordered at mass `m`,
//! `E(M) = mu e^{2 i beta xi} (M^2/m^2)^{beta^2/2pi} + (M^2 - m^2) / 8pi`, and the
//! instability of its minimum once `beta^2 > 2 pi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QftTrialParams {
    /// Coupling as `[re, im]`.
    pub mu: Complex64,
    pub beta: f64,
    /// Zero-mode shift.
    pub xi: f64,
    /// Trial mass.
    #[serde(rename = "M")]
    pub trial_mass: f64,
    /// Normal-ordering mass.
    pub m: f64,
}

impl QftTrialParams {
    fn validate(&self) -> Result<()> {
        let finite = [self.beta, self.xi, self.trial_mass, self.m, self.mu.re, self.mu.im]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.trial_mass > 0.0) || !(self.m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trial parameters need finite values and M, m > 0: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `mu e^{2 i beta xi}`.
pub fn effective_coupling(mu: Complex64, beta: f64, xi: f64) -> Complex64 {
    mu * Complex64::from_polar(1.0, 2.0 * beta * xi)
}

pub fn trial_energy(p: &QftTrialParams) -> Result<Complex64> {
    p.validate()?;
    let ratio = (p.trial_mass / p.m).powi(2);
    let exponent = p.beta * p.beta / (2.0 * PI);
    Ok(effective_coupling(p.mu, p.beta, p.xi) * ratio.powf(exponent)
        + (p.trial_mass * p.trial_mass - p.m * p.m) / (8.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Decided from the large-`M` exponents, not from the samples.
    pub bounded_below: bool,
    pub min_value: f64,
    #[serde(rename = "argmin_M")]
    pub argmin_mass: f64,
    /// The sampled energy falls strictly over the top decade of the scan.
    pub decreasing_at_top: bool,
}

/// Minimum of the energy over log-spaced `M` in `[m, M_max]`, with an analytic verdict
/// on boundedness as `M -> infinity`.
pub fn instability_scan(mu: Complex64, beta: f64, xi: f64, m: f64, m_max: f64, samples: usize) -> Result<ScanResult> {
    if !(m > 0.0) || !(m_max > m) || samples < 2 || !m_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "scan needs 0 < m < M_max and at least 2 samples, got m = {m}, M_max = {m_max}, samples = {samples}"
        )));
    }
    let coupling = effective_coupling(mu, beta, xi);
    if coupling.im.abs() > IMAG_TOL * coupling.norm().max(1.0) {
        return Err(Error::NonRealEnergy(coupling.im));
    }
    let masses: Vec<f64> = (0..samples)
        .map(|k| m * (m_max / m).powf(k as f64 / (samples - 1) as f64))
        .collect();
    let values = masses
        .iter()
        .map(|&big| {
            trial_energy(&QftTrialParams {
                mu,
                beta,
                xi,
                trial_mass: big,
                m,
            })
            .map(|e| e.re)
        })
        .collect::<Result<Vec<_>>>()?;
    let (imin, min_value) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let top_decade = m_max / 10.0;
    let top: Vec<f64> = masses
        .iter()
        .zip(&values)
        .filter(|(big, _)| **big >= top_decade)
        .map(|(_, v)| *v)
        .collect();
    let decreasing_at_top = top.len() >= 2 && top.windows(2).all(|w| w[1] < w[0]);
    Ok(ScanResult {
        bounded_below: bounded_below(coupling.re, beta, m),
        min_value,
        argmin_mass: masses[imin],
        decreasing_at_top,
    })
}

/// Large-`M` verdict: the coupling term grows as `M^{beta^2/pi}` against `M^2 / 8pi`.
pub fn bounded_below(coupling: f64, beta: f64, m: f64) -> bool {
    let exponent = beta * beta / (2.0 * PI);
    if (exponent - 1.0).abs() <= 1e-12 {
        coupling / (m * m) + 1.0 / (8.0 * PI) >= 0.0
    } else if exponent < 1.0 {
        true
    } else {
        coupling >= 0.0
    }
}

/// One term `mu_k e^{ik phi}` of a multi-exponential potential, `k = 2 beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub k: f64,
    /// Effective real coupling after the zero-mode shift.
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiExpReport {
    pub per_term: Vec<(ExpTerm, ScanResult)>,
    /// Terms with no lower bound on their own.
    pub unstable: Vec<ExpTerm>,
}

/// Scans each term separately; a negative coupling is unstable exactly when `k^2 > 8 pi`.
pub fn multi_exp_instability(terms: &[ExpTerm], m: f64, m_max: f64, samples: usize) -> Result<MultiExpReport> {
    let mut per_term = Vec::with_capacity(terms.len());
    let mut unstable = Vec::new();
    for t in terms {
        let r = instability_scan(Complex64::new(t.coupling, 0.0), t.k / 2.0, 0.0, m, m_max, samples)?;
        if !r.bounded_below {
            unstable.push(*t);
        }
        per_term.push((*t, r));
    }
    Ok(MultiExpReport { per_term, unstable })
}

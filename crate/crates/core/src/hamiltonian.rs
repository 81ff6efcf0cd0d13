//! The Hamiltonian `H = (p + nu)^2 + sum_k mu_k e^{ikx}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Flux `nu` plus a finite set of exponential couplings `mu_k`, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct HamiltonianSpec {
    nu: f64,
    mu: BTreeMap<u32, Complex64>,
    label: String,
}

impl HamiltonianSpec {
    pub fn new<I>(nu: f64, mu: I, label: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, Complex64)>,
    {
        if !nu.is_finite() {
            return Err(Error::InvalidHamiltonian(format!("nu = {nu}")));
        }
        let mut map = BTreeMap::new();
        for (k, c) in mu {
            if k == 0 {
                return Err(Error::InvalidHamiltonian("coupling index must be >= 1".into()));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidHamiltonian(format!("mu_{k} = {c}")));
            }
            if c != Complex64::new(0.0, 0.0) {
                map.insert(k, c);
            }
        }
        Ok(Self {
            nu,
            mu: map,
            label: label.into(),
        })
    }

    /// `p^2 + m^2 e^{2ix}` shifted by flux `nu`.
    pub fn single_exp(m: f64, nu: f64) -> Result<Self> {
        Self::new(nu, [(2, Complex64::new(m * m, 0.0))], format!("single_exp(m={m}, nu={nu})"))
    }

    /// `p^2 + m e^{ix} - m^2 e^{2ix}`, which factorizes.
    pub fn darboux(m: f64) -> Result<Self> {
        Self::new(
            0.0,
            [(1, Complex64::new(m, 0.0)), (2, Complex64::new(-m * m, 0.0))],
            format!("darboux(m={m})"),
        )
    }

    pub fn two_exp(mu1: Complex64, mu2: Complex64, nu: f64) -> Result<Self> {
        Self::new(nu, [(1, mu1), (2, mu2)], format!("two_exp(mu1={mu1}, mu2={mu2}, nu={nu})"))
    }

    pub fn free(nu: f64) -> Self {
        Self {
            nu,
            mu: BTreeMap::new(),
            label: format!("free(nu={nu})"),
        }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mu(&self) -> &BTreeMap<u32, Complex64> {
        &self.mu
    }

    pub fn coupling(&self, k: u32) -> Complex64 {
        self.mu.get(&k).copied().unwrap_or_default()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest `k` with nonzero coupling, 0 for the free particle.
    pub fn max_order(&self) -> u32 {
        self.mu.keys().next_back().copied().unwrap_or(0)
    }

    pub fn potential(&self, x: Complex64) -> Complex64 {
        let i = Complex64::i();
        self.mu.iter().map(|(k, c)| c * (i * x * *k as f64).exp()).sum()
    }

    /// `dV/dx`.
    pub fn potential_slope(&self, x: Complex64) -> Complex64 {
        let i = Complex64::i();
        self.mu
            .iter()
            .map(|(k, c)| i * *k as f64 * c * (i * x * *k as f64).exp())
            .sum()
    }

    /// Classical energy at a complex phase-space point.
    pub fn energy(&self, x: Complex64, p: Complex64) -> Complex64 {
        (p + self.nu).powi(2) + self.potential(x)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    nu: f64,
    /// `[k, re, im]` triples
    mu: Vec<(u32, f64, f64)>,
    #[serde(default)]
    label: String,
}

impl TryFrom<SpecRepr> for HamiltonianSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self> {
        HamiltonianSpec::new(
            r.nu,
            r.mu.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im))),
            r.label,
        )
    }
}

impl From<HamiltonianSpec> for SpecRepr {
    fn from(s: HamiltonianSpec) -> Self {
        SpecRepr {
            nu: s.nu,
            mu: s.mu.iter().map(|(k, c)| (*k, c.re, c.im)).collect(),
            label: s.label,
        }
    }
}

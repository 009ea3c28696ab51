use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moments `m_1, m_2, ...` of a law on the real line (`m_0 = 1` implied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub label: String,
    values: Vec<f64>,
}

impl MomentSequence {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        MomentSequence { label: label.into(), values }
    }

    /// Moments of a point mass at `a`.
    pub fn point_mass(a: f64, n_max: usize) -> Self {
        MomentSequence::new(format!("point mass at {a}"), (1..=n_max).map(|n| a.powi(n as i32)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `m_n`, with `m_0 = 1`.
    pub fn get(&self, n: usize) -> Option<f64> {
        if n == 0 {
            Some(1.0)
        } else {
            self.values.get(n - 1).copied()
        }
    }

    pub(crate) fn require(&self, n: usize, what: &'static str) -> Result<()> {
        require(self.values.len(), n, what)
    }

    /// Mean and variance.
    pub fn mean_variance(&self) -> Result<(f64, f64)> {
        self.require(2, "mean and variance")?;
        let m1 = self.values[0];
        Ok((m1, self.values[1] - m1 * m1))
    }

    /// True when the Hankel matrices `[m_{i+j}]_{0 ≤ i,j ≤ k}` are positive
    /// definite for `k = 0..=order` (Cholesky succeeds).
    pub fn hankel_positive(&self, order: usize) -> Result<bool> {
        self.require(2 * order, "Hankel check")?;
        for k in 0..=order {
            let h = DMatrix::from_fn(k + 1, k + 1, |i, j| self.get(i + j).unwrap_or(f64::NAN));
            if h.cholesky().is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// CSV with header `n,moment`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_indexed_csv(out, "moment", &self.values)
    }
}

/// Free cumulants `c_1, c_2, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeCumulantSequence {
    pub label: String,
    values: Vec<f64>,
}

impl FreeCumulantSequence {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        FreeCumulantSequence { label: label.into(), values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `c_n` for `n >= 1`.
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    pub(crate) fn require(&self, n: usize, what: &'static str) -> Result<()> {
        require(self.values.len(), n, what)
    }

    /// CSV with header `n,cumulant`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_indexed_csv(out, "cumulant", &self.values)
    }
}

/// Moments `P^(n) = E|A|^{2n}` of the received power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum PowerMomentSpec {
    /// Constant power: `P^(n) = P^n`.
    Unfaded { mean_power: f64 },
    /// Exponential power: `P^(n) = n! P^n`.
    Rayleigh { mean_power: f64 },
    /// Explicit table `P^(1), P^(2), ...`.
    Custom { values: Vec<f64> },
}

impl PowerMomentSpec {
    pub fn unfaded() -> Self {
        PowerMomentSpec::Unfaded { mean_power: 1.0 }
    }

    pub fn rayleigh() -> Self {
        PowerMomentSpec::Rayleigh { mean_power: 1.0 }
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("power moments must be finite and non-negative"));
        }
        Ok(PowerMomentSpec::Custom { values })
    }

    /// `unfaded` or `rayleigh`.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "unfaded" | "none" => Ok(PowerMomentSpec::unfaded()),
            "rayleigh" => Ok(PowerMomentSpec::rayleigh()),
            other => Err(Error::invalid(format!("unknown fading model '{other}'"))),
        }
    }

    pub fn is_unfaded(&self) -> bool {
        matches!(self, PowerMomentSpec::Unfaded { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PowerMomentSpec::Unfaded { .. } => "unfaded",
            PowerMomentSpec::Rayleigh { .. } => "rayleigh",
            PowerMomentSpec::Custom { .. } => "custom",
        }
    }

    /// `P^(1..=n_max)`.
    pub fn table(&self, n_max: usize) -> Result<Vec<f64>> {
        match self {
            PowerMomentSpec::Unfaded { mean_power } => {
                Ok((1..=n_max).map(|n| mean_power.powi(n as i32)).collect())
            }
            PowerMomentSpec::Rayleigh { mean_power } => {
                let mut out = Vec::with_capacity(n_max);
                let mut acc = 1.0;
                for n in 1..=n_max {
                    acc *= n as f64 * mean_power;
                    out.push(acc);
                }
                Ok(out)
            }
            PowerMomentSpec::Custom { values } => {
                require(values.len(), n_max, "power moment table")?;
                Ok(values[..n_max].to_vec())
            }
        }
    }
}

fn require(available: usize, needed: usize, what: &'static str) -> Result<()> {
    if available < needed {
        Err(Error::Insufficient { what, needed, available })
    } else {
        Ok(())
    }
}

fn write_indexed_csv<W: Write>(out: W, column: &str, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", column])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format_value(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip representation, `nan` for NaN.
pub(crate) fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

//! Chip waveforms, their autocorrelations and spectral moments.
//!
//! Frequencies are normalised to cycles per chip, so the spectral energy
//! density `g(f) = |Ψ(2πf/T_c)|² / T_c` integrates to 1 over `f`, and
//! `W^(m) = ∫ g(f)^m df`.

mod lattice;

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::integrate_pieces;

pub use lattice::{xi_lattice_mc, xi_lattice_sum, LatticeEstimate};

const W_TOL: f64 = 1e-12;

/// `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// A sampled spectral energy density, even in frequency and linearly
/// interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpectrum {
    /// Non-negative normalised frequencies, strictly increasing, first is 0.
    freq: Vec<f64>,
    density: Vec<f64>,
    source: String,
}

#[derive(Deserialize)]
struct SpectrumRow {
    omega: f64,
    density: f64,
}

impl CustomSpectrum {
    /// Builds a spectrum from `(Ω, |Ψ(Ω)|²/T_c)` samples with `Ω` in radians
    /// per chip, covering `Ω ≥ 0` starting at 0. The density is mirrored to
    /// negative frequencies and rescaled to unit energy; inputs whose energy
    /// is off by more than 1% are rejected as mislabelled.
    pub fn from_samples(omega: &[f64], density: &[f64], source: impl Into<String>) -> Result<Self> {
        if omega.len() != density.len() || omega.len() < 2 {
            return Err(Error::invalid("custom spectrum needs at least two (omega, density) samples"));
        }
        if omega[0] != 0.0 {
            return Err(Error::invalid("custom spectrum must start at omega = 0"));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("custom spectrum frequencies must be strictly increasing"));
        }
        if density.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::invalid("custom spectral density must be finite and non-negative"));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("custom spectrum frequencies must be finite"));
        }
        let freq: Vec<f64> = omega.iter().map(|w| w / (2.0 * PI)).collect();
        // trapezoid is exact for the interpolant; factor 2 for the mirror
        let energy: f64 = 2.0
            * freq
                .windows(2)
                .zip(density.windows(2))
                .map(|(f, d)| 0.5 * (f[1] - f[0]) * (d[0] + d[1]))
                .sum::<f64>();
        if !(energy > 0.0) || (energy - 1.0).abs() > 0.01 {
            return Err(Error::invalid(format!(
                "custom spectrum has energy {energy}, expected 1"
            )));
        }
        Ok(CustomSpectrum {
            freq,
            density: density.iter().map(|d| d / energy).collect(),
            source: source.into(),
        })
    }

    /// Reads a CSV with header `omega,density`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut omega = Vec::new();
        let mut density = Vec::new();
        for row in reader.deserialize() {
            let row: SpectrumRow = row?;
            omega.push(row.omega);
            density.push(row.density);
        }
        CustomSpectrum::from_samples(&omega, &density, path.display().to_string())
    }

    fn at(&self, f: f64) -> f64 {
        let f = f.abs();
        let last = self.freq.len() - 1;
        if f > self.freq[last] {
            return 0.0;
        }
        let i = self.freq.partition_point(|&x| x <= f).clamp(1, last);
        let (f0, f1) = (self.freq[i - 1], self.freq[i]);
        let t = (f - f0) / (f1 - f0);
        self.density[i - 1] * (1.0 - t) + self.density[i] * t
    }

    fn support_edge(&self) -> f64 {
        let last = self.density.iter().rposition(|&d| d > 0.0).unwrap_or(0);
        // positive density ramps to zero at the next sample
        self.freq[(last + 1).min(self.freq.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WaveformFamily {
    Sinc,
    /// Square-root raised cosine with roll-off in `[0, 1]`.
    Srrc { alpha: f64 },
    Custom(CustomSpectrum),
}

/// A unit-energy chip pulse with its chip duration in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipWaveform {
    family: WaveformFamily,
    chip_duration: f64,
}

impl ChipWaveform {
    pub fn sinc() -> Self {
        ChipWaveform { family: WaveformFamily::Sinc, chip_duration: 1.0 }
    }

    pub fn srrc(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("roll-off {alpha} outside [0, 1]")));
        }
        Ok(ChipWaveform { family: WaveformFamily::Srrc { alpha }, chip_duration: 1.0 })
    }

    pub fn custom(spectrum: CustomSpectrum) -> Self {
        ChipWaveform { family: WaveformFamily::Custom(spectrum), chip_duration: 1.0 }
    }

    pub fn with_chip_duration(mut self, seconds: f64) -> Result<Self> {
        if !(seconds > 0.0 && seconds.is_finite()) {
            return Err(Error::invalid("chip duration must be positive"));
        }
        self.chip_duration = seconds;
        Ok(self)
    }

    pub fn family(&self) -> &WaveformFamily {
        &self.family
    }

    pub fn chip_duration(&self) -> f64 {
        self.chip_duration
    }

    /// Roll-off factor: `(2·BW·T_c) − 1`, so 0 for sinc.
    pub fn excess_bandwidth(&self) -> f64 {
        2.0 * self.bandwidth() * self.chip_duration - 1.0
    }

    /// One-sided bandwidth in hertz.
    pub fn bandwidth(&self) -> f64 {
        let normalised = match &self.family {
            WaveformFamily::Sinc => 0.5,
            WaveformFamily::Srrc { alpha } => 0.5 * (1.0 + alpha),
            WaveformFamily::Custom(s) => s.support_edge(),
        };
        normalised / self.chip_duration
    }

    /// `g(f)` at normalised frequency `f` (cycles per chip).
    pub fn spectral_density(&self, f: f64) -> f64 {
        let f = f.abs();
        match &self.family {
            WaveformFamily::Sinc => {
                if f <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            WaveformFamily::Srrc { alpha } => {
                let lo = 0.5 * (1.0 - alpha);
                let hi = 0.5 * (1.0 + alpha);
                if f <= lo {
                    1.0
                } else if f > hi {
                    0.0
                } else {
                    0.5 * (1.0 + (PI / alpha * (f - lo)).cos())
                }
            }
            WaveformFamily::Custom(s) => s.at(f),
        }
    }

    /// `R(x) = ∫ψ(t)ψ(t−x)dt` with `x` in chips.
    ///
    /// Nonzero integer lags return exactly 0 for sinc and SRRC.
    pub fn autocorrelation_chips(&self, x: f64) -> Result<f64> {
        let x = x.abs();
        match &self.family {
            WaveformFamily::Sinc => Ok(if is_nonzero_integer(x) { 0.0 } else { sinc(x) }),
            WaveformFamily::Srrc { alpha } => {
                if is_nonzero_integer(x) {
                    return Ok(0.0);
                }
                Ok(sinc(x) * raised_cosine_taper(*alpha, x))
            }
            WaveformFamily::Custom(s) => {
                let r = integrate_pieces(|f| s.at(f) * (2.0 * PI * f * x).cos(), &s.freq, 1e-12, 1e-14)?;
                Ok(2.0 * r.value)
            }
        }
    }

    /// Autocorrelation at a lag in seconds.
    pub fn autocorrelation(&self, seconds: f64) -> Result<f64> {
        self.autocorrelation_chips(seconds / self.chip_duration)
    }

    /// `W^(m) = ∫ g(f)^m df`, by adaptive quadrature over the spectral
    /// support. Sinc returns exactly 1.
    pub fn w_moment(&self, m: usize) -> Result<f64> {
        if m == 0 {
            return Err(Error::invalid("spectral moment order must be >= 1"));
        }
        let g = |f: f64| self.spectral_density(f).powi(m as i32);
        match &self.family {
            WaveformFamily::Sinc => Ok(1.0),
            WaveformFamily::Srrc { alpha } => {
                let lo = 0.5 * (1.0 - alpha);
                let hi = 0.5 * (1.0 + alpha);
                let band = integrate_pieces(g, &[lo, hi], W_TOL, 1e-15)?;
                Ok(2.0 * (lo + band.value))
            }
            WaveformFamily::Custom(s) => {
                let r = integrate_pieces(g, &s.freq, W_TOL, 1e-15)?;
                let w = 2.0 * r.value;
                if !w.is_finite() {
                    return Err(Error::NonFinite(format!("W^({m}) of custom spectrum")));
                }
                Ok(w)
            }
        }
    }

    /// Smallest lag truncation accepted by the simulator, in chips.
    pub fn min_truncation(&self) -> usize {
        if self.fast_tail() {
            10
        } else {
            50
        }
    }

    /// Default lag truncation, in chips.
    pub fn default_truncation(&self) -> usize {
        if self.fast_tail() {
            30
        } else {
            200
        }
    }

    // Raised-cosine pulses decay like 1/x³; sinc and arbitrary spectra are
    // treated as 1/x.
    fn fast_tail(&self) -> bool {
        matches!(self.family, WaveformFamily::Srrc { alpha } if alpha >= 0.2)
    }

    /// Parses `sinc`, `srrc:<alpha>` or `custom:<csv path>`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        if name.eq_ignore_ascii_case("sinc") {
            return Ok(ChipWaveform::sinc());
        }
        if let Some(rest) = name.strip_prefix("srrc:") {
            let alpha: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad roll-off in waveform '{name}'")))?;
            return ChipWaveform::srrc(alpha);
        }
        if let Some(path) = name.strip_prefix("custom:") {
            return Ok(ChipWaveform::custom(CustomSpectrum::from_csv(Path::new(path))?));
        }
        Err(Error::invalid(format!(
            "unknown waveform '{name}' (expected sinc, srrc:<alpha> or custom:<path>)"
        )))
    }
}

impl FromStr for ChipWaveform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ChipWaveform::parse(s)
    }
}

impl fmt::Display for ChipWaveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            WaveformFamily::Sinc => write!(f, "sinc"),
            WaveformFamily::Srrc { alpha } => write!(f, "srrc:{alpha}"),
            WaveformFamily::Custom(s) => write!(f, "custom:{}", s.source),
        }
    }
}

impl Serialize for ChipWaveform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ChipWaveform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ChipWaveform::parse(&s).map_err(serde::de::Error::custom)
    }
}

fn is_nonzero_integer(x: f64) -> bool {
    x != 0.0 && x.fract() == 0.0
}

/// `cos(παx) / (1 − (2αx)²)`, written around `d = 1 − 2α|x|` so the
/// removable singularity at `2α|x| = 1` needs no special case.
fn raised_cosine_taper(alpha: f64, x: f64) -> f64 {
    let u = 2.0 * alpha * x;
    let d = 1.0 - u;
    if d == 0.0 {
        return PI / 4.0;
    }
    (0.5 * PI * d).sin() / (d * (1.0 + u))
}

/// `W^(1..=n_max)` for one waveform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WMomentTable {
    waveform: String,
    values: Vec<f64>,
}

impl WMomentTable {
    pub fn new(w: &ChipWaveform, n_max: usize) -> Result<Self> {
        let values = (1..=n_max).map(|m| w.w_moment(m)).collect::<Result<Vec<_>>>()?;
        Ok(WMomentTable { waveform: w.to_string(), values })
    }

    /// A table from explicit values `W^(1), W^(2), ...`.
    pub fn from_values(label: impl Into<String>, values: Vec<f64>) -> Self {
        WMomentTable { waveform: label.into(), values }
    }

    /// All-ones table, the sinc fingerprint.
    pub fn unit(n_max: usize) -> Self {
        WMomentTable { waveform: "sinc".into(), values: vec![1.0; n_max] }
    }

    pub fn waveform(&self) -> &str {
        &self.waveform
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

    /// `W^(m)` for `m >= 1`.
    pub fn get(&self, m: usize) -> Option<f64> {
        m.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }
}

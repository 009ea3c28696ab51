use serde::Serialize;

use super::{gauss_rule, QuadratureRule, SupportHint, DEFAULT_POINTS_FADED, DEFAULT_POINTS_UNFADED};
use crate::aem::{
    aem_ca_faded_moments, aem_ca_moments, aem_cs_faded_moments, mp_moments, mp_support, MomentSequence,
    PowerMomentSpec,
};
use crate::error::{Error, Result};
use crate::waveform::{ChipWaveform, WMomentTable, WaveformFamily};

/// A limiting eigenvalue law together with what is needed to build its
/// Gauss rule: load, chip waveform (none for chip-synchronous systems) and
/// fading.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralLaw {
    beta: f64,
    waveform: Option<ChipWaveform>,
    power: PowerMomentSpec,
}

impl SpectralLaw {
    pub fn chip_synchronous(beta: f64, power: PowerMomentSpec) -> Result<Self> {
        check_beta(beta)?;
        Ok(SpectralLaw { beta, waveform: None, power })
    }

    pub fn chip_asynchronous(beta: f64, waveform: ChipWaveform, power: PowerMomentSpec) -> Result<Self> {
        check_beta(beta)?;
        Ok(SpectralLaw { beta, waveform: Some(waveform), power })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn power(&self) -> &PowerMomentSpec {
        &self.power
    }

    pub fn waveform(&self) -> Option<&ChipWaveform> {
        self.waveform.as_ref()
    }

    /// `2·BW·T_c`: 1 for chip-synchronous systems and sinc chips, `1 + α`
    /// for SRRC.
    pub fn bandwidth_factor(&self) -> f64 {
        match &self.waveform {
            None => 1.0,
            Some(w) => 2.0 * w.bandwidth() * w.chip_duration(),
        }
    }

    /// Roll-off used in the efficiency normalisation.
    pub fn alpha(&self) -> f64 {
        self.bandwidth_factor() - 1.0
    }

    fn is_sinc_like(&self) -> bool {
        match &self.waveform {
            None => true,
            Some(w) => match w.family() {
                WaveformFamily::Sinc => true,
                WaveformFamily::Srrc { alpha } => *alpha == 0.0,
                WaveformFamily::Custom(_) => false,
            },
        }
    }

    /// Moments `m_1..=m_{n_max}`.
    pub fn moments(&self, n_max: usize) -> Result<MomentSequence> {
        match &self.waveform {
            None => {
                if self.power.is_unfaded() {
                    scale_unfaded(mp_moments(n_max, self.beta)?, &self.power)
                } else {
                    aem_cs_faded_moments(n_max, self.beta, &self.power)
                }
            }
            Some(w) => {
                let table = WMomentTable::new(w, n_max)?;
                if self.power.is_unfaded() {
                    scale_unfaded(aem_ca_moments(n_max, self.beta, &table)?, &self.power)
                } else {
                    aem_ca_faded_moments(n_max, self.beta, &table, &self.power)
                }
            }
        }
    }

    /// Mass of the atom at zero, `(1 − 2·BW·T_c/β)^+`: the crosscorrelation
    /// matrix has rank at most the signal-space dimension.
    pub fn atom(&self) -> f64 {
        if self.beta <= 0.0 {
            return 0.0;
        }
        (1.0 - self.bandwidth_factor() / self.beta).max(0.0)
    }

    /// Reference interval for the modified moments. Unfaded laws use the
    /// Marčenko-Pastur support, widened to `[0, (√(2·BW·T_c) + √β)²]` for
    /// pulses wider than sinc; faded laws use `[0, m_1 + 10σ]`.
    pub fn support_hint(&self, m: &MomentSequence) -> Result<SupportHint> {
        let atom = self.atom();
        let mut hint = if !self.power.is_unfaded() {
            SupportHint::from_spread(m)?
        } else if self.is_sinc_like() {
            let (a, b) = mp_support(self.beta);
            SupportHint::interval(a, b)
        } else {
            let edge = (self.bandwidth_factor().sqrt() + self.beta.sqrt()).powi(2);
            SupportHint::interval(0.0, edge)
        };
        if let PowerMomentSpec::Unfaded { mean_power } = self.power {
            hint.lo *= mean_power;
            hint.hi *= mean_power;
        }
        if !(hint.lo < hint.hi) {
            // β = 0: the law is a point mass; any interval around it works
            hint.lo = 0.0;
            hint.hi = 2.0 * m.get(1).unwrap_or(1.0).max(1.0);
        }
        hint.atom = atom;
        Ok(hint)
    }

    /// 10 points unfaded, 15 faded.
    pub fn default_points(&self) -> usize {
        if self.power.is_unfaded() {
            DEFAULT_POINTS_UNFADED
        } else {
            DEFAULT_POINTS_FADED
        }
    }

    /// `q`-point Gauss rule for this law.
    pub fn rule(&self, q: usize) -> Result<QuadratureRule> {
        let m = self.moments(2 * q - 1)?;
        gauss_rule(&m, q, self.support_hint(&m)?)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")))
    }
}

/// Constant power `P` scales the law by `P`.
fn scale_unfaded(m: MomentSequence, power: &PowerMomentSpec) -> Result<MomentSequence> {
    let p = power.table(m.len())?;
    let label = m.label.clone();
    Ok(MomentSequence::new(label, m.values().iter().zip(p).map(|(v, s)| v * s).collect()))
}

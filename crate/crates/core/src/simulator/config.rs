use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::aem::PowerMomentSpec;
use crate::error::{Error, Result};
use crate::quadrature::SpectralLaw;
use crate::waveform::ChipWaveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spreading {
    /// One sequence per user, repeated every symbol.
    Short,
    /// Fresh sequence every symbol.
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChipLaw {
    /// `±1/√N` with equal probability.
    Binary,
    /// `N(0, 1/N)`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Synchrony {
    ChipSynchronous,
    ChipAsynchronous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayModel {
    /// Every delay 0.
    Zero,
    /// `τ_1 = 0`, the rest uniform integers in `[0, N)`, sorted.
    ChipMultiples,
    /// i.i.d. uniform reals in `[0, N)`.
    Uniform,
    /// i.i.d. uniform reals in `[0, 1)`.
    UniformChip,
}

impl DelayModel {
    fn is_integer(self) -> bool {
        matches!(self, DelayModel::Zero | DelayModel::ChipMultiples)
    }
}

/// Parameters of a finite random-spreading system and of the Monte Carlo
/// run over it. Delays are in chips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(alias = "K")]
    pub users: usize,
    #[serde(alias = "N")]
    pub chips: usize,
    /// Symbols `−M..=M` are simulated.
    #[serde(alias = "M")]
    pub half_window: usize,
    pub spreading: Spreading,
    pub chip_law: ChipLaw,
    pub synchrony: Synchrony,
    /// Defaults to `chip_multiples` (synchronous) or `uniform`.
    pub delay_model: Option<DelayModel>,
    pub waveform: ChipWaveform,
    #[serde(deserialize_with = "fading_field")]
    pub fading: PowerMomentSpec,
    pub seed: u64,
    pub trials: usize,
    /// Lag truncation for the chip-asynchronous build, in chips.
    pub truncation: Option<usize>,
    /// Draw delays once for the whole run instead of once per trial.
    pub freeze_delays: bool,
    /// Highest moment reported.
    pub n_max: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            users: 60,
            chips: 120,
            half_window: 8,
            spreading: Spreading::Short,
            chip_law: ChipLaw::Binary,
            synchrony: Synchrony::ChipSynchronous,
            delay_model: None,
            waveform: ChipWaveform::sinc(),
            fading: PowerMomentSpec::unfaded(),
            seed: 0,
            trials: 20,
            truncation: None,
            freeze_delays: false,
            n_max: 4,
        }
    }
}

fn fading_field<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<PowerMomentSpec, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Fading {
        Name(String),
        Spec(PowerMomentSpec),
    }
    match Fading::deserialize(d)? {
        Fading::Name(s) => PowerMomentSpec::parse(&s).map_err(D::Error::custom),
        Fading::Spec(p) => Ok(p),
    }
}

impl SystemConfig {
    pub fn chip_synchronous(users: usize, chips: usize, half_window: usize) -> Self {
        SystemConfig { users, chips, half_window, ..SystemConfig::default() }
    }

    pub fn chip_asynchronous(users: usize, chips: usize, half_window: usize, waveform: ChipWaveform) -> Self {
        SystemConfig {
            users,
            chips,
            half_window,
            synchrony: Synchrony::ChipAsynchronous,
            waveform,
            ..SystemConfig::default()
        }
    }

    /// `β = K/N`.
    pub fn load(&self) -> f64 {
        self.users as f64 / self.chips as f64
    }

    pub fn symbols(&self) -> usize {
        2 * self.half_window + 1
    }

    /// `(2M+1)K`.
    pub fn dimension(&self) -> usize {
        self.symbols() * self.users
    }

    pub fn delay_model(&self) -> DelayModel {
        self.delay_model.unwrap_or(match self.synchrony {
            Synchrony::ChipSynchronous => DelayModel::ChipMultiples,
            Synchrony::ChipAsynchronous => DelayModel::Uniform,
        })
    }

    /// Lag truncation in chips; `None` for chip-synchronous systems.
    pub fn truncation(&self) -> Option<usize> {
        match self.synchrony {
            Synchrony::ChipSynchronous => None,
            Synchrony::ChipAsynchronous => {
                Some(self.truncation.unwrap_or_else(|| self.waveform.default_truncation()))
            }
        }
    }

    /// Copy with every defaulted field made explicit.
    pub fn resolved(&self) -> Self {
        SystemConfig { delay_model: Some(self.delay_model()), truncation: self.truncation(), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.chips == 0 {
            return Err(Error::invalid("K and N must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.n_max == 0 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        if self.synchrony == Synchrony::ChipSynchronous && !self.delay_model().is_integer() {
            return Err(Error::invalid("chip-synchronous delays must be integer multiples of the chip"));
        }
        if let Some(l) = self.truncation() {
            let min = self.waveform.min_truncation();
            if l < min {
                return Err(Error::invalid(format!(
                    "truncation {l} is below the minimum {min} for waveform {}",
                    self.waveform
                )));
            }
        }
        match self.fading {
            PowerMomentSpec::Unfaded { mean_power } | PowerMomentSpec::Rayleigh { mean_power } => {
                if !(mean_power > 0.0 && mean_power.is_finite()) {
                    return Err(Error::invalid("mean power must be positive"));
                }
            }
            PowerMomentSpec::Custom { .. } => {
                return Err(Error::invalid("the simulator samples only unfaded or rayleigh fading"));
            }
        }
        Ok(())
    }

    /// Errors when `(2M+1)K` exceeds `cap`.
    pub fn check_dimension(&self, cap: usize) -> Result<()> {
        let dim = self.dimension();
        if dim > cap {
            Err(Error::DimensionCap { dim, cap })
        } else {
            Ok(())
        }
    }

    /// The limiting law the empirical moments should approach.
    pub fn target_law(&self) -> Result<SpectralLaw> {
        match self.synchrony {
            Synchrony::ChipSynchronous => SpectralLaw::chip_synchronous(self.load(), self.fading.clone()),
            Synchrony::ChipAsynchronous => {
                SpectralLaw::chip_asynchronous(self.load(), self.waveform.clone(), self.fading.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_config_with_defaults_and_aliases() {
        let c: SystemConfig =
            serde_json::from_str(r#"{"K": 10, "N": 20, "M": 2, "fading": "rayleigh", "synchrony": "chip_asynchronous", "waveform": "srrc:0.5"}"#)
                .unwrap();
        assert_eq!((c.users, c.chips, c.half_window), (10, 20, 2));
        assert_eq!(c.fading, PowerMomentSpec::rayleigh());
        assert_eq!(c.delay_model(), DelayModel::Uniform);
        assert_eq!(c.truncation(), Some(30));
        assert_eq!(c.dimension(), 50);
        let r = c.resolved();
        let back: SystemConfig = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<SystemConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(SystemConfig::default().validate().is_ok());
        let bad = SystemConfig { trials: 0, ..SystemConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SystemConfig { delay_model: Some(DelayModel::Uniform), ..SystemConfig::default() };
        assert!(bad.validate().is_err());
        let mut bad = SystemConfig::chip_asynchronous(4, 8, 1, ChipWaveform::sinc());
        bad.truncation = Some(20);
        assert!(bad.validate().is_err());
        let bad = SystemConfig { fading: PowerMomentSpec::Custom { values: vec![1.0] }, ..SystemConfig::default() };
        assert!(bad.validate().is_err());
        assert!(matches!(
            SystemConfig::default().check_dimension(1000),
            Err(Error::DimensionCap { dim: 1020, cap: 1000 })
        ));
    }
}

//! Finite random-spreading systems: crosscorrelation matrices built from
//! random chips and delays, optional fading, and Monte Carlo statistics of
//! their normalized trace moments.
//!
//! Moments are normalized by `(2M+1)K`; the symbols at the window edges
//! see fewer interferers, which biases finite-`M` moments by `O(1/M)`.

mod config;
mod matrix;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

pub use config::{ChipLaw, DelayModel, Spreading, Synchrony, SystemConfig};
pub use matrix::{
    apply_amplitudes, apply_fading, build_r_ca, build_r_cs, build_u, draw_delays, empirical_esd,
    empirical_moment, empirical_moments, generate_spreading, ChipTable, CrosscorrelationMatrix,
    HistogramBin, Realization, SpectralHistogram,
};

// stream reserved for delays shared by every trial
const FROZEN_DELAY_STREAM: u64 = u64::MAX;

/// Random stream of trial `trial`: the master seed selects the key, the
/// trial index the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws one realization, builds its crosscorrelation matrix and applies
/// fading. `config` must be valid.
pub fn simulate_trial(config: &SystemConfig, trial: u64) -> Result<CrosscorrelationMatrix> {
    let mut rng = trial_rng(config.seed, trial);
    let chips = generate_spreading(config, &mut rng);
    let delays = if config.freeze_delays {
        draw_delays(config, &mut trial_rng(config.seed, FROZEN_DELAY_STREAM))
    } else {
        draw_delays(config, &mut rng)
    };
    let real = Realization::new(chips, delays)?;
    let r = match config.truncation() {
        None => build_r_cs(&real)?,
        Some(l) => build_r_ca(&real, &config.waveform, l)?,
    };
    apply_fading(&r, &config.fading, &mut rng)
}

/// Monte Carlo statistics of `m_n` against the limiting moment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentStatistic {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation over `√trials`; NaN for one trial.
    pub std_error: f64,
    pub target: f64,
    pub relative_deviation: f64,
    pub z_score: f64,
}

impl MomentStatistic {
    fn new(n: usize, samples: &[f64], target: f64) -> Self {
        let count = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / count;
        let std_error = if samples.len() > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
            (var / count).sqrt()
        } else {
            f64::NAN
        };
        let diff = mean - target;
        // a statistic with no spread (m_1 for binary chips) is judged exactly
        let z_score = if std_error > 0.0 {
            diff / std_error
        } else if diff.abs() <= 1e-12 * target.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        MomentStatistic { n, mean, std_error, target, relative_deviation: diff / target, z_score }
    }
}

/// Result of [`run_trials`], echoing the resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub config: SystemConfig,
    pub load: f64,
    pub dimension: usize,
    pub moments: Vec<MomentStatistic>,
}

impl TrialReport {
    /// True when every `|z| ≤ limit`.
    pub fn within(&self, limit: f64) -> bool {
        self.moments.iter().all(|m| m.z_score.abs() <= limit)
    }

    pub fn moment(&self, n: usize) -> Option<&MomentStatistic> {
        self.moments.iter().find(|m| m.n == n)
    }

    /// CSV with header `n,mean,std_error,target,relative_deviation,z_score`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "mean", "std_error", "target", "relative_deviation", "z_score"])?;
        for m in &self.moments {
            let mut row = vec![m.n.to_string()];
            row.extend(
                [m.mean, m.std_error, m.target, m.relative_deviation, m.z_score]
                    .iter()
                    .map(|&v| crate::aem::format_value(v)),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `config.trials` independent trials and compares `m_1..=m_{n_max}`
/// with the limiting moments. Trials run concurrently on per-trial streams
/// and are reduced in trial order, so the report depends only on the
/// configuration.
pub fn run_trials(config: &SystemConfig) -> Result<TrialReport> {
    config.validate()?;
    let config = config.resolved();
    let target = config.target_law()?.moments(config.n_max)?;
    let samples = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| simulate_trial(&config, t).map(|r| empirical_moments(&r, config.n_max)))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let moments = (1..=config.n_max)
        .map(|n| {
            let column: Vec<f64> = samples.iter().map(|s| s[n - 1]).collect();
            MomentStatistic::new(n, &column, target.get(n).unwrap_or(f64::NAN))
        })
        .collect();
    Ok(TrialReport { load: config.load(), dimension: config.dimension(), moments, config })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aem::{aem_ca, PowerMomentSpec};
    use crate::waveform::{ChipWaveform, WMomentTable};

    fn mutual(a: &MomentStatistic, b: &MomentStatistic, k: f64) -> bool {
        (a.mean - b.mean).abs() <= k * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
    }

    #[test]
    fn single_trial_is_reproducible() {
        let c = SystemConfig { trials: 1, seed: 42, ..SystemConfig::chip_synchronous(10, 20, 2) };
        let a = run_trials(&c).unwrap();
        let b = run_trials(&c).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.moments[1].std_error.is_nan());
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,mean,std_error,target,relative_deviation,z_score\n1,1,nan,1,0,0\n"));
        assert!(run_trials(&SystemConfig { trials: 0, ..c }).is_err());
    }

    #[test]
    fn serial_and_parallel_reduction_agree() {
        let c = SystemConfig { trials: 4, seed: 3, ..SystemConfig::chip_synchronous(8, 16, 2) };
        let report = run_trials(&c).unwrap();
        let serial: Vec<f64> = (0..4).map(|t| empirical_moment(&simulate_trial(&c, t).unwrap(), 2).unwrap()).collect();
        assert_eq!(report.moments[1].mean, serial.iter().sum::<f64>() / 4.0);
    }

    #[test]
    fn asynchronous_srrc_second_moment() {
        let w = ChipWaveform::srrc(0.5).unwrap();
        let mut c = SystemConfig::chip_asynchronous(60, 120, 6, w.clone());
        c.truncation = Some(30);
        c.n_max = 2;
        c.seed = 5;
        let report = run_trials(&c).unwrap();
        let target = aem_ca(2, 0.5, &WMomentTable::new(&w, 2).unwrap()).unwrap();
        assert!((target - 1.4375).abs() < 1e-9);
        let m2 = report.moment(2).unwrap();
        assert_eq!(m2.target, target);
        // edge symbols miss part of their interference, so the mean sits low by O(1/M)
        assert!((m2.mean - target).abs() < 0.05 * target, "{m2:?}");
    }

    #[test]
    fn short_and_long_codes_agree() {
        let base = SystemConfig { seed: 11, n_max: 3, ..SystemConfig::chip_synchronous(30, 60, 4) };
        let short = run_trials(&SystemConfig { spreading: Spreading::Short, ..base.clone() }).unwrap();
        let long = run_trials(&SystemConfig { spreading: Spreading::Long, ..base }).unwrap();
        for n in 2..=3 {
            assert!(mutual(short.moment(n).unwrap(), long.moment(n).unwrap(), 3.0), "n={n}");
        }
    }

    #[test]
    fn frozen_delays_are_shared() {
        let c = SystemConfig { freeze_delays: true, ..SystemConfig::chip_synchronous(6, 12, 1) };
        let d0 = draw_delays(&c, &mut trial_rng(c.seed, FROZEN_DELAY_STREAM));
        assert!(d0.iter().any(|&d| d > 0.0));
        // identical chips and delays would give identical matrices; only chips differ
        let a = simulate_trial(&c, 0).unwrap();
        let b = simulate_trial(&c, 1).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn delay_realizations_do_not_matter() {
        let base = SystemConfig { n_max: 3, ..SystemConfig::chip_synchronous(30, 60, 4) };
        let a = run_trials(&SystemConfig { seed: 1, freeze_delays: true, ..base.clone() }).unwrap();
        let b = run_trials(&SystemConfig { seed: 2, freeze_delays: true, ..base }).unwrap();
        for n in 2..=3 {
            assert!(mutual(a.moment(n).unwrap(), b.moment(n).unwrap(), 3.0), "n={n}");
        }
    }

    #[test]
    fn wider_pulses_have_smaller_second_moment() {
        let mut sinc = SystemConfig::chip_asynchronous(40, 40, 3, ChipWaveform::sinc());
        sinc.n_max = 2;
        sinc.trials = 10;
        sinc.truncation = Some(60);
        let srrc = SystemConfig { waveform: ChipWaveform::srrc(1.0).unwrap(), truncation: Some(30), ..sinc.clone() };
        let a = run_trials(&sinc).unwrap();
        let b = run_trials(&srrc).unwrap();
        let (a, b) = (a.moment(2).unwrap(), b.moment(2).unwrap());
        assert!(!mutual(a, b, 3.0) && a.mean > b.mean, "{a:?} {b:?}");
    }

    #[test]
    fn finite_size_error_shrinks_with_n() {
        let run = |n: usize| {
            let c = SystemConfig { seed: 21, ..SystemConfig::chip_synchronous(n / 2, n, 6) };
            let r = run_trials(&c).unwrap();
            (2..=4).map(|k| r.moment(k).unwrap().relative_deviation.abs()).collect::<Vec<_>>()
        };
        let small = run(60);
        let large = run(240);
        for (s, l) in small.iter().zip(&large) {
            assert!(l < s, "{small:?} {large:?}");
        }
    }

    #[test]
    fn rayleigh_target() {
        let c = SystemConfig {
            fading: PowerMomentSpec::rayleigh(),
            n_max: 2,
            trials: 10,
            ..SystemConfig::chip_synchronous(40, 80, 4)
        };
        let r = run_trials(&c).unwrap();
        // m_2 = P^(2) + β (P^(1))²
        let m2 = r.moment(2).unwrap();
        assert!((m2.target - 2.5).abs() < 1e-12);
        assert!(m2.relative_deviation.abs() < 0.1, "{m2:?}");
    }
}

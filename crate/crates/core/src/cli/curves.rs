use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aem::{format_value, PowerMomentSpec};
use crate::error::{Error, Result};
use crate::quadrature::{
    closed_form_mmse, closed_form_mmse_eff, closed_form_opt, ebn0_of_snr, mmse_value, snr_of_ebn0,
    spectral_efficiency_mmse_lb, spectral_efficiency_opt, QuadratureRule, SpectralLaw,
};
use crate::waveform::ChipWaveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Receiver {
    #[default]
    Opt,
    Mmse,
}

/// Where each curve point sits: fixed `E_b/N_0` (snr solved per point) or
/// fixed snr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatingPoint {
    Ebn0Db(f64),
    SnrDb(f64),
}

/// A sweep over roll-offs (SRRC chips, 0 meaning sinc) and loads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSpec {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub operating_point: OperatingPoint,
    pub receiver: Receiver,
    pub fading: PowerMomentSpec,
    /// Rule size; 10 unfaded / 15 faded when absent.
    pub points: Option<usize>,
}

/// One curve point. Closed-form columns are NaN except for unfaded sinc
/// (`α = 0`) rows; every column but the inputs is NaN when the fixed point
/// has no bracket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub beta: f64,
    pub alpha: f64,
    pub ebn0_db: f64,
    pub snr_db: f64,
    pub c_opt: f64,
    pub c_mmse_lb: f64,
    pub mmse: f64,
    pub c_opt_closed_form: f64,
    pub c_mmse_closed_form: f64,
    pub mmse_closed_form: f64,
}

pub const CURVE_HEADER: [&str; 10] = [
    "beta",
    "alpha",
    "ebn0_db",
    "snr_db",
    "c_opt",
    "c_mmse_lb",
    "mmse",
    "c_opt_closed_form",
    "c_mmse_closed_form",
    "mmse_closed_form",
];

impl CurveRow {
    fn values(&self) -> [f64; 10] {
        [
            self.beta,
            self.alpha,
            self.ebn0_db,
            self.snr_db,
            self.c_opt,
            self.c_mmse_lb,
            self.mmse,
            self.c_opt_closed_form,
            self.c_mmse_closed_form,
            self.mmse_closed_form,
        ]
    }

    fn unsolved(beta: f64, alpha: f64, ebn0_db: f64) -> Self {
        let nan = f64::NAN;
        CurveRow {
            beta,
            alpha,
            ebn0_db,
            snr_db: nan,
            c_opt: nan,
            c_mmse_lb: nan,
            mmse: nan,
            c_opt_closed_form: nan,
            c_mmse_closed_form: nan,
            mmse_closed_form: nan,
        }
    }
}

/// Curve rows in `alpha`-major order plus per-row diagnostics (rule
/// truncations, missing brackets).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub rows: Vec<CurveRow>,
    pub warnings: Vec<String>,
}

impl Curve {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CURVE_HEADER)?;
        for row in &self.rows {
            w.write_record(row.values().iter().map(|&v| format_value(v)))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl CurveSpec {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::invalid("alpha list is empty"));
        }
        if self.betas.is_empty() {
            return Err(Error::invalid("beta grid is empty"));
        }
        if let Some(&b) = self.betas.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::invalid(format!("curve loads must be > 0, got {b}")));
        }
        for &a in &self.alphas {
            ChipWaveform::srrc(a)?;
        }
        if self.points == Some(0) {
            return Err(Error::invalid("points must be at least 1"));
        }
        let db = match self.operating_point {
            OperatingPoint::Ebn0Db(v) | OperatingPoint::SnrDb(v) => v,
        };
        if !db.is_finite() {
            return Err(Error::invalid("operating point must be finite"));
        }
        Ok(())
    }

    /// The law behind one curve point.
    pub fn law(&self, alpha: f64, beta: f64) -> Result<SpectralLaw> {
        SpectralLaw::chip_asynchronous(beta, ChipWaveform::srrc(alpha)?, self.fading.clone())
    }

    pub fn run(&self) -> Result<Curve> {
        self.validate()?;
        let grid: Vec<(f64, f64)> =
            self.alphas.iter().flat_map(|&a| self.betas.iter().map(move |&b| (a, b))).collect();
        let results = grid
            .par_iter()
            .map(|&(alpha, beta)| self.point(alpha, beta))
            .collect::<Result<Vec<_>>>()?;
        let mut curve = Curve { rows: Vec::with_capacity(results.len()), warnings: Vec::new() };
        for (row, warning) in results {
            curve.rows.push(row);
            curve.warnings.extend(warning);
        }
        Ok(curve)
    }

    fn efficiency(&self, rule: &QuadratureRule, alpha: f64, beta: f64, snr: f64) -> Result<f64> {
        match self.receiver {
            Receiver::Opt => spectral_efficiency_opt(rule, alpha, beta, snr),
            Receiver::Mmse => spectral_efficiency_mmse_lb(rule, alpha, beta, snr),
        }
    }

    fn point(&self, alpha: f64, beta: f64) -> Result<(CurveRow, Option<String>)> {
        let law = self.law(alpha, beta)?;
        let rule = law.rule(self.points.unwrap_or_else(|| law.default_points()))?;
        let mut warning = rule.warning().map(|w| format!("alpha={alpha} beta={beta}: {w}"));
        let (snr, ebn0_db) = match self.operating_point {
            OperatingPoint::Ebn0Db(db) => {
                let target = 10f64.powf(db / 10.0);
                match snr_of_ebn0(beta, alpha, target, |s| self.efficiency(&rule, alpha, beta, s)) {
                    Ok(snr) => (snr, db),
                    Err(e @ Error::NoBracket(_)) => {
                        let note = format!("alpha={alpha} beta={beta}: {e}");
                        warning = Some(match warning {
                            Some(w) => format!("{w}; {note}"),
                            None => note,
                        });
                        return Ok((CurveRow::unsolved(beta, alpha, db), warning));
                    }
                    Err(e) => return Err(e),
                }
            }
            OperatingPoint::SnrDb(db) => {
                let snr = 10f64.powf(db / 10.0);
                let c = self.efficiency(&rule, alpha, beta, snr)?;
                (snr, 10.0 * ebn0_of_snr(beta, alpha, snr, c)?.log10())
            }
        };
        let sinc_reference = alpha == 0.0 && self.fading == PowerMomentSpec::unfaded();
        let reference = |f: fn(f64, f64) -> Result<f64>| -> Result<f64> {
            if sinc_reference {
                f(beta, snr)
            } else {
                Ok(f64::NAN)
            }
        };
        let row = CurveRow {
            beta,
            alpha,
            ebn0_db,
            snr_db: 10.0 * snr.log10(),
            c_opt: spectral_efficiency_opt(&rule, alpha, beta, snr)?,
            c_mmse_lb: spectral_efficiency_mmse_lb(&rule, alpha, beta, snr)?,
            mmse: mmse_value(&rule, snr)?,
            c_opt_closed_form: reference(closed_form_opt)?,
            c_mmse_closed_form: reference(closed_form_mmse_eff)?,
            mmse_closed_form: reference(closed_form_mmse)?,
        };
        Ok((row, warning))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alphas: Vec<f64>, betas: Vec<f64>, op: OperatingPoint) -> CurveSpec {
        CurveSpec {
            alphas,
            betas,
            operating_point: op,
            receiver: Receiver::Opt,
            fading: PowerMomentSpec::unfaded(),
            points: None,
        }
    }

    #[test]
    fn sinc_row_matches_closed_form() {
        let c = spec(vec![0.0], vec![1.0], OperatingPoint::Ebn0Db(10.0)).run().unwrap();
        let row = &c.rows[0];
        assert!((row.c_opt / row.c_opt_closed_form - 1.0).abs() < 0.02, "{row:?}");
        let e = 10.0 * ebn0_of_snr(1.0, 0.0, 10f64.powf(row.snr_db / 10.0), row.c_opt).unwrap().log10();
        assert!((e - 10.0).abs() < 1e-5);
    }

    #[test]
    fn small_load_ratios_follow_bandwidth() {
        let c = spec(vec![0.0, 0.5, 1.0], vec![0.01], OperatingPoint::Ebn0Db(10.0)).run().unwrap();
        let base = c.rows[0].c_opt;
        assert!((c.rows[1].c_opt / base - 1.0 / 1.5).abs() < 0.03 / 1.5);
        assert!((c.rows[2].c_opt / base - 0.5).abs() < 0.015);
        assert!(c.rows[1].c_opt_closed_form.is_nan());
    }

    #[test]
    fn unreachable_operating_point_gives_nan_row() {
        let c = spec(vec![0.0], vec![1.0], OperatingPoint::Ebn0Db(-5.0)).run().unwrap();
        assert!(c.rows[0].snr_db.is_nan() && c.rows[0].c_opt.is_nan());
        assert_eq!(c.warnings.len(), 1);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("1,0,-5,nan,nan"));
    }

    #[test]
    fn validation() {
        assert!(spec(vec![0.0], vec![], OperatingPoint::SnrDb(20.0)).run().is_err());
        assert!(spec(vec![], vec![1.0], OperatingPoint::SnrDb(20.0)).run().is_err());
        assert!(spec(vec![1.5], vec![1.0], OperatingPoint::SnrDb(20.0)).run().is_err());
        assert!(spec(vec![0.0], vec![0.0], OperatingPoint::SnrDb(20.0)).run().is_err());
    }
}

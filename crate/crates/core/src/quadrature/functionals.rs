use std::f64::consts::LOG2_E;

use super::QuadratureRule;
use crate::error::{Error, Result};

const BRACKET_DB: (f64, f64) = (-30.0, 60.0);

/// `Σ w_q g(x_q)`.
pub fn expectation<G: Fn(f64) -> f64>(rule: &QuadratureRule, g: G) -> Result<f64> {
    let mut total = 0.0;
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("integrand at node {x}")));
        }
        total += w * v;
    }
    Ok(total)
}

fn check_snr(snr: f64) -> Result<()> {
    if snr >= 0.0 && snr.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("snr must be finite and >= 0, got {snr}")))
    }
}

fn check_load(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("roll-off must be >= 0, got {alpha}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be >= 0, got {beta}")));
    }
    Ok(())
}

/// Optimum-receiver spectral efficiency `β/(1+α) · E log₂(1 + snr·λ)`.
pub fn spectral_efficiency_opt(rule: &QuadratureRule, alpha: f64, beta: f64, snr: f64) -> Result<f64> {
    check_load(alpha, beta)?;
    check_snr(snr)?;
    let e = expectation(rule, |x| (snr * x).ln_1p() * LOG2_E)?;
    Ok(beta / (1.0 + alpha) * e)
}

/// MMSE-receiver spectral efficiency lower bound
/// `−β/(1+α) · log₂ E{1/(1 + snr·λ)}`; an equality for sinc chips.
pub fn spectral_efficiency_mmse_lb(rule: &QuadratureRule, alpha: f64, beta: f64, snr: f64) -> Result<f64> {
    check_load(alpha, beta)?;
    let e = mmse_value(rule, snr)?;
    Ok(-beta / (1.0 + alpha) * e.log2())
}

/// Mean MMSE over users, `E{1/(1 + snr·λ)}`.
pub fn mmse_value(rule: &QuadratureRule, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    expectation(rule, |x| 1.0 / (1.0 + snr * x))
}

/// `F(x, z) = (√(x(1+√z)² + 1) − √(x(1−√z)² + 1))²`.
pub fn closed_form_f(x: f64, z: f64) -> f64 {
    let s = z.sqrt();
    let d = (x * (1.0 + s).powi(2) + 1.0).sqrt() - (x * (1.0 - s).powi(2) + 1.0).sqrt();
    d * d
}

fn check_closed_form(beta: f64, snr: f64) -> Result<()> {
    if beta > 0.0 && snr > 0.0 && beta.is_finite() && snr.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("closed forms need beta > 0 and snr > 0"))
    }
}

/// Optimum-receiver spectral efficiency for sinc chips, in bits/s/Hz.
pub fn closed_form_opt(beta: f64, snr: f64) -> Result<f64> {
    check_closed_form(beta, snr)?;
    let f = closed_form_f(snr, beta);
    Ok(beta * (1.0 + snr - 0.25 * f).log2() + (1.0 + snr * beta - 0.25 * f).log2()
        - LOG2_E / (4.0 * snr) * f)
}

/// MMSE-receiver spectral efficiency for sinc chips.
pub fn closed_form_mmse_eff(beta: f64, snr: f64) -> Result<f64> {
    check_closed_form(beta, snr)?;
    Ok(beta * (1.0 + snr - 0.25 * closed_form_f(snr, beta)).log2())
}

/// Mean MMSE for sinc chips, `1 − F(snr, β)/(4β·snr)`.
pub fn closed_form_mmse(beta: f64, snr: f64) -> Result<f64> {
    check_closed_form(beta, snr)?;
    Ok(1.0 - closed_form_f(snr, beta) / (4.0 * beta * snr))
}

/// `E_b/N_0 = β·snr / ((1+α)·C)`.
pub fn ebn0_of_snr(beta: f64, alpha: f64, snr: f64, efficiency: f64) -> Result<f64> {
    check_load(alpha, beta)?;
    if !(efficiency > 0.0) {
        return Err(Error::invalid(format!("spectral efficiency must be > 0, got {efficiency}")));
    }
    Ok(beta * snr / ((1.0 + alpha) * efficiency))
}

/// Solves `ebn0_of_snr(β, α, snr, C(snr)) = ebn0` for `snr` by bisection on
/// the dB scale over [−30, 60] dB.
pub fn snr_of_ebn0<C>(beta: f64, alpha: f64, ebn0: f64, efficiency: C) -> Result<f64>
where
    C: Fn(f64) -> Result<f64>,
{
    if !(ebn0 > 0.0 && ebn0.is_finite()) {
        return Err(Error::invalid(format!("Eb/N0 must be > 0, got {ebn0}")));
    }
    let target_db = 10.0 * ebn0.log10();
    let gap = |db: f64| -> Result<f64> {
        let snr = 10f64.powf(db / 10.0);
        let e = ebn0_of_snr(beta, alpha, snr, efficiency(snr)?)?;
        Ok(10.0 * e.log10() - target_db)
    };
    let (mut lo, mut hi) = BRACKET_DB;
    let mut g_lo = gap(lo)?;
    let g_hi = gap(hi)?;
    if g_lo == 0.0 {
        return Ok(10f64.powf(lo / 10.0));
    }
    if g_hi == 0.0 {
        return Ok(10f64.powf(hi / 10.0));
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoBracket(format!("snr at Eb/N0 = {target_db:.3} dB, beta = {beta}")));
    }
    // 1e-7 dB is a relative snr error of about 2e-8
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        let g_mid = gap(mid)?;
        if g_mid == 0.0 {
            return Ok(10f64.powf(mid / 10.0));
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(10f64.powf(0.5 * (lo + hi) / 10.0))
}

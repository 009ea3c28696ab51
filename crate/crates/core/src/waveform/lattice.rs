use rand::Rng;
use serde::Serialize;

use super::ChipWaveform;
use crate::error::{Error, Result};

/// Mean and standard error of a Monte Carlo lattice-sum estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Truncated time-domain sum
///
/// `Σ R(n_0−n_1+η_0−η_1) R(n_1−n_2+η_1−η_2) ⋯ R(n_{m−1}−n_0+η_{m−1}−η_0)`
///
/// over `n_1, …, n_{m−1} ∈ [−L, L]`, with offsets `etas` in chips. For a
/// pulse of bandwidth at most half the chip rate this equals `W^(m)` for any
/// offsets; wider pulses need the offsets averaged (see [`xi_lattice_mc`]).
///
/// The chain of lags is evaluated as `m − 1` Toeplitz matrix-vector products,
/// so the cost is `O(m L²)` rather than `O(L^{m−1})`.
///
/// Truncation error: SRRC tails (roll-off ≥ 0.2) are negligible from
/// `L = 30`. Sinc tails decay like `1/x`, leaving roughly `0.2/L` at
/// `m = 3`, so `L = 400` is needed for 1e-3 accuracy there.
pub fn xi_lattice_sum(w: &ChipWaveform, etas: &[f64], n0: i64, truncation: usize) -> Result<f64> {
    let m = etas.len();
    if m < 2 {
        return Err(Error::invalid("lattice sum needs m >= 2 offsets"));
    }
    if truncation == 0 {
        return Err(Error::invalid("lattice truncation must be positive"));
    }
    let l = truncation as i64;
    let width = (2 * l + 1) as usize;
    let idx = |n: i64| (n + l) as usize;

    // lag table for one factor: r[d + 2L] = R(d + shift), d ∈ [−2L, 2L]
    let lag_table = |shift: f64| -> Result<Vec<f64>> {
        (-2 * l..=2 * l).map(|d| w.autocorrelation_chips(d as f64 + shift)).collect()
    };

    let mut v = vec![0.0; width];
    for n1 in -l..=l {
        v[idx(n1)] = w.autocorrelation_chips((n0 - n1) as f64 + etas[0] - etas[1])?;
    }
    for j in 1..m - 1 {
        let r = lag_table(etas[j] - etas[j + 1])?;
        let mut next = vec![0.0; width];
        for (b, out) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (a, &va) in v.iter().enumerate() {
                // (n_a − n_b) + 2L indexes the table
                acc += va * r[a + width - 1 - b];
            }
            *out = acc;
        }
        v = next;
    }
    let mut total = 0.0;
    for n in -l..=l {
        total += v[idx(n)] * w.autocorrelation_chips((n - n0) as f64 + etas[m - 1] - etas[0])?;
    }
    Ok(total)
}

/// Averages [`xi_lattice_sum`] over offsets drawn i.i.d. uniform on one chip.
pub fn xi_lattice_mc<R: Rng + ?Sized>(
    w: &ChipWaveform,
    m: usize,
    draws: usize,
    truncation: usize,
    rng: &mut R,
) -> Result<LatticeEstimate> {
    if draws < 2 {
        return Err(Error::invalid("Monte Carlo lattice sum needs at least two draws"));
    }
    let mut etas = vec![0.0; m];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        for e in etas.iter_mut() {
            *e = rng.random::<f64>();
        }
        let x = xi_lattice_sum(w, &etas, 0, truncation)?;
        sum += x;
        sum_sq += x * x;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(LatticeEstimate { mean, std_error: (var / n).sqrt(), draws })
}

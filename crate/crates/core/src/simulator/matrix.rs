use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use super::config::{ChipLaw, DelayModel, Spreading, SystemConfig};
use crate::aem::PowerMomentSpec;
use crate::error::{Error, Result};
use crate::waveform::ChipWaveform;

/// Spreading sequences of every user for every symbol.
///
/// Chips are stored scaled by `√N` (unit variance, exactly `±1` for binary
/// chips) so that correlation sums are exact integers before the final
/// division by `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipTable {
    chips: usize,
    users: usize,
    symbols: usize,
    // one N × K matrix per symbol; a single shared one for short codes
    unit: Vec<DMatrix<f64>>,
}

impl ChipTable {
    /// Builds a table from unit-variance chips. `unit` holds either one
    /// matrix (short code) or one per symbol.
    pub fn from_unit(symbols: usize, unit: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = unit.first().ok_or_else(|| Error::invalid("empty chip table"))?;
        let (chips, users) = first.shape();
        if chips == 0 || users == 0 || symbols == 0 {
            return Err(Error::invalid("chip table needs N, K and symbol count >= 1"));
        }
        if unit.len() != 1 && unit.len() != symbols {
            return Err(Error::invalid("chip table needs one matrix or one per symbol"));
        }
        if unit.iter().any(|m| m.shape() != (chips, users)) {
            return Err(Error::invalid("chip matrices differ in shape"));
        }
        Ok(ChipTable { chips, users, symbols, unit })
    }

    pub fn chips(&self) -> usize {
        self.chips
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn is_short(&self) -> bool {
        self.unit.len() == 1
    }

    /// Unit-variance chips of symbol index `s` (symbol `s − M`), one column
    /// per user.
    pub fn unit_chips(&self, s: usize) -> &DMatrix<f64> {
        if self.is_short() {
            &self.unit[0]
        } else {
            &self.unit[s]
        }
    }

    /// `c_k^{(p)}` of symbol index `s`.
    pub fn chip(&self, s: usize, user: usize, p: usize) -> f64 {
        self.unit_chips(s)[(p, user)] / (self.chips as f64).sqrt()
    }
}

/// Draws the chip table of one trial.
pub fn generate_spreading<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> ChipTable {
    let count = match config.spreading {
        Spreading::Short => 1,
        Spreading::Long => config.symbols(),
    };
    let unit = (0..count)
        .map(|_| {
            DMatrix::from_fn(config.chips, config.users, |_, _| match config.chip_law {
                ChipLaw::Binary => {
                    if rng.random_bool(0.5) {
                        1.0
                    } else {
                        -1.0
                    }
                }
                ChipLaw::Gaussian => rng.sample(StandardNormal),
            })
        })
        .collect();
    ChipTable { chips: config.chips, users: config.users, symbols: config.symbols(), unit }
}

/// Draws the user delays, in chips.
pub fn draw_delays<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Vec<f64> {
    let k = config.users;
    let n = config.chips;
    match config.delay_model() {
        DelayModel::Zero => vec![0.0; k],
        DelayModel::ChipMultiples => {
            let mut d: Vec<usize> = std::iter::once(0).chain((1..k).map(|_| rng.random_range(0..n))).collect();
            d.sort_unstable();
            d.into_iter().map(|x| x as f64).collect()
        }
        DelayModel::Uniform => (0..k).map(|_| rng.random::<f64>() * n as f64).collect(),
        DelayModel::UniformChip => (0..k).map(|_| rng.random::<f64>()).collect(),
    }
}

/// Chips and delays of one system instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub chips: ChipTable,
    pub delays: Vec<f64>,
}

impl Realization {
    pub fn new(chips: ChipTable, delays: Vec<f64>) -> Result<Self> {
        if delays.len() != chips.users() {
            return Err(Error::invalid(format!("{} delays for {} users", delays.len(), chips.users())));
        }
        if delays.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("delays must be finite"));
        }
        Ok(Realization { chips, delays })
    }

    /// Chips first, then delays, from the same stream.
    pub fn draw<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Self {
        let chips = generate_spreading(config, rng);
        let delays = draw_delays(config, rng);
        Realization { chips, delays }
    }

    fn integer_delays(&self) -> Result<Vec<i64>> {
        self.delays
            .iter()
            .map(|&d| {
                if d.fract() == 0.0 {
                    Ok(d as i64)
                } else {
                    Err(Error::invalid(format!("delay {d} is not a multiple of the chip duration")))
                }
            })
            .collect()
    }
}

/// A `(2M+1)K` square crosscorrelation matrix, indexed by
/// `(symbol index s, user k) ↦ s·K + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosscorrelationMatrix {
    matrix: DMatrix<f64>,
    users: usize,
    symbols: usize,
    truncation: Option<usize>,
}

impl CrosscorrelationMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>, users: usize) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || users == 0 || r % users != 0 {
            return Err(Error::invalid(format!("{r}×{c} is not a block matrix for {users} users")));
        }
        Ok(CrosscorrelationMatrix { symbols: r / users, matrix, users, truncation: None })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    /// Lag truncation used to build the matrix, if any.
    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    /// Entry between (symbol `s`, user `k`) and (symbol `t`, user `l`).
    pub fn entry(&self, s: usize, k: usize, t: usize, l: usize) -> f64 {
        self.matrix[(s * self.users + k, t * self.users + l)]
    }

    /// `K × K` block `[R]_{s,t}`.
    pub fn block(&self, s: usize, t: usize) -> DMatrix<f64> {
        let k = self.users;
        self.matrix.view((s * k, t * k), (k, k)).into_owned()
    }

    /// Largest `|R_ij − R_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for j in 0..m.ncols() {
            for i in 0..j {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Chip-synchronous crosscorrelation matrix from the δ-sum
/// `ρ = Σ_p Σ_q c_k^{(p)} c_l^{(q)} δ(p + τ_k, q + τ_l)` over the three
/// nonzero block diagonals.
pub fn build_r_cs(real: &Realization) -> Result<CrosscorrelationMatrix> {
    let delays = real.integer_delays()?;
    let chips = &real.chips;
    let (n, k, symbols) = (chips.chips() as i64, chips.users(), chips.symbols());
    let dim = symbols * k;
    let mut r = DMatrix::zeros(dim, dim);
    for s in 0..symbols {
        let a = chips.unit_chips(s);
        for t in s.saturating_sub(1)..(s + 2).min(symbols) {
            let b = chips.unit_chips(t);
            for user in 0..k {
                for other in 0..k {
                    // chip p of (s, user) meets chip q = p + shift of (t, other)
                    let shift = (s as i64 - t as i64) * n + delays[user] - delays[other];
                    let lo = (-shift).max(0);
                    let hi = (n - shift).min(n);
                    let mut acc = 0.0;
                    for p in lo..hi {
                        acc += a[(p as usize, user)] * b[((p + shift) as usize, other)];
                    }
                    r[(s * k + user, t * k + other)] = acc / n as f64;
                }
            }
        }
    }
    Ok(CrosscorrelationMatrix { matrix: r, users: k, symbols, truncation: None })
}

/// Tall factor `U` of `R_cs = UᵀU`: column `(s, k)` carries user `k`'s
/// symbol-`s` chips starting at row `s·N + τ_k`. Shape
/// `(2M+2)N × (2M+1)K`.
pub fn build_u(real: &Realization) -> Result<DMatrix<f64>> {
    let delays = real.integer_delays()?;
    let chips = &real.chips;
    let (n, k, symbols) = (chips.chips(), chips.users(), chips.symbols());
    if delays.iter().any(|&d| d < 0 || d >= n as i64) {
        return Err(Error::invalid("factor construction needs delays in [0, N)"));
    }
    let mut u = DMatrix::zeros((symbols + 1) * n, symbols * k);
    for s in 0..symbols {
        for user in 0..k {
            let start = s * n + delays[user] as usize;
            for p in 0..n {
                u[(start + p, s * k + user)] = chips.chip(s, user, p);
            }
        }
    }
    Ok(u)
}

/// Chip-asynchronous crosscorrelation matrix
/// `ρ = Σ_p Σ_q c_k^{(p)} c_l^{(q)} R((p − q) + (s − t)N + τ_k − τ_l)`,
/// dropping lags beyond `truncation` chips.
pub fn build_r_ca(real: &Realization, waveform: &ChipWaveform, truncation: usize) -> Result<CrosscorrelationMatrix> {
    let min = waveform.min_truncation();
    if truncation < min {
        return Err(Error::invalid(format!("truncation {truncation} is below the minimum {min} for {waveform}")));
    }
    let chips = &real.chips;
    let (n, k, symbols) = (chips.chips(), chips.users(), chips.symbols());
    let ni = n as i64;
    let l = truncation as f64;
    let dim = symbols * k;
    let mut r = DMatrix::zeros(dim, dim);

    for user in 0..k {
        for other in user..k {
            let delta = real.delays[user] - real.delays[other];
            // integer parts j of the lags j + δ with |j + δ| ≤ L
            let jlo = (-l - delta).ceil() as i64;
            let jhi = (l - delta).floor() as i64;
            if jhi < jlo {
                continue;
            }
            // reversed so that the inner sum runs over contiguous slices
            let mut table = (jlo..=jhi)
                .map(|j| waveform.autocorrelation_chips(j as f64 + delta))
                .collect::<Result<Vec<f64>>>()?;
            table.reverse();
            let span = table.len() as i64;
            let dlo = (jlo - (ni - 1)).div_euclid(ni) - 1;
            let dhi = (jhi + (ni - 1)).div_euclid(ni) + 1;

            let entry = |a: &DMatrix<f64>, b: &DMatrix<f64>, d: i64| -> f64 {
                let a = &a.as_slice()[user * n..(user + 1) * n];
                let b = &b.as_slice()[other * n..(other + 1) * n];
                let mut acc = 0.0;
                for p in 0..ni {
                    // table index of q is q + (jhi − p − dN)
                    let offset = jhi - p - d * ni;
                    let qlo = (-offset).max(0);
                    let qhi = (span - offset).min(ni);
                    if qlo >= qhi {
                        continue;
                    }
                    let row = &table[(qlo + offset) as usize..(qhi + offset) as usize];
                    let col = &b[qlo as usize..qhi as usize];
                    let dot: f64 = row.iter().zip(col).map(|(x, y)| x * y).sum();
                    acc += a[p as usize] * dot;
                }
                acc / ni as f64
            };

            for d in dlo..=dhi {
                let shared = if chips.is_short() {
                    Some(entry(chips.unit_chips(0), chips.unit_chips(0), d))
                } else {
                    None
                };
                for s in 0..symbols as i64 {
                    let t = s - d;
                    if t < 0 || t >= symbols as i64 || (user == other && t < s) {
                        continue;
                    }
                    let (s, t) = (s as usize, t as usize);
                    let v = match shared {
                        Some(v) => v,
                        None => entry(chips.unit_chips(s), chips.unit_chips(t), d),
                    };
                    r[(s * k + user, t * k + other)] = v;
                    r[(t * k + other, s * k + user)] = v;
                }
            }
        }
    }
    Ok(CrosscorrelationMatrix { matrix: r, users: k, symbols, truncation: Some(truncation) })
}

/// `A R A` with `A = diag(amplitudes)`.
pub fn apply_amplitudes(r: &CrosscorrelationMatrix, amplitudes: &[f64]) -> Result<CrosscorrelationMatrix> {
    if amplitudes.len() != r.dim() {
        return Err(Error::invalid(format!("{} amplitudes for dimension {}", amplitudes.len(), r.dim())));
    }
    let mut out = r.clone();
    for j in 0..r.dim() {
        for i in 0..r.dim() {
            out.matrix[(i, j)] *= amplitudes[i] * amplitudes[j];
        }
    }
    Ok(out)
}

/// `A†RA` with one amplitude per (symbol, user): constant `√P`, or
/// `√(P·E)` with `E` unit exponential for Rayleigh fading. Unit-power
/// unfaded input is returned unchanged.
pub fn apply_fading<R: Rng + ?Sized>(
    r: &CrosscorrelationMatrix,
    fading: &PowerMomentSpec,
    rng: &mut R,
) -> Result<CrosscorrelationMatrix> {
    let amplitudes: Vec<f64> = match *fading {
        PowerMomentSpec::Unfaded { mean_power: 1.0 } => return Ok(r.clone()),
        PowerMomentSpec::Unfaded { mean_power } => vec![mean_power.sqrt(); r.dim()],
        PowerMomentSpec::Rayleigh { mean_power } => (0..r.dim())
            .map(|_| {
                let e: f64 = rng.sample(Exp1);
                (mean_power * e).sqrt()
            })
            .collect(),
        PowerMomentSpec::Custom { .. } => {
            return Err(Error::invalid("the simulator samples only unfaded or rayleigh fading"))
        }
    };
    apply_amplitudes(r, &amplitudes)
}

/// `m_n = tr(R^n) / dim` for `n = 1..=n_max`, from matrix products only:
/// `m_{2k} = ‖R^k‖²_F` and `m_{2k+1} = Σ_ij (R^k)_ij (R^{k+1})_ij`.
pub fn empirical_moments(r: &CrosscorrelationMatrix, n_max: usize) -> Vec<f64> {
    let dim = r.dim() as f64;
    let top = n_max.div_ceil(2);
    let mut powers: Vec<DMatrix<f64>> = Vec::with_capacity(top);
    powers.push(r.matrix.clone());
    for _ in 1..top {
        let next = powers.last().unwrap() * &r.matrix;
        powers.push(next);
    }
    (1..=n_max)
        .map(|n| {
            let v = if n == 1 {
                r.matrix.trace()
            } else if n % 2 == 0 {
                powers[n / 2 - 1].norm_squared()
            } else {
                powers[n / 2 - 1].dot(&powers[n / 2])
            };
            v / dim
        })
        .collect()
}

/// `m_n = tr(R^n) / dim`.
pub fn empirical_moment(r: &CrosscorrelationMatrix, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("moment order must be >= 1"));
    }
    Ok(empirical_moments(r, n)[n - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub mass: f64,
}

/// Eigenvalue histogram of one realization, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralHistogram {
    pub bins: Vec<HistogramBin>,
    #[serde(skip)]
    eigenvalues: Vec<f64>,
}

impl SpectralHistogram {
    /// Sorted eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Empirical CDF `#{ν ≤ x} / dim`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.eigenvalues.partition_point(|&v| v <= x) as f64 / self.eigenvalues.len() as f64
    }

    /// CSV with header `bin_left,bin_right,mass`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for b in &self.bins {
            w.serialize(b)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Eigenvalues of `r` binned over `[λ_min, λ_max]`; a spectrum without
/// spread gives a single bin.
pub fn empirical_esd(r: &CrosscorrelationMatrix, bins: usize) -> Result<SpectralHistogram> {
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    let scale = r.matrix.amax().max(1.0);
    if r.asymmetry() > 1e-12 * scale {
        return Err(Error::invalid("empirical spectrum needs a symmetric matrix"));
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(r.matrix.clone()).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let lo = eig[0];
    let hi = eig[eig.len() - 1];
    let total = eig.len() as f64;
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        let bins = vec![HistogramBin { bin_left: lo, bin_right: hi, mass: 1.0 }];
        return Ok(SpectralHistogram { bins, eigenvalues: eig });
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &eig {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| HistogramBin {
            bin_left: lo + i as f64 * width,
            bin_right: if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width },
            mass: c as f64 / total,
        })
        .collect();
    Ok(SpectralHistogram { bins, eigenvalues: eig })
}

//! Command implementations behind the `spectra-cdma` binary.
//!
//! Every command accepts `--config FILE` (a JSON object keyed by flag names
//! in snake_case; `simulate` and `verify` take a simulator config) and lets
//! flags override it. Exit status: 0 success, 1 validation, 2 numerical
//! breakdown, 3 verification failure.

mod curves;
mod io;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::aem::{
    ca_cumulants, cs_cumulants, cumulants_from_moments, quadratic_form_moments, FreeCumulantSequence,
    MomentSequence, PowerMomentSpec, DEFAULT_N_MAX,
};
use crate::error::{Error, Result};
use crate::nc::{build_kgraph, catalan, count_by_profile, enumerate_nc, kreweras, narayana, profiles};
use crate::quadrature::SpectralLaw;
use crate::simulator::{empirical_esd, run_trials, simulate_trial, SystemConfig};
use crate::waveform::{ChipWaveform, WMomentTable};

pub use curves::{Curve, CurveRow, CurveSpec, OperatingPoint, Receiver, CURVE_HEADER};
pub use io::{dimension_cap, Format, DEFAULT_MAX_DIM, MAX_DIM_VAR};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

/// Largest n accepted by `nc` when listing partitions.
const NC_LIST_MAX: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "spectra-cdma", version, about = "Asymptotic eigenvalue moments of CDMA crosscorrelation matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Noncrossing partitions of [n] with Kreweras complements, or class-size counts.
    Nc(NcArgs),
    /// Asymptotic eigenvalue moments.
    Moments(MomentsArgs),
    /// Free cumulants.
    Cumulants(MomentsArgs),
    /// Spectral moments W^(m) of a chip waveform.
    Wmoments(WmomentsArgs),
    /// Monte Carlo moment statistics (or an eigenvalue histogram) of finite systems.
    Simulate(SimulateArgs),
    /// Gauss quadrature rule of a limiting law.
    Quadrature(QuadratureArgs),
    /// Spectral-efficiency curves.
    Efficiency(CurveArgs),
    /// MMSE curves at fixed snr.
    Mmse(CurveArgs),
    /// Monte Carlo moments against their limits; exit 3 when some |z| exceeds the limit.
    Verify(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MomentKind {
    Cs,
    Ca,
    CsFaded,
    CaFaded,
    QuadraticForm,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
struct NcArgs {
    /// Ground-set size.
    #[arg(long)]
    n: Option<usize>,
    /// Emit class-size profile counts instead of the partitions.
    #[arg(long)]
    counts: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
struct MomentsArgs {
    #[arg(long, value_enum)]
    kind: Option<MomentKind>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    /// sinc, srrc:<alpha> or custom:<csv>.
    #[arg(long)]
    waveform: Option<String>,
    /// unfaded or rayleigh.
    #[arg(long)]
    fading: Option<String>,
    /// Explicit power moments P^(1),P^(2),... (overrides --fading).
    #[arg(long)]
    power_moments: Option<String>,
    /// Moments s_1,s_2,... of S for the quadratic form CᵀSC.
    #[arg(long)]
    s_moments: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
struct WmomentsArgs {
    #[arg(long)]
    waveform: Option<String>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
struct QuadratureArgs {
    #[arg(long, value_enum)]
    kind: Option<MomentKind>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    waveform: Option<String>,
    #[arg(long)]
    fading: Option<String>,
    #[arg(long)]
    power_moments: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[command(allow_negative_numbers = true)]
#[serde(default, deny_unknown_fields)]
struct CurveArgs {
    /// Comma-separated SRRC roll-offs; 0 is sinc.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    /// start:stop:step, inclusive.
    #[arg(long)]
    beta_grid: Option<String>,
    #[arg(long)]
    ebn0_db: Option<f64>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long, value_enum)]
    receiver: Option<Receiver>,
    #[arg(long)]
    fading: Option<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Default)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    /// Simulator config (JSON); flags override its entries.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long = "K")]
    #[serde(rename = "users")]
    k: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "chips")]
    n: Option<usize>,
    #[arg(long = "M")]
    #[serde(rename = "half_window")]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    waveform: Option<String>,
    #[arg(long)]
    fading: Option<String>,
    /// short or long.
    #[arg(long)]
    spreading: Option<String>,
    /// chip-synchronous or chip-asynchronous.
    #[arg(long)]
    synchrony: Option<String>,
    /// zero, chip-multiples, uniform or uniform-chip.
    #[arg(long)]
    delay_model: Option<String>,
    /// binary or gaussian.
    #[arg(long)]
    chip_law: Option<String>,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    freeze_delays: bool,
    /// Emit an eigenvalue histogram of trial 0 with this many bins.
    #[arg(long)]
    #[serde(skip)]
    esd_bins: Option<usize>,
    /// |z| limit for verify.
    #[arg(long, default_value_t = 4.0)]
    #[serde(skip)]
    z_limit: f64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip)]
    format: Option<Format>,
}

/// Outcome of a command: exit status and, for failures, a one-line
/// diagnostic.
#[derive(Debug)]
pub struct Outcome {
    pub status: i32,
    pub message: Option<String>,
}

/// Exit status for a library error.
pub fn exit_status(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return Outcome { status, message: None };
        }
    };
    let result = match cli.command {
        Command::Nc(a) => cmd_nc(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Cumulants(a) => cmd_cumulants(a),
        Command::Wmoments(a) => cmd_wmoments(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Quadrature(a) => cmd_quadrature(a),
        Command::Efficiency(a) => cmd_curve(a, "efficiency"),
        Command::Mmse(a) => cmd_curve(a, "mmse"),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(status) => Outcome { status, message: None },
        Err(e) => Outcome { status: exit_status(&e), message: Some(format!("error: {e}")) },
    }
}

fn warn(message: &str) {
    eprintln!("warning: {message}");
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::invalid(format!("--{flag} is required")))
}

fn check_load(beta: f64) -> Result<f64> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(beta)
    } else {
        Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")))
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn power_spec(fading: Option<&str>, table: Option<&str>) -> Result<Option<PowerMomentSpec>> {
    if let Some(t) = table {
        return Ok(Some(PowerMomentSpec::custom(io::parse_list(t, "power moment")?)?));
    }
    fading.map(PowerMomentSpec::parse).transpose()
}

fn cmd_nc(flags: NcArgs) -> Result<i32> {
    let a: NcArgs = io::merge(&flags, flags.config.as_deref())?;
    let n = required(a.n, "n")?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let format = a.format.unwrap_or_default();
    let mut meta = Map::new();
    meta.insert("command".into(), json!("nc"));
    meta.insert("n".into(), json!(n));
    meta.insert("catalan".into(), json!(catalan(n)?.to_string()));
    let narayana_row = (1..=n).map(|j| narayana(n, j).map(|v| v.to_string())).collect::<Result<Vec<_>>>()?;
    meta.insert("narayana".into(), json!(narayana_row));

    if a.counts {
        let mut rows = Vec::new();
        for parts in 1..=n {
            for p in profiles(n, parts)? {
                rows.push((p.to_string(), parts, count_by_profile(&p)?));
            }
        }
        return io::emit_result(
            a.out.as_deref(),
            format,
            &meta,
            || {
                csv_bytes(|buf| {
                    let mut w = csv::Writer::from_writer(buf);
                    w.write_record(["profile", "classes", "count"])?;
                    for (p, parts, count) in &rows {
                        w.write_record([p.clone(), parts.to_string(), count.to_string()])?;
                    }
                    w.flush()?;
                    Ok(())
                })
            },
            || Ok(json!(rows.iter().map(|(p, j, c)| json!({"profile": p, "classes": j, "count": c.to_string()})).collect::<Vec<_>>())),
        )
        .map(|_| EXIT_OK);
    }

    if n > NC_LIST_MAX {
        return Err(Error::invalid(format!("listing is limited to n <= {NC_LIST_MAX}; use --counts")));
    }
    let mut rows = Vec::new();
    for p in enumerate_nc(n)? {
        let kc = kreweras(&p)?;
        let cycles = build_kgraph(&p).cycle_count();
        rows.push((p.to_string(), p.class_count(), p.profile().to_string(), kc.to_string(), cycles));
    }
    io::emit_result(
        a.out.as_deref(),
        format,
        &meta,
        || {
            csv_bytes(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["partition", "classes", "profile", "kreweras", "kgraph_cycles"])?;
                for (p, j, prof, kc, cyc) in &rows {
                    w.write_record([p.clone(), j.to_string(), prof.clone(), kc.clone(), cyc.to_string()])?;
                }
                w.flush()?;
                Ok(())
            })
        },
        || {
            Ok(json!(rows
                .iter()
                .map(|(p, j, prof, kc, cyc)| json!({
                    "partition": p, "classes": j, "profile": prof, "kreweras": kc, "kgraph_cycles": cyc
                }))
                .collect::<Vec<_>>()))
        },
    )?;
    Ok(EXIT_OK)
}

/// Everything a moment or cumulant table depends on.
#[derive(Debug, Serialize)]
struct MomentInputs {
    command: &'static str,
    kind: MomentKind,
    beta: f64,
    n_max: usize,
    waveform: Option<String>,
    w_table: Option<Vec<f64>>,
    power: Option<PowerMomentSpec>,
    p_table: Option<Vec<f64>>,
    s_moments: Option<Vec<f64>>,
}

impl MomentInputs {
    fn resolve(a: &MomentsArgs, command: &'static str) -> Result<(Self, Option<ChipWaveform>)> {
        let kind = required(a.kind, "kind")?;
        let beta = check_load(required(a.beta, "beta")?)?;
        let n_max = a.n_max.unwrap_or(DEFAULT_N_MAX);
        if n_max == 0 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        let needs_waveform = matches!(kind, MomentKind::Ca | MomentKind::CaFaded);
        let needs_power = matches!(kind, MomentKind::CsFaded | MomentKind::CaFaded);
        let waveform = match (&a.waveform, needs_waveform) {
            (Some(w), true) => Some(ChipWaveform::parse(w)?),
            (None, true) => return Err(Error::invalid("--waveform is required for this kind")),
            (Some(_), false) => return Err(Error::invalid("--waveform applies only to ca kinds")),
            (None, false) => None,
        };
        let power = power_spec(a.fading.as_deref(), a.power_moments.as_deref())?;
        let power = match (power, needs_power) {
            (Some(p), true) => Some(p),
            (None, true) => return Err(Error::invalid("--fading or --power-moments is required for faded kinds")),
            (Some(_), false) => return Err(Error::invalid("--fading applies only to faded kinds")),
            (None, false) => None,
        };
        let s_moments = match (kind, &a.s_moments) {
            (MomentKind::QuadraticForm, Some(s)) => Some(io::parse_list(s, "s moment")?),
            (MomentKind::QuadraticForm, None) => {
                return Err(Error::invalid("--s-moments is required for quadratic-form"))
            }
            (_, Some(_)) => return Err(Error::invalid("--s-moments applies only to quadratic-form")),
            (_, None) => None,
        };
        let w_table = waveform.as_ref().map(|w| WMomentTable::new(w, n_max)).transpose()?;
        let p_table = power.as_ref().map(|p| p.table(n_max)).transpose()?;
        let inputs = MomentInputs {
            command,
            kind,
            beta,
            n_max,
            waveform: waveform.as_ref().map(|w| w.to_string()),
            w_table: w_table.map(|t| t.values().to_vec()),
            power,
            p_table,
            s_moments,
        };
        Ok((inputs, waveform))
    }

    fn law(&self, waveform: Option<ChipWaveform>) -> Result<SpectralLaw> {
        let power = self.power.clone().unwrap_or_else(PowerMomentSpec::unfaded);
        match self.kind {
            MomentKind::Cs | MomentKind::CsFaded => SpectralLaw::chip_synchronous(self.beta, power),
            MomentKind::Ca | MomentKind::CaFaded => {
                SpectralLaw::chip_asynchronous(self.beta, required(waveform, "waveform")?, power)
            }
            MomentKind::QuadraticForm => Err(Error::invalid("quadratic-form has no quadrature law")),
        }
    }

    fn moments(&self, waveform: Option<ChipWaveform>) -> Result<MomentSequence> {
        if let Some(s) = &self.s_moments {
            let s = MomentSequence::new("S", s.clone());
            let values = (1..=self.n_max)
                .map(|n| quadratic_form_moments(n, self.beta, &s))
                .collect::<Result<Vec<_>>>()?;
            return Ok(MomentSequence::new(format!("quadratic-form beta={}", self.beta), values));
        }
        self.law(waveform)?.moments(self.n_max)
    }
}

fn cmd_moments(flags: MomentsArgs) -> Result<i32> {
    let a: MomentsArgs = io::merge(&flags, flags.config.as_deref())?;
    let (inputs, waveform) = MomentInputs::resolve(&a, "moments")?;
    let m = inputs.moments(waveform)?;
    io::emit_result(
        a.out.as_deref(),
        a.format.unwrap_or_default(),
        &inputs,
        || csv_bytes(|buf| m.write_csv(buf)),
        || Ok(json!(m.values())),
    )?;
    Ok(EXIT_OK)
}

fn cmd_cumulants(flags: MomentsArgs) -> Result<i32> {
    let a: MomentsArgs = io::merge(&flags, flags.config.as_deref())?;
    let (inputs, waveform) = MomentInputs::resolve(&a, "cumulants")?;
    let c: FreeCumulantSequence = match (inputs.kind, &waveform) {
        (MomentKind::Cs, _) => cs_cumulants(inputs.n_max, inputs.beta),
        (MomentKind::Ca, Some(w)) => ca_cumulants(inputs.n_max, inputs.beta, &WMomentTable::new(w, inputs.n_max)?)?,
        _ => cumulants_from_moments(&inputs.moments(waveform)?, inputs.n_max)?,
    };
    io::emit_result(
        a.out.as_deref(),
        a.format.unwrap_or_default(),
        &inputs,
        || csv_bytes(|buf| c.write_csv(buf)),
        || Ok(json!(c.values())),
    )?;
    Ok(EXIT_OK)
}

fn cmd_wmoments(flags: WmomentsArgs) -> Result<i32> {
    let a: WmomentsArgs = io::merge(&flags, flags.config.as_deref())?;
    let w = ChipWaveform::parse(&required(a.waveform.clone(), "waveform")?)?;
    let n_max = a.n_max.unwrap_or(DEFAULT_N_MAX);
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let table = WMomentTable::new(&w, n_max)?;
    let meta = json!({
        "command": "wmoments",
        "waveform": w.to_string(),
        "n_max": n_max,
        "bandwidth_factor": 2.0 * w.bandwidth() * w.chip_duration(),
    });
    io::emit_result(
        a.out.as_deref(),
        a.format.unwrap_or_default(),
        &meta,
        || {
            csv_bytes(|buf| {
                let mut wr = csv::Writer::from_writer(buf);
                wr.write_record(["m", "w"])?;
                for (i, v) in table.values().iter().enumerate() {
                    wr.write_record([(i + 1).to_string(), crate::aem::format_value(*v)])?;
                }
                wr.flush()?;
                Ok(())
            })
        },
        || Ok(json!(table.values())),
    )?;
    Ok(EXIT_OK)
}

fn cmd_quadrature(flags: QuadratureArgs) -> Result<i32> {
    let a: QuadratureArgs = io::merge(&flags, flags.config.as_deref())?;
    let moment_args = MomentsArgs {
        kind: a.kind,
        beta: a.beta,
        n_max: Some(1),
        waveform: a.waveform.clone(),
        fading: a.fading.clone(),
        power_moments: a.power_moments.clone(),
        ..MomentsArgs::default()
    };
    let (inputs, waveform) = MomentInputs::resolve(&moment_args, "quadrature")?;
    let law = inputs.law(waveform)?;
    let points = a.points.unwrap_or_else(|| law.default_points());
    if points == 0 {
        return Err(Error::invalid("points must be at least 1"));
    }
    let rule = law.rule(points)?;
    if let Some(w) = rule.warning() {
        warn(w);
    }
    let m = law.moments(2 * points - 1)?;
    let meta = json!({
        "command": "quadrature",
        "kind": inputs.kind,
        "beta": inputs.beta,
        "waveform": inputs.waveform,
        "power": inputs.power,
        "points": points,
        "support_hint": law.support_hint(&m)?,
        "warning": rule.warning(),
    });
    io::emit_result(
        a.out.as_deref(),
        a.format.unwrap_or_default(),
        &meta,
        || {
            csv_bytes(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["q", "node", "weight"])?;
                for (i, (x, wt)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
                    w.write_record([(i + 1).to_string(), format!("{x}"), format!("{wt}")])?;
                }
                w.flush()?;
                Ok(())
            })
        },
        || Ok(json!({"nodes": rule.nodes(), "weights": rule.weights()})),
    )?;
    Ok(EXIT_OK)
}

fn cmd_curve(flags: CurveArgs, command: &'static str) -> Result<i32> {
    let a: CurveArgs = io::merge(&flags, flags.config.as_deref())?;
    let alphas = io::parse_list(&required(a.alpha.clone(), "alpha")?, "alpha")?;
    let betas = match (&a.beta_grid, a.beta) {
        (Some(_), Some(_)) => return Err(Error::invalid("give --beta or --beta-grid, not both")),
        (Some(g), None) => io::parse_grid(g)?,
        (None, Some(b)) => vec![b],
        (None, None) => return Err(Error::invalid("--beta or --beta-grid is required")),
    };
    let operating_point = match (command, a.ebn0_db, a.snr_db) {
        ("mmse", _, None) => return Err(Error::invalid("--snr-db is required")),
        ("mmse", Some(_), _) => return Err(Error::invalid("mmse curves are at fixed --snr-db")),
        (_, Some(e), None) => OperatingPoint::Ebn0Db(e),
        (_, None, Some(s)) => OperatingPoint::SnrDb(s),
        (_, Some(_), Some(_)) => return Err(Error::invalid("give --ebn0-db or --snr-db, not both")),
        (_, None, None) => return Err(Error::invalid("--ebn0-db or --snr-db is required")),
    };
    let fading = power_spec(a.fading.as_deref(), None)?.unwrap_or_else(PowerMomentSpec::unfaded);
    let spec = CurveSpec {
        alphas,
        betas,
        operating_point,
        receiver: a.receiver.unwrap_or_default(),
        fading,
        points: a.points,
    };
    let curve = spec.run()?;
    for w in &curve.warnings {
        warn(w);
    }
    let meta = json!({"command": command, "spec": spec, "warnings": curve.warnings});
    io::emit_result(
        a.out.as_deref(),
        a.format.unwrap_or_default(),
        &meta,
        || csv_bytes(|buf| curve.write_csv(buf)),
        || Ok(serde_json::to_value(&curve.rows)?),
    )?;
    Ok(EXIT_OK)
}

fn simulator_config(a: &SimulateArgs) -> Result<SystemConfig> {
    let mut flags = serde_json::to_value(a)?;
    // kebab-case enum spellings on the command line
    if let Value::Object(map) = &mut flags {
        for key in ["spreading", "synchrony", "delay_model", "chip_law"] {
            if let Some(Value::String(s)) = map.get_mut(key) {
                *s = s.replace('-', "_");
            }
        }
    }
    let mut base = match &a.config {
        Some(path) => io::read_config(path)?,
        None => Map::new(),
    };
    for (alias, key) in [("K", "users"), ("N", "chips"), ("M", "half_window")] {
        if let Some(v) = base.remove(alias) {
            if base.insert(key.into(), v).is_some() {
                return Err(Error::invalid(format!("config sets both {alias} and {key}")));
            }
        }
    }
    let config: SystemConfig = io::overlay(&flags, base)?;
    config.validate()?;
    config.check_dimension(dimension_cap()?)?;
    Ok(config)
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32> {
    let config = simulator_config(&a)?;
    let format = a.format.unwrap_or_default();
    if let Some(bins) = a.esd_bins {
        let r = simulate_trial(&config.resolved(), 0)?;
        let h = empirical_esd(&r, bins)?;
        let meta = json!({"command": "simulate", "config": config.resolved(), "trial": 0, "bins": bins});
        io::emit_result(
            a.out.as_deref(),
            format,
            &meta,
            || csv_bytes(|buf| h.write_csv(buf)),
            || Ok(serde_json::to_value(&h.bins)?),
        )?;
        return Ok(EXIT_OK);
    }
    let report = run_trials(&config)?;
    emit_report(&a, format, "simulate", &report)?;
    Ok(EXIT_OK)
}

fn emit_report(a: &SimulateArgs, format: Format, command: &str, report: &crate::simulator::TrialReport) -> Result<()> {
    let meta = json!({"command": command, "config": report.config, "load": report.load, "dimension": report.dimension});
    io::emit_result(
        a.out.as_deref(),
        format,
        &meta,
        || csv_bytes(|buf| report.write_csv(buf)),
        || Ok(serde_json::to_value(&report.moments)?),
    )
}

fn cmd_verify(a: SimulateArgs) -> Result<i32> {
    let config = simulator_config(&a)?;
    let report = run_trials(&config)?;
    emit_report(&a, a.format.unwrap_or_default(), "verify", &report)?;
    let worst = report.moments.iter().map(|m| m.z_score.abs()).fold(0.0, f64::max);
    if report.within(a.z_limit) {
        eprintln!("verification passed: max |z| = {worst:.3} <= {}", a.z_limit);
        Ok(EXIT_OK)
    } else {
        eprintln!("verification failed: max |z| = {worst:.3} > {}", a.z_limit);
        Ok(EXIT_VERIFICATION)
    }
}

/// Path helper for callers that want the sidecar of a CSV output.
pub fn sidecar_path(path: &Path) -> PathBuf {
    io::sidecar_path(path)
}

//! Command-line front end for the `cca` binary.
//!
//! Every flag is global and has a config-file twin (`--config FILE`, one
//! `key = value` per line); flags win over the file. Output is CSV on stdout
//! unless `--output` names a file or `CCA_OUTPUT_DIR` names a directory.

mod config;
mod reproduce;
mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigFile, KNOWN_KEYS};
pub use reproduce::{reproduce, Artifact, Target};
pub use table::{format_number, Cell, Table};

use crate::detection::{
    find_noon_times, find_w_times, peak_transfer_search, transfer_probability_closed_form,
    transfer_probability_numeric, DetectionConfig, DetectionReport,
};
use crate::error::{CcaError, Result};
use crate::evolution::{probability_series, uniform_grid, DEFAULT_GRID_POINTS};
use crate::fock::OccupationState;
use crate::lindblad::{
    dissipative_transfer_sweep, theta_grid, LossParams, DEFAULT_DT, DEFAULT_THETA_POINTS,
};
use crate::spectral::{ModelParams, Period, SpectralData, DEFAULT_PERIOD_TOL};
use crate::states::{PureState, StateSpec};

/// Directory used for outputs when no `--output`/`--out-dir` is given.
pub const OUTPUT_DIR_ENV: &str = "CCA_OUTPUT_DIR";

/// Horizon used by `transfer` when no time grid is given.
pub const TRANSFER_HORIZON: f64 = 120.0;

#[derive(Debug, Parser)]
#[command(
    name = "cca",
    version,
    about = "Photon transport in coupled-cavity arrays",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Mode frequencies Ω_k = ω + 2J cos(kπ/(n+1)).
    Spectrum,
    /// Revival period of the array.
    Period,
    /// Occupation probabilities of an initial state over a time grid.
    Evolve,
    /// Probability of finding a Fock state in its initial configuration.
    Survival,
    /// W and NOON event times for a three-cavity array.
    Wnoon,
    /// Transfer of an entangled pair from the first two to the last two cavities.
    Transfer,
    /// Lossy pair transfer from the master equation.
    Lindblad,
    /// Regenerate a canned figure or table data set.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// key = value file supplying defaults for any flag below.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Number of cavities (3; 4 for `transfer`).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Cavity frequency ω (1).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Hopping strength J (0.5).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub j: Option<f64>,
    /// State descriptor: `fock 1 0 0`, `coherent 0.1i 0.1i 0.1i` or `pair 0.785 first`.
    #[arg(long, global = true, value_name = "DESCRIPTOR")]
    pub state: Option<String>,
    /// Fock state, e.g. `1,0,0`.
    #[arg(long, global = true, value_name = "OCCUPATIONS")]
    pub fock: Option<String>,
    /// Weak coherent amplitudes, e.g. `0.1i,0.1i,0.1i`.
    #[arg(long, global = true, value_name = "ALPHAS", allow_hyphen_values = true)]
    pub coherent: Option<String>,
    /// Entangled pair `θ[,first|last]`.
    #[arg(long, global = true, value_name = "THETA[,PLACEMENT]")]
    pub pair: Option<String>,
    /// Occupations to report for `evolve`, separated by `;` or spaces (default: all).
    #[arg(long, global = true)]
    pub labels: Option<String>,
    /// Photon numbers for `wnoon` (1,2,3).
    #[arg(long, global = true)]
    pub photons: Option<String>,
    /// Grid start (0).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub start: Option<f64>,
    /// Grid end (one revival period).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub stop: Option<f64>,
    /// Grid points (2001).
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Explicit list of times; replaces the grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub times: Option<String>,
    /// Pair angles θ.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<String>,
    /// Pair concurrences C; θ = asin(C)/2.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub concurrence: Option<String>,
    /// Damping rate γ for `lindblad` (0.1).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Integrator step for `lindblad` (1e-3).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Commensurability tolerance for `period` (1e-9).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// `transfer`: evaluate the four-cavity closed form instead of evolving.
    #[arg(long, global = true)]
    pub closed_form: bool,
    /// `transfer`: report the best time per angle within the horizon.
    #[arg(long, global = true)]
    pub peak: bool,
    /// Output file (default: stdout, or `$CCA_OUTPUT_DIR/<command>.csv`).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Directory for `reproduce` outputs (default: `$CCA_OUTPUT_DIR` or `.`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! fill {
    ($opts:ident, $cfg:ident, $($field:ident => $key:literal),* $(,)?) => {
        $( if $opts.$field.is_none() { $opts.$field = $cfg.get($key)?; } )*
    };
}

impl Options {
    /// Fills unset options from `--config`, if given.
    pub fn with_config(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let cfg = ConfigFile::load(&path)?;
        fill!(self, cfg,
            n => "n", omega => "omega", j => "j", state => "state", fock => "fock",
            coherent => "coherent", pair => "pair", labels => "labels", photons => "photons",
            start => "start", stop => "stop", points => "points", times => "times",
            theta => "theta", concurrence => "concurrence", gamma => "gamma", dt => "dt",
            tol => "tol", output => "output", out_dir => "out-dir",
        );
        self.closed_form |= cfg.flag("closed-form")?;
        self.peak |= cfg.flag("peak")?;
        Ok(self)
    }

    pub fn params(&self, default_n: usize) -> Result<ModelParams> {
        ModelParams::new(
            self.n.unwrap_or(default_n),
            self.omega.unwrap_or(1.0),
            self.j.unwrap_or(0.5),
        )
    }

    /// The state descriptor, if exactly one state option is present.
    pub fn state_spec(&self) -> Result<Option<StateSpec>> {
        let given: Vec<String> = [
            self.state.clone(),
            self.fock.as_ref().map(|s| format!("fock {s}")),
            self.coherent.as_ref().map(|s| format!("coherent {s}")),
            self.pair.as_ref().map(|s| {
                let last = s
                    .rsplit(|c: char| c == ',' || c.is_whitespace())
                    .find(|t| !t.is_empty());
                if last.is_some_and(|t| t.parse::<f64>().is_err()) {
                    format!("pair {s}")
                } else {
                    format!("pair {s} first")
                }
            }),
        ]
        .into_iter()
        .flatten()
        .collect();
        match given.as_slice() {
            [] => Ok(None),
            [one] => one.parse().map(Some),
            _ => Err(CcaError::Config(
                "give only one of --state, --fock, --coherent, --pair".into(),
            )),
        }
    }

    pub fn state(&self, params: &ModelParams) -> Result<Option<PureState>> {
        self.state_spec()?
            .map(|spec| spec.build(params.cavities()))
            .transpose()
    }

    fn require_state(&self, params: &ModelParams) -> Result<PureState> {
        self.state(params)?.ok_or_else(|| {
            CcaError::Config(
                "an initial state is required (--state/--fock/--coherent/--pair)".into(),
            )
        })
    }

    /// `--times` if given, else the `start/stop/points` grid; `default_stop`
    /// supplies the end when `--stop` is absent.
    pub fn times(&self, default_stop: impl FnOnce() -> Result<f64>) -> Result<Vec<f64>> {
        if let Some(list) = &self.times {
            return parse_list(list, "times");
        }
        let stop = match self.stop {
            Some(s) => s,
            None => default_stop()?,
        };
        uniform_grid(
            self.start.unwrap_or(0.0),
            stop,
            self.points.unwrap_or(DEFAULT_GRID_POINTS),
        )
    }

    fn thetas(&self) -> Result<Option<Vec<f64>>> {
        match (&self.theta, &self.concurrence) {
            (Some(_), Some(_)) => Err(CcaError::Config(
                "give either --theta or --concurrence".into(),
            )),
            (Some(list), None) => parse_list(list, "theta").map(Some),
            (None, Some(list)) => {
                let cs: Vec<f64> = parse_list(list, "concurrence")?;
                if let Some(c) = cs.iter().find(|c| !(0.0..=1.0).contains(*c)) {
                    return Err(CcaError::Config(format!("concurrence {c} outside [0, 1]")));
                }
                Ok(Some(cs.iter().map(|c| 0.5 * c.asin()).collect()))
            }
            (None, None) => Ok(None),
        }
    }
}

pub(crate) fn parse_list<T: std::str::FromStr>(list: &str, what: &str) -> Result<Vec<T>> {
    list.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CcaError::Config(format!("bad {what} entry '{s}'")))
        })
        .collect()
}

/// One revival period, or a config error when the spectrum has none.
pub fn default_period(params: &ModelParams) -> Result<f64> {
    match SpectralData::new(*params).evolution_period(DEFAULT_PERIOD_TOL)? {
        Period::Periodic { period, .. } => Ok(period),
        other => Err(CcaError::Config(format!(
            "no finite revival period ({other:?}); pass --stop or --times"
        ))),
    }
}

pub fn spectrum_table(params: &ModelParams) -> Table {
    let spectral = SpectralData::new(*params);
    let mut table = Table::new(["k", "frequency"]);
    for (k, w) in spectral.frequencies().iter().enumerate() {
        table.push(vec![Cell::Int(k as i64 + 1), (*w).into()]);
    }
    table
}

pub fn period_table(params: &ModelParams, tol: f64) -> Result<Table> {
    let period = SpectralData::new(*params).evolution_period(tol)?;
    let mut table = Table::new(["n", "omega", "J", "status", "period", "multiple"]);
    let (status, value, multiple) = match period {
        Period::Stationary => ("stationary", Cell::Num(0.0), Cell::Empty),
        Period::Periodic { period, multiple } => {
            ("periodic", Cell::Num(period), Cell::Int(multiple as i64))
        }
        Period::Aperiodic => ("aperiodic", Cell::Empty, Cell::Empty),
    };
    table.push(vec![
        Cell::Int(params.n() as i64),
        params.omega().into(),
        params.coupling().into(),
        status.into(),
        value,
        multiple,
    ]);
    Ok(table)
}

/// Every basis state of every sector the state occupies.
fn all_labels(state: &PureState) -> Vec<OccupationState> {
    state
        .sectors()
        .flat_map(|(_, sector)| sector.basis().states().to_vec())
        .collect()
}

pub fn series_table(
    state: &PureState,
    params: &ModelParams,
    times: &[f64],
    labels: &[OccupationState],
) -> Result<Table> {
    let series = probability_series(state, params, times, labels)?;
    let mut table = Table::new(
        std::iter::once("t".to_string()).chain(labels.iter().map(OccupationState::label)),
    );
    for (i, t) in series.times.iter().enumerate() {
        let mut row = vec![Cell::Num(*t)];
        row.extend(series.probabilities.row(i).iter().map(|p| Cell::Num(*p)));
        table.push(row);
    }
    Ok(table)
}

pub(crate) fn push_report(table: &mut Table, prefix: &[Cell], report: &DetectionReport) {
    let head = |kind: &str| {
        let mut row = prefix.to_vec();
        row.push(kind.into());
        row.push(Cell::Int(report.photons as i64));
        row
    };
    if report.is_none() {
        let mut row = head(report.kind.as_str());
        row.extend([Cell::from("none"), Cell::Empty]);
        table.push(row);
    }
    for event in &report.events {
        if event.initial_coincidence {
            log::info!(
                "{} event with {} photon(s) at t = 0 is the initial state itself",
                report.kind.as_str(),
                report.photons
            );
        }
        let mut row = head(report.kind.as_str());
        row.extend([Cell::Num(event.time), Cell::Num(event.probability)]);
        table.push(row);
    }
}

pub fn wnoon_table(state: &PureState, params: &ModelParams, photons: &[u32]) -> Result<Table> {
    let cfg = DetectionConfig::default();
    let mut table = Table::new(["kind", "photons", "time", "probability"]);
    for &k in photons {
        push_report(&mut table, &[], &find_w_times(state, params, k, &cfg)?);
        push_report(&mut table, &[], &find_noon_times(state, params, k, &cfg)?);
    }
    Ok(table)
}

pub fn transfer_table(
    params: &ModelParams,
    thetas: &[f64],
    times: &[f64],
    closed_form: bool,
    peak: bool,
) -> Result<Table> {
    if closed_form && (params.n() != 4 || params.omega() != 1.0 || params.coupling() != 0.5) {
        return Err(CcaError::Config(
            "the closed form holds for n = 4, ω = 1, J = 0.5".into(),
        ));
    }
    let mut table = Table::new(["t", "theta", "C", "p"]);
    for &theta in thetas {
        let c = (2.0 * theta).sin().abs();
        if peak {
            let horizon = times.iter().copied().fold(0.0, f64::max);
            let best = if closed_form {
                peak_transfer_search(c, horizon)?
            } else {
                best_numeric(theta, params, times)?
            };
            table.push(vec![
                best.t.into(),
                theta.into(),
                c.into(),
                best.probability.into(),
            ]);
            continue;
        }
        for &t in times {
            let p = if closed_form {
                transfer_probability_closed_form(t, c)
            } else {
                transfer_probability_numeric(theta, params, t)?.probability
            };
            table.push(vec![t.into(), theta.into(), c.into(), p.into()]);
        }
    }
    Ok(table)
}

fn best_numeric(
    theta: f64,
    params: &ModelParams,
    times: &[f64],
) -> Result<crate::detection::TransferResult> {
    let mut best: Option<crate::detection::TransferResult> = None;
    for &t in times {
        let r = transfer_probability_numeric(theta, params, t)?;
        if best.as_ref().is_none_or(|b| r.probability > b.probability) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| CcaError::Config("empty time grid".into()))
}

pub fn lindblad_outputs(
    params: &ModelParams,
    loss: &LossParams,
    thetas: &[f64],
    times: &[f64],
    dt: f64,
) -> Result<(Table, serde_json::Value)> {
    let sweep = dissipative_transfer_sweep(thetas, times, params, loss, dt)?;
    let mut table = Table::new(["t", "theta", "gamma", "p"]);
    for (r, t) in sweep.times.iter().enumerate() {
        for (j, theta) in sweep.thetas.iter().enumerate() {
            table.push(vec![
                (*t).into(),
                (*theta).into(),
                loss.gamma().into(),
                sweep.probabilities[(r, j)].into(),
            ]);
        }
    }
    let argmax: Vec<serde_json::Value> = (0..sweep.times.len())
        .map(|r| {
            let (theta, p) = sweep.argmax(r);
            serde_json::json!({ "t": sweep.times[r], "theta": theta, "p": p })
        })
        .collect();
    let json = serde_json::json!({
        "n": params.n(),
        "omega": params.omega(),
        "J": params.coupling(),
        "gamma": loss.gamma(),
        "diagnostics": sweep.diagnostics,
        "argmax": argmax,
    });
    Ok((table, json))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Spectrum => "spectrum",
        Command::Period => "period",
        Command::Evolve => "evolve",
        Command::Survival => "survival",
        Command::Wnoon => "wnoon",
        Command::Transfer => "transfer",
        Command::Lindblad => "lindblad",
        Command::Reproduce { .. } => "reproduce",
    }
}

/// Output destination for a single-table command.
fn output_path(opts: &Options, name: &str) -> Option<PathBuf> {
    opts.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{name}.csv")))
    })
}

fn emit(opts: &Options, name: &str, table: &Table, json: Option<&serde_json::Value>) -> Result<()> {
    let csv = table.to_csv();
    match output_path(opts, name) {
        Some(path) => {
            write_text(&path, &csv)?;
            if let Some(json) = json {
                write_text(&path.with_extension("json"), &pretty(json))?;
            }
        }
        None => {
            print!("{csv}");
            if let Some(json) = json {
                eprintln!("{}", pretty(json));
            }
        }
    }
    Ok(())
}

fn pretty(json: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(json).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Result<()> {
    let opts = cli.options.with_config()?;
    let name = command_name(&cli.command);
    let default_n = if matches!(cli.command, Command::Transfer) {
        4
    } else {
        3
    };
    match cli.command {
        Command::Reproduce { target } => {
            let dir = opts
                .out_dir
                .clone()
                .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            for artifact in reproduce(target)? {
                let path = dir.join(format!("{}.csv", artifact.name));
                write_text(&path, &artifact.table.to_csv())?;
                println!("{}", path.display());
                if let Some(json) = &artifact.json {
                    let path = path.with_extension("json");
                    write_text(&path, &pretty(json))?;
                    println!("{}", path.display());
                }
            }
            Ok(())
        }
        Command::Spectrum => emit(&opts, name, &spectrum_table(&opts.params(default_n)?), None),
        Command::Period => {
            let params = opts.params(default_n)?;
            emit(
                &opts,
                name,
                &period_table(&params, opts.tol.unwrap_or(DEFAULT_PERIOD_TOL))?,
                None,
            )
        }
        Command::Evolve => {
            let params = opts.params(default_n)?;
            let state = opts.require_state(&params)?;
            let labels = match &opts.labels {
                Some(list) => list
                    .split(|c: char| c == ';' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<OccupationState>>>()?,
                None => all_labels(&state),
            };
            let times = opts.times(|| default_period(&params))?;
            emit(
                &opts,
                name,
                &series_table(&state, &params, &times, &labels)?,
                None,
            )
        }
        Command::Survival => {
            let params = opts.params(default_n)?;
            let Some(StateSpec::Fock(occ)) = opts.state_spec()? else {
                return Err(CcaError::Config(
                    "survival needs a Fock state (--fock)".into(),
                ));
            };
            let state = PureState::fock(params.cavities(), &occ)?;
            let times = opts.times(|| default_period(&params))?;
            emit(
                &opts,
                name,
                &series_table(&state, &params, &times, &[occ])?,
                None,
            )
        }
        Command::Wnoon => {
            let params = opts.params(default_n)?;
            let state = opts.require_state(&params)?;
            let photons = match &opts.photons {
                Some(list) => parse_list(list, "photons")?,
                None => vec![1, 2, 3],
            };
            emit(&opts, name, &wnoon_table(&state, &params, &photons)?, None)
        }
        Command::Transfer => {
            let params = opts.params(default_n)?;
            let thetas = opts
                .thetas()?
                .unwrap_or_else(|| vec![std::f64::consts::FRAC_PI_4]);
            let times = opts.times(|| Ok(TRANSFER_HORIZON))?;
            emit(
                &opts,
                name,
                &transfer_table(&params, &thetas, &times, opts.closed_form, opts.peak)?,
                None,
            )
        }
        Command::Lindblad => {
            let params = opts.params(default_n)?;
            let loss = LossParams::new(opts.gamma.unwrap_or(0.1))?;
            let thetas = opts
                .thetas()?
                .unwrap_or_else(|| theta_grid(DEFAULT_THETA_POINTS));
            let times = match (&opts.times, opts.stop) {
                (None, None) => vec![10.0, 100.0],
                _ => opts.times(|| unreachable!("stop is set"))?,
            };
            let (table, json) = lindblad_outputs(
                &params,
                &loss,
                &thetas,
                &times,
                opts.dt.unwrap_or(DEFAULT_DT),
            )?;
            emit(&opts, name, &table, Some(&json))
        }
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

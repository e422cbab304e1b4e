//! `hybridlab`: run noisy hybrid Clifford circuit ensembles and analyze them.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hybridlab_core::circuit::{Boundary, CircuitConfig, Encoding, NoisePlacement, ObservableKind};
use hybridlab_core::harness::{
    dynamics_curves, is_known_observable, read_dynamics, read_rows, run_experiment, sweep_table, write_csv, Control,
    ExperimentResult, ExperimentSpec, Mode, SweepAxes, FIDELITY_OVER_XEB,
};
use hybridlab_core::scaling::{
    collapse_fit_bootstrap, collapse_fit_with, power_fit, timescale_collapse, CollapseOptions, TIMESCALE_EXPONENTS,
};
use hybridlab_core::statmech::{
    boundary_scenario_compare, expected_free_energy_compare, free_energy_compare, NoisePattern,
};
use hybridlab_core::Error;

const RESULT_HEADER: &str = "spec_hash,L,T,T_scr,p_m,p,alpha,observable,mean,stderr,n_traj";
const DYNAMICS_HEADER: &str = "spec_hash,L,T,T_scr,p_m,p,alpha,observable,t,mean,stderr,n_traj";

#[derive(Parser)]
#[command(name = "hybridlab", version, about = "Noisy hybrid Clifford circuits: simulation and scaling analysis")]
struct Cli {
    /// Worker threads for trajectory ensembles (default: all cores).
    #[arg(long, global = true, env = "HYBRIDLAB_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one ensemble given by flags and/or a spec file.
    Run(RunArgs),
    /// Run every point of a sweep spec.
    Sweep(SweepArgs),
    /// Finite-size data collapse of one observable in a result CSV.
    Collapse(CollapseArgs),
    /// Power-law fit of an observable against L / p.
    Powerfit(PowerfitArgs),
    /// Compare time rescalings t / (L/p)^e of a dynamics CSV.
    Timescale(TimescaleArgs),
    /// Leading-order free-energy comparison of the spin model.
    Oracle(OracleArgs),
    /// XEB, fidelity and their ratio from paired noiseless/noisy runs.
    Xeb(XebArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Periodic,
    Open,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementArg {
    Bulk,
    LeftBoundary,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    None,
    InitialBell,
    SteadyStateBell,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControlArg {
    P,
    PM,
}

impl From<ControlArg> for Control {
    fn from(c: ControlArg) -> Self {
        match c {
            ControlArg::P => Control::P,
            ControlArg::PM => Control::PM,
        }
    }
}

/// Circuit parameters; each one overrides the spec file's base config.
#[derive(Args, Default)]
struct CircuitFlags {
    #[arg(long = "L")]
    system_size: Option<usize>,
    #[arg(long = "T")]
    depth: Option<usize>,
    #[arg(long = "T-scr")]
    scramble_depth: Option<usize>,
    #[arg(long)]
    p_m: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
    #[arg(long, value_enum)]
    noise_placement: Option<PlacementArg>,
    #[arg(long, value_enum)]
    encoding: Option<EncodingArg>,
    #[arg(long)]
    encode_site: Option<usize>,
    #[arg(long)]
    trajectories: Option<usize>,
    /// Record observables every N layers (dynamics output).
    #[arg(long)]
    sample_every: Option<usize>,
    /// Comma-separated subset of S_AB, I_AB, E_N, I_ABR.
    #[arg(long, value_delimiter = ',')]
    observables: Vec<String>,
}

impl CircuitFlags {
    fn apply(&self, c: &mut CircuitConfig) -> Result<(), CliError> {
        if let Some(v) = self.system_size {
            c.system_size = v;
        }
        if self.depth.is_some() {
            c.depth = self.depth;
        }
        if let Some(v) = self.scramble_depth {
            c.scramble_depth = v;
        }
        if let Some(v) = self.p_m {
            c.p_m = v;
        }
        if let Some(v) = self.p {
            c.p = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(b) = self.boundary {
            c.boundary = match b {
                BoundaryArg::Periodic => Boundary::Periodic,
                BoundaryArg::Open => Boundary::Open,
            };
        }
        if let Some(n) = self.noise_placement {
            c.noise_placement = match n {
                PlacementArg::Bulk => NoisePlacement::Bulk,
                PlacementArg::LeftBoundary => NoisePlacement::LeftBoundary,
            };
        }
        if let Some(e) = self.encoding {
            c.encoding = match e {
                EncodingArg::None => Encoding::None,
                EncodingArg::InitialBell => Encoding::InitialBell,
                EncodingArg::SteadyStateBell => Encoding::SteadyStateBell,
            };
        }
        if let Some(v) = self.encode_site {
            c.encode_site = v;
        }
        if let Some(v) = self.trajectories {
            c.trajectories = v;
        }
        if self.sample_every.is_some() {
            c.sample_every = self.sample_every;
        }
        if !self.observables.is_empty() {
            c.observables = self
                .observables
                .iter()
                .map(|s| ObservableKind::parse(s.trim()).ok_or_else(|| CliError::config(format!("unknown observable {s}"))))
                .collect::<Result<_, _>>()?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct OutputFlags {
    /// Result CSV (default: the spec's `output`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time-series CSV (default: the spec's `dynamics_output`).
    #[arg(long)]
    dynamics_out: Option<PathBuf>,
    /// Run manifest JSON (default: `<out>.manifest.json`).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Replace existing CSV files instead of appending to them.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Spec file: an experiment spec or a bare circuit config (JSON).
    spec: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    circuit: CircuitFlags,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment spec (JSON).
    spec: PathBuf,
    /// Override the spec's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trajectory count of every point.
    #[arg(long)]
    trajectories: Option<usize>,
    /// Print the sweep points and exit.
    #[arg(long)]
    dry_run: bool,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
struct CollapseArgs {
    /// Result CSV.
    csv: PathBuf,
    #[arg(long)]
    observable: String,
    /// Fit `O / L^power`; 1/3 for entanglement observables, 0 for I_ABR.
    #[arg(long, default_value_t = 0.0)]
    power: f64,
    /// Pin ν instead of fitting it.
    #[arg(long)]
    fix_nu: Option<f64>,
    #[arg(long, value_enum, default_value_t = ControlArg::P)]
    control: ControlArg,
    /// Search window for the critical point.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pc_range: Option<Vec<f64>>,
    /// Keep only rows whose control value lies in this window.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    window: Option<Vec<f64>>,
    /// Keep only rows with these p_m values (for p sweeps) or p values (for p_m sweeps).
    #[arg(long, value_delimiter = ',')]
    at: Vec<f64>,
    /// Bootstrap resamples for error bars (0 disables, otherwise at least 100).
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the fit report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerfitArgs {
    csv: PathBuf,
    #[arg(long)]
    observable: String,
    /// Keep only these p values.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Keep only rows with this p_m.
    #[arg(long)]
    p_m: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TimescaleArgs {
    /// Dynamics CSV.
    csv: PathBuf,
    #[arg(long, default_value = "I_ABR")]
    observable: String,
    /// Candidate exponents (default 1/3, 1/2, 1).
    #[arg(long, value_delimiter = ',')]
    exponents: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Noise pattern CSV with `x,t` rows.
    #[arg(long)]
    pattern: Option<PathBuf>,
    /// Sample a Bernoulli(q) pattern with this seed instead of using the mean noise count.
    #[arg(long)]
    sample_seed: Option<u64>,
    /// Wall unit cost.
    #[arg(long, default_value_t = 1.0)]
    s0: f64,
    /// Coefficient of the (L/p)^{1/3} term when measurements are present.
    #[arg(long, default_value_t = 0.0)]
    kpz: f64,
    /// Boundary scenario: layer where the vertical wall leaves the boundary.
    #[arg(long)]
    t0: Option<usize>,
    #[command(flatten)]
    circuit: CircuitFlags,
}

#[derive(Args)]
struct XebArgs {
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    circuit: CircuitFlags,
    /// Sweep axis for p (comma-separated); defaults to the single --p value.
    #[arg(long = "p-list", value_delimiter = ',')]
    p_list: Vec<f64>,
    /// Sweep axis for L (comma-separated).
    #[arg(long = "L-list", value_delimiter = ',')]
    l_list: Vec<usize>,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self {
            code: 3,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn fit(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Csv(_) => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Collapse(a) => cmd_collapse(a),
        Command::Powerfit(a) => cmd_powerfit(a),
        Command::Timescale(a) => cmd_timescale(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Xeb(a) => cmd_xeb(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

/// Accepts a full experiment spec or a bare circuit config.
fn load_spec(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = read_text(path)?;
    if let Ok(spec) = ExperimentSpec::from_json(&text) {
        return Ok(spec);
    }
    let base: CircuitConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: not a spec or circuit config: {e}", path.display())))?;
    Ok(bare_spec(base))
}

fn bare_spec(base: CircuitConfig) -> ExperimentSpec {
    ExperimentSpec {
        name: None,
        mode: Mode::Trajectories,
        base,
        sweep: SweepAxes::default(),
        scramble_over_depth: None,
        scramble_over_size: None,
        output: None,
        dynamics_output: None,
        workers: None,
    }
}

fn cmd_run(a: RunArgs) -> Result<(), CliError> {
    let mut spec = match &a.spec {
        Some(path) => load_spec(path)?,
        None => {
            let l = a
                .circuit
                .system_size
                .ok_or_else(|| CliError::config("--L is required without a spec file"))?;
            bare_spec(CircuitConfig::new(l))
        }
    };
    a.circuit.apply(&mut spec.base)?;
    spec.base.seed = a.seed;
    execute(spec, &a.output)
}

fn cmd_sweep(a: SweepArgs) -> Result<(), CliError> {
    let mut spec = load_spec(&a.spec)?;
    if let Some(s) = a.seed {
        spec.base.seed = s;
    }
    if let Some(n) = a.trajectories {
        spec.base.trajectories = n;
    }
    if a.dry_run {
        let points = spec.points()?;
        println!("{} points, {} trajectories, spec {}", points.len(), points.iter().map(|c| c.trajectories).sum::<usize>(), spec.hash());
        for c in points {
            println!("L={} T={} T_scr={} p_m={} p={} alpha={}", c.system_size, c.depth(), c.scramble_depth, c.p_m, c.p, c.alpha);
        }
        return Ok(());
    }
    execute(spec, &a.output)
}

fn execute(spec: ExperimentSpec, out: &OutputFlags) -> Result<(), CliError> {
    let points = spec.points()?;
    log::info!(
        "spec {}: {} sweep points, {} trajectories, {} workers",
        spec.hash(),
        points.len(),
        points.iter().map(|c| c.trajectories).sum::<usize>(),
        rayon::current_num_threads()
    );
    let result = run_experiment(&spec, |i, n, p| {
        log::info!(
            "[{i}/{n}] L={} p_m={} p={} alpha={} ({:.1} s)",
            p.config.system_size,
            p.config.p_m,
            p.config.p,
            p.config.alpha,
            p.wall_clock_seconds
        );
    })?;
    let csv_path = out.out.clone().or_else(|| spec.output.as_ref().map(PathBuf::from));
    let dyn_path = out.dynamics_out.clone().or_else(|| spec.dynamics_output.as_ref().map(PathBuf::from));
    write_results(&result, csv_path.as_deref(), dyn_path.as_deref(), out.overwrite)?;
    let manifest_path = out
        .manifest
        .clone()
        .or_else(|| csv_path.as_ref().map(|p| PathBuf::from(format!("{}.manifest.json", p.display()))));
    if let Some(path) = manifest_path {
        let text = serde_json::to_string_pretty(&result.manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn write_results(result: &ExperimentResult, csv: Option<&Path>, dynamics: Option<&Path>, overwrite: bool) -> Result<(), CliError> {
    match csv {
        Some(path) => append_csv(path, &result.rows(), RESULT_HEADER, overwrite)?,
        None => write_csv(&result.rows(), io::stdout().lock())?,
    }
    let rows = result.dynamics();
    match dynamics {
        Some(path) => append_csv(path, &rows, DYNAMICS_HEADER, overwrite)?,
        None if !rows.is_empty() => log::warn!("dynamics recorded but no dynamics output path given"),
        None => {}
    }
    Ok(())
}

/// Results files are append-only: new rows go after existing ones, and the
/// header must match.
fn append_csv<T: Serialize>(path: &Path, rows: &[T], header: &str, overwrite: bool) -> Result<(), CliError> {
    let existing = if overwrite { None } else { fs::read_to_string(path).ok().filter(|s| !s.is_empty()) };
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    let mut file = match existing {
        Some(text) => {
            if text.lines().next() != Some(header) {
                return Err(CliError::io(path, "existing file has a different header"));
            }
            buf = buf.splitn(2, |&b| b == b'\n').nth(1).unwrap_or_default().to_vec();
            OpenOptions::new().append(true).open(path)
        }
        None => File::create(path),
    }
    .map_err(|e| CliError::io(path, e))?;
    file.write_all(&buf).map_err(|e| CliError::io(path, e))
}

fn check_observable(name: &str) -> Result<(), CliError> {
    if is_known_observable(name) {
        Ok(())
    } else {
        Err(CliError::config(format!("unknown observable {name}")))
    }
}

fn report<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    println!("{text}");
    if let Some(path) = out {
        fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn cmd_collapse(a: CollapseArgs) -> Result<(), CliError> {
    check_observable(&a.observable)?;
    let rows = read_rows(open(&a.csv)?)?;
    let control: Control = a.control.into();
    let rows: Vec<_> = rows
        .into_iter()
        .filter(|r| {
            let other = match control {
                Control::P => r.p_m,
                Control::PM => r.p,
            };
            a.at.is_empty() || a.at.iter().any(|&v| close(v, other))
        })
        .collect();
    let mut table = sweep_table(&rows, &a.observable, control)?;
    if let Some(w) = &a.window {
        table = table.filter(|r| r.control >= w[0] && r.control <= w[1]);
    }
    let opts = CollapseOptions {
        rescale_power: a.power,
        fix_nu: a.fix_nu,
        pc_range: a.pc_range.as_ref().map(|v| (v[0], v[1])),
        ..CollapseOptions::default()
    };
    let fit = if a.bootstrap > 0 {
        collapse_fit_bootstrap(&table, &opts, a.bootstrap, a.seed)
    } else {
        collapse_fit_with(&table, &opts)
    }
    .map_err(fit_error)?;
    report(&fit, a.out.as_deref())?;
    if !fit.converged {
        return Err(CliError::fit("simplex refinement did not converge"));
    }
    Ok(())
}

fn fit_error(e: Error) -> CliError {
    match e {
        Error::InsufficientData(m) => CliError::fit(format!("insufficient data: {m}")),
        other => other.into(),
    }
}

fn cmd_powerfit(a: PowerfitArgs) -> Result<(), CliError> {
    check_observable(&a.observable)?;
    let rows: Vec<_> = read_rows(open(&a.csv)?)?
        .into_iter()
        .filter(|r| a.p.is_empty() || a.p.iter().any(|&p| close(p, r.p)))
        .filter(|r| a.p_m.is_none_or(|pm| close(pm, r.p_m)))
        .collect();
    let table = sweep_table(&rows, &a.observable, Control::P)?;
    let fit = power_fit(&table).map_err(fit_error)?;
    report(&fit, a.out.as_deref())
}

fn cmd_timescale(a: TimescaleArgs) -> Result<(), CliError> {
    check_observable(&a.observable)?;
    let rows = read_dynamics(open(&a.csv)?)?;
    let curves = dynamics_curves(&rows, &a.observable);
    let exponents = if a.exponents.is_empty() {
        TIMESCALE_EXPONENTS.to_vec()
    } else {
        a.exponents.clone()
    };
    let r = timescale_collapse(&curves, &exponents).map_err(fit_error)?;
    report(&r, a.out.as_deref())
}

fn cmd_oracle(a: OracleArgs) -> Result<(), CliError> {
    let mut config = CircuitConfig::new(a.circuit.system_size.unwrap_or(0));
    a.circuit.apply(&mut config)?;
    let config = config.validate()?;
    let prediction = if config.noise_placement == NoisePlacement::LeftBoundary {
        boundary_scenario_compare(&config, a.t0)?
    } else if let Some(path) = &a.pattern {
        let mut text = String::new();
        open(path)?.read_to_string(&mut text).map_err(|e| CliError::io(path, e))?;
        let pattern = NoisePattern::read_csv(text.as_bytes(), config.system_size, config.depth(), config.noise_placement)?
            .with_boundary(config.boundary);
        free_energy_compare(&config, &pattern, a.s0, a.kpz)?
    } else if let Some(seed) = a.sample_seed {
        let mut rng = hybridlab_core::circuit::trajectory_rng(seed, 0);
        let pattern = NoisePattern::sample(
            config.system_size,
            config.depth(),
            config.noise_probability(),
            config.noise_placement,
            &mut rng,
        )
        .with_boundary(config.boundary);
        free_energy_compare(&config, &pattern, a.s0, a.kpz)?
    } else {
        expected_free_energy_compare(&config, a.s0, a.kpz)?
    };
    report(&prediction, None)
}

fn cmd_xeb(a: XebArgs) -> Result<(), CliError> {
    let l = a
        .circuit
        .system_size
        .or_else(|| a.l_list.first().copied())
        .ok_or_else(|| CliError::config("--L or --L-list is required"))?;
    let mut base = CircuitConfig::new(l);
    // Random circuit sampling depth defaults to T = L.
    base.depth = Some(l);
    a.circuit.apply(&mut base)?;
    base.seed = a.seed;
    let mut spec = bare_spec(base);
    spec.mode = Mode::Paired;
    spec.sweep.p = a.p_list.clone();
    spec.sweep.sizes = a.l_list.clone();
    if a.circuit.depth.is_none() {
        spec.sweep.depth_ratio = vec![1.0];
    }
    execute(spec, &a.output)?;
    log::info!("observables: XEB, F, {FIDELITY_OVER_XEB}");
    Ok(())
}

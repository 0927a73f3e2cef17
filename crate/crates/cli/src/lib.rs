//! Command-line front end for `tghar`.
//!
//! Exit codes: 0 success, 1 usage or data error, 2 the optimizer did not
//! converge (a best-effort model is still written).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tghar::simstudy::CovariateDesign;
use tghar::{
    crps, export_realization_matrix, fit, interval, lag_plot_data, pit, point_mean, point_median,
    predictive, rolling_forecast, run_study, select_order, simulate, write_report, ArCoeffs,
    FitConfig, IntervalKind, ModelSpec, RegressionSpec, RollingConfig, ScenarioGrid, TghParams,
    TghShape, Variant,
};

pub mod files;

use files::{ModelFile, SeriesFile};

/// Environment variable holding the worker thread count for `study`.
pub const THREADS_ENV: &str = "TGHAR_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 1,
            CliError::NotConverged(_) => 2,
        }
    }
}

impl From<tghar::Error> for CliError {
    fn from(e: tghar::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tghar",
    version,
    about = "Tukey g-and-h autoregressive models: simulate, fit, forecast, study"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a series and write it with a sidecar model file.
    Simulate(SimulateArgs),
    /// Fit a model of given order, or select the order by BIC.
    Fit(FitArgs),
    /// Select the AR order by BIC (same as `fit --select`).
    SelectOrder(FitArgs),
    /// One-step forecast after the last observation.
    Forecast(ForecastArgs),
    /// Rolling-window one-step forecast evaluation.
    #[command(alias = "rolling-evaluate")]
    Evaluate(EvaluateArgs),
    /// Run a Monte Carlo study from a grid file.
    #[command(alias = "run-study")]
    Study(StudyArgs),
    /// Lag-one pairs of the detrended series.
    Lagplot(LagplotArgs),
    /// Many simulated paths of one model, for plotting.
    Realizations(RealizationsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    None,
    Harmonic24,
}

impl Design {
    fn design(self) -> CovariateDesign {
        match self {
            Design::None => CovariateDesign::None,
            Design::Harmonic24 => CovariateDesign::Harmonic24,
        }
    }

    fn names(self) -> Vec<String> {
        match self {
            Design::None => Vec::new(),
            Design::Harmonic24 => vec!["cos24".into(), "sin24".into()],
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Read the model from a JSON model file instead of the flags below.
    #[arg(long, conflicts_with_all = ["variant", "xi", "omega", "g", "h", "phi", "beta"])]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = "t")]
    pub variant: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub xi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub g: f64,
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    /// AR coefficients, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi: Vec<f64>,
    /// Regression coefficients, comma separated; must match --covariates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Vec<f64>,
    /// Covariate design used for simulation.
    #[arg(long, value_enum, default_value = "none")]
    pub covariates: Design,
}

impl ModelArgs {
    fn load(&self) -> Result<(ModelSpec, Vec<String>), CliError> {
        let (spec, names) = match &self.model {
            Some(path) => {
                let file = ModelFile::read(path)?;
                (file.spec()?, file.covariate_names)
            }
            None => {
                let spec = ModelSpec::new(
                    self.variant.parse()?,
                    TghParams::new(self.xi, self.omega, TghShape::new(self.g, self.h)?)?,
                    ArCoeffs::new(self.phi.clone())?,
                    RegressionSpec::new(self.beta.clone()),
                );
                (spec, self.covariates.names())
            }
        };
        if spec.reg.dim() != self.covariates.design().dim() {
            return Err(CliError::data(format!(
                "{} regression coefficients need a covariate design of that dimension (--covariates)",
                spec.reg.dim()
            )));
        }
        Ok((spec, names))
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV; the model goes next to it with extension `.model.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "t")]
    pub variant: String,
    /// AR order; omit with --select.
    #[arg(long, conflicts_with = "select")]
    pub order: Option<usize>,
    /// Choose the order by BIC over 0..=pmax.
    #[arg(long)]
    pub select: bool,
    #[arg(long, default_value_t = 6)]
    pub pmax: usize,
    /// Covariate columns to use, comma separated (default: all extra columns).
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    #[arg(long, default_value_t = 5)]
    pub multistart: usize,
    /// Conditioning length of the error-model likelihood.
    #[arg(long)]
    pub k: Option<usize>,
    /// Fix g = h = 0 (Gaussian AR with regression).
    #[arg(long)]
    pub gaussian: bool,
    /// Objective evaluation budget of the optimizer.
    #[arg(long, default_value_t = 20_000)]
    pub max_evals: usize,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntervalChoice {
    Symmetric,
    Minlength,
    Both,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub interval: IntervalChoice,
    /// Covariate values at the forecast time, in the model's column order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x_next: Vec<f64>,
    /// Realized next value; adds PIT and CRPS.
    #[arg(long, allow_hyphen_values = true)]
    pub realized: Option<f64>,
    /// Also write the CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "t")]
    pub variant: String,
    #[arg(long)]
    pub window: usize,
    #[arg(long, default_value_t = 1)]
    pub refit_every: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Fixed AR order; otherwise selected by BIC in every window.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub pmax: usize,
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    #[arg(long, default_value_t = 5)]
    pub multistart: usize,
    #[arg(long)]
    pub gaussian: bool,
    /// Forecast with this model instead of refitting.
    #[arg(long, conflicts_with_all = ["order", "gaussian"])]
    pub model: Option<PathBuf>,
    /// Scores CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-forecast records CSV.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long)]
    pub grid: PathBuf,
    /// Override the grid's replication count.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Override the grid's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LagplotArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Take the regression part from this model; otherwise none.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RealizationsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match run(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Fit(a) => cmd_fit(&a, a.select, out),
        Command::SelectOrder(a) => cmd_fit(&a, true, out),
        Command::Forecast(a) => cmd_forecast(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Study(a) => cmd_study(&a, out, err),
        Command::Lagplot(a) => cmd_lagplot(&a, out),
        Command::Realizations(a) => cmd_realizations(&a, out),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// `series.csv` -> `series.model.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("model.json")
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, names) = a.model.load()?;
    if a.n == 0 {
        return Err(CliError::data("--n must be positive"));
    }
    let x = a.model.covariates.design().build(a.n);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let series = simulate(&spec, &x, &mut rng)?;
    let file = SeriesFile {
        first_t: 1,
        y: series.y().to_vec(),
        covariate_names: names.clone(),
        covariates: (0..a.n).map(|t| x.row(t).to_vec()).collect(),
    };
    let model = ModelFile {
        seed: Some(a.seed),
        n: Some(a.n),
        ..ModelFile::from_spec(&spec, names)
    };
    let (csv, json) = (file.to_csv(), model.to_json());
    let sidecar = sidecar_path(&a.out);
    write_file(&a.out, &csv)?;
    write_file(&sidecar, &json)?;
    writeln!(
        out,
        "wrote {} observations to {} and model to {}",
        a.n,
        a.out.display(),
        sidecar.display()
    )?;
    Ok(())
}

fn fit_config(
    variant: &str,
    gaussian: bool,
    multistart: usize,
    pmax: usize,
    k: Option<usize>,
    max_evals: usize,
) -> Result<FitConfig, CliError> {
    let variant: Variant = variant.parse()?;
    let base = if gaussian {
        if variant != Variant::TransformedLatent {
            return Err(CliError::data("--gaussian applies to the t variant"));
        }
        FitConfig::gaussian()
    } else {
        FitConfig::new(variant)
    };
    let mut config = FitConfig {
        multistart,
        max_order: pmax,
        k,
        ..base
    };
    config.simplex.max_evals = max_evals;
    config.validate()?;
    Ok(config)
}

fn cmd_fit(a: &FitArgs, select: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let config = fit_config(
        &a.variant,
        a.gaussian,
        a.multistart,
        a.pmax,
        a.k,
        a.max_evals,
    )?;
    let file = SeriesFile::read(&a.data)?;
    let names = a
        .covariates
        .clone()
        .unwrap_or_else(|| file.covariate_names.clone());
    let data = file.series(&names)?;
    let (result, candidates) = if select {
        let s = select_order(&data, &config).map_err(not_converged)?;
        (s.best, Some(s.candidates))
    } else {
        let p = a
            .order
            .ok_or_else(|| CliError::data("give --order or --select"))?;
        match fit(&data, p, &config) {
            Ok(r) => (r, None),
            Err(tghar::Error::NotConverged(best)) => (*best, None),
            Err(e) => return Err(e.into()),
        }
    };
    write_file(
        &a.out,
        &ModelFile::from_fit(&result, names.clone()).to_json(),
    )?;

    let s = &result.spec;
    writeln!(out, "variant {}", s.variant)?;
    writeln!(out, "order {}", result.order_selected)?;
    writeln!(out, "loglik {}", result.loglik)?;
    writeln!(out, "bic {}", result.bic)?;
    writeln!(out, "n_used {}", result.n_used)?;
    writeln!(out, "k {}", result.k)?;
    writeln!(out, "xi {}", s.tgh.xi())?;
    writeln!(out, "omega {}", s.tgh.omega())?;
    writeln!(out, "g {}", s.shape().g())?;
    writeln!(out, "h {}", s.shape().h())?;
    writeln!(out, "phi {}", join(s.ar.phi()))?;
    writeln!(out, "beta {}", join(&s.reg.beta))?;
    writeln!(out, "converged {}", result.convergence.converged)?;
    writeln!(out, "evaluations {}", result.convergence.evaluations)?;
    if let Some(c) = candidates {
        for c in c {
            let show = |v: Option<f64>| v.map_or("NA".to_string(), |v| v.to_string());
            writeln!(
                out,
                "candidate {} loglik {} bic {} converged {}",
                c.order,
                show(c.loglik),
                show(c.bic),
                c.converged
            )?;
        }
    }
    if result.convergence.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "optimizer did not converge after {} evaluations; best-effort model written to {}",
            result.convergence.evaluations,
            a.out.display()
        )))
    }
}

fn not_converged(e: tghar::Error) -> CliError {
    match e {
        tghar::Error::NotConverged(_) => CliError::NotConverged(e.to_string()),
        other => other.into(),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

pub const FORECAST_HEADER: &str = "t,interval,level,lower,upper,gamma_opt,median,mean,pit,crps";

fn cmd_forecast(a: &ForecastArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(CliError::data(format!(
            "--level must lie in (0, 1), got {}",
            a.level
        )));
    }
    let model = ModelFile::read(&a.model)?;
    let spec = model.spec()?;
    let file = SeriesFile::read(&a.data)?;
    let history = file.series(&model.covariate_names)?;
    if a.x_next.len() != model.covariate_names.len() {
        return Err(CliError::data(format!(
            "--x-next needs {} values ({})",
            model.covariate_names.len(),
            model.covariate_names.join(",")
        )));
    }
    let dist = predictive(&spec, &history, &a.x_next)?;
    let kinds: &[IntervalKind] = match a.interval {
        IntervalChoice::Symmetric => &[IntervalKind::SymmetricWeight],
        IntervalChoice::Minlength => &[IntervalKind::MinimumLength],
        IntervalChoice::Both => &[IntervalKind::SymmetricWeight, IntervalKind::MinimumLength],
    };
    let t = file.first_t + file.y.len() as i64;
    let median = point_median(&dist);
    let mean = point_mean(&dist).ok();
    let score = a.realized.map(|y| (pit(&dist, y), crps(&dist, y).ok()));
    let mut text = String::from(FORECAST_HEADER);
    text.push('\n');
    for &kind in kinds {
        let iv = interval(&dist, a.level, kind)?;
        let name = match kind {
            IntervalKind::SymmetricWeight => "symmetric",
            IntervalKind::MinimumLength => "minlength",
        };
        text.push_str(&format!(
            "{t},{name},{},{},{},{},{median},{},{},{}\n",
            a.level,
            iv.lower,
            iv.upper,
            cell(iv.gamma_opt),
            cell(mean),
            cell(score.map(|s| s.0)),
            cell(score.and_then(|s| s.1)),
        ));
    }
    if let Some(path) = &a.out {
        write_file(path, &text)?;
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub const SCORES_HEADER: &str =
    "forecasts,failures,mae,rmse,coverage_min_length,width_min_length,coverage_symmetric,width_symmetric,mean_crps";

fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = SeriesFile::read(&a.data)?;
    let (fixed, names) = match &a.model {
        Some(path) => {
            let m = ModelFile::read(path)?;
            (Some(m.spec()?), m.covariate_names)
        }
        None => (
            None,
            a.covariates
                .clone()
                .unwrap_or_else(|| file.covariate_names.clone()),
        ),
    };
    let variant = fixed
        .as_ref()
        .map_or(a.variant.clone(), |s| s.variant.to_string());
    let fit = fit_config(&variant, a.gaussian, a.multistart, a.pmax, None, 20_000)?;
    let data = file.series(&names)?;
    if a.window >= data.len() {
        return Err(CliError::data(format!(
            "--window {} leaves nothing to forecast in {} observations",
            a.window,
            data.len()
        )));
    }
    let config = RollingConfig {
        refit_every: a.refit_every,
        level: a.level,
        order: a.order,
        fixed_spec: fixed,
        ..RollingConfig::new(a.window, fit)
    };
    let outcome = rolling_forecast(&data, &config)?;
    let s = &outcome.scores;
    let scores = format!(
        "{SCORES_HEADER}\n{},{},{},{},{},{},{},{},{}\n",
        s.forecasts,
        outcome.failures.len(),
        s.mae,
        s.rmse,
        s.coverage_min_length,
        s.width_min_length,
        s.coverage_symmetric,
        s.width_symmetric,
        s.mean_crps
    );
    if let Some(path) = &a.records {
        let mut w = csv::Writer::from_writer(Vec::new());
        let row = |w: &mut csv::Writer<Vec<u8>>, r: &[String]| {
            w.write_record(r).map_err(|e| CliError::data(e.to_string()))
        };
        let header = [
            "t",
            "order",
            "realized",
            "median",
            "mean",
            "sym_lower",
            "sym_upper",
            "min_lower",
            "min_upper",
            "pit",
            "crps",
        ];
        row(&mut w, &header.map(String::from))?;
        for r in &outcome.records {
            row(
                &mut w,
                &[
                    (file.first_t + r.index as i64).to_string(),
                    r.order.to_string(),
                    r.realized.to_string(),
                    r.median.to_string(),
                    cell(r.mean),
                    r.symmetric.lower.to_string(),
                    r.symmetric.upper.to_string(),
                    r.min_length.lower.to_string(),
                    r.min_length.upper.to_string(),
                    r.pit.to_string(),
                    cell(r.crps),
                ],
            )?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::data(e.to_string()))?;
        write_file(path, &String::from_utf8(bytes).expect("csv is utf-8"))?;
    }
    if let Some(path) = &a.out {
        write_file(path, &scores)?;
    }
    out.write_all(scores.as_bytes())?;
    for (t, msg) in &outcome.failures {
        writeln!(out, "# skipped t={}: {msg}", file.first_t + *t as i64)?;
    }
    Ok(())
}

/// Worker threads for studies: `TGHAR_THREADS`, else all cores.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                CliError::data(format!(
                    "{THREADS_ENV} must be a positive integer, got '{v}'"
                ))
            }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn cmd_study(a: &StudyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.grid)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", a.grid.display())))?;
    let mut grid: ScenarioGrid = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{}: malformed grid: {e}", a.grid.display())))?;
    if let Some(r) = a.reps {
        grid.replications = r;
    }
    if let Some(s) = a.seed {
        grid.seed = s;
    }
    grid.validate()?;
    let threads = thread_count()?;
    let start = Instant::now();
    let report = run_study(&grid, threads)?;
    write_report(&report, &a.out)?;
    writeln!(
        err,
        "study finished in {:.1} s on {threads} thread(s)",
        start.elapsed().as_secs_f64()
    )?;
    for c in &report.selection {
        writeln!(
            out,
            "selection {} n={} phi={} rate {} failures {}",
            c.cell.variant,
            c.cell.n,
            join(&c.cell.phi),
            c.rate,
            c.failures.len()
        )?;
    }
    for c in &report.estimation {
        for m in &c.methods {
            writeln!(
                out,
                "estimation n={} {} rmse {}",
                c.cell.n,
                m.method,
                join(&m.rmse)
            )?;
        }
    }
    for c in &report.forecasting {
        for m in &c.methods {
            let s = &m.scores;
            writeln!(
                out,
                "forecast data={} fit={} mae {} rmse {} coverage {} width {} ks {}",
                c.cell.variant,
                m.method,
                s.mae,
                s.rmse,
                s.coverage_min_length,
                s.width_min_length,
                m.ks_statistic
            )?;
        }
    }
    writeln!(out, "report written to {}", a.out.display())?;
    Ok(())
}

fn cmd_lagplot(a: &LagplotArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = SeriesFile::read(&a.data)?;
    let (reg, names) = match &a.model {
        Some(p) => {
            let m = ModelFile::read(p)?;
            (RegressionSpec::new(m.beta.clone()), m.covariate_names)
        }
        None => (RegressionSpec::none(), Vec::new()),
    };
    let pairs = lag_plot_data(&file.series(&names)?, &reg)?;
    let mut text = String::from("previous,current\n");
    for (x, y) in pairs {
        text.push_str(&format!("{x},{y}\n"));
    }
    match &a.out {
        Some(p) => write_file(p, &text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn cmd_realizations(a: &RealizationsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, _) = a.model.load()?;
    if a.n == 0 {
        return Err(CliError::data("--n must be positive"));
    }
    let x = a.model.covariates.design().build(a.n);
    let m = export_realization_matrix(&spec, &x, a.reps, a.seed)?;
    let mut text = String::from("replication");
    for t in 1..=a.n {
        text.push_str(&format!(",y{t}"));
    }
    text.push('\n');
    for (r, path) in m.paths.iter().enumerate() {
        text.push_str(&format!("{r},{}\n", join(path)));
    }
    write_file(&a.out, &text)?;
    let d = m.descriptors;
    writeln!(out, "mean {}", d.mean)?;
    writeln!(out, "sd {}", d.sd)?;
    writeln!(out, "skewness {}", d.skewness)?;
    writeln!(out, "excess_kurtosis {}", d.excess_kurtosis)?;
    Ok(())
}

//! Monte Carlo studies: order-selection rates, joint versus sequential
//! estimation, and one-step forecast comparison across fitted models.
//!
//! Every replication draws from its own ChaCha stream, selected by the cell
//! and replication index, so results do not depend on scheduling or on the
//! number of worker threads.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ar::ArCoeffs;
use crate::error::{Error, Result};
use crate::estimate::{fit, fit_sequential_baseline, select_order, FitConfig, FitResult};
use crate::forecast::{predictive, score_forecast, ForecastRecord, ForecastScores};
use crate::model::{simulate, Covariates, ModelSpec, MomentDescriptors, RegressionSpec, Variant};
use crate::stats;
use crate::tgh::{TghParams, TghShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    OrderSelection,
    EstimatorComparison,
    ForecastComparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateDesign {
    None,
    /// `(cos(2 pi t / 24), sin(2 pi t / 24))`, `t = 1, 2, ...`
    Harmonic24,
}

impl CovariateDesign {
    pub fn build(&self, n: usize) -> Covariates {
        match self {
            CovariateDesign::None => Covariates::none(n),
            CovariateDesign::Harmonic24 => Covariates::harmonics(n, 24.0, 1),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CovariateDesign::None => 0,
            CovariateDesign::Harmonic24 => 2,
        }
    }
}

fn default_xi() -> f64 {
    -3.0
}
fn default_omega() -> f64 {
    1.5
}
fn default_beta() -> Vec<f64> {
    vec![3.0, -2.0]
}
fn default_covariates() -> CovariateDesign {
    CovariateDesign::Harmonic24
}
fn default_replications() -> usize {
    200
}
fn default_p_max() -> usize {
    5
}
fn default_multistart() -> usize {
    5
}
fn default_one() -> usize {
    1
}

/// Scenario grid; cells are the product of variants, shapes, sample sizes
/// and AR settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    pub study: StudyKind,
    pub variants: Vec<Variant>,
    /// `(g, h)` pairs.
    pub shapes: Vec<(f64, f64)>,
    pub sample_sizes: Vec<usize>,
    pub phis: Vec<Vec<f64>>,
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_beta")]
    pub beta: Vec<f64>,
    #[serde(default = "default_covariates")]
    pub covariates: CovariateDesign,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub seed: u64,
    /// Largest order tried by order selection.
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default = "default_multistart")]
    pub multistart: usize,
    /// One-step forecasts per replication, at positions `n + 1 ..= n + H`,
    /// all from the fit to the first `n` observations.
    #[serde(default = "default_one")]
    pub forecast_origins: usize,
}

/// One scenario of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub variant: Variant,
    pub g: f64,
    pub h: f64,
    pub n: usize,
    pub phi: Vec<f64>,
}

impl ScenarioGrid {
    pub fn from_json(text: &str) -> Result<Self> {
        let grid: Self = serde_json::from_str(text)?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::domain("replications must be at least 1"));
        }
        if self.variants.is_empty()
            || self.shapes.is_empty()
            || self.sample_sizes.is_empty()
            || self.phis.is_empty()
        {
            return Err(Error::domain(
                "every grid dimension needs at least one value",
            ));
        }
        for phi in &self.phis {
            ArCoeffs::new(phi.clone())?;
        }
        for &(g, h) in &self.shapes {
            TghShape::new(g, h)?;
        }
        TghParams::new(self.xi, self.omega, TghShape::gaussian())?;
        if self.beta.len() != self.covariates.dim() {
            return Err(Error::domain(format!(
                "{} regression coefficients for a covariate design of dimension {}",
                self.beta.len(),
                self.covariates.dim()
            )));
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::domain("sample sizes must be positive"));
        }
        if self.multistart == 0 || self.forecast_origins == 0 {
            return Err(Error::domain(
                "multistart and forecast_origins must be at least 1",
            ));
        }
        if self.study == StudyKind::EstimatorComparison
            && self
                .variants
                .iter()
                .any(|v| *v != Variant::TransformedLatent)
        {
            return Err(Error::domain(
                "the estimator comparison is defined for the latent-transformed model only",
            ));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &variant in &self.variants {
            for &(g, h) in &self.shapes {
                for &n in &self.sample_sizes {
                    for phi in &self.phis {
                        cells.push(Cell {
                            index: cells.len(),
                            variant,
                            g,
                            h,
                            n,
                            phi: phi.clone(),
                        });
                    }
                }
            }
        }
        cells
    }

    pub fn spec(&self, cell: &Cell) -> Result<ModelSpec> {
        Ok(ModelSpec::new(
            cell.variant,
            TghParams::new(self.xi, self.omega, TghShape::new(cell.g, cell.h)?)?,
            ArCoeffs::new(cell.phi.clone())?,
            RegressionSpec::new(self.beta.clone()),
        ))
    }

    fn fit_config(&self, variant: Variant) -> FitConfig {
        FitConfig {
            max_order: self.p_max,
            multistart: self.multistart,
            ..FitConfig::new(variant)
        }
    }
}

/// Generator of replication `rep` in cell `cell`.
pub fn replication_rng(seed: u64, cell: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cell as u64) << 32) | rep as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub replication: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionCell {
    pub cell: Cell,
    pub true_order: usize,
    /// Selected order per replication, `None` where selection failed.
    pub selected: Vec<Option<usize>>,
    pub correct: usize,
    /// Fraction of successful replications selecting the true order.
    pub rate: f64,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEstimates {
    pub method: String,
    /// One row of parameter estimates per successful replication.
    pub estimates: Vec<Vec<f64>>,
    pub replications: Vec<usize>,
    pub bias: Vec<f64>,
    pub rmse: Vec<f64>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationCell {
    pub cell: Cell,
    pub parameters: Vec<String>,
    pub truth: Vec<f64>,
    pub methods: Vec<MethodEstimates>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastMethod {
    pub method: String,
    pub scores: ForecastScores,
    /// PIT values, replication-major.
    pub pits: Vec<f64>,
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    /// `(nominal, empirical)` quantile pairs.
    pub reliability: Vec<(f64, f64)>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastCell {
    pub cell: Cell,
    pub methods: Vec<ForecastMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub tool_version: String,
    pub grid: ScenarioGrid,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub selection: Vec<SelectionCell>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub estimation: Vec<EstimationCell>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub forecasting: Vec<ForecastCell>,
}

/// Runs the study described by `grid` on `threads` worker threads.
pub fn run_study(grid: &ScenarioGrid, threads: usize) -> Result<StudyReport> {
    grid.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match grid.study {
        StudyKind::OrderSelection => run_order_selection_study(grid),
        StudyKind::EstimatorComparison => run_estimator_comparison(grid),
        StudyKind::ForecastComparison => run_forecast_comparison(grid),
    })
}

fn empty_report(grid: &ScenarioGrid) -> StudyReport {
    StudyReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        grid: grid.clone(),
        selection: Vec::new(),
        estimation: Vec::new(),
        forecasting: Vec::new(),
    }
}

/// Runs `job` for every (cell, replication) pair in parallel and returns the
/// outcomes grouped by cell, in replication order.
fn replicate<T: Send, F>(grid: &ScenarioGrid, cells: &[Cell], job: F) -> Vec<Vec<T>>
where
    F: Fn(&Cell, usize, &mut ChaCha8Rng) -> T + Sync,
{
    let reps = grid.replications;
    let flat: Vec<T> = (0..cells.len() * reps)
        .into_par_iter()
        .map(|i| {
            let (c, r) = (i / reps, i % reps);
            let mut rng = replication_rng(grid.seed, cells[c].index, r);
            job(&cells[c], r, &mut rng)
        })
        .collect();
    let mut grouped: Vec<Vec<T>> = Vec::with_capacity(cells.len());
    let mut it = flat.into_iter();
    for _ in cells {
        grouped.push(it.by_ref().take(reps).collect());
    }
    grouped
}

fn draw(
    grid: &ScenarioGrid,
    cell: &Cell,
    extra: usize,
    rng: &mut ChaCha8Rng,
) -> Result<crate::model::TimeSeries> {
    let spec = grid.spec(cell)?;
    simulate(&spec, &grid.covariates.build(cell.n + extra), rng)
}

/// Fraction of replications in which BIC selects the true order.
pub fn run_order_selection_study(grid: &ScenarioGrid) -> Result<StudyReport> {
    grid.validate()?;
    let cells = grid.cells();
    let outcomes = replicate(grid, &cells, |cell, _, rng| -> Result<usize> {
        let data = draw(grid, cell, 0, rng)?;
        Ok(select_order(&data, &grid.fit_config(cell.variant))?
            .best
            .order_selected)
    });
    let mut report = empty_report(grid);
    for (cell, results) in cells.into_iter().zip(outcomes) {
        let true_order = cell.phi.len();
        let mut failures = Vec::new();
        let selected: Vec<Option<usize>> = results
            .into_iter()
            .enumerate()
            .map(|(rep, r)| match r {
                Ok(p) => Some(p),
                Err(e) => {
                    failures.push(Failure {
                        replication: rep,
                        message: e.to_string(),
                    });
                    None
                }
            })
            .collect();
        let ok = selected.iter().flatten().count();
        let correct = selected
            .iter()
            .flatten()
            .filter(|&&p| p == true_order)
            .count();
        let rate = if ok == 0 {
            f64::NAN
        } else {
            correct as f64 / ok as f64
        };
        report.selection.push(SelectionCell {
            cell,
            true_order,
            selected,
            correct,
            rate,
            failures,
        });
    }
    Ok(report)
}

fn parameter_names(p: usize, nb: usize) -> Vec<String> {
    let mut names: Vec<String> = ["xi", "omega", "g", "h"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend((1..=nb).map(|j| format!("beta{j}")));
    names.extend((1..=p).map(|j| format!("phi{j}")));
    names
}

fn parameter_vector(spec: &ModelSpec) -> Vec<f64> {
    let mut v = vec![
        spec.tgh.xi(),
        spec.tgh.omega(),
        spec.shape().g(),
        spec.shape().h(),
    ];
    v.extend_from_slice(&spec.reg.beta);
    v.extend_from_slice(spec.ar.phi());
    v
}

/// Joint maximum approximated-likelihood estimates versus the two-stage
/// independence baseline, per replication.
pub fn run_estimator_comparison(grid: &ScenarioGrid) -> Result<StudyReport> {
    grid.validate()?;
    let cells = grid.cells();
    type Pair = (Result<Vec<f64>>, Result<Vec<f64>>);
    let outcomes = replicate(grid, &cells, |cell, _, rng| -> Pair {
        let data = match draw(grid, cell, 0, rng) {
            Ok(d) => d,
            Err(e) => return (Err(Error::domain(e.to_string())), Err(e)),
        };
        let config = grid.fit_config(Variant::TransformedLatent);
        let p = cell.phi.len();
        let joint = fit(&data, p, &config).map(|r| parameter_vector(&r.spec));
        let seq = fit_sequential_baseline(&data, p, &config).map(|r| parameter_vector(&r.spec));
        (joint, seq)
    });
    let mut report = empty_report(grid);
    for (cell, results) in cells.into_iter().zip(outcomes) {
        let truth = parameter_vector(&grid.spec(&cell)?);
        let parameters = parameter_names(cell.phi.len(), grid.beta.len());
        let (joint, seq): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        let methods = vec![
            summarize_estimates("joint", joint, &truth),
            summarize_estimates("sequential", seq, &truth),
        ];
        report.estimation.push(EstimationCell {
            cell,
            parameters,
            truth,
            methods,
        });
    }
    Ok(report)
}

fn summarize_estimates(
    method: &str,
    results: Vec<Result<Vec<f64>>>,
    truth: &[f64],
) -> MethodEstimates {
    let mut estimates = Vec::new();
    let mut replications = Vec::new();
    let mut failures = Vec::new();
    for (rep, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => {
                estimates.push(v);
                replications.push(rep);
            }
            Err(e) => failures.push(Failure {
                replication: rep,
                message: e.to_string(),
            }),
        }
    }
    let column = |j: usize| estimates.iter().map(|row| row[j]).collect::<Vec<f64>>();
    let bias = (0..truth.len())
        .map(|j| stats::mean(&column(j)) - truth[j])
        .collect();
    let rmse = (0..truth.len())
        .map(|j| stats::rmse(&column(j), truth[j]))
        .collect();
    MethodEstimates {
        method: method.to_string(),
        estimates,
        replications,
        bias,
        rmse,
        failures,
    }
}

/// Labels of the three fitted models in the forecast comparison.
pub const FORECAST_METHODS: [&str; 3] = ["t", "e", "gaussian"];

fn method_config(grid: &ScenarioGrid, method: &str) -> FitConfig {
    match method {
        "t" => grid.fit_config(Variant::TransformedLatent),
        "e" => grid.fit_config(Variant::TransformedError),
        _ => FitConfig {
            multistart: grid.multistart,
            ..FitConfig::gaussian()
        },
    }
}

/// One-step forecasts from the t-model, e-model and Gaussian AR fits on the
/// same simulated series.
pub fn run_forecast_comparison(grid: &ScenarioGrid) -> Result<StudyReport> {
    grid.validate()?;
    let cells = grid.cells();
    let horizon = grid.forecast_origins;
    let outcomes = replicate(
        grid,
        &cells,
        |cell, _, rng| -> Vec<Result<Vec<ForecastRecord>>> {
            let data = match draw(grid, cell, horizon, rng) {
                Ok(d) => d,
                Err(e) => {
                    return FORECAST_METHODS
                        .iter()
                        .map(|_| Err(Error::domain(e.to_string())))
                        .collect()
                }
            };
            let train = data.slice(0..cell.n);
            let p = cell.phi.len();
            FORECAST_METHODS
                .iter()
                .map(|method| -> Result<Vec<ForecastRecord>> {
                    let fitted: FitResult = fit(&train, p, &method_config(grid, method))?;
                    (cell.n..cell.n + horizon)
                        .map(|t| {
                            let dist = predictive(
                                &fitted.spec,
                                &data.slice(0..t),
                                data.covariates().row(t),
                            )?;
                            score_forecast(&dist, t, p, 0.95, data.y()[t])
                        })
                        .collect()
                })
                .collect()
        },
    );
    let mut report = empty_report(grid);
    for (cell, per_rep) in cells.into_iter().zip(outcomes) {
        let mut methods = Vec::new();
        for (m, name) in FORECAST_METHODS.iter().enumerate() {
            let mut records = Vec::new();
            let mut failures = Vec::new();
            for (rep, outcome) in per_rep.iter().enumerate() {
                match &outcome[m] {
                    Ok(r) => records.extend(r.iter().cloned()),
                    Err(e) => failures.push(Failure {
                        replication: rep,
                        message: e.to_string(),
                    }),
                }
            }
            let pits: Vec<f64> = records.iter().map(|r| r.pit).collect();
            let ks = if pits.is_empty() {
                f64::NAN
            } else {
                stats::ks_uniform(&pits)
            };
            methods.push(ForecastMethod {
                method: name.to_string(),
                scores: ForecastScores::from_records(&records),
                ks_statistic: ks,
                ks_pvalue: stats::kolmogorov_pvalue(ks, pits.len()),
                reliability: reliability(&pits),
                pits,
                failures,
            });
        }
        report.forecasting.push(ForecastCell { cell, methods });
    }
    Ok(report)
}

/// Empirical fraction of PIT values below each nominal level
/// `0.05, 0.10, ..., 0.95`.
pub fn reliability(pits: &[f64]) -> Vec<(f64, f64)> {
    (1..20)
        .map(|i| {
            let q = i as f64 / 20.0;
            let below = pits.iter().filter(|&&u| u <= q).count();
            (
                q,
                if pits.is_empty() {
                    f64::NAN
                } else {
                    below as f64 / pits.len() as f64
                },
            )
        })
        .collect()
}

/// Simulated paths for plotting, with the marginal descriptors of the
/// stochastic part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationMatrix {
    /// `replications` rows of length `n`.
    pub paths: Vec<Vec<f64>>,
    pub descriptors: MomentDescriptors,
}

/// `replications` independent paths of length `covariates.nrows()`.
pub fn export_realization_matrix(
    spec: &ModelSpec,
    covariates: &Covariates,
    replications: usize,
    seed: u64,
) -> Result<RealizationMatrix> {
    if replications == 0 {
        return Err(Error::domain("replications must be at least 1"));
    }
    let descriptors = spec.marginal_descriptors()?;
    let paths = (0..replications)
        .map(|r| {
            let mut rng = replication_rng(seed, 0, r);
            simulate(spec, covariates, &mut rng).map(|s| s.y().to_vec())
        })
        .collect::<Result<_>>()?;
    Ok(RealizationMatrix { paths, descriptors })
}

fn fmt_phi(phi: &[f64]) -> String {
    phi.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn cell_columns(c: &Cell) -> [String; 5] {
    [
        c.variant.to_string(),
        c.g.to_string(),
        c.h.to_string(),
        c.n.to_string(),
        fmt_phi(&c.phi),
    ]
}

/// Writes `report.json` and one CSV per table into `dir`.
pub fn write_report(report: &StudyReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::File::create(dir.join("report.json"))?.write_all(json.as_bytes())?;
    let head = ["variant", "g", "h", "n", "phi"];
    if !report.selection.is_empty() {
        let mut w = csv::Writer::from_path(dir.join("selection.csv"))?;
        w.write_record(head.iter().chain(&[
            "true_order",
            "replications",
            "failures",
            "correct",
            "rate",
        ]))?;
        for s in &report.selection {
            let mut row = cell_columns(&s.cell).to_vec();
            row.extend([
                s.true_order.to_string(),
                s.selected.len().to_string(),
                s.failures.len().to_string(),
                s.correct.to_string(),
                s.rate.to_string(),
            ]);
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    if !report.estimation.is_empty() {
        let mut w = csv::Writer::from_path(dir.join("estimates.csv"))?;
        w.write_record(
            head.iter()
                .chain(&["method", "replication", "parameter", "estimate"]),
        )?;
        let mut s = csv::Writer::from_path(dir.join("estimates_summary.csv"))?;
        s.write_record(head.iter().chain(&[
            "method",
            "parameter",
            "truth",
            "bias",
            "rmse",
            "successes",
            "failures",
        ]))?;
        for cell in &report.estimation {
            let cols = cell_columns(&cell.cell);
            for m in &cell.methods {
                for (row, rep) in m.estimates.iter().zip(&m.replications) {
                    for (name, v) in cell.parameters.iter().zip(row) {
                        let mut rec = cols.to_vec();
                        rec.extend([
                            m.method.clone(),
                            rep.to_string(),
                            name.clone(),
                            v.to_string(),
                        ]);
                        w.write_record(&rec)?;
                    }
                }
                for (j, name) in cell.parameters.iter().enumerate() {
                    let mut rec = cols.to_vec();
                    rec.extend([
                        m.method.clone(),
                        name.clone(),
                        cell.truth[j].to_string(),
                        m.bias[j].to_string(),
                        m.rmse[j].to_string(),
                        m.estimates.len().to_string(),
                        m.failures.len().to_string(),
                    ]);
                    s.write_record(&rec)?;
                }
            }
        }
        w.flush()?;
        s.flush()?;
    }
    if !report.forecasting.is_empty() {
        let mut sum = csv::Writer::from_path(dir.join("forecast_summary.csv"))?;
        sum.write_record(head.iter().chain(&[
            "method",
            "forecasts",
            "failures",
            "mae",
            "rmse",
            "coverage_min_length",
            "width_min_length",
            "coverage_symmetric",
            "width_symmetric",
            "mean_crps",
            "ks_statistic",
            "ks_pvalue",
        ]))?;
        let mut pit = csv::Writer::from_path(dir.join("pit.csv"))?;
        pit.write_record(head.iter().chain(&["method", "pit"]))?;
        let mut rel = csv::Writer::from_path(dir.join("reliability.csv"))?;
        rel.write_record(head.iter().chain(&["method", "nominal", "empirical"]))?;
        for cell in &report.forecasting {
            let cols = cell_columns(&cell.cell);
            for m in &cell.methods {
                let s = &m.scores;
                let mut rec = cols.to_vec();
                rec.push(m.method.clone());
                rec.extend(
                    [s.forecasts as f64, m.failures.len() as f64]
                        .iter()
                        .map(|v| v.to_string())
                        .chain(
                            [
                                s.mae,
                                s.rmse,
                                s.coverage_min_length,
                                s.width_min_length,
                                s.coverage_symmetric,
                                s.width_symmetric,
                                s.mean_crps,
                                m.ks_statistic,
                                m.ks_pvalue,
                            ]
                            .iter()
                            .map(|v| v.to_string()),
                        ),
                );
                sum.write_record(&rec)?;
                for u in &m.pits {
                    let mut rec = cols.to_vec();
                    rec.extend([m.method.clone(), u.to_string()]);
                    pit.write_record(&rec)?;
                }
                for (q, e) in &m.reliability {
                    let mut rec = cols.to_vec();
                    rec.extend([m.method.clone(), q.to_string(), e.to_string()]);
                    rel.write_record(&rec)?;
                }
            }
        }
        sum.flush()?;
        pit.flush()?;
        rel.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small_grid(study: StudyKind) -> ScenarioGrid {
        ScenarioGrid {
            study,
            variants: vec![Variant::TransformedLatent],
            shapes: vec![(0.3, 0.1)],
            sample_sizes: vec![120],
            phis: vec![vec![0.8]],
            xi: -3.0,
            omega: 1.5,
            beta: vec![3.0, -2.0],
            covariates: CovariateDesign::Harmonic24,
            replications: 3,
            seed: 7,
            p_max: 2,
            multistart: 1,
            forecast_origins: 2,
        }
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| replication_rng(1, 0, 0).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = replication_rng(1, 0, 1).random();
        let y: u64 = replication_rng(1, 1, 0).random();
        assert!(x != a[0] && y != a[0] && x != y);
    }

    #[test]
    fn grid_validation() {
        let mut g = small_grid(StudyKind::OrderSelection);
        assert!(g.validate().is_ok());
        g.replications = 0;
        assert!(g.validate().is_err());
        let mut g = small_grid(StudyKind::OrderSelection);
        g.phis = vec![vec![1.2]];
        assert!(g.validate().is_err());
        let mut g = small_grid(StudyKind::EstimatorComparison);
        g.variants.push(Variant::TransformedError);
        assert!(g.validate().is_err());
        let mut g = small_grid(StudyKind::OrderSelection);
        g.beta = vec![1.0];
        assert!(g.validate().is_err());
        assert!(ScenarioGrid::from_json("{\"study\": \"order_selection\"}").is_err());
        assert!(ScenarioGrid::from_json("not json").is_err());
    }

    #[test]
    fn grid_json_defaults() {
        let g = ScenarioGrid::from_json(
            r#"{"study": "forecast_comparison", "variants": ["t", "e"], "shapes": [[0.3, 0.1]],
                "sample_sizes": [500], "phis": [[0.8]], "seed": 1}"#,
        )
        .unwrap();
        assert_eq!(
            (g.xi, g.omega, g.replications, g.p_max),
            (-3.0, 1.5, 200, 5)
        );
        assert_eq!(g.beta, vec![3.0, -2.0]);
        assert_eq!(g.cells().len(), 2);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        for kind in [
            StudyKind::OrderSelection,
            StudyKind::EstimatorComparison,
            StudyKind::ForecastComparison,
        ] {
            let g = small_grid(kind);
            let a = run_study(&g, 1).unwrap();
            let b = run_study(&g, 3).unwrap();
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            );
        }
    }

    #[test]
    fn failure_accounting() {
        let g = small_grid(StudyKind::OrderSelection);
        let r = run_study(&g, 1).unwrap();
        for c in &r.selection {
            assert_eq!(c.selected.len(), g.replications);
            assert_eq!(
                c.selected.iter().filter(|s| s.is_none()).count(),
                c.failures.len()
            );
            assert!((0.0..=1.0).contains(&c.rate));
        }
        let g = small_grid(StudyKind::ForecastComparison);
        let r = run_study(&g, 1).unwrap();
        for m in &r.forecasting[0].methods {
            assert_eq!(
                m.scores.forecasts + m.failures.len() * g.forecast_origins,
                g.replications * g.forecast_origins
            );
            assert!(m.pits.iter().all(|u| (0.0..=1.0).contains(u)));
        }
        // too-short series fail in every replication without aborting
        let mut g = small_grid(StudyKind::EstimatorComparison);
        g.sample_sizes = vec![20];
        let r = run_study(&g, 1).unwrap();
        for m in &r.estimation[0].methods {
            assert_eq!(m.failures.len(), g.replications);
            assert!(m.estimates.is_empty());
        }
    }

    #[test]
    fn reliability_of_uniform_grid() {
        let u: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        for (q, e) in reliability(&u) {
            assert!((q - e).abs() < 1e-3);
        }
    }

    #[test]
    fn realization_matrix() {
        let gaussian = ModelSpec::new(
            Variant::TransformedLatent,
            TghParams::standard(TghShape::gaussian()),
            ArCoeffs::new(vec![0.8]).unwrap(),
            RegressionSpec::none(),
        );
        let m = export_realization_matrix(&gaussian, &Covariates::none(100), 1000, 3).unwrap();
        assert_eq!((m.paths.len(), m.paths[0].len()), (1000, 100));
        let d = m.descriptors;
        assert_eq!(
            (d.mean, d.sd, d.skewness, d.excess_kurtosis),
            (0.0, 1.0, 0.0, 0.0)
        );

        let skewed = ModelSpec::new(
            Variant::TransformedLatent,
            TghParams::standard(TghShape::new(0.3, 0.1).unwrap()),
            ArCoeffs::new(vec![0.8]).unwrap(),
            RegressionSpec::none(),
        );
        let m = export_realization_matrix(&skewed, &Covariates::none(100), 1000, 4).unwrap();
        assert_eq!(
            m.descriptors,
            TghShape::new(0.3, 0.1).unwrap().summary().unwrap()
        );
        // grand mean over rows; each row mean has variance about
        // sd^2 (1 + phi) / ((1 - phi) n) for an AR(1) latent path
        let all: Vec<f64> = m.paths.iter().map(|r| stats::mean(r)).collect();
        let grand = stats::mean(&all);
        let se = m.descriptors.sd * (1.8f64 / 0.2 / 100.0 / 1000.0).sqrt();
        assert!(
            (grand - m.descriptors.mean).abs() < 4.0 * se,
            "{grand} vs {}",
            m.descriptors.mean
        );
    }

    #[test]
    fn report_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let g = small_grid(StudyKind::ForecastComparison);
        let r = run_study(&g, 1).unwrap();
        write_report(&r, dir.path()).unwrap();
        for f in [
            "report.json",
            "forecast_summary.csv",
            "pit.csv",
            "reliability.csv",
        ] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let back: StudyReport =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert_eq!(back.forecasting.len(), 1);
    }
}

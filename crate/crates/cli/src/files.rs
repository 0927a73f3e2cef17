//! Series CSV and model JSON formats.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tghar::{
    ArCoeffs, Covariates, FitResult, ModelSpec, RegressionSpec, TghParams, TghShape, TimeSeries,
    Variant,
};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A series read from CSV: column `t`, column `y`, then covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFile {
    pub first_t: i64,
    pub y: Vec<f64>,
    pub covariate_names: Vec<String>,
    /// Row-major, one row per observation.
    pub covariates: Vec<Vec<f64>>,
}

impl SeriesFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_string)
            .collect();
        if header.len() < 2 || header[0] != "t" || header[1] != "y" {
            return Err("line 1: header must start with columns t,y".into());
        }
        let names = header[2..].to_vec();
        let mut out = SeriesFile {
            first_t: 0,
            y: Vec::new(),
            covariate_names: names,
            covariates: Vec::new(),
        };
        for record in reader.records() {
            let record = record.map_err(|e| e.to_string())?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(format!(
                    "line {line}: expected {} cells, found {}",
                    header.len(),
                    record.len()
                ));
            }
            let t: i64 = record[0]
                .parse()
                .map_err(|_| format!("line {line}: t is not an integer: '{}'", &record[0]))?;
            let number = |i: usize| -> Result<f64, String> {
                let v: f64 = record[i].parse().map_err(|_| {
                    format!(
                        "line {line}: column {} is not a number: '{}'",
                        header[i], &record[i]
                    )
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format!("line {line}: column {} is not finite", header[i]))
                }
            };
            if out.y.is_empty() {
                out.first_t = t;
            } else if t != out.first_t + out.y.len() as i64 {
                return Err(format!(
                    "line {line}: t must increase in unit steps, found {t}"
                ));
            }
            out.y.push(number(1)?);
            out.covariates
                .push((2..header.len()).map(number).collect::<Result<_, _>>()?);
        }
        if out.y.is_empty() {
            return Err("no observations".into());
        }
        Ok(out)
    }

    /// The series with the named covariate columns, in the order given.
    pub fn series(&self, names: &[String]) -> Result<TimeSeries, CliError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.covariate_names
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| CliError::data(format!("unknown covariate column '{n}'")))
            })
            .collect::<Result<_, _>>()?;
        let x = if idx.is_empty() {
            Covariates::none(self.y.len())
        } else {
            let rows: Vec<Vec<f64>> = self
                .covariates
                .iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect();
            Covariates::from_rows(&rows)?
        };
        Ok(TimeSeries::new(self.y.clone(), x)?)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string(), "y".to_string()];
        header.extend(self.covariate_names.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (i, (y, x)) in self.y.iter().zip(&self.covariates).enumerate() {
            let mut row = vec![(self.first_t + i as i64).to_string(), y.to_string()];
            row.extend(x.iter().map(f64::to_string));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
    }
}

/// A model specification with optional fit metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub variant: Variant,
    pub xi: f64,
    pub omega: f64,
    pub g: f64,
    pub h: f64,
    pub phi: Vec<f64>,
    pub beta: Vec<f64>,
    pub covariate_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loglik: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ModelFile {
    pub fn from_spec(spec: &ModelSpec, covariate_names: Vec<String>) -> Self {
        let shape = spec.shape();
        ModelFile {
            schema_version: SCHEMA_VERSION,
            variant: spec.variant,
            xi: spec.tgh.xi(),
            omega: spec.tgh.omega(),
            g: shape.g(),
            h: shape.h(),
            phi: spec.ar.phi().to_vec(),
            beta: spec.reg.beta.clone(),
            covariate_names,
            loglik: None,
            bic: None,
            n: None,
            k: None,
            converged: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
        }
    }

    pub fn from_fit(fit: &FitResult, covariate_names: Vec<String>) -> Self {
        ModelFile {
            loglik: Some(fit.loglik),
            bic: Some(fit.bic),
            n: Some(fit.n_used + fit.k),
            k: Some(fit.k),
            converged: Some(fit.convergence.converged),
            ..Self::from_spec(&fit.spec, covariate_names)
        }
    }

    pub fn spec(&self) -> Result<ModelSpec, CliError> {
        if self.beta.len() != self.covariate_names.len() {
            return Err(CliError::data(format!(
                "model has {} regression coefficients but {} covariate names",
                self.beta.len(),
                self.covariate_names.len()
            )));
        }
        Ok(ModelSpec::new(
            self.variant,
            TghParams::new(self.xi, self.omega, TghShape::new(self.g, self.h)?)?,
            ArCoeffs::new(self.phi.clone())?,
            RegressionSpec::new(self.beta.clone()),
        ))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        let file: Self = serde_json::from_str(&text).map_err(|e| {
            CliError::data(format!("{}: malformed model file: {e}", path.display()))
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::data(format!(
                "{}: unsupported schema_version {} (expected {SCHEMA_VERSION})",
                path.display(),
                file.schema_version
            )));
        }
        file.spec()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }
}

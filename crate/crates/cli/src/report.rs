//! Report assembly and the CSV/JSON writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use graphdrift::baseline::MseBaseline;
use graphdrift::forest::AdjacencyMatrix;
use graphdrift::inference::{CoefficientSummary, CurvePoint, Encoding};
use graphdrift::transition::{StabilityDataset, StabilityMode};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::pipeline::{Downstream, Source};

pub const FORESTS_JSON: &str = "forests.json";
pub const REPORT_JSON: &str = "report.json";
pub const POSTERIOR_JSON: &str = "posterior_summary.json";
pub const FRACTIONS_CSV: &str = "stability_fractions.csv";
pub const CURVE_CSV: &str = "stability_curve.csv";
pub const COEFFICIENTS_CSV: &str = "coefficients.csv";
pub const DRAWS_CSV: &str = "draws.csv";
pub const DATASET_CSV: &str = "stability_dataset.csv";
pub const MSE_CSV: &str = "mse_baseline.csv";
pub const MSE_JSON: &str = "mse_baseline.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub sampler_seed: u64,
    pub source: SourceInfo,
    /// Effective configuration after command-line overrides.
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceInfo {
    File { path: String, sha256: String },
    Simulation { n_per_period: usize, seed: u64 },
    Forests { path: String, sha256: String },
}

impl From<&Source> for SourceInfo {
    fn from(s: &Source) -> Self {
        match s {
            Source::File { path, sha256 } => SourceInfo::File {
                path: path.clone(),
                sha256: sha256.clone(),
            },
            Source::Simulation { n_per_period, seed } => SourceInfo::Simulation {
                n_per_period: *n_per_period,
                seed: *seed,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub t: usize,
    pub stable: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub mode: StabilityMode,
    pub records: usize,
    pub pairs_per_transition: usize,
    pub fractions: Vec<Fraction>,
}

impl StabilitySummary {
    pub fn new(d: &StabilityDataset) -> Self {
        StabilitySummary {
            mode: d.mode,
            records: d.records.len(),
            pairs_per_transition: d.pairs_per_transition(),
            fractions: d
                .fractions()
                .into_iter()
                .map(|(t, fraction)| Fraction {
                    t,
                    stable: d.stable_count(t).expect("transition exists"),
                    fraction,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub encoding: Encoding,
    pub labels: Vec<String>,
    pub coefficients: Vec<CoefficientSummary>,
    pub acceptance_rate: f64,
    pub seed: u64,
    pub draws: usize,
    pub burn_in: usize,
    pub proposal_scale: f64,
    pub map_converged: bool,
    pub map_iterations: usize,
    pub split_half_discrepancy: f64,
    pub design_warning: Option<String>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub provenance: Provenance,
    pub window_len: Option<usize>,
    pub discarded_rows: Option<usize>,
    pub forests: Vec<AdjacencyMatrix>,
    pub stability: StabilitySummary,
    pub posterior: PosteriorSummary,
    pub curve: Vec<CurvePoint>,
}

impl DriftReport {
    pub fn new(
        provenance: Provenance,
        windows: Option<(usize, usize)>,
        forests: Vec<AdjacencyMatrix>,
        ds: &Downstream,
        encoding: Encoding,
    ) -> Self {
        DriftReport {
            provenance,
            window_len: windows.map(|w| w.0),
            discarded_rows: windows.map(|w| w.1),
            forests,
            stability: StabilitySummary::new(&ds.dataset),
            posterior: PosteriorSummary {
                encoding,
                labels: ds.draws.labels.clone(),
                coefficients: ds.draws.summary(),
                acceptance_rate: ds.draws.acceptance_rate,
                seed: ds.draws.seed,
                draws: ds.draws.len(),
                burn_in: ds.draws.burn_in,
                proposal_scale: ds.draws.scale,
                map_converged: ds.draws.map.converged,
                map_iterations: ds.draws.map.iterations,
                split_half_discrepancy: ds.draws.split_half_discrepancy(),
                design_warning: ds.design.warning.clone(),
                diagnostics: ds.draws.diagnostics.clone(),
            },
            curve: ds.curve.points.clone(),
        }
    }
}

fn output_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(output_err(dir))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(output_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

/// Builds a CSV in memory; all values are plain numbers or identifiers.
struct Csv(Vec<u8>);

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut c = Csv(Vec::new());
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let line: Vec<String> = fields.into_iter().collect();
        writeln!(self.0, "{}", line.join(",")).expect("writing to memory");
    }
}

pub fn write_forests(path: &Path, forests: &[AdjacencyMatrix]) -> Result<()> {
    write_json(path, &forests)
}

pub fn read_forests(path: &Path) -> Result<Vec<AdjacencyMatrix>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::ConfigParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes every downstream series plus the report itself into `dir`.
pub fn write_drift_outputs(dir: &Path, report: &DriftReport, ds: &Downstream) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let p = dir.join(name);
        write_bytes(&p, &bytes)?;
        written.push(p);
        Ok(())
    };

    let mut fr = Csv::new(&["t", "stable", "pairs", "fraction"]);
    for f in &report.stability.fractions {
        fr.row([
            f.t.to_string(),
            f.stable.to_string(),
            report.stability.pairs_per_transition.to_string(),
            f.fraction.to_string(),
        ]);
    }
    put(FRACTIONS_CSV, fr.0)?;

    let mut cu = Csv::new(&["t", "observed", "mean", "lower", "upper"]);
    for p in &report.curve {
        cu.row([
            p.t.to_string(),
            p.observed.to_string(),
            p.mean.to_string(),
            p.lower.to_string(),
            p.upper.to_string(),
        ]);
    }
    put(CURVE_CSV, cu.0)?;

    let mut co = Csv::new(&["label", "map", "mean", "sd", "q025", "q975"]);
    for c in &report.posterior.coefficients {
        co.row([
            c.label.clone(),
            c.map.to_string(),
            c.mean.to_string(),
            c.sd.to_string(),
            c.q025.to_string(),
            c.q975.to_string(),
        ]);
    }
    put(COEFFICIENTS_CSV, co.0)?;

    let labels: Vec<&str> = ds.draws.labels.iter().map(String::as_str).collect();
    let mut dr = Csv::new(&labels);
    for row in ds.draws.draws.row_iter() {
        dr.row(row.iter().map(|v| v.to_string()));
    }
    put(DRAWS_CSV, dr.0)?;

    let mut dset = Vec::new();
    ds.dataset
        .write_csv(&mut dset)
        .map_err(|e| CliError::stage("report", e))?;
    put(DATASET_CSV, dset)?;

    let mut post = serde_json::to_vec_pretty(&report.posterior)?;
    post.push(b'\n');
    put(POSTERIOR_JSON, post)?;

    let mut forests = serde_json::to_vec_pretty(&report.forests)?;
    forests.push(b'\n');
    put(FORESTS_JSON, forests)?;

    let mut rep = serde_json::to_vec_pretty(report)?;
    rep.push(b'\n');
    put(REPORT_JSON, rep)?;
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub provenance: Provenance,
    pub baseline: MseBaseline,
    pub stability_mode: StabilityMode,
    /// Stability fraction at each transition paired with that window's MSE.
    pub paired: Vec<PairedPoint>,
    /// Spearman correlation of the paired series; null when undefined.
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedPoint {
    pub t: usize,
    pub stability: f64,
    pub mse: f64,
}

pub fn write_baseline_outputs(dir: &Path, report: &BaselineReport) -> Result<()> {
    ensure_dir(dir)?;
    let mut csv = Csv::new(&["t", "mse"]);
    for w in &report.baseline.windows {
        csv.row([w.t.to_string(), w.mse.to_string()]);
    }
    write_bytes(&dir.join(MSE_CSV), &csv.0)?;
    write_json(&dir.join(MSE_JSON), report)
}

//! Stage orchestration shared by the subcommands.

use std::fs::File;
use std::path::Path;

use graphdrift::baseline::{mse_baseline, MseBaseline};
use graphdrift::dataset::{
    load_csv, make_windows, select_typed, simulate_drift, Schema, SimulationConfig, WindowedTensor, Windowing,
};
use graphdrift::forest::{kruskal_max_forest, weight_matrix_with, AdjacencyMatrix};
use graphdrift::inference::{
    build_design, response, sample_posterior, stability_curve, DesignMatrix, DesignOptions, PosteriorDraws,
    Prior, StabilityCurve,
};
use graphdrift::seed::{stage_seed, STAGE_SAMPLER, STAGE_SIMULATE};
use graphdrift::transition::{build_stability_dataset, StabilityDataset, StabilityMode};
use graphdrift::Execution;

use crate::config::{InputConfig, RunConfig};
use crate::error::{CliError, Result, StageExt};

/// Where the windowed data came from, for provenance.
#[derive(Debug, Clone)]
pub enum Source {
    File { path: String, sha256: String },
    Simulation { n_per_period: usize, seed: u64 },
}

pub struct Loaded {
    pub windowing: Windowing,
    pub source: Source,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|source| {
        CliError::stage(
            "load",
            graphdrift::Error::Io {
                path: path.to_path_buf(),
                source,
            },
        )
    })?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn load_file(input: &InputConfig, window_len: usize) -> Result<Windowing> {
    let mut table = match &input.schema {
        Some(schema_path) => {
            let schema = Schema::from_path(schema_path).stage("load")?;
            let table = load_csv(&input.path, &schema, input.has_header).stage("load")?;
            if input.columns.is_empty() {
                table
            } else {
                table.select(&input.columns).stage("load")?
            }
        }
        None => {
            let file = File::open(&input.path).map_err(|e| {
                CliError::stage(
                    "load",
                    graphdrift::Error::Io {
                        path: input.path.clone(),
                        source: e,
                    },
                )
            })?;
            select_typed(file, &input.columns, &input.discrete).stage("load")?
        }
    };
    for name in &input.binary {
        let idx = table.column_index(name).stage("load")?;
        let levels = table.schema[idx].levels.len();
        if levels != 2 {
            return Err(CliError::stage(
                "load",
                graphdrift::Error::NotBinary {
                    column: name.clone(),
                    levels,
                },
            ));
        }
    }
    if table.schema.len() < 2 {
        return Err(CliError::stage(
            "load",
            graphdrift::Error::TooFewVariables(table.schema.len()),
        ));
    }
    if let Some([a, b]) = input.rows {
        if b > table.rows {
            return Err(CliError::Validation(format!(
                "input.rows end {b} exceeds the {} rows in the file",
                table.rows
            )));
        }
        table = table.slice_rows(a..b);
    }
    make_windows(&table, window_len).stage("window")
}

pub fn simulate(n_per_period: usize, root: u64) -> Result<Loaded> {
    let seed = stage_seed(root, STAGE_SIMULATE);
    let tensor =
        simulate_drift(&SimulationConfig::new(n_per_period, seed).stage("simulate")?).stage("simulate")?;
    Ok(Loaded {
        windowing: Windowing { tensor, discarded: 0 },
        source: Source::Simulation { n_per_period, seed },
    })
}

/// Loads the configured file, or simulates when only `[simulation]` is set.
pub fn load(cfg: &RunConfig) -> Result<Loaded> {
    match (&cfg.input, &cfg.simulation) {
        (Some(input), _) => Ok(Loaded {
            windowing: load_file(input, cfg.window_len)?,
            source: Source::File {
                path: input.path.display().to_string(),
                sha256: sha256_file(&input.path)?,
            },
        }),
        (None, Some(sim)) => simulate(sim.n_per_period, cfg.seed()?),
        (None, None) => Err(CliError::Validation(
            "config needs an [input] or [simulation] section".into(),
        )),
    }
}

/// One forest per window, reporting the failing window on error.
pub fn forests(tensor: &WindowedTensor, cfg: &RunConfig, exec: Execution) -> Result<Vec<AdjacencyMatrix>> {
    let mi = cfg.mi.config();
    exec.map_slice(&tensor.windows, |w| {
        weight_matrix_with(w, &tensor.schema, &mi, Execution::Sequential)
            .map(|g| kruskal_max_forest(&g))
            .map_err(|source| CliError::Stage {
                stage: "forest",
                window: Some(w.index),
                source,
            })
    })
    .into_iter()
    .collect()
}

pub struct Downstream {
    pub dataset: StabilityDataset,
    pub design: DesignMatrix,
    pub draws: PosteriorDraws,
    pub curve: StabilityCurve,
}

/// Transition, design, sampling and curve stages from a forest sequence.
pub fn downstream(
    ams: &[AdjacencyMatrix],
    cfg: &RunConfig,
    mode: StabilityMode,
    exec: Execution,
) -> Result<Downstream> {
    let dataset = build_stability_dataset(ams, mode).stage("transition")?;
    let design = build_design(
        &dataset,
        cfg.inference.encoding,
        DesignOptions {
            center_time: cfg.inference.center_time,
        },
    )
    .stage("inference")?;
    let prior = Prior::isotropic(design.ncols(), cfg.inference.prior_mu, cfg.inference.prior_sigma)
        .stage("inference")?;
    let sampler = cfg.sampler.config(stage_seed(cfg.seed()?, STAGE_SAMPLER));
    let draws = sample_posterior(&design.x, &response(&dataset), &prior, &design.labels, &sampler)
        .stage("inference")?;
    let curve = stability_curve(&draws, &design, &dataset, exec).stage("inference")?;
    Ok(Downstream {
        dataset,
        design,
        draws,
        curve,
    })
}

pub fn baseline(tensor: &WindowedTensor, target: &str) -> Result<MseBaseline> {
    mse_baseline(tensor, target).stage("baseline")
}

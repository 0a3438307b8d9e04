//! Subcommand implementations.

use std::path::Path;

use graphdrift::seed::{stage_seed, STAGE_SAMPLER};
use graphdrift::stats::spearman;
use graphdrift::transition::{build_stability_dataset, StabilityMode};
use graphdrift::Execution;

use crate::config::{RunConfig, SimulationSection};
use crate::error::{CliError, Result, StageExt};
use crate::pipeline::{self, sha256_file, Loaded};
use crate::report::{self, BaselineReport, DriftReport, PairedPoint, Provenance, SourceInfo};

fn provenance(command: &str, cfg: &RunConfig, source: SourceInfo) -> Result<Provenance> {
    let seed = cfg.seed()?;
    Ok(Provenance {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        seed,
        sampler_seed: stage_seed(seed, STAGE_SAMPLER),
        source,
        config: cfg.clone(),
    })
}

fn drift_from_loaded(
    cfg: &RunConfig,
    loaded: &Loaded,
    command: &str,
    out: &Path,
    mode: StabilityMode,
) -> Result<DriftReport> {
    let exec = Execution::default();
    let tensor = &loaded.windowing.tensor;
    let ams = pipeline::forests(tensor, cfg, exec)?;
    let ds = pipeline::downstream(&ams, cfg, mode, exec)?;
    let mut eff = cfg.clone();
    eff.stability.mode = mode;
    let report = DriftReport::new(
        provenance(command, &eff, SourceInfo::from(&loaded.source))?,
        Some((tensor.window_len, loaded.windowing.discarded)),
        ams,
        &ds,
        cfg.inference.encoding,
    );
    report::write_drift_outputs(out, &report, &ds)?;
    Ok(report)
}

pub fn cmd_drift(cfg: &RunConfig, out: &Path) -> Result<DriftReport> {
    cfg.validate()?;
    let loaded = pipeline::load(cfg)?;
    drift_from_loaded(cfg, &loaded, "drift", out, cfg.stability.mode)
}

/// Transition and inference stages from a previously written `forests.json`.
pub fn cmd_from_forests(cfg: &RunConfig, forests: &Path, out: &Path) -> Result<DriftReport> {
    cfg.validate()?;
    let ams = report::read_forests(forests)?;
    let ds = pipeline::downstream(&ams, cfg, cfg.stability.mode, Execution::default())?;
    let source = SourceInfo::Forests {
        path: forests.display().to_string(),
        sha256: sha256_file(forests)?,
    };
    let report = DriftReport::new(
        provenance("drift", cfg, source)?,
        None,
        ams,
        &ds,
        cfg.inference.encoding,
    );
    report::write_drift_outputs(out, &report, &ds)?;
    Ok(report)
}

pub struct SimulationReports {
    pub cumulative: DriftReport,
    pub consecutive: DriftReport,
}

/// Simulated eight-period study, run once per stability mode into
/// `out/cumulative` and `out/consecutive`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulationReports> {
    let mut cfg = cfg.clone();
    cfg.input = None;
    let sim = *cfg.simulation.get_or_insert_with(SimulationSection::default);
    cfg.validate()?;
    let loaded = pipeline::simulate(sim.n_per_period, cfg.seed()?)?;
    Ok(SimulationReports {
        cumulative: drift_from_loaded(
            &cfg,
            &loaded,
            "simulate",
            &out.join("cumulative"),
            StabilityMode::Cumulative,
        )?,
        consecutive: drift_from_loaded(
            &cfg,
            &loaded,
            "simulate",
            &out.join("consecutive"),
            StabilityMode::Consecutive,
        )?,
    })
}

/// OLS fitted on window 1, scored on every window, paired with the
/// stability series of the configured mode.
pub fn cmd_mse_baseline(cfg: &RunConfig, target: Option<&str>, out: &Path) -> Result<BaselineReport> {
    cfg.validate()?;
    let target = target
        .map(str::to_string)
        .or_else(|| cfg.baseline.as_ref().map(|b| b.target.clone()))
        .ok_or_else(|| {
            CliError::Validation("no baseline target (use --target or [baseline] target)".into())
        })?;
    let loaded = pipeline::load(cfg)?;
    let tensor = &loaded.windowing.tensor;
    let baseline = pipeline::baseline(tensor, &target)?;
    let ams = pipeline::forests(tensor, cfg, Execution::default())?;
    let d = build_stability_dataset(&ams, cfg.stability.mode).stage("transition")?;
    let paired: Vec<PairedPoint> = d
        .fractions()
        .into_iter()
        .map(|(t, stability)| PairedPoint {
            t,
            stability,
            mse: baseline.windows[t - 1].mse,
        })
        .collect();
    let s: Vec<f64> = paired.iter().map(|p| p.stability).collect();
    let m: Vec<f64> = paired.iter().map(|p| p.mse).collect();
    let rho = spearman(&s, &m);
    let mut eff = cfg.clone();
    eff.baseline = Some(crate::config::BaselineSection { target });
    let report = BaselineReport {
        provenance: provenance("mse-baseline", &eff, SourceInfo::from(&loaded.source))?,
        baseline,
        stability_mode: cfg.stability.mode,
        paired,
        spearman: rho.is_finite().then_some(rho),
    };
    report::write_baseline_outputs(out, &report)?;
    Ok(report)
}

//! Orchestration of a configured run: projection, time stepping, reference
//! construction, error tables and file output.
//!
//! Files under `out_dir` (with a level sweep, each level writes into `J{level}/`):
//!
//! - `modes.csv`: mode snapshots (initial, every `output_stride` steps, final)
//! - `stats.csv`: mean and std at the same times
//! - `manifest.toml`: results, timings and the echoed configuration
//! - `profile.csv`, `envelope.csv`: mean/std along `x2 = 0` and the Monte
//!   Carlo envelope, when the reference is Monte Carlo
//! - `sweep.csv`: error per level, when a sweep is configured

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::algebra::GalerkinTensor;
use crate::basis::HaarTypeBasis;
use crate::config::RunConfig;
use crate::error::Result;
use crate::models::{initial_data, ModelSystem};
use crate::output::{self, fmt_value};
use crate::reference::{
    collocation_reference, l1_distance, mean_std, monte_carlo_reference, mse, preset_setup, profile_x2_zero,
    McEnvelope, ReferenceField, ReferenceKind, Statistics,
};
use crate::solver::{advance, GpcField, Grid, SolverOptions, StepCallback, StepInfo};

/// Outcome of one basis level.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub level: Option<u32>,
    pub basis: String,
    pub modes: usize,
    pub dir: PathBuf,
    pub steps: usize,
    pub seconds: f64,
    pub min_admissibility: f64,
    /// Per component, when a field reference is available.
    pub mse: Option<Vec<f64>>,
    pub l1: Option<Vec<f64>>,
    pub final_field: GpcField,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub levels: Vec<LevelResult>,
    pub reference_seconds: f64,
    pub reference: Reference,
}

/// Reference built for a run.
#[derive(Debug, Clone)]
pub enum Reference {
    None,
    Field(ReferenceField),
    Envelope(McEnvelope),
}

pub fn solver_options(config: &RunConfig) -> SolverOptions<'static> {
    SolverOptions {
        cfl: config.cfl,
        cweno: config.cweno,
        threads: config.threads,
        source: None,
    }
}

/// Builds the configured reference on `grid` up to `config.t_final`.
pub fn build_reference(config: &RunConfig, grid: &Grid) -> Result<Reference> {
    let setup = preset_setup(config.preset);
    let options = solver_options(config);
    let r = match config.reference.kind {
        None => Reference::None,
        Some(ReferenceKind::ExactScalar) => {
            Reference::Field(ReferenceField::ExactScalar { t: config.t_final })
        }
        Some(ReferenceKind::Collocation) => {
            let edges = HaarTypeBasis::classical_haar(config.reference.xi_level)?.cell_edges();
            Reference::Field(collocation_reference(
                &setup,
                &edges,
                grid,
                config.reference.refine,
                config.t_final,
                options,
            )?)
        }
        Some(ReferenceKind::MonteCarlo) => Reference::Envelope(monte_carlo_reference(
            &setup,
            config.reference.samples,
            grid,
            config.t_final,
            config.seed,
            options,
        )?),
    };
    Ok(r)
}

/// Runs the configured experiment and writes its artifacts.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let grid = config.grid.build()?;
    let initial_only = config.t_final == 0.0;

    let start = Instant::now();
    let reference = if initial_only {
        Reference::None
    } else {
        build_reference(config, &grid)?
    };
    let reference_seconds = start.elapsed().as_secs_f64();
    if let Reference::Envelope(env) = &reference {
        output::write_text(&config.out_dir.join("envelope.csv"), &output::envelope_csv(env))?;
    }

    let levels: Vec<Option<u32>> = match config.sweep {
        Some((a, b)) => (a..=b).map(Some).collect(),
        None => vec![None],
    };
    let mut results = Vec::with_capacity(levels.len());
    for level in levels {
        let (basis, dir) = match level {
            Some(j) => (config.basis.at_level(j), config.out_dir.join(format!("J{j}"))),
            None => (config.basis, config.out_dir.clone()),
        };
        let basis = basis.build()?;
        let r = run_level(config, &grid, &basis, level, &dir, &reference, reference_seconds)?;
        results.push(r);
    }

    if config.sweep.is_some() {
        let mut s = String::from("level,basis,modes,mse,l1\n");
        let total = |v: &Option<Vec<f64>>| {
            v.as_ref()
                .map_or(String::from("nan"), |v| fmt_value(v.iter().sum()))
        };
        for r in &results {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.level.unwrap_or(0),
                r.basis,
                r.modes,
                total(&r.mse),
                total(&r.l1)
            );
        }
        output::write_text(&config.out_dir.join("sweep.csv"), &s)?;
    }

    Ok(ExperimentReport {
        levels: results,
        reference_seconds,
        reference,
    })
}

fn run_level(
    config: &RunConfig,
    grid: &Grid,
    basis: &HaarTypeBasis,
    level: Option<u32>,
    dir: &Path,
    reference: &Reference,
    reference_seconds: f64,
) -> Result<LevelResult> {
    let t = GalerkinTensor::new(basis)?;
    let model = ModelSystem::new(config.preset.model_spec(), &t)?;
    let mut field = initial_data(config.preset, &model, &t, grid)?;
    let mut snapshots = vec![field.clone()];

    let start = Instant::now();
    let stride = config.output_stride;
    let mut record = |info: &StepInfo, f: &GpcField| {
        if stride > 0 && info.step % stride == 0 && f.time < config.t_final {
            snapshots.push(f.clone());
        }
        Ok(())
    };
    let report = advance(
        &model,
        &t,
        &mut field,
        grid,
        config.t_final,
        solver_options(config),
        Some(&mut record as &mut StepCallback<'_>),
    )?;
    let seconds = start.elapsed().as_secs_f64();
    if field.time > 0.0 {
        snapshots.push(field.clone());
    }

    let stats: Vec<Statistics> = snapshots.iter().map(|f| mean_std(f, &t)).collect();
    let snap_refs: Vec<&GpcField> = snapshots.iter().collect();
    let stat_refs: Vec<(f64, &Statistics)> = snapshots.iter().map(|f| f.time).zip(stats.iter()).collect();
    output::write_field_csv(&dir.join("modes.csv"), grid, &snap_refs)?;
    output::write_stats_csv(&dir.join("stats.csv"), grid, &stat_refs)?;

    let (mut mse_v, mut l1_v) = (None, None);
    match reference {
        Reference::Field(r) => {
            let comps = 0..field.components;
            mse_v = Some(
                comps
                    .clone()
                    .map(|c| mse(&field, grid, &t, r, c))
                    .collect::<Result<Vec<_>>>()?,
            );
            l1_v = Some(
                comps
                    .map(|c| l1_distance(&field, grid, &t, r, c))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Reference::Envelope(_) => {
            let last = stats.last().expect("at least one snapshot");
            let nc = last.components;
            let x: Vec<f64> = (0..grid.nx).map(|i| grid.x_center(i)).collect();
            let along = |v: &[f64]| -> Vec<Vec<f64>> {
                (0..nc)
                    .map(|c| profile_x2_zero(grid, |i, j| v[(j * grid.nx + i) * nc + c]))
                    .collect()
            };
            let csv = output::profile_csv(&x, &along(&last.mean), &along(&last.std));
            output::write_text(&dir.join("profile.csv"), &csv)?;
        }
        Reference::None => {}
    }

    let label = basis.label();
    let mut m = String::from("[result]\n");
    let _ = writeln!(m, "basis = \"{label}\"");
    let _ = writeln!(m, "modes = {}", t.size());
    let _ = writeln!(m, "steps = {}", report.steps);
    let _ = writeln!(m, "final_time = {:?}", field.time);
    let _ = writeln!(m, "snapshots = {}", snapshots.len());
    let _ = writeln!(m, "min_admissibility = {:?}", report.min_admissibility);
    let _ = writeln!(m, "solve_seconds = {seconds:.3}");
    let _ = writeln!(m, "reference_seconds = {reference_seconds:.3}");
    let list = |v: &Vec<f64>| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
    if let Some(v) = &mse_v {
        let _ = writeln!(m, "mse = [{}]", list(v));
    }
    if let Some(v) = &l1_v {
        let _ = writeln!(m, "l1 = [{}]", list(v));
    }
    m.push('\n');
    m += &config.render();
    output::write_text(&dir.join("manifest.toml"), &m)?;

    Ok(LevelResult {
        level,
        basis: label,
        modes: t.size(),
        dir: dir.to_path_buf(),
        steps: report.steps,
        seconds,
        min_admissibility: report.min_admissibility,
        mse: mse_v,
        l1: l1_v,
        final_field: field,
    })
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use haarsg::config::{parse_config, parse_level_range, BasisChoice, RunConfig};
use haarsg::experiment::{build_reference, run_experiment, Reference};
use haarsg::models::{initial_data, ModelSystem};
use haarsg::output;
use haarsg::reference::{l1_distance, mean_std, mse, ReferenceField};
use haarsg::{Error, GalerkinTensor};

#[derive(Parser)]
#[command(
    name = "haarsg",
    version,
    about = "Stochastic Galerkin finite volume solver with Haar-type bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `run.out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Inclusive level range `J0..J1`.
    #[arg(long, value_name = "J0..J1")]
    level_sweep: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the Haar-type matrix and the triple-product matrices of a basis.
    Basis {
        #[command(flatten)]
        common: Common,
        /// haar, dct, canonical-haar or piecewise-linear (overrides the config).
        #[arg(long)]
        kind: Option<String>,
        /// Level, size or subdomain count, depending on the kind.
        #[arg(long)]
        param: Option<usize>,
    },
    /// Project initial data onto the basis and dump the modes.
    Project {
        #[command(flatten)]
        common: Common,
        /// Project a built-in function of xi instead of the preset data:
        /// xi, sign, abs, exp, sin.
        #[arg(long)]
        function: Option<String>,
    },
    /// Run the configured experiment.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Build the configured reference and dump it.
    Reference {
        #[command(flatten)]
        common: Common,
    },
    /// Compare a `modes.csv` field against the configured reference.
    Mse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: PathBuf,
    },
}

enum Failure {
    Config(String),
    Solver(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. } => Failure::Io(msg),
            Error::SolverAbort { .. }
            | Error::Stage { .. }
            | Error::Admissibility { .. }
            | Error::NonFinite { .. } => Failure::Solver(msg),
            _ => Failure::Config(msg),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn load(common: &Common) -> std::result::Result<RunConfig, Failure> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let mut c = parse_config(&text)?;
    if let Some(out) = &common.out {
        c.out_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        c.seed = seed;
    }
    if common.threads.is_some() {
        c.threads = common.threads;
    }
    if let Some(range) = &common.level_sweep {
        c.sweep = Some(
            parse_level_range(range)
                .ok_or_else(|| Failure::Config(format!("--level-sweep expects J0..J1, got `{range}`")))?,
        );
    }
    c.validate()?;
    Ok(c)
}

fn out_dir(common: &Common, config: Option<&RunConfig>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| config.map(|c| c.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn basis_cmd(common: &Common, kind: Option<String>, param: Option<usize>) -> CliResult {
    let config = common.config.as_ref().map(|_| load(common)).transpose()?;
    let mut choice = config
        .as_ref()
        .map_or(BasisChoice::ClassicalHaar { level: 2 }, |c| c.basis);
    if let Some(k) = kind.as_deref() {
        let p = param.ok_or_else(|| Failure::Config("--kind needs --param".into()))?;
        choice = match k {
            "haar" => BasisChoice::ClassicalHaar { level: p as u32 },
            "dct" => BasisChoice::Dct { size: p },
            "canonical-haar" => BasisChoice::CanonicalHaar { size: p },
            "piecewise-linear" => BasisChoice::PiecewiseLinear { subdomains: p },
            other => return Err(Failure::Config(format!("unknown basis kind `{other}`"))),
        };
    }
    let basis = choice.build()?;
    let t = GalerkinTensor::new(&basis)?;
    let dir = out_dir(common, config.as_ref());
    output::write_text(&dir.join("matrix.csv"), &output::matrix_csv(basis.matrix()))?;
    output::write_text(&dir.join("triple.csv"), &output::tensor_csv(t.triple()))?;
    let report = t.check_commuting();
    println!(
        "{}: {} modes, orthogonality residual {:.3e}, commutator {:.3e}",
        basis.label(),
        basis.size(),
        basis.orthogonality_residual(),
        report.worst
    );
    Ok(())
}

fn builtin_function(name: &str) -> Option<(fn(f64) -> f64, Vec<f64>)> {
    Some(match name {
        "xi" => (|x| x, vec![]),
        "sign" => (|x| if x < 0.5 { -1.0 } else { 1.0 }, vec![0.5]),
        "abs" => (|x: f64| (x - 0.5).abs(), vec![0.5]),
        "exp" => (f64::exp, vec![]),
        "sin" => (|x: f64| (2.0 * std::f64::consts::PI * x).sin(), vec![]),
        _ => return None,
    })
}

fn project_cmd(common: &Common, function: Option<String>) -> CliResult {
    let config = load(common)?;
    let t = GalerkinTensor::new(&config.basis.build()?)?;
    let dir = out_dir(common, Some(&config));
    if let Some(name) = function {
        let (f, bps) = builtin_function(&name)
            .ok_or_else(|| Failure::Config(format!("unknown function `{name}` (xi, sign, abs, exp, sin)")))?;
        let m = t.project(f, &bps)?;
        output::write_text(&dir.join("modes.csv"), &output::modes_csv(&m))?;
        return Ok(());
    }
    let grid = config.grid.build()?;
    let model = ModelSystem::new(config.preset.model_spec(), &t)?;
    let field = initial_data(config.preset, &model, &t, &grid)?;
    let st = mean_std(&field, &t);
    output::write_field_csv(&dir.join("modes.csv"), &grid, &[&field])?;
    output::write_stats_csv(&dir.join("stats.csv"), &grid, &[(0.0, &st)])?;
    Ok(())
}

fn run_cmd(common: &Common) -> CliResult {
    let config = load(common)?;
    let report = run_experiment(&config)?;
    for r in &report.levels {
        let err = match (&r.mse, &r.l1) {
            (Some(m), Some(l)) => format!(
                ", mse {:.6e}, l1 {:.6e}",
                m.iter().sum::<f64>(),
                l.iter().sum::<f64>()
            ),
            _ => String::new(),
        };
        println!("{}: {} steps in {:.2} s{err}", r.basis, r.steps, r.seconds);
    }
    if let Reference::Envelope(env) = &report.reference {
        println!(
            "monte carlo: {} samples, {} failed",
            env.samples.len(),
            env.failures
        );
    }
    println!("output in {}", config.out_dir.display());
    Ok(())
}

fn reference_cmd(common: &Common) -> CliResult {
    let config = load(common)?;
    let grid = config.grid.build()?;
    let comps = config.preset.model_spec().components();
    let dir = &config.out_dir;
    let xi_cells = 1usize << config.reference.xi_level;
    let mids: Vec<f64> = (0..xi_cells)
        .map(|k| (k as f64 + 0.5) / xi_cells as f64)
        .collect();
    match build_reference(&config, &grid)? {
        Reference::None => return Err(Failure::Config("reference.kind is none".into())),
        Reference::Field(r) => {
            let on = match &r {
                ReferenceField::Collocation { grid: fine, .. } => fine.clone(),
                _ => grid,
            };
            output::write_text(
                &dir.join("reference.csv"),
                &output::reference_csv(&r, &on, comps, &mids),
            )?;
        }
        Reference::Envelope(env) => {
            output::write_text(&dir.join("envelope.csv"), &output::envelope_csv(&env))?;
        }
    }
    println!("reference written to {}", dir.display());
    Ok(())
}

fn mse_cmd(common: &Common, field: &Path) -> CliResult {
    let config = load(common)?;
    let grid = config.grid.build()?;
    let text = fs::read_to_string(field).map_err(|e| Failure::Io(format!("{}: {e}", field.display())))?;
    let f = output::parse_field_csv(&text, &grid)?;
    let t = GalerkinTensor::new(&config.basis.build()?)?;
    if f.modes != t.size() {
        return Err(Failure::Config(format!(
            "field has {} modes, basis {} has {}",
            f.modes,
            t.basis().label(),
            t.size()
        )));
    }
    let config = RunConfig {
        t_final: f.time,
        ..config
    };
    let Reference::Field(r) = build_reference(&config, &grid)? else {
        return Err(Failure::Config(
            "mse needs an exact or collocation reference".into(),
        ));
    };
    println!("component,mse,l1");
    for c in 0..f.components {
        println!(
            "{c},{},{}",
            output::fmt_value(mse(&f, &grid, &t, &r, c)?),
            output::fmt_value(l1_distance(&f, &grid, &t, &r, c)?)
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Basis { common, kind, param } => basis_cmd(common, kind.clone(), *param),
        Command::Project { common, function } => project_cmd(common, function.clone()),
        Command::Run { common } => run_cmd(common),
        Command::Reference { common } => reference_cmd(common),
        Command::Mse { common, field } => mse_cmd(common, field),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("haarsg: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("haarsg: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("haarsg: {m}");
            ExitCode::from(4)
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use openqs::scenario::{find_preset, presets, Scenario};
use openqs::smat::{Resonance, SModel};
use openqs::spectral::eigenvalues;
use openqs::sweep::{line_shape_csv, run_ep_search, run_smatrix, run_sweep, SearchMode};
use openqs::{Error, Result};

#[derive(Parser)]
#[command(
    name = "openqs",
    version,
    about = "Non-Hermitian open quantum system sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Preset id (see `list-scenarios`).
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Scenario config document (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the number of sweep points.
    #[arg(long)]
    points: Option<usize>,
}

impl Source {
    fn load(&self) -> Result<Scenario> {
        let s = match (&self.scenario, &self.config) {
            (Some(id), None) => find_preset(id)?,
            (None, Some(path)) => Scenario::from_json(&fs::read_to_string(path)?)?,
            _ => {
                return Err(Error::Validation(
                    "give exactly one of --scenario or --config".into(),
                ))
            }
        };
        let s = match self.points {
            Some(p) => s.with_points(p),
            None => s,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "scan-1d")]
    Scan1d,
    #[value(name = "refine-2d")]
    Refine2d,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Single,
    Pair,
    DoublePole,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write one CSV table.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Output directory; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate exceptional points and write a JSON report.
    EpFind {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "scan-1d")]
        mode: Mode,
        /// Gap tolerance (scan1d) or |D| tolerance (refine2d).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate an S-matrix line shape.
    Smatrix {
        /// S-matrix model document (JSON, tagged by "form").
        #[arg(long, conflicts_with_all = ["form", "scenario"])]
        config: Option<PathBuf>,
        /// Take the two resonances from a two-level scenario's eigenvalues.
        #[arg(long, requires = "at", conflicts_with = "form")]
        scenario: Option<String>,
        /// Sweep parameter value used with --scenario.
        #[arg(long)]
        at: Option<f64>,
        #[arg(long, value_enum)]
        form: Option<Form>,
        #[arg(long, allow_hyphen_values = true)]
        e1: Option<f64>,
        #[arg(long)]
        g1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        e2: Option<f64>,
        #[arg(long)]
        g2: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        emin: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        emax: f64,
        #[arg(long, default_value_t = openqs::scenario::DEFAULT_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the preset catalog as JSON.
    ListScenarios {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, name: &str, body: &str) -> Result<()> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), body)?;
            Ok(())
        }
    }
}

fn need(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Validation(format!("--{flag} is required for this form")))
}

fn smatrix_model(
    config: Option<&Path>,
    scenario: Option<&str>,
    at: Option<f64>,
    form: Option<Form>,
    (e1, g1, e2, g2): (Option<f64>, Option<f64>, Option<f64>, Option<f64>),
) -> Result<SModel> {
    if let Some(path) = config {
        return Ok(serde_json::from_str(&fs::read_to_string(path)?)?);
    }
    if let Some(id) = scenario {
        let s = find_preset(id)?;
        let lambdas = eigenvalues(&s.matrix_at(need(at, "at")?)?)?;
        if lambdas.len() != 2 {
            return Err(Error::Validation(
                "--scenario needs a two-level scenario".into(),
            ));
        }
        // eigenvalue widths are negative for decay; the S-matrix wants them positive
        return Ok(SModel::Pair {
            r1: Resonance::from_eigenvalue(lambdas[0])?,
            r2: Resonance::from_eigenvalue(lambdas[1])?,
        });
    }
    let r1 = || Resonance::new(need(e1, "e1")?, need(g1, "g1")?);
    match form {
        Some(Form::Single) => Ok(SModel::Single { r1: r1()? }),
        Some(Form::Pair) => Ok(SModel::Pair {
            r1: r1()?,
            r2: Resonance::new(need(e2, "e2")?, need(g2, "g2")?)?,
        }),
        Some(Form::DoublePole) => {
            let r = r1()?;
            Ok(SModel::DoublePole {
                ed: r.energy,
                gamma_d: r.width,
            })
        }
        None => Err(Error::Validation(
            "give --config, --scenario with --at, or --form".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep { source, out } => {
            let s = source.load()?;
            let table = run_sweep(&s)?;
            emit(
                out.as_deref(),
                &format!("{}.csv", table.scenario_id),
                &table.to_csv(),
            )
        }
        Command::EpFind {
            source,
            mode,
            tol,
            out,
        } => {
            let s = source.load()?;
            let mode = match mode {
                Mode::Scan1d => SearchMode::Scan1d,
                Mode::Refine2d => SearchMode::Refine2d,
            };
            let report = run_ep_search(&s, mode, tol)?;
            let mut body = report.to_json();
            body.push('\n');
            emit(
                out.as_deref(),
                &format!("{}-ep.json", report.scenario),
                &body,
            )?;
            let failed = report.entries.iter().filter(|e| e.error.is_some()).count();
            if failed > 0 && failed == report.entries.len() {
                return Err(Error::Solver {
                    message: format!("all {failed} refinements failed"),
                    residual: f64::NAN,
                });
            }
            Ok(())
        }
        Command::Smatrix {
            config,
            scenario,
            at,
            form,
            e1,
            g1,
            e2,
            g2,
            emin,
            emax,
            points,
            out,
        } => {
            let model = smatrix_model(
                config.as_deref(),
                scenario.as_deref(),
                at,
                form,
                (e1, g1, e2, g2),
            )?;
            let shape = run_smatrix(&model, emin, emax, points)?;
            emit(out.as_deref(), "smatrix.csv", &line_shape_csv(&shape))
        }
        Command::ListScenarios { out } => {
            let mut body = serde_json::to_string_pretty(&presets())?;
            body.push('\n');
            emit(out.as_deref(), "scenarios.json", &body)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_solver_failure() => 3,
                Error::Io(_) => 1,
                _ => 2,
            })
        }
    }
}

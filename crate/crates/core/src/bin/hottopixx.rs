use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hottopixx::bench::{
    format_thresholds, params_csv, params_table, run_benchmark, summarize_thresholds, write_records, Algorithm,
    BenchOptions, Scale,
};
use hottopixx::instance::{DatasetSpec, SyntheticInstance};
use hottopixx::linalg::read_matrix;
use hottopixx::models::{solve_model_p, verify_certificate, Backend, Certificate, ModelOptions};
use hottopixx::postprocess::{analyze_anchor_structure, hybrid_postprocessing, refined_hottopixx_postprocessed};
use hottopixx::select::{hottopixx_original, model_r_selection, refined_hottopixx, SelectOptions, SelectionResult};
use hottopixx::spa::spa;
use hottopixx::Error;

#[derive(Parser)]
#[command(name = "hottopixx", version, about = "Separable NMF with refined Hottopixx and friends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// simplex, first-order or auto
    #[arg(long, default_value = "auto")]
    backend: Backend,
    /// desk, trend or full
    #[arg(long, default_value = "desk")]
    scale: Scale,
    /// Override the preset's number of W/H draws.
    #[arg(long)]
    draws: Option<usize>,
}

impl Common {
    fn spec(&self, id: u8) -> hottopixx::Result<DatasetSpec> {
        let mut spec = self.scale.spec(id, self.seed)?;
        if let Some(d) = self.draws {
            spec.trials = d;
            spec.validate()?;
        }
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate one synthetic instance bundle.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        dataset: u8,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Position in the noise grid.
        #[arg(long, default_value_t = 0)]
        delta_index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select r columns from an instance bundle or a matrix file.
    Solve {
        #[arg(long, default_value = "auto")]
        backend: Backend,
        /// Instance bundle directory written by `gen`.
        #[arg(long, conflicts_with = "matrix")]
        instance: Option<PathBuf>,
        /// Bare matrix file; needs --rank (and --eps for Q and R).
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::Hybrid)]
        algo: Method,
        /// Write the LP certificate here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the recovery benchmark and write one CSV row per run.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated dataset ids.
        #[arg(long, default_value = "1,2,3,4", value_delimiter = ',')]
        datasets: Vec<u8>,
        /// Comma-separated algorithm names, or `all`.
        #[arg(long, default_value = "all")]
        algos: String,
        #[arg(long)]
        workers: Option<usize>,
        /// Fill the runtime column (makes output differ between runs).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Average conditioning parameters per dataset.
    Params {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1,2,3,4", value_delimiter = ',')]
        datasets: Vec<u8>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noise thresholds for 100% and 80% mean recovery from a bench CSV.
    Thresholds {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the bounds of a model-P solve and the anchor structure.
    Diagnose {
        #[arg(long, default_value = "auto")]
        backend: Backend,
        #[arg(long)]
        instance: PathBuf,
        /// Anchor radius; defaults to 17(r+1)eps/kappa + kappa/70.
        #[arg(long)]
        mu: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Hybrid,
    Post,
    Plain,
    Q,
    R,
    Spa,
}

enum Outcome {
    Done,
    Partial(String),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> hottopixx::Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> hottopixx::Result<Outcome> {
    match cli.command {
        Command::Gen { common, dataset, trial, delta_index, out } => {
            let spec = common.spec(dataset)?;
            let inst = spec.instance(trial, delta_index)?;
            inst.write_bundle(&out)?;
            print!("{}", inst.manifest());
            Ok(Outcome::Done)
        }
        Command::Solve { backend, instance, matrix, rank, eps, algo, out } => {
            let (a, r, eps, truth) = match (instance, matrix) {
                (Some(dir), _) => {
                    let inst = SyntheticInstance::read_bundle(&dir)?;
                    let (r, e) = (rank.unwrap_or(inst.r()), eps.unwrap_or(inst.epsilon));
                    (inst.a.clone(), r, e, Some(inst))
                }
                (None, Some(path)) => {
                    let r = rank.ok_or_else(|| Error::BadParameter("--matrix needs --rank".into()))?;
                    (read_matrix(&path)?, r, eps.unwrap_or(0.0), None)
                }
                (None, None) => return Err(Error::BadParameter("give --instance or --matrix".into())),
            };
            let sel = SelectOptions { normalize: truth.is_none(), ..SelectOptions::with_model(ModelOptions::with_backend(backend)) };
            let (j, cert) = match algo {
                Method::Spa => {
                    let mut j = spa(&a, r)?;
                    j.sort_unstable();
                    (j, None)
                }
                _ => {
                    let res: SelectionResult = match algo {
                        Method::Hybrid => hybrid_postprocessing(&a, r, &sel)?,
                        Method::Post => refined_hottopixx_postprocessed(&a, r, &sel)?,
                        Method::Plain => refined_hottopixx(&a, r, &sel)?,
                        Method::Q => hottopixx_original(&a, r, eps, &sel)?,
                        _ => model_r_selection(&a, eps, &sel)?,
                    };
                    (res.j, Some(res.certificate))
                }
            };
            println!("J {}", j.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(" "));
            if let Some(c) = &cert {
                println!("theta {:.6e}  status {}  iterations {}", c.theta, c.diagnostics.status, c.diagnostics.iterations);
            }
            if let Some(inst) = &truth {
                println!("recovery {}", hottopixx::bench::recovery_rate(&j, &inst.basis, inst.r()));
            }
            if let (Some(c), Some(path)) = (&cert, &out) {
                c.write(path)?;
            }
            Ok(Outcome::Done)
        }
        Command::Bench { common, datasets, algos, workers, timing, out } => {
            let algos = Algorithm::parse_list(&algos)?;
            let mut opts = BenchOptions { backend: common.scale.backend(common.backend), timing, ..BenchOptions::default() };
            if let Some(w) = workers {
                opts.workers = w;
            }
            let mut records = Vec::new();
            for id in datasets {
                let spec = common.spec(id)?;
                eprintln!("dataset {id}: {} draws x {} noise levels", spec.trials, spec.deltas.len());
                records.extend(run_benchmark(&spec, &algos, &opts)?);
            }
            write_records(&out, &records)?;
            let failed = records.iter().filter(|r| r.status.is_failure()).count();
            Ok(if failed > 0 {
                Outcome::Partial(format!("{failed} of {} runs failed; see the status column", records.len()))
            } else {
                Outcome::Done
            })
        }
        Command::Params { common, datasets, out } => {
            let rows = datasets
                .into_iter()
                .map(|id| params_table(&common.spec(id)?))
                .collect::<hottopixx::Result<Vec<_>>>()?;
            emit(&params_csv(&rows)?, out.as_deref())?;
            Ok(Outcome::Done)
        }
        Command::Thresholds { csv, out } => {
            emit(&format_thresholds(&summarize_thresholds(&csv)?), out.as_deref())?;
            Ok(Outcome::Done)
        }
        Command::Diagnose { backend, instance, mu } => {
            let inst = SyntheticInstance::read_bundle(&instance)?;
            let cert: Certificate = solve_model_p(&inst.a, inst.r(), &ModelOptions::with_backend(backend))?;
            let bounds = verify_certificate(inst.truth(), &cert)?;
            println!("{bounds}");
            let mu = mu.unwrap_or(17.0 * (inst.r() + 1) as f64 * inst.epsilon / inst.kappa + inst.kappa / 70.0);
            let anchors = analyze_anchor_structure(&inst, &cert, mu)?;
            println!("{anchors}");
            Ok(if bounds.all_passed() && anchors.all_passed() {
                Outcome::Done
            } else {
                Outcome::Partial("some checks failed".into())
            })
        }
    }
}

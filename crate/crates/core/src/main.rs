use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wco::assembly::{assemble_direct, assemble_regular, assemble_trajectory};
use wco::corpus::{self, CorpusSpec, Freeness, GroupDescriptor};
use wco::norm::{self, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS, DEFAULT_TOL};
use wco::par::Execution;
use wco::scenario::{self, Scenario, Tolerances};
use wco::Exponent;

#[derive(Parser)]
#[command(name = "wco", version, about = "Norms of weighted composition operator algebras on finite measure spaces")]
struct Cli {
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in scenario files (directories are scanned for .toml/.json).
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        tol_exact: Option<f64>,
        #[arg(long)]
        tol_svd: Option<f64>,
        #[arg(long)]
        tol_power: Option<f64>,
    },
    /// Operator norm of the scenario's element at one exponent.
    Norm {
        file: PathBuf,
        #[arg(long)]
        p: Exponent,
        #[arg(long, value_enum, default_value_t = NormMethod::Auto)]
        method: NormMethod,
        #[arg(long, value_enum, default_value_t = Repr::Direct)]
        repr: Repr,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Freeness verdict for the scenario's action.
    Freeness { file: PathBuf },
    /// Dump the assembled matrix as column-major [re, im] pairs.
    Dump {
        file: PathBuf,
        #[arg(long)]
        p: Exponent,
        #[arg(long, value_enum, default_value_t = Repr::Direct)]
        repr: Repr,
        /// Atom for the trajectory representation.
        #[arg(long, default_value_t = 0)]
        atom: usize,
    },
    /// Write a generated scenario corpus into a directory.
    Corpus {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',')]
        groups: Option<Vec<GroupDescriptor>>,
        #[arg(long, value_enum, default_value_t = FreenessArg::Mixed)]
        freeness: FreenessArg,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 12)]
        draws: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = corpus::MAX_ATOMS)]
        max_atoms: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormMethod {
    Auto,
    Exact,
    Svd,
    Power,
    Brute,
    Formula,
}

#[derive(Clone, Copy, ValueEnum)]
enum Repr {
    Direct,
    Regular,
    Trajectory,
}

#[derive(Clone, Copy, ValueEnum)]
enum FreenessArg {
    FreeOnly,
    NonFreeOnly,
    Mixed,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(e: impl ToString) -> Failure {
    Failure { code: 2, message: e.to_string() }
}

fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| usage(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| matches!(f.extension().and_then(|e| e.to_str()), Some("toml" | "json")))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    scenario::load_scenario(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(usage)?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Check { paths, tol_exact, tol_svd, tol_power } => {
            let scenarios = collect_files(&paths)?
                .iter()
                .map(|p| load(p))
                .collect::<Result<Vec<_>, _>>()?;
            let overrides = Tolerances { exact: tol_exact, svd: tol_svd, power: tol_power };
            let report = scenario::run_suite(&scenarios, &overrides, exec);
            print_json(&report)?;
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Norm { file, p, method, repr, restarts, samples } => {
            let s = load(&file)?;
            let b = &s.element;
            let result = match method {
                NormMethod::Formula if p.is_infinite() => norm::formula_norm_linf(b),
                NormMethod::Formula if p.is(1.0) => norm::formula_norm_l1(b),
                NormMethod::Formula => return Err(usage("the formula method needs --p 1 or --p inf")),
                _ => {
                    let op = match repr {
                        Repr::Direct => assemble_direct(b, p),
                        Repr::Regular => assemble_regular(b, p),
                        Repr::Trajectory => assemble_trajectory(b, 0, p),
                    }
                    .map_err(usage)?;
                    match method {
                        NormMethod::Exact => norm::norm_exact(&op),
                        NormMethod::Svd if p.is(2.0) => Ok(norm::ladder_norm(&op)),
                        NormMethod::Svd => return Err(usage("the svd method needs --p 2")),
                        NormMethod::Power => norm::norm_p_with(&op, restarts, DEFAULT_TOL, DEFAULT_MAX_ITERS, exec)
                            .or_else(|e| e.into_best()),
                        NormMethod::Brute => norm::norm_brute_force(&op, samples, s.seed),
                        _ => Ok(norm::ladder_norm(&op)),
                    }
                }
            }
            .map_err(|e| Failure { code: 1, message: e.to_string() })?;
            print_json(&json!({ "scenario_id": s.id, "p": p, "result": result }))?;
            Ok(0)
        }
        Command::Freeness { file } => {
            let s = load(&file)?;
            let fast = s.action.check_metrically_free();
            let direct = s
                .action
                .check_metrically_free_direct(corpus::MAX_ATOMS.max(s.action.space().len()).min(20))
                .ok();
            print_json(&json!({
                "scenario_id": s.id,
                "free": fast.free,
                "witness": fast.witness,
                "direct": direct,
            }))?;
            Ok(0)
        }
        Command::Dump { file, p, repr, atom } => {
            let s = load(&file)?;
            let op = match repr {
                Repr::Direct => assemble_direct(&s.element, p),
                Repr::Regular => assemble_regular(&s.element, p),
                Repr::Trajectory => assemble_trajectory(&s.element, atom, p),
            }
            .map_err(usage)?;
            let (rows, cols) = op.dims();
            print_json(&json!({
                "scenario_id": s.id,
                "p": p,
                "provenance": op.provenance(),
                "rows": rows,
                "cols": cols,
                "data": op.dump(),
            }))?;
            Ok(0)
        }
        Command::Corpus { dir, groups, freeness, dims, draws, seed, max_atoms } => {
            let spec = CorpusSpec {
                max_atoms,
                groups: groups.unwrap_or_else(GroupDescriptor::all),
                freeness: match freeness {
                    FreenessArg::FreeOnly => Freeness::FreeOnly,
                    FreenessArg::NonFreeOnly => Freeness::NonFreeOnly,
                    FreenessArg::Mixed => Freeness::Mixed,
                },
                dims,
                draws,
                seed,
            };
            let scenarios = corpus::generate(&spec).map_err(usage)?;
            let paths = corpus::write_scenarios(&dir, &scenarios).map_err(usage)?;
            eprintln!("wrote {} scenarios to {}", paths.len(), dir.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

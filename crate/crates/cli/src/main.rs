use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaussflow::gaussian_eot::sinkhorn_divergence;
use gaussflow::oracle::{discretize_gaussian, sinkhorn_divergence_discrete, DEFAULT_RADIUS_SIGMAS};
use gaussflow::{Epsilon, Gaussian, SymMat};
use gaussflow_cli::{builtin, emit, run_scenario, CliError, Format, ScenarioConfig, BUILTIN_NAMES};

#[derive(Parser)]
#[command(name = "gaussflow", version, about = "Sinkhorn-divergence gradient flows between Gaussians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a built-in figure scenario (all members of a sweep).
    Builtin {
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Print the member configs as TOML instead of running them.
        #[arg(long)]
        print_config: bool,
    },
    /// List built-in scenario names.
    List,
    /// Compare the closed-form divergence of N(0,1) and N(1,2) with a grid Sinkhorn solve.
    OracleCheck {
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 400)]
        nodes: usize,
    },
}

fn run_and_emit(cfg: &ScenarioConfig, out: &Path, format: Format) -> Result<(), CliError> {
    let record = run_scenario(cfg)?;
    for path in emit(&record, format, out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn oracle_check(eps: f64, nodes: usize) -> Result<(), CliError> {
    let cfg = |path: &str, e: gaussflow::Error| CliError::Config {
        path: path.into(),
        message: e.to_string(),
    };
    let e = Epsilon::new(eps).map_err(|err| cfg("--eps", err))?;
    let mu = Gaussian::new(vec![0.0], SymMat::from_diag(&[1.0]))?;
    let nu = Gaussian::new(vec![1.0], SymMat::from_diag(&[2.0]))?;
    let closed = sinkhorn_divergence(&mu, &nu, e)?;
    let a = discretize_gaussian(&mu, nodes, DEFAULT_RADIUS_SIGMAS).map_err(|err| cfg("--nodes", err))?;
    let b = discretize_gaussian(&nu, nodes, DEFAULT_RADIUS_SIGMAS).map_err(|err| cfg("--nodes", err))?;
    let grid = sinkhorn_divergence_discrete(&a, &b, e, 100_000, 1e-12)?;
    println!("eps          {eps}");
    println!("nodes        {nodes}");
    println!("closed_form  {closed:.16e}");
    println!("oracle       {grid:.16e}");
    println!("rel_error    {:.3e}", ((closed - grid) / closed).abs());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, format } => run_and_emit(&ScenarioConfig::load(&config)?, &out, format),
        Command::Builtin {
            name,
            out,
            format,
            print_config,
        } => {
            let members = builtin(&name);
            if members.is_empty() {
                return Err(CliError::Config {
                    path: "name".into(),
                    message: format!("unknown builtin {name:?}; try `gaussflow list`"),
                });
            }
            for cfg in &members {
                if print_config {
                    println!("# {}\n{}", cfg.id(), cfg.to_toml_string());
                } else {
                    run_and_emit(cfg, &out, format)?;
                }
            }
            Ok(())
        }
        Command::List => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            Ok(())
        }
        Command::OracleCheck { eps, nodes } => oracle_check(eps, nodes),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

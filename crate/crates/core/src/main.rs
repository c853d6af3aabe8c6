use biot_hdiv::harness::config::{CaseConfig, RunKind, SolverKind};
use biot_hdiv::harness::runs;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biot-hdiv", about = "Divergence-conforming solver for the elasticity/poroelasticity interface problem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the key = value configuration file.
    config: String,
    /// Override the output directory.
    #[arg(long)]
    output_dir: Option<String>,
    /// Write legacy ASCII VTK files.
    #[arg(long)]
    vtk: bool,
    /// Dump the assembled system in Matrix Market format.
    #[arg(long)]
    dump_matrix: bool,
    /// Disable Laplacian smoothing after refinement.
    #[arg(long)]
    no_smoothing: bool,
    /// Disable the shear-modulus rescaling of the system.
    #[arg(long)]
    no_scaling: bool,
    /// Linear solver.
    #[arg(long, value_parser = ["direct", "pminres"])]
    solver: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble and solve a single case.
    Solve(Common),
    /// Uniform-refinement convergence study with error table output.
    Convergence(Common),
    /// Adaptive solve-estimate-mark-refine-smooth loop.
    Adapt(Common),
    /// Preconditioned MINRES robustness sweep on the stripe geometry.
    Precond(Common),
}

fn apply(common: &Common, kind: RunKind) -> biot_hdiv::Result<CaseConfig> {
    let mut config = CaseConfig::load(&common.config)?;
    config.kind = kind;
    if let Some(dir) = &common.output_dir {
        config.output_dir = Some(dir.clone());
    }
    if common.vtk {
        config.vtk = true;
    }
    if common.dump_matrix {
        config.dump_matrix = true;
    }
    if common.no_smoothing {
        config.smoothing = false;
    }
    if common.no_scaling {
        config.scaling = false;
    }
    if let Some(solver) = &common.solver {
        config.solver = match solver.as_str() {
            "pminres" => SolverKind::Pminres,
            _ => SolverKind::Direct,
        };
    }
    Ok(config)
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(c) => apply(c, RunKind::Solve).and_then(|cfg| runs::run(&cfg)),
        Command::Convergence(c) => apply(c, RunKind::Convergence).and_then(|cfg| runs::run(&cfg)),
        Command::Adapt(c) => apply(c, RunKind::Adapt).and_then(|cfg| runs::run(&cfg)),
        Command::Precond(c) => apply(c, RunKind::Precond).and_then(|cfg| runs::run(&cfg)),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

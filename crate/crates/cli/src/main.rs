use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use relsynth::games::StopReason;
use relsynth::interface::{self, Interface};
use relsynth_cli::artifacts::{prepare_dir, run_length_dump, write_slices};
use relsynth_cli::config::RunConfig;
use relsynth_cli::run::{
    all_dimensions, build_abstraction, build_spec, build_system, load_abstraction, run_solver,
    write_abstraction,
};
use relsynth_cli::{experiments, CliError, EXIT_RESOURCE_CAP};

/// Symbolic controller synthesis with relational interfaces.
#[derive(Parser)]
#[command(name = "relsynth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one interface file per dynamics component.
    Abstract(Common),
    /// Solve the configured game and write the winning region, controller,
    /// trace and slices.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Directory with previously built component files; when absent the
        /// abstraction is built first.
        #[arg(long)]
        abstraction: Option<PathBuf>,
    },
    /// Run basin_vs_samples, decomp_vs_mono or greedy_cap.
    Experiment {
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    coarsen_threshold: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<(RunConfig, PathBuf), CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.max_iters {
            cfg.solver.max_iters = m;
        }
        if let Some(t) = self.coarsen_threshold {
            cfg.solver.coarsen_threshold = Some(t);
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        cfg.out = Some(out.clone());
        Ok((cfg, out))
    }
}

fn write_summary(dir: &Path, lines: &[(String, String)]) -> Result<(), CliError> {
    let text: String = lines.iter().map(|(k, v)| format!("{k} {v}\n")).collect();
    fs::write(dir.join("summary.txt"), text)?;
    Ok(())
}

fn cmd_abstract(common: &Common) -> Result<i32, CliError> {
    let (cfg, out) = common.resolve()?;
    let (mut mgr, sys) = build_system(&cfg)?;
    prepare_dir(&out, &cfg, "abstract")?;
    let built = build_abstraction(&mut mgr, &sys, &cfg)?;
    write_abstraction(&out, &mgr, &sys, &cfg, &built)?;
    for (c, f) in sys.components.iter().zip(&built.components) {
        if mgr.is_false(f.pred()) {
            eprintln!(
                "warning: {} blocks every input (no samples landed inside the domain)",
                c.name
            );
        }
        println!("{} nodes={}", c.name, mgr.node_count(f.pred()));
    }
    println!(
        "abstraction written to {} in {:.3}s",
        out.display(),
        built.seconds
    );
    Ok(0)
}

fn save_iface(
    path: &Path,
    mgr: &relsynth::bdd::Manager,
    f: &Interface,
    dims: &[relsynth::spaces::Dimension],
    meta: &[(String, String)],
) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    interface::save(mgr, f, dims, meta, &mut w)?;
    Ok(())
}

fn cmd_solve(common: &Common, abstraction: Option<&Path>) -> Result<i32, CliError> {
    let (cfg, out) = common.resolve()?;
    let (mut mgr, sys) = build_system(&cfg)?;
    prepare_dir(&out, &cfg, "solve")?;
    let comps = match abstraction {
        Some(dir) => load_abstraction(dir, &mut mgr, &sys)?,
        None => {
            let built = build_abstraction(&mut mgr, &sys, &cfg)?;
            let dir = out.join("abstraction");
            fs::create_dir_all(&dir)?;
            write_abstraction(&dir, &mgr, &sys, &cfg, &built)?;
            built.components
        }
    };
    let spec = build_spec(&mut mgr, &sys, &comps, &cfg)?;
    let t = Instant::now();
    let sol = run_solver(&mut mgr, &spec, &cfg)?;
    let seconds = t.elapsed().as_secs_f64();

    fs::write(out.join("trace.csv"), sol.trace.to_csv())?;
    let dims = all_dimensions(&sys);
    let meta = vec![
        ("stop".to_string(), sol.stop.as_str().to_string()),
        ("precision".to_string(), format!("{:?}", sol.precision)),
        (
            "tool_version".to_string(),
            relsynth_cli::VERSION.to_string(),
        ),
    ];
    let x = sys.layout.x_vars();
    let winning = Interface::new(&mgr, x.clone(), Default::default(), sol.winning)?;
    save_iface(&out.join("winning.iface"), &mgr, &winning, &dims, &meta)?;
    let xu = x.union(&sys.layout.u_vars());
    let controller = Interface::new(&mgr, xu, Default::default(), sol.controller)?;
    save_iface(
        &out.join("controller.iface"),
        &mgr,
        &controller,
        &dims,
        &meta,
    )?;
    fs::write(
        out.join("winning.rle"),
        run_length_dump(&mgr, &sys.layout, sol.winning),
    )?;
    let slices = if cfg.output.slices {
        write_slices(&out, &mgr, &sys.layout, sol.winning)?
    } else {
        0
    };

    let target = sys.layout.state_count(&mgr, spec.objective.set());
    let basin = sys.layout.state_count(&mgr, sol.winning);
    write_summary(
        &out,
        &[
            ("stop".into(), sol.stop.as_str().into()),
            ("iterations".into(), sol.trace.rows.len().to_string()),
            ("objective_states".into(), target.to_string()),
            ("basin_states".into(), basin.to_string()),
            (
                "winning_nodes".into(),
                mgr.node_count(sol.winning).to_string(),
            ),
            ("slices".into(), slices.to_string()),
        ],
    )?;
    println!(
        "{}: {} iterations, basin {} states (objective {}), {:.3}s",
        sol.stop.as_str(),
        sol.trace.rows.len(),
        basin,
        target,
        seconds
    );
    Ok(if sol.stop == StopReason::ResourceCap {
        EXIT_RESOURCE_CAP
    } else {
        0
    })
}

fn cmd_experiment(name: &str, common: &Common) -> Result<i32, CliError> {
    if !experiments::NAMES.contains(&name) {
        return Err(CliError::UnknownExperiment(name.to_string()));
    }
    let (cfg, out) = common.resolve()?;
    prepare_dir(&out, &cfg, &format!("experiment {name}"))?;
    let report = experiments::run(name, &cfg)?;
    fs::write(out.join(format!("{name}.csv")), &report.csv)?;
    write_summary(&out, &report.summary)?;
    print!("{}", report.csv);
    for (k, v) in &report.summary {
        println!("{k} {v}");
    }
    Ok(if report.capped { EXIT_RESOURCE_CAP } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Abstract(c) => cmd_abstract(c),
        Command::Solve {
            common,
            abstraction,
        } => cmd_solve(common, abstraction.as_deref()),
        Command::Experiment { name, common } => cmd_experiment(name, common),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

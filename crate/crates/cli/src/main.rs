use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mscr::datasets::TaskName;
use mscr::harness::{
    load_artifact, run_experiment_with, topology_dot, write_outputs, write_summary, ExperimentConfig, GaBudget,
    ModelKind, PsoBudget, RunReport,
};
use mscr::Exec;

#[derive(Parser)]
#[command(name = "mscr", version, about = "Cycle reservoir benchmark harness")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Monthly smoothed sunspot CSV used by the MSTSN task.
    #[arg(long, global = true, value_name = "PATH")]
    mstsn: Option<PathBuf>,
    /// Output directory (overrides the config file).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Base seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trial count (overrides the config file; ignored with pi signs).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Evaluate swarms and populations on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a TOML config file.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Run the desk-scale model/task suite.
    Bench {
        /// Every model on every task (MSTSN only when --mstsn is given).
        #[arg(long)]
        all: bool,
        /// Restrict to these models (SCR, DeepSCR, GroupedSCR, MSCR_GA, MSCR_PSO).
        #[arg(long = "model", value_name = "NAME")]
        models: Vec<String>,
        /// Restrict to these tasks (MG17, NARMA10, MSTSN).
        #[arg(long = "task", value_name = "NAME")]
        tasks: Vec<String>,
        /// Swarm size and iteration count (population and generations for GA).
        #[arg(long, default_value_t = 30)]
        budget: usize,
    },
    /// Write the topology of a saved model artifact as a DOT digraph.
    ExportDot {
        #[arg(long, value_name = "PATH")]
        artifact: PathBuf,
    },
}

impl Global {
    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(p) = &self.mstsn {
            cfg.task.mstsn_path = Some(p.clone());
        }
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = Some(t);
        }
    }
}

fn parse_model(name: &str) -> Result<ModelKind> {
    match ModelKind::ALL.iter().find(|m| m.as_str().eq_ignore_ascii_case(name)) {
        Some(&m) => Ok(m),
        None => bail!("unknown model {name:?}"),
    }
}

fn parse_task(name: &str) -> Result<TaskName> {
    match [TaskName::MG17, TaskName::NARMA10, TaskName::MSTSN].into_iter().find(|t| t.to_string().eq_ignore_ascii_case(name)) {
        Some(t) => Ok(t),
        None => bail!("unknown task {name:?}"),
    }
}

fn report_line(r: &RunReport) -> String {
    format!(
        "{} {} {:?}: test RMSE {:.4e} ± {:.2e} over {} trials ({} divergent), rank {}, {:.1}s",
        r.config.model,
        r.config.task.name,
        r.config.sign_mode,
        r.mean_rmse,
        r.std_rmse,
        r.trials.len(),
        r.divergent.len(),
        r.rank(),
        r.elapsed.as_secs_f64()
    )
}

fn run(global: &Global, config: &Path) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", config.display()))?;
    global.apply(&mut cfg);
    cfg.validate()?;
    let report = run_experiment_with(&cfg, global.exec())?;
    println!("{}", report_line(&report));
    for d in &report.divergent {
        eprintln!("trial {} diverged: {}", d.trial, d.reason);
    }
    if let Some(dir) = &cfg.output_dir {
        write_outputs(&report, dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn bench(global: &Global, all: bool, models: &[String], tasks: &[String], budget: usize) -> Result<()> {
    if !all && models.is_empty() && tasks.is_empty() {
        bail!("nothing selected; pass --all or at least one --model/--task");
    }
    if budget == 0 {
        bail!("budget must be at least 1");
    }
    let models = if models.is_empty() {
        ModelKind::ALL.to_vec()
    } else {
        models.iter().map(|m| parse_model(m)).collect::<Result<_>>()?
    };
    let tasks = if tasks.is_empty() {
        let mut t = vec![TaskName::NARMA10, TaskName::MG17];
        if global.mstsn.is_some() {
            t.push(TaskName::MSTSN);
        }
        t
    } else {
        tasks.iter().map(|t| parse_task(t)).collect::<Result<_>>()?
    };
    let out = global.out.clone().unwrap_or_else(|| PathBuf::from("bench_out"));
    let mut reports = Vec::new();
    for &task in &tasks {
        for &model in &models {
            let mut cfg = ExperimentConfig::new(model, task);
            if model != ModelKind::Scr {
                cfg.pso = PsoBudget { particles: Some(budget), iterations: Some(budget) };
                cfg.ga = GaBudget { population: Some(budget), generations: Some(budget) };
            }
            global.apply(&mut cfg);
            let dir = out.join(task.to_string()).join(model.as_str());
            cfg.output_dir = Some(dir.clone());
            cfg.validate()?;
            let report = run_experiment_with(&cfg, global.exec()).with_context(|| format!("{model} on {task}"))?;
            println!("{}", report_line(&report));
            write_outputs(&report, &dir)?;
            reports.push(report);
        }
    }
    let summary = out.join("summary.tsv");
    write_summary(&reports.iter().collect::<Vec<_>>(), &summary)?;
    println!("wrote {}", summary.display());
    Ok(())
}

fn export_dot(global: &Global, artifact: &Path) -> Result<()> {
    let art = load_artifact(artifact)?;
    let dot = topology_dot(&art.genotype, &art.topology());
    match &global.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("topology.dot");
            fs::write(&path, dot).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{dot}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(&cli.global, config),
        Command::Bench { all, models, tasks, budget } => bench(&cli.global, *all, models, tasks, *budget),
        Command::ExportDot { artifact } => export_dot(&cli.global, artifact),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

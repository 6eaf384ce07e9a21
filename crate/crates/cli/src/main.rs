use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blendplan::bench::{
    cmd_bench, cmd_export, cmd_solve, default_matrix, read_configs, ExperimentConfig, ExperimentMethod,
    InstanceSource, PeriodKind, RollingConfig,
};
use blendplan::instance::{read_instance, validate_instance, write_instance};
use blendplan::rolling::Scheme;
use blendplan::sim::{audit, loss, simulate, write_trace_csv, write_trace_json, FlowPlan};
use blendplan::solver::BackendKind;
use blendplan::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "blendplan", version, about = "Barge unloading and tank blending schedules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance.
    Gen(GenArgs),
    /// Check an instance file.
    Validate { instance: PathBuf },
    /// Build, solve, simulate, audit, and score one instance.
    Solve(SolveArgs),
    /// Simulate a plan and write the trace.
    Simulate {
        instance: PathBuf,
        plan: PathBuf,
        /// Per-day CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON output (stdout when omitted and no CSV is requested).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check a plan against the original requirements; exit code 1 on any violation.
    Audit { instance: PathBuf, plan: PathBuf },
    /// Percentage of attainable value a plan loses.
    Loss { instance: PathBuf, plan: PathBuf },
    /// Write the model of a method as MPS (MILP) or LP (exact) with a JSON sidecar.
    Export {
        instance: PathBuf,
        #[arg(long, default_value = "center")]
        method: String,
        #[arg(long = "eps-hat", value_delimiter = ',', default_value = "1")]
        eps_hat: Vec<f64>,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        stem: Option<String>,
    },
    /// Run a matrix of configurations and write results and profiles.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Tiny,
    Small,
    Reference,
    ThreeTank,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "small")]
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    horizon: u32,
    /// First day taken from the repeated reference data.
    #[arg(long, default_value_t = 0)]
    start: u32,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Default)]
struct SolverFlags {
    #[arg(long)]
    mip_gap: Option<f64>,
    /// Seconds for the whole run.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    threads: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    backend: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (omit when a config names its instance).
    instance: Option<PathBuf>,
    /// Experiment configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long = "eps-hat", value_delimiter = ',')]
    eps_hat: Option<Vec<f64>>,
    #[arg(long)]
    no_buffers: bool,
    #[arg(long)]
    coupling: bool,
    #[arg(long)]
    relax_avol: bool,
    /// Rolling scheme; flat solve when omitted.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, default_value = "run")]
    periods: String,
    #[arg(long, default_value_t = 4)]
    dt: u32,
    #[arg(long, default_value_t = 90)]
    h_nf: u32,
    #[arg(long, default_value_t = 2)]
    n_present: usize,
    #[arg(long, default_value_t = 2)]
    n_step: usize,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON array of experiment configurations.
    #[arg(long, conflicts_with = "default_matrix")]
    config: Option<PathBuf>,
    /// Method comparison grid on reference instances.
    #[arg(long)]
    default_matrix: bool,
    /// Replications per cell of the default matrix.
    #[arg(long, default_value_t = 1)]
    replications: u64,
    /// Parallel runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(short, long, default_value = "bench")]
    out: PathBuf,
}

/// Failure with the exit code it maps to.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(if e.is_infeasible() { 1 } else { 2 }, e.to_string())
    }
}

fn parse_periods(s: &str) -> Result<PeriodKind, Fail> {
    match s {
        "fixed" => Ok(PeriodKind::Fixed),
        "run" => Ok(PeriodKind::Run),
        other => Err(Fail(2, format!("unknown period kind `{other}`"))),
    }
}

fn apply_solver_flags(cfg: &mut ExperimentConfig, f: &SolverFlags) -> Result<(), Fail> {
    if let Some(g) = f.mip_gap {
        cfg.solve.mip_gap = g;
    }
    if let Some(t) = f.time_limit {
        cfg.solve.time_limit = t;
    }
    if let Some(t) = f.threads {
        cfg.solve.threads = t;
    }
    if let Some(s) = f.seed {
        cfg.solve.seed = s;
    }
    if let Some(b) = &f.backend {
        cfg.backend = b.parse::<BackendKind>()?;
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn load_plan(path: &Path) -> Result<FlowPlan, Fail> {
    Ok(FlowPlan::read(path)?)
}

fn solve(a: SolveArgs) -> Result<(), Fail> {
    let mut cfg = match (&a.config, &a.instance) {
        (Some(p), _) => {
            let mut cs = read_configs(p)?;
            if cs.len() != 1 {
                return Err(Fail(2, format!("{} holds {} configurations, expected one", p.display(), cs.len())));
            }
            cs.remove(0)
        }
        (None, Some(i)) => ExperimentConfig::new(InstanceSource::File { path: i.clone() }, ExperimentMethod::Center, 1.0),
        (None, None) => return Err(Fail(2, "need an instance file or --config".into())),
    };
    if let (Some(_), Some(i)) = (&a.config, &a.instance) {
        cfg.instance = InstanceSource::File { path: i.clone() };
    }
    if let Some(m) = &a.method {
        cfg.method = m.parse()?;
    }
    if let Some(e) = &a.eps_hat {
        cfg.eps_hat = e.clone();
    }
    cfg.buffers &= !a.no_buffers;
    cfg.center.coupling |= a.coupling;
    cfg.center.relax_avol |= a.relax_avol;
    if let Some(s) = &a.scheme {
        cfg.rolling = Some(RollingConfig {
            scheme: s.parse::<Scheme>()?,
            periods: parse_periods(&a.periods)?,
            dt: a.dt,
            h_nf: a.h_nf,
            n_present: a.n_present,
            n_step: a.n_step,
        });
    }
    apply_solver_flags(&mut cfg, &a.solver)?;
    let (rec, _) = cmd_solve(&cfg, &a.out)?;
    print_json(&rec);
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), Fail> {
    let mut configs = match (&a.config, a.default_matrix) {
        (Some(p), _) => read_configs(p)?,
        (None, true) => default_matrix(&(0..a.replications.max(1)).collect::<Vec<_>>()),
        (None, false) => return Err(Fail(2, "need --config or --default-matrix".into())),
    };
    for c in &mut configs {
        apply_solver_flags(c, &a.solver)?;
    }
    let records = cmd_bench(&configs, &a.out, a.jobs.max(1))?;
    let failed = records.iter().filter(|r| r.pct_loss.is_none()).count();
    eprintln!(
        "{} runs, {} without a plan; results in {}",
        records.len(),
        failed,
        a.out.join("results.csv").display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.cmd {
        Cmd::Gen(g) => {
            let src = match g.kind {
                GenKind::Tiny => InstanceSource::Tiny { seed: g.seed },
                GenKind::Small => InstanceSource::Small {
                    seed: g.seed,
                    horizon: g.horizon,
                },
                GenKind::Reference => InstanceSource::Reference {
                    seed: g.seed,
                    start: g.start,
                    horizon: g.horizon,
                },
                GenKind::ThreeTank => {
                    write_instance(&blendplan::instance::synth::reference_three_tank(), &g.out)?;
                    return Ok(());
                }
            };
            write_instance(&src.load()?, &g.out)?;
        }
        Cmd::Validate { instance } => {
            let inst = read_instance(&instance)?;
            let rep = validate_instance(&inst);
            if !rep.is_valid() {
                return Err(Fail(2, rep.to_string()));
            }
            println!("ok: {} specs, {} barges, {} tanks, {} runs, {} days",
                inst.specs.len(), inst.barges.len(), inst.tanks.len(), inst.runs.len(), inst.ops.horizon);
        }
        Cmd::Solve(a) => solve(a)?,
        Cmd::Simulate { instance, plan, csv, json } => {
            let inst = read_instance(&instance)?;
            let trace = simulate(&inst, &load_plan(&plan)?)?;
            if let Some(p) = &csv {
                let f = fs::File::create(p).map_err(|e| Fail(2, format!("{}: {e}", p.display())))?;
                write_trace_csv(&inst, &trace, f)?;
            }
            match &json {
                Some(p) => write_trace_json(&trace, p)?,
                None if csv.is_none() => print_json(&trace),
                None => {}
            }
        }
        Cmd::Audit { instance, plan } => {
            let inst = read_instance(&instance)?;
            let plan = load_plan(&plan)?;
            let trace = simulate(&inst, &plan)?;
            let rep = audit(&inst, &trace, &plan)?;
            print_json(&rep);
            if !rep.is_feasible() {
                return Err(Fail(1, format!("{} violations", rep.violations.len())));
            }
        }
        Cmd::Loss { instance, plan } => {
            let inst = read_instance(&instance)?;
            print_json(&loss(&inst, &load_plan(&plan)?)?);
        }
        Cmd::Export { instance, method, eps_hat, out, stem } => {
            let inst = read_instance(&instance)?;
            let m: ExperimentMethod = method.parse()?;
            let stem = stem.unwrap_or_else(|| m.as_str().to_string());
            let p = cmd_export(&inst, m, &eps_hat, &out, &stem)?;
            println!("{}", p.display());
        }
        Cmd::Bench(a) => bench(a)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            let _ = writeln!(std::io::stderr(), "error: {msg}");
            ExitCode::from(code)
        }
    }
}

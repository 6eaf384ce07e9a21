//! Experiment harness: one pipeline per (instance, method) run, results as
//! CSV rows, plus time-completion and %loss profiles per method.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{crop, extend_periodic, randomize_supply, read_instance, synth, Instance, RandomizationParams};
use crate::model::{build_exact_mix, build_exact_split, build_milp, export::{export_milp, export_qcp}, BuildOptions, CenterOptions, Method};
use crate::rolling::{fixed_periods, roll, run_based_periods, run_intervals, RollParams, Scheme};
use crate::sim::{audit, loss, simulate, write_trace_csv, FeasibilityReport, FlowPlan, Loss, SimulationTrace};
use crate::solver::{backend, extract_flow_plan, idle_start, BackendKind, SolveOptions, Status};

/// Column layout version of `results.csv`.
pub const RESULTS_SCHEMA: &str = "blendplan-runs/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    File { path: PathBuf },
    /// Small random instance on the reference tanks.
    Small { seed: u64, horizon: u32 },
    /// Tiny random instance for brute-force checks.
    Tiny { seed: u64 },
    /// Reference data repeated to cover `start + horizon` days, supply randomized by `seed`, then cropped.
    Reference { seed: u64, start: u32, horizon: u32 },
}

impl InstanceSource {
    pub fn id(&self) -> String {
        match self {
            InstanceSource::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into()),
            InstanceSource::Small { seed, horizon } => format!("small-s{seed}-h{horizon}"),
            InstanceSource::Tiny { seed } => format!("tiny-s{seed}"),
            InstanceSource::Reference { seed, start, horizon } => format!("ref-s{seed}-d{start}-h{horizon}"),
        }
    }

    pub fn load(&self) -> Result<Instance> {
        match self {
            InstanceSource::File { path } => read_instance(path),
            InstanceSource::Small { seed, horizon } => Ok(synth::small(*seed, *horizon)),
            InstanceSource::Tiny { seed } => Ok(synth::tiny(*seed)),
            InstanceSource::Reference { seed, start, horizon } => {
                let base = synth::reference_119_day();
                let long = extend_periodic(&base, (start + horizon).max(base.ops.horizon))?;
                let (rand, _) = randomize_supply(&long, *seed, &RandomizationParams::default())?;
                crop(&rand, *start, *horizon)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodKind {
    Fixed,
    Run,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RollingConfig {
    pub scheme: Scheme,
    pub periods: PeriodKind,
    pub dt: u32,
    #[serde(default = "default_h_nf")]
    pub h_nf: u32,
    #[serde(default = "default_two")]
    pub n_present: usize,
    #[serde(default = "default_two")]
    pub n_step: usize,
}

fn default_h_nf() -> u32 {
    90
}

fn default_two() -> usize {
    2
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMethod {
    Center,
    Mccormick,
    ExactSplitExport,
    ExactMixExport,
}

impl ExperimentMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentMethod::Center => "center",
            ExperimentMethod::Mccormick => "mccormick",
            ExperimentMethod::ExactSplitExport => "exact-split-export",
            ExperimentMethod::ExactMixExport => "exact-mix-export",
        }
    }

    pub fn model_method(self) -> Method {
        match self {
            ExperimentMethod::Center => Method::Center,
            ExperimentMethod::Mccormick => Method::McCormick,
            ExperimentMethod::ExactSplitExport => Method::ExactSplit,
            ExperimentMethod::ExactMixExport => Method::ExactMix,
        }
    }
}

impl std::str::FromStr for ExperimentMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" => Ok(ExperimentMethod::Center),
            "mccormick" => Ok(ExperimentMethod::Mccormick),
            "exact-split-export" | "exact-split" => Ok(ExperimentMethod::ExactSplitExport),
            "exact-mix-export" | "exact-mix" => Ok(ExperimentMethod::ExactMixExport),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub method: ExperimentMethod,
    /// One value per spec, or a single value used for every spec.
    pub eps_hat: Vec<f64>,
    #[serde(default = "default_true")]
    pub buffers: bool,
    #[serde(default)]
    pub center: CenterOptions,
    #[serde(default)]
    pub rolling: Option<RollingConfig>,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub backend: BackendKind,
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSource, method: ExperimentMethod, eps_hat: f64) -> Self {
        ExperimentConfig {
            instance,
            method,
            eps_hat: vec![eps_hat],
            buffers: true,
            center: CenterOptions::default(),
            rolling: None,
            solve: SolveOptions::default(),
            backend: BackendKind::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rolling.is_some() && !self.method.model_method().is_milp() {
            return Err(Error::Config(format!("rolling needs an MILP method, not {}", self.method.as_str())));
        }
        if self.eps_hat.is_empty() || self.eps_hat.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("eps_hat must be positive".into()));
        }
        self.solve.validate()
    }

    fn eps_for(&self, inst: &Instance) -> Result<Vec<f64>> {
        match self.eps_hat.len() {
            1 => Ok(vec![self.eps_hat[0]; inst.specs.len()]),
            n if n == inst.specs.len() => Ok(self.eps_hat.clone()),
            n => Err(Error::Config(format!("{n} eps_hat values for {} specs", inst.specs.len()))),
        }
    }

    pub fn build_options(&self, inst: &Instance) -> Result<BuildOptions> {
        let mut b = BuildOptions::new(self.method.model_method(), self.eps_for(inst)?);
        b.buffers = self.buffers;
        b.center = self.center;
        Ok(b)
    }

    pub fn scheme_label(&self) -> &'static str {
        match &self.rolling {
            None => "flat",
            Some(r) if r.scheme == Scheme::Full => "full",
            Some(_) => "partial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub instance: String,
    pub method: String,
    pub scheme: String,
    pub horizon: u32,
    /// Values joined with `;`.
    pub eps_hat: String,
    pub status: String,
    pub wall_time: f64,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub pct_loss: Option<f64>,
    pub violations: Option<usize>,
    pub spec_violations: Option<usize>,
    pub worst_spec_deviation: Option<f64>,
    pub steps: usize,
    pub step_log: Option<String>,
    pub message: Option<String>,
}

/// Everything one run produces besides its record.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub instance: Instance,
    pub plan: FlowPlan,
    pub trace: SimulationTrace,
    pub report: FeasibilityReport,
    pub loss: Loss,
    pub step_log: Vec<String>,
}

fn record_stub(cfg: &ExperimentConfig, horizon: u32) -> RunRecord {
    RunRecord {
        schema: RESULTS_SCHEMA.into(),
        instance: cfg.instance.id(),
        method: cfg.method.as_str().into(),
        scheme: cfg.scheme_label().into(),
        horizon,
        eps_hat: cfg.eps_hat.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(";"),
        status: Status::Error.as_str().into(),
        wall_time: 0.0,
        objective: None,
        bound: None,
        pct_loss: None,
        violations: None,
        spec_violations: None,
        worst_spec_deviation: None,
        steps: 0,
        step_log: None,
        message: None,
    }
}

fn stage<T>(label: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Infeasible(m) => Error::Infeasible(format!("{label}: {m}")),
        e @ Error::Rolling { .. } => e,
        e => Error::Config(format!("{label}: {e}")),
    })
}

/// Builds, solves (flat or rolling), simulates, audits, and scores one configuration.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<(RunRecord, RunArtifacts)> {
    let inst = stage("instance", cfg.instance.load())?;
    run_instance(cfg, inst)
}

/// [`run_pipeline`] on an instance already in memory; `cfg.instance` only labels the record.
pub fn run_instance(cfg: &ExperimentConfig, inst: Instance) -> Result<(RunRecord, RunArtifacts)> {
    cfg.validate()?;
    if !cfg.method.model_method().is_milp() {
        return Err(Error::Config(format!("{} is an export-only method", cfg.method.as_str())));
    }
    let h = inst.ops.horizon;
    let mut rec = record_stub(cfg, h);
    let solver = backend(cfg.backend)?;
    let bopts = stage("build", cfg.build_options(&inst))?;
    let clock = Instant::now();
    let mut step_log = Vec::new();
    let (plan, status, objective, bound) = match &cfg.rolling {
        None => {
            let model = stage("build", build_milp(&inst, &bopts))?;
            let model = idle_start(&inst, &model, &FlowPlan::empty(&inst));
            let r = stage("solve", solver.solve(&model, &cfg.solve))?;
            if r.status == Status::Infeasible {
                return Err(Error::Infeasible(r.message.unwrap_or_else(|| "model infeasible".into())));
            }
            let plan = stage("extract", extract_flow_plan(&inst, &model, &r))?;
            (plan, r.status, r.objective, r.best_bound)
        }
        Some(rc) => {
            let periods = match rc.periods {
                PeriodKind::Fixed => fixed_periods(h, rc.dt)?,
                PeriodKind::Run => run_based_periods(&run_intervals(&inst), h, rc.dt)?,
            };
            let mut params = RollParams::new(rc.scheme, bopts, cfg.solve.clone());
            params.h_nf = rc.h_nf;
            params.n_present = rc.n_present;
            params.n_step = rc.n_step;
            let mut buf: Vec<u8> = Vec::new();
            let out = stage("rolling", roll(&inst, &periods, &params, solver.as_ref(), Some(&mut buf)))?;
            step_log = String::from_utf8_lossy(&buf).lines().map(str::to_string).collect();
            rec.steps = out.steps.len();
            let last = out.steps.last().expect("at least one step");
            let status = if out.steps.iter().any(|s| s.status == Status::TimeLimit) {
                Status::TimeLimit
            } else {
                last.status
            };
            (out.plan, status, last.objective, last.bound)
        }
    };
    rec.wall_time = clock.elapsed().as_secs_f64();
    let trace = stage("simulate", simulate(&inst, &plan))?;
    let report = stage("audit", audit(&inst, &trace, &plan))?;
    let l = stage("loss", loss(&inst, &plan))?;
    rec.status = status.as_str().into();
    rec.objective = objective;
    rec.bound = bound;
    rec.pct_loss = Some(l.pct_loss);
    rec.violations = Some(report.violations.len());
    rec.spec_violations = Some(report.spec_violations());
    rec.worst_spec_deviation = Some(report.worst_spec_deviation);
    Ok((
        rec,
        RunArtifacts {
            instance: inst,
            plan,
            trace,
            report,
            loss: l,
            step_log,
        },
    ))
}

/// Like [`run_pipeline`], but a failure becomes an error row.
pub fn run_record(cfg: &ExperimentConfig) -> (RunRecord, Option<RunArtifacts>) {
    match run_pipeline(cfg) {
        Ok((r, a)) => (r, Some(a)),
        Err(e) => {
            let h = match &cfg.instance {
                InstanceSource::Small { horizon, .. } | InstanceSource::Reference { horizon, .. } => *horizon,
                _ => 0,
            };
            let mut r = record_stub(cfg, h);
            r.message = Some(e.to_string());
            (r, None)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Config(format!("csv {}: {e}", path.display()))
}

/// Appends records to a CSV file, writing the header when the file is new or empty.
pub fn append_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    rd.deserialize().map(|r| r.map_err(csv_err(path))).collect()
}

/// Writes plan, trace, audit, loss, and step log for one run into `dir`.
pub fn write_artifacts(dir: &Path, rec: &mut RunRecord, a: &RunArtifacts) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    a.plan.write(dir.join("plan.json"))?;
    crate::sim::write_trace_json(&a.trace, &dir.join("trace.json"))?;
    let csv_path = dir.join("trace.csv");
    let f = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_trace_csv(&a.instance, &a.trace, f)?;
    write_text(&dir.join("audit.json"), &pretty(&a.report))?;
    write_text(&dir.join("loss.json"), &pretty(&a.loss))?;
    if !a.step_log.is_empty() {
        let p = dir.join("steps.jsonl");
        write_text(&p, &(a.step_log.join("\n") + "\n"))?;
        rec.step_log = Some(p.display().to_string());
    }
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Runs one configuration, writes its artifacts under `out_dir/<instance>-<method>-<scheme>/`,
/// and appends its record to `out_dir/results.csv`.
pub fn cmd_solve(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(RunRecord, RunArtifacts)> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let (mut rec, art) = run_pipeline(cfg)?;
    let dir = out_dir.join(format!("{}-{}-{}", rec.instance, rec.method, rec.scheme));
    write_artifacts(&dir, &mut rec, &art)?;
    append_records(&out_dir.join("results.csv"), std::slice::from_ref(&rec))?;
    Ok((rec, art))
}

/// Share of a method's runs finished (status optimal or gap reached) by each observed time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub method: String,
    pub x: f64,
    pub fraction: f64,
}

fn label(r: &RunRecord) -> String {
    format!("{}/{}/{}", r.method, r.scheme, r.eps_hat)
}

fn labels(records: &[RunRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        let l = label(r);
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

pub fn time_profile(records: &[RunRecord]) -> Vec<ProfilePoint> {
    let mut out = Vec::new();
    for m in labels(records) {
        let runs: Vec<&RunRecord> = records.iter().filter(|r| label(r) == m).collect();
        let mut times: Vec<f64> = runs
            .iter()
            .filter(|r| r.status == Status::Optimal.as_str() || r.status == Status::GapReached.as_str())
            .map(|r| r.wall_time)
            .collect();
        times.sort_by(f64::total_cmp);
        for (i, t) in times.iter().enumerate() {
            out.push(ProfilePoint {
                method: m.clone(),
                x: *t,
                fraction: (i + 1) as f64 / runs.len() as f64,
            });
        }
    }
    out
}

/// Empirical distribution of %loss per method (runs without a plan are left out).
pub fn loss_profile(records: &[RunRecord]) -> Vec<ProfilePoint> {
    let mut out = Vec::new();
    for m in labels(records) {
        let runs: Vec<&RunRecord> = records.iter().filter(|r| label(r) == m).collect();
        let mut losses: Vec<f64> = runs.iter().filter_map(|r| r.pct_loss).collect();
        losses.sort_by(f64::total_cmp);
        for (i, l) in losses.iter().enumerate() {
            out.push(ProfilePoint {
                method: m.clone(),
                x: *l,
                fraction: (i + 1) as f64 / runs.len() as f64,
            });
        }
    }
    out
}

fn write_profile(path: &Path, points: &[ProfilePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for p in points {
        w.serialize(p).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs every configuration (in parallel over `threads` workers), keeping input order in the output.
/// Writes `results.csv`, `profile_time.csv`, and `profile_loss.csv` into `out_dir`.
pub fn cmd_bench(configs: &[ExperimentConfig], out_dir: &Path, threads: usize) -> Result<Vec<RunRecord>> {
    if configs.is_empty() {
        return Err(Error::Config("no configurations to run".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                let (mut rec, art) = run_record(cfg);
                if let Some(a) = art {
                    let dir = out_dir.join(format!("{}-{}-{}-{}", rec.instance, rec.method, rec.scheme, rec.eps_hat));
                    if let Err(e) = write_artifacts(&dir, &mut rec, &a) {
                        rec.message = Some(e.to_string());
                    }
                }
                rec
            })
            .collect()
    });
    let results = out_dir.join("results.csv");
    if results.exists() {
        fs::remove_file(&results).map_err(|e| Error::io(&results, e))?;
    }
    append_records(&results, &records)?;
    write_profile(&out_dir.join("profile_time.csv"), &time_profile(&records))?;
    write_profile(&out_dir.join("profile_loss.csv"), &loss_profile(&records))?;
    Ok(records)
}

/// Writes the model of `method` for `inst`: an MPS file for MILP methods, an LP file with
/// quadratic rows for the exact ones, each with a JSON sidecar.
pub fn cmd_export(inst: &Instance, method: ExperimentMethod, eps_hat: &[f64], dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match method {
        ExperimentMethod::ExactSplitExport => export_qcp(&build_exact_split(inst)?, dir, stem),
        ExperimentMethod::ExactMixExport => export_qcp(&build_exact_mix(inst)?, dir, stem),
        m => {
            let eps = match eps_hat.len() {
                1 => vec![eps_hat[0]; inst.specs.len()],
                _ => eps_hat.to_vec(),
            };
            export_milp(&build_milp(inst, &BuildOptions::new(m.model_method(), eps))?, dir, stem)
        }
    }
}

/// Experiment grid of the method comparison: eps_hat in {1, 0.25} over a range of horizons,
/// McCormick at eps_hat = 0.25 capped at 60 days, each on `seeds` reference instances.
pub fn default_matrix(seeds: &[u64]) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for (eps, horizons) in [(1.0, &[10u32, 20, 30, 45, 60, 70, 90][..]), (0.25, &[10, 20, 30, 45, 60][..])] {
        for &h in horizons {
            for method in [ExperimentMethod::Center, ExperimentMethod::Mccormick] {
                if method == ExperimentMethod::Mccormick && eps < 1.0 && h > 60 {
                    continue;
                }
                for &seed in seeds {
                    let mut cfg = ExperimentConfig::new(
                        InstanceSource::Reference { seed, start: 0, horizon: h },
                        method,
                        eps,
                    );
                    if h >= 45 {
                        cfg.rolling = Some(RollingConfig {
                            scheme: Scheme::Full,
                            periods: PeriodKind::Run,
                            dt: 4,
                            h_nf: 90,
                            n_present: 2,
                            n_step: 2,
                        });
                    }
                    out.push(cfg);
                }
            }
        }
    }
    out
}

/// Reads a JSON array of configurations (or a single object).
pub fn read_configs(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |e: serde_path_to_error::Error<serde_json::Error>| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let de = &mut serde_json::Deserializer::from_str(&text);
    if text.trim_start().starts_with('[') {
        serde_path_to_error::deserialize(de).map_err(parse_err)
    } else {
        serde_path_to_error::deserialize(de).map(|c| vec![c]).map_err(parse_err)
    }
}

pub fn write_records_json(out: &mut dyn Write, r: &RunRecord) -> Result<()> {
    let line = serde_json::to_string(r).expect("record serializes");
    writeln!(out, "{line}").map_err(|e| Error::io("stdout", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, status: Status, t: f64, l: Option<f64>) -> RunRecord {
        let mut r = record_stub(
            &ExperimentConfig::new(InstanceSource::Tiny { seed: 0 }, ExperimentMethod::Center, 1.0),
            5,
        );
        r.method = method.into();
        r.status = status.as_str().into();
        r.wall_time = t;
        r.pct_loss = l;
        r
    }

    #[test]
    fn profiles_are_cdfs() {
        let rs = vec![
            rec("a", Status::Optimal, 3.0, Some(1.0)),
            rec("a", Status::TimeLimit, 600.0, Some(5.0)),
            rec("a", Status::GapReached, 1.0, Some(0.0)),
            rec("b", Status::Optimal, 2.0, None),
        ];
        let p = time_profile(&rs);
        let a: Vec<(f64, f64)> = p.iter().filter(|p| p.method.starts_with("a/")).map(|p| (p.x, p.fraction)).collect();
        assert_eq!(a, vec![(1.0, 1.0 / 3.0), (3.0, 2.0 / 3.0)]);
        let l = loss_profile(&rs);
        assert_eq!(l.iter().filter(|p| p.method.starts_with("b/")).count(), 0);
        assert!(l.windows(2).all(|w| w[0].method != w[1].method || w[0].fraction <= w[1].fraction));
    }

    #[test]
    fn config_json_round_trip() {
        let mut c = ExperimentConfig::new(InstanceSource::Small { seed: 3, horizon: 12 }, ExperimentMethod::Mccormick, 0.25);
        c.rolling = Some(RollingConfig {
            scheme: Scheme::Partial,
            periods: PeriodKind::Fixed,
            dt: 4,
            h_nf: 90,
            n_present: 2,
            n_step: 2,
        });
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let minimal: ExperimentConfig =
            serde_json::from_str(r#"{"instance":{"kind":"tiny","seed":1},"method":"center","eps_hat":[1.0]}"#).unwrap();
        assert!(minimal.buffers);
        assert_eq!(minimal.solve, SolveOptions::default());
    }

    #[test]
    fn rolling_needs_milp() {
        let mut c = ExperimentConfig::new(InstanceSource::Tiny { seed: 1 }, ExperimentMethod::ExactMixExport, 1.0);
        c.rolling = Some(RollingConfig {
            scheme: Scheme::Full,
            periods: PeriodKind::Fixed,
            dt: 2,
            h_nf: 90,
            n_present: 2,
            n_step: 2,
        });
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_matrix_filters_mccormick() {
        let m = default_matrix(&[0]);
        assert!(!m.iter().any(|c| c.method == ExperimentMethod::Mccormick
            && c.eps_hat == vec![0.25]
            && matches!(c.instance, InstanceSource::Reference { horizon, .. } if horizon > 60)));
        assert_eq!(m.len(), 7 * 2 + 5 * 2);
    }
}

//! MIP backends behind one interface: linked HiGHS, a dense reference
//! branch-and-bound for tiny models, and an external solver binary driven
//! through MPS and solution files.

mod external;
mod extract;
mod highs;
mod reference;

use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{MilpModel, VarKey};
use crate::sim::{plan_columns, simulate, FlowPlan};

pub use external::{parse_solution_file, ExternalBackend, SOLVER_ENV};
pub(crate) use extract::{check_counts, fill_plan};
pub use extract::{decoded_specs, extract_flow_plan};
pub use highs::{read_model_counts, HighsBackend};
pub use reference::ReferenceBackend;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    /// Relative MIP gap at which the search stops.
    pub mip_gap: f64,
    /// Seconds.
    pub time_limit: f64,
    /// Zero leaves the choice to the backend.
    pub threads: u32,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mip_gap: 0.005,
            time_limit: 600.0,
            threads: 1,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.mip_gap >= 0.0) {
            return Err(Error::Config(format!("mip gap must be non-negative, got {}", self.mip_gap)));
        }
        if !(self.time_limit > 0.0) {
            return Err(Error::Config(format!("time limit must be positive, got {}", self.time_limit)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    GapReached,
    TimeLimit,
    Infeasible,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::GapReached => "gap_reached",
            Status::TimeLimit => "time_limit",
            Status::Infeasible => "infeasible",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    /// Minimized objective of the model (penalty cost).
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    /// Column values indexed like `model.vars`; empty without a solution.
    pub values: Vec<f64>,
    pub wall_time: f64,
    pub message: Option<String>,
}

impl SolveResult {
    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, model: &MilpModel, key: &VarKey) -> Option<f64> {
        let id = model.id(key)?;
        self.values.get(id.index()).copied()
    }

    /// Relative gap between objective and bound.
    pub fn gap(&self) -> Option<f64> {
        let (o, b) = (self.objective?, self.best_bound?);
        Some(((o - b) / o.abs().max(1e-9)).max(0.0))
    }

    fn failed(status: Status, message: String, wall_time: f64) -> Self {
        SolveResult {
            status,
            objective: None,
            best_bound: None,
            values: Vec::new(),
            wall_time,
            message: Some(message),
        }
    }
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<SolveResult>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Highs,
    Reference,
    External,
}

impl FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "highs" => Ok(BackendKind::Highs),
            "reference" => Ok(BackendKind::Reference),
            "external" => Ok(BackendKind::External),
            other => Err(Error::Config(format!("unknown backend `{other}`"))),
        }
    }
}

pub fn backend(kind: BackendKind) -> Result<Box<dyn Backend>> {
    Ok(match kind {
        BackendKind::Highs => Box::new(HighsBackend),
        BackendKind::Reference => Box::new(ReferenceBackend::default()),
        BackendKind::External => Box::new(ExternalBackend::from_env()?),
    })
}

/// Solves with the linked HiGHS backend.
pub fn solve(model: &MilpModel, opts: &SolveOptions) -> Result<SolveResult> {
    HighsBackend.solve(model, opts)
}

/// Copies plan values into column start values. Out-of-bound values are dropped.
pub fn warm_start(model: &MilpModel, plan: &FlowPlan) -> MilpModel {
    warm_start_values(model, plan.values())
}

pub fn warm_start_values(model: &MilpModel, values: impl IntoIterator<Item = (VarKey, f64)>) -> MilpModel {
    let mut out = model.clone();
    for (key, v) in values {
        let Some(id) = out.id(&key) else { continue };
        let var = out.variable_mut(id);
        if v < var.lo - 1e-9 || v > var.hi + 1e-9 {
            warn!("start value {v} for {key} outside [{}, {}], dropped", var.lo, var.hi);
            continue;
        }
        var.start = Some(v.clamp(var.lo, var.hi));
    }
    out
}

/// Starts every column from `base` before the model's first day and no flow
/// from then on. Returns the model unchanged when that point does not fit the
/// column bounds; whether it satisfies the rows is left to the backend.
pub fn idle_start(inst: &Instance, model: &MilpModel, base: &FlowPlan) -> MilpModel {
    idle_start_from(inst, model, base, model.meta.start)
}

/// As [`idle_start`], with the flow stopping on day `from`.
pub fn idle_start_from(inst: &Instance, model: &MilpModel, base: &FlowPlan, from: u32) -> MilpModel {
    let from = (from as usize).min(base.horizon as usize);
    let mut p = base.clone();
    for row in p.y_in.iter_mut().flatten() {
        row[from..].fill(0.0);
    }
    for row in &mut p.y_out {
        row[from..].fill(0.0);
    }
    for row in p.gamma.iter_mut().chain(p.sigma.iter_mut()) {
        row[from..].fill(0);
    }
    p.settle(inst);
    let trace = match simulate(inst, &p) {
        Ok(t) => t,
        Err(e) => {
            log::debug!("idle start not simulated: {e}");
            return model.clone();
        }
    };
    let Some(cols) = plan_columns(model, &p, &trace) else {
        log::debug!("idle start has no value for some column");
        return model.clone();
    };
    let outside = cols.iter().find(|(key, v)| {
        let var = model.variable(model.id(key).expect("own column"));
        *v < var.lo - 1e-9 || *v > var.hi + 1e-9
    });
    if let Some((key, v)) = outside {
        log::debug!("idle start puts {key} at {v}, outside its bounds; not used");
        return model.clone();
    }
    warm_start_values(model, cols)
}

/// Classifies a finished MIP search.
pub(crate) fn classify(objective: f64, bound: f64, target_gap: f64) -> Status {
    let gap = ((objective - bound) / objective.abs().max(1e-9)).max(0.0);
    if gap <= 1e-9 || (objective - bound).abs() <= 1e-9 {
        Status::Optimal
    } else if gap <= target_gap + 1e-12 {
        Status::GapReached
    } else {
        Status::TimeLimit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinExpr, Tag};

    fn tiny_models() -> Vec<(MilpModel, Status, Option<f64>)> {
        let empty = MilpModel::new();
        let mut maxx = MilpModel::new();
        let x = maxx.var(VarKey::Mis { t: 0 }, 0.0, 1.0, false);
        let mut o = LinExpr::new();
        o.add(x, -1.0);
        maxx.set_objective(o);
        let mut inf = MilpModel::new();
        let x = inf.var(VarKey::Mis { t: 0 }, 0.0, 5.0, false);
        let mut a = LinExpr::new();
        a.add(x, 1.0);
        inf.add_row(Tag::Demand, vec![0], a.clone(), 1.0, f64::INFINITY);
        inf.add_row(Tag::Demand, vec![1], a, f64::NEG_INFINITY, 0.0);
        vec![
            (empty, Status::Optimal, Some(0.0)),
            (maxx, Status::Optimal, Some(-1.0)),
            (inf, Status::Infeasible, None),
        ]
    }

    #[test]
    fn trivial_models_on_both_backends() {
        let opts = SolveOptions::default();
        for b in [backend(BackendKind::Highs).unwrap(), backend(BackendKind::Reference).unwrap()] {
            for (m, status, obj) in tiny_models() {
                let r = b.solve(&m, &opts).unwrap();
                assert_eq!(r.status, status, "{}", b.name());
                assert_eq!(r.objective, obj, "{}", b.name());
            }
        }
    }

    #[test]
    fn options_validated() {
        assert!(SolveOptions { mip_gap: -1.0, ..Default::default() }.validate().is_err());
        assert!(SolveOptions { time_limit: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolveOptions::default().validate().is_ok());
    }

    #[test]
    fn warm_start_drops_out_of_bounds() {
        let mut m = MilpModel::new();
        m.var(VarKey::Gamma { s: 0, t: 0 }, 0.0, 1.0, true);
        m.var(VarKey::Mis { t: 0 }, 0.0, 10.0, false);
        let w = warm_start_values(&m, [(VarKey::Gamma { s: 0, t: 0 }, 1.0), (VarKey::Mis { t: 0 }, 11.0)]);
        assert_eq!(w.vars[0].start, Some(1.0));
        assert_eq!(w.vars[1].start, None);
        let same = warm_start_values(&m, []);
        assert_eq!(same, m);
    }
}

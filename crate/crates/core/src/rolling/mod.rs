//! Rolling-horizon solves: the horizon is cut into periods and solved in
//! steps, each with a detailed present, a partly relaxed near future, and a
//! relaxed (full scheme) or omitted (partial scheme) far future.

mod periods;
mod policy;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{derive_sets, DerivedSets, Instance};
use crate::model::{build_scoped, BargeScope, BuildOptions, MilpModel, Scope, Treat, VarKey};
use crate::sim::{simulate, FlowPlan};
use crate::solver::{check_counts, fill_plan, idle_start, idle_start_from, Backend, SolveOptions, SolveResult, Status};

pub use periods::{fixed_periods, run_based_periods, run_intervals, Period};
pub use policy::{Scheme, Segment, SegmentPolicy, Treatment, VarGroup, VAR_GROUPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollParams {
    pub scheme: Scheme,
    /// Near future ends this many days after the present starts.
    pub h_nf: u32,
    /// Periods in the present window.
    pub n_present: usize,
    /// Periods frozen per step.
    pub n_step: usize,
    pub build: BuildOptions,
    /// `time_limit` is the budget for the whole roll.
    pub solve: SolveOptions,
}

impl RollParams {
    pub fn new(scheme: Scheme, build: BuildOptions, solve: SolveOptions) -> Self {
        RollParams {
            scheme,
            h_nf: 90,
            n_present: 2,
            n_step: 2,
            build,
            solve,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_step == 0 || self.n_present < self.n_step {
            return Err(Error::Config(format!(
                "need 1 <= n_step <= n_present, got n_step {} and n_present {}",
                self.n_step, self.n_present
            )));
        }
        if !self.build.method.is_milp() {
            return Err(Error::Config("rolling needs an MILP method".into()));
        }
        self.solve.validate()
    }
}

/// One line of the step log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    /// Model days `[start, end)`.
    pub start: u32,
    pub end: u32,
    pub present_end: u32,
    pub near_end: u32,
    pub status: Status,
    /// Minimized penalty cost of the step model.
    pub objective: Option<f64>,
    /// Captured value of the step model (`value_constant - objective`).
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub wall_time: f64,
    pub columns: usize,
    pub rows: usize,
    pub integers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollOutcome {
    pub plan: FlowPlan,
    pub steps: Vec<StepLog>,
    /// Binary values (gamma, sigma, alpha) returned by each step.
    pub binaries: Vec<BTreeMap<VarKey, f64>>,
    /// Plan frozen after each step (partial scheme only).
    pub accumulated: Vec<FlowPlan>,
    /// First unfrozen day after each step.
    pub frozen_until: Vec<u32>,
}

/// Indices of the first period of every step.
fn step_starts(n_periods: usize, params: &RollParams) -> Vec<usize> {
    let mut out = vec![0];
    while out.last().expect("nonempty") + params.n_present < n_periods {
        let next = out.last().expect("nonempty") + params.n_step;
        out.push(next);
    }
    out
}

fn check_periods(periods: &[Period], horizon: u32) -> Result<()> {
    let mut t = 0;
    for p in periods {
        if p.start != t || p.end <= p.start {
            return Err(Error::Config(format!("periods must partition [0, {horizon})")));
        }
        t = p.end;
    }
    if t != horizon {
        return Err(Error::Config(format!("periods must partition [0, {horizon})")));
    }
    Ok(())
}

fn treat(t: Treatment) -> Treat {
    match t {
        Treatment::Fixed => Treat::Fixed,
        Treatment::Relaxed => Treat::Relaxed,
        Treatment::Active | Treatment::Omitted => Treat::Binary,
    }
}

fn is_binary_key(k: &VarKey) -> bool {
    matches!(k, VarKey::Gamma { .. } | VarKey::Sigma { .. } | VarKey::Alpha { .. })
}

struct Window {
    start: u32,
    present_end: u32,
    near_end: u32,
    /// First day not frozen once this step is accepted.
    freeze_end: u32,
}

/// Step layout. The near future also runs to the end of any run it cuts into,
/// so a step never commits to a feed rate it cannot see through.
fn window(inst: &Instance, periods: &[Period], first: usize, params: &RollParams) -> Window {
    let horizon = inst.ops.horizon;
    let n = periods.len();
    let start = periods[first].start;
    let present_end = periods[(first + params.n_present).min(n) - 1].end;
    let mut near_end = present_end.max(start.saturating_add(params.h_nf)).min(horizon);
    if let Some(r) = inst.runs.iter().find(|r| r.days[0] < near_end && near_end <= r.days[1]) {
        near_end = (r.days[1] + 1).min(horizon);
    }
    let freeze_end = if first + params.n_present >= n {
        horizon
    } else {
        periods[first + params.n_step].start
    };
    Window {
        start,
        present_end,
        near_end,
        freeze_end,
    }
}

fn segment(w: &Window, t: u32) -> Segment {
    if t < w.start {
        Segment::Past
    } else if t < w.present_end {
        Segment::Present
    } else if t < w.near_end {
        Segment::Near
    } else {
        Segment::Far
    }
}

fn apply_policy(scope: &mut Scope, w: &Window, policy: SegmentPolicy) {
    for t in 0..scope.gamma.len() {
        let seg = segment(w, t as u32);
        scope.gamma[t] = treat(policy.treatment(VarGroup::Gamma, seg));
        scope.sigma[t] = treat(policy.treatment(VarGroup::Sigma, seg));
        scope.alpha[t] = treat(policy.treatment(VarGroup::Alpha, seg));
    }
}

struct Stepper<'a, 'w> {
    inst: &'a Instance,
    sets: DerivedSets,
    params: &'a RollParams,
    backend: &'a dyn Backend,
    log: Option<&'w mut dyn Write>,
    clock: Instant,
    n_steps: usize,
}

impl Stepper<'_, '_> {
    fn solve(&mut self, step: usize, w: &Window, model: &MilpModel) -> Result<(SolveResult, StepLog)> {
        let left = (self.params.solve.time_limit - self.clock.elapsed().as_secs_f64()).max(1.0);
        let opts = SolveOptions {
            time_limit: left / (self.n_steps - step) as f64,
            ..self.params.solve.clone()
        };
        let r = self.backend.solve(model, &opts).map_err(|e| Error::Rolling {
            step,
            message: e.to_string(),
        })?;
        let entry = StepLog {
            step,
            start: model.meta.start,
            end: model.meta.end,
            present_end: w.present_end,
            near_end: w.near_end,
            status: r.status,
            objective: r.objective,
            value: r.objective.map(|o| model.meta.value_constant - o),
            bound: r.best_bound,
            wall_time: r.wall_time,
            columns: model.vars.len(),
            rows: model.rows.len(),
            integers: model.num_integer(),
        };
        if let Some(out) = self.log.as_mut() {
            let line = serde_json::to_string(&entry).expect("step log serializes");
            writeln!(out, "{line}").map_err(|e| Error::io("step log", e))?;
        }
        if !r.has_solution() {
            return Err(Error::Rolling {
                step,
                message: format!(
                    "no solution ({}){}",
                    r.status.as_str(),
                    r.message.as_deref().map(|m| format!(": {m}")).unwrap_or_default()
                ),
            });
        }
        Ok((r, entry))
    }
}

fn binaries_of(model: &MilpModel, r: &SolveResult) -> BTreeMap<VarKey, f64> {
    model
        .vars
        .iter()
        .zip(&r.values)
        .filter(|(v, _)| is_binary_key(&v.key))
        .map(|(v, &x)| (v.key, x.round()))
        .collect()
}

/// Rolls over the horizon with the scheme in `params`.
pub fn roll(
    inst: &Instance,
    periods: &[Period],
    params: &RollParams,
    backend: &dyn Backend,
    log: Option<&mut dyn Write>,
) -> Result<RollOutcome> {
    match params.scheme {
        Scheme::Full => roll_full(inst, periods, params, backend, log),
        Scheme::Partial => roll_partial(inst, periods, params, backend, log),
    }
}

/// Every step covers the whole horizon; binaries of past periods are fixed
/// to earlier decisions and the far future is relaxed.
pub fn roll_full(
    inst: &Instance,
    periods: &[Period],
    params: &RollParams,
    backend: &dyn Backend,
    log: Option<&mut dyn Write>,
) -> Result<RollOutcome> {
    params.validate()?;
    let h = inst.ops.horizon;
    check_periods(periods, h)?;
    let sets = derive_sets(inst)?;
    let starts = step_starts(periods.len(), params);
    let policy = SegmentPolicy::new(Scheme::Full);
    let mut st = Stepper {
        inst,
        sets,
        params,
        backend,
        log,
        clock: Instant::now(),
        n_steps: starts.len(),
    };
    let mut out = RollOutcome {
        plan: FlowPlan::empty(inst),
        steps: Vec::new(),
        binaries: Vec::new(),
        accumulated: Vec::new(),
        frozen_until: Vec::new(),
    };
    let mut prev: Option<(MilpModel, SolveResult)> = None;
    for (step, &first) in starts.iter().enumerate() {
        let w = window(inst, periods, first, params);
        let mut scope = Scope::full(st.inst, &st.sets);
        apply_policy(&mut scope, &w, policy);
        if let Some((m, r)) = &prev {
            for (v, &x) in m.vars.iter().zip(&r.values) {
                if is_binary_key(&v.key) && v.key.day().is_some_and(|t| t < w.start) {
                    scope.fixed.insert(v.key, x.round());
                }
            }
        }
        let mut model = build_scoped(st.inst, &st.sets, &scope, &params.build)?;
        model = match &prev {
            // Earlier decisions up to where that step was still integral, idle afterwards.
            Some((m, r)) => {
                let mut base = FlowPlan::empty(inst);
                fill_plan(&mut base, m, &r.values);
                // stop on a day that does not continue a run, so constant feed holds
                let integral = out.steps.last().map_or(w.start, |s| s.near_end);
                let cut = (w.start..=integral)
                    .rev()
                    .find(|&t| !inst.runs.iter().any(|r| r.days[0] < t && t <= r.days[1]))
                    .unwrap_or(w.start);
                idle_start_from(inst, &model, &base, cut)
            }
            None => idle_start(inst, &model, &out.plan),
        };
        let (r, entry) = st.solve(step, &w, &model)?;
        out.steps.push(entry);
        out.binaries.push(binaries_of(&model, &r));
        out.frozen_until.push(w.freeze_end);
        prev = Some((model, r));
    }
    let (model, r) = prev.expect("at least one step");
    let mut plan = FlowPlan::empty(inst);
    fill_plan(&mut plan, &model, &r.values);
    plan.settle(inst);
    check_counts(inst, &plan)?;
    out.plan = plan;
    Ok(out)
}

/// Tank state at the end of day `t - 1` under the frozen plan.
fn state_at(inst: &Instance, sets: &DerivedSets, plan: &FlowPlan, t: u32) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if t == 0 {
        return Ok((inst.tanks.iter().map(|k| k.v_init).collect(), sets.tank_spec_init.clone()));
    }
    let tr = simulate(inst, plan)?;
    let d = (t - 1) as usize;
    let v = tr.v_end.iter().map(|row| row[d]).collect();
    let f = tr.f.iter().map(|tank| tank.iter().map(|q| q[d]).collect()).collect();
    Ok((v, f))
}

/// Barge state for a step starting at `w.start`: remaining volume pro-rated
/// by the share of the remaining window that the step can see.
fn barge_scopes(inst: &Instance, sets: &DerivedSets, plan: &FlowPlan, w: &Window) -> Vec<BargeScope> {
    let ops = &inst.ops;
    inst.barges
        .iter()
        .enumerate()
        .map(|(s, b)| {
            let past: Vec<u32> = (0..w.start).filter(|&t| plan.gamma[s][t as usize] == 1).collect();
            let unloaded: f64 = plan.y_in[s].iter().map(|row| row[..w.start as usize].iter().sum::<f64>()).sum();
            let remaining = (b.volume - unloaded).max(0.0);
            let prior = past.first().map(|&a| (a, *past.last().expect("nonempty")));
            let unloads_left = ops.max_unloads_per_barge.saturating_sub(past.len() as u32);
            let (wa, wb) = sets.windows[s];
            let wb = match prior {
                Some((a, _)) => wb.min(a + ops.max_unload_gap),
                None => wb,
            };
            let a = wa.max(w.start);
            let window_left = if wb >= a { wb + 1 - a } else { 0 };
            let visible = if wb >= a { (wb + 1).min(w.near_end).saturating_sub(a) } else { 0 };
            let active = remaining > 1e-9 && unloads_left > 0 && visible > 0;
            let cap = if active {
                remaining * f64::from(visible) / f64::from(window_left)
            } else {
                0.0
            };
            BargeScope {
                active,
                cap,
                window: (a, wb.max(a)),
                unloads_left,
                prior,
                min_unload: (ops.min_daily_unload_pct * b.volume).min(cap),
            }
        })
        .collect()
}

/// Each step sees only the present and near future, starting from the
/// simulated state of everything frozen so far.
pub fn roll_partial(
    inst: &Instance,
    periods: &[Period],
    params: &RollParams,
    backend: &dyn Backend,
    log: Option<&mut dyn Write>,
) -> Result<RollOutcome> {
    params.validate()?;
    let h = inst.ops.horizon;
    check_periods(periods, h)?;
    let sets = derive_sets(inst)?;
    let starts = step_starts(periods.len(), params);
    let policy = SegmentPolicy::new(Scheme::Partial);
    let mut st = Stepper {
        inst,
        sets,
        params,
        backend,
        log,
        clock: Instant::now(),
        n_steps: starts.len(),
    };
    let mut plan = FlowPlan::empty(inst);
    let mut out = RollOutcome {
        plan: plan.clone(),
        steps: Vec::new(),
        binaries: Vec::new(),
        accumulated: Vec::new(),
        frozen_until: Vec::new(),
    };
    for (step, &first) in starts.iter().enumerate() {
        let w = window(inst, periods, first, params);
        let (v0, f0) = state_at(inst, &st.sets, &plan, w.start).map_err(|e| Error::Rolling {
            step,
            message: e.to_string(),
        })?;
        let mut scope = Scope::full(inst, &st.sets);
        scope.start = w.start;
        scope.end = w.near_end;
        scope.v0 = v0;
        scope.f0 = f0;
        scope.barges = barge_scopes(inst, &st.sets, &plan, &w);
        scope.feed_pin = inst
            .runs
            .iter()
            .find(|r| r.days[0] < w.start && w.start <= r.days[1])
            .map(|_| plan.y_out.iter().map(|row| row[w.start as usize - 1]).collect());
        apply_policy(&mut scope, &w, policy);
        let mut model = idle_start(inst, &build_scoped(inst, &st.sets, &scope, &params.build)?, &plan);
        let mut solved = st.solve(step, &w, &model);
        let infeasible = matches!(&solved, Err(Error::Rolling { message, .. }) if message.starts_with("no solution (infeasible)"));
        if params.build.buffers && infeasible {
            // the frozen past can leave no room for the buffers; retry on the original bounds
            log::warn!("rolling step {step} infeasible with buffers, retrying without");
            let unbuffered = BuildOptions {
                buffers: false,
                ..params.build.clone()
            };
            model = idle_start(inst, &build_scoped(inst, &st.sets, &scope, &unbuffered)?, &plan);
            solved = st.solve(step, &w, &model);
        }
        let (r, entry) = solved?;
        let mut step_plan = FlowPlan::empty(inst);
        fill_plan(&mut step_plan, &model, &r.values);
        for t in w.start as usize..w.freeze_end as usize {
            for s in 0..inst.barges.len() {
                plan.gamma[s][t] = step_plan.gamma[s][t];
                for k in 0..inst.tanks.len() {
                    plan.y_in[s][k][t] = step_plan.y_in[s][k][t];
                }
            }
            for k in 0..inst.tanks.len() {
                plan.y_out[k][t] = step_plan.y_out[k][t];
                plan.sigma[k][t] = step_plan.sigma[k][t];
            }
        }
        plan.settle(inst);
        out.steps.push(entry);
        out.binaries.push(binaries_of(&model, &r));
        out.accumulated.push(plan.clone());
        out.frozen_until.push(w.freeze_end);
    }
    check_counts(inst, &plan)?;
    out.plan = plan;
    Ok(out)
}

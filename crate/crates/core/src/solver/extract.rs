use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{MilpModel, Method, VarKey};
use crate::sim::FlowPlan;

use super::SolveResult;

/// Turns solver values into a horizon-wide flow plan.
///
/// Binaries are rounded at 0.5; rounding that breaks a counting rule is an
/// error. Columns absent from the model read as zero. Unused supply and
/// missed demand are recomputed from the flows.
pub fn extract_flow_plan(inst: &Instance, model: &MilpModel, result: &SolveResult) -> Result<FlowPlan> {
    if !result.has_solution() && !model.vars.is_empty() {
        return Err(Error::Plan(format!("solve ended with status {} and no values", result.status.as_str())));
    }
    let mut plan = FlowPlan::empty(inst);
    fill_plan(&mut plan, model, &result.values);
    plan.settle(inst);
    check_counts(inst, &plan)?;
    Ok(plan)
}

/// Copies the values of every column of `model` into `plan`.
pub(crate) fn fill_plan(plan: &mut FlowPlan, model: &MilpModel, values: &[f64]) {
    for (var, &x) in model.vars.iter().zip(values) {
        match var.key {
            VarKey::YIn { s, k, t } => plan.y_in[s as usize][k as usize][t as usize] = x.max(0.0),
            VarKey::YOut { k, t } => plan.y_out[k as usize][t as usize] = x.max(0.0),
            VarKey::Gamma { s, t } => plan.gamma[s as usize][t as usize] = u8::from(x >= 0.5),
            VarKey::Sigma { k, t } => plan.sigma[k as usize][t as usize] = u8::from(x >= 0.5),
            _ => {}
        }
    }
}

/// Per-barge and per-day unload counts and the first-to-last unload gap.
pub(crate) fn check_counts(inst: &Instance, plan: &FlowPlan) -> Result<()> {
    let ops = &inst.ops;
    for (s, days) in plan.gamma.iter().enumerate() {
        let used: Vec<usize> = days.iter().enumerate().filter(|(_, &g)| g == 1).map(|(t, _)| t).collect();
        if used.len() > ops.max_unloads_per_barge as usize {
            return Err(Error::Plan(format!(
                "barge {} unloads on {} days, limit {}",
                inst.barges[s].id,
                used.len(),
                ops.max_unloads_per_barge
            )));
        }
        if let (Some(a), Some(z)) = (used.first(), used.last()) {
            if z - a > ops.max_unload_gap as usize {
                return Err(Error::Plan(format!(
                    "barge {} unloads {} days apart, limit {}",
                    inst.barges[s].id,
                    z - a,
                    ops.max_unload_gap
                )));
            }
        }
    }
    for t in 0..plan.horizon as usize {
        let n = plan.gamma.iter().filter(|g| g[t] == 1).count();
        if n > ops.max_unloads_per_day as usize {
            return Err(Error::Plan(format!(
                "{n} barges unload on day {t}, limit {}",
                ops.max_unloads_per_day
            )));
        }
    }
    Ok(())
}

/// Tank specs implied by the digits: the selected grid point plus the cell
/// midpoint (center model) or the residual (McCormick model), `[tank][spec][day]`.
pub fn decoded_specs(model: &MilpModel, result: &SolveResult) -> Vec<Vec<Vec<Option<f64>>>> {
    let plans = &model.meta.plans;
    let h = model.meta.end as usize;
    let center = model.meta.method == Some(Method::Center);
    let mut out: Vec<Vec<Vec<Option<f64>>>> =
        plans.iter().map(|qs| vec![vec![None; h]; qs.len()]).collect();
    if !result.has_solution() {
        return out;
    }
    for (k, qs) in plans.iter().enumerate() {
        for (q, p) in qs.iter().enumerate() {
            for t in model.meta.start..model.meta.end {
                let (k32, q32) = (k as u32, q as u32);
                if model.id(&VarKey::VMid { k: k32, t }).is_none() {
                    continue;
                }
                let mut cell = 0.0;
                for i in 0..p.n {
                    let a = result.value(model, &VarKey::Alpha { k: k32, q: q32, t, i }).unwrap_or(0.0);
                    cell += a.round() * p.weight(i);
                }
                let resid = if center {
                    p.eps / 2.0
                } else {
                    result.value(model, &VarKey::DeltaF { k: k32, q: q32, t }).unwrap_or(0.0)
                };
                out[k][q][t as usize] = Some(p.lambda0 + p.eps * cell + resid);
            }
        }
    }
    out
}

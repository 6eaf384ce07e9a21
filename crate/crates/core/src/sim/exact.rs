use super::{FlowPlan, SimulationTrace};
use crate::discretization::DigitCode;
use crate::model::{Family, MilpModel, QcpModel, VarKey};

fn digit_code(m: &MilpModel, k: u32, q: u32, f: f64) -> Option<DigitCode> {
    let p = m.meta.plans.get(k as usize)?.get(q as usize)?;
    let slack = 1e-9 * (1.0 + p.hi.abs());
    if f < p.lo - slack || f > p.hi + slack {
        return None;
    }
    p.encode(f.clamp(p.lo, p.hi)).ok()
}

/// Value of one column implied by a plan and its trace, `None` when the plan
/// cannot supply it (spec outside the digit range).
fn column_value(m: &MilpModel, j: usize, plan: &FlowPlan, trace: &SimulationTrace) -> Option<f64> {
    let var = &m.vars[j];
    let u = |i: u32| i as usize;
    let vol = |fam: Family, k: u32, t: u32| match fam {
        Family::Mid => trace.v_mid[u(k)][u(t)],
        Family::End => trace.v_end[u(k)][u(t)],
        Family::Out => plan.y_out[u(k)][u(t)],
    };
    let f = |k: u32, q: u32, t: u32| trace.f[u(k)][u(q)][u(t)];
    Some(match var.key {
        VarKey::Gamma { s, t } => f64::from(plan.gamma[u(s)][u(t)]),
        VarKey::Sigma { k, t } => f64::from(plan.sigma[u(k)][u(t)]),
        VarKey::YIn { s, k, t } => plan.y_in[u(s)][u(k)][u(t)],
        VarKey::YOut { k, t } => plan.y_out[u(k)][u(t)],
        VarKey::VMid { k, t } => trace.v_mid[u(k)][u(t)],
        VarKey::VEnd { k, t } => trace.v_end[u(k)][u(t)],
        VarKey::Spec { k, q, t } => f(k, q, t),
        VarKey::VfMid { k, q, t } => f(k, q, t) * trace.v_mid[u(k)][u(t)],
        VarKey::VfEnd { k, q, t } => f(k, q, t) * trace.v_end[u(k)][u(t)],
        VarKey::YfOut { k, q, t } => f(k, q, t) * plan.y_out[u(k)][u(t)],
        VarKey::Alpha { k, q, t, i } => f64::from(digit_code(m, k, q, f(k, q, t))?.digits[u(i)]),
        VarKey::DeltaF { k, q, t } => digit_code(m, k, q, f(k, q, t))?.delta,
        VarKey::XAlpha { fam, k, q, t, i } => {
            f64::from(digit_code(m, k, q, f(k, q, t))?.digits[u(i)]) * vol(fam, k, t)
        }
        VarKey::XDelta { fam, k, q, t } => digit_code(m, k, q, f(k, q, t))?.delta * vol(fam, k, t),
        // the column holds what the model's own days leave of its supply cap
        VarKey::VUnused { s } => {
            let days = u(m.meta.start)..u(m.meta.end).min(plan.horizon as usize);
            var.hi - plan.y_in[u(s)].iter().map(|row| row[days.clone()].iter().sum::<f64>()).sum::<f64>()
        }
        VarKey::Mis { t } => plan.mis[u(t)],
        VarKey::TFirst { s } | VarKey::TLast { s } => {
            let days: Vec<usize> = (0..plan.gamma[u(s)].len()).filter(|&t| plan.gamma[u(s)][t] == 1).collect();
            match (days.first(), days.last(), var.key) {
                (Some(&a), _, VarKey::TFirst { .. }) => a as f64,
                (_, Some(&b), VarKey::TLast { .. }) => b as f64,
                // unused barge: any common value inside both bounds
                _ => {
                    let first = m.id(&VarKey::TFirst { s }).map(|i| m.variable(i).hi);
                    let last = m.id(&VarKey::TLast { s }).map(|i| m.variable(i).lo);
                    match (first, last) {
                        (Some(f), Some(l)) => l.min(f).max(var.lo).min(var.hi),
                        _ => var.lo,
                    }
                }
            }
        }
    })
}

/// Column values of an exact (mixing or splitting) model implied by a plan and its trace.
pub fn exact_assignment(model: &QcpModel, plan: &FlowPlan, trace: &SimulationTrace) -> Vec<f64> {
    let m = &model.base;
    (0..m.vars.len()).map(|j| column_value(m, j, plan, trace).unwrap_or(0.0)).collect()
}

/// Every column of a model (exact or approximate) set from a plan and its
/// trace, or `None` if some column has no counterpart.
pub fn plan_columns(model: &MilpModel, plan: &FlowPlan, trace: &SimulationTrace) -> Option<Vec<(VarKey, f64)>> {
    (0..model.vars.len())
        .map(|j| column_value(model, j, plan, trace).map(|v| (model.vars[j].key, v)))
        .collect()
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FlowPlan, SimulationTrace};
use crate::error::Result;
use crate::instance::{derive_sets, Instance};

/// Deviations at or below this (tons or concentration points) are not violations.
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub tag: String,
    pub index: Vec<u32>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<ViolationRecord>,
    /// Largest original spec or ratio bound violation, in concentration units.
    pub worst_spec_deviation: f64,
    pub counts: BTreeMap<String, usize>,
    /// Unmet demand per day; soft, so never a violation.
    pub misses: Vec<f64>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, tag: &str) -> usize {
        self.counts.get(tag).copied().unwrap_or(0)
    }

    /// Number of spec and ratio bound violations.
    pub fn spec_violations(&self) -> usize {
        self.violations.iter().filter(|v| is_spec_tag(&v.tag)).count()
    }

    fn push(&mut self, tag: &str, index: Vec<u32>, magnitude: f64) {
        if magnitude > AUDIT_TOL {
            if is_spec_tag(tag) {
                self.worst_spec_deviation = self.worst_spec_deviation.max(magnitude);
            }
            *self.counts.entry(tag.to_string()).or_default() += 1;
            self.violations.push(ViolationRecord {
                tag: tag.to_string(),
                index,
                magnitude,
            });
        }
    }
}

fn is_spec_tag(tag: &str) -> bool {
    tag.starts_with("feed_spec") || tag.starts_with("feed_ratio")
}

/// Checks a simulated plan against the original, unbuffered requirements.
pub fn audit(inst: &Instance, trace: &SimulationTrace, plan: &FlowPlan) -> Result<FeasibilityReport> {
    plan.check_shape(inst)?;
    let sets = derive_sets(inst)?;
    let h = inst.ops.horizon;
    let mut rep = FeasibilityReport {
        misses: plan.mis.clone(),
        ..Default::default()
    };

    for (k, tank) in inst.tanks.iter().enumerate() {
        let k32 = k as u32;
        for t in 0..h as usize {
            for v in [trace.v_mid[k][t], trace.v_end[k][t]] {
                rep.push("tank_min", vec![k32, t as u32], tank.v_min - v);
                rep.push("tank_max", vec![k32, t as u32], v - tank.v_max);
            }
        }
    }

    for (s, barge) in inst.barges.iter().enumerate() {
        let s32 = s as u32;
        let total: f64 = plan.y_in[s].iter().flatten().sum();
        rep.push("supply_total", vec![s32], total - barge.volume);
        let mut days = Vec::new();
        for t in 0..h {
            let tu = t as usize;
            let day: f64 = (0..inst.tanks.len()).map(|k| plan.y_in[s][k][tu]).sum();
            for k in 0..inst.tanks.len() {
                let y = plan.y_in[s][k][tu];
                if !sets.in_window(s, t) || !sets.barge_tanks[s].contains(&k) {
                    rep.push("unload_window", vec![s32, k as u32, t], y);
                } else if plan.gamma[s][tu] == 0 {
                    rep.push("unload_link", vec![s32, k as u32, t], y);
                }
            }
            if plan.gamma[s][tu] == 1 {
                days.push(t);
                rep.push(
                    "min_unload",
                    vec![s32, t],
                    inst.ops.min_daily_unload_pct * barge.volume - day,
                );
            }
        }
        let count = days.len() as f64;
        rep.push(
            "unloads_per_barge",
            vec![s32],
            count - f64::from(inst.ops.max_unloads_per_barge),
        );
        if let (Some(a), Some(b)) = (days.first(), days.last()) {
            rep.push("unload_gap", vec![s32], f64::from(b - a) - f64::from(inst.ops.max_unload_gap));
        }
    }
    for t in 0..h as usize {
        let n = plan.gamma.iter().filter(|g| g[t] == 1).count() as f64;
        rep.push("unloads_per_day", vec![t as u32], n - f64::from(inst.ops.max_unloads_per_day));
    }

    for t in 0..h {
        let tu = t as usize;
        let d = sets.demand[tu];
        let fed = trace.feed_volume[tu];
        rep.push("demand", vec![t], fed - d);
        for (k, tank) in inst.tanks.iter().enumerate() {
            let y = plan.y_out[k][tu];
            let k32 = k as u32;
            if plan.sigma[k][tu] == 1 {
                rep.push("feed_share_lo", vec![k32, t], tank.min_feed_pct * d - y);
            } else {
                rep.push("feed_share_hi", vec![k32, t], y);
            }
            if d > 0.0 {
                rep.push("feed_share_hi", vec![k32, t], y - d);
            }
        }
        let Some(r) = sets.run_of_day[tu] else { continue };
        let run = &inst.runs[r];
        if t > run.days[0] {
            for k in 0..inst.tanks.len() {
                let jump = (plan.y_out[k][tu] - plan.y_out[k][tu - 1]).abs();
                rep.push("constant_feed", vec![k as u32, t], jump);
            }
        }
        if fed <= 0.0 {
            continue;
        }
        for (q, b) in sets.run_spec_bounds[r].iter().enumerate() {
            let (Some((lo, hi)), Some(f)) = (*b, trace.feed_spec[q][tu]) else { continue };
            rep.push("feed_spec_lo", vec![q as u32, t], lo - f);
            rep.push("feed_spec_hi", vec![q as u32, t], f - hi);
        }
        for (j, rq) in sets.run_ratios[r].iter().enumerate() {
            let (Some(fn_), Some(fd)) = (trace.feed_spec[rq.num][tu], trace.feed_spec[rq.den][tu]) else {
                continue;
            };
            // multiplied through by the denominator
            rep.push("feed_ratio_lo", vec![j as u32, t], rq.lo * fd - fn_);
            rep.push("feed_ratio_hi", vec![j as u32, t], fn_ - rq.hi * fd);
        }
    }
    Ok(rep)
}

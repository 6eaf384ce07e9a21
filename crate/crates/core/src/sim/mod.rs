//! Exact forward simulation of a flow plan, feasibility audit against the
//! original requirements, the %loss metric, and a brute-force grid oracle.

mod audit;
mod exact;
mod oracle;
mod plan;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{derive_sets, Instance};

pub use audit::{audit, FeasibilityReport, ViolationRecord, AUDIT_TOL};
pub use exact::{exact_assignment, plan_columns};
pub use oracle::{grid_oracle, OracleResult};
pub use plan::FlowPlan;

/// Tank volumes and specs per day; inflow happens first, then complete mixing, then outflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    /// `[tank][day]`
    pub v_mid: Vec<Vec<f64>>,
    pub v_end: Vec<Vec<f64>>,
    /// Tank spec after mixing, `[tank][spec][day]`.
    pub f: Vec<Vec<Vec<f64>>>,
    /// Feed spec, `[spec][day]`; `None` on days without feed.
    pub feed_spec: Vec<Vec<Option<f64>>>,
    pub feed_volume: Vec<f64>,
}

/// Mixes `inflow` (volume, spec mass per spec) into a tank holding `v` at specs `f`.
/// Returns the new volume and specs; an empty tank keeps its previous specs.
pub(crate) fn mix(v: f64, f: &[f64], inflow: f64, mass: &[f64]) -> (f64, Vec<f64>) {
    let vmid = v + inflow;
    if vmid > 0.0 {
        let spec = f.iter().zip(mass).map(|(fq, m)| (m + fq * v) / vmid).collect();
        (vmid, spec)
    } else {
        (vmid, f.to_vec())
    }
}

pub fn simulate(inst: &Instance, plan: &FlowPlan) -> Result<SimulationTrace> {
    plan.check_shape(inst)?;
    let sets = derive_sets(inst)?;
    let h = inst.ops.horizon as usize;
    let nk = inst.tanks.len();
    let nq = sets.n_specs;
    for (s, b) in inst.barges.iter().enumerate() {
        let total: f64 = plan.y_in[s].iter().flatten().sum();
        if total > b.volume + 1e-6 {
            return Err(Error::Simulation(format!(
                "barge {} unloads {total} but carries {}",
                b.id, b.volume
            )));
        }
    }
    let mut tr = SimulationTrace {
        v_mid: vec![vec![0.0; h]; nk],
        v_end: vec![vec![0.0; h]; nk],
        f: vec![vec![vec![0.0; h]; nq]; nk],
        feed_spec: vec![vec![None; h]; nq],
        feed_volume: vec![0.0; h],
    };
    let mut v: Vec<f64> = inst.tanks.iter().map(|k| k.v_init).collect();
    let mut f = sets.tank_spec_init.clone();
    for t in 0..h {
        let mut feed_mass = vec![0.0; nq];
        let mut feed = 0.0;
        for k in 0..nk {
            let mut inflow = 0.0;
            let mut mass = vec![0.0; nq];
            for (s, ys) in plan.y_in.iter().enumerate() {
                let y = ys[k][t];
                if y != 0.0 {
                    inflow += y;
                    for q in 0..nq {
                        mass[q] += sets.barge_spec[s][q] * y;
                    }
                }
            }
            let (vmid, fk) = mix(v[k], &f[k], inflow, &mass);
            let out = plan.y_out[k][t];
            if out > 0.0 && vmid <= 0.0 {
                return Err(Error::Simulation(format!(
                    "tank {} feeds {out} on day {t} while empty",
                    inst.tanks[k].id
                )));
            }
            let vend = vmid - out;
            if vend < -1e-6 {
                return Err(Error::Simulation(format!(
                    "tank {} inventory would be {vend} on day {t}",
                    inst.tanks[k].id
                )));
            }
            tr.v_mid[k][t] = vmid;
            tr.v_end[k][t] = vend;
            for q in 0..nq {
                tr.f[k][q][t] = fk[q];
                feed_mass[q] += fk[q] * out;
            }
            feed += out;
            v[k] = vend;
            f[k] = fk;
        }
        tr.feed_volume[t] = feed;
        if feed > 0.0 {
            for q in 0..nq {
                tr.feed_spec[q][t] = Some(feed_mass[q] / feed);
            }
        }
    }
    Ok(tr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loss {
    pub val_target: f64,
    pub val_missed: f64,
    pub pct_loss: f64,
}

/// Share of attainable value (supply unloaded plus demand met) the plan fails to capture.
pub fn loss(inst: &Instance, plan: &FlowPlan) -> Result<Loss> {
    plan.check_shape(inst)?;
    let mut target = 0.0;
    let mut missed = 0.0;
    for (s, b) in inst.barges.iter().enumerate() {
        target += b.unload_penalty * b.volume;
        missed += b.unload_penalty * plan.v_unused[s];
    }
    for run in &inst.runs {
        for t in run.days[0]..=run.days[1] {
            target += run.miss_penalty * run.daily_demand;
            missed += run.miss_penalty * plan.mis[t as usize];
        }
    }
    if target == 0.0 {
        return Err(Error::Simulation("attainable value is zero".into()));
    }
    Ok(Loss {
        val_target: target,
        val_missed: missed,
        pct_loss: 100.0 * missed / target,
    })
}

/// Per-day CSV: tank volumes and specs, feed volume, feed specs, and feed ratios.
pub fn write_trace_csv(inst: &Instance, trace: &SimulationTrace, out: impl Write) -> Result<()> {
    let mut ratios: Vec<(usize, usize)> = Vec::new();
    for run in &inst.runs {
        for rb in &run.ratio_bounds {
            let pair = (
                inst.spec_index(&rb.num).expect("validated"),
                inst.spec_index(&rb.den).expect("validated"),
            );
            if !ratios.contains(&pair) {
                ratios.push(pair);
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["day".to_string()];
    for k in &inst.tanks {
        header.push(format!("{}_v_mid", k.id));
        header.push(format!("{}_v_end", k.id));
        for q in &inst.specs {
            header.push(format!("{}_{}", k.id, q.id));
        }
    }
    header.push("feed_volume".into());
    for q in &inst.specs {
        header.push(format!("feed_{}", q.id));
    }
    for &(a, b) in &ratios {
        header.push(format!("feed_{}/{}", inst.specs[a].id, inst.specs[b].id));
    }
    let csv_err = |e: csv::Error| Error::Simulation(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for t in 0..inst.ops.horizon as usize {
        let mut row = vec![t.to_string()];
        for k in 0..inst.tanks.len() {
            row.push(trace.v_mid[k][t].to_string());
            row.push(trace.v_end[k][t].to_string());
            for q in 0..inst.specs.len() {
                row.push(trace.f[k][q][t].to_string());
            }
        }
        row.push(trace.feed_volume[t].to_string());
        for q in 0..inst.specs.len() {
            row.push(opt(trace.feed_spec[q][t]));
        }
        for &(a, b) in &ratios {
            let r = match (trace.feed_spec[a][t], trace.feed_spec[b][t]) {
                (Some(x), Some(y)) if y != 0.0 => Some(x / y),
                _ => None,
            };
            row.push(opt(r));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Simulation(format!("csv: {e}")))?;
    Ok(())
}

pub fn write_trace_json(trace: &SimulationTrace, path: &Path) -> Result<()> {
    let text = serde_json::to_string(trace).expect("trace serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::synth;
    use approx::assert_relative_eq;

    #[test]
    fn mixing_examples() {
        assert_eq!(mix(0.0, &[0.0], 100.0, &[5000.0]).1, vec![50.0]);
        assert_eq!(mix(100.0, &[10.0], 100.0, &[2000.0]).1, vec![15.0]);
        let (v, f) = mix(1179.0, &[10.0], 1240.0, &[1240.0 * 20.0]);
        assert_eq!(v, 2419.0);
        assert_relative_eq!(f[0], 36590.0 / 2419.0, max_relative = 1e-15);
        assert_relative_eq!(f[0], 15.126085159156676, max_relative = 1e-12);
        // nothing in, nothing held: previous spec carries over
        assert_eq!(mix(0.0, &[42.0], 0.0, &[0.0]).1, vec![42.0]);
    }

    #[test]
    fn loss_examples() {
        let inst = synth::reference_three_tank();
        let mut plan = FlowPlan::empty(&inst);
        let l = loss(&inst, &plan).unwrap();
        assert_relative_eq!(l.pct_loss, 100.0, max_relative = 1e-12);
        for s in 0..inst.barges.len() {
            plan.v_unused[s] = 0.0;
        }
        plan.mis.iter_mut().for_each(|m| *m = 0.0);
        assert_eq!(loss(&inst, &plan).unwrap().pct_loss, 0.0);
    }

    #[test]
    fn zero_target_rejected() {
        let mut inst = synth::toy();
        inst.barges[0].unload_penalty = 0.0;
        inst.runs[0].miss_penalty = 0.0;
        let plan = FlowPlan::empty(&inst);
        assert!(loss(&inst, &plan).is_err());
    }

    #[test]
    fn feed_from_empty_tank_rejected() {
        let mut inst = synth::toy();
        inst.tanks[0].v_init = 0.0;
        inst.tanks[0].v_min = 0.0;
        let mut plan = FlowPlan::empty(&inst);
        plan.y_out[0][1] = 10.0;
        assert!(simulate(&inst, &plan).is_err());
    }
}

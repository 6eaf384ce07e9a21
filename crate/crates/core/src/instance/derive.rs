use std::collections::BTreeSet;

use super::{validate_instance, Instance};
use crate::error::{Error, Result};

/// A ratio requirement `lo <= f[num] / f[den] <= hi` on the feed of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReq {
    pub num: usize,
    pub den: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Index-based view of an instance: adjacency, availability, and per-day data.
#[derive(Debug, Clone)]
pub struct DerivedSets {
    pub horizon: u32,
    pub n_specs: usize,
    /// Barges available on each day.
    pub available: Vec<Vec<usize>>,
    /// Inclusive unload window per barge.
    pub windows: Vec<(u32, u32)>,
    /// Tanks each barge may unload into.
    pub barge_tanks: Vec<Vec<usize>>,
    /// Barges allowed into each tank.
    pub tank_barges: Vec<Vec<usize>>,
    /// Days with positive demand.
    pub demand_days: BTreeSet<u32>,
    pub run_of_day: Vec<Option<usize>>,
    pub demand: Vec<f64>,
    pub miss_penalty: Vec<f64>,
    /// `[barge][spec]`
    pub barge_spec: Vec<Vec<f64>>,
    /// `[tank][spec]`
    pub tank_spec_init: Vec<Vec<f64>>,
    /// `[run][spec]`, `None` when unconstrained.
    pub run_spec_bounds: Vec<Vec<Option<(f64, f64)>>>,
    pub run_ratios: Vec<Vec<RatioReq>>,
}

impl DerivedSets {
    pub fn in_window(&self, s: usize, t: u32) -> bool {
        let (a, b) = self.windows[s];
        a <= t && t <= b
    }
}

pub fn derive_sets(inst: &Instance) -> Result<DerivedSets> {
    let rep = validate_instance(inst);
    if !rep.is_valid() {
        return Err(Error::InvalidInstance(rep.to_string()));
    }
    let h = inst.ops.horizon;
    let nq = inst.specs.len();

    let windows: Vec<(u32, u32)> = inst.barges.iter().map(|b| (b.window[0], b.window[1])).collect();
    let mut available = vec![Vec::new(); h as usize];
    for (s, &(a, b)) in windows.iter().enumerate() {
        for t in a..=b {
            available[t as usize].push(s);
        }
    }

    let barge_tanks: Vec<Vec<usize>> = inst
        .barges
        .iter()
        .map(|b| {
            let mut ks: Vec<usize> =
                b.allowed_tanks.iter().filter_map(|id| inst.tank_index(id)).collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        })
        .collect();
    let mut tank_barges = vec![Vec::new(); inst.tanks.len()];
    for (s, ks) in barge_tanks.iter().enumerate() {
        for &k in ks {
            tank_barges[k].push(s);
        }
    }

    let mut run_of_day = vec![None; h as usize];
    let mut demand = vec![0.0; h as usize];
    let mut miss_penalty = vec![0.0; h as usize];
    let mut demand_days = BTreeSet::new();
    for (r, run) in inst.runs.iter().enumerate() {
        for t in run.days[0]..=run.days[1] {
            run_of_day[t as usize] = Some(r);
            demand[t as usize] = run.daily_demand;
            miss_penalty[t as usize] = run.miss_penalty;
            demand_days.insert(t);
        }
    }

    let spec_vec = |m: &std::collections::BTreeMap<String, f64>| -> Vec<f64> {
        inst.specs.iter().map(|q| m[&q.id]).collect()
    };
    let barge_spec = inst.barges.iter().map(|b| spec_vec(&b.specs)).collect();
    let tank_spec_init = inst.tanks.iter().map(|k| spec_vec(&k.specs_init)).collect();

    let run_spec_bounds = inst
        .runs
        .iter()
        .map(|r| {
            inst.specs
                .iter()
                .map(|q| r.spec_bounds.get(&q.id).map(|b| (b[0], b[1])))
                .collect()
        })
        .collect();
    let run_ratios = inst
        .runs
        .iter()
        .map(|r| {
            r.ratio_bounds
                .iter()
                .map(|rb| RatioReq {
                    num: inst.spec_index(&rb.num).expect("validated"),
                    den: inst.spec_index(&rb.den).expect("validated"),
                    lo: rb.bounds[0],
                    hi: rb.bounds[1],
                })
                .collect()
        })
        .collect();

    Ok(DerivedSets {
        horizon: h,
        n_specs: nq,
        available,
        windows,
        barge_tanks,
        tank_barges,
        demand_days,
        run_of_day,
        demand,
        miss_penalty,
        barge_spec,
        tank_spec_init,
        run_spec_bounds,
        run_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::synth;

    #[test]
    fn barge_available_inside_window() {
        let mut inst = synth::toy();
        inst.ops.horizon = 20;
        inst.barges[0].window = [4, 12];
        let d = derive_sets(&inst).unwrap();
        assert!(d.available[4].contains(&0));
        assert!(d.available[12].contains(&0));
        assert!(!d.available[13].contains(&0));
        assert!(d.available[3].is_empty());
    }

    #[test]
    fn demand_days_are_union_of_runs() {
        let mut inst = synth::toy();
        inst.ops.horizon = 10;
        let base = inst.runs[0].clone();
        inst.runs = vec![
            crate::instance::Run { id: "a".into(), days: [0, 4], ..base.clone() },
            crate::instance::Run { id: "b".into(), days: [5, 6], ..base },
        ];
        let d = derive_sets(&inst).unwrap();
        assert_eq!(d.demand_days.iter().copied().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(d.run_of_day[6], Some(1));
        assert_eq!(d.run_of_day[7], None);
        assert_eq!(d.demand[7], 0.0);
    }
}

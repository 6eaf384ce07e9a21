#![allow(dead_code)]

use std::collections::BTreeMap;

use blendplan::instance::{derive_sets, Barge, Instance, OpsParams, RatioBound, Run, SpecDef, Tank};
use blendplan::sim::FlowPlan;
use rand::Rng;

fn specs(s1: f64, s2: f64) -> BTreeMap<String, f64> {
    [("S1".to_string(), s1), ("S2".to_string(), s2)].into_iter().collect()
}

fn barge(id: &str, volume: f64, s1: f64, s2: f64, window: [u32; 2], tanks: &[&str]) -> Barge {
    Barge {
        id: id.into(),
        volume,
        specs: specs(s1, s2),
        window,
        unload_penalty: 1000.0,
        allowed_tanks: tanks.iter().map(|t| t.to_string()).collect(),
    }
}

/// Two tanks, two specs with a ratio bound, six barges, one run on days 1..=3.
/// Barges b4..b6 exist only to push specs and ratios out of bounds.
pub fn lab() -> Instance {
    let tank = |id: &str, v_init: f64, s1: f64| Tank {
        id: id.into(),
        v_max: 300.0,
        v_min: 20.0,
        v_init,
        specs_init: specs(s1, s1 / 2.0),
        min_feed_pct: 0.1,
    };
    Instance {
        schema: "blendplan-instance/1".into(),
        specs: ["S1", "S2"]
            .iter()
            .map(|id| SpecDef {
                id: id.to_string(),
                unit: "pct".into(),
            })
            .collect(),
        barges: vec![
            barge("b1", 100.0, 60.0, 30.0, [0, 3], &["T1", "T2"]),
            barge("b2", 100.0, 45.0, 22.5, [0, 3], &["T2"]),
            barge("b3", 50.0, 60.0, 15.0, [4, 6], &["T1"]),
            barge("b4", 100.0, 90.0, 45.0, [0, 3], &["T1"]),
            barge("b5", 100.0, 56.0, 50.0, [0, 3], &["T1"]),
            barge("b6", 100.0, 60.0, 10.0, [0, 3], &["T1"]),
        ],
        tanks: vec![tank("T1", 100.0, 40.0), tank("T2", 150.0, 50.0)],
        runs: vec![Run {
            id: "r1".into(),
            days: [1, 3],
            daily_demand: 40.0,
            spec_bounds: [("S1".to_string(), [45.0, 55.0]), ("S2".to_string(), [10.0, 40.0])]
                .into_iter()
                .collect(),
            ratio_bounds: vec![RatioBound {
                num: "S1".into(),
                den: "S2".into(),
                bounds: [1.5, 2.5],
            }],
            miss_penalty: 3000.0,
        }],
        ops: OpsParams {
            max_unloads_per_day: 1,
            max_unloads_per_barge: 2,
            max_unload_gap: 2,
            min_daily_unload_pct: 0.1,
            horizon: 8,
        },
    }
}

/// Sets an unload and its indicator.
pub fn unload(p: &mut FlowPlan, s: usize, k: usize, t: usize, v: f64) {
    p.y_in[s][k][t] = v;
    p.gamma[s][t] = 1;
}

/// Sets a tank feed and its indicator on each listed day.
pub fn feed(p: &mut FlowPlan, k: usize, days: &[usize], v: f64) {
    for &t in days {
        p.y_out[k][t] = v;
        p.sigma[k][t] = 1;
    }
}

/// Feasible plan on [`lab`]: b1 into T1 on days 0 and 1, T1 feeds the run alone.
pub fn lab_baseline(inst: &Instance) -> FlowPlan {
    let mut p = FlowPlan::empty(inst);
    unload(&mut p, 0, 0, 0, 50.0);
    unload(&mut p, 0, 0, 1, 50.0);
    feed(&mut p, 0, &[1, 2, 3], 40.0);
    p.settle(inst);
    p
}

/// Random plan that the simulator accepts: unloads inside windows within the
/// remaining barge volume, feeds within the tank content and the daily demand.
/// Requirements such as spec bounds and unload counts are not respected.
pub fn random_plan(inst: &Instance, rng: &mut impl Rng) -> FlowPlan {
    let sets = derive_sets(inst).unwrap();
    let h = inst.ops.horizon as usize;
    let mut p = FlowPlan::empty(inst);
    let mut left: Vec<f64> = inst.barges.iter().map(|b| b.volume).collect();
    let mut vol: Vec<f64> = inst.tanks.iter().map(|k| k.v_init).collect();
    for t in 0..h {
        for s in 0..inst.barges.len() {
            if !sets.in_window(s, t as u32) || left[s] <= 0.0 || !rng.gen_bool(0.5) {
                continue;
            }
            let k = sets.barge_tanks[s][rng.gen_range(0..sets.barge_tanks[s].len())];
            let v = if rng.gen_bool(0.3) { left[s] } else { (left[s] * rng.gen::<f64>()).round() };
            if v > 0.0 {
                p.y_in[s][k][t] += v;
                p.gamma[s][t] = 1;
                left[s] -= v;
                vol[k] += v;
            }
        }
        let mut room = sets.demand[t];
        for k in 0..inst.tanks.len() {
            if room <= 0.0 || !rng.gen_bool(0.6) {
                continue;
            }
            let v = (vol[k].min(room) * rng.gen::<f64>()).floor();
            if v > 0.0 {
                p.y_out[k][t] = v;
                p.sigma[k][t] = 1;
                vol[k] -= v;
                room -= v;
            }
        }
    }
    p.settle(inst);
    p
}

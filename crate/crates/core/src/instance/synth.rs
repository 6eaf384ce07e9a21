//! Built-in instances: the three-tank reference data set and seeded generators
//! for tiny and small test instances.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Barge, Instance, OpsParams, RatioBound, Run, SpecDef, Tank, SCHEMA};

fn specs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn spec_defs(ids: &[&str]) -> Vec<SpecDef> {
    ids.iter()
        .map(|id| SpecDef {
            id: id.to_string(),
            unit: "pct".into(),
        })
        .collect()
}

/// Smallest useful instance: one tank, one spec, one barge, one run.
pub fn toy() -> Instance {
    Instance {
        schema: SCHEMA.into(),
        specs: spec_defs(&["S1"]),
        barges: vec![Barge {
            id: "b1".into(),
            volume: 100.0,
            specs: specs(&[("S1", 60.0)]),
            window: [0, 2],
            unload_penalty: 1000.0,
            allowed_tanks: vec!["T1".into()],
        }],
        tanks: vec![Tank {
            id: "T1".into(),
            v_max: 300.0,
            v_min: 20.0,
            v_init: 100.0,
            specs_init: specs(&[("S1", 40.0)]),
            min_feed_pct: 0.1,
        }],
        runs: vec![Run {
            id: "r1".into(),
            days: [1, 3],
            daily_demand: 50.0,
            spec_bounds: [("S1".to_string(), [35.0, 65.0])].into_iter().collect(),
            ratio_bounds: vec![],
            miss_penalty: 3000.0,
        }],
        ops: OpsParams {
            max_unloads_per_day: 2,
            max_unloads_per_barge: 2,
            max_unload_gap: 7,
            min_daily_unload_pct: 0.1,
            horizon: 5,
        },
    }
}

/// The three storage tanks of the reference plant (capacity, minimum).
pub fn reference_tanks() -> Vec<Tank> {
    let mk = |id: &str, v_max: f64, v_min: f64, v_init: f64, s1: f64, s2: f64| Tank {
        id: id.into(),
        v_max,
        v_min,
        v_init,
        specs_init: specs(&[("S1", s1), ("S2", s2)]),
        min_feed_pct: 0.10,
    };
    vec![
        mk("T1", 1179.0, 158.0, 600.0, 50.0, 25.0),
        mk("T2", 2948.0, 272.0, 1400.0, 49.0, 24.0),
        mk("T3", 1225.0, 136.0, 500.0, 51.0, 26.0),
    ]
}

/// Barge types: (volume, penalty per ton left on board, allowed tanks).
pub const BARGE_TYPES: [(f64, f64, &[&str]); 4] = [
    (1240.0, 1000.0, &["T1", "T2"]),
    (1360.0, 800.0, &["T2", "T3"]),
    (1182.0, 800.0, &["T1", "T3"]),
    (1360.0, 1000.0, &["T1", "T2", "T3"]),
];

const SUPPLY_SPECS: [(f64, f64); 4] = [(44.0, 22.0), (56.0, 27.0), (48.0, 28.0), (52.0, 23.0)];

fn barge(id: String, kind: usize, window: [u32; 2], quality: usize) -> Barge {
    let (volume, penalty, tanks) = BARGE_TYPES[kind % 4];
    let (s1, s2) = SUPPLY_SPECS[quality % 4];
    Barge {
        id,
        volume,
        specs: specs(&[("S1", s1), ("S2", s2)]),
        window,
        unload_penalty: penalty,
        allowed_tanks: tanks.iter().map(|s| s.to_string()).collect(),
    }
}

fn run(id: String, days: [u32; 2], demand: f64, ratio: [f64; 2]) -> Run {
    Run {
        id,
        days,
        daily_demand: demand,
        spec_bounds: [
            ("S1".to_string(), [45.0, 55.0]),
            ("S2".to_string(), [21.0, 29.0]),
        ]
        .into_iter()
        .collect(),
        ratio_bounds: vec![RatioBound {
            num: "S1".into(),
            den: "S2".into(),
            bounds: ratio,
        }],
        miss_penalty: 3000.0,
    }
}

fn reference_ops(horizon: u32) -> OpsParams {
    OpsParams {
        max_unloads_per_day: 2,
        max_unloads_per_barge: 2,
        max_unload_gap: 7,
        min_daily_unload_pct: 0.10,
        horizon,
    }
}

/// Thirty-day, three-tank, two-spec instance with one ratio requirement.
pub fn reference_three_tank() -> Instance {
    let barges = vec![
        barge("b1".into(), 0, [0, 5], 0),
        barge("b2".into(), 1, [4, 12], 1),
        barge("b3".into(), 2, [14, 24], 2),
        barge("b4".into(), 3, [18, 29], 3),
        barge("b5".into(), 0, [8, 20], 1),
    ];
    let runs = vec![
        run("r1".into(), [0, 3], 130.0, [1.7, 2.3]),
        run("r2".into(), [5, 5], 110.0, [1.8, 2.4]),
        run("r3".into(), [7, 13], 140.0, [1.7, 2.2]),
        run("r4".into(), [18, 24], 150.0, [1.8, 2.3]),
        run("r5".into(), [25, 29], 120.0, [1.7, 2.4]),
    ];
    Instance {
        schema: SCHEMA.into(),
        specs: spec_defs(&["S1", "S2"]),
        barges,
        tanks: reference_tanks(),
        runs,
        ops: reference_ops(30),
    }
}

/// 119-day base data with eleven arrivals; extends periodically to a year.
pub fn reference_119_day() -> Instance {
    let starts = [3u32, 12, 22, 31, 41, 52, 62, 73, 84, 95, 104];
    let barges = starts
        .iter()
        .enumerate()
        .map(|(i, &a)| barge(format!("b{}", i + 1), i, [a, a + 9], i * 3 + 1))
        .collect();
    let spans: [([u32; 2], f64, [f64; 2]); 9] = [
        ([0, 11], 125.0, [1.7, 2.3]),
        ([13, 24], 120.0, [1.8, 2.4]),
        ([25, 36], 130.0, [1.7, 2.2]),
        ([39, 52], 115.0, [1.8, 2.3]),
        ([53, 61], 135.0, [1.7, 2.4]),
        ([64, 77], 120.0, [1.8, 2.3]),
        ([78, 90], 125.0, [1.7, 2.3]),
        ([92, 104], 120.0, [1.8, 2.4]),
        ([106, 118], 110.0, [1.7, 2.3]),
    ];
    let runs = spans
        .iter()
        .enumerate()
        .map(|(i, &(days, d, ratio))| run(format!("r{}", i + 1), days, d, ratio))
        .collect();
    Instance {
        schema: SCHEMA.into(),
        specs: spec_defs(&["S1", "S2"]),
        barges,
        tanks: reference_tanks(),
        runs,
        ops: reference_ops(119),
    }
}

/// Tiny random instance: one spec, one or two tanks, one or two barges each
/// tied to a single tank, horizon 3..=5. Small enough for brute-force search.
pub fn tiny(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h: u32 = rng.gen_range(3..=5);
    let n_tanks = rng.gen_range(1..=2usize);
    let n_barges = rng.gen_range(1..=2usize);
    let tanks: Vec<Tank> = (0..n_tanks)
        .map(|k| {
            let v_max = 200.0;
            let v_min = 20.0;
            Tank {
                id: format!("T{}", k + 1),
                v_max,
                v_min,
                v_init: f64::from(rng.gen_range(4..=8u32)) * 10.0,
                specs_init: specs(&[("S1", f64::from(rng.gen_range(40..=60u32)))]),
                min_feed_pct: 0.2,
            }
        })
        .collect();
    let barges: Vec<Barge> = (0..n_barges)
        .map(|s| {
            let a = rng.gen_range(0..h - 1);
            let b = rng.gen_range(a..h);
            Barge {
                id: format!("b{}", s + 1),
                volume: f64::from(rng.gen_range(6..=10u32)) * 10.0,
                specs: specs(&[("S1", f64::from(rng.gen_range(30..=70u32)))]),
                window: [a, b],
                unload_penalty: if rng.gen_bool(0.5) { 1000.0 } else { 800.0 },
                allowed_tanks: vec![format!("T{}", 1 + s % n_tanks)],
            }
        })
        .collect();
    let lo = f64::from(rng.gen_range(42..=48u32));
    let width = f64::from(rng.gen_range(6..=12u32));
    let first = rng.gen_range(0..h);
    let mut runs = vec![Run {
        id: "r1".into(),
        days: [first, (first + rng.gen_range(0..2)).min(h - 1)],
        daily_demand: f64::from(rng.gen_range(3..=6u32)) * 10.0,
        spec_bounds: [("S1".to_string(), [lo, lo + width])].into_iter().collect(),
        ratio_bounds: vec![],
        miss_penalty: 3000.0,
    }];
    let next = runs[0].days[1] + 1;
    if next < h && rng.gen_bool(0.5) {
        let lo = f64::from(rng.gen_range(42..=48u32));
        runs.push(Run {
            id: "r2".into(),
            days: [next, h - 1],
            daily_demand: f64::from(rng.gen_range(3..=6u32)) * 10.0,
            spec_bounds: [("S1".to_string(), [lo, lo + width])].into_iter().collect(),
            ratio_bounds: vec![],
            miss_penalty: 3000.0,
        });
    }
    Instance {
        schema: SCHEMA.into(),
        specs: spec_defs(&["S1"]),
        barges,
        tanks,
        runs,
        ops: OpsParams {
            max_unloads_per_day: 2,
            max_unloads_per_barge: 2,
            max_unload_gap: 2,
            min_daily_unload_pct: 0.2,
            horizon: h,
        },
    }
}

/// Small random instance on the reference tanks with the given horizon:
/// a barge roughly every ten days and back-to-back runs separated by short gaps.
pub fn small(seed: u64, horizon: u32) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut barges = Vec::new();
    let mut t = rng.gen_range(0..3u32);
    let mut i = 0usize;
    while t < horizon {
        let end = (t + rng.gen_range(4..=9)).min(horizon - 1);
        barges.push(barge(
            format!("b{}", i + 1),
            rng.gen_range(0..4),
            [t, end],
            rng.gen_range(0..4),
        ));
        i += 1;
        t += rng.gen_range(8..=12);
    }
    let mut runs = Vec::new();
    let mut t = 0u32;
    let mut r = 0usize;
    while t < horizon {
        let end = (t + rng.gen_range(2..=8)).min(horizon - 1);
        let demand = f64::from(rng.gen_range(10..=15u32)) * 10.0;
        let lo = [1.6, 1.7, 1.8][rng.gen_range(0..3)];
        runs.push(run(format!("r{}", r + 1), [t, end], demand, [lo, lo + 0.6]));
        r += 1;
        t = end + 1 + rng.gen_range(0..=2);
    }
    Instance {
        schema: SCHEMA.into(),
        specs: spec_defs(&["S1", "S2"]),
        barges,
        tanks: reference_tanks(),
        runs,
        ops: reference_ops(horizon),
    }
}

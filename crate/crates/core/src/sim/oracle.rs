//! Brute-force search over flows on a volume grid, for tiny instances.

use serde::{Deserialize, Serialize};

use super::audit::AUDIT_TOL;
use super::{mix, FlowPlan};
use crate::error::{Error, Result};
use crate::instance::{derive_sets, DerivedSets, Instance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Penalty cost of the best plan found (same sense as the model objective).
    pub objective: f64,
    pub plan: FlowPlan,
    pub nodes: u64,
}

#[derive(Clone)]
struct State {
    v: Vec<f64>,
    f: Vec<Vec<f64>>,
    remaining: Vec<f64>,
    used: Vec<u32>,
    first: Vec<Option<u32>>,
    feed: Vec<f64>,
    cost: f64,
}

struct Search<'a> {
    inst: &'a Instance,
    sets: DerivedSets,
    step: f64,
    best: f64,
    best_plan: Option<FlowPlan>,
    work: FlowPlan,
    nodes: u64,
}

/// `0, step, 2 step, ...` up to `cap`, plus `cap` itself, largest first.
fn levels(cap: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0u32;
    while f64::from(i) * step < cap - 1e-9 {
        out.push(f64::from(i) * step);
        i += 1;
    }
    out.push(cap.max(0.0));
    out.reverse();
    out
}

/// All vectors with one entry per slot drawn from `choices[slot]`.
fn product(choices: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|p| {
                c.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

impl Search<'_> {
    fn can_unload(&self, st: &State, s: usize, t: u32) -> bool {
        self.sets.in_window(s, t)
            && st.remaining[s] > 1e-9
            && st.used[s] < self.inst.ops.max_unloads_per_barge
            && st.first[s].map_or(true, |f| t - f <= self.inst.ops.max_unload_gap)
    }

    /// Penalty already certain: misses so far plus volume on barges that can no longer unload.
    fn lower_bound(&self, st: &State, t: u32) -> f64 {
        let mut lb = st.cost;
        for (s, b) in self.inst.barges.iter().enumerate() {
            let later = (t..self.inst.ops.horizon).any(|u| self.can_unload(st, s, u));
            if !later {
                lb += b.unload_penalty * st.remaining[s];
            }
        }
        lb
    }

    fn feed_options(&self, st: &State, t: u32) -> Vec<Vec<f64>> {
        let nk = self.inst.tanks.len();
        let d = self.sets.demand[t as usize];
        let Some(r) = self.sets.run_of_day[t as usize] else {
            return vec![vec![0.0; nk]];
        };
        if t > self.inst.runs[r].days[0] {
            return vec![st.feed.clone()];
        }
        let per_tank: Vec<Vec<f64>> = self
            .inst
            .tanks
            .iter()
            .map(|k| {
                levels(d, self.step)
                    .into_iter()
                    .filter(|&y| y == 0.0 || y >= k.min_feed_pct * d - AUDIT_TOL)
                    .collect()
            })
            .collect();
        product(&per_tank)
            .into_iter()
            .filter(|y| y.iter().sum::<f64>() <= d + AUDIT_TOL)
            .collect()
    }

    /// Per-barge options for day `t`: `None` or a split over tanks.
    fn unload_options(&self, st: &State, s: usize, t: u32) -> Vec<Option<Vec<f64>>> {
        let mut out = vec![None];
        if !self.can_unload(st, s, t) {
            return out;
        }
        let rem = st.remaining[s];
        let min = self.inst.ops.min_daily_unload_pct * self.inst.barges[s].volume;
        let per_tank: Vec<Vec<f64>> = (0..self.inst.tanks.len())
            .map(|k| {
                if self.sets.barge_tanks[s].contains(&k) {
                    levels(rem, self.step)
                } else {
                    vec![0.0]
                }
            })
            .collect();
        for split in product(&per_tank) {
            let tot: f64 = split.iter().sum();
            if tot > 1e-9 && tot <= rem + 1e-9 && tot >= min - AUDIT_TOL {
                out.insert(out.len() - 1, Some(split));
            }
        }
        out
    }

    fn day(&mut self, t: u32, st: State) {
        self.nodes += 1;
        let h = self.inst.ops.horizon;
        if t == h {
            let end: f64 = self
                .inst
                .barges
                .iter()
                .zip(&st.remaining)
                .map(|(b, r)| b.unload_penalty * r)
                .sum();
            let cost = st.cost + end;
            if cost < self.best - 1e-9 {
                self.best = cost;
                let mut p = self.work.clone();
                p.settle(self.inst);
                self.best_plan = Some(p);
            }
            return;
        }
        if self.lower_bound(&st, t) >= self.best - 1e-9 {
            return;
        }
        let tu = t as usize;
        let ns = self.inst.barges.len();
        let per_barge: Vec<Vec<Option<Vec<f64>>>> = (0..ns).map(|s| self.unload_options(&st, s, t)).collect();
        let mut combos: Vec<Vec<Option<Vec<f64>>>> = vec![Vec::new()];
        for opts in &per_barge {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    opts.iter().map(move |o| {
                        let mut c = c.clone();
                        c.push(o.clone());
                        c
                    })
                })
                .filter(|c| {
                    c.iter().filter(|o| o.is_some()).count() as u32 <= self.inst.ops.max_unloads_per_day
                })
                .collect();
        }
        let feeds = self.feed_options(&st, t);
        for unload in &combos {
            for feed in &feeds {
                if let Some(next) = self.apply(&st, t, unload, feed) {
                    for (s, o) in unload.iter().enumerate() {
                        self.work.gamma[s][tu] = u8::from(o.is_some());
                        for k in 0..self.inst.tanks.len() {
                            self.work.y_in[s][k][tu] = o.as_ref().map_or(0.0, |v| v[k]);
                        }
                    }
                    for (k, &y) in feed.iter().enumerate() {
                        self.work.y_out[k][tu] = y;
                        self.work.sigma[k][tu] = u8::from(y > 0.0);
                    }
                    self.day(t + 1, next);
                }
            }
        }
    }

    /// One simulated day; `None` if any original requirement breaks.
    fn apply(&self, st: &State, t: u32, unload: &[Option<Vec<f64>>], feed: &[f64]) -> Option<State> {
        let tu = t as usize;
        let nq = self.sets.n_specs;
        let mut next = st.clone();
        let mut feed_mass = vec![0.0; nq];
        let fed: f64 = feed.iter().sum();
        for (k, tank) in self.inst.tanks.iter().enumerate() {
            let mut inflow = 0.0;
            let mut mass = vec![0.0; nq];
            for (s, o) in unload.iter().enumerate() {
                if let Some(split) = o {
                    let y = split[k];
                    if y != 0.0 {
                        inflow += y;
                        for q in 0..nq {
                            mass[q] += self.sets.barge_spec[s][q] * y;
                        }
                    }
                }
            }
            let (vmid, fk) = mix(st.v[k], &st.f[k], inflow, &mass);
            let vend = vmid - feed[k];
            if vmid > tank.v_max + AUDIT_TOL || vend < tank.v_min - AUDIT_TOL || vmid < tank.v_min - AUDIT_TOL {
                return None;
            }
            if feed[k] > 0.0 && vmid <= 0.0 {
                return None;
            }
            for q in 0..nq {
                feed_mass[q] += fk[q] * feed[k];
            }
            next.v[k] = vend;
            next.f[k] = fk;
        }
        if fed > 0.0 {
            let r = self.sets.run_of_day[tu]?;
            let fp: Vec<f64> = feed_mass.iter().map(|m| m / fed).collect();
            for (q, b) in self.sets.run_spec_bounds[r].iter().enumerate() {
                if let Some((lo, hi)) = *b {
                    if fp[q] < lo - AUDIT_TOL || fp[q] > hi + AUDIT_TOL {
                        return None;
                    }
                }
            }
            for rq in &self.sets.run_ratios[r] {
                let (a, b) = (fp[rq.num], fp[rq.den]);
                if rq.lo * b - a > AUDIT_TOL || a - rq.hi * b > AUDIT_TOL {
                    return None;
                }
            }
        }
        for (s, o) in unload.iter().enumerate() {
            if let Some(split) = o {
                next.remaining[s] = (next.remaining[s] - split.iter().sum::<f64>()).max(0.0);
                next.used[s] += 1;
                next.first[s].get_or_insert(t);
            }
        }
        next.feed = feed.to_vec();
        next.cost += self.sets.miss_penalty[tu] * (self.sets.demand[tu] - fed).max(0.0);
        Some(next)
    }
}

/// Best original-feasible plan with all flows on multiples of `grid_step`
/// (or a full remaining barge volume / full daily demand).
pub fn grid_oracle(inst: &Instance, grid_step: f64) -> Result<OracleResult> {
    if inst.barges.len() > 2 || inst.tanks.len() > 2 || inst.ops.horizon > 6 {
        return Err(Error::Config(
            "grid oracle needs at most 2 barges, 2 tanks and 6 days".into(),
        ));
    }
    if !(grid_step > 0.0) {
        return Err(Error::Config(format!("grid step must be positive, got {grid_step}")));
    }
    let sets = derive_sets(inst)?;
    let st = State {
        v: inst.tanks.iter().map(|k| k.v_init).collect(),
        f: sets.tank_spec_init.clone(),
        remaining: inst.barges.iter().map(|b| b.volume).collect(),
        used: vec![0; inst.barges.len()],
        first: vec![None; inst.barges.len()],
        feed: vec![0.0; inst.tanks.len()],
        cost: 0.0,
    };
    let mut search = Search {
        inst,
        sets,
        step: grid_step,
        best: f64::INFINITY,
        best_plan: None,
        work: FlowPlan::empty(inst),
        nodes: 0,
    };
    search.day(0, st);
    match search.best_plan {
        Some(plan) => Ok(OracleResult {
            objective: search.best,
            plan,
            nodes: search.nodes,
        }),
        None => Err(Error::Simulation("no feasible plan on the grid".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::synth;
    use crate::sim::{audit, simulate};

    #[test]
    fn levels_include_cap() {
        assert_eq!(levels(25.0, 10.0), vec![25.0, 20.0, 10.0, 0.0]);
        assert_eq!(levels(20.0, 10.0), vec![20.0, 10.0, 0.0]);
        assert_eq!(levels(0.0, 10.0), vec![0.0]);
    }

    #[test]
    fn oracle_plan_is_feasible() {
        let inst = synth::tiny(3);
        let r = grid_oracle(&inst, inst.barges[0].volume / 4.0).unwrap();
        let tr = simulate(&inst, &r.plan).unwrap();
        let rep = audit(&inst, &tr, &r.plan).unwrap();
        assert!(rep.is_feasible(), "{:?}", rep.violations);
        let l = crate::sim::loss(&inst, &r.plan).unwrap();
        let objective = l.val_missed;
        assert!((objective - r.objective).abs() <= 1e-6 * objective.max(1.0));
    }

    #[test]
    fn oracle_guard() {
        let inst = synth::reference_three_tank();
        assert!(grid_oracle(&inst, 10.0).is_err());
    }
}

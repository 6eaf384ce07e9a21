//! Dense two-phase simplex with Bland's rule plus depth-first branch and bound.
//! Meant for checking other backends on models with a few hundred entries.

use std::time::Instant;

use super::{Backend, SolveOptions, SolveResult, Status};
use crate::error::{Error, Result};
use crate::model::MilpModel;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    pub max_columns: usize,
    pub max_nodes: usize,
}

impl Default for ReferenceBackend {
    fn default() -> Self {
        ReferenceBackend {
            max_columns: 200,
            max_nodes: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cmp {
    Le,
    Ge,
    Eq,
}

enum LpOutcome {
    Optimal(Vec<f64>, f64),
    Infeasible,
    Unbounded,
}

/// `min c x` subject to rows and `0 <= x`.
fn simplex(n: usize, rows: &[(Vec<f64>, Cmp, f64)], c: &[f64]) -> LpOutcome {
    let m = rows.len();
    let mut kinds = Vec::with_capacity(m);
    let mut n_slack = 0;
    let mut n_art = 0;
    for (_, cmp, b) in rows {
        let cmp = match (*cmp, *b < 0.0) {
            (Cmp::Le, true) => Cmp::Ge,
            (Cmp::Ge, true) => Cmp::Le,
            (k, _) => k,
        };
        if cmp != Cmp::Eq {
            n_slack += 1;
        }
        if cmp != Cmp::Le {
            n_art += 1;
        }
        kinds.push(cmp);
    }
    let width = n + n_slack + n_art;
    let art0 = n + n_slack;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut si, mut ai) = (n, art0);
    for (i, (a, _, b)) in rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[j];
        }
        t[i][width] = sign * b;
        match kinds[i] {
            Cmp::Le => {
                t[i][si] = 1.0;
                basis[i] = si;
                si += 1;
            }
            Cmp::Ge => {
                t[i][si] = -1.0;
                si += 1;
                t[i][ai] = 1.0;
                basis[i] = ai;
                ai += 1;
            }
            Cmp::Eq => {
                t[i][ai] = 1.0;
                basis[i] = ai;
                ai += 1;
            }
        }
    }

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| -> bool {
        for _ in 0..100_000 {
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let r = cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
                if r < -TOL {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return true };
            let mut leave: Option<usize> = None;
            for i in 0..m {
                if t[i][j] > TOL {
                    let ratio = t[i][width] / t[i][j];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            let rl = t[l][width] / t[l][j];
                            ratio < rl - TOL || (ratio <= rl + TOL && basis[i] < basis[l])
                        }
                    };
                    if better {
                        leave = Some(i);
                    }
                }
            }
            let Some(p) = leave else { return false };
            pivot(t, p, j);
            basis[p] = j;
        }
        true
    };

    let mut c1 = vec![0.0; width];
    for x in c1.iter_mut().skip(art0) {
        *x = 1.0;
    }
    run(&mut t, &mut basis, &c1, width);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= art0).map(|i| t[i][width]).sum();
    if infeas > 1e-7 {
        return LpOutcome::Infeasible;
    }
    for i in 0..m {
        if basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|&j| t[i][j].abs() > 1e-9 && !basis.contains(&j)) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }
    let mut c2 = vec![0.0; width];
    c2[..n].copy_from_slice(c);
    if !run(&mut t, &mut basis, &c2, art0) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][width];
        }
    }
    let obj = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal(x, obj)
}

fn pivot(t: &mut [Vec<f64>], p: usize, j: usize) {
    let pv = t[p][j];
    for v in t[p].iter_mut() {
        *v /= pv;
    }
    let prow = t[p].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != p {
            let f = row[j];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&prow) {
                    *v -= f * pr;
                }
            }
        }
    }
}

/// LP relaxation of `model` with column bounds overridden.
fn relax(model: &MilpModel, lo: &[f64], hi: &[f64]) -> LpOutcome {
    let n = model.vars.len();
    let mut rows = Vec::new();
    for r in &model.rows {
        let mut a = vec![0.0; n];
        let mut shift = 0.0;
        for &(v, c) in &r.terms {
            a[v.index()] += c;
            shift += c * lo[v.index()];
        }
        if r.lo == r.hi {
            rows.push((a, Cmp::Eq, r.lo - shift));
            continue;
        }
        if r.lo.is_finite() {
            rows.push((a.clone(), Cmp::Ge, r.lo - shift));
        }
        if r.hi.is_finite() {
            rows.push((a, Cmp::Le, r.hi - shift));
        }
    }
    for j in 0..n {
        if hi[j].is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, Cmp::Le, hi[j] - lo[j]));
        }
    }
    let mut c = vec![0.0; n];
    let mut offset = 0.0;
    for &(v, k) in &model.objective {
        c[v.index()] += k;
        offset += k * lo[v.index()];
    }
    match simplex(n, &rows, &c) {
        LpOutcome::Optimal(x, obj) => {
            LpOutcome::Optimal(x.iter().zip(lo).map(|(a, b)| a + b).collect(), obj + offset)
        }
        other => other,
    }
}

impl Backend for ReferenceBackend {
    fn name(&self) -> &'static str {
        "reference"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<SolveResult> {
        opts.validate()?;
        if model.vars.len() > self.max_columns {
            return Err(Error::Solver(format!(
                "reference backend handles at most {} columns, model has {}",
                self.max_columns,
                model.vars.len()
            )));
        }
        if model.vars.iter().any(|v| !v.lo.is_finite()) {
            return Err(Error::Solver("reference backend needs finite lower bounds".into()));
        }
        let clock = Instant::now();
        let mut stack: Vec<(Vec<f64>, Vec<f64>, f64)> = vec![(
            model.vars.iter().map(|v| v.lo).collect(),
            model.vars.iter().map(|v| v.hi).collect(),
            f64::NEG_INFINITY,
        )];
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut nodes = 0usize;
        let mut stopped = None;
        while let Some((lo, hi, parent)) = stack.pop() {
            if let Some((_, inc)) = &best {
                if parent >= *inc - TOL {
                    continue;
                }
                let open = stack.iter().map(|n| n.2).fold(parent, f64::min);
                if (inc - open) / inc.abs().max(1e-9) <= opts.mip_gap {
                    stack.push((lo, hi, parent));
                    stopped = Some(Status::GapReached);
                    break;
                }
            }
            nodes += 1;
            if nodes > self.max_nodes || clock.elapsed().as_secs_f64() > opts.time_limit {
                stack.push((lo, hi, parent));
                stopped = Some(Status::TimeLimit);
                break;
            }
            let (x, obj) = match relax(model, &lo, &hi) {
                LpOutcome::Optimal(x, obj) => (x, obj),
                LpOutcome::Infeasible => continue,
                LpOutcome::Unbounded => {
                    return Ok(SolveResult::failed(Status::Error, "relaxation unbounded".into(), clock.elapsed().as_secs_f64()))
                }
            };
            if let Some((_, inc)) = &best {
                if obj >= *inc - TOL {
                    continue;
                }
            }
            let frac = model
                .vars
                .iter()
                .enumerate()
                .filter(|(j, v)| v.integer && (x[*j] - x[*j].round()).abs() > 1e-7)
                .max_by(|a, b| {
                    let fa = (x[a.0] - x[a.0].floor() - 0.5).abs();
                    let fb = (x[b.0] - x[b.0].floor() - 0.5).abs();
                    fb.partial_cmp(&fa).expect("finite")
                })
                .map(|(j, _)| j);
            match frac {
                None => {
                    let mut x = x;
                    for (v, xi) in model.vars.iter().zip(x.iter_mut()) {
                        if v.integer {
                            *xi = xi.round();
                        }
                    }
                    best = Some((x, obj));
                }
                Some(j) => {
                    let f = x[j];
                    let mut down = (lo.clone(), hi.clone(), obj);
                    down.1[j] = f.floor();
                    let mut up = (lo, hi, obj);
                    up.0[j] = f.ceil();
                    if f - f.floor() < 0.5 {
                        stack.push(up);
                        stack.push(down);
                    } else {
                        stack.push(down);
                        stack.push(up);
                    }
                }
            }
        }
        let wall = clock.elapsed().as_secs_f64();
        Ok(match best {
            None => match stopped {
                Some(Status::TimeLimit) => SolveResult::failed(Status::TimeLimit, "no incumbent".into(), wall),
                _ => SolveResult::failed(Status::Infeasible, "model infeasible".into(), wall),
            },
            Some((x, obj)) => {
                let bound = stack.iter().map(|n| n.2).fold(obj, f64::min);
                SolveResult {
                    status: stopped.unwrap_or(Status::Optimal),
                    objective: Some(obj),
                    best_bound: Some(bound),
                    values: x,
                    wall_time: wall,
                    message: None,
                }
            }
        })
    }
}

use std::ffi::CString;
use std::path::Path;
use std::time::Instant;

use highs::{ColProblem, HighsModelStatus, Model, Sense};

use super::{classify, Backend, SolveOptions, SolveResult, Status};
use crate::error::{Error, Result};
use crate::model::MilpModel;

/// Set to anything but `0` to echo the HiGHS log to stdout.
pub const LOG_ENV: &str = "BLENDPLAN_HIGHS_LOG";

/// HiGHS linked in-process.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

fn to_highs(model: &MilpModel, fix_integers: Option<&[f64]>) -> ColProblem {
    let mut pb = ColProblem::new();
    let rows: Vec<_> = model.rows.iter().map(|r| pb.add_row(r.lo..=r.hi)).collect();
    let mut cols: Vec<Vec<(highs::Row, f64)>> = vec![Vec::new(); model.vars.len()];
    for (i, r) in model.rows.iter().enumerate() {
        for &(v, c) in &r.terms {
            cols[v.index()].push((rows[i], c));
        }
    }
    let mut cost = vec![0.0; model.vars.len()];
    for &(v, c) in &model.objective {
        cost[v.index()] += c;
    }
    for (j, var) in model.vars.iter().enumerate() {
        match fix_integers {
            Some(x) if var.integer => {
                let v = x[j].round().clamp(var.lo, var.hi);
                pb.add_column(cost[j], v..=v, &cols[j]);
            }
            Some(_) => pb.add_column(cost[j], var.lo..=var.hi, &cols[j]),
            None if var.integer => pb.add_integer_column(cost[j], var.lo..=var.hi, &cols[j]),
            None => pb.add_column(cost[j], var.lo..=var.hi, &cols[j]),
        }
    }
    pb
}

fn configure(m: &mut Model, opts: &SolveOptions, time_left: f64) {
    m.set_option("time_limit", time_left.max(1e-3));
    m.set_option("mip_rel_gap", opts.mip_gap);
    m.set_option("random_seed", (opts.seed % (i32::MAX as u64)) as i32);
    if opts.threads > 0 {
        m.set_option("threads", opts.threads as i32);
    }
    if std::env::var_os(LOG_ENV).is_some_and(|v| !v.is_empty() && v != "0") {
        m.set_option("output_flag", true);
        m.set_option("log_to_console", true);
    }
}

impl Backend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<SolveResult> {
        opts.validate()?;
        let clock = Instant::now();
        if model.vars.is_empty() {
            let feasible = model.rows.iter().all(|r| r.lo <= 1e-9 && r.hi >= -1e-9);
            return Ok(if feasible {
                SolveResult {
                    status: Status::Optimal,
                    objective: Some(0.0),
                    best_bound: Some(0.0),
                    values: Vec::new(),
                    wall_time: clock.elapsed().as_secs_f64(),
                    message: None,
                }
            } else {
                SolveResult::failed(Status::Infeasible, "empty infeasible model".into(), 0.0)
            });
        }
        let mut m = to_highs(model, None).optimise(Sense::Minimise);
        configure(&mut m, opts, opts.time_limit);
        if model.vars.iter().all(|v| v.start.is_some()) {
            let start: Vec<f64> = model.vars.iter().map(|v| v.start.unwrap_or(0.0)).collect();
            if m.try_set_solution(Some(&start), None, None, None).is_err() {
                log::warn!("start solution rejected by HiGHS");
            }
        }
        let solved = m
            .try_solve()
            .map_err(|e| Error::Solver(format!("HiGHS run failed: {e:?}")))?;
        let status = solved.status();
        let mip = model.num_integer() > 0;
        let wall = || clock.elapsed().as_secs_f64();
        let has_point = matches!(
            status,
            HighsModelStatus::Optimal
                | HighsModelStatus::ReachedTimeLimit
                | HighsModelStatus::ReachedIterationLimit
                | HighsModelStatus::ReachedSolutionLimit
        ) && solved.primal_solution_status() == highs::HighsSolutionStatus::Feasible;
        match status {
            HighsModelStatus::Infeasible => {
                return Ok(SolveResult::failed(Status::Infeasible, "model infeasible".into(), wall()))
            }
            HighsModelStatus::UnboundedOrInfeasible | HighsModelStatus::Unbounded => {
                return Ok(SolveResult::failed(Status::Error, format!("{status:?}"), wall()))
            }
            _ if !has_point => {
                let st = if status == HighsModelStatus::ReachedTimeLimit { Status::TimeLimit } else { Status::Error };
                return Ok(SolveResult::failed(st, format!("no solution: {status:?}"), wall()));
            }
            _ => {}
        }
        let mut values = solved.get_solution().columns().to_vec();
        let mut objective = solved.objective_value();
        let bound = if mip {
            solved.double_info_value(c"mip_dual_bound").unwrap_or(objective)
        } else {
            objective
        };
        let result_status = if mip {
            if status == HighsModelStatus::Optimal {
                classify(objective, bound, opts.mip_gap).min_gap_reached()
            } else {
                Status::TimeLimit
            }
        } else {
            Status::Optimal
        };
        if mip {
            // Re-solve the continuous part with integers pinned so rows hold to LP tolerance.
            let left = opts.time_limit - wall();
            let mut lp = to_highs(model, Some(&values)).optimise(Sense::Minimise);
            configure(&mut lp, opts, left.max(1.0));
            if let Ok(pol) = lp.try_solve() {
                if pol.status() == HighsModelStatus::Optimal {
                    values = pol.get_solution().columns().to_vec();
                    objective = objective.min(pol.objective_value());
                }
            }
            for (v, x) in model.vars.iter().zip(values.iter_mut()) {
                if v.integer {
                    *x = x.round();
                }
            }
        }
        Ok(SolveResult {
            status: result_status,
            objective: Some(objective),
            best_bound: Some(bound.min(objective)),
            values,
            wall_time: wall(),
            message: None,
        })
    }
}

impl Status {
    /// HiGHS reports "optimal" once its gap target is met.
    fn min_gap_reached(self) -> Status {
        match self {
            Status::TimeLimit => Status::GapReached,
            s => s,
        }
    }
}

/// Column and row counts of a model file as parsed by HiGHS.
pub fn read_model_counts(path: &Path) -> Result<(usize, usize)> {
    let c_path = CString::new(path.display().to_string())
        .map_err(|_| Error::Config("path contains a NUL byte".into()))?;
    unsafe {
        let h = highs_sys::Highs_create();
        let quiet = CString::new("output_flag").expect("static");
        highs_sys::Highs_setBoolOptionValue(h, quiet.as_ptr(), 0);
        let st = highs_sys::Highs_readModel(h, c_path.as_ptr());
        let counts = (highs_sys::Highs_getNumCol(h) as usize, highs_sys::Highs_getNumRow(h) as usize);
        highs_sys::Highs_destroy(h);
        if st == highs_sys::kHighsStatusError {
            return Err(Error::Solver(format!("HiGHS could not read {}", path.display())));
        }
        Ok(counts)
    }
}

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use super::{classify, Backend, SolveOptions, SolveResult, Status};
use crate::error::{Error, Result};
use crate::model::export::{col_name, to_mps};
use crate::model::MilpModel;

/// Environment variable holding the path of the solver executable.
pub const SOLVER_ENV: &str = "BLENDPLAN_SOLVER";

/// Runs a HiGHS-compatible command-line solver on an exported MPS file:
/// `<binary> --model_file m.mps --options_file m.opt --solution_file m.sol`.
#[derive(Debug, Clone)]
pub struct ExternalBackend {
    pub binary: PathBuf,
}

impl ExternalBackend {
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(SOLVER_ENV) {
            Some(p) if !p.is_empty() => Ok(ExternalBackend { binary: p.into() }),
            _ => Err(Error::BackendUnavailable(format!("{SOLVER_ENV} is not set"))),
        }
    }
}

/// Parsed contents of a solution file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub model_status: String,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub columns: HashMap<String, f64>,
}

/// Reads a HiGHS-style solution file (`Model status`, `Objective`, `# Columns N`).
pub fn parse_solution_file(text: &str) -> Result<SolutionFile> {
    let bad = |m: &str| Error::Solver(format!("malformed solution file: {m}"));
    let mut lines = text.lines().map(str::trim);
    let mut model_status = None;
    let mut objective = None;
    let mut bound = None;
    let mut columns = HashMap::new();
    let mut in_primal = true;
    while let Some(line) = lines.next() {
        if line == "Model status" {
            model_status = lines.next().map(str::to_string);
        } else if line.starts_with("# Dual solution") {
            in_primal = false;
        } else if line.starts_with("# Primal solution") {
            in_primal = true;
        } else if let Some(v) = line.strip_prefix("Objective") {
            if in_primal {
                objective = Some(v.trim().parse::<f64>().map_err(|_| bad("objective"))?);
            }
        } else if let Some(v) = line.strip_prefix("Dual bound") {
            bound = Some(v.trim().parse::<f64>().map_err(|_| bad("dual bound"))?);
        } else if let Some(n) = line.strip_prefix("# Columns") {
            if !in_primal {
                continue;
            }
            let n: usize = n.trim().parse().map_err(|_| bad("column count"))?;
            for _ in 0..n {
                let l = lines.next().ok_or_else(|| bad("truncated columns"))?;
                let mut it = l.split_whitespace();
                let (Some(name), Some(v)) = (it.next(), it.next()) else {
                    return Err(bad(l));
                };
                columns.insert(name.to_string(), v.parse().map_err(|_| bad(l))?);
            }
        }
    }
    Ok(SolutionFile {
        model_status: model_status.ok_or_else(|| bad("missing model status"))?,
        objective,
        bound,
        columns,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl Backend for ExternalBackend {
    fn name(&self) -> &'static str {
        "external"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<SolveResult> {
        opts.validate()?;
        let clock = Instant::now();
        let tmp = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
        let dir = tmp.path();
        let mps = dir.join("model.mps");
        let opt = dir.join("model.opt");
        let sol = dir.join("model.sol");
        write(&mps, &to_mps(model, "BLEND"))?;
        let mut o = format!(
            "time_limit = {}\nmip_rel_gap = {}\nrandom_seed = {}\n",
            opts.time_limit,
            opts.mip_gap,
            opts.seed % (i32::MAX as u64)
        );
        if opts.threads > 0 {
            o.push_str(&format!("threads = {}\n", opts.threads));
        }
        write(&opt, &o)?;
        let output = Command::new(&self.binary)
            .arg("--model_file")
            .arg(&mps)
            .arg("--options_file")
            .arg(&opt)
            .arg("--solution_file")
            .arg(&sol)
            .output()
            .map_err(|e| Error::BackendUnavailable(format!("{}: {e}", self.binary.display())))?;
        let wall = clock.elapsed().as_secs_f64();
        let text = fs::read_to_string(&sol);
        let text = match text {
            Ok(t) => t,
            Err(_) => {
                let msg = String::from_utf8_lossy(&output.stderr).into_owned();
                return Ok(SolveResult::failed(Status::Error, format!("no solution file: {msg}"), wall));
            }
        };
        let parsed = parse_solution_file(&text)?;
        let status = parsed.model_status.to_ascii_lowercase();
        if status.contains("infeasible") {
            return Ok(SolveResult::failed(Status::Infeasible, parsed.model_status, wall));
        }
        let values: Option<Vec<f64>> =
            (0..model.vars.len()).map(|j| parsed.columns.get(&col_name(j)).copied()).collect();
        let (Some(values), Some(objective)) = (values, parsed.objective) else {
            let st = if status.contains("time") { Status::TimeLimit } else { Status::Error };
            return Ok(SolveResult::failed(st, parsed.model_status, wall));
        };
        let bound = parsed.bound.unwrap_or(objective);
        let st = if status.contains("time") {
            Status::TimeLimit
        } else {
            match classify(objective, bound, opts.mip_gap) {
                Status::TimeLimit => Status::GapReached,
                s => s,
            }
        };
        Ok(SolveResult {
            status: st,
            objective: Some(objective),
            best_bound: Some(bound),
            values,
            wall_time: wall,
            message: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 12.5\n# Columns 2\nC0000001 1\nC0000002 2.5\n# Rows 1\nR0000001 3.5\n\n# Dual solution values\nFeasible\n# Columns 2\nC0000001 0\nC0000002 0\n";

    #[test]
    fn parses_primal_section() {
        let s = parse_solution_file(SAMPLE).unwrap();
        assert_eq!(s.model_status, "Optimal");
        assert_eq!(s.objective, Some(12.5));
        assert_eq!(s.columns["C0000002"], 2.5);
        assert_eq!(s.columns.len(), 2);
    }

    #[test]
    fn missing_status_is_error() {
        assert!(parse_solution_file("# Columns 0\n").is_err());
    }
}

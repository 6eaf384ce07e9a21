use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Half-open day interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub index: usize,
    pub start: u32,
    pub end: u32,
}

impl Period {
    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

fn check_dt(dt: u32) -> Result<()> {
    if dt == 0 {
        return Err(Error::Config("period length must be at least 1".into()));
    }
    Ok(())
}

fn number(bounds: Vec<(u32, u32)>) -> Vec<Period> {
    bounds
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| Period { index, start, end })
        .collect()
}

/// Periods of `dt` days; the last one may be shorter.
pub fn fixed_periods(horizon: u32, dt: u32) -> Result<Vec<Period>> {
    check_dt(dt)?;
    let mut out = Vec::new();
    let mut t = 0;
    while t < horizon {
        out.push((t, (t + dt).min(horizon)));
        t += dt;
    }
    Ok(number(out))
}

/// Runs of an instance as half-open intervals.
pub fn run_intervals(inst: &Instance) -> Vec<(u32, u32)> {
    let mut runs: Vec<(u32, u32)> = inst.runs.iter().map(|r| (r.days[0], r.days[1] + 1)).collect();
    runs.sort_unstable();
    runs
}

/// Periods that end only where a run or an idle stretch ends.
///
/// `runs` are half-open and disjoint. Days outside runs form gaps, one per
/// maximal idle stretch (leading and trailing stretches included). From `t`,
/// the next boundary is the latest segment end within `t + dt`; a run is
/// always taken whole, and a gap with no end in reach is cut at `t + dt`.
pub fn run_based_periods(runs: &[(u32, u32)], horizon: u32, dt: u32) -> Result<Vec<Period>> {
    check_dt(dt)?;
    let mut runs: Vec<(u32, u32)> = runs
        .iter()
        .map(|&(a, b)| (a.min(horizon), b.min(horizon)))
        .filter(|(a, b)| a < b)
        .collect();
    runs.sort_unstable();
    if runs.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(Error::Config("runs overlap".into()));
    }
    // (start, end, is_run)
    let mut segs = Vec::new();
    let mut t = 0;
    for &(a, b) in &runs {
        if t < a {
            segs.push((t, a, false));
        }
        segs.push((a, b, true));
        t = b;
    }
    if t < horizon {
        segs.push((t, horizon, false));
    }
    let mut out = Vec::new();
    let mut t = 0;
    while t < horizon {
        let cur = segs.iter().find(|s| s.0 <= t && t < s.1).expect("segments cover the horizon");
        let reach = segs.iter().map(|s| s.1).filter(|&e| e > t && e <= t + dt).max();
        let next = match (cur.2, reach) {
            (true, r) => r.unwrap_or(cur.1).max(cur.1),
            (false, Some(r)) => r,
            (false, None) => t + dt,
        };
        out.push((t, next));
        t = next;
    }
    Ok(number(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans(p: &[Period]) -> Vec<(u32, u32)> {
        p.iter().map(|p| (p.start, p.end)).collect()
    }

    #[test]
    fn fixed_examples() {
        let p = fixed_periods(30, 4).unwrap();
        assert_eq!(p.len(), 8);
        assert_eq!((p[7].start, p[7].end), (28, 30));
        assert_eq!(spans(&fixed_periods(7, 7).unwrap()), vec![(0, 7)]);
        assert!(fixed_periods(7, 0).is_err());
    }

    #[test]
    fn run_based_examples() {
        let runs = [(0, 4), (5, 6), (7, 14), (18, 25), (25, 30)];
        assert_eq!(
            spans(&run_based_periods(&runs, 30, 7).unwrap()),
            vec![(0, 7), (7, 14), (14, 18), (18, 25), (25, 30)]
        );
        assert_eq!(spans(&run_based_periods(&[(0, 20)], 20, 7).unwrap()), vec![(0, 20)]);
        assert_eq!(run_based_periods(&[], 30, 4).unwrap(), fixed_periods(30, 4).unwrap());
    }
}

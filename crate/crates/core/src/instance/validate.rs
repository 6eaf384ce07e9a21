use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::Instance;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Checks every structural invariant of an instance and lists all failures.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let h = inst.ops.horizon;

    let mut seen = HashSet::new();
    for (i, s) in inst.specs.iter().enumerate() {
        if !seen.insert(s.id.as_str()) {
            rep.push(format!("specs[{i}].id"), format!("duplicate spec id {:?}", s.id));
        }
    }
    let spec_known = |id: &str| inst.specs.iter().any(|s| s.id == id);

    let mut seen = HashSet::new();
    for (i, k) in inst.tanks.iter().enumerate() {
        let p = format!("tanks[{i}]");
        if !seen.insert(k.id.as_str()) {
            rep.push(format!("{p}.id"), format!("duplicate tank id {:?}", k.id));
        }
        if ![k.v_min, k.v_max, k.v_init].iter().all(|&x| finite_nonneg(x)) {
            rep.push(&p, "tank volumes must be finite and non-negative");
        }
        if k.v_min > k.v_max {
            rep.push(&p, "inventory bounds inverted");
        } else if k.v_init < k.v_min || k.v_init > k.v_max {
            rep.push(format!("{p}.v_init"), "initial inventory outside bounds");
        }
        if !(0.0..=1.0).contains(&k.min_feed_pct) {
            rep.push(format!("{p}.min_feed_pct"), "min feed share must lie in [0, 1]");
        }
        for sd in &inst.specs {
            match k.specs_init.get(&sd.id) {
                None => rep.push(
                    format!("{p}.specs_init"),
                    format!("missing initial value for spec {:?}", sd.id),
                ),
                Some(v) if !finite_nonneg(*v) => rep.push(
                    format!("{p}.specs_init.{}", sd.id),
                    "spec value must be finite and non-negative",
                ),
                _ => {}
            }
        }
        for q in k.specs_init.keys() {
            if !spec_known(q) {
                rep.push(format!("{p}.specs_init.{q}"), "unknown spec id");
            }
        }
    }

    let mut seen = HashSet::new();
    for (i, b) in inst.barges.iter().enumerate() {
        let p = format!("barges[{i}]");
        if !seen.insert(b.id.as_str()) {
            rep.push(format!("{p}.id"), format!("duplicate barge id {:?}", b.id));
        }
        if !(b.volume.is_finite() && b.volume > 0.0) {
            rep.push(format!("{p}.volume"), "barge volume must be positive");
        }
        if b.window[0] > b.window[1] {
            rep.push(format!("{p}.window"), "barge window inverted");
        }
        if b.window[1] >= h {
            rep.push(format!("{p}.window"), "barge window extends past horizon");
        }
        if !finite_nonneg(b.unload_penalty) {
            rep.push(format!("{p}.unload_penalty"), "penalty must be non-negative");
        }
        if b.allowed_tanks.is_empty() {
            rep.push(format!("{p}.allowed_tanks"), "barge has no allowed tank");
        }
        for t in &b.allowed_tanks {
            if inst.tank_index(t).is_none() {
                rep.push(format!("{p}.allowed_tanks"), format!("unknown tank id {t:?}"));
            }
        }
        for sd in &inst.specs {
            match b.specs.get(&sd.id) {
                None => rep.push(
                    format!("{p}.specs"),
                    format!("missing value for spec {:?}", sd.id),
                ),
                Some(v) if !finite_nonneg(*v) => rep.push(
                    format!("{p}.specs.{}", sd.id),
                    "spec value must be finite and non-negative",
                ),
                _ => {}
            }
        }
        for q in b.specs.keys() {
            if !spec_known(q) {
                rep.push(format!("{p}.specs.{q}"), "unknown spec id");
            }
        }
    }

    let mut seen = HashSet::new();
    for (i, r) in inst.runs.iter().enumerate() {
        let p = format!("runs[{i}]");
        if !seen.insert(r.id.as_str()) {
            rep.push(format!("{p}.id"), format!("duplicate run id {:?}", r.id));
        }
        if r.days[0] > r.days[1] {
            rep.push(format!("{p}.days"), "run days inverted");
        }
        if r.days[1] >= h {
            rep.push(format!("{p}.days"), "run extends past horizon");
        }
        if !(r.daily_demand.is_finite() && r.daily_demand > 0.0) {
            rep.push(format!("{p}.daily_demand"), "daily demand must be positive");
        }
        if !finite_nonneg(r.miss_penalty) {
            rep.push(format!("{p}.miss_penalty"), "penalty must be non-negative");
        }
        for (q, b) in &r.spec_bounds {
            if !spec_known(q) {
                rep.push(format!("{p}.spec_bounds.{q}"), "unknown spec id");
            }
            if !(b[0] <= b[1]) {
                rep.push(format!("{p}.spec_bounds.{q}"), "spec bounds interval empty");
            }
        }
        for (j, rb) in r.ratio_bounds.iter().enumerate() {
            let rp = format!("{p}.ratio_bounds[{j}]");
            if !spec_known(&rb.num) || !spec_known(&rb.den) {
                rep.push(&rp, "unknown spec id in ratio");
            }
            if rb.num == rb.den {
                rep.push(&rp, "ratio of a spec with itself");
            }
            if !(rb.bounds[0] <= rb.bounds[1]) || rb.bounds[0] < 0.0 {
                rep.push(&rp, "ratio bounds interval empty or negative");
            }
            if let Some(lo) = r.spec_bounds.get(&rb.den).map(|b| b[0]) {
                if lo <= 0.0 {
                    rep.push(&rp, "ratio denominator lower bound must be positive");
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..inst.runs.len()).collect();
    order.sort_by_key(|&i| inst.runs[i].days[0]);
    for w in order.windows(2) {
        let (a, b) = (&inst.runs[w[0]], &inst.runs[w[1]]);
        if b.days[0] <= a.days[1] {
            rep.push(
                format!("runs[{}]", w[1]),
                format!("runs overlap ({:?} and {:?})", a.id, b.id),
            );
        }
    }

    let o = &inst.ops;
    if o.horizon == 0 {
        rep.push("ops.horizon", "horizon must be positive");
    }
    if o.max_unloads_per_day == 0 {
        rep.push("ops.max_unloads_per_day", "must be positive");
    }
    if o.max_unloads_per_barge == 0 {
        rep.push("ops.max_unloads_per_barge", "must be positive");
    }
    if !(o.min_daily_unload_pct > 0.0 && o.min_daily_unload_pct <= 1.0) {
        rep.push("ops.min_daily_unload_pct", "must lie in (0, 1]");
    }
    rep
}

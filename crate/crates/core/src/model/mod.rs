//! Solver-agnostic optimization models: a variable registry keyed by domain
//! meaning, linear rows tagged with the constraint family they implement, and
//! (for the exact models) bilinear rows.

mod bounds;
mod build;
pub mod envelope;
pub mod export;
mod scope;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discretization::DiscretizationPlan;

pub use bounds::{reachable_spec_bounds, tighten, RatioBounds, TightenedBounds};
pub use build::{
    build_center, build_exact_mix, build_exact_split, build_mccormick, build_milp, build_scoped,
    BuildOptions, CenterOptions, Method,
};
pub use scope::{BargeScope, Scope, Treat};

/// Which volume a digit or residual product multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Mid,
    End,
    Out,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Mid, Family::End, Family::Out];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Mid => "mid",
            Family::End => "end",
            Family::Out => "out",
        }
    }
}

/// Domain meaning of a model column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarKey {
    Gamma { s: u32, t: u32 },
    Sigma { k: u32, t: u32 },
    YIn { s: u32, k: u32, t: u32 },
    YOut { k: u32, t: u32 },
    VMid { k: u32, t: u32 },
    VEnd { k: u32, t: u32 },
    /// Spec mass `f * v_mid` (split model).
    VfMid { k: u32, q: u32, t: u32 },
    VfEnd { k: u32, q: u32, t: u32 },
    YfOut { k: u32, q: u32, t: u32 },
    /// Tank spec value (mixing model).
    Spec { k: u32, q: u32, t: u32 },
    /// Digit `i` of the tank spec, base 2 with the zero column projected out.
    Alpha { k: u32, q: u32, t: u32, i: u32 },
    DeltaF { k: u32, q: u32, t: u32 },
    XAlpha { fam: Family, k: u32, q: u32, t: u32, i: u32 },
    XDelta { fam: Family, k: u32, q: u32, t: u32 },
    TFirst { s: u32 },
    TLast { s: u32 },
    VUnused { s: u32 },
    Mis { t: u32 },
}

impl VarKey {
    pub fn kind(&self) -> &'static str {
        match self {
            VarKey::Gamma { .. } => "gamma",
            VarKey::Sigma { .. } => "sigma",
            VarKey::YIn { .. } => "y_in",
            VarKey::YOut { .. } => "y_out",
            VarKey::VMid { .. } => "v_mid",
            VarKey::VEnd { .. } => "v_end",
            VarKey::VfMid { .. } => "vf_mid",
            VarKey::VfEnd { .. } => "vf_end",
            VarKey::YfOut { .. } => "yf_out",
            VarKey::Spec { .. } => "spec",
            VarKey::Alpha { .. } => "alpha",
            VarKey::DeltaF { .. } => "delta_f",
            VarKey::XAlpha { .. } => "x_alpha",
            VarKey::XDelta { .. } => "x_delta",
            VarKey::TFirst { .. } => "t_first",
            VarKey::TLast { .. } => "t_last",
            VarKey::VUnused { .. } => "v_unused",
            VarKey::Mis { .. } => "mis",
        }
    }

    /// Day index, when the column belongs to one.
    pub fn day(&self) -> Option<u32> {
        match *self {
            VarKey::Gamma { t, .. }
            | VarKey::Sigma { t, .. }
            | VarKey::YIn { t, .. }
            | VarKey::YOut { t, .. }
            | VarKey::VMid { t, .. }
            | VarKey::VEnd { t, .. }
            | VarKey::VfMid { t, .. }
            | VarKey::VfEnd { t, .. }
            | VarKey::YfOut { t, .. }
            | VarKey::Spec { t, .. }
            | VarKey::Alpha { t, .. }
            | VarKey::DeltaF { t, .. }
            | VarKey::XAlpha { t, .. }
            | VarKey::XDelta { t, .. }
            | VarKey::Mis { t } => Some(t),
            VarKey::TFirst { .. } | VarKey::TLast { .. } | VarKey::VUnused { .. } => None,
        }
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKey::Gamma { s, t } => write!(f, "gamma[{s},{t}]"),
            VarKey::Sigma { k, t } => write!(f, "sigma[{k},{t}]"),
            VarKey::YIn { s, k, t } => write!(f, "y_in[{s},{k},{t}]"),
            VarKey::YOut { k, t } => write!(f, "y_out[{k},{t}]"),
            VarKey::VMid { k, t } => write!(f, "v_mid[{k},{t}]"),
            VarKey::VEnd { k, t } => write!(f, "v_end[{k},{t}]"),
            VarKey::VfMid { k, q, t } => write!(f, "vf_mid[{k},{q},{t}]"),
            VarKey::VfEnd { k, q, t } => write!(f, "vf_end[{k},{q},{t}]"),
            VarKey::YfOut { k, q, t } => write!(f, "yf_out[{k},{q},{t}]"),
            VarKey::Spec { k, q, t } => write!(f, "spec[{k},{q},{t}]"),
            VarKey::Alpha { k, q, t, i } => write!(f, "alpha[{k},{q},{t},{i}]"),
            VarKey::DeltaF { k, q, t } => write!(f, "delta_f[{k},{q},{t}]"),
            VarKey::XAlpha { fam, k, q, t, i } => {
                write!(f, "x_alpha_{}[{k},{q},{t},{i}]", fam.as_str())
            }
            VarKey::XDelta { fam, k, q, t } => write!(f, "x_delta_{}[{k},{q},{t}]", fam.as_str()),
            VarKey::TFirst { s } => write!(f, "t_first[{s}]"),
            VarKey::TLast { s } => write!(f, "t_last[{s}]"),
            VarKey::VUnused { s } => write!(f, "v_unused[{s}]"),
            VarKey::Mis { t } => write!(f, "mis[{t}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub key: VarKey,
    pub lo: f64,
    pub hi: f64,
    pub integer: bool,
    /// Starting value handed to the backend, if any.
    pub start: Option<f64>,
}

/// Envelope row of a product `w = x * beta` with `x in [xmin, xmax]`, `beta in [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `w >= xmin * beta`
    Lo,
    /// `w <= xmax * beta`
    Hi,
    /// `w >= x - xmax * (1 - beta)`
    CompLo,
    /// `w <= x - xmin * (1 - beta)`
    CompHi,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Lo, Side::Hi, Side::CompLo, Side::CompHi];

    fn as_str(self) -> &'static str {
        match self {
            Side::Lo => "lo",
            Side::Hi => "hi",
            Side::CompLo => "comp_lo",
            Side::CompHi => "comp_hi",
        }
    }
}

/// Constraint family a row implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    InflowBalance,
    OutflowBalance,
    SpecOutflow,
    Blend,
    BlendLo,
    BlendHi,
    Demand,
    FeedSpecLo,
    FeedSpecHi,
    FeedRatioLo,
    FeedRatioHi,
    SupplyTotal,
    ConstantFeed,
    FeedShareLo,
    FeedShareHi,
    UnloadsPerBarge,
    UnloadsPerDay,
    UnloadLink,
    MinUnload,
    FirstUnload,
    LastUnload,
    UnloadGap,
    Split,
    DigitOneHot,
    DigitSum,
    DigitEnvelope(Family, Side),
    DigitCoupling,
    ResidualEnvelope(Family, Side),
}

impl Tag {
    pub fn name(&self) -> String {
        match self {
            Tag::DigitEnvelope(f, s) => format!("digit_envelope.{}.{}", f.as_str(), s.as_str()),
            Tag::ResidualEnvelope(f, s) => {
                format!("residual_envelope.{}.{}", f.as_str(), s.as_str())
            }
            other => {
                let v = serde_json::to_value(other).expect("tag serializes");
                v.as_str().expect("unit variant").to_string()
            }
        }
    }

    /// Tags shared by every model: flows, inventory, demand, and unloading rules.
    pub const OPERATIONAL: [Tag; 15] = [
        Tag::InflowBalance,
        Tag::OutflowBalance,
        Tag::Demand,
        Tag::SupplyTotal,
        Tag::ConstantFeed,
        Tag::FeedShareLo,
        Tag::FeedShareHi,
        Tag::UnloadsPerBarge,
        Tag::UnloadsPerDay,
        Tag::UnloadLink,
        Tag::MinUnload,
        Tag::FirstUnload,
        Tag::LastUnload,
        Tag::UnloadGap,
        Tag::SpecOutflow,
    ];
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub tag: Tag,
    /// Index tuple of the row within its family (barge/tank, spec, day, digit).
    pub index: Vec<u32>,
    pub terms: Vec<(VarId, f64)>,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadRow {
    pub tag: Tag,
    pub index: Vec<u32>,
    pub linear: Vec<(VarId, f64)>,
    pub quad: Vec<(VarId, VarId, f64)>,
    pub lo: f64,
    pub hi: f64,
}

/// Linear expression with a constant part, used while assembling rows.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: VarId, c: f64) -> &mut Self {
        if c != 0.0 {
            self.terms.push((v, c));
        }
        self
    }

    pub fn add_const(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(v, c) in &other.terms {
            self.add(v, c * scale);
        }
        self.constant += other.constant * scale;
        self
    }

    /// Merges duplicate columns and drops exact zeros.
    fn normalized(mut self) -> (Vec<(VarId, f64)>, f64) {
        self.terms.sort_by_key(|&(v, _)| v);
        let mut out: Vec<(VarId, f64)> = Vec::with_capacity(self.terms.len());
        for (v, c) in self.terms {
            match out.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        (out, self.constant)
    }
}

/// Metadata needed to interpret solutions of an approximation model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub method: Option<Method>,
    pub start: u32,
    pub end: u32,
    /// Objective constant turning minimized penalty cost into captured value.
    pub value_constant: f64,
    /// Digit plans per `[tank][spec]` (approximation models only).
    pub plans: Vec<Vec<DiscretizationPlan>>,
}

/// Linear (mixed-integer) model; the objective is always minimized.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub vars: Vec<Variable>,
    #[serde(skip)]
    index: HashMap<VarKey, VarId>,
    pub rows: Vec<Row>,
    pub objective: Vec<(VarId, f64)>,
    pub meta: ModelMeta,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a column; re-registering a key returns the existing id.
    pub fn var(&mut self, key: VarKey, lo: f64, hi: f64, integer: bool) -> VarId {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(Variable {
            key,
            lo,
            hi,
            integer,
            start: None,
        });
        self.index.insert(key, id);
        id
    }

    pub fn id(&self, key: &VarKey) -> Option<VarId> {
        self.index.get(key).copied()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.vars[id.index()]
    }

    pub fn variable_mut(&mut self, id: VarId) -> &mut Variable {
        &mut self.vars[id.index()]
    }

    pub fn rebuild_index(&mut self) {
        self.index = self.vars.iter().enumerate().map(|(i, v)| (v.key, VarId(i as u32))).collect();
    }

    /// Adds `lo <= expr <= hi`, folding the expression constant into the bounds.
    pub fn add_row(&mut self, tag: Tag, index: Vec<u32>, expr: LinExpr, lo: f64, hi: f64) {
        let (terms, c) = expr.normalized();
        self.rows.push(Row {
            tag,
            index,
            terms,
            lo: lo - c,
            hi: hi - c,
        });
    }

    pub fn set_objective(&mut self, expr: LinExpr) {
        let (terms, _) = expr.normalized();
        self.objective = terms;
    }

    pub fn num_integer(&self) -> usize {
        self.vars.iter().filter(|v| v.integer).count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * x[v.index()]).sum()
    }

    pub fn row_activity(&self, row: &Row, x: &[f64]) -> f64 {
        row.terms.iter().map(|&(v, c)| c * x[v.index()]).sum()
    }

    /// Largest absolute violation of any row or column bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &xv) in self.vars.iter().zip(x) {
            worst = worst.max(v.lo - xv).max(xv - v.hi);
        }
        for row in &self.rows {
            let a = self.row_activity(row, x);
            worst = worst.max(row.lo - a).max(a - row.hi);
        }
        worst
    }

    pub fn tags(&self) -> std::collections::BTreeSet<Tag> {
        self.rows.iter().map(|r| r.tag).collect()
    }

    pub fn count_tag(&self, tag: Tag) -> usize {
        self.rows.iter().filter(|r| r.tag == tag).count()
    }
}

/// Model with bilinear rows; exported for an external nonconvex backend.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QcpModel {
    pub base: MilpModel,
    pub quad_rows: Vec<QuadRow>,
}

impl QcpModel {
    /// Distinct variable pairs appearing in bilinear terms.
    pub fn bilinear_pairs(&self) -> std::collections::BTreeSet<(VarId, VarId)> {
        self.quad_rows
            .iter()
            .flat_map(|r| r.quad.iter().map(|&(a, b, _)| if a <= b { (a, b) } else { (b, a) }))
            .collect()
    }

    pub fn bilinear_entries(&self) -> usize {
        self.quad_rows.iter().map(|r| r.quad.len()).sum()
    }

    /// Worst row violation at `x`, each divided by the row's term magnitude (at least 1).
    /// Returns the violation with the offending row tag and index.
    pub fn worst_scaled_violation(&self, x: &[f64]) -> (f64, Option<(Tag, Vec<u32>)>) {
        let mut worst = (0.0, None);
        let mut check = |tag: Tag, index: &Vec<u32>, a: f64, scale: f64, lo: f64, hi: f64| {
            let v = (lo - a).max(a - hi) / scale.max(1.0);
            if v > worst.0 {
                worst = (v, Some((tag, index.clone())));
            }
        };
        for r in &self.base.rows {
            let a = self.base.row_activity(r, x);
            let scale = r.terms.iter().map(|&(v, c)| (c * x[v.index()]).abs()).sum();
            check(r.tag, &r.index, a, scale, r.lo, r.hi);
        }
        for r in &self.quad_rows {
            let lin = r.linear.iter().map(|&(v, c)| c * x[v.index()]);
            let quad = r.quad.iter().map(|&(a, b, c)| c * x[a.index()] * x[b.index()]);
            let terms: Vec<f64> = lin.chain(quad).collect();
            let scale = terms.iter().map(|t| t.abs()).sum();
            check(r.tag, &r.index, terms.iter().sum(), scale, r.lo, r.hi);
        }
        worst
    }
}

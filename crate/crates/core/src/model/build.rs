use serde::{Deserialize, Serialize};

use super::bounds::{reachable_in_scope, tighten_with, TightenedBounds};
use super::{
    Family, LinExpr, MilpModel, ModelMeta, QcpModel, QuadRow, Scope, Side, Tag, Treat, VarId,
    VarKey,
};
use crate::discretization::{self, DiscretizationPlan, Scheme};
use crate::error::{Error, Result};
use crate::instance::{derive_sets, DerivedSets, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactMix,
    ExactSplit,
    Center,
    #[serde(rename = "mccormick")]
    McCormick,
}

impl Method {
    pub fn is_milp(self) -> bool {
        matches!(self, Method::Center | Method::McCormick)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactMix => "exact_mix",
            Method::ExactSplit => "exact_split",
            Method::Center => "center",
            Method::McCormick => "mccormick",
        }
    }
}

/// Optional transformations of the Center model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterOptions {
    /// Add digit-wise product coupling and drop the rows it makes redundant.
    pub coupling: bool,
    /// Drop the remaining product rows that are implied for integral digits.
    pub relax_avol: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub method: Method,
    /// Requested precision per spec.
    pub eps_hat: Vec<f64>,
    /// Shrink run requirements by the precision buffers.
    pub buffers: bool,
    pub center: CenterOptions,
}

impl BuildOptions {
    pub fn new(method: Method, eps_hat: Vec<f64>) -> Self {
        BuildOptions {
            method,
            eps_hat,
            buffers: true,
            center: CenterOptions::default(),
        }
    }
}

/// Base-2 normalized plans over the reachable spec range of every tank.
pub(crate) fn plans_for(
    reach: &[Vec<(f64, f64)>],
    eps_hat: &[f64],
) -> Result<Vec<Vec<DiscretizationPlan>>> {
    reach
        .iter()
        .map(|tank| {
            tank.iter()
                .zip(eps_hat)
                .map(|(&(lo, hi), &e)| discretization::plan(lo, hi, e, 2, Scheme::Nmdt))
                .collect()
        })
        .collect()
}

/// Builds the requested MILP approximation over the whole horizon.
pub fn build_milp(inst: &Instance, opts: &BuildOptions) -> Result<MilpModel> {
    let sets = derive_sets(inst)?;
    let scope = Scope::full(inst, &sets);
    build_scoped(inst, &sets, &scope, opts)
}

/// Builds an MILP approximation restricted to `scope`, with discretization
/// ranges taken from the scope's initial state.
pub fn build_scoped(
    inst: &Instance,
    sets: &DerivedSets,
    scope: &Scope,
    opts: &BuildOptions,
) -> Result<MilpModel> {
    if !opts.method.is_milp() {
        return Err(Error::Build(format!("{} is not an MILP method", opts.method.as_str())));
    }
    let reach = reachable_in_scope(sets, scope);
    let plans = plans_for(&reach, &opts.eps_hat)?;
    let bounds = if opts.buffers {
        tighten_with(inst, sets, &reach, &opts.eps_hat)?
    } else {
        TightenedBounds::untightened(sets)
    };
    let mut b = Builder::new(inst, sets, scope, bounds, opts.method);
    b.center = opts.center;
    b.plans = Some(plans);
    b.build()?;
    Ok(b.finish())
}

pub fn build_center(
    inst: &Instance,
    plans: &[Vec<DiscretizationPlan>],
    bounds: &TightenedBounds,
    opts: CenterOptions,
) -> Result<MilpModel> {
    build_approx(inst, plans, bounds, Method::Center, opts)
}

pub fn build_mccormick(
    inst: &Instance,
    plans: &[Vec<DiscretizationPlan>],
    bounds: &TightenedBounds,
) -> Result<MilpModel> {
    build_approx(inst, plans, bounds, Method::McCormick, CenterOptions::default())
}

fn build_approx(
    inst: &Instance,
    plans: &[Vec<DiscretizationPlan>],
    bounds: &TightenedBounds,
    method: Method,
    opts: CenterOptions,
) -> Result<MilpModel> {
    let sets = derive_sets(inst)?;
    let scope = Scope::full(inst, &sets);
    let mut b = Builder::new(inst, &sets, &scope, bounds.clone(), method);
    b.center = opts;
    b.plans = Some(plans.to_vec());
    b.build()?;
    Ok(b.finish())
}

/// Exact model with tank spec variables; bilinear in spec times volume.
pub fn build_exact_mix(inst: &Instance) -> Result<QcpModel> {
    build_exact(inst, Method::ExactMix)
}

/// Exact model over spec masses; bilinear only in the splitting rows.
pub fn build_exact_split(inst: &Instance) -> Result<QcpModel> {
    build_exact(inst, Method::ExactSplit)
}

fn build_exact(inst: &Instance, method: Method) -> Result<QcpModel> {
    let sets = derive_sets(inst)?;
    let scope = Scope::full(inst, &sets);
    let mut b = Builder::new(inst, &sets, &scope, TightenedBounds::untightened(&sets), method);
    b.build()?;
    let quad_rows = std::mem::take(&mut b.quad);
    Ok(QcpModel {
        base: b.finish(),
        quad_rows,
    })
}

struct Builder<'a> {
    inst: &'a Instance,
    sets: &'a DerivedSets,
    scope: &'a Scope,
    bounds: TightenedBounds,
    method: Method,
    center: CenterOptions,
    plans: Option<Vec<Vec<DiscretizationPlan>>>,
    m: MilpModel,
    quad: Vec<QuadRow>,
    value_constant: f64,
    /// Spec mass left in each tank at the end of the previous day, `[tank][spec]`.
    prev_end: Vec<Vec<LinExpr>>,
}

impl<'a> Builder<'a> {
    fn new(
        inst: &'a Instance,
        sets: &'a DerivedSets,
        scope: &'a Scope,
        bounds: TightenedBounds,
        method: Method,
    ) -> Self {
        Builder {
            inst,
            sets,
            scope,
            bounds,
            method,
            center: CenterOptions::default(),
            plans: None,
            m: MilpModel::new(),
            quad: Vec::new(),
            value_constant: 0.0,
            prev_end: Vec::new(),
        }
    }

    fn finish(mut self) -> MilpModel {
        self.m.meta = ModelMeta {
            method: Some(self.method),
            start: self.scope.start,
            end: self.scope.end,
            value_constant: self.value_constant,
            plans: self.plans.unwrap_or_default(),
        };
        self.m
    }

    fn binary(&mut self, key: VarKey, treat: Treat) -> VarId {
        match treat {
            Treat::Binary => self.m.var(key, 0.0, 1.0, true),
            Treat::Relaxed => self.m.var(key, 0.0, 1.0, false),
            Treat::Fixed => {
                let v = self.scope.fixed.get(&key).copied().unwrap_or(0.0);
                self.m.var(key, v, v, true)
            }
        }
    }

    fn demand(&self, t: u32) -> f64 {
        self.sets.demand[t as usize]
    }

    fn build(&mut self) -> Result<()> {
        if let Some(plans) = &self.plans {
            let ok = plans.len() == self.inst.tanks.len()
                && plans.iter().all(|p| p.len() == self.sets.n_specs);
            if !ok {
                return Err(Error::Build("a discretization plan is missing for some tank and spec".into()));
            }
        }
        self.volumes();
        self.supply();
        self.feed();
        match self.method {
            Method::ExactMix => self.specs_mix(),
            Method::ExactSplit => self.specs_split(),
            Method::Center | Method::McCormick => self.specs_digits(),
        }
        let mut obj = LinExpr::new();
        for (s, b) in self.inst.barges.iter().enumerate() {
            if let Some(id) = self.m.id(&VarKey::VUnused { s: s as u32 }) {
                obj.add(id, b.unload_penalty);
            }
        }
        for t in self.scope.days() {
            if let Some(id) = self.m.id(&VarKey::Mis { t }) {
                obj.add(id, self.sets.miss_penalty[t as usize]);
            }
        }
        self.m.set_objective(obj);
        Ok(())
    }

    fn volumes(&mut self) {
        let scope = self.scope;
        for t in scope.days() {
            for (k, tank) in self.inst.tanks.iter().enumerate() {
                let k32 = k as u32;
                let vmid = self.m.var(VarKey::VMid { k: k32, t }, tank.v_min, tank.v_max, false);
                let vend = self.m.var(VarKey::VEnd { k: k32, t }, tank.v_min, tank.v_max, false);
                let mut inflow = LinExpr::new();
                for &s in &self.sets.tank_barges[k] {
                    if scope.barge_days(s).contains(&t) {
                        let cap = scope.barges[s].cap;
                        let y = self.m.var(VarKey::YIn { s: s as u32, k: k32, t }, 0.0, cap, false);
                        inflow.add(y, 1.0);
                    }
                }
                if t == scope.start {
                    inflow.add_const(scope.v0[k]);
                } else {
                    let prev = self.m.id(&VarKey::VEnd { k: k32, t: t - 1 }).expect("previous day built");
                    inflow.add(prev, 1.0);
                }
                inflow.add(vmid, -1.0);
                self.m.add_row(Tag::InflowBalance, vec![k32, t], inflow, 0.0, 0.0);

                let d = self.demand(t);
                let mut out = LinExpr::new();
                out.add(vmid, 1.0).add(vend, -1.0);
                if d > 0.0 {
                    let y = self.m.var(VarKey::YOut { k: k32, t }, 0.0, d, false);
                    out.add(y, -1.0);
                }
                self.m.add_row(Tag::OutflowBalance, vec![k32, t], out, 0.0, 0.0);
            }
        }
    }

    fn supply(&mut self) {
        let scope = self.scope;
        let h = f64::from(self.inst.ops.horizon);
        for (s, barge) in self.inst.barges.iter().enumerate() {
            let days = scope.barge_days(s);
            let bs = &scope.barges[s];
            if days.is_empty() || bs.cap <= 0.0 {
                continue;
            }
            let s32 = s as u32;
            self.value_constant += barge.unload_penalty * bs.cap;
            let unused = self.m.var(VarKey::VUnused { s: s32 }, 0.0, bs.cap, false);
            let (first_hi, last_lo) = match bs.prior {
                Some((a, z)) => (f64::from(a), f64::from(z)),
                None => (h, 0.0),
            };
            let t_first = self.m.var(VarKey::TFirst { s: s32 }, 0.0, first_hi, false);
            let t_last = self.m.var(VarKey::TLast { s: s32 }, last_lo, h, false);
            let mut total = LinExpr::new();
            total.add(unused, 1.0);
            let mut count = LinExpr::new();
            for t in days {
                let g = self.binary(VarKey::Gamma { s: s32, t }, scope.gamma[t as usize]);
                count.add(g, 1.0);
                let mut day = LinExpr::new();
                for &k in &self.sets.barge_tanks[s] {
                    let y = self
                        .m
                        .id(&VarKey::YIn { s: s32, k: k as u32, t })
                        .expect("inflow built with volumes");
                    total.add(y, 1.0);
                    day.add(y, 1.0);
                    let mut link = LinExpr::new();
                    link.add(y, 1.0).add(g, -bs.cap);
                    self.m.add_row(Tag::UnloadLink, vec![s32, k as u32, t], link, f64::NEG_INFINITY, 0.0);
                }
                day.add(g, -bs.min_unload);
                self.m.add_row(Tag::MinUnload, vec![s32, t], day, 0.0, f64::INFINITY);

                let tf = f64::from(t);
                let mut first = LinExpr::new();
                first.add(t_first, 1.0).add(g, h - tf);
                self.m.add_row(Tag::FirstUnload, vec![s32, t], first, f64::NEG_INFINITY, h);
                let mut last = LinExpr::new();
                last.add(t_last, 1.0).add(g, -(tf + h));
                self.m.add_row(Tag::LastUnload, vec![s32, t], last, -h, f64::INFINITY);
            }
            self.m.add_row(Tag::SupplyTotal, vec![s32], total, bs.cap, bs.cap);
            self.m.add_row(
                Tag::UnloadsPerBarge,
                vec![s32],
                count,
                f64::NEG_INFINITY,
                f64::from(bs.unloads_left),
            );
            let mut gap = LinExpr::new();
            gap.add(t_last, 1.0).add(t_first, -1.0);
            self.m.add_row(
                Tag::UnloadGap,
                vec![s32],
                gap,
                f64::NEG_INFINITY,
                f64::from(self.inst.ops.max_unload_gap),
            );
        }
        for t in scope.days() {
            let mut day = LinExpr::new();
            for s in 0..self.inst.barges.len() {
                if let Some(g) = self.m.id(&VarKey::Gamma { s: s as u32, t }) {
                    day.add(g, 1.0);
                }
            }
            if !day.terms.is_empty() {
                let n = f64::from(self.inst.ops.max_unloads_per_day);
                self.m.add_row(Tag::UnloadsPerDay, vec![t], day, f64::NEG_INFINITY, n);
            }
        }
    }

    fn feed(&mut self) {
        let scope = self.scope;
        for t in scope.days() {
            let d = self.demand(t);
            if d <= 0.0 {
                continue;
            }
            self.value_constant += self.sets.miss_penalty[t as usize] * d;
            let mis = self.m.var(VarKey::Mis { t }, 0.0, d, false);
            let mut total = LinExpr::new();
            total.add(mis, 1.0);
            let run = self.sets.run_of_day[t as usize].expect("demand day belongs to a run");
            let run_start = self.inst.runs[run].days[0];
            for (k, tank) in self.inst.tanks.iter().enumerate() {
                let k32 = k as u32;
                let y = self.m.id(&VarKey::YOut { k: k32, t }).expect("feed built with volumes");
                total.add(y, 1.0);
                let sigma = self.binary(VarKey::Sigma { k: k32, t }, scope.sigma[t as usize]);
                let mut lo = LinExpr::new();
                lo.add(y, 1.0).add(sigma, -tank.min_feed_pct * d);
                self.m.add_row(Tag::FeedShareLo, vec![k32, t], lo, 0.0, f64::INFINITY);
                let mut hi = LinExpr::new();
                hi.add(y, 1.0).add(sigma, -d);
                self.m.add_row(Tag::FeedShareHi, vec![k32, t], hi, f64::NEG_INFINITY, 0.0);
                if t > run_start {
                    let mut c = LinExpr::new();
                    c.add(y, 1.0);
                    if t > scope.start {
                        let prev = self.m.id(&VarKey::YOut { k: k32, t: t - 1 }).expect("run day");
                        c.add(prev, -1.0);
                        self.m.add_row(Tag::ConstantFeed, vec![k32, t], c, 0.0, 0.0);
                    } else if let Some(pin) = &scope.feed_pin {
                        self.m.add_row(Tag::ConstantFeed, vec![k32, t], c, pin[k], pin[k]);
                    }
                }
            }
            self.m.add_row(Tag::Demand, vec![t], total, d, d);
        }
    }

    /// Spec mass carried in by barges on day `t`, as an expression.
    fn inflow_mass(&self, k: usize, q: usize, t: u32) -> LinExpr {
        let mut e = LinExpr::new();
        for &s in &self.sets.tank_barges[k] {
            if let Some(y) = self.m.id(&VarKey::YIn { s: s as u32, k: k as u32, t }) {
                e.add(y, self.sets.barge_spec[s][q]);
            }
        }
        e
    }

    fn feed_bounds(&self, t: u32) -> Option<usize> {
        self.sets.run_of_day[t as usize]
    }

    /// Adds spec and ratio rows for day `t` given per-tank feed spec mass expressions.
    fn feed_spec_rows(&mut self, t: u32, mass: &[Vec<LinExpr>]) {
        let Some(r) = self.feed_bounds(t) else { return };
        let youts: Vec<VarId> = (0..self.inst.tanks.len())
            .map(|k| self.m.id(&VarKey::YOut { k: k as u32, t }).expect("feed day"))
            .collect();
        for q in 0..self.sets.n_specs {
            let Some((lo, hi)) = self.bounds.spec[r][q] else { continue };
            let sum = |bound: f64| {
                let mut e = LinExpr::new();
                for (k, &y) in youts.iter().enumerate() {
                    e.add_expr(&mass[k][q], 1.0);
                    e.add(y, -bound);
                }
                e
            };
            let q32 = q as u32;
            self.m.add_row(Tag::FeedSpecLo, vec![q32, t], sum(lo), 0.0, f64::INFINITY);
            self.m.add_row(Tag::FeedSpecHi, vec![q32, t], sum(hi), f64::NEG_INFINITY, 0.0);
        }
        for (j, rb) in self.bounds.ratio[r].clone().into_iter().enumerate() {
            let sum = |bound: f64| {
                let mut e = LinExpr::new();
                for m in mass {
                    e.add_expr(&m[rb.num], 1.0);
                    e.add_expr(&m[rb.den], -bound);
                }
                e
            };
            let j32 = j as u32;
            self.m.add_row(Tag::FeedRatioLo, vec![j32, t], sum(rb.lo), 0.0, f64::INFINITY);
            self.m.add_row(Tag::FeedRatioHi, vec![j32, t], sum(rb.hi), f64::NEG_INFINITY, 0.0);
        }
    }

    fn specs_split(&mut self) {
        let scope = self.scope;
        let reach = reachable_in_scope(self.sets, scope);
        for t in scope.days() {
            let d = self.demand(t);
            let mut mass = vec![vec![LinExpr::new(); self.sets.n_specs]; self.inst.tanks.len()];
            for (k, tank) in self.inst.tanks.iter().enumerate() {
                let k32 = k as u32;
                let vmid = self.m.id(&VarKey::VMid { k: k32, t }).expect("volume");
                let yout = self.m.id(&VarKey::YOut { k: k32, t });
                for q in 0..self.sets.n_specs {
                    let q32 = q as u32;
                    let u = reach[k][q].1;
                    let fm = self.m.var(VarKey::VfMid { k: k32, q: q32, t }, 0.0, u * tank.v_max, false);
                    let fe = self.m.var(VarKey::VfEnd { k: k32, q: q32, t }, 0.0, u * tank.v_max, false);
                    let mut out = LinExpr::new();
                    out.add(fm, 1.0).add(fe, -1.0);
                    let fo = yout.map(|_| self.m.var(VarKey::YfOut { k: k32, q: q32, t }, 0.0, u * d, false));
                    if let Some(fo) = fo {
                        out.add(fo, -1.0);
                        mass[k][q].add(fo, 1.0);
                    }
                    self.m.add_row(Tag::SpecOutflow, vec![k32, q32, t], out, 0.0, 0.0);

                    let mut blend = self.inflow_mass(k, q, t);
                    blend.add(fm, -1.0);
                    if t == scope.start {
                        blend.add_const(scope.f0[k][q] * scope.v0[k]);
                    } else {
                        let prev = self.m.id(&VarKey::VfEnd { k: k32, q: q32, t: t - 1 }).expect("prev");
                        blend.add(prev, 1.0);
                    }
                    self.m.add_row(Tag::Blend, vec![k32, q32, t], blend, 0.0, 0.0);

                    if let (Some(y), Some(fo)) = (yout, fo) {
                        self.quad.push(QuadRow {
                            tag: Tag::Split,
                            index: vec![k32, q32, t],
                            linear: vec![],
                            quad: vec![(fm, y, 1.0), (fo, vmid, -1.0)],
                            lo: 0.0,
                            hi: 0.0,
                        });
                    }
                }
            }
            if d > 0.0 {
                self.feed_spec_rows(t, &mass);
            }
        }
    }

    fn specs_mix(&mut self) {
        let scope = self.scope;
        let reach = reachable_in_scope(self.sets, scope);
        let nk = self.inst.tanks.len();
        for t in scope.days() {
            for k in 0..nk {
                let k32 = k as u32;
                let vmid = self.m.id(&VarKey::VMid { k: k32, t }).expect("volume");
                let vend = self.m.id(&VarKey::VEnd { k: k32, t }).expect("volume");
                let yout = self.m.id(&VarKey::YOut { k: k32, t });
                for q in 0..self.sets.n_specs {
                    let q32 = q as u32;
                    let (l, u) = reach[k][q];
                    let f = self.m.var(VarKey::Spec { k: k32, q: q32, t }, l, u, false);
                    let mut quad = vec![(f, vmid, 1.0), (f, vend, -1.0)];
                    if let Some(y) = yout {
                        quad.push((f, y, -1.0));
                    }
                    self.quad.push(QuadRow {
                        tag: Tag::SpecOutflow,
                        index: vec![k32, q32, t],
                        linear: vec![],
                        quad,
                        lo: 0.0,
                        hi: 0.0,
                    });
                    let inflow = self.inflow_mass(k, q, t);
                    let mut quad = vec![(f, vmid, 1.0)];
                    let mut rhs = 0.0;
                    if t == scope.start {
                        rhs = scope.f0[k][q] * scope.v0[k];
                    } else {
                        let fp = self.m.id(&VarKey::Spec { k: k32, q: q32, t: t - 1 }).expect("prev");
                        let vp = self.m.id(&VarKey::VEnd { k: k32, t: t - 1 }).expect("prev");
                        quad.push((fp, vp, -1.0));
                    }
                    self.quad.push(QuadRow {
                        tag: Tag::Blend,
                        index: vec![k32, q32, t],
                        linear: inflow.terms.iter().map(|&(v, c)| (v, -c)).collect(),
                        quad,
                        lo: rhs,
                        hi: rhs,
                    });
                }
            }
            let Some(r) = self.feed_bounds(t) else { continue };
            if self.demand(t) <= 0.0 {
                continue;
            }
            let youts: Vec<VarId> =
                (0..nk).map(|k| self.m.id(&VarKey::YOut { k: k as u32, t }).expect("feed")).collect();
            let spec = |m: &MilpModel, k: usize, q: usize| {
                m.id(&VarKey::Spec { k: k as u32, q: q as u32, t }).expect("spec")
            };
            for q in 0..self.sets.n_specs {
                let Some((lo, hi)) = self.bounds.spec[r][q] else { continue };
                for (tag, bound, rlo, rhi) in [
                    (Tag::FeedSpecLo, lo, 0.0, f64::INFINITY),
                    (Tag::FeedSpecHi, hi, f64::NEG_INFINITY, 0.0),
                ] {
                    self.quad.push(QuadRow {
                        tag,
                        index: vec![q as u32, t],
                        linear: youts.iter().map(|&y| (y, -bound)).collect(),
                        quad: (0..nk).map(|k| (spec(&self.m, k, q), youts[k], 1.0)).collect(),
                        lo: rlo,
                        hi: rhi,
                    });
                }
            }
            for (j, rb) in self.bounds.ratio[r].iter().enumerate() {
                for (tag, bound, rlo, rhi) in [
                    (Tag::FeedRatioLo, rb.lo, 0.0, f64::INFINITY),
                    (Tag::FeedRatioHi, rb.hi, f64::NEG_INFINITY, 0.0),
                ] {
                    let mut quad = Vec::new();
                    for k in 0..nk {
                        quad.push((spec(&self.m, k, rb.num), youts[k], 1.0));
                        quad.push((spec(&self.m, k, rb.den), youts[k], -bound));
                    }
                    self.quad.push(QuadRow {
                        tag,
                        index: vec![j as u32, t],
                        linear: vec![],
                        quad,
                        lo: rlo,
                        hi: rhi,
                    });
                }
            }
        }
    }

    /// Whether a product row is omitted under the Center transformations.
    fn dropped(&self, fam: Family, side: Side) -> bool {
        if self.method != Method::Center {
            return false;
        }
        let lower_pair = matches!(side, Side::Lo | Side::CompHi);
        let CenterOptions { coupling, relax_avol } = self.center;
        match (fam, lower_pair) {
            (Family::Mid, true) => coupling || relax_avol,
            (Family::End, false) => coupling,
            (Family::End, true) => relax_avol,
            (Family::Out, false) => relax_avol,
            _ => false,
        }
    }

    /// Envelope rows for `w = x * beta` scaled by `scale` (`w <= scale * x`).
    #[allow(clippy::too_many_arguments)]
    fn envelope(
        &mut self,
        tag: fn(Family, Side) -> Tag,
        fam: Family,
        index: Vec<u32>,
        w: VarId,
        x: VarId,
        beta: VarId,
        (xmin, xmax): (f64, f64),
        scale: f64,
    ) {
        for side in Side::ALL {
            if self.dropped(fam, side) {
                continue;
            }
            let mut e = LinExpr::new();
            e.add(w, 1.0);
            let (lo, hi) = match side {
                Side::Lo => {
                    e.add(beta, -xmin);
                    (0.0, f64::INFINITY)
                }
                Side::Hi => {
                    e.add(beta, -xmax);
                    (f64::NEG_INFINITY, 0.0)
                }
                Side::CompLo => {
                    e.add(x, -scale).add(beta, -xmax);
                    (-xmax * scale, f64::INFINITY)
                }
                Side::CompHi => {
                    e.add(x, -scale).add(beta, -xmin);
                    (f64::NEG_INFINITY, -xmin * scale)
                }
            };
            self.m.add_row(tag(fam, side), index.clone(), e, lo, hi);
        }
        let lower_dropped = self.dropped(fam, Side::Lo);
        if lower_dropped && xmin > 0.0 {
            // keep w <= scale * x from the nonnegativity envelope
            let mut e = LinExpr::new();
            e.add(w, 1.0).add(x, -scale);
            self.m.add_row(tag(fam, Side::CompHi), index, e, f64::NEG_INFINITY, 0.0);
        }
    }

    fn specs_digits(&mut self) {
        let scope = self.scope;
        let plans = self.plans.clone().expect("approximation needs plans");
        let center = self.method == Method::Center;
        self.prev_end = vec![vec![LinExpr::new(); self.sets.n_specs]; self.inst.tanks.len()];
        for t in scope.days() {
            let d = self.demand(t);
            let mut mass = vec![vec![LinExpr::new(); self.sets.n_specs]; self.inst.tanks.len()];
            for (k, tank) in self.inst.tanks.iter().enumerate() {
                let k32 = k as u32;
                let vmid = self.m.id(&VarKey::VMid { k: k32, t }).expect("volume");
                let vend = self.m.id(&VarKey::VEnd { k: k32, t }).expect("volume");
                let yout = self.m.id(&VarKey::YOut { k: k32, t });
                let mut fams = vec![
                    (Family::Mid, vmid, (tank.v_min, tank.v_max)),
                    (Family::End, vend, (tank.v_min, tank.v_max)),
                ];
                if let Some(y) = yout {
                    fams.push((Family::Out, y, (0.0, d)));
                }
                for q in 0..self.sets.n_specs {
                    let q32 = q as u32;
                    let p = &plans[k][q];
                    let alphas: Vec<VarId> = (0..p.n)
                        .map(|i| self.binary(VarKey::Alpha { k: k32, q: q32, t, i }, scope.alpha[t as usize]))
                        .collect();
                    let delta = (!center).then(|| {
                        self.m.var(VarKey::DeltaF { k: k32, q: q32, t }, 0.0, p.eps, false)
                    });
                    let mut xf = Vec::new();
                    for &(fam, x, (xmin, xmax)) in &fams {
                        let mut e = LinExpr::new();
                        let base = if center { p.lambda0 + p.eps / 2.0 } else { p.lambda0 };
                        e.add(x, base);
                        for (i, &a) in alphas.iter().enumerate() {
                            let i32_ = i as u32;
                            let w = self.m.var(
                                VarKey::XAlpha { fam, k: k32, q: q32, t, i: i32_ },
                                0.0,
                                xmax,
                                false,
                            );
                            self.envelope(Tag::DigitEnvelope, fam, vec![k32, q32, t, i32_], w, x, a, (xmin, xmax), 1.0);
                            e.add(w, p.eps * p.weight(i32_));
                        }
                        if let Some(dv) = delta {
                            let z = self.m.var(
                                VarKey::XDelta { fam, k: k32, q: q32, t },
                                0.0,
                                p.eps * xmax,
                                false,
                            );
                            self.envelope(Tag::ResidualEnvelope, fam, vec![k32, q32, t], z, x, dv, (xmin, xmax), p.eps);
                            e.add(z, 1.0);
                        }
                        xf.push((fam, e));
                    }
                    let get = |f: Family| xf.iter().find(|(g, _)| *g == f).map(|(_, e)| e.clone());
                    let mid = get(Family::Mid).expect("mid");
                    let end = get(Family::End).expect("end");
                    let out = get(Family::Out);

                    let mut row = mid.clone();
                    row.add_expr(&end, -1.0);
                    if let Some(o) = &out {
                        row.add_expr(o, -1.0);
                        mass[k][q] = o.clone();
                    }
                    self.m.add_row(Tag::SpecOutflow, vec![k32, q32, t], row, 0.0, 0.0);

                    let mut blend = mid;
                    blend.add_expr(&self.inflow_mass(k, q, t), -1.0);
                    if t == scope.start {
                        blend.add_const(-scope.f0[k][q] * scope.v0[k]);
                    } else {
                        blend.add_expr(&self.prev_end[k][q], -1.0);
                    }
                    if center {
                        let mut lo = blend.clone();
                        lo.add(vmid, -p.eps / 2.0);
                        self.m.add_row(Tag::BlendLo, vec![k32, q32, t], lo, f64::NEG_INFINITY, 0.0);
                        let mut hi = blend;
                        hi.add(vmid, p.eps / 2.0);
                        self.m.add_row(Tag::BlendHi, vec![k32, q32, t], hi, 0.0, f64::INFINITY);
                    } else {
                        self.m.add_row(Tag::Blend, vec![k32, q32, t], blend, 0.0, 0.0);
                    }
                    self.prev_end[k][q] = end;

                    if center && self.center.coupling {
                        for i in 0..p.n {
                            let key = |fam| VarKey::XAlpha { fam, k: k32, q: q32, t, i };
                            let mut e = LinExpr::new();
                            e.add(self.m.id(&key(Family::Mid)).expect("x_alpha"), 1.0);
                            e.add(self.m.id(&key(Family::End)).expect("x_alpha"), -1.0);
                            if let Some(o) = self.m.id(&key(Family::Out)) {
                                e.add(o, -1.0);
                            }
                            self.m.add_row(Tag::DigitCoupling, vec![k32, q32, t, i], e, 0.0, 0.0);
                        }
                    }
                }
            }
            if d > 0.0 {
                self.feed_spec_rows(t, &mass);
            }
        }
    }
}

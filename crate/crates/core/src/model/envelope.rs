//! Stand-alone McCormick blocks for a bounded variable times one-hot digits.

use super::{LinExpr, MilpModel, Side, Tag, VarId, VarKey, Family};

/// Handles of a block created by [`mccormick_m`].
#[derive(Debug, Clone)]
pub struct McCormickBlock {
    pub model: MilpModel,
    pub x: VarId,
    pub alpha: Vec<VarId>,
    pub x_alpha: Vec<VarId>,
}

/// Interval allowed for `x * beta` by the four envelope rows at fixed `x`, `beta`.
pub fn envelope_interval(xmin: f64, xmax: f64, x: f64, beta: f64) -> (f64, f64) {
    let lo = (xmin * beta).max(x - xmax * (1.0 - beta));
    let hi = (xmax * beta).min(x - xmin * (1.0 - beta));
    (lo, hi)
}

/// Lifted envelope of `x` times the one-hot vector `alpha_0..alpha_m`:
/// `sum alpha_j = 1`, `sum x_alpha_j = x`, and the envelope of each product.
pub fn mccormick_m(xmin: f64, xmax: f64, m: u32) -> McCormickBlock {
    let mut model = MilpModel::new();
    let x = model.var(VarKey::VMid { k: 0, t: 0 }, xmin, xmax, false);
    let mut alpha = Vec::new();
    let mut x_alpha = Vec::new();
    let mut one = LinExpr::new();
    let mut sum = LinExpr::new();
    sum.add(x, -1.0);
    for j in 0..=m {
        let a = model.var(VarKey::Alpha { k: 0, q: 0, t: 0, i: j }, 0.0, 1.0, true);
        let w = model.var(
            VarKey::XAlpha { fam: Family::Mid, k: 0, q: 0, t: 0, i: j },
            xmin.min(0.0),
            xmax.max(0.0),
            false,
        );
        one.add(a, 1.0);
        sum.add(w, 1.0);
        for side in Side::ALL {
            let mut e = LinExpr::new();
            e.add(w, 1.0);
            let (lo, hi) = match side {
                Side::Lo => {
                    e.add(a, -xmin);
                    (0.0, f64::INFINITY)
                }
                Side::Hi => {
                    e.add(a, -xmax);
                    (f64::NEG_INFINITY, 0.0)
                }
                Side::CompLo => {
                    e.add(x, -1.0).add(a, -xmax);
                    (-xmax, f64::INFINITY)
                }
                Side::CompHi => {
                    e.add(x, -1.0).add(a, -xmin);
                    (f64::NEG_INFINITY, -xmin)
                }
            };
            model.add_row(Tag::DigitEnvelope(Family::Mid, side), vec![j], e, lo, hi);
        }
        alpha.push(a);
        x_alpha.push(w);
    }
    model.add_row(Tag::DigitOneHot, vec![], one, 1.0, 1.0);
    model.add_row(Tag::DigitSum, vec![], sum, 0.0, 0.0);
    McCormickBlock { model, x, alpha, x_alpha }
}

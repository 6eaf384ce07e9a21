use log::warn;
use serde::{Deserialize, Serialize};

use super::Scope;
use crate::error::{Error, Result};
use crate::instance::{derive_sets, DerivedSets, Instance};

/// Spec range each tank can reach: `[tank][spec] -> (lo, hi)`.
pub fn reachable_spec_bounds(inst: &Instance) -> Result<Vec<Vec<(f64, f64)>>> {
    let sets = derive_sets(inst)?;
    let scope = Scope::full(inst, &sets);
    Ok(reachable_in_scope(&sets, &scope))
}

/// Range over the tank state at the scope start and every active barge allowed into it.
pub(crate) fn reachable_in_scope(sets: &DerivedSets, scope: &Scope) -> Vec<Vec<(f64, f64)>> {
    scope
        .f0
        .iter()
        .enumerate()
        .map(|(k, f0)| {
            (0..sets.n_specs)
                .map(|q| {
                    let mut lo = f0[q];
                    let mut hi = f0[q];
                    for &s in &sets.tank_barges[k] {
                        if scope.barges[s].active && scope.barges[s].cap > 0.0 {
                            lo = lo.min(sets.barge_spec[s][q]);
                            hi = hi.max(sets.barge_spec[s][q]);
                        }
                    }
                    (lo, hi)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBounds {
    pub num: usize,
    pub den: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Run requirements after adding precision buffers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightenedBounds {
    /// `[run][spec]`
    pub spec: Vec<Vec<Option<(f64, f64)>>>,
    /// `[run]`
    pub ratio: Vec<Vec<RatioBounds>>,
    pub warnings: Vec<String>,
}

impl TightenedBounds {
    /// Original requirements without any buffer.
    pub fn untightened(sets: &DerivedSets) -> Self {
        TightenedBounds {
            spec: sets.run_spec_bounds.clone(),
            ratio: sets
                .run_ratios
                .iter()
                .map(|rs| {
                    rs.iter()
                        .map(|r| RatioBounds { num: r.num, den: r.den, lo: r.lo, hi: r.hi })
                        .collect()
                })
                .collect(),
            warnings: Vec::new(),
        }
    }
}

/// Shrinks `[lo, hi]` by `buf` on both sides, keeping at least `min_width`.
fn shrink(lo: f64, hi: f64, buf: f64, min_width: f64, what: &str, warnings: &mut Vec<String>) -> (f64, f64) {
    let width = hi - lo;
    if buf <= 0.0 {
        return (lo, hi);
    }
    if width < min_width {
        let msg = format!("{what}: width {width} is below the precision {min_width}; no buffer applied");
        warn!("{msg}");
        warnings.push(msg);
        return (lo, hi);
    }
    let b = buf.min((width - min_width) / 2.0);
    (lo + b, hi - b)
}

/// Buffers run spec bounds by `eps_hat[q] / 2` and ratio bounds by the ratio differential.
pub fn tighten(inst: &Instance, eps_hat: &[f64]) -> Result<TightenedBounds> {
    let sets = derive_sets(inst)?;
    let reach = reachable_spec_bounds(inst)?;
    tighten_with(inst, &sets, &reach, eps_hat)
}

pub(crate) fn tighten_with(
    inst: &Instance,
    sets: &DerivedSets,
    reach: &[Vec<(f64, f64)>],
    eps_hat: &[f64],
) -> Result<TightenedBounds> {
    if eps_hat.len() != sets.n_specs {
        return Err(Error::Build(format!(
            "expected {} precision values, got {}",
            sets.n_specs,
            eps_hat.len()
        )));
    }
    let mut out = TightenedBounds::untightened(sets);
    for (r, run) in inst.runs.iter().enumerate() {
        for q in 0..sets.n_specs {
            if let Some((lo, hi)) = sets.run_spec_bounds[r][q] {
                let what = format!("run {} spec {}", run.id, inst.specs[q].id);
                out.spec[r][q] = Some(shrink(lo, hi, eps_hat[q] / 2.0, eps_hat[q], &what, &mut out.warnings));
            }
        }
        for (j, req) in sets.run_ratios[r].iter().enumerate() {
            let f1_max = reach.iter().map(|t| t[req.num].1).fold(f64::NEG_INFINITY, f64::max);
            let f2_min = reach.iter().map(|t| t[req.den].0).fold(f64::INFINITY, f64::min);
            if !(f2_min > 0.0) {
                return Err(Error::Build(format!(
                    "run {}: ratio denominator {} can reach zero concentration",
                    run.id, inst.specs[req.den].id
                )));
            }
            let d1 = eps_hat[req.num] / 2.0;
            let d2 = eps_hat[req.den] / 2.0;
            let delta = d1 / f2_min + f1_max / (f2_min * f2_min) * d2;
            let what = format!(
                "run {} ratio {}/{}",
                run.id, inst.specs[req.num].id, inst.specs[req.den].id
            );
            let (lo, hi) = shrink(req.lo, req.hi, delta, 2.0 * delta, &what, &mut out.warnings);
            out.ratio[r][j].lo = lo;
            out.ratio[r][j].hi = hi;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::synth;
    use approx::assert_relative_eq;

    fn one_tank(init: f64, barges: &[f64]) -> Instance {
        let mut inst = synth::toy();
        inst.tanks[0].specs_init.insert("S1".into(), init);
        let proto = inst.barges[0].clone();
        inst.barges = barges
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let mut b = proto.clone();
                b.id = format!("b{i}");
                b.specs.insert("S1".into(), f);
                b
            })
            .collect();
        inst
    }

    #[test]
    fn reachable_is_min_max() {
        assert_eq!(reachable_spec_bounds(&one_tank(10.0, &[12.0, 8.0])).unwrap()[0][0], (8.0, 12.0));
        assert_eq!(reachable_spec_bounds(&one_tank(10.0, &[])).unwrap()[0][0], (10.0, 10.0));
        assert_eq!(reachable_spec_bounds(&one_tank(10.0, &[10.0])).unwrap()[0][0], (10.0, 10.0));
    }

    #[test]
    fn spec_buffer_half_precision() {
        let mut inst = synth::toy();
        inst.runs[0].spec_bounds.insert("S1".into(), [40.0, 60.0]);
        let t = tighten(&inst, &[1.0]).unwrap();
        assert_eq!(t.spec[0][0], Some((40.5, 59.5)));
        let t0 = tighten(&inst, &[0.0]).unwrap();
        assert_eq!(t0.spec[0][0], Some((40.0, 60.0)));
    }

    #[test]
    fn narrow_interval_keeps_one_bin() {
        let mut inst = synth::toy();
        inst.runs[0].spec_bounds.insert("S1".into(), [40.0, 41.5]);
        let t = tighten(&inst, &[1.0]).unwrap();
        let (lo, hi) = t.spec[0][0].unwrap();
        assert_relative_eq!(hi - lo, 1.0);
        assert_relative_eq!(lo, 40.25);
        inst.runs[0].spec_bounds.insert("S1".into(), [40.0, 40.5]);
        let t = tighten(&inst, &[1.0]).unwrap();
        assert_eq!(t.spec[0][0], Some((40.0, 40.5)));
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn ratio_differential() {
        // one tank reaching S1 in [.., 60] and S2 in [30, ..]
        let mut inst = synth::reference_three_tank();
        inst.tanks.truncate(1);
        inst.tanks[0].specs_init = [("S1".to_string(), 60.0), ("S2".to_string(), 30.0)].into();
        for b in &mut inst.barges {
            b.allowed_tanks = vec!["T1".into()];
            b.specs = [("S1".to_string(), 50.0), ("S2".to_string(), 35.0)].into();
        }
        for r in &mut inst.runs {
            r.ratio_bounds[0].bounds = [1.0, 2.0];
        }
        let t = tighten(&inst, &[1.0, 1.0]).unwrap();
        let rb = t.ratio[0][0];
        assert_relative_eq!(rb.lo, 1.05, epsilon = 1e-12);
        assert_relative_eq!(rb.hi, 1.95, epsilon = 1e-12);
    }

    #[test]
    fn zero_denominator_rejected() {
        let mut inst = synth::reference_three_tank();
        inst.barges[0].specs.insert("S2".into(), 0.0);
        assert!(tighten(&inst, &[1.0, 1.0]).is_err());
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{validate_instance, Instance};
use crate::error::{Error, Result};

/// Repeats runs and barge arrivals with period equal to the original horizon.
///
/// Replica `r` is shifted by `r * horizon` days; its ids get an `@r` suffix.
/// Runs or barges that would not fit completely inside `target_h` are dropped.
pub fn extend_periodic(inst: &Instance, target_h: u32) -> Result<Instance> {
    let period = inst.ops.horizon;
    if target_h < period {
        return Err(Error::Config(format!(
            "target horizon {target_h} is shorter than the instance horizon {period}"
        )));
    }
    let mut out = inst.clone();
    out.ops.horizon = target_h;
    out.runs.clear();
    out.barges.clear();
    let suffix = |id: &str, r: u32| if r == 0 { id.to_string() } else { format!("{id}@{r}") };
    let mut r = 0u32;
    while r * period < target_h {
        let shift = r * period;
        for run in &inst.runs {
            let days = [run.days[0] + shift, run.days[1] + shift];
            if days[1] < target_h {
                let mut run = run.clone();
                run.id = suffix(&run.id, r);
                run.days = days;
                out.runs.push(run);
            }
        }
        for b in &inst.barges {
            let window = [b.window[0] + shift, b.window[1] + shift];
            if window[1] < target_h {
                let mut b = b.clone();
                b.id = suffix(&b.id, r);
                b.window = window;
                out.barges.push(b);
            }
        }
        r += 1;
    }
    Ok(out)
}

/// Days `[start, start + horizon)` of an instance, renumbered from zero.
///
/// Runs and barge windows are clipped to the new horizon; those falling
/// entirely outside are dropped. Tank initial states are kept.
pub fn crop(inst: &Instance, start: u32, horizon: u32) -> Result<Instance> {
    if horizon == 0 || start + horizon > inst.ops.horizon {
        return Err(Error::Config(format!(
            "cannot crop [{start}, {}) from a {}-day instance",
            start + horizon,
            inst.ops.horizon
        )));
    }
    let end = start + horizon - 1;
    let clip = |[a, b]: [u32; 2]| (b >= start && a <= end).then(|| [a.max(start) - start, b.min(end) - start]);
    let mut out = inst.clone();
    out.ops.horizon = horizon;
    out.runs = inst
        .runs
        .iter()
        .filter_map(|r| clip(r.days).map(|days| crate::instance::Run { days, ..r.clone() }))
        .collect();
    out.barges = inst
        .barges
        .iter()
        .filter_map(|b| clip(b.window).map(|window| crate::instance::Barge { window, ..b.clone() }))
        .collect();
    Ok(out)
}

/// Relative jitter ranges for [`randomize_supply`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomizationParams {
    /// Barge volume is scaled by a factor drawn from `[1 - volume, 1 + volume]`.
    pub volume: f64,
    /// Each barge spec value is scaled by a factor from `[1 - spec, 1 + spec]`.
    pub spec: f64,
    /// Windows move by a whole number of days in `[-window_shift, window_shift]`.
    pub window_shift: u32,
}

impl Default for RandomizationParams {
    fn default() -> Self {
        Self {
            volume: 0.05,
            spec: 0.10,
            window_shift: 2,
        }
    }
}

impl RandomizationParams {
    pub fn none() -> Self {
        Self {
            volume: 0.0,
            spec: 0.0,
            window_shift: 0,
        }
    }
}

/// A sampled value that had to be pulled back inside its admissible range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampNote {
    pub barge: String,
    pub field: String,
    pub sampled: f64,
    pub used: f64,
}

fn scale(rng: &mut ChaCha8Rng, x: f64, rel: f64) -> f64 {
    if rel == 0.0 {
        x
    } else {
        x * rng.gen_range(1.0 - rel..=1.0 + rel)
    }
}

/// Perturbs barge volumes, spec values, and arrival windows. Deterministic per seed.
pub fn randomize_supply(
    inst: &Instance,
    seed: u64,
    jitter: &RandomizationParams,
) -> Result<(Instance, Vec<ClampNote>)> {
    let rep = validate_instance(inst);
    if !rep.is_valid() {
        return Err(Error::InvalidInstance(rep.to_string()));
    }
    if !(0.0..1.0).contains(&jitter.volume) || !(jitter.spec >= 0.0) {
        return Err(Error::Config(
            "volume jitter must lie in [0, 1) and spec jitter must be non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = inst.clone();
    let mut notes = Vec::new();
    let h = inst.ops.horizon as i64;
    for b in &mut out.barges {
        b.volume = scale(&mut rng, b.volume, jitter.volume);
        for (q, v) in b.specs.iter_mut() {
            let sampled = scale(&mut rng, *v, jitter.spec);
            let used = sampled.clamp(0.0, 100.0);
            if used != sampled {
                notes.push(ClampNote {
                    barge: b.id.clone(),
                    field: format!("specs.{q}"),
                    sampled,
                    used,
                });
            }
            *v = used;
        }
        if jitter.window_shift > 0 {
            let w = jitter.window_shift as i64;
            let shift = rng.gen_range(-w..=w);
            let len = (b.window[1] - b.window[0]) as i64;
            let start = b.window[0] as i64 + shift;
            let clamped = start.clamp(0, h - 1 - len);
            if clamped != start {
                notes.push(ClampNote {
                    barge: b.id.clone(),
                    field: "window".into(),
                    sampled: start as f64,
                    used: clamped as f64,
                });
            }
            b.window = [clamped as u32, (clamped + len) as u32];
        }
    }
    Ok((out, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::synth;

    #[test]
    fn periodic_identity_at_same_horizon() {
        let inst = synth::reference_three_tank();
        let ext = extend_periodic(&inst, inst.ops.horizon).unwrap();
        assert_eq!(ext, inst);
    }

    #[test]
    fn periodic_shifts_windows() {
        let mut inst = synth::toy();
        inst.ops.horizon = 30;
        inst.barges.truncate(1);
        inst.barges[0].window = [0, 25];
        inst.runs[0].days = [0, 9];
        let ext = extend_periodic(&inst, 60).unwrap();
        assert_eq!(ext.barges.len(), 2);
        assert_eq!(ext.barges[1].window, [30, 55]);
        assert_eq!(ext.barges[1].id, format!("{}@1", inst.barges[0].id));
        assert_eq!(ext.runs[1].days, [30, 39]);
    }

    #[test]
    fn periodic_rejects_shorter_target() {
        let inst = synth::toy();
        assert!(extend_periodic(&inst, inst.ops.horizon - 1).is_err());
    }

    #[test]
    fn reference_year_has_33_arrivals() {
        let base = synth::reference_119_day();
        assert_eq!(base.ops.horizon, 119);
        let year = extend_periodic(&base, 368).unwrap();
        assert_eq!(year.barges.len(), 33);
        assert!(validate_instance(&year).is_valid());
    }

    #[test]
    fn zero_jitter_is_identity() {
        let inst = synth::reference_three_tank();
        let (out, notes) = randomize_supply(&inst, 9, &RandomizationParams::none()).unwrap();
        assert_eq!(out, inst);
        assert!(notes.is_empty());
    }

    #[test]
    fn equal_seeds_equal_output() {
        let inst = synth::reference_three_tank();
        let p = RandomizationParams::default();
        let a = randomize_supply(&inst, 1, &p).unwrap().0;
        let b = randomize_supply(&inst, 1, &p).unwrap().0;
        assert_eq!(a, b);
        let c = randomize_supply(&inst, 2, &p).unwrap().0;
        assert_ne!(a, c);
    }

    #[test]
    fn spec_jitter_within_band() {
        let mut inst = synth::toy();
        for b in &mut inst.barges {
            for v in b.specs.values_mut() {
                *v = 50.0;
            }
        }
        let p = RandomizationParams { volume: 0.0, spec: 0.10, window_shift: 0 };
        for seed in 0..50 {
            let (out, _) = randomize_supply(&inst, seed, &p).unwrap();
            for b in &out.barges {
                for &v in b.specs.values() {
                    assert!((45.0..=55.0).contains(&v), "{v}");
                }
            }
            assert!(validate_instance(&out).is_valid());
        }
    }
}

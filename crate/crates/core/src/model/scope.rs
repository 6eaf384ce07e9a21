use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::VarKey;
use crate::instance::{DerivedSets, Instance};

/// How a binary column enters a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Treat {
    Binary,
    /// Continuous on `[0, 1]`.
    Relaxed,
    /// Bounds pinned to the value recorded in [`Scope::fixed`].
    Fixed,
}

/// What is left of a barge when a model covers only part of the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BargeScope {
    pub active: bool,
    /// Volume this model may (and is penalized for failing to) unload.
    pub cap: f64,
    /// Effective inclusive window.
    pub window: (u32, u32),
    pub unloads_left: u32,
    /// First and last unload days before the model start, if any.
    pub prior: Option<(u32, u32)>,
    /// Minimum quantity per unloading day.
    pub min_unload: f64,
}

/// Time window, initial state, and binary treatments for one model build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    pub start: u32,
    /// Exclusive.
    pub end: u32,
    /// Tank volume at the end of day `start - 1`.
    pub v0: Vec<f64>,
    /// Tank specs at the end of day `start - 1`, `[tank][spec]`.
    pub f0: Vec<Vec<f64>>,
    pub barges: Vec<BargeScope>,
    /// Per-tank feed that a run already in progress at `start` must keep.
    pub feed_pin: Option<Vec<f64>>,
    /// Treatment per global day index.
    pub gamma: Vec<Treat>,
    pub sigma: Vec<Treat>,
    pub alpha: Vec<Treat>,
    pub fixed: BTreeMap<VarKey, f64>,
}

impl Scope {
    /// Whole horizon, original initial state, every binary integral.
    pub fn full(inst: &Instance, sets: &DerivedSets) -> Self {
        let h = inst.ops.horizon;
        let barges = inst
            .barges
            .iter()
            .enumerate()
            .map(|(s, b)| BargeScope {
                active: true,
                cap: b.volume,
                window: sets.windows[s],
                unloads_left: inst.ops.max_unloads_per_barge,
                prior: None,
                min_unload: inst.ops.min_daily_unload_pct * b.volume,
            })
            .collect();
        Scope {
            start: 0,
            end: h,
            v0: inst.tanks.iter().map(|k| k.v_init).collect(),
            f0: sets.tank_spec_init.clone(),
            barges,
            feed_pin: None,
            gamma: vec![Treat::Binary; h as usize],
            sigma: vec![Treat::Binary; h as usize],
            alpha: vec![Treat::Binary; h as usize],
            fixed: BTreeMap::new(),
        }
    }

    pub fn contains(&self, t: u32) -> bool {
        self.start <= t && t < self.end
    }

    pub fn days(&self) -> std::ops::Range<u32> {
        self.start..self.end
    }

    /// Days of barge `s` that fall inside the scope.
    pub fn barge_days(&self, s: usize) -> std::ops::Range<u32> {
        let b = &self.barges[s];
        if !b.active {
            return 0..0;
        }
        let a = b.window.0.max(self.start);
        let z = (b.window.1 + 1).min(self.end);
        a..z.max(a)
    }
}

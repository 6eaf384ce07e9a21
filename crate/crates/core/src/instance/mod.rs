//! Problem data: supply barges, storage tanks, tracked specs, and demand runs.
//!
//! Days are a 0-based integer grid `0..horizon`. Tank initial state is the
//! inventory at the end of "day -1". Spec concentrations are percentage points.

mod derive;
mod gen;
mod io;
pub mod synth;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use derive::{derive_sets, DerivedSets, RatioReq};
pub use gen::{crop, extend_periodic, randomize_supply, ClampNote, RandomizationParams};
pub use io::{from_json_str, read_instance, to_json_string, write_instance};
pub use validate::{validate_instance, ValidationReport, Violation};

/// Schema tag written into every canonical instance file.
pub const SCHEMA: &str = "blendplan-instance/1";

fn default_schema() -> String {
    SCHEMA.to_string()
}

fn default_unit() -> String {
    "pct".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDef {
    pub id: String,
    #[serde(default = "default_unit")]
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Barge {
    pub id: String,
    /// Metric tons on board at arrival.
    pub volume: f64,
    pub specs: BTreeMap<String, f64>,
    /// Inclusive day window during which the barge may be unloaded.
    pub window: [u32; 2],
    /// Cost per metric ton left on board.
    pub unload_penalty: f64,
    pub allowed_tanks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tank {
    pub id: String,
    pub v_max: f64,
    pub v_min: f64,
    pub v_init: f64,
    pub specs_init: BTreeMap<String, f64>,
    /// Minimum share of the daily feed drawn from this tank when it feeds at all.
    pub min_feed_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioBound {
    pub num: String,
    pub den: String,
    pub bounds: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    pub id: String,
    /// Inclusive day interval.
    pub days: [u32; 2],
    pub daily_demand: f64,
    #[serde(default)]
    pub spec_bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub ratio_bounds: Vec<RatioBound>,
    pub miss_penalty: f64,
}

impl Run {
    pub fn len(&self) -> u32 {
        self.days[1] + 1 - self.days[0]
    }

    pub fn is_empty(&self) -> bool {
        self.days[1] < self.days[0]
    }

    pub fn contains(&self, t: u32) -> bool {
        self.days[0] <= t && t <= self.days[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpsParams {
    pub max_unloads_per_day: u32,
    pub max_unloads_per_barge: u32,
    /// Maximum days between the first and last unload of a barge.
    pub max_unload_gap: u32,
    pub min_daily_unload_pct: f64,
    pub horizon: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub specs: Vec<SpecDef>,
    pub barges: Vec<Barge>,
    pub tanks: Vec<Tank>,
    pub runs: Vec<Run>,
    pub ops: OpsParams,
}

impl Instance {
    pub fn horizon(&self) -> u32 {
        self.ops.horizon
    }

    pub fn spec_index(&self, id: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.id == id)
    }

    pub fn tank_index(&self, id: &str) -> Option<usize> {
        self.tanks.iter().position(|t| t.id == id)
    }

    pub fn barge_index(&self, id: &str) -> Option<usize> {
        self.barges.iter().position(|b| b.id == id)
    }

    /// Daily demand, zero outside every run.
    pub fn demand(&self, t: u32) -> f64 {
        self.runs
            .iter()
            .find(|r| r.contains(t))
            .map_or(0.0, |r| r.daily_demand)
    }
}

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Full,
    Partial,
}

impl std::str::FromStr for Scheme {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "full" => Ok(Scheme::Full),
            "partial" => Ok(Scheme::Partial),
            other => Err(crate::Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Past,
    Present,
    Near,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Treatment {
    Fixed,
    Active,
    Relaxed,
    Omitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarGroup {
    /// Volumes and flows.
    Flows,
    /// Spec masses and spec values.
    SpecMass,
    Demand,
    UnloadTimes,
    Gamma,
    Sigma,
    Alpha,
}

pub const VAR_GROUPS: [VarGroup; 7] = [
    VarGroup::Flows,
    VarGroup::SpecMass,
    VarGroup::Demand,
    VarGroup::UnloadTimes,
    VarGroup::Gamma,
    VarGroup::Sigma,
    VarGroup::Alpha,
];

/// Treatment of each variable group in each time segment of a rolling step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentPolicy {
    pub scheme: Scheme,
}

impl SegmentPolicy {
    pub fn new(scheme: Scheme) -> Self {
        SegmentPolicy { scheme }
    }

    pub fn treatment(&self, group: VarGroup, seg: Segment) -> Treatment {
        use Segment::*;
        use Treatment::*;
        use VarGroup::*;
        match self.scheme {
            Scheme::Full => match (group, seg) {
                (Gamma | Sigma | Alpha, Past) => Fixed,
                (Gamma, Near) => Active,
                (Sigma | Alpha, Near) => Relaxed,
                (Gamma | Sigma | Alpha, Far) => Relaxed,
                _ => Active,
            },
            Scheme::Partial => match (group, seg) {
                (_, Past) => Fixed,
                (_, Far) => Omitted,
                (Sigma | Alpha, Near) => Relaxed,
                _ => Active,
            },
        }
    }
}

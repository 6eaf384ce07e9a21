use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::VarKey;

/// Scheduled flows and decisions over the whole horizon (dense arrays).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowPlan {
    pub horizon: u32,
    /// `[barge][tank][day]`
    pub y_in: Vec<Vec<Vec<f64>>>,
    /// `[tank][day]`
    pub y_out: Vec<Vec<f64>>,
    /// `[barge][day]`
    pub gamma: Vec<Vec<u8>>,
    /// `[tank][day]`
    pub sigma: Vec<Vec<u8>>,
    /// `[barge]`
    pub v_unused: Vec<f64>,
    /// `[day]`
    pub mis: Vec<f64>,
}

impl FlowPlan {
    /// No flow at all: every barge left full and all demand missed.
    pub fn empty(inst: &Instance) -> Self {
        let h = inst.ops.horizon as usize;
        let (ns, nk) = (inst.barges.len(), inst.tanks.len());
        let mut p = FlowPlan {
            horizon: inst.ops.horizon,
            y_in: vec![vec![vec![0.0; h]; nk]; ns],
            y_out: vec![vec![0.0; h]; nk],
            gamma: vec![vec![0; h]; ns],
            sigma: vec![vec![0; h]; nk],
            v_unused: vec![0.0; ns],
            mis: vec![0.0; h],
        };
        p.settle(inst);
        p
    }

    /// Recomputes `v_unused` and `mis` from the flows.
    pub fn settle(&mut self, inst: &Instance) {
        for (s, b) in inst.barges.iter().enumerate() {
            let unloaded: f64 = self.y_in[s].iter().flatten().sum();
            self.v_unused[s] = (b.volume - unloaded).max(0.0);
        }
        for t in 0..self.horizon {
            let fed: f64 = self.y_out.iter().map(|row| row[t as usize]).sum();
            self.mis[t as usize] = (inst.demand(t) - fed).max(0.0);
        }
    }

    pub fn check_shape(&self, inst: &Instance) -> Result<()> {
        let h = inst.ops.horizon as usize;
        let (ns, nk) = (inst.barges.len(), inst.tanks.len());
        let ok = self.horizon as usize == h
            && self.y_in.len() == ns
            && self.y_in.iter().all(|k| k.len() == nk && k.iter().all(|t| t.len() == h))
            && self.y_out.len() == nk
            && self.y_out.iter().all(|t| t.len() == h)
            && self.gamma.len() == ns
            && self.gamma.iter().all(|t| t.len() == h)
            && self.sigma.len() == nk
            && self.sigma.iter().all(|t| t.len() == h)
            && self.v_unused.len() == ns
            && self.mis.len() == h;
        if ok {
            Ok(())
        } else {
            Err(Error::Plan("plan dimensions do not match the instance".into()))
        }
    }

    /// Values of the plan keyed like model columns (flows and decisions only).
    pub fn values(&self) -> Vec<(VarKey, f64)> {
        let mut out = Vec::new();
        for (s, ks) in self.y_in.iter().enumerate() {
            for (k, ts) in ks.iter().enumerate() {
                for (t, &v) in ts.iter().enumerate() {
                    out.push((VarKey::YIn { s: s as u32, k: k as u32, t: t as u32 }, v));
                }
            }
        }
        for (k, ts) in self.y_out.iter().enumerate() {
            for (t, &v) in ts.iter().enumerate() {
                out.push((VarKey::YOut { k: k as u32, t: t as u32 }, v));
                out.push((VarKey::Sigma { k: k as u32, t: t as u32 }, f64::from(self.sigma[k][t])));
            }
        }
        for (s, ts) in self.gamma.iter().enumerate() {
            for (t, &g) in ts.iter().enumerate() {
                out.push((VarKey::Gamma { s: s as u32, t: t as u32 }, f64::from(g)));
            }
            out.push((VarKey::VUnused { s: s as u32 }, self.v_unused[s]));
        }
        for (t, &m) in self.mis.iter().enumerate() {
            out.push((VarKey::Mis { t: t as u32 }, m));
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).expect("plan serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

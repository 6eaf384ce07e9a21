//! Digit plans for representing a bounded spec value as a grid point plus a
//! continuous residual: `f = lambda0 + eps * sum_i sum_j (j * w_i) * alpha_ij + delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Powers of the base anchored at zero; needs a non-negative lower bound.
    Mdt,
    /// Powers of the base anchored at the lower bound.
    Nmdt,
    /// One digit with `m + 1` levels.
    Mono,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationPlan {
    pub scheme: Scheme,
    pub base: u32,
    pub lambda0: f64,
    /// Grid resolution.
    pub eps: f64,
    /// Number of digit rows.
    pub n: u32,
    /// Largest digit value.
    pub m: u32,
    pub lo: f64,
    pub hi: f64,
    /// Requested precision.
    pub eps_hat: f64,
}

/// Chosen digit per row plus the residual above the grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitCode {
    pub digits: Vec<u32>,
    pub delta: f64,
}

impl DigitCode {
    /// One-hot digit matrix with `n` rows and `m + 1` columns.
    pub fn alpha(&self, plan: &DiscretizationPlan) -> Vec<Vec<u8>> {
        self.digits
            .iter()
            .map(|&j| (0..=plan.m).map(|c| u8::from(c == j)).collect())
            .collect()
    }
}

/// Smallest `n >= 0` with `ratio <= base^n`.
fn ceil_log(ratio: f64, base: f64) -> u32 {
    let mut n = 0u32;
    let mut p = 1.0f64;
    while p < ratio * (1.0 - 1e-12) {
        p *= base;
        n += 1;
    }
    n
}

pub fn plan(lo: f64, hi: f64, eps_hat: f64, base: u32, scheme: Scheme) -> Result<DiscretizationPlan> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Discretization(format!("invalid bounds [{lo}, {hi}]")));
    }
    if !(eps_hat > 0.0 && eps_hat.is_finite()) {
        return Err(Error::Discretization(format!("precision must be positive, got {eps_hat}")));
    }
    if scheme != Scheme::Mono && base < 2 {
        return Err(Error::Discretization(format!("base must be at least 2, got {base}")));
    }
    let width = hi - lo;
    let b = f64::from(base);
    let p = match scheme {
        Scheme::Nmdt => {
            let n = if width <= eps_hat { 0 } else { ceil_log(width / eps_hat, b) };
            DiscretizationPlan {
                scheme,
                base,
                lambda0: lo,
                eps: width / b.powi(n as i32),
                n,
                m: base - 1,
                lo,
                hi,
                eps_hat,
            }
        }
        Scheme::Mdt => {
            if lo < 0.0 {
                return Err(Error::Discretization(format!(
                    "MDT needs a non-negative lower bound, got {lo}"
                )));
            }
            // eps = b^floor(log_b eps_hat)
            let mut eps = 1.0f64;
            while eps > eps_hat * (1.0 + 1e-12) {
                eps /= b;
            }
            while eps * b <= eps_hat * (1.0 + 1e-12) {
                eps *= b;
            }
            let n = if hi <= 0.0 { 0 } else { ceil_log(hi / eps, b) };
            DiscretizationPlan {
                scheme,
                base,
                lambda0: 0.0,
                eps,
                n,
                m: base - 1,
                lo,
                hi,
                eps_hat,
            }
        }
        Scheme::Mono => {
            let m = if width == 0.0 { 0 } else { (width / eps_hat * (1.0 - 1e-12)).ceil() as u32 };
            DiscretizationPlan {
                scheme,
                base,
                lambda0: lo,
                eps: if m == 0 { 0.0 } else { width / f64::from(m) },
                n: 1,
                m,
                lo,
                hi,
                eps_hat,
            }
        }
    };
    Ok(p)
}

impl DiscretizationPlan {
    /// Weight of digit row `i` (0-based).
    pub fn weight(&self, i: u32) -> f64 {
        match self.scheme {
            Scheme::Mono => 1.0,
            _ => f64::from(self.base).powi(i as i32),
        }
    }

    /// Number of grid cells addressable by the digits.
    pub fn levels(&self) -> u64 {
        match self.scheme {
            Scheme::Mono => u64::from(self.m) + 1,
            _ => u64::from(self.base).pow(self.n),
        }
    }

    /// Binary variables after projecting out the zero column of each digit row.
    pub fn binary_count(&self) -> u32 {
        self.n * self.m
    }

    pub fn grid_point(&self, k: u64) -> f64 {
        self.lambda0 + self.eps * k as f64
    }

    /// Largest usable cell index; MDT grids may overshoot the upper bound.
    fn max_cell(&self) -> u64 {
        let top = self.levels() - 1;
        if self.scheme != Scheme::Mdt || self.eps == 0.0 {
            return top;
        }
        let fit = ((self.hi - self.lambda0) / self.eps).floor() as u64;
        top.min(fit)
    }

    pub fn encode(&self, f: f64) -> Result<DigitCode> {
        if !(f >= self.lo && f <= self.hi) {
            return Err(Error::OutOfRange { value: f, lo: self.lo, hi: self.hi });
        }
        let max = self.max_cell();
        let mut k = if self.eps > 0.0 {
            (((f - self.lambda0) / self.eps).floor().max(0.0) as u64).min(max)
        } else {
            0
        };
        while k > 0 && self.grid_point(k) > f {
            k -= 1;
        }
        while k < max && self.grid_point(k + 1) <= f {
            k += 1;
        }
        let digits = match self.scheme {
            Scheme::Mono => vec![k as u32],
            _ => {
                let b = u64::from(self.base);
                let mut rest = k;
                (0..self.n)
                    .map(|_| {
                        let d = (rest % b) as u32;
                        rest /= b;
                        d
                    })
                    .collect()
            }
        };
        Ok(DigitCode {
            digits,
            delta: f - self.grid_point(k),
        })
    }

    /// Grid value selected by the digits, ignoring the residual.
    pub fn grid_value(&self, code: &DigitCode) -> f64 {
        let k: f64 = code
            .digits
            .iter()
            .enumerate()
            .map(|(i, &j)| f64::from(j) * self.weight(i as u32))
            .sum();
        self.lambda0 + self.eps * k
    }

    pub fn decode(&self, code: &DigitCode) -> f64 {
        self.grid_value(code) + code.delta
    }
}

/// Asymptotic ratio of binaries needed by base `b1` versus base `b2`.
pub fn binary_count_ratio(b1: u32, b2: u32) -> f64 {
    let (b1, b2) = (f64::from(b1), f64::from(b2));
    (b1 - 1.0) * b2.ln() / ((b2 - 1.0) * b1.ln())
}

/// Base-2 normalized digit count for a spec ranging over `[lo, hi]`.
pub fn digit_count(lo: f64, hi: f64, eps_hat: f64) -> Result<u32> {
    Ok(plan(lo, hi, eps_hat, 2, Scheme::Nmdt)?.n)
}

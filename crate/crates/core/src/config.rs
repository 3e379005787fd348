use serde::{Deserialize, Serialize};

use crate::error::{GsmError, Result};
use crate::scene_model::BandwidthFloors;

/// How the undefined class is folded into a binary mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum UndefinedPolicy {
    /// Undefined pixels count as background.
    Ub,
    /// Undefined pixels count as foreground.
    Uf,
}

impl std::fmt::Display for UndefinedPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UndefinedPolicy::Ub => "ub",
            UndefinedPolicy::Uf => "uf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GsmConfig {
    /// Samples kept per pixel (and minimum number of training frames).
    pub n: usize,
    /// Density below which a pixel is foreground.
    pub gamma: f64,
    /// `P_A` below which an ADO pixel is undefined.
    pub theta: f64,
    /// Moved-background score threshold.
    pub xi: f64,
    /// ADO probability update rate.
    pub alpha: f64,
    /// Density a background pixel needs before its color is learned.
    pub gamma_update: f64,
    pub undefined_policy: UndefinedPolicy,
    pub depth_min: u16,
    pub depth_max: u16,
    pub floor_r: f64,
    pub floor_g: f64,
    pub floor_d: f64,
}

impl Default for GsmConfig {
    fn default() -> Self {
        let floors = BandwidthFloors::default();
        Self {
            n: 100,
            gamma: 1e-8,
            theta: 0.0050,
            xi: 0.6,
            alpha: 0.02,
            gamma_update: 1e-6,
            undefined_policy: UndefinedPolicy::Ub,
            depth_min: 650,
            depth_max: 1500,
            floor_r: floors.r,
            floor_g: floors.g,
            floor_d: floors.d,
        }
    }
}

impl GsmConfig {
    pub fn floors(&self) -> BandwidthFloors {
        BandwidthFloors {
            r: self.floor_r,
            g: self.floor_g,
            d: self.floor_d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GsmError::InvalidConfig(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if self.gamma_update.is_nan() || self.gamma_update < self.gamma {
            return bad(format!(
                "gamma_update ({}) must be >= gamma ({})",
                self.gamma_update, self.gamma
            ));
        }
        for (name, v) in [("theta", self.theta), ("xi", self.xi), ("alpha", self.alpha)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.depth_min >= self.depth_max {
            return bad(format!(
                "depth_min ({}) must be below depth_max ({})",
                self.depth_min, self.depth_max
            ));
        }
        for (name, v) in [
            ("floor_r", self.floor_r),
            ("floor_g", self.floor_g),
            ("floor_d", self.floor_d),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

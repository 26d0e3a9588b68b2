use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NGRAM_RANGE: (usize, usize) = (1, 24);
pub const QR_RANGE: (usize, usize) = (2, 20);
pub const MIN_CLONE_RANGE: (usize, usize) = (6, 16);
pub const BOOSTING_MAX: i32 = 20;

/// Tunable search parameters; arrays are indexed by representation r0..r3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub ngram_size: [usize; 4],
    /// Number of rarest grams kept per representation.
    pub qr_threshold: [usize; 4],
    /// Minimum per-representation similarity, in percent.
    pub sim_threshold: [f64; 4],
    /// Weight of r0 in the score; -1 turns boosting off.
    pub boosting: i32,
    /// Minimum unit size in canonical-layout lines.
    pub min_clone_size: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            ngram_size: [1, 4, 4, 4],
            qr_threshold: [9, 6, 5, 9],
            sim_threshold: [50.0, 60.0, 70.0, 80.0],
            boosting: -1,
            min_clone_size: 6,
        }
    }
}

fn in_range(name: &str, v: usize, (lo, hi): (usize, usize)) -> Result<()> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} = {v} is outside [{lo}, {hi}]")))
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        for (i, &n) in self.ngram_size.iter().enumerate() {
            in_range(&format!("ngram_size[r{i}]"), n, NGRAM_RANGE)?;
        }
        for (i, &q) in self.qr_threshold.iter().enumerate() {
            in_range(&format!("qr_threshold[r{i}]"), q, QR_RANGE)?;
        }
        for (i, &s) in self.sim_threshold.iter().enumerate() {
            if !(s > 0.0 && s <= 100.0) {
                return Err(Error::InvalidConfig(format!(
                    "sim_threshold[r{i}] = {s} is outside (0, 100]"
                )));
            }
        }
        if !(self.boosting == -1 || (1..=BOOSTING_MAX).contains(&self.boosting)) {
            return Err(Error::InvalidConfig(format!(
                "boosting = {} must be -1 or within [1, {BOOSTING_MAX}]",
                self.boosting
            )));
        }
        in_range("min_clone_size", self.min_clone_size, MIN_CLONE_RANGE)
    }

    /// Score weight per representation.
    pub fn weights(&self) -> [f64; 4] {
        let r0 = if self.boosting > 0 { self.boosting as f64 } else { 1.0 };
        [r0, 1.0, 1.0, 1.0]
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SearchConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

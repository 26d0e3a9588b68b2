//! Popularity tiers from the quartiles of stars, forks and watchers.
//!
//! Quartiles use linear interpolation between closest ranks: for sorted
//! values `x` and probability `p`, `h = (n - 1) p` and the quartile is
//! `x[floor h] + (h - floor h) (x[ceil h] - x[floor h])`.
//!
//! A project is `low` when all three metrics are `<= q1`, `medium` when all
//! three lie in `(q1, q3]`, `high` when all three are `> q3`, and
//! `excluded` otherwise.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Low,
    Medium,
    High,
    Excluded,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Low => "low",
            Tier::Medium => "medium",
            Tier::High => "high",
            Tier::Excluded => "excluded",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "low" => Ok(Tier::Low),
            "medium" => Ok(Tier::Medium),
            "high" => Ok(Tier::High),
            "excluded" => Ok(Tier::Excluded),
            _ => Err(format!("unknown tier {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub project_id: String,
    pub stars: u64,
    pub forks: u64,
    pub watchers: u64,
}

impl ProjectMeta {
    pub fn metrics(&self) -> [u64; 3] {
        [self.stars, self.forks, self.watchers]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Quartiles for stars, forks and watchers, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuartileTable {
    pub stars: Quartiles,
    pub forks: Quartiles,
    pub watchers: Quartiles,
}

impl QuartileTable {
    pub fn from_bounds(stars: [f64; 3], forks: [f64; 3], watchers: [f64; 3]) -> Self {
        let q = |[q1, median, q3]: [f64; 3]| Quartiles { q1, median, q3 };
        Self {
            stars: q(stars),
            forks: q(forks),
            watchers: q(watchers),
        }
    }

    pub fn metrics(&self) -> [Quartiles; 3] {
        [self.stars, self.forks, self.watchers]
    }
}

pub fn compute_quartiles(projects: &[ProjectMeta]) -> Result<QuartileTable> {
    if projects.len() < 4 {
        return Err(Error::TooFewProjects(projects.len()));
    }
    let quartiles = |metric: usize| {
        let mut v: Vec<f64> = projects.iter().map(|p| p.metrics()[metric] as f64).collect();
        v.sort_by(f64::total_cmp);
        Quartiles {
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
        }
    };
    Ok(QuartileTable {
        stars: quartiles(0),
        forks: quartiles(1),
        watchers: quartiles(2),
    })
}

pub fn assign_tier(p: &ProjectMeta, q: &QuartileTable) -> Tier {
    let pairs = p.metrics().into_iter().zip(q.metrics());
    let mut low = true;
    let mut medium = true;
    let mut high = true;
    for (value, q) in pairs {
        let v = value as f64;
        low &= v <= q.q1;
        medium &= v > q.q1 && v <= q.q3;
        high &= v > q.q3;
    }
    match (low, medium, high) {
        (true, _, _) => Tier::Low,
        (_, true, _) => Tier::Medium,
        (_, _, true) => Tier::High,
        _ => Tier::Excluded,
    }
}

/// Quartiles over all projects, then a tier for each.
pub fn tier_projects(projects: &[ProjectMeta]) -> Result<(QuartileTable, Vec<Tier>)> {
    let q = compute_quartiles(projects)?;
    Ok((q, projects.iter().map(|p| assign_tier(p, &q)).collect()))
}

pub fn read_metadata(reader: impl std::io::Read) -> std::result::Result<Vec<ProjectMeta>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

pub fn read_metadata_csv(path: &Path) -> Result<Vec<ProjectMeta>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_metadata(file).map_err(|e| Error::csv(path, e))
}

#[derive(Serialize)]
struct TierRow<'a> {
    project_id: &'a str,
    stars: u64,
    forks: u64,
    watchers: u64,
    tier: Tier,
}

pub fn write_tiers(projects: &[ProjectMeta], tiers: &[Tier], out: impl std::io::Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (p, &tier) in projects.iter().zip(tiers) {
        w.serialize(TierRow {
            project_id: &p.project_id,
            stars: p.stars,
            forks: p.forks,
            watchers: p.watchers,
            tier,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tiers_csv(projects: &[ProjectMeta], tiers: &[Tier], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_tiers(projects, tiers, file).map_err(|e| Error::csv(path, e))
}

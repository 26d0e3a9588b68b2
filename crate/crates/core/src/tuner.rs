//! Grid search over search configurations, scored by mean reciprocal rank.
//!
//! Project methods form the index and snippet files are the queries. The
//! corpus is indexed once per distinct n-gram tuple; `min_clone_size` is
//! applied per grid point by dropping smaller methods from the hit list and
//! scoring queries below the size as rank 0.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::extractor::{self, MethodRecord};
use crate::index::InvertedIndex;
use crate::representations::{self, NgramSet};
use crate::search::{self, SearchHit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClonePattern {
    QS,
    EX,
    UD,
    SQ,
    BP,
    IN,
    NC,
}

impl ClonePattern {
    pub fn used_for_tuning(self) -> bool {
        matches!(self, ClonePattern::QS | ClonePattern::EX | ClonePattern::UD)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthPair {
    pub query_file: String,
    pub project: String,
    pub path: String,
    pub start: usize,
    pub end: usize,
    pub pattern: ClonePattern,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub project: String,
    pub path: String,
    pub start: usize,
    pub end: usize,
}

impl Expected {
    /// Same file and the line ranges overlap by at least half the shorter one.
    pub fn resolves(&self, m: &MethodRecord) -> bool {
        if m.project_id != self.project || m.path != self.path {
            return false;
        }
        let lo = self.start.max(m.start_line);
        let hi = self.end.min(m.end_line);
        if hi < lo {
            return false;
        }
        let overlap = hi - lo + 1;
        let shorter = (self.end - self.start + 1).min(m.end_line - m.start_line + 1);
        2 * overlap >= shorter
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuningQuery {
    pub id: String,
    /// Comment-free canonical unit of the snippet.
    pub unit: Vec<String>,
    pub expected: Expected,
}

impl TuningQuery {
    pub fn from_snippet(id: impl Into<String>, raw: &[String], expected: Expected) -> Self {
        Self {
            id: id.into(),
            unit: extractor::snippet_unit(&extractor::strip_comments(raw)),
            expected,
        }
    }
}

pub fn read_ground_truth(reader: impl std::io::Read) -> std::result::Result<Vec<GroundTruthPair>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

/// Reads the ground-truth CSV and the snippet files it names. Relative
/// `query_file` paths resolve against the CSV's directory. Only QS, EX and
/// UD pairs are kept.
pub fn load_queries(truth: &Path) -> Result<Vec<TuningQuery>> {
    let file = std::fs::File::open(truth).map_err(|e| Error::io(truth, e))?;
    let pairs = read_ground_truth(file).map_err(|e| Error::csv(truth, e))?;
    let base = truth.parent().unwrap_or(Path::new("."));
    let mut queries = Vec::new();
    for pair in pairs.into_iter().filter(|p| p.pattern.used_for_tuning()) {
        if pair.end < pair.start {
            return Err(Error::InvalidConfig(format!(
                "{}: end line {} before start line {}",
                pair.query_file, pair.end, pair.start
            )));
        }
        let path: PathBuf = base.join(&pair.query_file);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let raw: Vec<String> = text.lines().map(str::to_owned).collect();
        queries.push(TuningQuery::from_snippet(
            pair.query_file,
            &raw,
            Expected {
                project: pair.project,
                path: pair.path,
                start: pair.start,
                end: pair.end,
            },
        ));
    }
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    Ok(queries)
}

/// Project methods searched during tuning, ordered by project, path and line.
#[derive(Debug, Clone, Default)]
pub struct TuningCorpus {
    methods: Vec<MethodRecord>,
}

impl TuningCorpus {
    pub fn from_methods(mut methods: Vec<MethodRecord>) -> Self {
        methods.sort_by(|a, b| {
            (&a.project_id, &a.path, a.start_line, a.end_line, &a.method_name).cmp(&(
                &b.project_id,
                &b.path,
                b.start_line,
                b.end_line,
                &b.method_name,
            ))
        });
        Self { methods }
    }

    /// Loads every subdirectory of `dir` as one project.
    pub fn load(dir: &Path, extensions: &[String]) -> Result<Self> {
        let mut projects = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            if entry.path().is_dir() {
                projects.push(entry.path());
            }
        }
        projects.sort();
        let mut methods = Vec::new();
        for root in projects {
            let id = root.file_name().unwrap().to_string_lossy().into_owned();
            for file in extractor::read_source_tree(&root, &id, extensions)? {
                match extractor::extract_methods(&file, 1) {
                    Ok(m) => methods.extend(m),
                    Err(e) => log::warn!("skipping {id}/{}: {e}", file.path),
                }
            }
        }
        Ok(Self::from_methods(methods))
    }

    pub fn methods(&self) -> &[MethodRecord] {
        &self.methods
    }

    pub fn build_index(&self, ngram_size: [usize; 4]) -> Result<InvertedIndex<u32>> {
        let docs = self
            .methods
            .par_iter()
            .enumerate()
            .map(|(i, m)| (i as u32, representations::ngram_sets(&m.body, ngram_size)))
            .collect();
        InvertedIndex::build(ngram_size, docs)
    }
}

/// 1/rank of the first hit accepted by `resolves`, 0 when there is none.
pub fn reciprocal_rank<K>(hits: &[SearchHit<K>], resolves: impl Fn(&K) -> bool) -> f64 {
    hits.iter()
        .find(|h| resolves(&h.doc))
        .map_or(0.0, |h| 1.0 / h.rank as f64)
}

pub fn mean_reciprocal_rank(rrs: &[f64]) -> Result<f64> {
    if rrs.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    Ok(rrs.iter().sum::<f64>() / rrs.len() as f64)
}

/// Reciprocal rank of each query under `cfg` against a prebuilt index.
pub fn evaluate(
    corpus: &TuningCorpus,
    index: &InvertedIndex<u32>,
    queries: &[TuningQuery],
    query_grams: &[[NgramSet; 4]],
    cfg: &SearchConfig,
) -> Result<Vec<f64>> {
    queries
        .iter()
        .zip(query_grams)
        .map(|(q, grams)| {
            if q.unit.len() < cfg.min_clone_size {
                return Ok(0.0);
            }
            let mut hits = match search::search_grams(index, grams, cfg) {
                Ok(h) => h,
                Err(Error::EmptyQuery) => return Ok(0.0),
                Err(e) => return Err(e),
            };
            hits.retain(|h| corpus.methods[h.doc as usize].body.len() >= cfg.min_clone_size);
            search::sort_hits(&mut hits);
            Ok(reciprocal_rank(&hits, |&doc| {
                q.expected.resolves(&corpus.methods[doc as usize])
            }))
        })
        .collect()
}

/// Candidate values for each configuration field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub ngram_size: Vec<[usize; 4]>,
    pub qr_threshold: Vec<[usize; 4]>,
    pub sim_threshold: Vec<[f64; 4]>,
    pub boosting: Vec<i32>,
    pub min_clone_size: Vec<usize>,
}

impl GridSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_owned()))?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, len) in [
            ("ngram_size", self.ngram_size.len()),
            ("qr_threshold", self.qr_threshold.len()),
            ("sim_threshold", self.sim_threshold.len()),
            ("boosting", self.boosting.len()),
            ("min_clone_size", self.min_clone_size.len()),
        ] {
            if len == 0 {
                return Err(Error::InvalidConfig(format!("grid: {name} has no candidates")));
            }
        }
        self.points().iter().try_for_each(SearchConfig::validate)
    }

    /// The cartesian product, `ngram_size` varying slowest.
    pub fn points(&self) -> Vec<SearchConfig> {
        let mut out = Vec::new();
        for &ngram_size in &self.ngram_size {
            for &qr_threshold in &self.qr_threshold {
                for &sim_threshold in &self.sim_threshold {
                    for &boosting in &self.boosting {
                        for &min_clone_size in &self.min_clone_size {
                            out.push(SearchConfig {
                                ngram_size,
                                qr_threshold,
                                sim_threshold,
                                boosting,
                                min_clone_size,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub config: SearchConfig,
    /// -1 when the point could not be evaluated.
    pub mrr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best: ScoreRow,
    pub table: Vec<ScoreRow>,
}

/// Total order used to break MRR ties: smaller `min_clone_size` first, then
/// the remaining fields lexicographically.
pub fn config_order(a: &SearchConfig, b: &SearchConfig) -> std::cmp::Ordering {
    (a.min_clone_size, a.ngram_size, a.qr_threshold)
        .cmp(&(b.min_clone_size, b.ngram_size, b.qr_threshold))
        .then_with(|| {
            a.sim_threshold
                .iter()
                .zip(&b.sim_threshold)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .then_with(|| a.boosting.cmp(&b.boosting))
}

/// Highest MRR in the table, ties broken by [`config_order`].
pub fn argmax(table: &[ScoreRow]) -> Option<&ScoreRow> {
    table
        .iter()
        .min_by(|a, b| b.mrr.total_cmp(&a.mrr).then_with(|| config_order(&a.config, &b.config)))
}

type PreparedIndex = (InvertedIndex<u32>, Vec<[NgramSet; 4]>);

/// Evaluates every grid point and returns the best one with the full table.
pub fn grid_search(grid: &GridSpec, queries: &[TuningQuery], corpus: &TuningCorpus) -> Result<TuneResult> {
    grid.validate()?;
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    let points = grid.points();

    let mut tuples: Vec<[usize; 4]> = grid.ngram_size.clone();
    tuples.sort_unstable();
    tuples.dedup();
    let indexes: BTreeMap<[usize; 4], Result<PreparedIndex>> = tuples
        .par_iter()
        .map(|&n| {
            let built = corpus.build_index(n).map(|idx| {
                let grams = queries
                    .iter()
                    .map(|q| representations::ngram_sets(&q.unit, n))
                    .collect();
                (idx, grams)
            });
            (n, built)
        })
        .collect();

    let table: Vec<ScoreRow> = points
        .par_iter()
        .map(|cfg| {
            let mrr = match &indexes[&cfg.ngram_size] {
                Ok((idx, grams)) => {
                    evaluate(corpus, idx, queries, grams, cfg).and_then(|rrs| mean_reciprocal_rank(&rrs))
                }
                Err(e) => Err(Error::InvalidConfig(e.to_string())),
            };
            let mrr = mrr.unwrap_or_else(|e| {
                log::warn!("grid point {cfg:?} failed: {e}");
                -1.0
            });
            ScoreRow { config: *cfg, mrr }
        })
        .collect();
    let best = argmax(&table).expect("grid is non-empty").clone();
    Ok(TuneResult { best, table })
}

pub const SCORE_HEADER: [&str; 15] = [
    "ngram_r0",
    "ngram_r1",
    "ngram_r2",
    "ngram_r3",
    "qr_r0",
    "qr_r1",
    "qr_r2",
    "qr_r3",
    "sim_r0",
    "sim_r1",
    "sim_r2",
    "sim_r3",
    "boosting",
    "min_clone_size",
    "mrr",
];

pub fn write_score_table(table: &[ScoreRow], out: impl std::io::Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCORE_HEADER)?;
    for row in table {
        let c = &row.config;
        let mut rec: Vec<String> = Vec::with_capacity(SCORE_HEADER.len());
        rec.extend(c.ngram_size.iter().map(ToString::to_string));
        rec.extend(c.qr_threshold.iter().map(ToString::to_string));
        rec.extend(c.sim_threshold.iter().map(ToString::to_string));
        rec.push(c.boosting.to_string());
        rec.push(c.min_clone_size.to_string());
        rec.push(row.mrr.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_score_table_csv(table: &[ScoreRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_score_table(table, file).map_err(|e| Error::csv(path, e))
}

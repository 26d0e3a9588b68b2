//! Edit distance and revision statistics over a snippet-revision corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extractor;
use crate::revisions::{self, SnippetRevision};

/// Character-level Levenshtein distance with unit costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub median: f64,
}

/// Summary statistics, `None` for an empty slice.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Summary {
        count: n,
        min: sorted[0],
        max: sorted[n - 1],
        mean,
        std,
        median: quantile(&sorted, 0.5),
    })
}

/// Linearly interpolated quantile of sorted data, `h = (n - 1) p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub const DISTANCE_BINS: [(&str, usize, usize); 6] = [
    ("0", 0, 0),
    ("1-10", 1, 10),
    ("11-100", 11, 100),
    ("101-1000", 101, 1000),
    ("1001-10000", 1001, 10000),
    ("10001+", 10001, usize::MAX),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDistance {
    pub post_id: u64,
    pub local_id: u32,
    pub revisions: usize,
    pub edit_distance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevisionStats {
    pub answers: usize,
    pub blocks: Vec<BlockDistance>,
    pub revisions_per_answer: Summary,
    pub distance_per_block: Summary,
    pub distance_per_answer: Summary,
    /// Answers per revision count.
    pub revision_histogram: BTreeMap<usize, usize>,
    /// Blocks per [`DISTANCE_BINS`] entry.
    pub distance_histogram: Vec<(String, usize)>,
}

/// Statistics over accepted answers. An answer's revision count is the
/// number of distinct history steps across its blocks. Block distance is
/// measured between the comment-stripped first and last revision.
pub fn revision_stats(revs: &[SnippetRevision]) -> Result<RevisionStats> {
    let blocks = revisions::accepted_blocks(revs);
    if blocks.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut seqs: BTreeMap<u64, BTreeSet<u32>> = BTreeMap::new();
    let mut per_answer: BTreeMap<u64, usize> = BTreeMap::new();
    let mut distances = Vec::with_capacity(blocks.len());
    for ((post, local), history) in &blocks {
        seqs.entry(*post)
            .or_default()
            .extend(history.iter().map(|r| r.history_seq));
        let first = extractor::strip_comments(&history[0].lines()).join("\n");
        let last = extractor::strip_comments(&history[history.len() - 1].lines()).join("\n");
        let d = levenshtein(&first, &last);
        *per_answer.entry(*post).or_default() += d;
        distances.push(BlockDistance {
            post_id: *post,
            local_id: *local,
            revisions: history.len(),
            edit_distance: d,
        });
    }

    let rev_counts: Vec<usize> = seqs.values().map(BTreeSet::len).collect();
    let mut revision_histogram = BTreeMap::new();
    for &c in &rev_counts {
        *revision_histogram.entry(c).or_default() += 1;
    }
    let distance_histogram = DISTANCE_BINS
        .iter()
        .map(|&(label, lo, hi)| {
            let n = distances
                .iter()
                .filter(|b| (lo..=hi).contains(&b.edit_distance))
                .count();
            (label.to_owned(), n)
        })
        .collect();

    let as_f64 = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x as f64).collect::<Vec<_>>();
    Ok(RevisionStats {
        answers: seqs.len(),
        revisions_per_answer: summarize(&as_f64(&mut rev_counts.iter().copied())).unwrap(),
        distance_per_block: summarize(&as_f64(&mut distances.iter().map(|b| b.edit_distance))).unwrap(),
        distance_per_answer: summarize(&as_f64(&mut per_answer.values().copied())).unwrap(),
        blocks: distances,
        revision_histogram,
        distance_histogram,
    })
}

impl RevisionStats {
    /// One row per metric: `metric,count,min,max,mean,std,median`.
    pub fn write_summary(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "count", "min", "max", "mean", "std", "median"])?;
        for (name, s) in [
            ("revisions_per_answer", &self.revisions_per_answer),
            ("edit_distance_per_block", &self.distance_per_block),
            ("edit_distance_per_answer", &self.distance_per_answer),
        ] {
            w.write_record([
                name.to_owned(),
                s.count.to_string(),
                s.min.to_string(),
                s.max.to_string(),
                format!("{:.6}", s.mean),
                format!("{:.6}", s.std),
                s.median.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `histogram,bin,count` rows for both histograms.
    pub fn write_histograms(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["histogram", "bin", "count"])?;
        for (revs, n) in &self.revision_histogram {
            w.write_record(["revisions".to_owned(), revs.to_string(), n.to_string()])?;
        }
        for (bin, n) in &self.distance_histogram {
            w.write_record(["edit_distance", bin, &n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_blocks(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for b in &self.blocks {
            w.serialize(b)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `summary.csv`, `histograms.csv` and `blocks.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        type Writer = fn(&RevisionStats, std::fs::File) -> csv::Result<()>;
        let outputs: [(&str, Writer); 3] = [
            ("summary.csv", |s, f| s.write_summary(f)),
            ("histograms.csv", |s, f| s.write_histograms(f)),
            ("blocks.csv", |s, f| s.write_blocks(f)),
        ];
        for (name, write) in outputs {
            let path = dir.join(name);
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write(self, file).map_err(|e| Error::csv(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_distances() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("flaw", "lawn"), 2);
        assert_eq!(levenshtein("日本語", "日本"), 1);
    }

    fn naive(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let sub = naive(ra, rb) + usize::from(x != y);
                sub.min(naive(ra, b) + 1).min(naive(a, rb) + 1)
            }
        }
    }

    proptest! {
        #[test]
        fn matches_recursive_definition(a in "[ab ]{0,6}", b in "[ab ]{0,6}") {
            let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
            prop_assert_eq!(levenshtein(&a, &b), naive(&ca, &cb));
        }

        #[test]
        fn metric_axioms(a in "[a-c]{0,12}", b in "[a-c]{0,12}", c in "[a-c]{0,12}") {
            prop_assert_eq!(levenshtein(&a, &a), 0);
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
            let (la, lb) = (a.chars().count(), b.chars().count());
            prop_assert!(levenshtein(&a, &b) >= la.abs_diff(lb));
            prop_assert!(levenshtein(&a, &b) <= la.max(lb));
        }
    }

    #[test]
    fn summary_values() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.median), (1.0, 4.0, 2.5, 2.5));
        assert!((s.std - 1.2909944487358056).abs() < 1e-12);
        assert_eq!(summarize(&[7.0]).unwrap().std, 0.0);
        assert!(summarize(&[]).is_none());
    }

    fn rev(post: u64, local: u32, seq: u32, body: &str) -> SnippetRevision {
        SnippetRevision {
            post_id: post,
            local_id: local,
            history_seq: seq,
            is_accepted: true,
            body: body.to_owned(),
        }
    }

    #[test]
    fn revision_counts_span_blocks() {
        let revs = [
            rev(1, 0, 0, "a"),
            rev(1, 0, 1, "ab"),
            rev(1, 1, 0, "x // note"),
            rev(1, 1, 1, "x"),
            rev(1, 1, 2, "xyz"),
            rev(2, 0, 0, "same"),
        ];
        let s = revision_stats(&revs).unwrap();
        assert_eq!(s.answers, 2);
        assert_eq!(s.revision_histogram, BTreeMap::from([(1, 1), (3, 1)]));
        let d: Vec<_> = s.blocks.iter().map(|b| b.edit_distance).collect();
        assert_eq!(d, [1, 2, 0]);
        assert_eq!(s.distance_per_answer.max, 3.0);
        let total: usize = s.distance_histogram.iter().map(|(_, n)| n).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(revision_stats(&[]), Err(Error::EmptyCorpus)));
        let unaccepted = SnippetRevision {
            is_accepted: false,
            ..rev(1, 0, 0, "x")
        };
        assert!(matches!(revision_stats(&[unaccepted]), Err(Error::EmptyCorpus)));
    }
}

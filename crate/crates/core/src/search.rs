//! Clone search: query reduction, candidate scoring and ranking.
//!
//! For each representation the query keeps only its `qr_threshold` rarest
//! distinct grams. A candidate's similarity in a representation is the
//! percentage of those reduced grams it contains. Candidates passing the
//! similarity threshold of at least one representation are kept and scored
//! by the weighted sum of their similarities.
//!
//! The scoring function is this crate's own weighted overlap; it does not
//! attempt to reproduce TF-IDF or length normalisation.

use std::collections::HashMap;

use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::extractor::MethodRecord;
use crate::index::{DocFrequency, DocId, InvertedIndex, SnippetIndex};
use crate::representations::{self, NgramSet, Representation};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit<K> {
    pub doc: K,
    pub score: f64,
    pub per_rep_similarity: [f64; 4],
    /// 1-based.
    pub rank: usize,
}

/// The `k` distinct grams of `set` with the lowest document frequency,
/// rarest first, ties broken by gram text. Grams unknown to `stats` count
/// as frequency 0.
pub fn reduce_query<'a>(set: &'a NgramSet, rep: Representation, stats: &impl DocFrequency, k: usize) -> Vec<&'a str> {
    let mut grams: Vec<(usize, &str)> = set.grams.keys().map(|g| (stats.df(rep, g), g.as_str())).collect();
    grams.sort_unstable();
    grams.into_iter().take(k).map(|(_, g)| g).collect()
}

/// Searches `index` with pre-computed query grams.
pub fn search_grams<K: Clone + Ord>(
    index: &InvertedIndex<K>,
    query: &[NgramSet; 4],
    cfg: &SearchConfig,
) -> Result<Vec<SearchHit<K>>> {
    if index.ngram_size() != cfg.ngram_size {
        return Err(Error::NgramMismatch {
            index: index.ngram_size(),
            config: cfg.ngram_size,
        });
    }
    let reduced: Vec<Vec<&str>> = Representation::ALL
        .iter()
        .map(|&rep| reduce_query(&query[rep.index()], rep, index, cfg.qr_threshold[rep.index()]))
        .collect();
    if reduced.iter().all(Vec::is_empty) {
        return Err(Error::EmptyQuery);
    }

    let mut matched: HashMap<u32, [u32; 4]> = HashMap::new();
    for rep in Representation::ALL {
        for gram in &reduced[rep.index()] {
            for &(doc, _) in index.postings(rep, gram) {
                matched.entry(doc).or_default()[rep.index()] += 1;
            }
        }
    }

    let weights = cfg.weights();
    let mut hits: Vec<SearchHit<K>> = matched
        .into_iter()
        .filter_map(|(doc, counts)| {
            let mut sim = [0.0; 4];
            for rep in 0..4 {
                if !reduced[rep].is_empty() {
                    sim[rep] = 100.0 * counts[rep] as f64 / reduced[rep].len() as f64;
                }
            }
            let passes = (0..4).any(|rep| sim[rep] >= cfg.sim_threshold[rep]);
            passes.then(|| SearchHit {
                doc: index.key(doc).clone(),
                score: (0..4).map(|rep| weights[rep] * sim[rep]).sum(),
                per_rep_similarity: sim,
                rank: 0,
            })
        })
        .collect();
    sort_hits(&mut hits);
    Ok(hits)
}

/// Orders hits by score descending then key ascending, and assigns ranks.
pub fn sort_hits<K: Ord>(hits: &mut [SearchHit<K>]) {
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc.cmp(&b.doc)));
    for (i, hit) in hits.iter_mut().enumerate() {
        hit.rank = i + 1;
    }
}

/// Searches a snippet index with an extracted method.
pub fn search(method: &MethodRecord, index: &SnippetIndex, cfg: &SearchConfig) -> Result<Vec<SearchHit<DocId>>> {
    let query = representations::ngram_sets(&method.body, cfg.ngram_size);
    search_grams(index.engine(), &query, cfg)
}

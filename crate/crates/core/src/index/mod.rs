//! Per-representation inverted indexes from n-grams to documents.

mod persist;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::extractor;
use crate::representations::{self, NgramSet, Representation};

pub use persist::FORMAT_VERSION;

/// Position of a snippet revision within its code block's history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HistoryLabel {
    Original,
    Revision(u32),
    Latest,
}

impl HistoryLabel {
    /// Label of the revision at `position` in a history of `count` distinct
    /// revisions. A single-revision history is labelled `Latest`.
    pub fn for_position(position: usize, count: usize) -> Self {
        if position + 1 == count {
            HistoryLabel::Latest
        } else if position == 0 {
            HistoryLabel::Original
        } else {
            HistoryLabel::Revision(position as u32)
        }
    }

    fn rank(self) -> (u8, u32) {
        match self {
            HistoryLabel::Latest => (0, 0),
            HistoryLabel::Original => (1, 0),
            HistoryLabel::Revision(n) => (2, n),
        }
    }
}

impl fmt::Display for HistoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistoryLabel::Original => f.write_str("original"),
            HistoryLabel::Revision(n) => write!(f, "{n}"),
            HistoryLabel::Latest => f.write_str("latest"),
        }
    }
}

/// `{post_id}_{local_id}_{label}`, e.g. `8394534_0_original`.
///
/// Ordered by post, then block, then label with `latest` first, so that a
/// score tie between a block's latest revision and an older one resolves to
/// the latest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DocId {
    pub post_id: u64,
    pub local_id: u32,
    pub label: HistoryLabel,
}

impl DocId {
    pub fn new(post_id: u64, local_id: u32, label: HistoryLabel) -> Self {
        Self {
            post_id,
            local_id,
            label,
        }
    }

    pub fn block(&self) -> (u64, u32) {
        (self.post_id, self.local_id)
    }

    pub fn is_latest(&self) -> bool {
        self.label == HistoryLabel::Latest
    }
}

impl Ord for DocId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.post_id, self.local_id, self.label.rank()).cmp(&(other.post_id, other.local_id, other.label.rank()))
    }
}

impl PartialOrd for DocId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_{}", self.post_id, self.local_id, self.label)
    }
}

impl FromStr for DocId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.strip_suffix(".java").unwrap_or(s);
        let mut parts = s.splitn(3, '_');
        let (Some(post), Some(local), Some(label)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("`{s}` is not of the form post_local_label"));
        };
        let post_id: u64 = post.parse().map_err(|_| format!("bad post id `{post}`"))?;
        if post_id == 0 {
            return Err("post id must be positive".into());
        }
        let local_id = local.parse().map_err(|_| format!("bad local id `{local}`"))?;
        let label = match label {
            "original" => HistoryLabel::Original,
            "latest" => HistoryLabel::Latest,
            n => match n.parse::<u32>() {
                Ok(n) if n > 0 && n.to_string() == label => HistoryLabel::Revision(n),
                _ => return Err(format!("bad history label `{label}`")),
            },
        };
        Ok(DocId::new(post_id, local_id, label))
    }
}

/// Document frequencies used to order query grams by rarity.
pub trait DocFrequency {
    fn doc_count(&self) -> usize;
    fn df(&self, rep: Representation, gram: &str) -> usize;
}

/// Owned document-frequency table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexStats {
    pub doc_count: usize,
    pub df: BTreeMap<(Representation, String), usize>,
}

impl DocFrequency for IndexStats {
    fn doc_count(&self) -> usize {
        self.doc_count
    }

    fn df(&self, rep: Representation, gram: &str) -> usize {
        self.df.get(&(rep, gram.to_owned())).copied().unwrap_or(0)
    }
}

/// One posting: document ordinal and the gram's count in that document.
pub type Posting = (u32, u32);

/// Immutable inverted index over documents keyed by `K`.
///
/// Documents are held in ascending key order; a document's ordinal is its
/// position in that order, which makes the structure independent of the
/// order documents were supplied in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex<K> {
    ngram_size: [usize; 4],
    keys: Vec<K>,
    postings: [BTreeMap<String, Vec<Posting>>; 4],
}

impl<K: Ord + Clone + fmt::Display> InvertedIndex<K> {
    /// Builds from `(key, grams)` pairs. Fails with [`Error::DuplicateDoc`]
    /// if a key occurs twice.
    pub fn build(ngram_size: [usize; 4], mut docs: Vec<(K, [NgramSet; 4])>) -> Result<Self> {
        docs.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(pair) = docs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateDoc(pair[0].0.to_string()));
        }
        let mut postings: [BTreeMap<String, Vec<Posting>>; 4] = Default::default();
        let mut keys = Vec::with_capacity(docs.len());
        for (ord, (key, sets)) in docs.into_iter().enumerate() {
            keys.push(key);
            for (rep, set) in sets.into_iter().enumerate() {
                for (gram, count) in set.grams {
                    postings[rep].entry(gram).or_default().push((ord as u32, count));
                }
            }
        }
        Ok(Self {
            ngram_size,
            keys,
            postings,
        })
    }
}

impl<K> InvertedIndex<K> {
    pub fn ngram_size(&self) -> [usize; 4] {
        self.ngram_size
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn key(&self, ordinal: u32) -> &K {
        &self.keys[ordinal as usize]
    }

    pub fn postings(&self, rep: Representation, gram: &str) -> &[Posting] {
        self.postings[rep.index()].get(gram).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn grams(&self, rep: Representation) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings[rep.index()]
            .iter()
            .map(|(g, p)| (g.as_str(), p.as_slice()))
    }

    /// Materialised document-frequency table.
    pub fn stats(&self) -> IndexStats {
        let mut df = BTreeMap::new();
        for rep in Representation::ALL {
            for (gram, list) in self.grams(rep) {
                df.insert((rep, gram.to_owned()), list.len());
            }
        }
        IndexStats {
            doc_count: self.keys.len(),
            df,
        }
    }

    /// Per-document gram sets reconstructed from the postings.
    pub fn doc_ngrams(&self) -> Vec<[NgramSet; 4]> {
        let mut out: Vec<[NgramSet; 4]> = (0..self.keys.len())
            .map(|_| {
                Representation::ALL.map(|rep| NgramSet {
                    n: self.ngram_size[rep.index()],
                    grams: BTreeMap::new(),
                })
            })
            .collect();
        for rep in Representation::ALL {
            for (gram, list) in self.grams(rep) {
                for &(doc, count) in list {
                    out[doc as usize][rep.index()].grams.insert(gram.to_owned(), count);
                }
            }
        }
        out
    }
}

impl<K> DocFrequency for InvertedIndex<K> {
    fn doc_count(&self) -> usize {
        self.keys.len()
    }

    fn df(&self, rep: Representation, gram: &str) -> usize {
        self.postings(rep, gram).len()
    }
}

/// One indexed revision of one code block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnippetDoc {
    pub doc_id: DocId,
    /// Revision text with comments removed, layout as posted.
    pub body: Vec<String>,
    pub ngram_sets: [NgramSet; 4],
}

/// Searchable index of snippet revisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnippetIndex {
    min_clone_size: usize,
    engine: InvertedIndex<DocId>,
    bodies: Vec<Vec<String>>,
    /// Latest bodies of blocks whose latest revision was too small to index.
    retained_latest: BTreeMap<(u64, u32), Vec<String>>,
}

impl SnippetIndex {
    pub fn engine(&self) -> &InvertedIndex<DocId> {
        &self.engine
    }

    pub fn min_clone_size(&self) -> usize {
        self.min_clone_size
    }

    pub fn ngram_size(&self) -> [usize; 4] {
        self.engine.ngram_size()
    }

    pub fn doc_count(&self) -> usize {
        self.engine.keys().len()
    }

    pub fn doc_ids(&self) -> &[DocId] {
        self.engine.keys()
    }

    pub fn body(&self, id: &DocId) -> Option<&[String]> {
        let pos = self.engine.keys().binary_search(id).ok()?;
        Some(&self.bodies[pos])
    }

    /// Body of the latest revision of a block, whether or not it was indexed.
    pub fn latest_body(&self, post_id: u64, local_id: u32) -> Option<&[String]> {
        self.body(&DocId::new(post_id, local_id, HistoryLabel::Latest))
            .or_else(|| self.retained_latest.get(&(post_id, local_id)).map(Vec::as_slice))
    }

    pub fn docs(&self) -> Vec<SnippetDoc> {
        self.engine
            .keys()
            .iter()
            .zip(&self.bodies)
            .zip(self.engine.doc_ngrams())
            .map(|((id, body), ngram_sets)| SnippetDoc {
                doc_id: *id,
                body: body.clone(),
                ngram_sets,
            })
            .collect()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let bytes = persist::encode(self);
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        persist::decode(&bytes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        persist::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        persist::decode(bytes)
    }
}

/// Single-writer builder for a [`SnippetIndex`].
#[derive(Debug)]
pub struct IndexBuilder {
    ngram_size: [usize; 4],
    min_clone_size: usize,
    docs: BTreeMap<DocId, SnippetDoc>,
    retained_latest: BTreeMap<(u64, u32), Vec<String>>,
}

impl IndexBuilder {
    pub fn new(ngram_size: [usize; 4], min_clone_size: usize) -> Self {
        Self {
            ngram_size,
            min_clone_size,
            docs: BTreeMap::new(),
            retained_latest: BTreeMap::new(),
        }
    }

    /// Prepares a revision body as an indexable document without inserting it.
    pub fn prepare(&self, doc_id: DocId, raw: &[String]) -> Result<SnippetDoc> {
        let body = extractor::strip_comments(raw);
        let unit = extractor::snippet_unit(&body);
        if unit.len() < self.min_clone_size {
            return Err(Error::TooSmall {
                doc_id: doc_id.to_string(),
                lines: unit.len(),
                min: self.min_clone_size,
            });
        }
        Ok(SnippetDoc {
            doc_id,
            body,
            ngram_sets: representations::ngram_sets(&unit, self.ngram_size),
        })
    }

    pub fn insert(&mut self, doc: SnippetDoc) -> Result<&SnippetDoc> {
        use std::collections::btree_map::Entry;
        match self.docs.entry(doc.doc_id) {
            Entry::Occupied(_) => Err(Error::DuplicateDoc(doc.doc_id.to_string())),
            Entry::Vacant(slot) => Ok(slot.insert(doc)),
        }
    }

    /// Indexes one revision body under `doc_id`.
    pub fn index_snippet(&mut self, doc_id: DocId, raw: &[String]) -> Result<&SnippetDoc> {
        let prepared = self.prepare(doc_id, raw);
        self.commit(doc_id, raw, prepared)
    }

    /// Inserts the outcome of [`prepare`](Self::prepare). A latest revision
    /// too small to index keeps its body so recommendations can still show it.
    pub fn commit(&mut self, doc_id: DocId, raw: &[String], prepared: Result<SnippetDoc>) -> Result<&SnippetDoc> {
        if self.docs.contains_key(&doc_id) {
            return Err(Error::DuplicateDoc(doc_id.to_string()));
        }
        match prepared {
            Ok(doc) => self.insert(doc),
            Err(e @ Error::TooSmall { .. }) => {
                if doc_id.is_latest() {
                    self.retained_latest
                        .insert(doc_id.block(), extractor::strip_comments(raw));
                }
                Err(e)
            }
            Err(e) => Err(e),
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn finish(self) -> SnippetIndex {
        let mut bodies = Vec::with_capacity(self.docs.len());
        let mut docs = Vec::with_capacity(self.docs.len());
        for (id, doc) in self.docs {
            bodies.push(doc.body);
            docs.push((id, doc.ngram_sets));
        }
        let engine = InvertedIndex::build(self.ngram_size, docs).expect("builder keys are unique");
        SnippetIndex {
            min_clone_size: self.min_clone_size,
            engine,
            bodies,
            retained_latest: self.retained_latest,
        }
    }
}

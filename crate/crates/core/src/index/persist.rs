//! Binary index file format. Layout is documented in `docs/format.md`.
//!
//! All integers are little-endian. Documents, grams and postings are
//! written in ascending order so that equal indexes produce equal bytes.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use super::{DocId, HistoryLabel, InvertedIndex, Posting, SnippetIndex};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"RVCLIDX\n";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;
const LATEST_TAG: u32 = u32::MAX;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn len(&mut self, v: usize) {
        self.u32(u32::try_from(v).expect("index section exceeds u32 range"));
    }

    fn str(&mut self, s: &str) {
        self.len(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }

    fn lines(&mut self, lines: &[String]) {
        self.len(lines.len());
        for l in lines {
            self.str(l);
        }
    }
}

pub(super) fn encode(index: &SnippetIndex) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    w.len(index.min_clone_size);
    for n in index.engine.ngram_size {
        w.len(n);
    }
    w.len(index.engine.keys.len());
    for (id, body) in index.engine.keys.iter().zip(&index.bodies) {
        w.u64(id.post_id);
        w.u32(id.local_id);
        w.u32(match id.label {
            HistoryLabel::Original => 0,
            HistoryLabel::Revision(n) => n,
            HistoryLabel::Latest => LATEST_TAG,
        });
        w.lines(body);
    }
    w.len(index.retained_latest.len());
    for ((post, local), body) in &index.retained_latest {
        w.u64(*post);
        w.u32(*local);
        w.lines(body);
    }
    for rep in &index.engine.postings {
        w.len(rep.len());
        for (gram, list) in rep {
            w.str(gram);
            w.len(list.len());
            for &(doc, count) in list {
                w.u32(doc);
                w.u32(count);
            }
        }
    }
    let digest = Sha256::digest(&w.0);
    w.0.extend_from_slice(&digest);
    w.0
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptIndex(msg.into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }

    fn str(&mut self) -> Result<String> {
        let n = self.len()?;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| corrupt("string is not UTF-8"))
    }

    fn lines(&mut self) -> Result<Vec<String>> {
        let n = self.len()?;
        (0..n).map(|_| self.str()).collect()
    }
}

pub(super) fn decode(bytes: &[u8]) -> Result<SnippetIndex> {
    if bytes.len() < MAGIC.len() + 4 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(corrupt("missing index header"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if bytes.len() < 12 + DIGEST_LEN {
        return Err(corrupt("truncated index"));
    }
    let (payload, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(payload).as_slice() != digest {
        return Err(corrupt("checksum mismatch"));
    }

    let mut r = Reader {
        bytes: payload,
        pos: 12,
    };
    let min_clone_size = r.len()?;
    let mut ngram_size = [0usize; 4];
    for n in &mut ngram_size {
        *n = r.len()?;
        if *n == 0 {
            return Err(corrupt("zero n-gram size"));
        }
    }
    let doc_count = r.len()?;
    let mut keys = Vec::with_capacity(doc_count.min(1 << 20));
    let mut bodies = Vec::with_capacity(doc_count.min(1 << 20));
    for _ in 0..doc_count {
        let post_id = r.u64()?;
        let local_id = r.u32()?;
        let label = match r.u32()? {
            0 => HistoryLabel::Original,
            LATEST_TAG => HistoryLabel::Latest,
            n => HistoryLabel::Revision(n),
        };
        let id = DocId::new(post_id, local_id, label);
        if keys.last().is_some_and(|prev| prev >= &id) {
            return Err(corrupt(format!("documents out of order at {id}")));
        }
        keys.push(id);
        bodies.push(r.lines()?);
    }
    let retained_count = r.len()?;
    let mut retained_latest = BTreeMap::new();
    for _ in 0..retained_count {
        let post = r.u64()?;
        let local = r.u32()?;
        retained_latest.insert((post, local), r.lines()?);
    }
    let mut postings: [BTreeMap<String, Vec<Posting>>; 4] = Default::default();
    for rep in &mut postings {
        let grams = r.len()?;
        for _ in 0..grams {
            let gram = r.str()?;
            let n = r.len()?;
            let mut list = Vec::with_capacity(n.min(doc_count));
            for _ in 0..n {
                let doc = r.u32()?;
                let count = r.u32()?;
                if doc as usize >= doc_count || count == 0 {
                    return Err(corrupt(format!("bad posting for gram {gram:?}")));
                }
                list.push((doc, count));
            }
            rep.insert(gram, list);
        }
    }
    if r.pos != payload.len() {
        return Err(corrupt("trailing bytes"));
    }
    Ok(SnippetIndex {
        min_clone_size,
        engine: InvertedIndex {
            ngram_size,
            keys,
            postings,
        },
        bodies,
        retained_latest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexBuilder;

    fn sample() -> SnippetIndex {
        let mut b = IndexBuilder::new([1, 4, 4, 4], 1);
        for (i, body) in [
            "void a() { x = 1; }",
            "void b() { s = \"hi there\"; }",
            "void c() { for (int i = 0; i < n; i++) { t += i; } }",
        ]
        .iter()
        .enumerate()
        {
            b.index_snippet(
                DocId::new(10 + i as u64, 0, HistoryLabel::for_position(i, 3)),
                &[body.to_string()],
            )
            .unwrap();
        }
        b.finish()
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let idx = sample();
        let bytes = encode(&idx);
        let back = decode(&bytes).unwrap();
        assert_eq!(back, idx);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn empty_and_garbage_inputs_are_corrupt() {
        assert!(matches!(decode(&[]), Err(Error::CorruptIndex(_))));
        assert!(matches!(decode(b"not an index at all"), Err(Error::CorruptIndex(_))));
    }

    #[test]
    fn version_is_checked() {
        let mut bytes = encode(&sample());
        bytes[8..12].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(
            decode(&bytes),
            Err(Error::FormatVersionMismatch { found: 7, .. })
        ));
    }

    #[test]
    fn flipped_byte_is_detected() {
        let mut bytes = encode(&sample());
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x55;
        assert!(matches!(decode(&bytes), Err(Error::CorruptIndex(_))));
        let bytes = encode(&sample());
        assert!(matches!(decode(&bytes[..bytes.len() - 5]), Err(Error::CorruptIndex(_))));
    }
}

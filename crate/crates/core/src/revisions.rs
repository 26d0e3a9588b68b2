//! Snippet-revision ingestion and revision-aware project scanning.
//!
//! A revision dump is newline-delimited JSON, one revision per line:
//!
//! ```text
//! {"post_id":8394534,"local_id":0,"history_seq":0,"is_accepted":true,"body":"int x = 1;\n..."}
//! ```
//!
//! Blank lines are ignored. `history_seq` must run 0, 1, 2, ... within each
//! `(post_id, local_id)` block.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boilerplate::BoilerplateFilter;
use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::extractor::{self, MethodRecord};
use crate::index::{DocId, HistoryLabel, IndexBuilder, SnippetIndex};
use crate::metrics::levenshtein;
use crate::search;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnippetRevision {
    pub post_id: u64,
    pub local_id: u32,
    pub history_seq: u32,
    pub is_accepted: bool,
    pub body: String,
}

impl SnippetRevision {
    pub fn lines(&self) -> Vec<String> {
        self.body.lines().map(str::to_owned).collect()
    }

    pub fn block(&self) -> (u64, u32) {
        (self.post_id, self.local_id)
    }
}

/// Parses a revision dump, validating block histories.
pub fn parse_dump(reader: impl BufRead) -> Result<Vec<SnippetRevision>> {
    let mut revs = Vec::new();
    let mut seen: BTreeMap<(u64, u32), Vec<(u32, usize)>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::schema(lineno, "line is not valid UTF-8"),
            _ => Error::io("<dump>", e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rev: SnippetRevision = serde_json::from_str(&line).map_err(|e| Error::schema(lineno, e.to_string()))?;
        if rev.post_id == 0 {
            return Err(Error::schema(lineno, "post_id must be positive"));
        }
        seen.entry(rev.block()).or_default().push((rev.history_seq, lineno));
        revs.push(rev);
    }
    for ((post, local), mut seqs) in seen {
        seqs.sort_unstable();
        for (expected, &(seq, lineno)) in seqs.iter().enumerate() {
            if seq as usize != expected {
                return Err(Error::schema(
                    lineno,
                    format!("block {post}_{local}: history_seq {seq} where {expected} was expected"),
                ));
            }
        }
    }
    Ok(revs)
}

pub fn read_dump(path: &Path) -> Result<Vec<SnippetRevision>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dump(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub answers: usize,
    pub blocks: usize,
    pub revisions: usize,
    pub indexed: usize,
    pub skipped_too_small: usize,
    pub deduplicated: usize,
    pub skipped_unaccepted: usize,
}

/// Accepted revisions grouped by block, in history order.
pub fn accepted_blocks(revs: &[SnippetRevision]) -> BTreeMap<(u64, u32), Vec<&SnippetRevision>> {
    let mut blocks: BTreeMap<(u64, u32), Vec<&SnippetRevision>> = BTreeMap::new();
    for rev in revs.iter().filter(|r| r.is_accepted) {
        blocks.entry(rev.block()).or_default().push(rev);
    }
    for list in blocks.values_mut() {
        list.sort_by_key(|r| r.history_seq);
    }
    blocks
}

/// Indexes every accepted revision. Consecutive revisions whose code is
/// identical once comments and layout are normalised collapse into one.
pub fn ingest_revisions(revs: &[SnippetRevision], cfg: &SearchConfig) -> Result<(SnippetIndex, IngestReport)> {
    let blocks = accepted_blocks(revs);
    let mut report = IngestReport {
        answers: blocks
            .keys()
            .map(|(post, _)| post)
            .collect::<std::collections::BTreeSet<_>>()
            .len(),
        blocks: blocks.len(),
        revisions: revs.iter().filter(|r| r.is_accepted).count(),
        skipped_unaccepted: revs.iter().filter(|r| !r.is_accepted).count(),
        ..Default::default()
    };

    let mut pending: Vec<(DocId, Vec<String>)> = Vec::new();
    for ((post, local), history) in &blocks {
        let mut kept: Vec<(Vec<String>, Vec<String>)> = Vec::new();
        for rev in history {
            let raw = rev.lines();
            let unit = extractor::snippet_unit(&extractor::strip_comments(&raw));
            if kept.last().is_some_and(|(_, prev)| *prev == unit) {
                report.deduplicated += 1;
                continue;
            }
            kept.push((raw, unit));
        }
        let count = kept.len();
        for (pos, (raw, _)) in kept.into_iter().enumerate() {
            pending.push((DocId::new(*post, *local, HistoryLabel::for_position(pos, count)), raw));
        }
    }

    let mut builder = IndexBuilder::new(cfg.ngram_size, cfg.min_clone_size);
    let prepared: Vec<Result<_>> = pending.par_iter().map(|(id, raw)| builder.prepare(*id, raw)).collect();
    for ((id, raw), doc) in pending.iter().zip(prepared) {
        match builder.commit(*id, raw, doc) {
            Ok(_) => report.indexed += 1,
            Err(Error::TooSmall { .. }) => report.skipped_too_small += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((builder.finish(), report))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recommendation {
    pub project_id: String,
    pub path: String,
    pub method_name: String,
    pub start_line: usize,
    pub end_line: usize,
    pub matched_doc_id: DocId,
    pub latest_post_id: u64,
    pub latest_body: Vec<String>,
    pub edit_distance: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanOutcome {
    pub recommendations: Vec<Recommendation>,
    pub files: usize,
    pub methods: usize,
    pub boilerplate: usize,
    /// Files that could not be parsed, with the reason.
    pub skipped_files: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub extensions: Vec<String>,
    pub boilerplate: BoilerplateFilter,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            extensions: vec!["java".to_owned()],
            boilerplate: BoilerplateFilter::default(),
        }
    }
}

/// Recommendation for one method, if its best match is an outdated revision.
pub fn recommend(method: &MethodRecord, index: &SnippetIndex, cfg: &SearchConfig) -> Result<Option<Recommendation>> {
    let hits = match search::search(method, index, cfg) {
        Ok(hits) => hits,
        Err(Error::EmptyQuery) => return Ok(None),
        Err(e) => return Err(e),
    };
    let Some(top) = hits.first() else {
        return Ok(None);
    };
    if top.doc.is_latest() {
        return Ok(None);
    }
    let (post, local) = top.doc.block();
    let (Some(matched), Some(latest)) = (index.body(&top.doc), index.latest_body(post, local)) else {
        log::warn!("block {post}_{local} has no latest revision; skipping");
        return Ok(None);
    };
    Ok(Some(Recommendation {
        project_id: method.project_id.clone(),
        path: method.path.clone(),
        method_name: method.method_name.clone(),
        start_line: method.start_line,
        end_line: method.end_line,
        matched_doc_id: top.doc,
        latest_post_id: post,
        latest_body: latest.to_vec(),
        edit_distance: levenshtein(&matched.join("\n"), &latest.join("\n")),
    }))
}

/// Scans every source file under `root` and recommends latest revisions
/// for methods whose best match is an outdated one. Files that fail to
/// parse are skipped and reported, never fatal.
pub fn scan_project(root: &Path, index: &SnippetIndex, cfg: &SearchConfig, opts: &ScanOptions) -> Result<ScanOutcome> {
    if index.ngram_size() != cfg.ngram_size {
        return Err(Error::NgramMismatch {
            index: index.ngram_size(),
            config: cfg.ngram_size,
        });
    }
    let project_id = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let files = extractor::read_source_tree(root, &project_id, &opts.extensions)?;

    struct FileResult {
        recs: Vec<Recommendation>,
        methods: usize,
        boilerplate: usize,
        skipped: Option<(String, String)>,
    }

    let per_file: Vec<Result<FileResult>> = files
        .par_iter()
        .map(|file| {
            let mut out = FileResult {
                recs: Vec::new(),
                methods: 0,
                boilerplate: 0,
                skipped: None,
            };
            let methods = match extractor::extract_methods(file, cfg.min_clone_size) {
                Ok(m) => m,
                Err(e) => {
                    log::warn!("skipping {}: {e}", file.path);
                    out.skipped = Some((file.path.clone(), e.to_string()));
                    return Ok(out);
                }
            };
            for method in &methods {
                out.methods += 1;
                if let Some(pattern) = opts.boilerplate.is_boilerplate(method) {
                    log::debug!("{}:{} {pattern}", method.path, method.start_line);
                    out.boilerplate += 1;
                    continue;
                }
                if let Some(rec) = recommend(method, index, cfg)? {
                    out.recs.push(rec);
                }
            }
            Ok(out)
        })
        .collect();

    let mut outcome = ScanOutcome {
        files: files.len(),
        ..Default::default()
    };
    for r in per_file {
        let r = r?;
        outcome.recommendations.extend(r.recs);
        outcome.methods += r.methods;
        outcome.boilerplate += r.boilerplate;
        outcome.skipped_files.extend(r.skipped);
    }
    outcome.recommendations.sort_by(|a, b| {
        (&a.path, a.start_line, a.end_line, &a.method_name).cmp(&(&b.path, b.start_line, b.end_line, &b.method_name))
    });
    Ok(outcome)
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RecommendationRow {
    pub file: String,
    pub method: String,
    pub start_line: usize,
    pub end_line: usize,
    pub post_id: u64,
    pub matched_doc_id: String,
    pub edit_distance: usize,
}

impl From<&Recommendation> for RecommendationRow {
    fn from(r: &Recommendation) -> Self {
        Self {
            file: r.path.clone(),
            method: r.method_name.clone(),
            start_line: r.start_line,
            end_line: r.end_line,
            post_id: r.latest_post_id,
            matched_doc_id: r.matched_doc_id.to_string(),
            edit_distance: r.edit_distance,
        }
    }
}

pub const CSV_HEADER: [&str; 7] = [
    "file",
    "method",
    "start_line",
    "end_line",
    "post_id",
    "matched_doc_id",
    "edit_distance",
];

pub fn write_recommendations(recs: &[Recommendation], out: impl std::io::Write) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in recs {
        w.serialize(RecommendationRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_recommendations_csv(recs: &[Recommendation], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_recommendations(recs, file).map_err(|e| Error::csv(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rev(post: u64, local: u32, seq: u32, body: &str) -> SnippetRevision {
        SnippetRevision {
            post_id: post,
            local_id: local,
            history_seq: seq,
            is_accepted: true,
            body: body.to_owned(),
        }
    }

    fn dump(revs: &[SnippetRevision]) -> String {
        revs.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect()
    }

    const V0: &str = "void copy(InputStream in, OutputStream out) throws IOException {\n    byte[] buf = new byte[1024];\n    int n;\n    while ((n = in.read(buf)) > 0) {\n        out.write(buf, 0, n);\n    }\n}";
    const V1: &str = "void copy(InputStream in, OutputStream out) throws IOException {\n    byte[] buf = new byte[8192];\n    int n;\n    while ((n = in.read(buf)) != -1) {\n        out.write(buf, 0, n);\n    }\n    out.flush();\n}";
    const V2: &str = "void copy(InputStream in, OutputStream out) throws IOException {\n    try (InputStream src = in; OutputStream dst = out) {\n        src.transferTo(dst);\n    }\n    out.flush();\n    log.debug(\"copied\");\n}";

    #[test]
    fn parse_dump_reports_line_numbers() {
        let text = format!("{}\n{{\"post_id\": 1}}\n", dump(&[rev(1, 0, 0, V0)]));
        let err = parse_dump(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Schema { line: 3, .. }), "{err}");
    }

    #[test]
    fn parse_dump_checks_history_contiguity() {
        let text = dump(&[rev(1, 0, 0, V0), rev(1, 0, 2, V1)]);
        let err = parse_dump(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Schema { line: 2, .. }), "{err}");
        let text = dump(&[rev(1, 0, 0, V0), rev(1, 0, 0, V1)]);
        assert!(parse_dump(text.as_bytes()).is_err());
    }

    #[test]
    fn three_revisions_become_original_one_latest() {
        let revs =
            parse_dump(dump(&[rev(8394534, 0, 0, V0), rev(8394534, 0, 1, V1), rev(8394534, 0, 2, V2)]).as_bytes())
                .unwrap();
        let (idx, report) = ingest_revisions(&revs, &SearchConfig::default()).unwrap();
        let ids: Vec<_> = idx.doc_ids().iter().map(ToString::to_string).collect();
        assert_eq!(ids, ["8394534_0_latest", "8394534_0_original", "8394534_0_1"]);
        assert_eq!(report.indexed, 3);
        assert_eq!((report.answers, report.blocks, report.revisions), (1, 1, 3));
    }

    #[test]
    fn single_revision_block_is_latest_only() {
        let (idx, _) = ingest_revisions(&[rev(7, 0, 0, V0)], &SearchConfig::default()).unwrap();
        let ids: Vec<_> = idx.doc_ids().iter().map(ToString::to_string).collect();
        assert_eq!(ids, ["7_0_latest"]);
    }

    #[test]
    fn small_unaccepted_and_duplicate_revisions_are_counted() {
        let mut revs = vec![
            rev(1, 0, 0, "int a = 1;\nfoo(a);"),
            rev(2, 0, 0, V0),
            rev(2, 0, 1, &format!("// tidy comment\n{V0}")),
            rev(2, 0, 2, V1),
        ];
        revs.push(SnippetRevision {
            is_accepted: false,
            ..rev(3, 0, 0, V2)
        });
        let (idx, report) = ingest_revisions(&revs, &SearchConfig::default()).unwrap();
        assert_eq!(report.skipped_too_small, 1);
        assert_eq!(report.deduplicated, 1);
        assert_eq!(report.skipped_unaccepted, 1);
        assert_eq!(report.indexed, 2);
        let ids: Vec<_> = idx.doc_ids().iter().map(ToString::to_string).collect();
        assert_eq!(ids, ["2_0_latest", "2_0_original"]);
    }

    fn project(files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (path, text) in files {
            let p = dir.path().join(path);
            std::fs::create_dir_all(p.parent().unwrap()).unwrap();
            std::fs::write(p, text).unwrap();
        }
        dir
    }

    fn wrap(method: &str) -> String {
        format!("package demo;\n\npublic class Util {{\n{method}\n}}\n")
    }

    #[test]
    fn outdated_copy_is_recommended_and_latest_is_not() {
        let revs = [rev(8394534, 0, 0, V0), rev(8394534, 0, 1, V1), rev(8394534, 0, 2, V2)];
        let cfg = SearchConfig::default();
        let (idx, _) = ingest_revisions(&revs, &cfg).unwrap();
        let dir = project(&[("src/Old.java", &wrap(V0)), ("src/New.java", &wrap(V2))]);
        let out = scan_project(dir.path(), &idx, &cfg, &ScanOptions::default()).unwrap();
        assert_eq!(out.recommendations.len(), 1, "{out:?}");
        let rec = &out.recommendations[0];
        assert_eq!(rec.path, "src/Old.java");
        assert_eq!(rec.matched_doc_id.to_string(), "8394534_0_original");
        assert_eq!(rec.latest_post_id, 8394534);
        assert_eq!(rec.latest_body.join("\n"), V2);
        assert_eq!((rec.start_line, rec.end_line), (4, 10));
        assert_eq!(rec.edit_distance, levenshtein(V0, V2));
    }

    #[test]
    fn boilerplate_only_project_yields_nothing() {
        let revs = [
            rev(5, 0, 0, "public int getX() {\n    return x;\n}\n\n\n\n"),
            rev(5, 0, 1, "public int getX() {\n    return this.x;\n}"),
        ];
        let cfg = SearchConfig {
            min_clone_size: 6,
            ..Default::default()
        };
        let (idx, _) = ingest_revisions(&revs, &cfg).unwrap();
        let dir = project(&[(
            "A.java",
            &wrap("public int getX() { return x; }\npublic void setX(int x) { this.x = x; }"),
        )]);
        let out = scan_project(dir.path(), &idx, &cfg, &ScanOptions::default()).unwrap();
        assert!(out.recommendations.is_empty());
    }

    #[test]
    fn unparsable_files_are_skipped() {
        let revs = [rev(8394534, 0, 0, V0), rev(8394534, 0, 1, V2)];
        let cfg = SearchConfig::default();
        let (idx, _) = ingest_revisions(&revs, &cfg).unwrap();
        let dir = project(&[("Broken.java", "class B { void f() { if (x) {"), ("Ok.java", &wrap(V0))]);
        let out = scan_project(dir.path(), &idx, &cfg, &ScanOptions::default()).unwrap();
        assert_eq!(out.skipped_files.len(), 1);
        assert_eq!(out.recommendations.len(), 1);
    }

    #[test]
    fn csv_header_only_and_quoting() {
        let mut buf = Vec::new();
        write_recommendations(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "file,method,start_line,end_line,post_id,matched_doc_id,edit_distance\n"
        );

        let rec = Recommendation {
            project_id: "p".into(),
            path: "src/a,b.java".into(),
            method_name: "copy".into(),
            start_line: 3,
            end_line: 9,
            matched_doc_id: "8394534_0_original".parse().unwrap(),
            latest_post_id: 8394534,
            latest_body: vec![],
            edit_distance: 12,
        };
        let mut buf = Vec::new();
        write_recommendations(std::slice::from_ref(&rec), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"src/a,b.java\""));
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<RecommendationRow> = r.deserialize().collect::<csv::Result<_>>().unwrap();
        assert_eq!(rows, [RecommendationRow::from(&rec)]);
    }
}

#![allow(dead_code)]

//! Seeded corpus shared by the integration suites.
//!
//! 50 snippet blocks, each with 2 to 4 revisions, and 5 projects holding
//! 20 verbatim copies of non-latest revisions, 20 identifier-renamed copies
//! and 20 unrelated methods.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use revclone::{DocId, HistoryLabel, SnippetRevision};

pub const SEED: u64 = 0x5eed_2024;
pub const BLOCKS: usize = 50;
pub const PROJECTS: usize = 5;
pub const PER_KIND: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Verbatim,
    Renamed,
    Unrelated,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub post_id: u64,
    pub local_id: u32,
    /// Revision bodies, oldest first.
    pub revisions: Vec<String>,
}

impl Block {
    pub fn doc_id(&self, seq: usize) -> DocId {
        DocId::new(
            self.post_id,
            self.local_id,
            HistoryLabel::for_position(seq, self.revisions.len()),
        )
    }

    pub fn latest(&self) -> &str {
        self.revisions.last().unwrap()
    }
}

/// Source block and revision of a copied method.
pub type Origin = Option<(usize, usize)>;

#[derive(Debug, Clone)]
pub struct Planted {
    pub kind: Kind,
    pub project: String,
    pub path: String,
    pub start_line: usize,
    pub end_line: usize,
    pub origin: Origin,
    pub body: String,
}

#[derive(Debug, Clone)]
pub struct Project {
    pub name: String,
    /// Relative path and file text.
    pub files: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub blocks: Vec<Block>,
    pub projects: Vec<Project>,
    pub planted: Vec<Planted>,
}

fn digit(rng: &mut ChaCha8Rng) -> u32 {
    rng.gen_range(1..10)
}

fn block_statement(i: usize, rng: &mut ChaCha8Rng) -> String {
    let d = digit(rng);
    match rng.gen_range(0..12) {
        0 => format!("acc{i} += items{i}[{d}];"),
        1 => format!("if (acc{i} > limit{i}) {{\n    acc{i} = limit{i} - {d};\n}}"),
        2 => format!(
            "for (int k{i} = 0; k{i} < items{i}.length; k{i}++) {{\n    acc{i} = acc{i} * {d} + items{i}[k{i}];\n}}"
        ),
        3 => format!("log{i}.info(\"block-{i} step {d}\");"),
        4 => format!("acc{i} = Math.max(acc{i}, helper{i}(seed{i}, {d}));"),
        5 => format!("while (acc{i} % {} != 0) {{\n    acc{i}--;\n}}", d + 2),
        6 => format!("String text{i} = String.valueOf(acc{i} + {d});"),
        7 => format!("items{i}[0] = acc{i} - seed{i};"),
        8 => format!("acc{i} = acc{i} << {d};"),
        9 => format!("if (items{i}.length == {d}) {{\n    return -{d};\n}}"),
        10 => format!("seed{i} = helper{i}(acc{i}, items{i}.length);"),
        _ => format!("acc{i} ^= seed{i} >>> {d};"),
    }
}

fn unrelated_statement(j: usize, rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..8) {
        0 => format!("StringBuilder sb{j} = new StringBuilder();"),
        1 => format!("do {{\n    mode{j} /= 2;\n}} while (mode{j} > 1);"),
        2 => format!(
            "switch (mode{j}) {{\n    case 1:\n        mode{j} = -mode{j};\n        break;\n    default:\n        break;\n}}"
        ),
        3 => format!(
            "try {{\n    stream{j}.close();\n}} catch (IOException e{j}) {{\n    failed{j} = true;\n}}"
        ),
        4 => format!("String label{j} = flag{j} ? \"yes\" : \"no\";"),
        5 => format!("names{j}.forEach(s -> out{j}.append(s).append(','));"),
        6 => format!(
            "if (obj{j} instanceof Number) {{\n    total{j} += ((Number) obj{j}).doubleValue();\n}}"
        ),
        _ => format!("synchronized (lock{j}) {{\n    counter{j}.incrementAndGet();\n}}"),
    }
}

fn indent(text: &str, by: usize) -> String {
    let pad = " ".repeat(by);
    text.lines()
        .map(|l| {
            if l.is_empty() {
                String::new()
            } else {
                format!("{pad}{l}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_block(i: usize, version: u64, middle: &[String]) -> String {
    let mut out = format!(
        "static int compute{i}(int[] items{i}, int seed{i}) {{\n    int acc{i} = seed{i};\n    int limit{i} = {version};\n"
    );
    for s in middle {
        out.push_str(&indent(s, 4));
        out.push('\n');
    }
    out.push_str(&format!("    return acc{i};\n}}"));
    out
}

fn generate_block(i: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let count = rng.gen_range(2..=4);
    let mut middle: Vec<String> = (0..rng.gen_range(4..=7)).map(|_| block_statement(i, rng)).collect();
    let mut out = Vec::with_capacity(count);
    for seq in 0..count {
        if seq > 0 {
            match rng.gen_range(0..3) {
                0 => {
                    let at = rng.gen_range(0..=middle.len());
                    middle.insert(at, block_statement(i, rng));
                }
                1 if middle.len() > 4 => {
                    let at = rng.gen_range(0..middle.len());
                    middle.remove(at);
                }
                _ => {
                    let at = rng.gen_range(0..middle.len());
                    let mut fresh = block_statement(i, rng);
                    while fresh == middle[at] {
                        fresh = block_statement(i, rng);
                    }
                    middle[at] = fresh;
                }
            }
        }
        let version = 100_000 + (i as u64) * 100 + seq as u64;
        out.push(render_block(i, version, &middle));
    }
    out
}

fn unrelated_method(j: usize, rng: &mut ChaCha8Rng) -> String {
    let mut out = format!("public void process{j}(List<String> names{j}, Object obj{j}, int mode{j}) {{\n");
    for _ in 0..rng.gen_range(5..=7) {
        out.push_str(&indent(&unrelated_statement(j, rng), 4));
        out.push('\n');
    }
    out.push('}');
    out
}

/// Consistently renames every identifier belonging to block `i`.
pub fn rename_block_identifiers(body: &str, i: usize) -> String {
    let re = Regex::new(&format!(r"\b([A-Za-z]+){i}\b")).unwrap();
    re.replace_all(body, |c: &regex::Captures| format!("{}Alt{}x", &c[1], i * 7 + 3))
        .into_owned()
}

impl Fixture {
    pub fn generate() -> Self {
        Self::with_seed(SEED)
    }

    pub fn with_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks: Vec<Block> = (0..BLOCKS)
            .map(|i| Block {
                post_id: 40_000 + (i / 2) as u64 * 13,
                local_id: (i % 2) as u32,
                revisions: generate_block(i, &mut rng),
            })
            .collect();

        let mut order: Vec<usize> = (0..BLOCKS).collect();
        order.shuffle(&mut rng);
        let mut methods: Vec<(Kind, Origin, String)> = Vec::new();
        for (n, &b) in order.iter().take(2 * PER_KIND).enumerate() {
            let seq = rng.gen_range(0..blocks[b].revisions.len() - 1);
            let body = &blocks[b].revisions[seq];
            if n < PER_KIND {
                methods.push((Kind::Verbatim, Some((b, seq)), body.clone()));
            } else {
                methods.push((Kind::Renamed, Some((b, seq)), rename_block_identifiers(body, b)));
            }
        }
        for j in 0..PER_KIND {
            methods.push((Kind::Unrelated, None, unrelated_method(j, &mut rng)));
        }
        methods.shuffle(&mut rng);

        let mut projects: Vec<Project> = (0..PROJECTS)
            .map(|p| Project {
                name: format!("proj{p}"),
                files: Vec::new(),
            })
            .collect();
        let mut planted = Vec::new();
        for (p, chunk) in methods.chunks(methods.len() / PROJECTS).enumerate() {
            for (f, group) in chunk.chunks(4).enumerate() {
                let path = format!("src/main/java/p{p}/Unit{f}.java");
                let mut text = format!(
                    "package p{p};\n\nimport java.io.IOException;\nimport java.util.List;\n\npublic class Unit{f} {{\n"
                );
                let mut line = text.lines().count() + 1;
                for (kind, origin, body) in group {
                    text.push('\n');
                    line += 1;
                    let lines = body.lines().count();
                    planted.push(Planted {
                        kind: *kind,
                        project: projects[p].name.clone(),
                        path: path.clone(),
                        start_line: line,
                        end_line: line + lines - 1,
                        origin: *origin,
                        body: body.clone(),
                    });
                    text.push_str(&indent(body, 4));
                    text.push('\n');
                    line += lines;
                }
                text.push_str("}\n");
                projects[p].files.push((path, text));
            }
        }
        Self {
            blocks,
            projects,
            planted,
        }
    }

    pub fn revisions(&self) -> Vec<SnippetRevision> {
        let mut out = Vec::new();
        for b in &self.blocks {
            for (seq, body) in b.revisions.iter().enumerate() {
                out.push(SnippetRevision {
                    post_id: b.post_id,
                    local_id: b.local_id,
                    history_seq: seq as u32,
                    is_accepted: true,
                    body: body.clone(),
                });
            }
        }
        out
    }

    pub fn dump_jsonl(&self) -> String {
        self.revisions()
            .iter()
            .map(|r| serde_json::to_string(r).unwrap() + "\n")
            .collect()
    }

    /// Writes each project under `dir/<name>` and returns the roots.
    pub fn write_projects(&self, dir: &Path) -> Vec<PathBuf> {
        self.projects
            .iter()
            .map(|p| {
                let root = dir.join(&p.name);
                for (path, text) in &p.files {
                    let file = root.join(path);
                    std::fs::create_dir_all(file.parent().unwrap()).unwrap();
                    std::fs::write(file, text).unwrap();
                }
                root
            })
            .collect()
    }

    pub fn planted(&self, kind: Kind) -> impl Iterator<Item = &Planted> {
        self.planted.iter().filter(move |m| m.kind == kind)
    }
}

/// A project whose only file holds the latest revision of every block.
pub fn latest_project(fx: &Fixture, dir: &Path) -> PathBuf {
    let root = dir.join("latest");
    let file = root.join("src/Latest.java");
    std::fs::create_dir_all(file.parent().unwrap()).unwrap();
    let mut text = String::from("package latest;\n\npublic class Latest {\n");
    for b in &fx.blocks {
        text.push('\n');
        text.push_str(&indent(b.latest(), 4));
        text.push('\n');
    }
    text.push_str("}\n");
    std::fs::write(file, text).unwrap();
    root
}

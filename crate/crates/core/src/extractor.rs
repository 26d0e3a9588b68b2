//! Method-level extraction from Java-syntax source.
//!
//! Extraction is a lexer plus brace matching rather than a grammar, so
//! incomplete fragments (typical of Q&A snippets) still yield methods.
//!
//! Canonical layout style, applied by [`normalize_layout`]:
//!
//! | construct                 | layout                                        |
//! |---------------------------|-----------------------------------------------|
//! | `{`                       | ends the line, indents following lines by 4   |
//! | `}`                       | own line, dedents; `else`/`catch`/`finally`, `;`, `,`, `)` stay on its line |
//! | `;` outside parentheses   | ends the line                                 |
//! | tokens within a line      | one space, except around `.` `::` `(` `[` `@`, before `;` `,` `)` `]` and postfix `++`/`--` |
//! | unterminated literal      | ends the line                                 |
//!
//! Initializer blocks (`static { }` and instance `{ }`) are not methods.
//! Generic methods and interface `default` methods are ordinary methods.

use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::lexer::{self, Token, TokenKind};

/// Name given to the method shell wrapped around bare statement snippets.
pub const SNIPPET_METHOD: &str = "snippet";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub project_id: String,
    /// Path relative to the project root, `/`-separated.
    pub path: String,
    pub lines: Vec<String>,
}

impl SourceFile {
    pub fn new(project_id: impl Into<String>, path: impl Into<String>, text: &str) -> Self {
        Self {
            project_id: project_id.into(),
            path: path.into(),
            lines: text.lines().map(str::to_owned).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodRecord {
    pub project_id: String,
    pub path: String,
    pub method_name: String,
    pub start_line: usize,
    pub end_line: usize,
    /// Comment-free body in canonical layout.
    pub body: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Code,
    Block,
    TextBlock,
}

/// Removes line and block comments, leaving string and character literals
/// untouched. Lines that held nothing but comments are dropped; other lines
/// keep their text, with trailing whitespace trimmed where a comment was cut.
pub fn strip_comments<S: AsRef<str>>(lines: &[S]) -> Vec<String> {
    let mut out = Vec::with_capacity(lines.len());
    let mut mode = Mode::Code;
    for line in lines {
        let chars: Vec<char> = line.as_ref().chars().collect();
        let mut buf = String::with_capacity(chars.len());
        let mut had_comment = mode == Mode::Block;
        let mut skip_ws = false;
        let mut i = 0;
        let at = |i: usize, s: &str| s.chars().enumerate().all(|(k, c)| chars.get(i + k) == Some(&c));
        while i < chars.len() {
            match mode {
                Mode::Block => {
                    if at(i, "*/") {
                        i += 2;
                        mode = Mode::Code;
                        if !buf.is_empty() && !buf.ends_with(char::is_whitespace) {
                            buf.push(' ');
                        }
                        skip_ws = true;
                    } else {
                        i += 1;
                    }
                }
                Mode::TextBlock => {
                    if at(i, "\"\"\"") {
                        buf.push_str("\"\"\"");
                        i += 3;
                        mode = Mode::Code;
                    } else {
                        if chars[i] == '\\' && i + 1 < chars.len() {
                            buf.push(chars[i]);
                            i += 1;
                        }
                        buf.push(chars[i]);
                        i += 1;
                    }
                }
                Mode::Code => {
                    let c = chars[i];
                    if at(i, "//") {
                        had_comment = true;
                        break;
                    } else if at(i, "/*") {
                        had_comment = true;
                        mode = Mode::Block;
                        i += 2;
                    } else if at(i, "\"\"\"") {
                        buf.push_str("\"\"\"");
                        i += 3;
                        mode = Mode::TextBlock;
                        skip_ws = false;
                    } else if c == '"' || c == '\'' {
                        buf.push(c);
                        i += 1;
                        while i < chars.len() {
                            let d = chars[i];
                            buf.push(d);
                            i += 1;
                            if d == '\\' && i < chars.len() {
                                buf.push(chars[i]);
                                i += 1;
                            } else if d == c {
                                break;
                            }
                        }
                        skip_ws = false;
                    } else {
                        if !(skip_ws && c.is_whitespace()) {
                            buf.push(c);
                            skip_ws = false;
                        }
                        i += 1;
                    }
                }
            }
        }
        if !had_comment {
            out.push(line.as_ref().to_owned());
        } else if !buf.trim().is_empty() {
            out.push(buf.trim_end().to_owned());
        }
    }
    out
}

/// Reformats comment-free source into the canonical layout described in
/// the module docs. Idempotent.
pub fn normalize_layout<S: AsRef<str>>(lines: &[S]) -> Vec<String> {
    format_tokens(&lexer::lex(&join(lines)))
}

fn join<S: AsRef<str>>(lines: &[S]) -> String {
    let mut text = String::new();
    for (i, l) in lines.iter().enumerate() {
        if i > 0 {
            text.push('\n');
        }
        text.push_str(l.as_ref());
    }
    text
}

fn is_unterminated(tok: &Token) -> bool {
    if tok.kind != TokenKind::Literal {
        return false;
    }
    let chars: Vec<char> = tok.text.chars().collect();
    let quote = match chars.first() {
        Some(&q @ ('"' | '\'')) => q,
        _ => return false,
    };
    if tok.text.starts_with("\"\"\"") {
        return false;
    }
    let mut i = 1;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            c if c == quote => return i + 1 != chars.len(),
            _ => i += 1,
        }
    }
    true
}

fn glue(prev: &Token, next: &Token) -> bool {
    let p = prev.text.as_str();
    let n = next.text.as_str();
    let word = |t: &Token| matches!(t.kind, TokenKind::Ident | TokenKind::Keyword);
    let string_lit = |t: &Token| t.kind == TokenKind::Literal && t.text.starts_with('"');
    match n {
        ";" | "," | ")" | "]" => return true,
        "." => return word(prev) || matches!(p, ")" | "]" | ">") || string_lit(prev),
        "(" => return prev.is_ident() || matches!(p, "this" | "super" | ")" | "]" | ">"),
        "[" => return prev.is_ident() || lexer::TYPE_KEYWORDS.contains(&p) || matches!(p, "]" | ")" | ">"),
        "::" => return word(prev) || matches!(p, ")" | "]" | ">"),
        "++" | "--" => return prev.is_ident() || matches!(p, ")" | "]"),
        _ => {}
    }
    match p {
        "(" | "[" => true,
        "." | "::" => word(next),
        "@" => next.is_ident() || n == "interface",
        "!" => word(next) || next.kind == TokenKind::Literal || n == "(",
        _ => false,
    }
}

/// Lays out a token sequence in canonical style.
pub fn format_tokens(tokens: &[Token]) -> Vec<String> {
    let mut text = String::new();
    let mut line = String::new();
    let mut depth = 0usize;
    let mut parens = 0usize;

    fn flush(text: &mut String, line: &mut String, depth: usize) {
        if line.is_empty() {
            return;
        }
        for _ in 0..depth {
            text.push_str("    ");
        }
        text.push_str(line);
        text.push('\n');
        line.clear();
    }

    for (i, tok) in tokens.iter().enumerate() {
        let t = tok.text.as_str();
        if t == "}" {
            flush(&mut text, &mut line, depth);
            depth = depth.saturating_sub(1);
            line.push('}');
            let keep = tokens
                .get(i + 1)
                .is_some_and(|n| matches!(n.text.as_str(), "else" | "catch" | "finally" | ";" | "," | ")"));
            if !keep {
                flush(&mut text, &mut line, depth);
            }
            continue;
        }
        if !line.is_empty() {
            let prev = &tokens[i - 1];
            if !glue(prev, tok) {
                line.push(' ');
            }
        }
        line.push_str(t);
        match t {
            "(" => parens += 1,
            ")" => parens = parens.saturating_sub(1),
            _ => {}
        }
        if t == "{" {
            flush(&mut text, &mut line, depth);
            depth += 1;
            parens = 0;
        } else if (t == ";" && parens == 0) || is_unterminated(tok) {
            flush(&mut text, &mut line, depth);
        }
    }
    flush(&mut text, &mut line, depth);
    text.lines().map(str::to_owned).collect()
}

#[derive(Debug, Clone, Copy)]
enum Scope {
    Class { enum_body: bool, constants_done: bool },
    Method(usize),
    Block,
}

struct Pending {
    decl: usize,
    name: usize,
    close: Option<usize>,
}

/// Token index of the `(` matching the `)` at `close`.
fn open_paren(tokens: &[Token], close: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut j = close;
    loop {
        match tokens[j].text.as_str() {
            ")" => depth += 1,
            "(" => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
            _ => {}
        }
        if j == 0 {
            return None;
        }
        j -= 1;
    }
}

/// First token index of the declaration ending just before `end`.
fn statement_start(tokens: &[Token], end: usize) -> usize {
    let mut parens = 0usize;
    let mut j = end;
    while j > 0 {
        let t = tokens[j - 1].text.as_str();
        match t {
            ")" => parens += 1,
            "(" => parens = parens.saturating_sub(1),
            ";" | "{" | "}" if parens == 0 => break,
            _ => {}
        }
        j -= 1;
    }
    j
}

fn declares_type(tokens: &[Token], from: usize, to: usize) -> Option<bool> {
    for j in from..to {
        let t = &tokens[j];
        let after_dot = j > 0 && tokens[j - 1].is(".");
        if after_dot {
            continue;
        }
        match t.text.as_str() {
            "class" | "interface" if t.kind == TokenKind::Keyword => return Some(false),
            "enum" if t.kind == TokenKind::Keyword => return Some(true),
            "record" if t.is_ident() && tokens.get(j + 1).is_some_and(Token::is_ident) => return Some(false),
            _ => {}
        }
    }
    None
}

fn is_anonymous_class(tokens: &[Token], brace: usize) -> bool {
    if brace == 0 || !tokens[brace - 1].is(")") {
        return false;
    }
    let Some(open) = open_paren(tokens, brace - 1) else {
        return false;
    };
    let mut j = open;
    if j > 0 && tokens[j - 1].is(">") {
        let mut depth = 0usize;
        while j > 0 {
            j -= 1;
            match tokens[j].text.as_str() {
                ">" => depth += 1,
                ">>" => depth += 2,
                "<" => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    while j > 0 && tokens[j - 1].is_ident() {
        j -= 1;
        if j > 0 && tokens[j - 1].is(".") {
            j -= 1;
        } else {
            break;
        }
    }
    j > 0 && tokens[j - 1].is("new")
}

/// Returns the name token index when the `{` at `brace` opens a method or
/// constructor body.
fn method_signature(tokens: &[Token], brace: usize) -> Option<usize> {
    let mut j = brace.checked_sub(1)?;
    if !tokens[j].is(")") {
        // throws clause
        let throws_list = |t: &Token| {
            t.is_ident()
                || matches!(
                    t.text.as_str(),
                    "." | "," | "<" | ">" | ">>" | ">>>" | "?" | "extends" | "super"
                )
        };
        while throws_list(&tokens[j]) {
            j = j.checked_sub(1)?;
        }
        if !tokens[j].is("throws") {
            return None;
        }
        j = j.checked_sub(1)?;
        if !tokens[j].is(")") {
            return None;
        }
    }
    let open = open_paren(tokens, j)?;
    let name = open.checked_sub(1)?;
    if !tokens[name].is_ident() {
        return None;
    }
    let Some(before) = name.checked_sub(1) else {
        return Some(name);
    };
    let prev = &tokens[before];
    let ok = match prev.kind {
        TokenKind::Ident => true,
        TokenKind::Keyword => {
            lexer::TYPE_KEYWORDS.contains(&prev.text.as_str()) || lexer::MODIFIERS.contains(&prev.text.as_str())
        }
        _ => matches!(prev.text.as_str(), ">" | ">>" | ">>>" | "]" | "}" | ";" | "{" | ")"),
    };
    ok.then_some(name)
}

/// Locates method and constructor declarations, including those of nested,
/// local and anonymous classes, and returns them ordered by declaration
/// position. Records whose canonical body has fewer than `min_lines` lines
/// are dropped.
pub fn extract_methods(file: &SourceFile, min_lines: usize) -> Result<Vec<MethodRecord>> {
    let tokens = lexer::lex(&join(&file.lines));
    let spans = method_spans(&tokens).map_err(|reason| Error::UnparsableFile {
        path: file.path.clone(),
        reason,
    })?;
    let mut out = Vec::with_capacity(spans.len());
    for span in spans {
        let body = format_tokens(&tokens[span.decl..=span.close]);
        if body.len() < min_lines.max(1) {
            continue;
        }
        out.push(MethodRecord {
            project_id: file.project_id.clone(),
            path: file.path.clone(),
            method_name: tokens[span.name].text.clone(),
            start_line: tokens[span.decl].line,
            end_line: tokens[span.close].line,
            body,
        });
    }
    Ok(out)
}

struct Span {
    decl: usize,
    name: usize,
    close: usize,
}

fn method_spans(tokens: &[Token]) -> std::result::Result<Vec<Span>, String> {
    let mut stack: Vec<Scope> = Vec::new();
    let mut pending: Vec<Pending> = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        match tok.text.as_str() {
            "{" => {
                let start = statement_start(tokens, i);
                let enclosing = stack.last().copied();
                let in_type_body = matches!(enclosing, None | Some(Scope::Class { .. }));
                let scope = if let Some(enum_body) = declares_type(tokens, start, i) {
                    Scope::Class {
                        enum_body,
                        constants_done: false,
                    }
                } else if is_anonymous_class(tokens, i)
                    || matches!(
                        enclosing,
                        Some(Scope::Class {
                            enum_body: true,
                            constants_done: false
                        })
                    )
                {
                    Scope::Class {
                        enum_body: false,
                        constants_done: false,
                    }
                } else if let Some(name) = in_type_body.then(|| method_signature(tokens, i)).flatten() {
                    pending.push(Pending {
                        decl: start,
                        name,
                        close: None,
                    });
                    Scope::Method(pending.len() - 1)
                } else {
                    Scope::Block
                };
                stack.push(scope);
            }
            "}" => {
                // Stray closing braces (common in trimmed snippets) are ignored.
                if let Some(Scope::Method(p)) = stack.pop() {
                    pending[p].close = Some(i);
                }
            }
            ";" => {
                if let Some(Scope::Class {
                    enum_body: true,
                    constants_done,
                }) = stack.last_mut()
                {
                    *constants_done = true;
                }
            }
            _ => {}
        }
    }
    let mut spans = Vec::with_capacity(pending.len());
    for p in pending {
        match p.close {
            Some(close) => spans.push(Span {
                decl: p.decl,
                name: p.name,
                close,
            }),
            None => {
                return Err(format!(
                    "body of `{}` (line {}) is never closed",
                    tokens[p.name].text, tokens[p.name].line
                ))
            }
        }
    }
    spans.sort_by_key(|s| s.decl);
    Ok(spans)
}

/// Turns a Q&A code block into one searchable unit in canonical layout.
///
/// Comments and `package`/`import` declarations are removed. A block that
/// declares no method and no type is a bare statement sequence and gets
/// wrapped in a `void snippet() { ... }` shell.
pub fn snippet_unit<S: AsRef<str>>(lines: &[S]) -> Vec<String> {
    let tokens = lexer::lex(&join(lines));
    let mut kept: Vec<Token> = Vec::with_capacity(tokens.len());
    let mut skipping = false;
    let mut depth = 0usize;
    for tok in tokens {
        if skipping {
            if tok.is(";") {
                skipping = false;
            }
            continue;
        }
        if depth == 0 && tok.kind == TokenKind::Keyword && matches!(tok.text.as_str(), "import" | "package") {
            skipping = true;
            continue;
        }
        match tok.text.as_str() {
            "{" => depth += 1,
            "}" => depth = depth.saturating_sub(1),
            _ => {}
        }
        kept.push(tok);
    }
    let has_unit =
        declares_type(&kept, 0, kept.len()).is_some() || method_spans(&kept).map(|s| !s.is_empty()).unwrap_or(true);
    if has_unit || kept.is_empty() {
        return format_tokens(&kept);
    }
    let line = kept.first().map_or(1, |t| t.line);
    let shell = |kind, text: &str| Token {
        kind,
        text: text.to_owned(),
        line,
    };
    let mut wrapped = vec![
        shell(TokenKind::Keyword, "void"),
        shell(TokenKind::Ident, SNIPPET_METHOD),
        shell(TokenKind::Punct, "("),
        shell(TokenKind::Punct, ")"),
        shell(TokenKind::Punct, "{"),
    ];
    wrapped.extend(kept);
    wrapped.push(shell(TokenKind::Punct, "}"));
    format_tokens(&wrapped)
}

/// Reads every file under `root` whose extension is in `extensions`,
/// sorted by relative path. Unreadable files are reported as errors.
pub fn read_source_tree(root: &Path, project_id: &str, extensions: &[String]) -> Result<Vec<SourceFile>> {
    let mut paths: Vec<(String, PathBuf)> = Vec::new();
    for entry in WalkDir::new(root).follow_links(false) {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let ext = entry.path().extension().and_then(|e| e.to_str()).unwrap_or_default();
        if !extensions.iter().any(|allowed| allowed == ext) {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        paths.push((rel, entry.path().to_path_buf()));
    }
    paths.sort();
    paths
        .into_iter()
        .map(|(rel, abs)| {
            let bytes = std::fs::read(&abs).map_err(|e| Error::io(&abs, e))?;
            Ok(SourceFile::new(project_id, rel, &String::from_utf8_lossy(&bytes)))
        })
        .collect()
}

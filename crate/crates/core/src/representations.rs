//! Token-stream representations of a method body.
//!
//! Each representation erases one more class of difference, so that one
//! more clone type becomes indistinguishable:
//!
//! * `r0`: raw lexical tokens.
//! * `r1`: the same tokens over the canonical layout; layout and comments
//!   were already erased upstream, so `r1` is the exact-copy view.
//! * `r2`: identifiers become `ID` and literals become `LIT`.
//! * `r3`: `r2` with primitive type keywords and identifiers in type
//!   position replaced by `TY`.
//!
//! Type position is decided heuristically from the surrounding tokens: an
//! identifier directly followed by another identifier (`Foo x`), by `[]`
//! (`Foo[] x`), preceded by `new`, or the head and arguments of a generic
//! type whose closing `>` is followed by an identifier (`List<Foo> x`).
//! Gapped n-grams are not modelled.

use std::collections::BTreeMap;
use std::fmt;

use crate::lexer::{self, Token, TokenKind};

/// Separates tokens inside a joined n-gram. Never occurs inside a token.
pub const GRAM_SEPARATOR: char = '\u{1F}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Representation {
    R0,
    R1,
    R2,
    R3,
}

impl Representation {
    pub const ALL: [Representation; 4] = [
        Representation::R0,
        Representation::R1,
        Representation::R2,
        Representation::R3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.index())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub representation: Representation,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NgramSet {
    pub n: usize,
    pub grams: BTreeMap<String, u32>,
}

impl NgramSet {
    pub fn total(&self) -> usize {
        self.grams.values().map(|&c| c as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }
}

/// Makes a token safe for joining: whitespace inside literals is written as
/// an escape so tokens never contain whitespace or the gram separator.
fn clean(text: &str) -> String {
    if !text.chars().any(|c| c.is_whitespace() || c == GRAM_SEPARATOR) {
        return text.to_owned();
    }
    let mut out = String::with_capacity(text.len() + 4);
    for c in text.chars() {
        match c {
            ' ' => out.push_str("\\s"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if c.is_whitespace() || c == GRAM_SEPARATOR => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn lex_body<S: AsRef<str>>(body: &[S]) -> Vec<Token> {
    let mut text = String::new();
    for line in body {
        text.push_str(line.as_ref());
        text.push('\n');
    }
    lexer::lex(&text)
}

pub fn tokenize_r0<S: AsRef<str>>(body: &[S]) -> TokenStream {
    stream(Representation::R0, &lex_body(body))
}

pub fn tokenize_r1<S: AsRef<str>>(body: &[S]) -> TokenStream {
    stream(Representation::R1, &lex_body(body))
}

pub fn tokenize_r2<S: AsRef<str>>(body: &[S]) -> TokenStream {
    stream(Representation::R2, &lex_body(body))
}

pub fn tokenize_r3<S: AsRef<str>>(body: &[S]) -> TokenStream {
    stream(Representation::R3, &lex_body(body))
}

/// All four streams from a single lexing pass.
pub fn tokenize_all<S: AsRef<str>>(body: &[S]) -> [TokenStream; 4] {
    let toks = lex_body(body);
    Representation::ALL.map(|rep| stream(rep, &toks))
}

fn stream(rep: Representation, toks: &[Token]) -> TokenStream {
    let tokens = match rep {
        Representation::R0 | Representation::R1 => toks.iter().map(|t| clean(&t.text)).collect(),
        Representation::R2 => toks.iter().map(abstract_r2).collect(),
        Representation::R3 => {
            let types = type_positions(toks);
            toks.iter()
                .zip(types)
                .map(|(t, is_type)| {
                    if is_type || lexer::TYPE_KEYWORDS.contains(&t.text.as_str()) {
                        "TY".to_owned()
                    } else {
                        abstract_r2(t)
                    }
                })
                .collect()
        }
    };
    TokenStream {
        representation: rep,
        tokens,
    }
}

fn abstract_r2(t: &Token) -> String {
    match t.kind {
        TokenKind::Ident => "ID".to_owned(),
        TokenKind::Literal => "LIT".to_owned(),
        _ => clean(&t.text),
    }
}

fn type_positions(toks: &[Token]) -> Vec<bool> {
    let mut types = vec![false; toks.len()];
    let next_is = |i: usize, s: &str| toks.get(i + 1).is_some_and(|t| t.is(s));
    for (i, t) in toks.iter().enumerate() {
        if !t.is_ident() {
            continue;
        }
        let followed_by_ident = toks.get(i + 1).is_some_and(Token::is_ident);
        let array_type = next_is(i, "[") && toks.get(i + 2).is_some_and(|t| t.is("]"));
        let after_new = i > 0 && toks[i - 1].is("new");
        if followed_by_ident || array_type || after_new {
            types[i] = true;
        }
        if next_is(i, "<") {
            if let Some(close) = generic_close(toks, i + 1) {
                let declared = toks.get(close + 1).is_some_and(Token::is_ident)
                    || after_new
                    || (toks.get(close + 1).is_some_and(|t| t.is("["))
                        && toks.get(close + 2).is_some_and(|t| t.is("]")));
                if declared {
                    types[i] = true;
                    for j in i + 2..close {
                        if toks[j].is_ident() {
                            types[j] = true;
                        }
                    }
                }
            }
        }
    }
    types
}

/// Index of the token closing the generic argument list opened at `open`,
/// if the list contains only type-like tokens.
fn generic_close(toks: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (j, t) in toks.iter().enumerate().skip(open) {
        match t.text.as_str() {
            "<" => depth += 1,
            ">" => depth -= 1,
            ">>" => depth -= 2,
            ">>>" => depth -= 3,
            "," | "." | "?" | "[" | "]" | "extends" | "super" | "&" => {}
            _ if t.is_ident() || lexer::TYPE_KEYWORDS.contains(&t.text.as_str()) => {}
            _ => return None,
        }
        if depth <= 0 {
            return (depth == 0).then_some(j);
        }
    }
    None
}

/// All contiguous `n`-token windows with multiplicity.
pub fn ngrams(stream: &TokenStream, n: usize) -> NgramSet {
    assert!(n >= 1, "n-gram size must be positive");
    let mut grams = BTreeMap::new();
    let sep = GRAM_SEPARATOR.to_string();
    for window in stream.tokens.windows(n) {
        *grams.entry(window.join(&sep)).or_insert(0u32) += 1;
    }
    NgramSet { n, grams }
}

/// N-gram sets for all four representations, `sizes` indexed by representation.
pub fn ngram_sets<S: AsRef<str>>(body: &[S], sizes: [usize; 4]) -> [NgramSet; 4] {
    let streams = tokenize_all(body);
    Representation::ALL.map(|rep| ngrams(&streams[rep.index()], sizes[rep.index()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &TokenStream) -> Vec<&str> {
        s.tokens.iter().map(String::as_str).collect()
    }

    #[test]
    fn r0_to_r3_of_a_declaration() {
        let body = ["int total = count + 1;"];
        assert_eq!(toks(&tokenize_r0(&body)), ["int", "total", "=", "count", "+", "1", ";"]);
        assert_eq!(toks(&tokenize_r1(&body)), ["int", "total", "=", "count", "+", "1", ";"]);
        assert_eq!(toks(&tokenize_r2(&body)), ["int", "ID", "=", "ID", "+", "LIT", ";"]);
        assert_eq!(toks(&tokenize_r3(&body)), ["TY", "ID", "=", "ID", "+", "LIT", ";"]);
    }

    #[test]
    fn empty_bodies() {
        let empty: [&str; 0] = [];
        assert!(tokenize_r0(&empty).tokens.is_empty());
        assert!(tokenize_r2(&empty).tokens.is_empty());
    }

    #[test]
    fn member_access() {
        assert_eq!(toks(&tokenize_r0(&["a.b()"])), ["a", ".", "b", "(", ")"]);
    }

    #[test]
    fn r3_type_positions() {
        let body = ["List<String> names = new ArrayList<>(); Foo[] fs; Bar b = (Bar) x.get(i);"];
        assert_eq!(
            toks(&tokenize_r3(&body)),
            [
                "TY", "<", "TY", ">", "ID", "=", "new", "TY", "<", ">", "(", ")", ";", "TY", "[", "]", "ID", ";", "TY",
                "ID", "=", "(", "ID", ")", "ID", ".", "ID", "(", "ID", ")", ";"
            ]
        );
    }

    #[test]
    fn literal_whitespace_is_escaped() {
        let s = tokenize_r0(&["s = \"a b\";"]);
        assert_eq!(s.tokens[2], "\"a\\sb\"");
        assert!(s.tokens.iter().all(|t| !t.contains(char::is_whitespace)));
    }

    fn set(tokens: &[&str], n: usize) -> Vec<(String, u32)> {
        let stream = TokenStream {
            representation: Representation::R0,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        };
        ngrams(&stream, n)
            .grams
            .into_iter()
            .map(|(g, c)| (g.replace(GRAM_SEPARATOR, "|"), c))
            .collect()
    }

    #[test]
    fn sliding_windows() {
        assert_eq!(set(&["a", "b", "c"], 2), [("a|b".into(), 1), ("b|c".into(), 1)]);
        assert_eq!(
            set(&["a", "b", "c"], 1),
            [("a".into(), 1), ("b".into(), 1), ("c".into(), 1)]
        );
        assert_eq!(set(&["a", "a", "a"], 2), [("a|a".into(), 2)]);
        assert!(set(&["a"], 2).is_empty());
    }

    const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "omega"];

    fn java_body() -> impl Strategy<Value = Vec<(usize, usize)>> {
        prop::collection::vec((0usize..6, 0usize..WORDS.len()), 0..30)
    }

    fn render(stmts: &[(usize, usize)], rename: impl Fn(&str) -> String) -> Vec<String> {
        stmts
            .iter()
            .map(|&(shape, w)| {
                let v = rename(WORDS[w]);
                let u = rename(WORDS[(w + 1) % WORDS.len()]);
                match shape {
                    0 => format!("int {v} = {u} + 1;"),
                    1 => format!("{v}.{u}(\"x y\");"),
                    2 => format!("List<{u}> {v} = new ArrayList<>();"),
                    3 => format!("if ({v} > {u}) {{ return {v}; }}"),
                    4 => format!("{u}[] {v} = new {u}[3];"),
                    _ => format!("for (String {v} : {u}) {{ {v}.run(); }}"),
                }
            })
            .collect()
    }

    proptest! {
        #[test]
        fn window_count_matches(tokens in prop::collection::vec("[a-c]{1,2}", 0..40), n in 1usize..6) {
            let stream = TokenStream { representation: Representation::R0, tokens: tokens.clone() };
            let set = ngrams(&stream, n);
            prop_assert_eq!(set.total(), (tokens.len() + 1).saturating_sub(n));
        }

        #[test]
        fn consistent_renaming_keeps_r2_and_r3(stmts in java_body()) {
            let original = render(&stmts, |w| w.to_owned());
            let renamed = render(&stmts, |w| format!("{}Renamed{}", w.to_uppercase(), w.len()));
            prop_assert_eq!(tokenize_r2(&original), tokenize_r2(&renamed));
            prop_assert_eq!(tokenize_r3(&original), tokenize_r3(&renamed));
        }

        #[test]
        fn representations_have_equal_lengths(stmts in java_body()) {
            let body = render(&stmts, |w| w.to_owned());
            let all = tokenize_all(&body);
            let len = all[0].tokens.len();
            prop_assert!(all.iter().all(|s| s.tokens.len() == len));
            for (s, rep) in all.iter().zip(Representation::ALL) {
                prop_assert_eq!(s.representation, rep);
            }
        }
    }
}

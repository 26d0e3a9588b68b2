//! Tolerant lexer for Java-syntax source.
//!
//! The lexer never fails. Unterminated string and character literals end at
//! the end of their line, an unterminated block comment swallows the rest of
//! the input, and any character that does not start a known token becomes a
//! single-character [`TokenKind::Other`] token.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Keyword,
    /// Numeric, string, text-block and character literals plus `true`, `false`, `null`.
    Literal,
    /// Operators and separators.
    Punct,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Ident
    }
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

const LITERAL_WORDS: &[&str] = &["true", "false", "null"];

/// Primitive type keywords, plus `void`.
pub const TYPE_KEYWORDS: &[&str] = &[
    "boolean", "byte", "char", "double", "float", "int", "long", "short", "void",
];

pub const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "transient",
    "volatile",
    "default",
];

// Longest first.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "&=", "|=", "^=", "%=", "<<", ">>",
];

const SINGLE_PUNCT: &str = "=+-*/%&|^!~?:<>(){}[];,.@";

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

pub fn lex(src: &str) -> Vec<Token> {
    Lexer::new(src).run()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    out: Vec<Token>,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            out: Vec::new(),
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek(i) == Some(c))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: usize) {
        let text: String = self.chars[start..self.pos].iter().collect();
        self.out.push(Token { kind, text, line });
    }

    fn run(mut self) -> Vec<Token> {
        while let Some(c) = self.peek(0) {
            let start = self.pos;
            let line = self.line;
            if c.is_whitespace() {
                self.bump();
            } else if self.starts_with("//") {
                while let Some(c) = self.peek(0) {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if self.starts_with("/*") {
                self.pos += 2;
                while self.peek(0).is_some() && !self.starts_with("*/") {
                    self.bump();
                }
                if self.peek(0).is_some() {
                    self.pos += 2;
                }
            } else if self.starts_with("\"\"\"") {
                self.text_block();
                self.push(TokenKind::Literal, start, line);
            } else if c == '"' || c == '\'' {
                self.quoted(c);
                self.push(TokenKind::Literal, start, line);
            } else if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) {
                self.number();
                self.push(TokenKind::Literal, start, line);
            } else if is_ident_start(c) {
                while self.peek(0).is_some_and(is_ident_continue) {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                let kind = if LITERAL_WORDS.contains(&word.as_str()) {
                    TokenKind::Literal
                } else if is_keyword(&word) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Ident
                };
                self.out.push(Token { kind, text: word, line });
            } else if let Some(op) = OPERATORS.iter().find(|op| self.starts_with(op)) {
                self.pos += op.chars().count();
                self.push(TokenKind::Punct, start, line);
            } else if SINGLE_PUNCT.contains(c) {
                self.pos += 1;
                self.push(TokenKind::Punct, start, line);
            } else {
                self.pos += 1;
                self.push(TokenKind::Other, start, line);
            }
        }
        self.out
    }

    fn quoted(&mut self, quote: char) {
        self.pos += 1;
        while let Some(c) = self.peek(0) {
            match c {
                '\n' => return,
                '\\' => {
                    self.pos += 1;
                    if self.peek(0).is_some_and(|n| n != '\n') {
                        self.pos += 1;
                    }
                }
                _ if c == quote => {
                    self.pos += 1;
                    return;
                }
                _ => self.pos += 1,
            }
        }
    }

    fn text_block(&mut self) {
        self.pos += 3;
        while self.peek(0).is_some() {
            if self.starts_with("\"\"\"") {
                self.pos += 3;
                return;
            }
            if self.peek(0) == Some('\\') {
                self.bump();
            }
            self.bump();
        }
    }

    fn number(&mut self) {
        let hex = self.starts_with("0x") || self.starts_with("0X");
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                self.pos += 1;
                let exponent = if hex {
                    matches!(c, 'p' | 'P')
                } else {
                    matches!(c, 'e' | 'E')
                };
                if exponent && matches!(self.peek(0), Some('+' | '-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }
}

//! Boilerplate method filter driven by a table of named regular expressions.

use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::extractor::MethodRecord;
use crate::representations;

const DEFAULT_TABLE: &str = include_str!("../data/boilerplate.toml");

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    #[serde(default)]
    fragments: BTreeMap<String, String>,
    #[serde(default)]
    pattern: Vec<PatternEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternEntry {
    name: String,
    regex: String,
}

#[derive(Debug, Clone)]
pub struct BoilerplateFilter {
    patterns: Vec<(String, Regex)>,
}

impl Default for BoilerplateFilter {
    fn default() -> Self {
        Self::from_toml(DEFAULT_TABLE).expect("built-in boilerplate table compiles")
    }
}

impl BoilerplateFilter {
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: TableFile = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_owned()))?;
        let mut patterns = Vec::with_capacity(table.pattern.len());
        for entry in table.pattern {
            let mut source = entry.regex;
            for (name, fragment) in &table.fragments {
                source = source.replace(&format!("%{name}%"), fragment);
            }
            let re = Regex::new(&source).map_err(|e| Error::Pattern {
                name: entry.name.clone(),
                source: e,
            })?;
            patterns.push((entry.name, re));
        }
        Ok(Self { patterns })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn pattern_names(&self) -> impl Iterator<Item = &str> {
        self.patterns.iter().map(|(n, _)| n.as_str())
    }

    /// Name of the first pattern matching the body, if any.
    pub fn matches<S: AsRef<str>>(&self, body: &[S]) -> Option<&str> {
        let flat = representations::tokenize_r0(body).tokens.join(" ");
        self.patterns
            .iter()
            .find(|(_, re)| re.is_match(&flat))
            .map(|(name, _)| name.as_str())
    }

    pub fn is_boilerplate(&self, method: &MethodRecord) -> Option<&str> {
        self.matches(&method.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(src: &str) -> Option<String> {
        BoilerplateFilter::default().matches(&[src]).map(str::to_owned)
    }

    #[test]
    fn listed_kinds_are_boilerplate() {
        assert_eq!(check("public int getX(){return x;}").as_deref(), Some("getter"));
        assert_eq!(
            check("public String toString(){return name;}").as_deref(),
            Some("toString")
        );
        assert_eq!(
            check("public void setName(String name) { this.name = name; }").as_deref(),
            Some("setter")
        );
        assert_eq!(
            check("@Override public boolean equals(Object o) { if (o == this) return true; return false; }").as_deref(),
            Some("equals")
        );
        assert_eq!(
            check("public int compareTo(Item other) { return Integer.compare(a, other.a); }").as_deref(),
            Some("compareTo")
        );
        assert_eq!(
            check("@Override\npublic int hashCode() { return Objects.hash(a, b); }").as_deref(),
            Some("hashCode")
        );
        assert_eq!(
            check("public Item(int a) { super(a); }").as_deref(),
            Some("delegating-constructor")
        );
    }

    #[test]
    fn substantive_methods_pass() {
        assert_eq!(check("int add(int a,int b){return a+b;}"), None);
        assert_eq!(
            check("public int getTotal() { int t = 0; for (int v : vs) t += v; return t; }"),
            None
        );
        assert_eq!(check("public Item(int a) { super(a); this.b = load(a); }"), None);
    }

    #[test]
    fn custom_tables_load_and_report_bad_regex() {
        let f = BoilerplateFilter::from_toml("[[pattern]]\nname = \"main\"\nregex = 'void main'\n").unwrap();
        assert_eq!(f.pattern_names().collect::<Vec<_>>(), ["main"]);
        assert!(f.matches(&["public static void main(String[] a) { run(); }"]).is_some());
        let err = BoilerplateFilter::from_toml("[[pattern]]\nname = \"x\"\nregex = '('\n").unwrap_err();
        assert!(matches!(err, Error::Pattern { .. }));
    }
}

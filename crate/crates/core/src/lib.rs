//! Revision-aware clone search between Q&A code snippets and Java projects.
//!
//! Snippet revisions are indexed under four token representations. Project
//! methods are searched against that index, and a method whose best match
//! is an outdated revision is paired with the latest revision of the same
//! snippet block.

pub mod boilerplate;
pub mod config;
pub mod error;
pub mod extractor;
pub mod index;
pub mod lexer;
pub mod manifest;
pub mod metrics;
pub mod representations;
pub mod revisions;
pub mod search;
pub mod tiering;
pub mod tuner;

pub use boilerplate::BoilerplateFilter;
pub use config::SearchConfig;
pub use error::{Error, Result};
pub use extractor::{MethodRecord, SourceFile};
pub use index::{DocId, HistoryLabel, IndexBuilder, SnippetIndex};
pub use representations::Representation;
pub use revisions::{Recommendation, ScanOptions, ScanOutcome, SnippetRevision};
pub use search::SearchHit;

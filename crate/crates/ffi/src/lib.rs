//! C ABI over the `revclone` library.
//!
//! Every fallible function returns a [`RevcloneStatus`]; on failure the
//! message is available from [`revclone_last_error_message`] on the same
//! thread. Strings passed in must be NUL-terminated UTF-8. Strings returned
//! through out-pointers are owned by the caller and released with
//! [`revclone_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use revclone::{metrics, revisions, Error, ScanOptions, SearchConfig, SnippetIndex};

/// Opaque snippet index.
pub struct RevcloneIndex(SnippetIndex);

/// Opaque search configuration.
pub struct RevcloneConfig(SearchConfig);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevcloneStatus {
    Ok = 0,
    InvalidArgument = 1,
    DataError = 2,
    IoError = 3,
    CorruptIndex = 4,
    VersionMismatch = 5,
    NgramMismatch = 6,
    Panic = 7,
}

impl From<&Error> for RevcloneStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => RevcloneStatus::IoError,
            Error::CorruptIndex(_) => RevcloneStatus::CorruptIndex,
            Error::FormatVersionMismatch { .. } => RevcloneStatus::VersionMismatch,
            Error::NgramMismatch { .. } => RevcloneStatus::NgramMismatch,
            _ => RevcloneStatus::DataError,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(RevcloneStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(RevcloneStatus::InvalidArgument, msg.to_owned())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RevcloneStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RevcloneStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RevcloneStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{name} is not UTF-8")))
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    str_arg(p, name).map(PathBuf::from)
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(&format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        Err(invalid(&format!("{name} is null")))
    } else {
        Ok(p)
    }
}

fn cfg_or_default(cfg: *const RevcloneConfig) -> SearchConfig {
    unsafe { cfg.as_ref() }.map_or_else(SearchConfig::default, |c| c.0)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn revclone_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn revclone_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn revclone_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// A configuration holding the built-in defaults.
#[no_mangle]
pub extern "C" fn revclone_config_default() -> *mut RevcloneConfig {
    Box::into_raw(Box::new(RevcloneConfig(SearchConfig::default())))
}

/// Loads a TOML configuration file.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn revclone_config_load(path: *const c_char, out: *mut *mut RevcloneConfig) -> RevcloneStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = SearchConfig::load(&path_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(RevcloneConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn revclone_config_free(cfg: *mut RevcloneConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Builds an index from a revision dump. A NULL `cfg` means the defaults.
///
/// # Safety
/// Pointers must be valid or NULL where allowed.
#[no_mangle]
pub unsafe extern "C" fn revclone_index_build_from_dump(
    dump_path: *const c_char,
    cfg: *const RevcloneConfig,
    out: *mut *mut RevcloneIndex,
) -> RevcloneStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let revs = revisions::read_dump(&path_arg(dump_path, "dump_path")?)?;
        let (index, _) = revisions::ingest_revisions(&revs, &cfg_or_default(cfg))?;
        *out = Box::into_raw(Box::new(RevcloneIndex(index)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn revclone_index_load(path: *const c_char, out: *mut *mut RevcloneIndex) -> RevcloneStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let index = SnippetIndex::load(&path_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(RevcloneIndex(index)));
        Ok(())
    })
}

/// # Safety
/// `index` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn revclone_index_save(index: *const RevcloneIndex, path: *const c_char) -> RevcloneStatus {
    guard(|| {
        let index = ref_arg(index, "index")?;
        index.0.save(&path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Number of indexed revisions; 0 for NULL.
///
/// # Safety
/// `index` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn revclone_index_doc_count(index: *const RevcloneIndex) -> usize {
    index.as_ref().map_or(0, |i| i.0.doc_count())
}

/// # Safety
/// `index` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn revclone_index_free(index: *mut RevcloneIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

unsafe fn scan(
    index: *const RevcloneIndex,
    cfg: *const RevcloneConfig,
    project_dir: *const c_char,
) -> Result<Vec<revclone::Recommendation>, Failure> {
    let index = ref_arg(index, "index")?;
    let root = path_arg(project_dir, "project_dir")?;
    let outcome = revisions::scan_project(&root, &index.0, &cfg_or_default(cfg), &ScanOptions::default())?;
    Ok(outcome.recommendations)
}

/// Scans a project and writes the recommendation CSV. The number of data
/// rows is stored in `out_count` when it is not NULL.
///
/// # Safety
/// Pointers must be valid or NULL where allowed.
#[no_mangle]
pub unsafe extern "C" fn revclone_scan_project(
    index: *const RevcloneIndex,
    cfg: *const RevcloneConfig,
    project_dir: *const c_char,
    out_csv: *const c_char,
    out_count: *mut usize,
) -> RevcloneStatus {
    guard(|| {
        let csv = path_arg(out_csv, "out_csv")?;
        let recs = scan(index, cfg, project_dir)?;
        revisions::write_recommendations_csv(&recs, &csv)?;
        if !out_count.is_null() {
            *out_count = recs.len();
        }
        Ok(())
    })
}

/// Scans a project and returns the recommendations as a JSON array,
/// including each latest body. Free the result with `revclone_string_free`.
///
/// # Safety
/// Pointers must be valid or NULL where allowed.
#[no_mangle]
pub unsafe extern "C" fn revclone_scan_project_json(
    index: *const RevcloneIndex,
    cfg: *const RevcloneConfig,
    project_dir: *const c_char,
    out_json: *mut *mut c_char,
) -> RevcloneStatus {
    guard(|| {
        let out = out_arg(out_json, "out_json")?;
        let recs = scan(index, cfg, project_dir)?;
        let items: Vec<_> = recs
            .iter()
            .map(|r| {
                serde_json::json!({
                    "file": r.path,
                    "method": r.method_name,
                    "start_line": r.start_line,
                    "end_line": r.end_line,
                    "post_id": r.latest_post_id,
                    "matched_doc_id": r.matched_doc_id.to_string(),
                    "edit_distance": r.edit_distance,
                    "latest_body": r.latest_body.join("\n"),
                })
            })
            .collect();
        let text = serde_json::Value::Array(items).to_string();
        *out = CString::new(text)
            .map_err(|_| invalid("result contains NUL"))?
            .into_raw();
        Ok(())
    })
}

/// Character edit distance between two strings, stored in `out`.
///
/// # Safety
/// `a` and `b` must be valid C strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn revclone_levenshtein(a: *const c_char, b: *const c_char, out: *mut usize) -> RevcloneStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = metrics::levenshtein(str_arg(a, "a")?, str_arg(b, "b")?);
        Ok(())
    })
}

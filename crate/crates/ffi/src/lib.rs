//! C interface to the lpmforge miner.
//!
//! Logs and rankings are opaque handles owned by the caller and released with
//! their `_free` function. Every fallible call returns an [`LpmStatus`]; the
//! message of the last failure on the calling thread is available through
//! [`lpm_last_error`]. Strings returned through out-pointers are released with
//! [`lpm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lpmforge::chaotic::activity_entropy;
use lpmforge::log::{parse_csv, parse_xes, CsvMapping, EventLog};
use lpmforge::miner::{mine, MinerConfig};
use lpmforge::quality::Evaluation;
use lpmforge::tree::ProcessTree;
use lpmforge::Error;

/// Result of a call. Values 2 to 11 mirror the engine's error codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpmStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    InvalidArgument = 3,
    UndefinedDistribution = 4,
    BudgetExceeded = 5,
    NotEnabled = 6,
    UnsupportedNet = 7,
    EmptyPatternList = 8,
    MissingTimestamp = 9,
    Io = 10,
    Json = 11,
    Utf8 = 12,
    OutOfRange = 13,
    Panic = 99,
}

impl From<&Error> for LpmStatus {
    fn from(e: &Error) -> Self {
        match e.code() {
            2 => LpmStatus::Parse,
            3 => LpmStatus::InvalidArgument,
            4 => LpmStatus::UndefinedDistribution,
            5 => LpmStatus::BudgetExceeded,
            6 => LpmStatus::NotEnabled,
            7 => LpmStatus::UnsupportedNet,
            8 => LpmStatus::EmptyPatternList,
            9 => LpmStatus::MissingTimestamp,
            10 => LpmStatus::Io,
            _ => LpmStatus::Json,
        }
    }
}

/// An event log.
pub struct LpmLog(EventLog);

/// A ranked list of local process models.
pub struct LpmRanking(Vec<Evaluation>);

/// Quality measures of one ranked pattern. `language_fit` is NaN when the
/// pattern language exceeded the enumeration budget.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LpmScores {
    pub support: usize,
    pub confidence: f64,
    pub language_fit: f64,
    pub determinism: f64,
    pub coverage: f64,
    pub aggregate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(LpmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(LpmStatus::from(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LpmStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LpmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LpmStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(LpmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(LpmStatus::Utf8, format!("{what} is not UTF-8")))
}

unsafe fn opt_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(LpmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(LpmStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn read(path: &str) -> Result<Vec<u8>, Fail> {
    std::fs::read(path).map_err(|e| Error::Io(e).into())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lpm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lpm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads a CSV log. `time_column` may be null for logs without timestamps.
///
/// # Safety
/// String arguments must be null or valid NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_log_from_csv(
    path: *const c_char,
    case_column: *const c_char,
    activity_column: *const c_char,
    time_column: *const c_char,
    out: *mut *mut LpmLog,
) -> LpmStatus {
    guard(|| {
        let mapping = CsvMapping {
            case: text(case_column, "case_column")?.to_string(),
            activity: text(activity_column, "activity_column")?.to_string(),
            timestamp: opt_text(time_column, "time_column")?.map(str::to_string),
        };
        let log = parse_csv(&read(text(path, "path")?)?, &mapping)?;
        put(out, Box::into_raw(Box::new(LpmLog(log))))
    })
}

/// Reads an XES log.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_log_from_xes(path: *const c_char, out: *mut *mut LpmLog) -> LpmStatus {
    guard(|| {
        let log = parse_xes(&read(text(path, "path")?)?)?;
        put(out, Box::into_raw(Box::new(LpmLog(log))))
    })
}

/// Builds a log from JSON of the form `{"traces":[{"id":..,"events":[{"activity":..}]}]}`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_log_from_json(json: *const c_char, out: *mut *mut LpmLog) -> LpmStatus {
    guard(|| {
        let log: EventLog = serde_json::from_str(text(json, "json")?).map_err(Error::from)?;
        put(out, Box::into_raw(Box::new(LpmLog(log))))
    })
}

/// # Safety
/// `log` must be null or a handle from one of the `lpm_log_from_*` functions, freed once.
#[no_mangle]
pub unsafe extern "C" fn lpm_log_free(log: *mut LpmLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Number of traces; 0 for a null handle.
///
/// # Safety
/// `log` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lpm_log_trace_count(log: *const LpmLog) -> usize {
    log.as_ref().map_or(0, |l| l.0.len())
}

/// Number of events; 0 for a null handle.
///
/// # Safety
/// `log` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lpm_log_event_count(log: *const LpmLog) -> usize {
    log.as_ref().map_or(0, |l| l.0.event_count())
}

/// Mines a log. `config_json` holds miner settings such as
/// `{"min_support":5,"max_iterations":2,"top_k":20}`; null uses the defaults.
///
/// # Safety
/// `log` must be a live handle, `config_json` null or a valid string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_mine(log: *const LpmLog, config_json: *const c_char, out: *mut *mut LpmRanking) -> LpmStatus {
    guard(|| {
        let log = handle(log, "log")?;
        let config: MinerConfig = match opt_text(config_json, "config_json")? {
            Some(j) => serde_json::from_str(j).map_err(Error::from)?,
            None => MinerConfig::default(),
        };
        let outcome = mine(&log.0, &config)?;
        put(out, Box::into_raw(Box::new(LpmRanking(outcome.ranking))))
    })
}

/// # Safety
/// `ranking` must be null or a handle from [`lpm_mine`], freed once.
#[no_mangle]
pub unsafe extern "C" fn lpm_ranking_free(ranking: *mut LpmRanking) {
    if !ranking.is_null() {
        drop(Box::from_raw(ranking));
    }
}

/// Number of ranked patterns; 0 for a null handle.
///
/// # Safety
/// `ranking` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lpm_ranking_len(ranking: *const LpmRanking) -> usize {
    ranking.as_ref().map_or(0, |r| r.0.len())
}

unsafe fn entry<'a>(ranking: *const LpmRanking, index: usize) -> Result<&'a Evaluation, Fail> {
    let r = handle(ranking, "ranking")?;
    r.0.get(index).ok_or_else(|| Fail(LpmStatus::OutOfRange, format!("index {index} out of range 0..{}", r.0.len())))
}

/// Scores of pattern `index`.
///
/// # Safety
/// `ranking` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_ranking_scores(ranking: *const LpmRanking, index: usize, out: *mut LpmScores) -> LpmStatus {
    guard(|| {
        let q = &entry(ranking, index)?.quality;
        put(
            out,
            LpmScores {
                support: q.support,
                confidence: q.confidence,
                language_fit: q.language_fit.unwrap_or(f64::NAN),
                determinism: q.determinism,
                coverage: q.coverage,
                aggregate: q.aggregate,
            },
        )
    })
}

/// Text form of pattern `index`, e.g. `seq(a,xor(b,c))`. Free with [`lpm_string_free`].
///
/// # Safety
/// `ranking` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_ranking_tree(ranking: *const LpmRanking, index: usize, out: *mut *mut c_char) -> LpmStatus {
    guard(|| {
        let e = entry(ranking, index)?;
        put(out, owned_string(e.tree.to_string()))
    })
}

/// Full ranking with instances as JSON. Free with [`lpm_string_free`].
///
/// # Safety
/// `ranking` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_ranking_to_json(ranking: *const LpmRanking, out: *mut *mut c_char) -> LpmStatus {
    guard(|| {
        let r = handle(ranking, "ranking")?;
        put(out, owned_string(serde_json::to_string(&r.0).map_err(Error::from)?))
    })
}

/// Number of instances of a pattern given in text form.
///
/// # Safety
/// `log` must be a live handle, `tree` a valid string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_pattern_support(log: *const LpmLog, tree: *const c_char, out: *mut usize) -> LpmStatus {
    guard(|| {
        let log = handle(log, "log")?;
        let t = ProcessTree::parse(text(tree, "tree")?)?;
        let instances = lpmforge::alignment::extract_instances(&t, &log.0)?;
        put(out, instances.len())
    })
}

/// Entropy of the successor and predecessor distributions of `activity`.
///
/// # Safety
/// `log` must be a live handle, `activity` a valid string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lpm_activity_entropy(log: *const LpmLog, activity: *const c_char, out: *mut f64) -> LpmStatus {
    guard(|| {
        let log = handle(log, "log")?;
        put(out, activity_entropy(&log.0, text(activity, "activity")?, None)?)
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned through an out-pointer of this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn lpm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}


//! C ABI for the crowdest estimation library.
//!
//! The interface follows the usual opaque-handle pattern: a parsed or
//! simulated answer stream lives behind a [`CrowdestStream`] pointer,
//! every fallible call returns a [`CrowdestStatus`] code and writes its
//! result through out-pointers, and the most recent failure message on the
//! calling thread is available from [`crowdest_last_error_message`].
//! Strings returned through `char**` out-parameters are owned by the caller
//! and must be released with [`crowdest_string_free`]; streams with
//! [`crowdest_stream_free`].
//!
//! Divergent estimates (no finite solution) are reported as C `INFINITY`.
//!
//! The matching header is generated into `include/crowdest.h` at build
//! time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use crowdest::estimators::{
    completeness, estimate, estimate_chao92, estimate_series, EstimatorKind,
};
use crowdest::heuristics::{apply as apply_heuristic, HeuristicConfig, HeuristicKind};
use crowdest::listwalk::{affected_series, scan, ListWalkConfig};
use crowdest::paygo::{shen_predict, SplineModel};
use crowdest::simulator::{
    simulate, AnswersPerWorker, Interleaving, ItemDistribution, ListWalkerSpec, WorkerModel,
};
use crowdest::stream::{AnswerStream, FrequencyStatistics};
use crowdest::Error;

/// Opaque handle to an answer stream.
pub struct CrowdestStream {
    inner: AnswerStream,
}

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrowdestStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ComputeError = 4,
    InvalidArgument = 5,
    Panic = 6,
}

/// Cardinality estimator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrowdestEstimator {
    UniformMle = 0,
    Chao84 = 1,
    Chao92 = 2,
}

impl From<CrowdestEstimator> for EstimatorKind {
    fn from(value: CrowdestEstimator) -> Self {
        match value {
            CrowdestEstimator::UniformMle => EstimatorKind::UniformMle,
            CrowdestEstimator::Chao84 => EstimatorKind::Chao84,
            CrowdestEstimator::Chao92 => EstimatorKind::Chao92,
        }
    }
}

/// Streaker-correction transform selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrowdestHeuristic {
    Cluster = 0,
    F1 = 1,
}

/// Item distribution selector for [`crowdest_simulate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrowdestDistribution {
    /// `shape` is ignored.
    Uniform = 0,
    /// `shape` is the Zipf exponent.
    Zipf = 1,
    /// `shape` is the self-similar `h` parameter.
    SelfSimilar = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: impl Into<Vec<u8>>) {
    let message = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn fail(error: &Error) -> CrowdestStatus {
    set_last_error(error.to_string());
    match error {
        Error::Parse { .. } | Error::BlankAnswer => CrowdestStatus::ParseError,
        Error::InvalidConfig(_) => CrowdestStatus::InvalidArgument,
        _ => CrowdestStatus::ComputeError,
    }
}

fn guarded(f: impl FnOnce() -> CrowdestStatus) -> CrowdestStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            CrowdestStatus::Panic
        }
    }
}

/// Returns the stream behind the pointer or reports a null/invalid handle.
unsafe fn stream_ref<'a>(stream: *const CrowdestStream) -> Result<&'a AnswerStream, CrowdestStatus> {
    if stream.is_null() {
        set_last_error("stream handle is null");
        return Err(CrowdestStatus::NullPointer);
    }
    Ok(&(*stream).inner)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), CrowdestStatus> {
    if out.is_null() {
        set_last_error("out pointer is null");
        return Err(CrowdestStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, value: String) -> Result<(), CrowdestStatus> {
    let c = CString::new(value).map_err(|_| {
        set_last_error("output contains an interior NUL byte");
        CrowdestStatus::ComputeError
    })?;
    write_out(out, c.into_raw())
}

fn fstat_of(stream: &AnswerStream) -> Result<FrequencyStatistics, CrowdestStatus> {
    FrequencyStatistics::from_stream(stream).map_err(|e| fail(&e))
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crowdest_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a CSV document (`hit_index,worker_id,answer`) into a stream
/// handle.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn crowdest_stream_parse_csv(
    data: *const u8,
    len: usize,
    out: *mut *mut CrowdestStream,
) -> CrowdestStatus {
    guarded(|| {
        if data.is_null() {
            set_last_error("data pointer is null");
            return CrowdestStatus::NullPointer;
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let text = match std::str::from_utf8(bytes) {
            Ok(text) => text,
            Err(e) => {
                set_last_error(format!("invalid utf-8: {e}"));
                return CrowdestStatus::InvalidUtf8;
            }
        };
        match AnswerStream::from_csv(text) {
            Ok(inner) => {
                let handle = Box::into_raw(Box::new(CrowdestStream { inner }));
                match write_out(out, handle) {
                    Ok(()) => CrowdestStatus::Ok,
                    Err(status) => {
                        drop(Box::from_raw(handle));
                        status
                    }
                }
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a stream handle. Null is a no-op.
///
/// # Safety
/// `stream` must be a pointer previously returned by this library and not
/// freed since.
#[no_mangle]
pub unsafe extern "C" fn crowdest_stream_free(stream: *mut CrowdestStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Number of records; 0 for a null handle.
///
/// # Safety
/// `stream` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn crowdest_stream_len(stream: *const CrowdestStream) -> usize {
    if stream.is_null() {
        return 0;
    }
    (*stream).inner.len()
}

/// Number of distinct answers; 0 for a null handle.
///
/// # Safety
/// `stream` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn crowdest_stream_unique(stream: *const CrowdestStream) -> usize {
    if stream.is_null() {
        return 0;
    }
    match FrequencyStatistics::from_stream(&(*stream).inner) {
        Ok(fs) => fs.c(),
        Err(_) => 0,
    }
}

/// Serializes the stream back to CSV.
///
/// # Safety
/// `stream` must be a live handle; `out` a valid pointer. Free the string
/// with [`crowdest_string_free`].
#[no_mangle]
pub unsafe extern "C" fn crowdest_stream_to_csv(
    stream: *const CrowdestStream,
    out: *mut *mut c_char,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match write_string(out, stream.to_csv()) {
            Ok(()) => CrowdestStatus::Ok,
            Err(status) => status,
        }
    })
}

/// Runs a cardinality estimator; divergent estimates come back as
/// `INFINITY`.
///
/// # Safety
/// `stream` must be a live handle; `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crowdest_estimate(
    stream: *const CrowdestStream,
    estimator: CrowdestEstimator,
    out_value: *mut f64,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let fstat = match fstat_of(stream) {
            Ok(f) => f,
            Err(status) => return status,
        };
        match estimate(estimator.into(), &fstat) {
            Ok(est) => match write_out(out_value, est.value) {
                Ok(()) => CrowdestStatus::Ok,
                Err(status) => status,
            },
            Err(e) => fail(&e),
        }
    })
}

/// Chao92 with diagnostics: coverage and the squared CV estimate.
///
/// # Safety
/// `stream` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crowdest_chao92_diagnostics(
    stream: *const CrowdestStream,
    out_value: *mut f64,
    out_coverage: *mut f64,
    out_cv_squared: *mut f64,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let fstat = match fstat_of(stream) {
            Ok(f) => f,
            Err(status) => return status,
        };
        match estimate_chao92(&fstat) {
            Ok(est) => {
                for (ptr, value) in [
                    (out_value, est.value),
                    (out_coverage, est.coverage.unwrap_or(f64::NAN)),
                    (out_cv_squared, est.cv_squared.unwrap_or(f64::NAN)),
                ] {
                    if let Err(status) = write_out(ptr, value) {
                        return status;
                    }
                }
                CrowdestStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Completeness (unique / estimate) under the chosen estimator; 0 when the
/// estimate diverges.
///
/// # Safety
/// `stream` must be a live handle; `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crowdest_completeness(
    stream: *const CrowdestStream,
    estimator: CrowdestEstimator,
    out_value: *mut f64,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let fstat = match fstat_of(stream) {
            Ok(f) => f,
            Err(status) => return status,
        };
        match estimate(estimator.into(), &fstat) {
            Ok(est) => match write_out(out_value, completeness(&fstat, &est)) {
                Ok(()) => CrowdestStatus::Ok,
                Err(status) => status,
            },
            Err(e) => fail(&e),
        }
    })
}

/// Fraction of singletons among the distinct answers.
///
/// # Safety
/// `stream` must be a live handle; `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crowdest_f1_ratio(
    stream: *const CrowdestStream,
    out_value: *mut f64,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let fstat = match fstat_of(stream) {
            Ok(f) => f,
            Err(status) => return status,
        };
        match write_out(out_value, fstat.f1_ratio()) {
            Ok(()) => CrowdestStatus::Ok,
            Err(status) => status,
        }
    })
}

/// Applies a streaker-correction transform, producing a new stream handle.
///
/// # Safety
/// `stream` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crowdest_truncate(
    stream: *const CrowdestStream,
    heuristic: CrowdestHeuristic,
    t: usize,
    r: f64,
    seed: u64,
    out: *mut *mut CrowdestStream,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let cfg = HeuristicConfig {
            kind: match heuristic {
                CrowdestHeuristic::Cluster => HeuristicKind::Cluster,
                CrowdestHeuristic::F1 => HeuristicKind::F1,
            },
            t,
            r,
            seed,
            repetitions: 1,
        };
        match apply_heuristic(stream, &cfg) {
            Ok(inner) => {
                let handle = Box::into_raw(Box::new(CrowdestStream { inner }));
                match write_out(out, handle) {
                    Ok(()) => CrowdestStatus::Ok,
                    Err(status) => {
                        drop(Box::from_raw(handle));
                        status
                    }
                }
            }
            Err(e) => fail(&e),
        }
    })
}

/// Expected new unique answers from `m` more HITs via the coverage method.
///
/// # Safety
/// `stream` must be a live handle; `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crowdest_shen_predict(
    stream: *const CrowdestStream,
    m: usize,
    out_value: *mut f64,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let fstat = match fstat_of(stream) {
            Ok(f) => f,
            Err(status) => return status,
        };
        match shen_predict(&fstat, m) {
            Ok(p) => match write_out(out_value, p.expected_new_uniques) {
                Ok(()) => CrowdestStatus::Ok,
                Err(status) => status,
            },
            Err(e) => fail(&e),
        }
    })
}

/// Expected new unique answers from `m` more HITs via spline extrapolation
/// of the permutation-averaged accumulation curve.
///
/// # Safety
/// `stream` must be a live handle; `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crowdest_spline_predict(
    stream: *const CrowdestStream,
    m: usize,
    permutations: usize,
    seed: u64,
    out_value: *mut f64,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match SplineModel::fit_mean_sac(stream, permutations, seed) {
            Ok(model) => match write_out(out_value, model.predict(m).expected_new_uniques) {
                Ok(()) => CrowdestStatus::Ok,
                Err(status) => status,
            },
            Err(e) => fail(&e),
        }
    })
}

/// Scans for list walking and returns the report as a JSON document. With
/// `step > 0` the report also carries the per-prefix affected series.
///
/// # Safety
/// `stream` must be a live handle; `out_json` a valid pointer. Free the
/// string with [`crowdest_string_free`].
#[no_mangle]
pub unsafe extern "C" fn crowdest_detect_lists_json(
    stream: *const CrowdestStream,
    s_min: usize,
    beta: f64,
    h: f64,
    threshold: f64,
    step: usize,
    out_json: *mut *mut c_char,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let cfg = ListWalkConfig { s_min, beta, h, threshold };
        let mut report = match scan(stream, &cfg) {
            Ok(r) => r,
            Err(e) => return fail(&e),
        };
        if step > 0 {
            report.affected_series = match affected_series(stream, &cfg, step) {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
        }
        let json = match serde_json::to_string(&report) {
            Ok(j) => j,
            Err(e) => {
                set_last_error(e.to_string());
                return CrowdestStatus::ComputeError;
            }
        };
        match write_string(out_json, json) {
            Ok(()) => CrowdestStatus::Ok,
            Err(status) => status,
        }
    })
}

/// Per-prefix estimate series as a CSV document (columns: hits, unique,
/// f1_ratio, uniform_mle, chao84, chao92, coverage, cv_squared).
///
/// # Safety
/// `stream` must be a live handle; `out_csv` a valid pointer. Free the
/// string with [`crowdest_string_free`].
#[no_mangle]
pub unsafe extern "C" fn crowdest_estimate_series_csv(
    stream: *const CrowdestStream,
    step: usize,
    out_csv: *mut *mut c_char,
) -> CrowdestStatus {
    guarded(|| {
        let stream = match stream_ref(stream) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match estimate_series(stream, step, &EstimatorKind::ALL) {
            Ok(series) => match write_string(out_csv, series.to_csv()) {
                Ok(()) => CrowdestStatus::Ok,
                Err(status) => status,
            },
            Err(e) => fail(&e),
        }
    })
}

/// Generates a ground-truth simulation: a stream handle plus the truth
/// sidecar as JSON (`N`, item weights, list-walk record indices).
///
/// Workers draw without replacement with power-law contribution skew
/// (exponent 1.5) and random interleaving; `list_walkers` extra workers
/// each copy `list_items` consecutive items of the label-ordered list from
/// offset 0.
///
/// # Safety
/// `out_stream` and `out_truth_json` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn crowdest_simulate(
    dist: CrowdestDistribution,
    n_items: usize,
    shape: f64,
    workers: usize,
    hits: usize,
    list_walkers: usize,
    list_items: usize,
    seed: u64,
    out_stream: *mut *mut CrowdestStream,
    out_truth_json: *mut *mut c_char,
) -> CrowdestStatus {
    guarded(|| {
        let dist = match dist {
            CrowdestDistribution::Uniform => ItemDistribution::uniform(n_items),
            CrowdestDistribution::Zipf => ItemDistribution::zipf(n_items, shape),
            CrowdestDistribution::SelfSimilar => ItemDistribution::self_similar(n_items, shape),
        };
        let dist = match dist {
            Ok(d) => d,
            Err(e) => return fail(&e),
        };
        let model = WorkerModel {
            num_workers: workers,
            answers_per_worker: AnswersPerWorker::PowerLaw { exponent: 1.5, total_hits: hits },
            without_replacement: true,
            interleaving: Interleaving::Random,
        };
        let lists = (list_walkers > 0).then(|| ListWalkerSpec::verbatim(list_walkers, list_items));
        let output = match simulate(&dist, &model, lists.as_ref(), seed) {
            Ok(o) => o,
            Err(e) => return fail(&e),
        };
        let truth = match output.truth_json() {
            Ok(t) => t,
            Err(e) => return fail(&e),
        };
        let handle = Box::into_raw(Box::new(CrowdestStream { inner: output.stream }));
        if let Err(status) = write_out(out_stream, handle) {
            drop(Box::from_raw(handle));
            return status;
        }
        match write_string(out_truth_json, truth) {
            Ok(()) => CrowdestStatus::Ok,
            Err(status) => {
                drop(Box::from_raw(handle));
                status
            }
        }
    })
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be a pointer previously returned through a `char**`
/// out-parameter and not freed since.
#[no_mangle]
pub unsafe extern "C" fn crowdest_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    unsafe fn take_string(ptr: *mut c_char) -> String {
        let s = CStr::from_ptr(ptr).to_string_lossy().into_owned();
        crowdest_string_free(ptr);
        s
    }

    fn parse(csv: &str) -> *mut CrowdestStream {
        let mut handle = ptr::null_mut();
        let status =
            unsafe { crowdest_stream_parse_csv(csv.as_ptr(), csv.len(), &mut handle) };
        assert_eq!(status, CrowdestStatus::Ok);
        handle
    }

    const SAMPLE: &str = "hit_index,worker_id,answer\n0,w1,a\n1,w2,b\n2,w1,a\n3,w2,c\n4,w1,b\n";

    #[test]
    fn parse_inspect_free() {
        let handle = parse(SAMPLE);
        unsafe {
            assert_eq!(crowdest_stream_len(handle), 5);
            assert_eq!(crowdest_stream_unique(handle), 3);
            let mut ratio = 0.0;
            assert_eq!(crowdest_f1_ratio(handle, &mut ratio), CrowdestStatus::Ok);
            assert!((ratio - 1.0 / 3.0).abs() < 1e-12);
            crowdest_stream_free(handle);
        }
    }

    #[test]
    fn estimates_and_completeness() {
        let handle = parse(SAMPLE);
        unsafe {
            let mut value = 0.0;
            assert_eq!(
                crowdest_estimate(handle, CrowdestEstimator::Chao92, &mut value),
                CrowdestStatus::Ok
            );
            assert!(value >= 3.0);

            let (mut v, mut cov, mut cv) = (0.0, 0.0, 0.0);
            assert_eq!(
                crowdest_chao92_diagnostics(handle, &mut v, &mut cov, &mut cv),
                CrowdestStatus::Ok
            );
            assert_eq!(v, value);
            assert!((cov - (1.0 - 1.0 / 5.0)).abs() < 1e-12);

            let mut comp = 0.0;
            assert_eq!(
                crowdest_completeness(handle, CrowdestEstimator::Chao92, &mut comp),
                CrowdestStatus::Ok
            );
            assert!((comp - 3.0 / value).abs() < 1e-12);
            crowdest_stream_free(handle);
        }
    }

    #[test]
    fn divergent_estimate_is_infinite() {
        let handle = parse("hit_index,worker_id,answer\n0,w1,a\n1,w1,b\n2,w1,c\n");
        unsafe {
            let mut value = 0.0;
            assert_eq!(
                crowdest_estimate(handle, CrowdestEstimator::UniformMle, &mut value),
                CrowdestStatus::Ok
            );
            assert!(value.is_infinite());
            crowdest_stream_free(handle);
        }
    }

    #[test]
    fn error_paths_set_messages() {
        unsafe {
            let mut handle = ptr::null_mut();
            assert_eq!(
                crowdest_stream_parse_csv(ptr::null(), 0, &mut handle),
                CrowdestStatus::NullPointer
            );

            let bad = b"\xff\xfe";
            assert_eq!(
                crowdest_stream_parse_csv(bad.as_ptr(), bad.len(), &mut handle),
                CrowdestStatus::InvalidUtf8
            );

            let junk = "hit_index,worker_id,answer\n0,w1\n";
            let status = crowdest_stream_parse_csv(junk.as_ptr(), junk.len(), &mut handle);
            assert_eq!(status, CrowdestStatus::ParseError);
            let message = CStr::from_ptr(crowdest_last_error_message())
                .to_string_lossy()
                .into_owned();
            assert!(message.contains("row 1"), "message was {message}");

            let mut value = 0.0;
            assert_eq!(
                crowdest_estimate(ptr::null(), CrowdestEstimator::Chao84, &mut value),
                CrowdestStatus::NullPointer
            );
        }
    }

    #[test]
    fn truncate_returns_subsequence_handle() {
        let mut csv = String::from("hit_index,worker_id,answer\n");
        for i in 0..40 {
            csv.push_str(&format!("{i},streaker,answer {i}\n"));
        }
        for i in 40..48 {
            csv.push_str(&format!("{i},w{},common\n", i % 4));
        }
        let handle = parse(&csv);
        unsafe {
            let mut truncated = ptr::null_mut();
            assert_eq!(
                crowdest_truncate(handle, CrowdestHeuristic::F1, 2, 0.4, 7, &mut truncated),
                CrowdestStatus::Ok
            );
            assert!(crowdest_stream_len(truncated) < crowdest_stream_len(handle));
            crowdest_stream_free(truncated);
            crowdest_stream_free(handle);
        }
    }

    #[test]
    fn paygo_over_ffi() {
        let mut csv = String::from("hit_index,worker_id,answer\n");
        for i in 0..120 {
            csv.push_str(&format!("{i},w{},item {}\n", i % 6, i % 37));
        }
        let handle = parse(&csv);
        unsafe {
            let mut shen = 0.0;
            assert_eq!(crowdest_shen_predict(handle, 50, &mut shen), CrowdestStatus::Ok);
            assert!(shen >= 0.0);
            let mut spline = 0.0;
            assert_eq!(
                crowdest_spline_predict(handle, 50, 20, 9, &mut spline),
                CrowdestStatus::Ok
            );
            assert!(spline >= 0.0);
            crowdest_stream_free(handle);
        }
    }

    #[test]
    fn simulate_detect_and_round_trip() {
        unsafe {
            let mut handle = ptr::null_mut();
            let mut truth = ptr::null_mut();
            let status = crowdest_simulate(
                CrowdestDistribution::Zipf,
                200,
                1.0,
                20,
                300,
                3,
                10,
                77,
                &mut handle,
                &mut truth,
            );
            assert_eq!(status, CrowdestStatus::Ok);
            assert_eq!(crowdest_stream_len(handle), 330);
            let truth_json = take_string(truth);
            let truth_value: serde_json::Value = serde_json::from_str(&truth_json).unwrap();
            assert_eq!(truth_value["N"], 200);
            assert_eq!(truth_value["list_walk_indices"].as_array().unwrap().len(), 30);

            let mut report = ptr::null_mut();
            assert_eq!(
                crowdest_detect_lists_json(handle, 5, 0.5, 0.2, 0.01, 100, &mut report),
                CrowdestStatus::Ok
            );
            let report_json = take_string(report);
            let report_value: serde_json::Value = serde_json::from_str(&report_json).unwrap();
            assert!(report_value["affected_hits"].as_u64().unwrap() >= 30);
            assert!(!report_value["affected_series"].as_array().unwrap().is_empty());

            let mut csv = ptr::null_mut();
            assert_eq!(crowdest_stream_to_csv(handle, &mut csv), CrowdestStatus::Ok);
            let text = take_string(csv);
            let reparsed = parse(&text);
            assert_eq!(crowdest_stream_len(reparsed), 330);
            assert_eq!(crowdest_stream_unique(reparsed), crowdest_stream_unique(handle));

            let mut series = ptr::null_mut();
            assert_eq!(
                crowdest_estimate_series_csv(handle, 100, &mut series),
                CrowdestStatus::Ok
            );
            let series_text = take_string(series);
            assert!(series_text.starts_with("hits,unique,f1_ratio,uniform_mle,chao84,chao92"));

            crowdest_stream_free(reparsed);
            crowdest_stream_free(handle);
        }
    }

    #[test]
    fn simulate_is_deterministic_over_ffi() {
        unsafe {
            let mut csvs = Vec::new();
            for _ in 0..2 {
                let mut handle = ptr::null_mut();
                let mut truth = ptr::null_mut();
                assert_eq!(
                    crowdest_simulate(
                        CrowdestDistribution::Uniform,
                        100,
                        0.0,
                        10,
                        150,
                        0,
                        0,
                        123,
                        &mut handle,
                        &mut truth,
                    ),
                    CrowdestStatus::Ok
                );
                crowdest_string_free(truth);
                let mut csv = ptr::null_mut();
                assert_eq!(crowdest_stream_to_csv(handle, &mut csv), CrowdestStatus::Ok);
                csvs.push(take_string(csv));
                crowdest_stream_free(handle);
            }
            assert_eq!(csvs[0], csvs[1]);
        }
    }
}

//! C ABI over `minkloss`.
//!
//! Every fallible function returns a [`MinkStatus`]. On failure the message is
//! kept per thread and can be read with [`mink_last_error`]. Objects handed
//! out as pointers (`MinkMatrix`, `MinkHmm`) must be released with their
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use minkloss::dataio::{load_hmm, load_posteriors, save_posteriors};
use minkloss::decoder::HmmModel;
use minkloss::mink::{closed_form_transform, expected_loss, newton_transform};
use minkloss::pipeline::{decode_posteriors, DecodeOptions};
use minkloss::posterior::{transform_matrix, PosteriorMatrix};
use minkloss::scoring::align_and_score;
use minkloss::{Error, ErrorKind, LossOrder, Posterior, SolverConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad argument or malformed input data.
    Validation = 3,
    Io = 4,
    /// The iterative solver did not converge.
    Solver = 5,
    /// The output buffer is too small; the required length was written back.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Word error counts for one reference/hypothesis pair.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MinkWer {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub ref_length: usize,
    pub wer: f64,
}

/// Posterior matrix, frames by classes, row-major.
pub struct MinkMatrix {
    inner: PosteriorMatrix,
}

/// HMM used for decoding.
pub struct MinkHmm {
    inner: HmmModel,
    labels: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MinkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Validation => MinkStatus::Validation,
            ErrorKind::Io => MinkStatus::Io,
            ErrorKind::Solver => MinkStatus::Solver,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MinkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MinkStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MinkStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MinkStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MinkStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn c_strings<'a>(p: *const *const c_char, len: usize, what: &str) -> Result<Vec<&'a str>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts(p, len)
        .iter()
        .map(|&s| c_str(s, what))
        .collect()
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn hmm_handle(inner: HmmModel) -> MinkHmm {
    let labels = inner
        .state_labels()
        .iter()
        .map(|l| CString::new(l.replace('\0', " ")).expect("interior nul removed"))
        .collect();
    MinkHmm { inner, labels }
}

/// Message of the last failed call on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mink_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Closed-form transform of one posterior `mu` for an even `order` >= 2.
///
/// # Safety
/// `result` must be NULL or point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn mink_transform(mu: f64, order: u32, result: *mut f64) -> MinkStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = closed_form_transform(Posterior::new(mu)?, LossOrder::new(order)?).value();
        Ok(())
    })
}

/// Same transform found by safeguarded Newton iteration.
///
/// # Safety
/// `result` must be NULL or point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn mink_transform_newton(
    mu: f64,
    order: u32,
    tolerance: f64,
    max_iterations: usize,
    result: *mut f64,
) -> MinkStatus {
    guard(|| {
        let result = out(result, "result")?;
        let config = SolverConfig::new(tolerance, max_iterations)?;
        *result = newton_transform(Posterior::new(mu)?, LossOrder::new(order)?, &config)?.value();
        Ok(())
    })
}

/// Expected loss of reporting `y` when the posterior is `mu`.
///
/// # Safety
/// `result` must be NULL or point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn mink_expected_loss(y: f64, mu: f64, order: u32, result: *mut f64) -> MinkStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = expected_loss(y, Posterior::new(mu)?, LossOrder::new(order)?)?;
        Ok(())
    })
}

/// Copy `frames * classes` row-major values into a new matrix.
///
/// # Safety
/// `values` must point to `frames * classes` readable doubles and `matrix`
/// to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn mink_matrix_new(
    frames: usize,
    classes: usize,
    values: *const f64,
    matrix: *mut *mut MinkMatrix,
) -> MinkStatus {
    guard(|| {
        let matrix = out(matrix, "matrix")?;
        let len = frames
            .checked_mul(classes)
            .ok_or_else(|| Failure(MinkStatus::Validation, "matrix size overflows".into()))?;
        let data = if len == 0 {
            Vec::new()
        } else if values.is_null() {
            return Err(null("values"));
        } else {
            std::slice::from_raw_parts(values, len).to_vec()
        };
        *matrix = boxed(MinkMatrix {
            inner: PosteriorMatrix::new(frames, classes, data)?,
        });
        Ok(())
    })
}

/// Read a posterior matrix file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `matrix` writable.
#[no_mangle]
pub unsafe extern "C" fn mink_matrix_load(path: *const c_char, matrix: *mut *mut MinkMatrix) -> MinkStatus {
    guard(|| {
        let matrix = out(matrix, "matrix")?;
        let inner = load_posteriors(Path::new(c_str(path, "path")?))?;
        *matrix = boxed(MinkMatrix { inner });
        Ok(())
    })
}

/// Write a posterior matrix file.
///
/// # Safety
/// `matrix` must come from this library and `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mink_matrix_save(matrix: *const MinkMatrix, path: *const c_char) -> MinkStatus {
    guard(|| {
        let matrix = deref(matrix, "matrix")?;
        save_posteriors(&matrix.inner, Path::new(c_str(path, "path")?))?;
        Ok(())
    })
}

/// Apply the order-`order` transform to every entry, optionally renormalizing
/// each frame. The result is a new matrix.
///
/// # Safety
/// `matrix` must come from this library and `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mink_matrix_transform(
    matrix: *const MinkMatrix,
    order: u32,
    renormalize: bool,
    result: *mut *mut MinkMatrix,
) -> MinkStatus {
    guard(|| {
        let matrix = deref(matrix, "matrix")?;
        let result = out(result, "result")?;
        let inner = transform_matrix(&matrix.inner, LossOrder::new(order)?, renormalize)?;
        *result = boxed(MinkMatrix { inner });
        Ok(())
    })
}

/// Number of frames, or 0 for NULL.
///
/// # Safety
/// `matrix` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn mink_matrix_frames(matrix: *const MinkMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.inner.frames())
}

/// Number of classes, or 0 for NULL.
///
/// # Safety
/// `matrix` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn mink_matrix_classes(matrix: *const MinkMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.inner.classes())
}

/// Row-major values, valid until the matrix is freed. NULL for NULL.
///
/// # Safety
/// `matrix` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn mink_matrix_values(matrix: *const MinkMatrix) -> *const f64 {
    matrix.as_ref().map_or(ptr::null(), |m| m.inner.values().as_ptr())
}

/// # Safety
/// `matrix` must be NULL or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mink_matrix_free(matrix: *mut MinkMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Read an HMM from its JSON file.
///
/// # Safety
/// `path` must be NUL-terminated and `hmm` writable.
#[no_mangle]
pub unsafe extern "C" fn mink_hmm_load(path: *const c_char, hmm: *mut *mut MinkHmm) -> MinkStatus {
    guard(|| {
        let hmm = out(hmm, "hmm")?;
        let inner = load_hmm(Path::new(c_str(path, "path")?))?;
        *hmm = boxed(hmm_handle(inner));
        Ok(())
    })
}

/// Number of states, or 0 for NULL.
///
/// # Safety
/// `hmm` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn mink_hmm_num_states(hmm: *const MinkHmm) -> usize {
    hmm.as_ref().map_or(0, |h| h.inner.num_states())
}

/// Label of `state`, valid until the HMM is freed. NULL if out of range.
///
/// # Safety
/// `hmm` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn mink_hmm_state_label(hmm: *const MinkHmm, state: usize) -> *const c_char {
    hmm.as_ref()
        .and_then(|h| h.labels.get(state))
        .map_or(ptr::null(), |l| l.as_ptr())
}

/// # Safety
/// `hmm` must be NULL or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mink_hmm_free(hmm: *mut MinkHmm) {
    if !hmm.is_null() {
        drop(Box::from_raw(hmm));
    }
}

/// Transform, then Viterbi-decode. The best state path is written to
/// `path[0..frames]` and its log score to `log_score` (which may be NULL).
///
/// `path_len` always receives the number of frames. When `capacity` is
/// smaller, nothing else is written and `BufferTooSmall` is returned.
///
/// # Safety
/// `matrix` and `hmm` must come from this library, `path` must have room for
/// `capacity` entries and `path_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mink_decode(
    matrix: *const MinkMatrix,
    hmm: *const MinkHmm,
    order: u32,
    renormalize: bool,
    path: *mut usize,
    capacity: usize,
    path_len: *mut usize,
    log_score: *mut f64,
) -> MinkStatus {
    guard(|| {
        let matrix = deref(matrix, "matrix")?;
        let hmm = deref(hmm, "hmm")?;
        let path_len = out(path_len, "path_len")?;
        let frames = matrix.inner.frames();
        *path_len = frames;
        if capacity < frames {
            return Err(Failure(
                MinkStatus::BufferTooSmall,
                format!("path buffer holds {capacity} states, need {frames}"),
            ));
        }
        if path.is_null() && frames > 0 {
            return Err(null("path"));
        }
        let mut options = DecodeOptions::new(LossOrder::new(order)?);
        options.renormalize = renormalize;
        let result = decode_posteriors(&matrix.inner, &hmm.inner, &options)?;
        if frames > 0 {
            std::slice::from_raw_parts_mut(path, frames).copy_from_slice(&result.state_path);
        }
        if let Some(score) = log_score.as_mut() {
            *score = result.log_score;
        }
        Ok(())
    })
}

/// Word error rate of `hypothesis` against a non-empty `reference`.
///
/// # Safety
/// Each array must hold the given number of NUL-terminated strings and
/// `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mink_wer(
    reference: *const *const c_char,
    reference_len: usize,
    hypothesis: *const *const c_char,
    hypothesis_len: usize,
    result: *mut MinkWer,
) -> MinkStatus {
    guard(|| {
        let result = out(result, "result")?;
        let r = c_strings(reference, reference_len, "reference")?;
        let h = c_strings(hypothesis, hypothesis_len, "hypothesis")?;
        let report = align_and_score(&r, &h)?;
        *result = MinkWer {
            substitutions: report.substitutions,
            deletions: report.deletions,
            insertions: report.insertions,
            ref_length: report.ref_length,
            wer: report.wer,
        };
        Ok(())
    })
}

//! C ABI for the distribution matcher.
//!
//! Matchers are opaque heap handles created by `acdm_*_new` and released with
//! [`acdm_matcher_free`]. Every fallible call returns an [`AcdmStatus`]; the
//! message of the most recent failure on the calling thread is available from
//! [`acdm_last_error`]. Bits are passed as one byte per bit (0 or 1), codewords
//! as 0-based symbol indices.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use acdm::analysis::{self, CompositionFamily, RateLossMethod};
use acdm::codec::{BitBlock, Codeword, KPolicy, Matcher, SamplingConfig};
use acdm::models::{Alphabet, BranchingModel, Composition, IidModel, Model, TargetDistribution};
use acdm::Error;

/// Opaque matcher handle.
pub struct AcdmMatcher {
    inner: Matcher,
}

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcdmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    DecodeOutsideImage = 4,
    InstanceTooLarge = 5,
    BufferTooSmall = 6,
    Internal = 7,
    Panic = 8,
}

/// Rate-loss estimate used by [`acdm_nmax_balanced`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcdmMethod {
    Theorem1 = 0,
    Ramabadran = 1,
    Linearized = 2,
}

/// Pass as `k` to pick the certified input length.
pub const ACDM_K_AUTO: i64 = -1;

/// Flag: accept an explicit `k` above the certified length.
pub const ACDM_FLAG_UNCHECKED: u32 = 1;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: AcdmStatus, message: impl Into<String>) -> AcdmStatus {
    set_last_error(message.into());
    status
}

fn from_error(e: Error) -> AcdmStatus {
    let status = match e {
        Error::InvalidInput(_) => AcdmStatus::InvalidInput,
        Error::Config(_) => AcdmStatus::Config,
        Error::DecodeOutsideImage(_) | Error::ZeroWidthChild { .. } => AcdmStatus::DecodeOutsideImage,
        Error::InstanceTooLarge(_) => AcdmStatus::InstanceTooLarge,
        Error::Internal(_) => AcdmStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`AcdmStatus::Panic`].
fn guarded(f: impl FnOnce() -> AcdmStatus) -> AcdmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(AcdmStatus::Panic, "panic inside the matcher library"),
    }
}

/// # Safety
/// `ptr` must point to `len` readable elements, or be null with `len == 0`.
unsafe fn input_slice<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(ptr, len))
    }
}

fn k_policy(k: i64, flags: u32) -> KPolicy {
    if k < 0 {
        KPolicy::Auto
    } else if flags & ACDM_FLAG_UNCHECKED != 0 {
        KPolicy::Unchecked(k as u64)
    } else {
        KPolicy::Checked(k as u64)
    }
}

fn store_matcher(m: Matcher, out: *mut *mut AcdmMatcher) -> AcdmStatus {
    let handle = Box::into_raw(Box::new(AcdmMatcher { inner: m }));
    // SAFETY: the caller checked `out` for null.
    unsafe { *out = handle };
    AcdmStatus::Ok
}

/// Creates a constant-composition matcher.
///
/// `k` is [`ACDM_K_AUTO`] or an explicit length; see [`ACDM_FLAG_UNCHECKED`].
///
/// # Safety
/// `counts` must point to `m` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acdm_ccdm_new(
    counts: *const u64,
    m: usize,
    w: u32,
    k: i64,
    flags: u32,
    out: *mut *mut AcdmMatcher,
) -> AcdmStatus {
    guarded(|| {
        if out.is_null() {
            return fail(AcdmStatus::NullPointer, "out is null");
        }
        let Some(counts) = input_slice(counts, m) else {
            return fail(AcdmStatus::NullPointer, "counts is null");
        };
        let built = Composition::from_counts(counts.to_vec())
            .and_then(|c| Matcher::new(Model::ccdm(c), w, k_policy(k, flags), SamplingConfig::default()));
        match built {
            Ok(matcher) => store_matcher(matcher, out),
            Err(e) => from_error(e),
        }
    })
}

/// Creates an i.i.d. matcher for the distribution `probs` quantized to `theta`.
///
/// With `k == ACDM_K_AUTO` the length is estimated from `samples` random
/// codewords drawn with `seed`.
///
/// # Safety
/// `probs` must point to `m` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acdm_iid_new(
    probs: *const f64,
    m: usize,
    n: usize,
    theta: u64,
    w: u32,
    k: i64,
    samples: u64,
    seed: u64,
    flags: u32,
    out: *mut *mut AcdmMatcher,
) -> AcdmStatus {
    guarded(|| {
        if out.is_null() {
            return fail(AcdmStatus::NullPointer, "out is null");
        }
        let Some(probs) = input_slice(probs, m) else {
            return fail(AcdmStatus::NullPointer, "probs is null");
        };
        let sampling = SamplingConfig { samples, seed };
        let built = TargetDistribution::new(Alphabet::numeric(m), probs.to_vec())
            .and_then(|t| IidModel::new(t, n, theta))
            .and_then(|model| Matcher::new(Model::Iid(model), w, k_policy(k, flags), sampling));
        match built {
            Ok(matcher) => store_matcher(matcher, out),
            Err(e) => from_error(e),
        }
    })
}

/// Releases a matcher. Null is ignored.
///
/// # Safety
/// `matcher` must come from an `acdm_*_new` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn acdm_matcher_free(matcher: *mut AcdmMatcher) {
    if !matcher.is_null() {
        drop(Box::from_raw(matcher));
    }
}

/// Input length in bits; 0 for null.
///
/// # Safety
/// `matcher` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acdm_matcher_k(matcher: *const AcdmMatcher) -> u64 {
    matcher.as_ref().map_or(0, |m| m.inner.k())
}

/// Output length in symbols; 0 for null.
///
/// # Safety
/// `matcher` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acdm_matcher_n(matcher: *const AcdmMatcher) -> u64 {
    matcher.as_ref().map_or(0, |m| m.inner.n() as u64)
}

/// Alphabet size; 0 for null.
///
/// # Safety
/// `matcher` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acdm_matcher_m(matcher: *const AcdmMatcher) -> u64 {
    matcher.as_ref().map_or(0, |m| m.inner.model().m() as u64)
}

/// Encodes `k` bits into `n` symbol indices.
///
/// # Safety
/// `bits` must hold `bits_len` bytes and `symbols_out` room for `symbols_cap` values.
#[no_mangle]
pub unsafe extern "C" fn acdm_encode(
    matcher: *const AcdmMatcher,
    bits: *const u8,
    bits_len: usize,
    symbols_out: *mut u32,
    symbols_cap: usize,
) -> AcdmStatus {
    guarded(|| {
        let Some(m) = matcher.as_ref() else {
            return fail(AcdmStatus::NullPointer, "matcher is null");
        };
        let Some(bits) = input_slice(bits, bits_len) else {
            return fail(AcdmStatus::NullPointer, "bits is null");
        };
        if symbols_out.is_null() && m.inner.n() > 0 {
            return fail(AcdmStatus::NullPointer, "symbols_out is null");
        }
        if symbols_cap < m.inner.n() {
            return fail(
                AcdmStatus::BufferTooSmall,
                format!("need room for {} symbols, got {symbols_cap}", m.inner.n()),
            );
        }
        let codeword = match BitBlock::new(bits.to_vec()).and_then(|b| m.inner.encode(&b)) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        let out = slice::from_raw_parts_mut(symbols_out, codeword.len());
        for (dst, &s) in out.iter_mut().zip(codeword.symbols()) {
            *dst = s as u32;
        }
        AcdmStatus::Ok
    })
}

/// Decodes `n` symbol indices back into `k` bits.
///
/// # Safety
/// `symbols` must hold `symbols_len` values and `bits_out` room for `bits_cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn acdm_decode(
    matcher: *const AcdmMatcher,
    symbols: *const u32,
    symbols_len: usize,
    bits_out: *mut u8,
    bits_cap: usize,
) -> AcdmStatus {
    guarded(|| {
        let Some(m) = matcher.as_ref() else {
            return fail(AcdmStatus::NullPointer, "matcher is null");
        };
        let Some(symbols) = input_slice(symbols, symbols_len) else {
            return fail(AcdmStatus::NullPointer, "symbols is null");
        };
        let k = m.inner.k() as usize;
        if bits_out.is_null() && k > 0 {
            return fail(AcdmStatus::NullPointer, "bits_out is null");
        }
        if bits_cap < k {
            return fail(AcdmStatus::BufferTooSmall, format!("need room for {k} bits, got {bits_cap}"));
        }
        let alphabet = m.inner.model().m();
        if let Some(bad) = symbols.iter().find(|&&s| s as usize >= alphabet) {
            return fail(
                AcdmStatus::InvalidInput,
                format!("symbol index {bad} outside alphabet of size {alphabet}"),
            );
        }
        let codeword = Codeword::new(symbols.iter().map(|&s| s as usize).collect());
        match m.inner.decode(&codeword) {
            Ok(bits) => {
                if k > 0 {
                    slice::from_raw_parts_mut(bits_out, k).copy_from_slice(bits.bits());
                }
                AcdmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Certified CCDM input length for `counts` at precision `w`.
///
/// # Safety
/// `counts` must point to `m` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acdm_k_fpa_ccdm(counts: *const u64, m: usize, w: u32, out: *mut u64) -> AcdmStatus {
    guarded(|| {
        let Some(counts) = input_slice(counts, m) else {
            return fail(AcdmStatus::NullPointer, "counts is null");
        };
        if out.is_null() {
            return fail(AcdmStatus::NullPointer, "out is null");
        }
        match Composition::from_counts(counts.to_vec()).and_then(|c| analysis::k_fpa_ccdm(&c, w)) {
            Ok(k) => {
                *out = k;
                AcdmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Upper bound on the CCDM rate loss in bits for `counts` at precision `w`.
///
/// # Safety
/// `counts` must point to `m` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acdm_rateloss_theorem1(counts: *const u64, m: usize, w: u32, out: *mut f64) -> AcdmStatus {
    guarded(|| {
        let Some(counts) = input_slice(counts, m) else {
            return fail(AcdmStatus::NullPointer, "counts is null");
        };
        if out.is_null() {
            return fail(AcdmStatus::NullPointer, "out is null");
        }
        match Composition::from_counts(counts.to_vec()).and_then(|c| analysis::rateloss_theorem1(&c, w)) {
            Ok(d) => {
                *out = d;
                AcdmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Largest even `n <= n_limit` whose balanced binary composition has rate loss below one bit.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn acdm_nmax_balanced(w: u32, method: AcdmMethod, n_limit: u64, out: *mut u64) -> AcdmStatus {
    guarded(|| {
        if out.is_null() {
            return fail(AcdmStatus::NullPointer, "out is null");
        }
        let method = match method {
            AcdmMethod::Theorem1 => RateLossMethod::Theorem1,
            AcdmMethod::Ramabadran => RateLossMethod::Ramabadran,
            AcdmMethod::Linearized => RateLossMethod::Linearized,
        };
        match analysis::nmax_search(w, &CompositionFamily::BalancedBinary, method, n_limit) {
            Ok(n) => {
                *out = n;
                AcdmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn acdm_status_str(status: AcdmStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        AcdmStatus::Ok => b"ok\0",
        AcdmStatus::NullPointer => b"null pointer argument\0",
        AcdmStatus::InvalidInput => b"invalid input\0",
        AcdmStatus::Config => b"configuration error\0",
        AcdmStatus::DecodeOutsideImage => b"codeword outside the encoder image\0",
        AcdmStatus::InstanceTooLarge => b"instance too large\0",
        AcdmStatus::BufferTooSmall => b"output buffer too small\0",
        AcdmStatus::Internal => b"internal error\0",
        AcdmStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

/// Message of the last failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn acdm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

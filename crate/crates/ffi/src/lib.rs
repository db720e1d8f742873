//! C ABI for `scatterx`.
//!
//! Tensors cross the boundary as opaque [`SxTensor`] handles. Every fallible
//! call returns an [`SxStatus`]; on failure the message is available from
//! [`sx_last_error`] on the same thread. Handles and strings returned through
//! out-parameters are owned by the caller and released with [`sx_tensor_free`]
//! and [`sx_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::ptr;
use std::slice;

use scatterx::json::{self, dispatch, AnyTensor};
use scatterx::{
    analyze, compose_provision, scatter, scatter_nd_update, torch_scatter, CollisionPolicy, Error, ProvisionTensor,
    ScatterReport, Scattering, Shape, Tensor,
};

/// Status codes; `1`, `2` and `3` match the command line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SxStatus {
    Ok = 0,
    /// Malformed JSON or unreadable input.
    Parse = 1,
    /// Invalid argument, shape or provision entry.
    Invalid = 2,
    /// Two sources reached one target under `SX_POLICY_ERROR`.
    Collision = 3,
    NullPointer = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SxDtype {
    F64 = 0,
    I64 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SxPolicy {
    Error = 0,
    First = 1,
    Last = 2,
    Sum = 3,
    Prod = 4,
}

impl From<SxPolicy> for CollisionPolicy {
    fn from(p: SxPolicy) -> Self {
        match p {
            SxPolicy::Error => CollisionPolicy::Error,
            SxPolicy::First => CollisionPolicy::FirstWins,
            SxPolicy::Last => CollisionPolicy::LastWins,
            SxPolicy::Sum => CollisionPolicy::Sum,
            SxPolicy::Prod => CollisionPolicy::Prod,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SxScatterReport {
    pub writes: usize,
    pub colliding_groups: usize,
    pub uncovered_targets: usize,
    pub fast_path_used: bool,
}

impl From<ScatterReport> for SxScatterReport {
    fn from(r: ScatterReport) -> Self {
        SxScatterReport {
            writes: r.writes,
            colliding_groups: r.colliding_groups,
            uncovered_targets: r.uncovered_targets,
            fast_path_used: r.fast_path_used,
        }
    }
}

/// Opaque tensor handle.
pub struct SxTensor(AnyTensor);

enum Failure {
    Core(Error),
    Null(&'static str),
    Status(SxStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SxStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SxStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            match e.exit_code() {
                1 => SxStatus::Parse,
                3 => SxStatus::Collision,
                _ => SxStatus::Invalid,
            }
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            SxStatus::NullPointer
        }
        Ok(Err(Failure::Status(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SxStatus::Panic
        }
    }
}

unsafe fn handle<'a>(p: *const SxTensor, what: &'static str) -> Result<&'a AnyTensor, Failure> {
    p.as_ref().map(|t| &t.0).ok_or(Failure::Null(what))
}

unsafe fn array<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Status(SxStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed(t: AnyTensor) -> *mut SxTensor {
    Box::into_raw(Box::new(SxTensor(t)))
}

fn string(text: String) -> *mut c_char {
    CString::new(text).expect("JSON text has no nul bytes").into_raw()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `len` row-major values into a new f64 tensor of the given shape.
///
/// # Safety
/// `shape` must point to `rank` values and `data` to `len` values (either may
/// be null when its length is zero); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_new_f64(
    shape: *const usize,
    rank: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut SxTensor,
) -> SxStatus {
    guard(|| {
        let dims = array(shape, rank, "shape")?;
        let values = array(data, len, "data")?;
        let t = Tensor::from_vec(Shape::new(dims.to_vec()), values.to_vec())?;
        put(out, boxed(t.into()), "out")
    })
}

/// i64 counterpart of [`sx_tensor_new_f64`].
///
/// # Safety
/// As for [`sx_tensor_new_f64`].
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_new_i64(
    shape: *const usize,
    rank: usize,
    data: *const i64,
    len: usize,
    out: *mut *mut SxTensor,
) -> SxStatus {
    guard(|| {
        let dims = array(shape, rank, "shape")?;
        let values = array(data, len, "data")?;
        let t = Tensor::from_vec(Shape::new(dims.to_vec()), values.to_vec())?;
        put(out, boxed(t.into()), "out")
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `t` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_free(t: *mut SxTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_dtype(t: *const SxTensor, out: *mut SxDtype) -> SxStatus {
    guard(|| {
        let dtype = match handle(t, "tensor")? {
            AnyTensor::F64(_) => SxDtype::F64,
            AnyTensor::I64(_) => SxDtype::I64,
        };
        put(out, dtype, "out")
    })
}

/// Rank of `t`; `0` for null.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_rank(t: *const SxTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.shape().rank())
}

/// Element count of `t`; `0` for null.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_len(t: *const SxTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.shape().size())
}

/// Copies the extents into `out`, which must hold at least `rank` values.
///
/// # Safety
/// `t` must be a live handle; `out` must be writable for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_shape(t: *const SxTensor, out: *mut usize, cap: usize) -> SxStatus {
    guard(|| {
        let dims = handle(t, "tensor")?.shape().dims();
        copy_out(dims, out, cap)
    })
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, cap: usize) -> Result<(), Failure> {
    if cap < src.len() {
        return Err(Failure::Core(Error::argument(format!("buffer holds {cap} values, {} needed", src.len()))));
    }
    if !src.is_empty() {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    Ok(())
}

/// Copies the data of an f64 tensor into `out` (at least `len` values).
///
/// # Safety
/// `t` must be a live handle; `out` must be writable for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_copy_f64(t: *const SxTensor, out: *mut f64, cap: usize) -> SxStatus {
    guard(|| match handle(t, "tensor")? {
        AnyTensor::F64(x) => copy_out(x.data(), out, cap),
        AnyTensor::I64(_) => Err(Error::argument("tensor is i64").into()),
    })
}

/// Copies the data of an i64 tensor into `out` (at least `len` values).
///
/// # Safety
/// `t` must be a live handle; `out` must be writable for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_copy_i64(t: *const SxTensor, out: *mut i64, cap: usize) -> SxStatus {
    guard(|| match handle(t, "tensor")? {
        AnyTensor::I64(x) => copy_out(x.data(), out, cap),
        AnyTensor::F64(_) => Err(Error::argument("tensor is f64").into()),
    })
}

/// Parses a tensor document.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_from_json(text: *const c_char, out: *mut *mut SxTensor) -> SxStatus {
    guard(|| {
        let t = AnyTensor::parse(c_str(text, "text")?)?;
        put(out, boxed(t), "out")
    })
}

/// Serializes a tensor; release the string with [`sx_string_free`].
///
/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sx_tensor_to_json(t: *const SxTensor, out: *mut *mut c_char) -> SxStatus {
    guard(|| {
        let value = handle(t, "tensor")?.to_value()?;
        put(out, string(json::to_text(&value)), "out")
    })
}

/// Releases a string from this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn finish(
    result: (AnyTensor, ScatterReport),
    out: *mut *mut SxTensor,
    report: *mut SxScatterReport,
) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    if !report.is_null() {
        report.write(result.1.into());
    }
    out.write(boxed(result.0));
    Ok(())
}

/// Scatters `updates` into a copy of `background` through the i64 provision
/// table `provision`, whose target shape is the background's shape. Runs in
/// i64 when both data tensors are i64, in f64 otherwise. `report` may be null.
///
/// # Safety
/// Tensor arguments must be live handles; `out` must be writable; `report`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sx_scatter(
    provision: *const SxTensor,
    updates: *const SxTensor,
    background: *const SxTensor,
    policy: SxPolicy,
    out: *mut *mut SxTensor,
    report: *mut SxScatterReport,
) -> SxStatus {
    guard(|| {
        let table = handle(provision, "provision")?.clone().into_int()?;
        let bg = handle(background, "background")?.clone();
        let upd = handle(updates, "updates")?.clone();
        let e = ProvisionTensor::new(table, bg.shape().clone())?;
        let policy = policy.into();
        let result = dispatch(
            upd,
            bg,
            |u, b| scatter(&Scattering::new(&e, u, b)?, policy),
            |u, b| scatter(&Scattering::new(&e, u, b)?, policy),
        )?;
        finish(result, out, report)
    })
}

/// `tensor_scatter_nd_update(tensor, indices, updates)`.
///
/// # Safety
/// As for [`sx_scatter`].
#[no_mangle]
pub unsafe extern "C" fn sx_scatter_nd_update(
    tensor: *const SxTensor,
    indices: *const SxTensor,
    updates: *const SxTensor,
    policy: SxPolicy,
    out: *mut *mut SxTensor,
    report: *mut SxScatterReport,
) -> SxStatus {
    guard(|| {
        let ts = handle(tensor, "tensor")?.clone();
        let idx = handle(indices, "indices")?.clone().into_int()?;
        let upd = handle(updates, "updates")?.clone();
        let policy = policy.into();
        let result = dispatch(
            upd,
            ts,
            |u, t| scatter_nd_update(t, &idx, u, policy),
            |u, t| scatter_nd_update(t, &idx, u, policy),
        )?;
        finish(result, out, report)
    })
}

/// `self.scatter(dim, index, src)`.
///
/// # Safety
/// As for [`sx_scatter`].
#[no_mangle]
pub unsafe extern "C" fn sx_torch_scatter(
    self_tensor: *const SxTensor,
    dim: usize,
    index: *const SxTensor,
    src: *const SxTensor,
    policy: SxPolicy,
    out: *mut *mut SxTensor,
    report: *mut SxScatterReport,
) -> SxStatus {
    guard(|| {
        let base = handle(self_tensor, "self")?.clone();
        let idx = handle(index, "index")?.clone().into_int()?;
        let source = handle(src, "src")?.clone();
        let policy = policy.into();
        let result = dispatch(
            source,
            base,
            |s, b| torch_scatter(b, dim, &idx, s, policy),
            |s, b| torch_scatter(b, dim, &idx, s, policy),
        )?;
        finish(result, out, report)
    })
}

/// Tabulates an x-transformer spec document into a provision table.
///
/// # Safety
/// `spec_json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sx_compose(spec_json: *const c_char, out: *mut *mut SxTensor) -> SxStatus {
    guard(|| {
        let value: serde_json::Value =
            serde_json::from_str(c_str(spec_json, "spec_json")?).map_err(|e| Failure::Core(e.into()))?;
        let e = compose_provision(&json::spec_from_value(value)?)?;
        put(out, boxed(e.into_table().into()), "out")
    })
}

/// Analysis report of an i64 provision table as a JSON document. A null
/// `target_shape` selects the bounding shape of the entries.
///
/// # Safety
/// `provision` must be a live handle; `target_shape` must be null or point to
/// `target_rank` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sx_analyze(
    provision: *const SxTensor,
    target_shape: *const usize,
    target_rank: usize,
    out: *mut *mut c_char,
) -> SxStatus {
    guard(|| {
        let table = handle(provision, "provision")?.clone().into_int()?;
        let e = if target_shape.is_null() {
            ProvisionTensor::with_bounding_target(table)?
        } else {
            ProvisionTensor::new(table, Shape::new(array(target_shape, target_rank, "target_shape")?.to_vec()))?
        };
        let report = json::analysis_to_value(&analyze(&e)?);
        put(out, string(json::to_text(&report)), "out")
    })
}

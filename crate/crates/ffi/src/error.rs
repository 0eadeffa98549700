use std::cell::RefCell;
use std::ffi::{c_char, CString};

use bdris_core::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdrisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    ShapeMismatch = 3,
    UnsupportedArchitecture = 4,
    RankDeficient = 5,
    Infeasible = 6,
    Domain = 7,
    BisectionFailure = 8,
    Io = 9,
    Parse = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

pub(crate) fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

pub(crate) fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

pub(crate) fn status_of(e: &Error) -> BdrisStatus {
    match e {
        Error::InvalidConfig(_) => BdrisStatus::InvalidConfig,
        Error::ShapeMismatch(_) => BdrisStatus::ShapeMismatch,
        Error::UnsupportedArchitecture(_) => BdrisStatus::UnsupportedArchitecture,
        Error::RankDeficient { .. } => BdrisStatus::RankDeficient,
        Error::Infeasible { .. } => BdrisStatus::Infeasible,
        Error::Domain(_) => BdrisStatus::Domain,
        Error::BisectionFailure(_) => BdrisStatus::BisectionFailure,
        Error::Io(_) => BdrisStatus::Io,
        Error::Parse(_) => BdrisStatus::Parse,
    }
}

pub(crate) fn fail(e: Error) -> BdrisStatus {
    set_last_error(e.to_string());
    status_of(&e)
}

/// Message of the last error on the calling thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bdris_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

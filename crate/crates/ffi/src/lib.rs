//! C ABI for `cca-core`.
//!
//! Models and states are opaque heap handles created by `cca_*_new`-style
//! constructors and released with the matching `*_free`. Every fallible call
//! returns a [`CcaStatus`]; on failure a message describing the last error on
//! the calling thread is available from [`cca_last_error`]. Results are
//! written through caller-provided out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cca_core::detection::{
    find_noon_times, find_w_times, transfer_probability_closed_form, transfer_probability_numeric,
    DetectionConfig, DetectionReport,
};
use cca_core::evolution::{survival_probability, StateEvolution};
use cca_core::fock::{CavityCount, OccupationState};
use cca_core::lindblad::{dissipative_transfer_probability, LossParams};
use cca_core::spectral::{ModelParams, Period, SpectralData};
use cca_core::states::{EntangledPair, Placement, PureState};
use cca_core::CcaError;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcaStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    BufferTooSmall = 3,
    DimensionCap = 4,
    NumericalGuard = 5,
    PeriodUnavailable = 6,
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcaPlacement {
    FirstTwo = 0,
    LastTwo = 1,
}

/// Chain parameters with their cached spectrum.
pub struct CcaModel {
    params: ModelParams,
    spectral: SpectralData,
}

pub struct CcaState {
    state: PureState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CcaStatus, msg: impl Into<String>) -> CcaStatus {
    set_error(msg.into());
    status
}

fn status_of(err: &CcaError) -> CcaStatus {
    match err {
        CcaError::DimensionCap { .. } => CcaStatus::DimensionCap,
        CcaError::NumericalGuard(_) => CcaStatus::NumericalGuard,
        CcaError::PeriodUnavailable(_) => CcaStatus::PeriodUnavailable,
        _ => CcaStatus::InvalidArgument,
    }
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), CcaStatus>) -> CcaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcaStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(CcaStatus::Internal, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, CcaStatus>;
}

impl<T> OrStatus<T> for cca_core::Result<T> {
    fn or_status(self) -> Result<T, CcaStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, CcaStatus> {
    // SAFETY: the caller guarantees `p` is null or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| fail(CcaStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), CcaStatus> {
    if out.is_null() {
        return Err(fail(CcaStatus::NullPointer, format!("{what} is NULL")));
    }
    // SAFETY: non-null and, per the API contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], CcaStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CcaStatus::NullPointer, format!("{what} is NULL")));
    }
    // SAFETY: caller provides `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn occupation(p: *const u32, len: usize) -> Result<OccupationState, CcaStatus> {
    Ok(OccupationState::new(
        unsafe { slice(p, len, "occupations") }?.to_vec(),
    ))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn cca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn cca_model_new(
    cavities: usize,
    omega: f64,
    coupling: f64,
    out: *mut *mut CcaModel,
) -> CcaStatus {
    guard(|| {
        let params = ModelParams::new(cavities, omega, coupling).or_status()?;
        let model = Box::new(CcaModel {
            params,
            spectral: SpectralData::new(params),
        });
        unsafe { write(out, Box::into_raw(model), "out") }
    })
}

/// # Safety
/// `model` must be NULL or a handle from [`cca_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cca_model_free(model: *mut CcaModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of cavities, or 0 for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cca_model_cavities(model: *const CcaModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.params.n())
}

/// Writes the `n` mode frequencies into `out[0..len]`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cca_model_frequencies(
    model: *const CcaModel,
    out: *mut f64,
    len: usize,
) -> CcaStatus {
    guard(|| {
        let model = unsafe { deref(model, "model") }?;
        let freqs = model.spectral.frequencies();
        if len < freqs.len() {
            return Err(fail(
                CcaStatus::BufferTooSmall,
                format!("need {} slots, got {len}", freqs.len()),
            ));
        }
        for (i, w) in freqs.iter().enumerate() {
            unsafe { write(out.add(i), *w, "out") }?;
        }
        Ok(())
    })
}

/// Revival period; 0 for a stationary spectrum, `PeriodUnavailable` if aperiodic.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cca_model_period(
    model: *const CcaModel,
    tol: f64,
    out: *mut f64,
) -> CcaStatus {
    guard(|| {
        let model = unsafe { deref(model, "model") }?;
        match model.spectral.evolution_period(tol).or_status()? {
            Period::Stationary => unsafe { write(out, 0.0, "out") },
            Period::Periodic { period, .. } => unsafe { write(out, period, "out") },
            Period::Aperiodic => Err(fail(
                CcaStatus::PeriodUnavailable,
                "frequency gaps are not commensurate within the search bound",
            )),
        }
    })
}

/// Probability that the Fock state `occupations` is found unchanged at `t`.
///
/// # Safety
/// `model` must be a live handle, `occupations` readable for `len` values,
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cca_survival_probability(
    model: *const CcaModel,
    occupations: *const u32,
    len: usize,
    t: f64,
    out: *mut f64,
) -> CcaStatus {
    guard(|| {
        let model = unsafe { deref(model, "model") }?;
        let occ = unsafe { occupation(occupations, len) }?;
        let p = survival_probability(&occ, &model.params, t).or_status()?;
        unsafe { write(out, p, "out") }
    })
}

fn boxed_state(
    state: cca_core::Result<PureState>,
    out: *mut *mut CcaState,
) -> Result<(), CcaStatus> {
    let state = state.or_status()?;
    unsafe { write(out, Box::into_raw(Box::new(CcaState { state })), "out") }
}

/// # Safety
/// `occupations` readable for `len` values; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cca_state_fock(
    occupations: *const u32,
    len: usize,
    out: *mut *mut CcaState,
) -> CcaStatus {
    guard(|| {
        let occ = unsafe { occupation(occupations, len) }?;
        let cavities = CavityCount::new(len).or_status()?;
        boxed_state(PureState::fock(cavities, &occ), out)
    })
}

/// Product of truncated coherent states with amplitudes `re[i] + i·im[i]`.
///
/// # Safety
/// `re` and `im` readable for `len` values; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cca_state_coherent(
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut CcaState,
) -> CcaStatus {
    guard(|| {
        let re = unsafe { slice(re, len, "re") }?;
        let im = unsafe { slice(im, len, "im") }?;
        let alphas: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(a, b)| Complex64::new(*a, *b))
            .collect();
        let cavities = CavityCount::new(len).or_status()?;
        boxed_state(PureState::weak_coherent(cavities, &alphas), out)
    })
}

/// `sinθ|10⟩ + cosθ|01⟩` on the first or last two of `cavities` sites.
///
/// # Safety
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cca_state_pair(
    cavities: usize,
    theta: f64,
    placement: CcaPlacement,
    out: *mut *mut CcaState,
) -> CcaStatus {
    guard(|| {
        let cavities = CavityCount::new(cavities).or_status()?;
        let pair = EntangledPair::new(theta).or_status()?;
        let placement = match placement {
            CcaPlacement::FirstTwo => Placement::FirstTwo,
            CcaPlacement::LastTwo => Placement::LastTwo,
        };
        boxed_state(PureState::entangled_pair(cavities, pair, placement), out)
    })
}

/// # Safety
/// `state` must be NULL or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cca_state_free(state: *mut CcaState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Probability of the Fock state `occupations` after evolving `state` for `t`.
///
/// # Safety
/// Live handles; `occupations` readable for `len` values; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cca_state_probability(
    state: *const CcaState,
    model: *const CcaModel,
    occupations: *const u32,
    len: usize,
    t: f64,
    out: *mut f64,
) -> CcaStatus {
    guard(|| {
        let state = unsafe { deref(state, "state") }?;
        let model = unsafe { deref(model, "model") }?;
        let occ = unsafe { occupation(occupations, len) }?;
        occ.check_cavities(model.params.cavities()).or_status()?;
        if !t.is_finite() {
            return Err(fail(CcaStatus::InvalidArgument, "time must be finite"));
        }
        let evo = StateEvolution::new(&state.state, &model.params).or_status()?;
        unsafe { write(out, evo.probability(&occ, t), "out") }
    })
}

/// Four-cavity pair-transfer probability at time `t` for concurrence `c`.
#[no_mangle]
pub extern "C" fn cca_transfer_closed_form(t: f64, concurrence: f64) -> f64 {
    transfer_probability_closed_form(t, concurrence)
}

/// Pair transfer by direct evolution (four-cavity model); also reports the concurrence.
///
/// # Safety
/// `model` must be a live handle; out-pointers valid for one write each
/// (`out_concurrence` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn cca_transfer_numeric(
    model: *const CcaModel,
    theta: f64,
    t: f64,
    out_probability: *mut f64,
    out_concurrence: *mut f64,
) -> CcaStatus {
    guard(|| {
        let model = unsafe { deref(model, "model") }?;
        let r = transfer_probability_numeric(theta, &model.params, t).or_status()?;
        unsafe { write(out_probability, r.probability, "out_probability") }?;
        if !out_concurrence.is_null() {
            unsafe { write(out_concurrence, r.concurrence, "out_concurrence") }?;
        }
        Ok(())
    })
}

/// Pair transfer under uniform photon loss `gamma`, integrated with step `dt`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cca_dissipative_transfer(
    model: *const CcaModel,
    theta: f64,
    gamma: f64,
    t: f64,
    dt: f64,
    out: *mut f64,
) -> CcaStatus {
    guard(|| {
        let model = unsafe { deref(model, "model") }?;
        let loss = LossParams::new(gamma).or_status()?;
        let p = dissipative_transfer_probability(theta, &model.params, &loss, t, dt).or_status()?;
        unsafe { write(out, p, "out") }
    })
}

type Finder =
    fn(&PureState, &ModelParams, u32, &DetectionConfig) -> cca_core::Result<DetectionReport>;

unsafe fn event_times(
    finder: Finder,
    state: *const CcaState,
    model: *const CcaModel,
    photons: u32,
    out_times: *mut f64,
    capacity: usize,
    out_count: *mut usize,
) -> CcaStatus {
    guard(|| {
        let state = unsafe { deref(state, "state") }?;
        let model = unsafe { deref(model, "model") }?;
        let report = finder(
            &state.state,
            &model.params,
            photons,
            &DetectionConfig::default(),
        )
        .or_status()?;
        let times = report.times();
        unsafe { write(out_count, times.len(), "out_count") }?;
        for (i, t) in times.iter().take(capacity).enumerate() {
            unsafe { write(out_times.add(i), *t, "out_times") }?;
        }
        if times.len() > capacity {
            return Err(fail(
                CcaStatus::BufferTooSmall,
                format!("{} events, buffer holds {capacity}", times.len()),
            ));
        }
        Ok(())
    })
}

/// W-event times within one repeat period (three-cavity model). `*out_count`
/// receives the number of events even when it exceeds `capacity`.
///
/// # Safety
/// Live handles; `out_times` valid for `capacity` writes; `out_count` for one.
#[no_mangle]
pub unsafe extern "C" fn cca_find_w_times(
    state: *const CcaState,
    model: *const CcaModel,
    photons: u32,
    out_times: *mut f64,
    capacity: usize,
    out_count: *mut usize,
) -> CcaStatus {
    unsafe {
        event_times(
            find_w_times,
            state,
            model,
            photons,
            out_times,
            capacity,
            out_count,
        )
    }
}

/// NOON-event times; same conventions as [`cca_find_w_times`].
///
/// # Safety
/// As for [`cca_find_w_times`].
#[no_mangle]
pub unsafe extern "C" fn cca_find_noon_times(
    state: *const CcaState,
    model: *const CcaModel,
    photons: u32,
    out_times: *mut f64,
    capacity: usize,
    out_count: *mut usize,
) -> CcaStatus {
    unsafe {
        event_times(
            find_noon_times,
            state,
            model,
            photons,
            out_times,
            capacity,
            out_count,
        )
    }
}

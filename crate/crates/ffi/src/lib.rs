//! C interface to `hapqc`.
//!
//! Every fallible function returns a [`HapqcStatus`] and writes its result
//! through an out-pointer. On failure, [`hapqc_last_error`] gives a message
//! for the calling thread. Objects are opaque handles released with their
//! `_free` function; strings returned by the library are released with
//! [`hapqc_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hapqc::cli::gate_report;
use hapqc::config::RunConfig;
use hapqc::couplings::{coupling_table, dipolar_coupling_hz, CouplingTable};
use hapqc::lattice::{build_lattice, ChainPattern, LatticeSpec, SpinSite};
use hapqc::planner::{
    addressable_planes, device_plan, physical_plane_limit, plane_splitting_hz, spins_per_plane,
    DevicePlan,
};
use hapqc::sequences::{parse_sequence, write_sequence, PulseSequence};
use hapqc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HapqcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    ParseError = 4,
    ConfigError = 5,
    NonConvergence = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HapqcChainPattern {
    Single = 0,
    Hex = 1,
}

/// One lattice site; positions in metres.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HapqcSite {
    pub id: usize,
    pub chain_id: usize,
    pub plane_index: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// One coupled pair; `d_hz` signed, `r` in metres, `theta` in radians.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HapqcCoupling {
    pub i: usize,
    pub j: usize,
    pub d_hz: f64,
    pub r: f64,
    pub theta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HapqcGateFidelity {
    pub retained_hz: f64,
    pub entangle_time_s: f64,
    pub gate_time_s: f64,
    pub ideal_fidelity: f64,
    pub cluster_fidelity: f64,
}

pub struct HapqcLattice {
    spec: LatticeSpec,
    sites: Vec<SpinSite>,
}

pub struct HapqcCouplings(CouplingTable);

pub struct HapqcPlan(DevicePlan);

pub struct HapqcSequence(PulseSequence);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> HapqcStatus {
    match err {
        Error::Parse { .. } | Error::UnknownTag { .. } => HapqcStatus::ParseError,
        Error::Config(_) => HapqcStatus::ConfigError,
        Error::NonConvergence { .. } => HapqcStatus::NonConvergence,
        Error::IndexOutOfRange { .. } | Error::UnknownPlane(_) | Error::TooManySpins { .. } => {
            HapqcStatus::OutOfRange
        }
        _ => HapqcStatus::InvalidArgument,
    }
}

struct Fail(HapqcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HapqcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HapqcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HapqcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HapqcStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Rejects a null out-pointer before anything is allocated for it.
fn need<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(null("output pointer"))
    } else {
        Ok(())
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(HapqcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior nul removed")
        .into_raw()
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hapqc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hapqc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Secular dipolar coupling constant (Hz) at distance `r` (m) and angle
/// `theta` (rad) to the field.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_dipolar_coupling_hz(
    r: f64,
    theta: f64,
    out: *mut f64,
) -> HapqcStatus {
    guard(|| write(out, dipolar_coupling_hz(r, theta)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_plane_splitting_hz(
    gradient_t_per_m: f64,
    chain_spacing_m: f64,
    out: *mut f64,
) -> HapqcStatus {
    guard(|| write(out, plane_splitting_hz(gradient_t_per_m, chain_spacing_m)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_addressable_planes(
    bandwidth_hz: f64,
    splitting_hz: f64,
    out: *mut u64,
) -> HapqcStatus {
    guard(|| write(out, addressable_planes(bandwidth_hz, splitting_hz)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_physical_plane_limit(
    thickness_m: f64,
    chain_spacing_m: f64,
    out: *mut u64,
) -> HapqcStatus {
    guard(|| write(out, physical_plane_limit(thickness_m, chain_spacing_m)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_spins_per_plane(
    lateral_x_m: f64,
    lateral_y_m: f64,
    chain_separation_m: f64,
    out: *mut f64,
) -> HapqcStatus {
    guard(|| {
        write(
            out,
            spins_per_plane(lateral_x_m, lateral_y_m, chain_separation_m)?,
        )
    })
}

fn make_lattice(spec: LatticeSpec) -> Result<*mut HapqcLattice, Fail> {
    let sites = build_lattice(&spec)?;
    Ok(Box::into_raw(Box::new(HapqcLattice { spec, sites })))
}

/// Builds a lattice with the field along z.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_lattice_new(
    chain_spacing_m: f64,
    chain_separation_m: f64,
    n_planes: usize,
    pattern: HapqcChainPattern,
    out: *mut *mut HapqcLattice,
) -> HapqcStatus {
    guard(|| {
        need(out)?;
        let pattern = match pattern {
            HapqcChainPattern::Single => ChainPattern::Single,
            HapqcChainPattern::Hex => ChainPattern::CentralPlusSixHex,
        };
        let spec = LatticeSpec {
            chain_spacing: chain_spacing_m,
            chain_separation: chain_separation_m,
            n_planes,
            pattern,
            ..LatticeSpec::default()
        };
        write(out, make_lattice(spec)?)
    })
}

/// Builds a lattice from `n_chains` in-plane offsets given as `x0, y0, x1,
/// y1, …` in metres.
///
/// # Safety
/// `offsets` must point to `2 * n_chains` doubles; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_lattice_new_explicit(
    chain_spacing_m: f64,
    chain_separation_m: f64,
    n_planes: usize,
    offsets: *const f64,
    n_chains: usize,
    out: *mut *mut HapqcLattice,
) -> HapqcStatus {
    guard(|| {
        need(out)?;
        if offsets.is_null() {
            return Err(null("offsets"));
        }
        let flat = std::slice::from_raw_parts(offsets, 2 * n_chains);
        let spec = LatticeSpec {
            chain_spacing: chain_spacing_m,
            chain_separation: chain_separation_m,
            n_planes,
            pattern: ChainPattern::Explicit(flat.chunks(2).map(|c| [c[0], c[1]]).collect()),
            ..LatticeSpec::default()
        };
        write(out, make_lattice(spec)?)
    })
}

/// Number of sites; 0 for a null handle.
///
/// # Safety
/// `lattice` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hapqc_lattice_len(lattice: *const HapqcLattice) -> usize {
    lattice.as_ref().map_or(0, |l| l.sites.len())
}

/// # Safety
/// `lattice` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_lattice_site(
    lattice: *const HapqcLattice,
    index: usize,
    out: *mut HapqcSite,
) -> HapqcStatus {
    guard(|| {
        let l = handle(lattice, "lattice")?;
        let s = l.sites.get(index).ok_or(Error::IndexOutOfRange {
            index,
            n: l.sites.len(),
        })?;
        write(
            out,
            HapqcSite {
                id: s.id,
                chain_id: s.chain_id,
                plane_index: s.plane_index,
                x: s.position.x,
                y: s.position.y,
                z: s.position.z,
            },
        )
    })
}

/// # Safety
/// `lattice` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hapqc_lattice_free(lattice: *mut HapqcLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Coupling table of every pair with `|d| >= cutoff_hz`, strongest first.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_couplings_new(
    lattice: *const HapqcLattice,
    cutoff_hz: f64,
    out: *mut *mut HapqcCouplings,
) -> HapqcStatus {
    guard(|| {
        need(out)?;
        let l = handle(lattice, "lattice")?;
        let table = coupling_table(&l.sites, &l.spec.field_axis, cutoff_hz)?;
        write(out, Box::into_raw(Box::new(HapqcCouplings(table))))
    })
}

/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hapqc_couplings_len(table: *const HapqcCouplings) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `table` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_couplings_entry(
    table: *const HapqcCouplings,
    index: usize,
    out: *mut HapqcCoupling,
) -> HapqcStatus {
    guard(|| {
        let t = &handle(table, "table")?.0;
        let e = t
            .entries
            .get(index)
            .ok_or(Error::IndexOutOfRange { index, n: t.len() })?;
        write(
            out,
            HapqcCoupling {
                i: e.i,
                j: e.j,
                d_hz: e.d_hz,
                r: e.r,
                theta: e.theta,
            },
        )
    })
}

/// # Safety
/// `table` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hapqc_couplings_free(table: *mut HapqcCouplings) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Device plan from configuration text. An infeasible plan is still a
/// success; query it with [`hapqc_plan_feasible`].
///
/// # Safety
/// `config` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_plan_from_config(
    config: *const c_char,
    out: *mut *mut HapqcPlan,
) -> HapqcStatus {
    guard(|| {
        need(out)?;
        let cfg = RunConfig::parse(text(config, "config")?)?;
        let plan = device_plan(&cfg.device, None)?;
        write(out, Box::into_raw(Box::new(HapqcPlan(plan))))
    })
}

/// # Safety
/// `plan` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_plan_feasible(
    plan: *const HapqcPlan,
    out: *mut bool,
) -> HapqcStatus {
    guard(|| write(out, handle(plan, "plan")?.0.feasible))
}

/// # Safety
/// `plan` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_plan_addressable_planes(
    plan: *const HapqcPlan,
    out: *mut u64,
) -> HapqcStatus {
    guard(|| write(out, handle(plan, "plan")?.0.addressable_planes))
}

/// Full-precision JSON for the plan; free with [`hapqc_string_free`].
///
/// # Safety
/// `plan` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_plan_to_json(
    plan: *const HapqcPlan,
    out: *mut *mut c_char,
) -> HapqcStatus {
    guard(|| {
        need(out)?;
        write(out, c_string(handle(plan, "plan")?.0.to_json()))
    })
}

/// # Safety
/// `plan` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hapqc_plan_free(plan: *mut HapqcPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Parses the line-oriented sequence format.
///
/// # Safety
/// `source` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_sequence_parse(
    source: *const c_char,
    out: *mut *mut HapqcSequence,
) -> HapqcStatus {
    guard(|| {
        need(out)?;
        let seq = parse_sequence(text(source, "source")?)?;
        write(out, Box::into_raw(Box::new(HapqcSequence(seq))))
    })
}

/// # Safety
/// `seq` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_sequence_cycle_time(
    seq: *const HapqcSequence,
    out: *mut f64,
) -> HapqcStatus {
    guard(|| write(out, handle(seq, "sequence")?.0.cycle_time()))
}

/// # Safety
/// `seq` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_sequence_to_text(
    seq: *const HapqcSequence,
    out: *mut *mut c_char,
) -> HapqcStatus {
    guard(|| {
        need(out)?;
        write(out, c_string(write_sequence(&handle(seq, "sequence")?.0)))
    })
}

/// # Safety
/// `seq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hapqc_sequence_free(seq: *mut HapqcSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// CNOT between planes `plane_a` (control) and `plane_b` of the cluster in
/// the configuration text.
///
/// # Safety
/// `config` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hapqc_cnot_fidelity(
    config: *const c_char,
    plane_a: usize,
    plane_b: usize,
    out: *mut HapqcGateFidelity,
) -> HapqcStatus {
    guard(|| {
        let cfg = RunConfig::parse(text(config, "config")?)?;
        let g = gate_report(&cfg, plane_a, plane_b)?;
        write(
            out,
            HapqcGateFidelity {
                retained_hz: g.retained_hz,
                entangle_time_s: g.entangle_time,
                gate_time_s: g.gate_time,
                ideal_fidelity: g.ideal_fidelity,
                cluster_fidelity: g.cluster_fidelity,
            },
        )
    })
}

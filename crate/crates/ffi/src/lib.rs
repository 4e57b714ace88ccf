//! C interface to the `brwre` simulator.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every fallible function returns a [`BrwreStatus`];
//! on failure the message is available from [`brwre_last_error`] on the same
//! thread. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use brwre::experiments::{survival_probability, Sampling, SurvivalParams};
use brwre::polymer::{free_energy, partition_function, FreeEnergyMethod};
use brwre::renorm::{block_event_probability, BlockEventSpec};
use brwre::stats::McEstimate;
use brwre::{
    validate, Configuration, Dichotomy, Environment, EnvironmentLaw, Error, QuenchedEnvironment,
    Site,
};

/// Status codes. `BRWRE_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrwreStatus {
    Ok = 0,
    NullPointer = 1,
    MalformedLaw = 2,
    Domain = 3,
    /// The law has a component with mean zero.
    Hyp1 = 4,
    /// A zero mean was met in the polymer recursion.
    ZeroMean = 5,
    TooLarge = 6,
    CouplingViolation = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrwreMethod {
    Point = 0,
    Slope = 1,
}

/// Result of [`brwre_law_validate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BrwreValidation {
    pub hyp1_ok: bool,
    pub hyp2_ok: bool,
    /// Some component is the Dirac mass at 0.
    pub has_dirac_zero: bool,
}

/// A Monte Carlo estimate. The Wilson bounds are NaN for real-valued estimates.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BrwreEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: usize,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl From<&McEstimate> for BrwreEstimate {
    fn from(e: &McEstimate) -> Self {
        BrwreEstimate {
            mean: e.mean,
            std_error: e.std_error,
            replicas: e.replicas as usize,
            wilson_low: e.wilson_low.unwrap_or(f64::NAN),
            wilson_high: e.wilson_high.unwrap_or(f64::NAN),
        }
    }
}

/// Opaque environment law.
pub struct BrwreLaw(EnvironmentLaw);

/// Opaque quenched environment.
pub struct BrwreEnv(QuenchedEnvironment);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BrwreStatus {
    match e {
        Error::MalformedLaw(_) => BrwreStatus::MalformedLaw,
        Error::Domain(_) | Error::UnknownFunctional(_) => BrwreStatus::Domain,
        Error::ZeroMean { .. } => BrwreStatus::ZeroMean,
        Error::Hyp1(_) => BrwreStatus::Hyp1,
        Error::TooLarge { .. } => BrwreStatus::TooLarge,
        Error::CouplingViolation { .. } => BrwreStatus::CouplingViolation,
    }
}

struct Null;

/// Runs `f`, converting errors and panics into a status and the last error.
fn guard(f: impl FnOnce() -> Result<(), Result<Error, Null>>) -> BrwreStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BrwreStatus::Ok,
        Ok(Err(Ok(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Err(Null))) => {
            set_error("null pointer argument".into());
            BrwreStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            BrwreStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Result<Error, Null>> {
    p.as_ref().ok_or(Err(Null))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Result<Error, Null>> {
    p.as_mut().ok_or(Err(Null))
}

unsafe fn input<'a, T>(p: *const T, n: usize) -> Result<&'a [T], Result<Error, Null>> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(Err(Null))
    } else {
        Ok(slice::from_raw_parts(p, n))
    }
}

fn lib<T>(r: brwre::Result<T>) -> Result<T, Result<Error, Null>> {
    r.map_err(Ok)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn brwre_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn brwre_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a mixture of `n_components` offspring laws. Component `i` has
/// weight `weights[i]` and pmf `pmfs[offsets[i] .. offsets[i] + lengths[i]]`
/// where offsets are the running sums of `lengths`.
///
/// # Safety
/// `weights` and `lengths` must hold `n_components` values and `pmfs` the sum
/// of `lengths`. `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn brwre_law_new(
    weights: *const f64,
    pmfs: *const f64,
    lengths: *const usize,
    n_components: usize,
    out_law: *mut *mut BrwreLaw,
) -> BrwreStatus {
    guard(|| {
        let weights = input(weights, n_components)?;
        let lengths = input(lengths, n_components)?;
        let pmfs = input(pmfs, lengths.iter().sum())?;
        let slot = out(out_law)?;
        let mut start = 0;
        let mut components = Vec::with_capacity(n_components);
        for (&w, &len) in weights.iter().zip(lengths) {
            components.push((w, pmfs[start..start + len].to_vec()));
            start += len;
        }
        let law = lib(EnvironmentLaw::new(components))?;
        *slot = Box::into_raw(Box::new(BrwreLaw(law)));
        Ok(())
    })
}

/// # Safety
/// `law` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn brwre_law_free(law: *mut BrwreLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn brwre_law_validate(law: *const BrwreLaw, out_report: *mut BrwreValidation) -> BrwreStatus {
    guard(|| {
        let law = deref(law)?;
        let slot = out(out_report)?;
        let r = validate(&law.0);
        *slot = BrwreValidation {
            hyp1_ok: r.hyp1_ok,
            hyp2_ok: r.hyp2_ok,
            has_dirac_zero: r.dichotomy == Dichotomy::H,
        };
        Ok(())
    })
}

/// Mean offspring number averaged over the environment law.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn brwre_law_annealed_mean(law: *const BrwreLaw, out_mean: *mut f64) -> BrwreStatus {
    guard(|| {
        *out(out_mean)? = deref(law)?.0.annealed_mean();
        Ok(())
    })
}

/// Thins every component with weight `1 - rho` on zero children.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn brwre_law_perturb(
    law: *const BrwreLaw,
    rho: f64,
    out_law: *mut *mut BrwreLaw,
) -> BrwreStatus {
    guard(|| {
        let law = deref(law)?;
        let slot = out(out_law)?;
        let p = lib(law.0.perturb(rho))?;
        *slot = Box::into_raw(Box::new(BrwreLaw(p)));
        Ok(())
    })
}

/// A quenched environment in dimension `dim` drawn from `law` with `seed`.
/// The law is copied.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn brwre_env_new(
    law: *const BrwreLaw,
    seed: u64,
    dim: usize,
    out_env: *mut *mut BrwreEnv,
) -> BrwreStatus {
    guard(|| {
        let law = deref(law)?;
        let slot = out(out_env)?;
        let env = lib(QuenchedEnvironment::new(law.0.clone(), seed, dim))?;
        *slot = Box::into_raw(Box::new(BrwreEnv(env)));
        Ok(())
    })
}

/// # Safety
/// `env` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn brwre_env_free(env: *mut BrwreEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

unsafe fn site(coords: *const i32, dim: usize) -> Result<Site, Result<Error, Null>> {
    lib(Site::new(input(coords, dim)?))
}

/// Mean offspring number `m_{t,x}` at time `t` and the site with `dim` coordinates.
///
/// # Safety
/// `coords` must hold the environment's dimension many values.
#[no_mangle]
pub unsafe extern "C" fn brwre_env_mean(
    env: *const BrwreEnv,
    t: u32,
    coords: *const i32,
    out_mean: *mut f64,
) -> BrwreStatus {
    guard(|| {
        let env = deref(env)?;
        let x = site(coords, env.0.dim())?;
        *out(out_mean)? = env.0.mean_at(t, &x);
        Ok(())
    })
}

/// Natural log of the normalised polymer partition function at time `t`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn brwre_partition_function(env: *const BrwreEnv, t: u32, out_log_z: *mut f64) -> BrwreStatus {
    guard(|| {
        let env = deref(env)?;
        let slot = out(out_log_z)?;
        *slot = lib(partition_function(&env.0, t))?.0;
        Ok(())
    })
}

/// Free-energy estimate over `replicas` environments with seeds `seed + i`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn brwre_free_energy(
    law: *const BrwreLaw,
    dim: usize,
    t: u32,
    replicas: usize,
    seed: u64,
    method: BrwreMethod,
    out_estimate: *mut BrwreEstimate,
) -> BrwreStatus {
    guard(|| {
        let law = deref(law)?;
        let slot = out(out_estimate)?;
        let method = match method {
            BrwreMethod::Point => FreeEnergyMethod::Point,
            BrwreMethod::Slope => FreeEnergyMethod::Slope,
        };
        let e = lib(free_energy(&law.0, dim, t, replicas, seed, method))?;
        *slot = BrwreEstimate {
            mean: e.psi_hat,
            std_error: e.std_error,
            replicas: e.replicas,
            wilson_low: f64::NAN,
            wilson_high: f64::NAN,
        };
        Ok(())
    })
}

/// Annealed survival proxy from `n_sites` occupied sites. Site `i` has
/// coordinates `coords[i*dim .. (i+1)*dim]` and `counts[i]` particles.
///
/// # Safety
/// `coords` must hold `n_sites * dim` values and `counts` `n_sites` values.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn brwre_survival_probability(
    law: *const BrwreLaw,
    dim: usize,
    coords: *const i32,
    counts: *const u64,
    n_sites: usize,
    horizon: u32,
    cap: u64,
    replicas: usize,
    seed: u64,
    out_estimate: *mut BrwreEstimate,
) -> BrwreStatus {
    guard(|| {
        let law = deref(law)?;
        let slot = out(out_estimate)?;
        lib(brwre::lattice::check_dim(dim))?;
        let coords = input(coords, n_sites * dim)?;
        let counts = input(counts, n_sites)?;
        let mut initial = Configuration::new();
        for (c, &n) in coords.chunks(dim).zip(counts) {
            initial.add(lib(Site::new(c))?, n);
        }
        let params = SurvivalParams {
            dim,
            horizon,
            cap,
            replicas,
            sampling: Sampling::Annealed,
        };
        let (e, _) = lib(survival_probability(&law.0, &initial, &params, seed))?;
        *slot = (&e).into();
        Ok(())
    })
}

/// Probability of the block event with parameters `n`, `l`, `t`.
/// `site_cap == 0` disables per-site clipping.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn brwre_block_event_probability(
    law: *const BrwreLaw,
    dim: usize,
    n: u32,
    l: u32,
    t: u32,
    site_cap: u64,
    replicas: usize,
    seed: u64,
    out_estimate: *mut BrwreEstimate,
) -> BrwreStatus {
    guard(|| {
        let law = deref(law)?;
        let slot = out(out_estimate)?;
        let spec = lib(BlockEventSpec::new(n, l, t, dim))?.site_cap((site_cap > 0).then_some(site_cap));
        let (e, _) = lib(block_event_probability(&law.0, &spec, replicas, seed))?;
        *slot = (&e).into();
        Ok(())
    })
}

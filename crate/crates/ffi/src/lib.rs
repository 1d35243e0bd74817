//! C ABI over the genbound library.
//!
//! Objects are opaque handles created by `gb_*_new`-style functions and
//! released with the matching `gb_*_free`. Every fallible call returns a
//! [`GbStatus`]; on failure [`gb_last_error_message`] describes the error for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;
use std::slice;

use genbound::algorithms::{
    erm_kernel, gibbs_kernel, noisy_erm_kernel, InputArity, NoisyErmMode, StochasticKernel, TieRule,
};
use genbound::bounds::{
    abs_gen_bounds, covering_bound, mi_gen_bound, monitor_bound, sample_complexity, two_stage_bound,
    SampleComplexityKind,
};
use genbound::info::{io_mutual_information, lambda_mutual_information};
use genbound::montecarlo::estimate_gen;
use genbound::risk::{exact_risk_summary, LossTable};
use genbound::spaces::FiniteDistribution;
use genbound::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Distribution = 4,
    Domain = 5,
    Support = 6,
    Grid = 7,
    Capacity = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbTieRule {
    LowestIndex = 0,
    UniformOverArgmin = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbSampleComplexity {
    Independent = 0,
    MiStable = 1,
}

/// Opaque distribution over `0..len`.
pub struct GbDistribution(FiniteDistribution);

/// Opaque loss table on a rational grid.
pub struct GbLossTable(LossTable);

/// Opaque row-stochastic kernel.
pub struct GbKernel(StochasticKernel);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GbRiskSummary {
    pub expected_empirical: f64,
    pub expected_population: f64,
    pub gen_error: f64,
    pub abs_gen_error: f64,
    pub excess_risk: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GbEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(e: &Error) -> GbStatus {
    match e {
        Error::Domain(_) => GbStatus::Domain,
        Error::Capacity { .. } => GbStatus::Capacity,
        Error::Support { .. } => GbStatus::Support,
        Error::Grid { .. } => GbStatus::Grid,
        Error::Argument(_) => GbStatus::InvalidArgument,
        Error::Dimension(_) => GbStatus::Dimension,
        Error::Distribution(_) => GbStatus::Distribution,
    }
}

/// Internal failure carrying its status code.
struct Fail(GbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GbStatus::NullPointer, format!("`{what}` is null"))
}

fn guard<F: FnOnce() -> Result<(), Fail> + UnwindSafe>(f: F) -> GbStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => GbStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            GbStatus::Panic
        }
    }
}

unsafe fn slice_in<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn gb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `probs` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_distribution_new(probs: *const f64, len: usize, out: *mut *mut GbDistribution) -> GbStatus {
    guard(|| {
        let p = slice_in(probs, len, "probs")?;
        let d = FiniteDistribution::from_probs(p.to_vec())?;
        write_out(out, boxed(GbDistribution(d)), "out")
    })
}

/// # Safety
/// `dist` must come from `gb_distribution_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gb_distribution_free(dist: *mut GbDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// # Safety
/// `dist` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gb_distribution_len(dist: *const GbDistribution) -> usize {
    dist.as_ref().map_or(0, |d| d.0.len())
}

/// Loss `numerators[w * z_size + z] / denominator`, bounded by
/// `[lo, hi] / denominator`.
///
/// # Safety
/// `numerators` must point to `hypotheses * z_size` readable values; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_loss_table_new(
    numerators: *const i64,
    hypotheses: usize,
    z_size: usize,
    denominator: u64,
    lo: i64,
    hi: i64,
    out: *mut *mut GbLossTable,
) -> GbStatus {
    guard(|| {
        let cells = hypotheses
            .checked_mul(z_size)
            .ok_or_else(|| Fail(GbStatus::InvalidArgument, "table size overflows".into()))?;
        if cells == 0 {
            return Err(Fail(GbStatus::InvalidArgument, "loss table must be nonempty".into()));
        }
        let flat = slice_in(numerators, cells, "numerators")?;
        let rows = flat.chunks(z_size).map(<[i64]>::to_vec).collect();
        let table = LossTable::new(rows, denominator, (lo, hi))?;
        write_out(out, boxed(GbLossTable(table)), "out")
    })
}

/// # Safety
/// `loss` must come from `gb_loss_table_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gb_loss_table_free(loss: *mut GbLossTable) {
    if !loss.is_null() {
        drop(Box::from_raw(loss));
    }
}

/// `(b − a)/2` of the loss range, or NaN for a null handle.
///
/// # Safety
/// `loss` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gb_loss_table_sigma(loss: *const GbLossTable) -> f64 {
    loss.as_ref().map_or(f64::NAN, |l| l.0.hoeffding_sigma())
}

/// ERM over datasets of size `n`.
///
/// # Safety
/// `loss` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_kernel_erm(loss: *const GbLossTable, n: usize, tie: GbTieRule, out: *mut *mut GbKernel) -> GbStatus {
    guard(|| {
        let loss = handle(loss, "loss")?;
        let tie = match tie {
            GbTieRule::LowestIndex => TieRule::LowestIndex,
            GbTieRule::UniformOverArgmin => TieRule::UniformOverArgmin,
        };
        write_out(out, boxed(GbKernel(erm_kernel(&loss.0, n, tie)?)), "out")
    })
}

/// Gibbs kernel with inverse temperature `beta`; a null `q` means a uniform prior.
///
/// # Safety
/// `loss` must be a live handle; `q` null or `q_len` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gb_kernel_gibbs(
    loss: *const GbLossTable,
    n: usize,
    beta: f64,
    q: *const f64,
    q_len: usize,
    out: *mut *mut GbKernel,
) -> GbStatus {
    guard(|| {
        let loss = handle(loss, "loss")?;
        let prior = if q.is_null() {
            FiniteDistribution::uniform(loss.0.num_hypotheses())?
        } else {
            FiniteDistribution::from_probs(slice_in(q, q_len, "q")?.to_vec())?
        };
        write_out(out, boxed(GbKernel(gibbs_kernel(&loss.0, n, beta, &prior)?)), "out")
    })
}

/// Noisy ERM with exponential noise means `b`, computed exactly.
///
/// # Safety
/// `loss` must be a live handle; `b` must hold `b_len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gb_kernel_noisy_erm(
    loss: *const GbLossTable,
    n: usize,
    b: *const f64,
    b_len: usize,
    out: *mut *mut GbKernel,
) -> GbStatus {
    guard(|| {
        let loss = handle(loss, "loss")?;
        let b = slice_in(b, b_len, "b")?;
        write_out(out, boxed(GbKernel(noisy_erm_kernel(&loss.0, n, b, NoisyErmMode::Exact)?)), "out")
    })
}

/// Kernel with explicit rows `data[code * outputs + w]`, one row per dataset of
/// `n` draws from `z_size` instances.
///
/// # Safety
/// `data` must hold `z_size^n * outputs` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_kernel_from_rows(
    data: *const f64,
    z_size: usize,
    n: usize,
    outputs: usize,
    out: *mut *mut GbKernel,
) -> GbStatus {
    guard(|| {
        let inputs = genbound::spaces::DatasetSpace::new(z_size, n)?.len();
        let cells = inputs
            .checked_mul(outputs)
            .ok_or_else(|| Fail(GbStatus::Capacity, "kernel size overflows".into()))?;
        let flat = slice_in(data, cells, "data")?;
        let kernel = StochasticKernel::from_flat(inputs, outputs, flat.to_vec(), InputArity::Datasets { z_size, n })?;
        write_out(out, boxed(GbKernel(kernel)), "out")
    })
}

/// # Safety
/// `kernel` must come from a `gb_kernel_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gb_kernel_free(kernel: *mut GbKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// # Safety
/// `kernel` must be a live handle; `inputs` and `outputs` writable.
#[no_mangle]
pub unsafe extern "C" fn gb_kernel_shape(kernel: *const GbKernel, inputs: *mut usize, outputs: *mut usize) -> GbStatus {
    guard(|| {
        let k = handle(kernel, "kernel")?;
        write_out(inputs, k.0.inputs(), "inputs")?;
        write_out(outputs, k.0.outputs(), "outputs")
    })
}

/// Copies row `input` into `buf`, which holds `len` doubles.
///
/// # Safety
/// `kernel` must be a live handle; `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gb_kernel_row(kernel: *const GbKernel, input: usize, buf: *mut f64, len: usize) -> GbStatus {
    guard(|| {
        let k = handle(kernel, "kernel")?;
        if input >= k.0.inputs() {
            return Err(Fail(GbStatus::Domain, format!("row {input} outside 0..{}", k.0.inputs())));
        }
        if len != k.0.outputs() {
            return Err(Fail(GbStatus::Dimension, format!("buffer holds {len}, row has {}", k.0.outputs())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        slice::from_raw_parts_mut(buf, len).copy_from_slice(k.0.row(input));
        Ok(())
    })
}

/// `I(S;W)` in nats.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_io_mutual_information(
    mu: *const GbDistribution,
    n: usize,
    kernel: *const GbKernel,
    out: *mut f64,
) -> GbStatus {
    guard(|| {
        let mi = io_mutual_information(&handle(mu, "mu")?.0, n, &handle(kernel, "kernel")?.0)?;
        write_out(out, mi, "out")
    })
}

/// `I(Λ_W(S);W)` in nats.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_lambda_mutual_information(
    mu: *const GbDistribution,
    n: usize,
    kernel: *const GbKernel,
    loss: *const GbLossTable,
    out: *mut f64,
) -> GbStatus {
    guard(|| {
        let mi = lambda_mutual_information(
            &handle(mu, "mu")?.0,
            n,
            &handle(kernel, "kernel")?.0,
            &handle(loss, "loss")?.0,
        )?;
        write_out(out, mi, "out")
    })
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_exact_risk_summary(
    mu: *const GbDistribution,
    n: usize,
    kernel: *const GbKernel,
    loss: *const GbLossTable,
    out: *mut GbRiskSummary,
) -> GbStatus {
    guard(|| {
        let s = exact_risk_summary(&handle(mu, "mu")?.0, n, &handle(kernel, "kernel")?.0, &handle(loss, "loss")?.0)?;
        let summary = GbRiskSummary {
            expected_empirical: s.expected_empirical,
            expected_population: s.expected_population,
            gen_error: s.gen_error,
            abs_gen_error: s.abs_gen_error,
            excess_risk: s.excess_risk,
        };
        write_out(out, summary, "out")
    })
}

/// Monte Carlo estimate of `E[L_μ(W) − L_S(W)]`; reproducible for a fixed seed.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_estimate_gen(
    mu: *const GbDistribution,
    n: usize,
    kernel: *const GbKernel,
    loss: *const GbLossTable,
    trials: u64,
    seed: u64,
    out: *mut GbEstimate,
) -> GbStatus {
    guard(|| {
        let e = estimate_gen(&handle(mu, "mu")?.0, n, &handle(kernel, "kernel")?.0, &handle(loss, "loss")?.0, trials, seed, &[])?
            .gen;
        let estimate = GbEstimate { mean: e.mean, std_error: e.std_error, trials: e.trials, ci95_lo: e.ci95.0, ci95_hi: e.ci95.1 };
        write_out(out, estimate, "out")
    })
}

/// `sqrt(2σ² mi / n)`.
#[no_mangle]
pub extern "C" fn gb_mi_gen_bound(sigma: f64, n: usize, mi: f64) -> f64 {
    mi_gen_bound(sigma, n, mi)
}

/// Both bounds on `E|L_μ(W) − L_S(W)|` for an `ε`-stable algorithm.
///
/// # Safety
/// `abs_bound` and `russo_zou` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_abs_gen_bounds(
    sigma: f64,
    n: usize,
    epsilon: f64,
    abs_bound: *mut f64,
    russo_zou: *mut f64,
) -> GbStatus {
    guard(|| {
        let b = abs_gen_bounds(sigma, n, epsilon);
        write_out(abs_bound, b.thm4, "abs_bound")?;
        write_out(russo_zou, b.russo_zou, "russo_zou")
    })
}

/// Sample size for the `(α, β)` guarantee; `epsilon` is ignored for the
/// independent kind and must be finite for the MI-stable kind.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_sample_complexity(
    kind: GbSampleComplexity,
    sigma: f64,
    alpha: f64,
    beta_conf: f64,
    epsilon: f64,
    out: *mut u64,
) -> GbStatus {
    guard(|| {
        let (kind, eps) = match kind {
            GbSampleComplexity::Independent => (SampleComplexityKind::Independent, None),
            GbSampleComplexity::MiStable => (SampleComplexityKind::MiStable, Some(epsilon)),
        };
        write_out(out, sample_complexity(kind, sigma, alpha, beta_conf, eps)?, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_covering_bound(sigma: f64, n: usize, d: usize, radius: f64, out: *mut f64) -> GbStatus {
    guard(|| write_out(out, covering_bound(sigma, n, d, radius)?, "out"))
}

#[no_mangle]
pub extern "C" fn gb_two_stage_bound(vc_dim: usize, n1: usize, n2: usize) -> f64 {
    two_stage_bound(vc_dim, n1, n2)
}

#[no_mangle]
pub extern "C" fn gb_monitor_bound(sigma: f64, n: usize, m: usize, epsilon: f64) -> f64 {
    monitor_bound(sigma, n, m, epsilon)
}

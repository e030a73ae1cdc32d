//! C ABI over `openqs`.
//!
//! Every fallible call returns an [`OqsStatus`]; on failure the message is
//! available from [`oqs_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Strings returned
//! through `char **` are owned by the caller and released with
//! [`oqs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use openqs::closedform::{cardano_eigenvalues, two_level_eigenvalues};
use openqs::ham::{build_channel_model, build_pt, ChannelVector};
use openqs::scenario::{find_preset, presets, Scenario};
use openqs::smat::SModel;
use openqs::spectral::{eigendecompose, mixing_coefficients, MixingTable, Spectrum};
use openqs::sweep::{run_ep_search, run_sweep, SearchMode};
use openqs::{ComplexValue, Error, ModelMatrix};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OqsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad dimension, non-finite input, malformed config, unknown preset.
    Invalid = 2,
    Solver = 3,
    /// Cardano branch degenerate; use the numeric spectrum instead.
    BranchDegeneracy = 4,
    OutOfRange = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OqsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexValue> for OqsComplex {
    fn from(z: ComplexValue) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<OqsComplex> for ComplexValue {
    fn from(z: OqsComplex) -> Self {
        ComplexValue::new(z.re, z.im)
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OqsSearchMode {
    Scan1d = 0,
    Refine2d = 1,
}

/// Complex-symmetric model matrix.
pub struct OqsModel(ModelMatrix);

/// Biorthonormal eigensystem together with its mixing table.
pub struct OqsSpectrum {
    spectrum: Spectrum,
    mixing: MixingTable,
}

pub struct OqsScenario(Scenario);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OqsStatus {
    match e {
        Error::Solver { .. } => OqsStatus::Solver,
        Error::BranchDegeneracy { .. } => OqsStatus::BranchDegeneracy,
        Error::Io(_) => OqsStatus::Io,
        _ => OqsStatus::Invalid,
    }
}

enum Fail {
    Null(&'static str),
    Range(usize),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OqsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            OqsStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            OqsStatus::NullPointer
        }
        Ok(Err(Fail::Range(i))) => {
            set_error(format!("index {i} out of range"));
            OqsStatus::OutOfRange
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            OqsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Core(Error::Validation(format!("{what} is not UTF-8"))))
}

fn give_string(s: String, dst: &mut *mut c_char) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail::Core(Error::Validation("interior NUL".into())))?;
    *dst = c.into_raw();
    Ok(())
}

fn boxed<T>(v: T, dst: &mut *mut T) {
    *dst = Box::into_raw(Box::new(v));
}

/// Message for the last failed call on this thread, or NULL after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn oqs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn oqs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- models ----

/// Builds an `n x n` model from row-major entries; must be symmetric.
///
/// # Safety
/// `entries` must point to `n * n` values; `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_model_new(
    n: usize,
    entries: *const OqsComplex,
    model: *mut *mut OqsModel,
) -> OqsStatus {
    guard(|| {
        let dst = out(model, "model")?;
        let data: Vec<ComplexValue> = slice(entries, n * n, "entries")?
            .iter()
            .map(|&z| z.into())
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::Structure(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    ))
                    .into());
                }
            }
        }
        boxed(OqsModel(ModelMatrix::from_row_major(n, &data)?), dst);
        Ok(())
    })
}

/// `[[eps1, omega], [omega, eps2]]` with `eps = e + (i/2) gamma`.
///
/// # Safety
/// `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_model_two_level(
    eps1: OqsComplex,
    eps2: OqsComplex,
    omega: OqsComplex,
    model: *mut *mut OqsModel,
) -> OqsStatus {
    guard(|| {
        let dst = out(model, "model")?;
        let d = [eps1.into(), eps2.into()];
        let m = ModelMatrix::from_upper(2, |i, j| if i == j { d[i] } else { omega.into() })?;
        boxed(OqsModel(m), dst);
        Ok(())
    })
}

/// Doorway model: level 1 couples to 2 and 3, which do not couple directly.
///
/// # Safety
/// `eps` must point to three values; `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_model_doorway(
    eps: *const OqsComplex,
    omega12: OqsComplex,
    omega13: OqsComplex,
    model: *mut *mut OqsModel,
) -> OqsStatus {
    guard(|| {
        let dst = out(model, "model")?;
        let d = slice(eps, 3, "eps")?;
        let m = ModelMatrix::from_upper(3, |i, j| match (i, j) {
            (i, j) if i == j => d[i].into(),
            (0, 1) => omega12.into(),
            (0, 2) => omega13.into(),
            _ => ComplexValue::new(0.0, 0.0),
        })?;
        boxed(OqsModel(m), dst);
        Ok(())
    })
}

/// # Safety
/// `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_model_pt(
    e: f64,
    gamma: f64,
    w: f64,
    lossy: bool,
    model: *mut *mut OqsModel,
) -> OqsStatus {
    guard(|| {
        let dst = out(model, "model")?;
        boxed(OqsModel(build_pt(e, gamma, w, lossy)?), dst);
        Ok(())
    })
}

/// `diag(hb) - i alpha v v^T`.
///
/// # Safety
/// `hb` and `v` must point to `n` values; `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_model_channel(
    hb: *const f64,
    v: *const f64,
    n: usize,
    alpha: f64,
    model: *mut *mut OqsModel,
) -> OqsStatus {
    guard(|| {
        let dst = out(model, "model")?;
        let channel = ChannelVector::new(slice(v, n, "v")?.to_vec(), alpha)?;
        boxed(
            OqsModel(build_channel_model(slice(hb, n, "hb")?, &channel)?),
            dst,
        );
        Ok(())
    })
}

/// Dimension of `model`, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oqs_model_dim(model: *const OqsModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n())
}

/// # Safety
/// `model` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_model_get(
    model: *const OqsModel,
    i: usize,
    j: usize,
    value: *mut OqsComplex,
) -> OqsStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let dst = out(value, "value")?;
        if i >= m.n() || j >= m.n() {
            return Err(Fail::Range(i.max(j)));
        }
        *dst = m.get(i, j).into();
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oqs_model_free(model: *mut OqsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

// ---- closed forms ----

/// Closed-form eigenvalues of a 2x2 model: `lambdas[0] = mean + Z`.
///
/// # Safety
/// `model` must be a live handle; `lambdas` must hold two values.
#[no_mangle]
pub unsafe extern "C" fn oqs_two_level_eigenvalues(
    model: *const OqsModel,
    lambdas: *mut OqsComplex,
) -> OqsStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let dst = slice_mut(lambdas, 2, "lambdas")?;
        let e = two_level_eigenvalues(m)?;
        dst[0] = e.lambda_plus.into();
        dst[1] = e.lambda_minus.into();
        Ok(())
    })
}

/// Cardano eigenvalues of a 3x3 doorway model.
///
/// # Safety
/// `model` must be a live handle; `lambdas` must hold three values.
#[no_mangle]
pub unsafe extern "C" fn oqs_cardano_eigenvalues(
    model: *const OqsModel,
    lambdas: *mut OqsComplex,
) -> OqsStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let dst = slice_mut(lambdas, 3, "lambdas")?;
        let sol = cardano_eigenvalues(m)?;
        for (d, l) in dst.iter_mut().zip(sol.lambdas) {
            *d = l.into();
        }
        Ok(())
    })
}

// ---- spectra ----

/// Numeric biorthonormal eigendecomposition of `model`.
///
/// # Safety
/// `model` must be a live handle; `spectrum` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_spectrum_new(
    model: *const OqsModel,
    spectrum: *mut *mut OqsSpectrum,
) -> OqsStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let dst = out(spectrum, "spectrum")?;
        let s = eigendecompose(m)?;
        let mixing = mixing_coefficients(&s, m)?;
        boxed(
            OqsSpectrum {
                spectrum: s,
                mixing,
            },
            dst,
        );
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oqs_spectrum_dim(spectrum: *const OqsSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.spectrum.n())
}

unsafe fn with_state<T>(
    spectrum: *const OqsSpectrum,
    i: usize,
    dst: *mut T,
    f: impl FnOnce(&OqsSpectrum) -> T,
) -> OqsStatus {
    guard(|| {
        let s = deref(spectrum, "spectrum")?;
        let dst = out(dst, "output")?;
        if i >= s.spectrum.n() {
            return Err(Fail::Range(i));
        }
        *dst = f(s);
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be a live handle; `lambda` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_spectrum_eigenvalue(
    spectrum: *const OqsSpectrum,
    i: usize,
    lambda: *mut OqsComplex,
) -> OqsStatus {
    with_state(spectrum, i, lambda, |s| s.spectrum.pairs[i].lambda.into())
}

/// Phase rigidity `r_i`.
///
/// # Safety
/// `spectrum` must be a live handle; `rigidity` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_spectrum_rigidity(
    spectrum: *const OqsSpectrum,
    i: usize,
    rigidity: *mut f64,
) -> OqsStatus {
    with_state(spectrum, i, rigidity, |s| s.spectrum.rigidity[i])
}

/// # Safety
/// `spectrum` must be a live handle; `flag` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_spectrum_near_ep(
    spectrum: *const OqsSpectrum,
    i: usize,
    flag: *mut bool,
) -> OqsStatus {
    with_state(spectrum, i, flag, |s| s.spectrum.near_ep_flags[i])
}

/// Copies right eigenvector `i` (normalized so `phi^T phi = 1`) into `phi`.
///
/// # Safety
/// `spectrum` must be a live handle; `phi` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn oqs_spectrum_eigenvector(
    spectrum: *const OqsSpectrum,
    i: usize,
    phi: *mut OqsComplex,
    len: usize,
) -> OqsStatus {
    guard(|| {
        let s = deref(spectrum, "spectrum")?;
        let n = s.spectrum.n();
        if i >= n {
            return Err(Fail::Range(i));
        }
        if len < n {
            return Err(Fail::Core(Error::Dimension {
                expected: format!("buffer of {n}"),
                got: len,
            }));
        }
        let dst = slice_mut(phi, n, "phi")?;
        for (d, &z) in dst.iter_mut().zip(&s.spectrum.pairs[i].phi) {
            *d = z.into();
        }
        Ok(())
    })
}

/// Mixing coefficient `b_ij` of eigenfunction `i` on basis state `j`.
///
/// # Safety
/// `spectrum` must be a live handle; `b` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_spectrum_mixing(
    spectrum: *const OqsSpectrum,
    i: usize,
    j: usize,
    b: *mut OqsComplex,
) -> OqsStatus {
    with_state(spectrum, i.max(j), b, |s| s.mixing.b[i][j].into())
}

/// # Safety
/// `spectrum` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oqs_spectrum_free(spectrum: *mut OqsSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

// ---- scenarios ----

/// # Safety
/// `id` must be a NUL-terminated string; `scenario` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_preset(
    id: *const c_char,
    scenario: *mut *mut OqsScenario,
) -> OqsStatus {
    guard(|| {
        let dst = out(scenario, "scenario")?;
        boxed(OqsScenario(find_preset(text(id, "id")?)?), dst);
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `scenario` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_from_json(
    json: *const c_char,
    scenario: *mut *mut OqsScenario,
) -> OqsStatus {
    guard(|| {
        let dst = out(scenario, "scenario")?;
        boxed(OqsScenario(Scenario::from_json(text(json, "json")?)?), dst);
        Ok(())
    })
}

/// Replaces the grid size; `points` must be at least 2.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_set_points(
    scenario: *mut OqsScenario,
    points: usize,
) -> OqsStatus {
    guard(|| {
        let s = out(scenario, "scenario")?;
        let next = s.0.with_points(points);
        next.validate()?;
        s.0 = next;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle; `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_to_json(
    scenario: *const OqsScenario,
    json: *mut *mut c_char,
) -> OqsStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        give_string(s.0.to_json(), out(json, "json")?)
    })
}

/// Model matrix at sweep parameter `x`.
///
/// # Safety
/// `scenario` must be a live handle; `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_model_at(
    scenario: *const OqsScenario,
    x: f64,
    model: *mut *mut OqsModel,
) -> OqsStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let dst = out(model, "model")?;
        boxed(OqsModel(s.0.matrix_at(x)?), dst);
        Ok(())
    })
}

/// Runs the sweep and returns the CSV table.
///
/// # Safety
/// `scenario` must be a live handle; `csv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_sweep_csv(
    scenario: *const OqsScenario,
    csv: *mut *mut c_char,
) -> OqsStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let dst = out(csv, "csv")?;
        give_string(run_sweep(&s.0)?.to_csv(), dst)
    })
}

/// EP search report as JSON. `tol <= 0` selects the default tolerance.
///
/// # Safety
/// `scenario` must be a live handle; `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_ep_search_json(
    scenario: *const OqsScenario,
    mode: OqsSearchMode,
    tol: f64,
    json: *mut *mut c_char,
) -> OqsStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let dst = out(json, "json")?;
        let mode = match mode {
            OqsSearchMode::Scan1d => SearchMode::Scan1d,
            OqsSearchMode::Refine2d => SearchMode::Refine2d,
        };
        let tol = (tol > 0.0).then_some(tol);
        give_string(run_ep_search(&s.0, mode, tol)?.to_json(), dst)
    })
}

/// # Safety
/// `scenario` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_free(scenario: *mut OqsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Preset catalog as a JSON array.
///
/// # Safety
/// `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oqs_list_scenarios_json(json: *mut *mut c_char) -> OqsStatus {
    guard(|| {
        let dst = out(json, "json")?;
        let body = serde_json::to_string_pretty(&presets()).map_err(Error::from)?;
        give_string(body, dst)
    })
}

// ---- S-matrix ----

/// Evaluates an S-matrix model given as JSON (`{"form": "pair", ...}`) on
/// `n` energies, writing `S(E)` and `sigma(E)`. Widths must be positive.
///
/// # Safety
/// `model_json` must be a NUL-terminated string; `energies`, `s` and `sigma`
/// must each hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn oqs_smatrix_line_shape(
    model_json: *const c_char,
    energies: *const f64,
    n: usize,
    s: *mut OqsComplex,
    sigma: *mut f64,
) -> OqsStatus {
    guard(|| {
        let model: SModel =
            serde_json::from_str(text(model_json, "model_json")?).map_err(Error::from)?;
        let shape = model.line_shape(slice(energies, n, "energies")?)?;
        let s_out = slice_mut(s, n, "s")?;
        let sigma_out = slice_mut(sigma, n, "sigma")?;
        for k in 0..n {
            s_out[k] = shape.s_values[k].into();
            sigma_out[k] = shape.sigma[k];
        }
        Ok(())
    })
}

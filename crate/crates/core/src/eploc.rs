//! Exceptional-point location: coalescence scans along a sweep, golden-section
//! refinement of gap minima, and Newton refinement of the two-level
//! discriminant in two parameters.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::two_level_discriminant;
use crate::error::{Error, Result};
use crate::ham::{ComplexValue, ModelMatrix};
use crate::spectral::{eigendecompose, eigenvalues};

/// Gaps below `10 * tol_gap` count as coalescence.
pub const DEFAULT_TOL_GAP: f64 = 1e-8;
/// Brackets need a gap below this fraction of the median gap, or a rigidity
/// below [`BRACKET_RIGIDITY`].
pub const DEFAULT_BRACKET_FRACTION: f64 = 0.05;
pub const BRACKET_RIGIDITY: f64 = 0.2;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-12;
pub const MAX_NEWTON_ITERATIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpOptions {
    pub tol_gap: f64,
    pub bracket_fraction: f64,
}

impl Default for EpOptions {
    fn default() -> Self {
        Self {
            tol_gap: DEFAULT_TOL_GAP,
            bracket_fraction: DEFAULT_BRACKET_FRACTION,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceSample {
    pub param: f64,
    pub gap: f64,
    pub rigidity_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub samples: Vec<CoalescenceSample>,
    pub brackets: Vec<(f64, f64)>,
    pub bracket_threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EpKind {
    Single,
    PairMember,
    NotAnEp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpLocation {
    pub params: Vec<f64>,
    /// `|D|` for two-level matrices, squared minimum gap otherwise.
    pub residual: f64,
    pub gap: f64,
    /// Indices of the coalescing pair among eigenvalues sorted by `(Re, Im)`.
    pub pair: [usize; 2],
    pub kind: EpKind,
    pub iterations: usize,
}

impl EpLocation {
    pub fn is_ep(&self) -> bool {
        self.kind != EpKind::NotAnEp
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpReport {
    pub scan: ScanResult,
    pub locations: Vec<EpLocation>,
}

impl EpReport {
    pub fn eps(&self) -> impl Iterator<Item = &EpLocation> {
        self.locations.iter().filter(|l| l.is_ep())
    }
}

/// Smallest pairwise eigenvalue distance, its pair, and the residual measure.
pub fn min_gap(m: &ModelMatrix) -> Result<(f64, [usize; 2], f64)> {
    let mut ev = eigenvalues(m)?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut best = (f64::INFINITY, [0, 1]);
    for i in 0..ev.len() {
        for j in (i + 1)..ev.len() {
            let g = (ev[i] - ev[j]).norm();
            if g < best.0 {
                best = (g, [i, j]);
            }
        }
    }
    if m.n() == 2 {
        // |lambda_+ - lambda_-| = |sqrt(D)|, without the eigensolver's sqrt(eps) floor
        let d = two_level_discriminant(m)?.norm();
        return Ok((d.sqrt(), best.1, d));
    }
    Ok((best.0, best.1, best.0 * best.0))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::Validation(format!(
            "scan needs >= 3 grid points, got {}",
            grid.len()
        )));
    }
    if grid
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::Validation(
            "scan grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn scan_coalescence<F>(family: &F, grid: &[f64], opts: &EpOptions) -> Result<ScanResult>
where
    F: Fn(f64) -> Result<ModelMatrix> + Sync,
{
    check_grid(grid)?;
    let samples = grid
        .par_iter()
        .map(|&x| {
            let m = family(x)?;
            let (gap, _, _) = min_gap(&m)?;
            let s = eigendecompose(&m)?;
            let rigidity_min = s.rigidity.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(CoalescenceSample {
                param: x,
                gap,
                rigidity_min,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let gaps: Vec<f64> = samples.iter().map(|s| s.gap).collect();
    let threshold = opts.bracket_fraction * median(&gaps);
    let brackets = (1..grid.len() - 1)
        .filter(|&k| gaps[k] < gaps[k - 1] && gaps[k] <= gaps[k + 1])
        .filter(|&k| gaps[k] < threshold || samples[k].rigidity_min < BRACKET_RIGIDITY)
        .map(|k| (grid[k - 1], grid[k + 1]))
        .collect();
    Ok(ScanResult {
        samples,
        brackets,
        bracket_threshold: threshold,
    })
}

/// Golden-section search for the gap minimum inside `bracket`.
///
/// The gap grows like `sqrt(|x - x_EP|)`, so certifying `gap < 10 tol_gap`
/// needs the bracket shrunk to floating-point resolution; the search always
/// runs that far.
pub fn refine_ep_1d<F>(family: &F, bracket: (f64, f64), opts: &EpOptions) -> Result<EpLocation>
where
    F: Fn(f64) -> Result<ModelMatrix>,
{
    let (mut lo, mut hi) = bracket;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Validation(format!("bad bracket ({lo}, {hi})")));
    }
    let gap_at = |x: f64| -> Result<f64> { Ok(min_gap(&family(x)?)?.0) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = gap_at(x1)?;
    let mut f2 = gap_at(x2)?;
    let (mut best_x, mut best_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let mut iterations = 0;
    while iterations < 400 {
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
        iterations += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = gap_at(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = gap_at(x2)?;
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f < best_f {
                best_x = x;
                best_f = f;
            }
        }
    }
    let (gap, pair, residual) = min_gap(&family(best_x)?)?;
    let kind = if gap <= 10.0 * opts.tol_gap {
        EpKind::Single
    } else {
        EpKind::NotAnEp
    };
    Ok(EpLocation {
        params: vec![best_x],
        residual,
        gap,
        pair,
        kind,
        iterations,
    })
}

/// Scan plus refinement of every bracket. Confirmed EPs are marked
/// `PAIR_MEMBER` when the sweep holds more than one.
pub fn find_eps_1d<F>(family: &F, grid: &[f64], opts: &EpOptions) -> Result<EpReport>
where
    F: Fn(f64) -> Result<ModelMatrix> + Sync,
{
    let scan = scan_coalescence(family, grid, opts)?;
    let mut locations = scan
        .brackets
        .par_iter()
        .map(|&b| refine_ep_1d(family, b, opts))
        .collect::<Result<Vec<_>>>()?;
    if locations.iter().filter(|l| l.is_ep()).count() > 1 {
        for l in locations.iter_mut().filter(|l| l.is_ep()) {
            l.kind = EpKind::PairMember;
        }
    }
    Ok(EpReport { scan, locations })
}

fn discriminant_vec(d: ComplexValue) -> Vector2<f64> {
    Vector2::new(d.re, d.im)
}

/// Newton iteration on `(Re D, Im D)` over a two-parameter family of 2x2
/// matrices, with central-difference Jacobians.
///
/// A rank-deficient Jacobian (a curve of EPs) falls back to the minimum-norm
/// Gauss-Newton step. Steps are capped at unit length and backtracked until
/// `|D|` decreases.
pub fn refine_ep_2d<F>(family: &F, start: (f64, f64), tol: f64) -> Result<EpLocation>
where
    F: Fn(f64, f64) -> Result<ModelMatrix>,
{
    let disc = |p: Vector2<f64>| -> Result<Vector2<f64>> {
        let m = family(p[0], p[1])?;
        Ok(discriminant_vec(two_level_discriminant(&m)?))
    };
    let mut x = Vector2::new(start.0, start.1);
    let mut f = disc(x)?;
    let mut trace = Vec::new();
    for it in 0..=MAX_NEWTON_ITERATIONS {
        let res = f.norm();
        trace.push(res);
        if !res.is_finite() || !x.iter().all(|v| v.is_finite()) || x.norm() > 1e6 {
            return Err(Error::Solver {
                message: format!(
                    "Newton diverged from ({}, {}); |D| trace {trace:?}",
                    start.0, start.1
                ),
                residual: res,
            });
        }
        if res < tol {
            let m = family(x[0], x[1])?;
            let (gap, pair, residual) = min_gap(&m)?;
            return Ok(EpLocation {
                params: vec![x[0], x[1]],
                residual,
                gap,
                pair,
                kind: EpKind::Single,
                iterations: it,
            });
        }
        if it == MAX_NEWTON_ITERATIONS {
            break;
        }
        let mut j = Matrix2::zeros();
        for k in 0..2 {
            let h = 1e-6 * x[k].abs().max(1.0);
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let col = (disc(xp)? - disc(xm)?) / (2.0 * h);
            j.set_column(k, &col);
        }
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            return Err(Error::Solver {
                message: "discriminant Jacobian vanishes".into(),
                residual: res,
            });
        }
        let pinv = svd
            .pseudo_inverse(1e-10 * smax)
            .map_err(|e| Error::Solver {
                message: e.to_string(),
                residual: res,
            })?;
        let mut step = -(pinv * f);
        if step.norm() > 1.0 {
            step /= step.norm();
        }
        let mut accepted = false;
        for _ in 0..40 {
            let trial = x + step;
            let ft = disc(trial)?;
            if ft.norm() < res {
                x = trial;
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Solver {
                message: format!(
                    "Newton stalled at ({}, {}); |D| trace {trace:?}",
                    x[0], x[1]
                ),
                residual: res,
            });
        }
    }
    Err(Error::Solver {
        message: format!("Newton did not converge in {MAX_NEWTON_ITERATIONS} iterations"),
        residual: f.norm(),
    })
}

//! Sweep execution, EP search drivers, S-matrix tables and CSV output.

use std::fmt::Write as _;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{cardano_eigenvalues, two_level_eigenvalues};
use crate::eploc::{
    find_eps_1d, min_gap, refine_ep_2d, EpLocation, EpOptions, DEFAULT_RESIDUAL_TOL,
};
use crate::error::{Error, Result};
use crate::ham::{ComplexValue, ModelMatrix};
use crate::scenario::{linspace, Scenario};
use crate::smat::{LineShape, SModel};
use crate::spectral::{
    align_signs, eigendecompose, eigenvector_angle, mixing_coefficients, order_by_basis,
    phase_trajectory, track, Spectrum,
};

/// Closed-form and numeric eigenvalues disagreeing by more than this
/// (relative to `1 + |H|`) raise the `cf_mismatch` flag.
pub const CLOSED_FORM_CHECK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub lambdas: Vec<ComplexValue>,
    pub rigidity: Vec<f64>,
    /// `|b_ij|`, row-major.
    pub b_abs: Vec<f64>,
    /// Unwrapped `theta_ij`, row-major.
    pub theta: Vec<f64>,
    /// One value for N = 2, `[min, max]` over pairs for N >= 3.
    pub cos_omega: Vec<f64>,
    pub near_ep: Vec<bool>,
    pub ambiguous: bool,
    pub closed_form_mismatch: bool,
    pub trace: ComplexValue,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn any_near_ep(&self) -> bool {
        self.near_ep.iter().any(|&f| f)
    }

    pub fn flags(&self) -> String {
        let mut tokens = Vec::new();
        for (i, &f) in self.near_ep.iter().enumerate() {
            if f {
                tokens.push(format!("near_ep_{}", i + 1));
            }
        }
        if self.ambiguous {
            tokens.push("ambiguous".into());
        }
        if self.closed_form_mismatch {
            tokens.push("cf_mismatch".into());
        }
        if let Some(e) = &self.error {
            tokens.push(format!("error:{}", e.replace([',', '\n', ';'], " ")));
        }
        tokens.join(";")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub scenario_id: String,
    pub param_name: String,
    pub n: usize,
    pub rows: Vec<SweepRow>,
}

fn fmt_f64(out: &mut String, x: f64) {
    write!(out, "{x:.16e}").expect("write to string");
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let n = self.n;
        let mut cols = vec![self.param_name.clone()];
        for i in 1..=n {
            cols.push(format!("E_{i}"));
            cols.push(format!("G_half_{i}"));
        }
        cols.extend((1..=n).map(|i| format!("r_{i}")));
        for i in 1..=n {
            for j in 1..=n {
                cols.push(format!("b_abs_{i}_{j}"));
                cols.push(format!("theta_{i}_{j}"));
            }
        }
        if n == 2 {
            cols.push("cos_omega".into());
        } else {
            cols.push("cos_omega_min".into());
            cols.push("cos_omega_max".into());
        }
        cols.push("flags".into());
        cols
    }

    /// Scientific notation with 17 significant digits; deterministic.
    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            let mut line = String::new();
            fmt_f64(&mut line, row.param);
            let mut push = |x: f64| {
                line.push(',');
                fmt_f64(&mut line, x);
            };
            for l in &row.lambdas {
                push(l.re);
                push(l.im);
            }
            for &r in &row.rigidity {
                push(r);
            }
            for (b, t) in row.b_abs.iter().zip(&row.theta) {
                push(*b);
                push(*t);
            }
            for &c in &row.cos_omega {
                push(c);
            }
            line.push(',');
            line.push_str(&row.flags());
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

struct PointResult {
    matrix: ModelMatrix,
    spectrum: Spectrum,
    cf_mismatch: bool,
}

fn matched_distance(a: &[ComplexValue], b: &[ComplexValue]) -> f64 {
    (0..b.len())
        .permutations(b.len())
        .map(|p| {
            a.iter()
                .zip(&p)
                .map(|(x, &k)| (x - b[k]).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

fn closed_form_mismatch(m: &ModelMatrix, s: &Spectrum) -> bool {
    let numeric = s.eigenvalues();
    let cf: Option<Vec<ComplexValue>> = match m.n() {
        2 => two_level_eigenvalues(m)
            .ok()
            .map(|e| vec![e.lambda_plus, e.lambda_minus]),
        3 if m.is_doorway() => cardano_eigenvalues(m).ok().map(|c| c.lambdas.to_vec()),
        _ => None,
    };
    match cf {
        // eigenvalues of a defective matrix carry sqrt(eps) error on either route
        Some(cf) if !s.any_near_ep() => {
            matched_distance(&numeric, &cf) > CLOSED_FORM_CHECK * (1.0 + m.norm())
        }
        _ => false,
    }
}

fn evaluate_point(scenario: &Scenario, x: f64) -> Result<PointResult> {
    let matrix = scenario.matrix_at(x)?;
    let spectrum = eigendecompose(&matrix)?;
    let cf_mismatch = closed_form_mismatch(&matrix, &spectrum);
    Ok(PointResult {
        matrix,
        spectrum,
        cf_mismatch,
    })
}

fn pair_cosines(s: &Spectrum) -> Vec<f64> {
    let cos: Vec<f64> = (0..s.n())
        .tuple_combinations()
        .map(|(i, j)| {
            eigenvector_angle(&s.pairs[i].phi, &s.pairs[j].phi)
                .map(|a| a.cos_omega_mag)
                .unwrap_or(f64::NAN)
        })
        .collect();
    if s.n() == 2 {
        cos
    } else {
        vec![
            cos.iter().cloned().fold(f64::INFINITY, f64::min),
            cos.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ]
    }
}

/// Runs a scenario over its grid. Points are decomposed in parallel; labels
/// are then tracked sequentially so output order and content never depend
/// on scheduling.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepTable> {
    scenario.validate()?;
    let n = scenario.dimension();
    let grid = scenario.grid();
    let points: Vec<Result<PointResult>> = grid
        .par_iter()
        .map(|&x| evaluate_point(scenario, x))
        .collect();

    let mut rows = Vec::with_capacity(grid.len());
    let mut prev: Option<Spectrum> = None;
    for (&x, point) in grid.iter().zip(points) {
        match point {
            Ok(p) => {
                let mut ambiguous = false;
                let mut s = match &prev {
                    None => p.spectrum.permuted(&order_by_basis(&p.spectrum)),
                    Some(last) => {
                        let t = track(last, &p.spectrum)?;
                        ambiguous = t.ambiguous;
                        let mut s = p.spectrum.permuted(&t.perm);
                        align_signs(last, &mut s);
                        s
                    }
                };
                if prev.is_none() {
                    for i in 0..n {
                        crate::spectral::fix_sign(&mut s.pairs[i].phi);
                    }
                }
                let mix = mixing_coefficients(&s, &p.matrix)?;
                rows.push(SweepRow {
                    param: x,
                    lambdas: s.eigenvalues(),
                    rigidity: s.rigidity.clone(),
                    b_abs: mix.magnitudes.concat(),
                    theta: mix.phases.concat(),
                    cos_omega: pair_cosines(&s),
                    near_ep: s.near_ep_flags.clone(),
                    ambiguous,
                    closed_form_mismatch: p.cf_mismatch,
                    trace: p.matrix.trace(),
                    error: None,
                });
                prev = Some(s);
            }
            Err(e) => {
                if !e.is_solver_failure() && !matches!(e, Error::Domain(_)) {
                    return Err(e);
                }
                rows.push(SweepRow {
                    param: x,
                    lambdas: vec![ComplexValue::new(f64::NAN, f64::NAN); n],
                    rigidity: vec![f64::NAN; n],
                    b_abs: vec![f64::NAN; n * n],
                    theta: vec![f64::NAN; n * n],
                    cos_omega: vec![f64::NAN; if n == 2 { 1 } else { 2 }],
                    near_ep: vec![false; n],
                    ambiguous: false,
                    closed_form_mismatch: false,
                    trace: ComplexValue::new(f64::NAN, f64::NAN),
                    error: Some(e.to_string()),
                });
            }
        }
    }
    unwrap_phases(&mut rows, n);
    Ok(SweepTable {
        scenario_id: scenario.label().to_string(),
        param_name: scenario.sweep.param.clone(),
        n,
        rows,
    })
}

fn unwrap_phases(rows: &mut [SweepRow], n: usize) {
    for k in 0..n * n {
        let good: Vec<usize> = (0..rows.len())
            .filter(|&r| rows[r].error.is_none())
            .collect();
        let series: Vec<f64> = good.iter().map(|&r| rows[r].theta[k]).collect();
        let unwrapped = phase_trajectory(&series).unwrapped;
        for (&r, t) in good.iter().zip(unwrapped) {
            rows[r].theta[k] = t;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SearchMode {
    #[serde(rename = "SCAN_1D")]
    Scan1d,
    #[serde(rename = "REFINE_2D")]
    Refine2d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub start: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<EpLocation>,
    /// Smallest rigidity on the sweep grid sample nearest the location.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest_rigidity_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpSearchReport {
    pub scenario: String,
    pub mode: SearchMode,
    pub param_names: Vec<String>,
    pub tolerance: f64,
    pub entries: Vec<ReportEntry>,
}

impl EpSearchReport {
    pub fn eps(&self) -> impl Iterator<Item = &EpLocation> {
        self.entries
            .iter()
            .filter_map(|e| e.location.as_ref())
            .filter(|l| l.is_ep())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `tol` is `tol_gap` for [`SearchMode::Scan1d`] and the `|D|` tolerance for
/// [`SearchMode::Refine2d`]; `None` selects the defaults.
pub fn run_ep_search(
    scenario: &Scenario,
    mode: SearchMode,
    tol: Option<f64>,
) -> Result<EpSearchReport> {
    scenario.validate()?;
    let grid = scenario.grid();
    if grid.len() < 3 {
        return Err(Error::Validation(
            "EP search needs >= 3 sweep points".into(),
        ));
    }
    let mut names = vec![scenario.sweep.param.clone()];
    let (tolerance, entries) = match mode {
        SearchMode::Scan1d => {
            let mut opts = EpOptions::default();
            if let Some(t) = tol {
                opts.tol_gap = t;
            }
            let family = |x: f64| scenario.matrix_at(x);
            let report = find_eps_1d(&family, &grid, &opts)?;
            let entries = report
                .scan
                .brackets
                .iter()
                .zip(report.locations)
                .map(|(&(lo, hi), loc)| {
                    let nearest = report
                        .scan
                        .samples
                        .iter()
                        .min_by(|a, b| {
                            (a.param - loc.params[0])
                                .abs()
                                .total_cmp(&(b.param - loc.params[0]).abs())
                        })
                        .map(|s| s.rigidity_min);
                    ReportEntry {
                        start: vec![lo, hi],
                        location: Some(loc),
                        nearest_rigidity_min: nearest,
                        error: None,
                    }
                })
                .collect();
            (opts.tol_gap, entries)
        }
        SearchMode::Refine2d => {
            let Some(sec) = &scenario.secondary else {
                return Err(Error::Validation(
                    "REFINE_2D needs a secondary parameter".into(),
                ));
            };
            if scenario.dimension() != 2 {
                return Err(Error::Validation(
                    "REFINE_2D works on two-level scenarios".into(),
                ));
            }
            names.push(sec.name.clone());
            let tolerance = tol.unwrap_or(DEFAULT_RESIDUAL_TOL);
            let ys = match sec.range {
                Some([lo, hi]) if hi > lo => linspace(lo, hi, 9),
                _ => vec![sec.value],
            };
            let entries = ys
                .par_iter()
                .map(|&y| {
                    let start = grid
                        .iter()
                        .map(|&x| (x, scenario.matrix_at2(x, y).and_then(|m| min_gap(&m))))
                        .filter_map(|(x, g)| g.ok().map(|g| (x, g.0)))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(x, _)| x)
                        .unwrap_or(grid[0]);
                    let family = |p: f64, q: f64| scenario.matrix_at2(p, q);
                    match refine_ep_2d(&family, (start, y), tolerance) {
                        Ok(loc) => ReportEntry {
                            start: vec![start, y],
                            location: Some(loc),
                            nearest_rigidity_min: None,
                            error: None,
                        },
                        Err(e) => ReportEntry {
                            start: vec![start, y],
                            location: None,
                            nearest_rigidity_min: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect();
            (tolerance, entries)
        }
    };
    Ok(EpSearchReport {
        scenario: scenario.label().to_string(),
        mode,
        param_names: names,
        tolerance,
        entries,
    })
}

/// Line shape of `model` on `points` energies in `[e_min, e_max]`.
pub fn run_smatrix(model: &SModel, e_min: f64, e_max: f64, points: usize) -> Result<LineShape> {
    if !e_min.is_finite() || !e_max.is_finite() || e_min >= e_max || points < 2 {
        return Err(Error::Validation(
            "energy grid needs e_min < e_max and >= 2 points".into(),
        ));
    }
    model.line_shape(&linspace(e_min, e_max, points))
}

pub fn line_shape_csv(shape: &LineShape) -> String {
    let mut out = String::from("E,Re_S,Im_S,sigma\n");
    for ((e, s), sigma) in shape.energies.iter().zip(&shape.s_values).zip(&shape.sigma) {
        let mut line = String::new();
        for (k, x) in [*e, s.re, s.im, *sigma].into_iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            fmt_f64(&mut line, x);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::find_preset;

    #[test]
    fn header_layout() {
        let t = run_sweep(&find_preset("part1-fig1ab").unwrap().with_points(5)).unwrap();
        let h = t.header();
        assert_eq!(h[0], "a");
        assert_eq!(&h[1..5], &["E_1", "G_half_1", "E_2", "G_half_2"]);
        assert_eq!(h.last().unwrap(), "flags");
        assert!(h.contains(&"cos_omega".to_string()));
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), h.len());
        }
        assert!(lines[1].starts_with("5.0000000000000000e-1,"));
    }

    #[test]
    fn three_level_has_min_max_cosines() {
        let t = run_sweep(&find_preset("part2-fig5").unwrap().with_points(3)).unwrap();
        let h = t.header();
        assert!(h.contains(&"cos_omega_min".to_string()));
        assert!(h.contains(&"b_abs_3_3".to_string()));
    }

    #[test]
    fn labels_start_on_unperturbed_levels() {
        let t = run_sweep(&find_preset("part2-fig5").unwrap().with_points(3)).unwrap();
        let first = &t.rows[0];
        for i in 0..3 {
            let row = &first.b_abs[i * 3..i * 3 + 3];
            let k = (0..3).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert_eq!(k, i);
        }
    }

    #[test]
    fn refine_2d_requires_secondary() {
        let s = find_preset("part1-fig1ab").unwrap();
        assert!(matches!(
            run_ep_search(&s, SearchMode::Refine2d, None),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn zero_coupling_gives_empty_report() {
        let mut s = find_preset("part1-fig1ab").unwrap();
        s.coupling.re = 0.0;
        let r = run_ep_search(&s.with_points(201), SearchMode::Scan1d, None).unwrap();
        assert_eq!(r.eps().count(), 0);
    }

    #[test]
    fn smatrix_table() {
        let shape = run_smatrix(
            &SModel::DoublePole {
                ed: 0.0,
                gamma_d: 0.1,
            },
            -1.0,
            1.0,
            11,
        )
        .unwrap();
        let csv = line_shape_csv(&shape);
        assert_eq!(csv.lines().count(), 12);
        assert!(csv.starts_with("E,Re_S,Im_S,sigma\n"));
        assert!(run_smatrix(
            &SModel::DoublePole {
                ed: 0.0,
                gamma_d: 0.0
            },
            -1.0,
            1.0,
            11
        )
        .is_err());
        assert!(run_smatrix(
            &SModel::DoublePole {
                ed: 0.0,
                gamma_d: 0.1
            },
            1.0,
            -1.0,
            11
        )
        .is_err());
    }
}

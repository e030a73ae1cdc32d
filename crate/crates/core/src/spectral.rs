//! Numeric eigendecomposition of complex-symmetric matrices, biorthogonal
//! normalization and eigenfunction diagnostics.

use std::f64::consts::{PI, TAU};

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::{ComplexValue, ModelMatrix};

/// Rigidity / eigenvalue-gap threshold below which a state is flagged near an EP.
pub const DEFAULT_NEAR_EP_TOLERANCE: f64 = 1e-3;
/// Cap for `A_i` and `|b_ij|^2` when the bilinear norm vanishes.
pub const NORM_CAP: f64 = 1e12;
/// Phase steps above this count as jumps.
pub const PHASE_JUMP_THRESHOLD: f64 = PI / 8.0;

const RESIDUAL_BOUND: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub lambda: ComplexValue,
    pub phi: Vec<ComplexValue>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub pairs: Vec<Eigenpair>,
    /// `A_i = <phi_i|phi_i>` after bilinear normalization.
    pub a_norm: Vec<f64>,
    /// `r_i = 1 / A_i`.
    pub rigidity: Vec<f64>,
    /// `|<phi_i|phi_j>|`, row-major `N x N`.
    pub b_overlap: Vec<f64>,
    pub near_ep_flags: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixingTable {
    pub n: usize,
    /// `b[i][j]`: component of eigenfunction `i` on basis state `j`.
    pub b: Vec<Vec<ComplexValue>>,
    pub magnitudes: Vec<Vec<f64>>,
    pub phases: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleDiagnostic {
    pub cos_omega_mag: f64,
    pub raw_overlap: ComplexValue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tracking {
    /// `perm[i]` is the index in `next` continuing state `i` of `prev`.
    pub perm: Vec<usize>,
    /// Set when the best assignment was not unique to 1e-6.
    pub ambiguous: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseJump {
    /// Index of the sample after the jump.
    pub index: usize,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub unwrapped: Vec<f64>,
    pub jumps: Vec<PhaseJump>,
}

/// Plain bilinear form `x^T y` (no conjugation).
pub fn bilinear(x: &[ComplexValue], y: &[ComplexValue]) -> ComplexValue {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Hermitian inner product `x^dagger y`.
pub fn hermitian(x: &[ComplexValue], y: &[ComplexValue]) -> ComplexValue {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[ComplexValue]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn eigenvalues(&self) -> Vec<ComplexValue> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn any_near_ep(&self) -> bool {
        self.near_ep_flags.iter().any(|&f| f)
    }

    /// `phi_i^T phi_j`.
    pub fn bilinear_overlap(&self, i: usize, j: usize) -> ComplexValue {
        bilinear(&self.pairs[i].phi, &self.pairs[j].phi)
    }

    /// `<phi_i|phi_j>`.
    pub fn hermitian_overlap(&self, i: usize, j: usize) -> ComplexValue {
        hermitian(&self.pairs[i].phi, &self.pairs[j].phi)
    }

    /// Reorders states so that new state `i` is old state `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Spectrum {
        let n = self.n();
        let mut b_overlap = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                b_overlap[i * n + j] = self.b_overlap[perm[i] * n + perm[j]];
            }
        }
        Spectrum {
            pairs: perm.iter().map(|&k| self.pairs[k].clone()).collect(),
            a_norm: perm.iter().map(|&k| self.a_norm[k]).collect(),
            rigidity: perm.iter().map(|&k| self.rigidity[k]).collect(),
            b_overlap,
            near_ep_flags: perm.iter().map(|&k| self.near_ep_flags[k]).collect(),
        }
    }

    /// Flips the overall sign of state `i`. Diagnostics are sign-invariant.
    pub fn negate(&mut self, i: usize) {
        for z in &mut self.pairs[i].phi {
            *z = -*z;
        }
    }
}

/// Full numeric decomposition with the default near-EP tolerance.
pub fn eigendecompose(m: &ModelMatrix) -> Result<Spectrum> {
    eigendecompose_with(m, DEFAULT_NEAR_EP_TOLERANCE)
}

pub fn eigendecompose_with(m: &ModelMatrix, tolerance: f64) -> Result<Spectrum> {
    let pairs = eigenpairs(m)?;
    let mut spectrum = biorthonormalize(pairs, tolerance)?;
    for i in 0..spectrum.n() {
        fix_sign(&mut spectrum.pairs[i].phi);
    }
    Ok(spectrum)
}

/// Eigenvalues only.
pub fn eigenvalues(m: &ModelMatrix) -> Result<Vec<ComplexValue>> {
    let (_, t) = schur(m)?;
    Ok((0..m.n()).map(|i| t[(i, i)]).collect())
}

fn schur(m: &ModelMatrix) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let h = m.to_dmatrix();
    nalgebra::Schur::try_new(h, f64::EPSILON, 10_000)
        .map(|s| s.unpack())
        .ok_or_else(|| Error::Solver {
            message: "complex Schur iteration did not converge".into(),
            residual: f64::NAN,
        })
}

/// Right eigenvectors at unit Hermitian norm, from the Schur form `H = Q T Q^dagger`.
pub fn eigenpairs(m: &ModelMatrix) -> Result<Vec<Eigenpair>> {
    let n = m.n();
    let (q, t) = schur(m)?;
    let t_norm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let smin = (f64::EPSILON * t_norm).max(f64::MIN_POSITIVE);
    let h_norm = m.norm();

    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = DVector::from_element(n, Complex64::new(0.0, 0.0));
        y[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[l];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = Complex64::new(smin, 0.0);
            }
            y[j] = -acc / denom;
        }
        let x = &q * y;
        let len = x.norm();
        let phi: Vec<Complex64> = x.iter().map(|z| z / len).collect();

        let hx = m.apply(&phi);
        let residual = hx
            .iter()
            .zip(&phi)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !residual.is_finite() || residual > RESIDUAL_BOUND * h_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Solver {
                message: format!("eigenpair {k} fails the residual bound"),
                residual,
            });
        }
        pairs.push(Eigenpair { lambda, phi });
    }
    Ok(pairs)
}

/// Scales each vector so that `phi^T phi = 1` and computes `A_i`, `r_i` and
/// the Hermitian overlaps.
///
/// A state is flagged when its rigidity `|phi^T phi| / phi^dagger phi` or its
/// distance to another eigenvalue falls below `tolerance`. Flagged vectors are
/// still scaled, with `A_i` capped at [`NORM_CAP`].
pub fn biorthonormalize(pairs: Vec<Eigenpair>, tolerance: f64) -> Result<Spectrum> {
    let n = pairs.len();
    if n == 0 {
        return Err(Error::dimension("N >= 1", 0));
    }
    let mut out = Vec::with_capacity(n);
    let mut a_norm = Vec::with_capacity(n);
    let mut flags = vec![false; n];

    for (i, pair) in pairs.into_iter().enumerate() {
        let len = norm(&pair.phi);
        if len == 0.0 || !len.is_finite() {
            return Err(Error::Domain(format!("eigenvector {i} has zero norm")));
        }
        let unit: Vec<Complex64> = pair.phi.iter().map(|z| z / len).collect();
        let s = bilinear(&unit, &unit);
        let rho = s.norm();
        if rho < tolerance {
            flags[i] = true;
        }
        // phi / sqrt(s), with |s| floored so that A stays at or below the cap
        let scale = if rho >= 1.0 / NORM_CAP {
            s.sqrt().inv()
        } else {
            Complex64::from_polar(NORM_CAP.sqrt(), -0.5 * s.arg())
        };
        let phi: Vec<Complex64> = unit.iter().map(|z| z * scale).collect();
        a_norm.push(hermitian(&phi, &phi).re.min(NORM_CAP));
        out.push(Eigenpair {
            lambda: pair.lambda,
            phi,
        });
    }
    for (i, j) in (0..n).tuple_combinations() {
        if (out[i].lambda - out[j].lambda).norm() < tolerance {
            flags[i] = true;
            flags[j] = true;
        }
    }
    let mut b_overlap = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b_overlap[i * n + j] = hermitian(&out[i].phi, &out[j].phi).norm().min(NORM_CAP);
        }
    }
    Ok(Spectrum {
        rigidity: a_norm.iter().map(|a| 1.0 / a).collect(),
        a_norm,
        b_overlap,
        near_ep_flags: flags,
        pairs: out,
    })
}

/// Makes the largest-magnitude component have positive real part.
pub fn fix_sign(phi: &mut [ComplexValue]) {
    let Some(k) = (0..phi.len()).max_by(|&a, &b| phi[a].norm().total_cmp(&phi[b].norm())) else {
        return;
    };
    let z = phi[k];
    if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0) {
        for x in phi.iter_mut() {
            *x = -*x;
        }
    }
}

/// Flips states of `next` whose Hermitian overlap with the matching state of
/// `prev` has negative real part. Both spectra must already be aligned.
pub fn align_signs(prev: &Spectrum, next: &mut Spectrum) {
    for i in 0..next.n().min(prev.n()) {
        if hermitian(&prev.pairs[i].phi, &next.pairs[i].phi).re < 0.0 {
            next.negate(i);
        }
    }
}

pub fn mixing_coefficients(s: &Spectrum, m: &ModelMatrix) -> Result<MixingTable> {
    let n = s.n();
    if m.n() != n {
        return Err(Error::dimension(format!("N = {n}"), m.n()));
    }
    let b: Vec<Vec<Complex64>> = s.pairs.iter().map(|p| p.phi.clone()).collect();
    let magnitudes = b
        .iter()
        .map(|row| row.iter().map(|z| z.norm().min(NORM_CAP)).collect())
        .collect();
    let phases = b
        .iter()
        .map(|row| row.iter().map(|z| z.im.atan2(z.re)).collect())
        .collect();
    Ok(MixingTable {
        n,
        b,
        magnitudes,
        phases,
    })
}

pub fn eigenvector_angle(phi1: &[ComplexValue], phi2: &[ComplexValue]) -> Result<AngleDiagnostic> {
    if phi1.len() != phi2.len() {
        return Err(Error::dimension(
            format!("length {}", phi1.len()),
            phi2.len(),
        ));
    }
    let (n1, n2) = (norm(phi1), norm(phi2));
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Domain("zero vector in eigenvector_angle".into()));
    }
    let raw = hermitian(phi1, phi2);
    Ok(AngleDiagnostic {
        cos_omega_mag: (raw.norm() / (n1 * n2)).min(1.0),
        raw_overlap: raw,
    })
}

/// `min_chi || phi1/|phi1| - e^{i chi} phi2/|phi2| ||`.
pub fn phase_aligned_distance(phi1: &[ComplexValue], phi2: &[ComplexValue]) -> Result<f64> {
    let angle = eigenvector_angle(phi1, phi2)?;
    Ok((2.0 - 2.0 * angle.cos_omega_mag).max(0.0).sqrt())
}

/// Assignment of `next` states to `prev` states maximizing the summed
/// magnitude of normalized Hermitian overlaps.
pub fn track(prev: &Spectrum, next: &Spectrum) -> Result<Tracking> {
    let n = prev.n();
    if next.n() != n {
        return Err(Error::dimension(format!("N = {n}"), next.n()));
    }
    let unit = |s: &Spectrum| -> Vec<Vec<Complex64>> {
        s.pairs
            .iter()
            .map(|p| {
                let l = norm(&p.phi);
                p.phi.iter().map(|z| z / l).collect()
            })
            .collect()
    };
    let (pu, nu) = (unit(prev), unit(next));
    let mut overlap = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            overlap[i * n + j] = hermitian(&pu[i], &nu[j]).norm();
        }
    }
    let scored: Vec<(Vec<usize>, f64, f64)> = (0..n)
        .permutations(n)
        .map(|p| {
            let score = (0..n).map(|i| overlap[i * n + p[i]]).sum::<f64>();
            let dist = (0..n)
                .map(|i| (prev.pairs[i].lambda - next.pairs[p[i]].lambda).norm())
                .sum::<f64>();
            (p, score, dist)
        })
        .collect();
    let best = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<&(Vec<usize>, f64, f64)> = scored.iter().filter(|s| best - s.1 <= 1e-6).collect();
    let chosen = ties
        .iter()
        .min_by(|a, b| a.2.total_cmp(&b.2).then(b.1.total_cmp(&a.1)))
        .expect("at least one permutation");
    Ok(Tracking {
        perm: chosen.0.clone(),
        ambiguous: ties.len() > 1,
    })
}

/// Permutation putting the state with the largest weight on basis vector `i`
/// at position `i`, so labels start out aligned with the unperturbed levels.
pub fn order_by_basis(s: &Spectrum) -> Vec<usize> {
    let n = s.n();
    let weight = |k: usize, i: usize| {
        let phi = &s.pairs[k].phi;
        phi[i].norm() / norm(phi)
    };
    (0..n)
        .permutations(n)
        .map(|p| {
            let score = (0..n).map(|i| weight(p[i], i)).sum::<f64>();
            (p, score)
        })
        .fold((Vec::new(), f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
        .0
}

/// Unwraps modulo 2pi and reports steps larger than [`PHASE_JUMP_THRESHOLD`].
pub fn phase_trajectory(theta: &[f64]) -> PhaseTrajectory {
    let mut unwrapped = Vec::with_capacity(theta.len());
    let mut jumps = Vec::new();
    for (k, &t) in theta.iter().enumerate() {
        if k == 0 {
            unwrapped.push(t);
            continue;
        }
        let prev = unwrapped[k - 1];
        let step = (t - prev).rem_euclid(TAU);
        let step = if step > PI { step - TAU } else { step };
        unwrapped.push(prev + step);
        if step.abs() > PHASE_JUMP_THRESHOLD {
            jumps.push(PhaseJump {
                index: k,
                magnitude: step,
            });
        }
    }
    PhaseTrajectory { unwrapped, jumps }
}

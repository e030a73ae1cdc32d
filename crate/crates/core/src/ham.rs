//! Hamiltonian families: two-level, PT gain/loss, three-level doorway and the
//! single-channel `H^B - i alpha V V^T` model.
//!
//! Every matrix is complex symmetric under the plain transpose. Builders fill
//! the upper triangle once and mirror it, so `entries[i][j] == entries[j][i]`
//! holds bitwise.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Unperturbed level with complex energy `e + (i/2) gamma`.
///
/// `gamma` is signed: negative for loss (decay), positive for gain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub e: f64,
    pub gamma: f64,
}

impl Level {
    pub fn new(e: f64, gamma: f64) -> Self {
        Self { e, gamma }
    }

    pub fn epsilon(&self) -> ComplexValue {
        Complex64::new(self.e, 0.5 * self.gamma)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSet {
    levels: Vec<Level>,
}

impl LevelSet {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::dimension("N >= 2", levels.len()));
        }
        if levels
            .iter()
            .any(|l| !l.e.is_finite() || !l.gamma.is_finite())
        {
            return Err(Error::NonFinite("level set"));
        }
        Ok(Self { levels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub omega: ComplexValue,
    pub gaussian_modulated: bool,
}

impl Coupling {
    pub fn new(omega: ComplexValue) -> Self {
        Self {
            omega,
            gaussian_modulated: false,
        }
    }

    pub fn gaussian(omega: ComplexValue) -> Self {
        Self {
            omega,
            gaussian_modulated: true,
        }
    }

    /// Coupling between levels with energies `e_i`, `e_j`.
    pub fn between(&self, e_i: f64, e_j: f64) -> ComplexValue {
        if self.gaussian_modulated {
            gaussian_coupling(self.omega, e_i, e_j)
        } else {
            self.omega
        }
    }
}

/// `omega * exp(-(e_i - e_j)^2)`.
pub fn gaussian_coupling(omega: ComplexValue, e_i: f64, e_j: f64) -> ComplexValue {
    let d = e_i - e_j;
    omega * (-(d * d)).exp()
}

/// Single real channel vector `V` with overall strength `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelVector {
    v: Vec<f64>,
    alpha: f64,
}

impl ChannelVector {
    pub fn new(v: Vec<f64>, alpha: f64) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) || !alpha.is_finite() {
            return Err(Error::NonFinite("channel vector"));
        }
        if alpha < 0.0 {
            return Err(Error::Validation(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
        if v.iter().all(|&x| x == 0.0) {
            return Err(Error::Validation(
                "channel vector needs at least one nonzero amplitude".into(),
            ));
        }
        Ok(Self { v, alpha })
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Complex-symmetric `n x n` Hamiltonian plus the diagonal that defines the
/// unperturbed basis used for mixing coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelMatrix {
    n: usize,
    entries: Vec<ComplexValue>,
    h0_diagonal: Vec<ComplexValue>,
}

impl ModelMatrix {
    /// Builds a symmetric matrix from its upper triangle (`i <= j`).
    pub fn from_upper<F>(n: usize, mut upper: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> ComplexValue,
    {
        if n < 2 {
            return Err(Error::dimension("N >= 2", n));
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let z = upper(i, j);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite("matrix entry"));
                }
                entries[i * n + j] = z;
                entries[j * n + i] = z;
            }
        }
        let h0_diagonal = (0..n).map(|i| entries[i * n + i]).collect();
        Ok(Self {
            n,
            entries,
            h0_diagonal,
        })
    }

    /// Builds from a full row-major array, reading only the upper triangle.
    pub fn from_row_major(n: usize, data: &[ComplexValue]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::dimension(format!("{} entries", n * n), data.len()));
        }
        Self::from_upper(n, |i, j| data[i * n + j])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> ComplexValue {
        self.entries[i * self.n + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[ComplexValue] {
        &self.entries
    }

    pub fn h0_diagonal(&self) -> &[ComplexValue] {
        &self.h0_diagonal
    }

    pub fn diagonal(&self) -> Vec<ComplexValue> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> ComplexValue {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_dmatrix(&self) -> DMatrix<ComplexValue> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    /// `H x`.
    pub fn apply(&self, x: &[ComplexValue]) -> Vec<ComplexValue> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// True when this is a 3x3 matrix with the (2,3) coupling exactly zero.
    pub fn is_doorway(&self) -> bool {
        self.n == 3 && self.get(1, 2) == Complex64::new(0.0, 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }
}

fn expect_len(levels: &LevelSet, n: usize) -> Result<()> {
    if levels.len() != n {
        return Err(Error::dimension(format!("N = {n}"), levels.len()));
    }
    Ok(())
}

pub fn build_two_level(levels: &LevelSet, coupling: &Coupling) -> Result<ModelMatrix> {
    expect_len(levels, 2)?;
    let l = levels.levels();
    let omega = coupling.between(l[0].e, l[1].e);
    ModelMatrix::from_upper(2, |i, j| if i == j { l[i].epsilon() } else { omega })
}

/// PT gain/loss pair. Balanced: `diag(e - i gamma/2, e + i gamma/2)`;
/// lossy variant: `diag(e - i gamma/2, e)`. Off-diagonal `w`.
pub fn build_pt(e: f64, gamma: f64, w: f64, lossy_variant: bool) -> Result<ModelMatrix> {
    let first = Complex64::new(e, -0.5 * gamma);
    let second = if lossy_variant {
        Complex64::new(e, 0.0)
    } else {
        Complex64::new(e, 0.5 * gamma)
    };
    ModelMatrix::from_upper(2, |i, j| match (i, j) {
        (0, 0) => first,
        (1, 1) => second,
        _ => Complex64::new(w, 0.0),
    })
}

/// Three levels where level 1 mediates all coupling; `omega_23 = 0` exactly.
pub fn build_three_level_doorway(levels: &LevelSet, coupling: &Coupling) -> Result<ModelMatrix> {
    expect_len(levels, 3)?;
    let l = levels.levels();
    let w12 = coupling.between(l[0].e, l[1].e);
    let w13 = coupling.between(l[0].e, l[2].e);
    ModelMatrix::from_upper(3, |i, j| match (i, j) {
        (i, j) if i == j => l[i].epsilon(),
        (0, 1) => w12,
        (0, 2) => w13,
        _ => Complex64::new(0.0, 0.0),
    })
}

/// `diag(hb) - i alpha V V^T`.
pub fn build_channel_model(hb_diag: &[f64], channel: &ChannelVector) -> Result<ModelMatrix> {
    let v = channel.v();
    if hb_diag.len() != v.len() {
        return Err(Error::dimension(format!("N = {}", v.len()), hb_diag.len()));
    }
    if hb_diag.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("channel model diagonal"));
    }
    let alpha = channel.alpha();
    ModelMatrix::from_upper(v.len(), |i, j| {
        let hb = if i == j { hb_diag[i] } else { 0.0 };
        Complex64::new(hb, -alpha * v[i] * v[j])
    })
}

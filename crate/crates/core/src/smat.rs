//! Resonance S-matrix line shapes and cross sections `sigma = |1 - S|^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::ComplexValue;

/// Resonance at `energy` with positive width (S-matrix convention, `Gamma > 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub energy: f64,
    pub width: f64,
}

impl Resonance {
    pub fn new(energy: f64, width: f64) -> Result<Self> {
        if !energy.is_finite() || !width.is_finite() {
            return Err(Error::Validation(
                "resonance parameters must be finite".into(),
            ));
        }
        if width <= 0.0 {
            return Err(Error::Validation(format!(
                "resonance width must be > 0, got {width}"
            )));
        }
        Ok(Self { energy, width })
    }

    /// From an eigenvalue `E + (i/2) Gamma` with `Gamma < 0` for decay.
    pub fn from_eigenvalue(lambda: ComplexValue) -> Result<Self> {
        Self::new(lambda.re, -2.0 * lambda.im)
    }

    fn pole_factor(&self, e: f64) -> Complex64 {
        let half = 0.5 * self.width;
        Complex64::new(e - self.energy, half) / Complex64::new(e - self.energy, -half)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineShape {
    pub energies: Vec<f64>,
    pub s_values: Vec<ComplexValue>,
    pub sigma: Vec<f64>,
}

/// Unitary single-resonance form `(E - E1 + i G/2) / (E - E1 - i G/2)`.
pub fn breit_wigner(e: f64, res: &Resonance) -> ComplexValue {
    res.pole_factor(e)
}

/// Additive form `1 + i G / (E - E1 - i G/2)`.
pub fn breit_wigner_additive(e: f64, res: &Resonance) -> ComplexValue {
    let one = Complex64::new(1.0, 0.0);
    one + Complex64::new(0.0, res.width) / Complex64::new(e - res.energy, -0.5 * res.width)
}

pub fn two_resonance_s(e: f64, r1: &Resonance, r2: &Resonance) -> ComplexValue {
    r1.pole_factor(e) * r2.pole_factor(e)
}

pub fn double_pole_s(e: f64, ed: f64, gamma_d: f64) -> ComplexValue {
    let den = Complex64::new(e - ed, -0.5 * gamma_d);
    Complex64::new(1.0, 0.0) + Complex64::new(0.0, 2.0 * gamma_d) / den
        - gamma_d * gamma_d / (den * den)
}

/// S-matrix models exposed on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SModel {
    Single { r1: Resonance },
    Pair { r1: Resonance, r2: Resonance },
    DoublePole { ed: f64, gamma_d: f64 },
}

impl SModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SModel::Single { r1 } => Resonance::new(r1.energy, r1.width).map(|_| ()),
            SModel::Pair { r1, r2 } => {
                Resonance::new(r1.energy, r1.width)?;
                Resonance::new(r2.energy, r2.width).map(|_| ())
            }
            SModel::DoublePole { ed, gamma_d } => Resonance::new(*ed, *gamma_d).map(|_| ()),
        }
    }

    pub fn eval(&self, e: f64) -> ComplexValue {
        match self {
            SModel::Single { r1 } => breit_wigner(e, r1),
            SModel::Pair { r1, r2 } => two_resonance_s(e, r1, r2),
            SModel::DoublePole { ed, gamma_d } => double_pole_s(e, *ed, *gamma_d),
        }
    }

    pub fn line_shape(&self, energies: &[f64]) -> Result<LineShape> {
        self.validate()?;
        let s: Vec<ComplexValue> = energies.iter().map(|&e| self.eval(e)).collect();
        cross_section(energies, &s)
    }
}

/// `sigma = |1 - S|^2`, with the proportionality constant fixed to one.
pub fn cross_section(energies: &[f64], s_values: &[ComplexValue]) -> Result<LineShape> {
    if energies.is_empty() {
        return Err(Error::Validation(
            "cross section needs a nonempty grid".into(),
        ));
    }
    if energies.len() != s_values.len() {
        return Err(Error::dimension(
            format!("{} S values", energies.len()),
            s_values.len(),
        ));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(LineShape {
        energies: energies.to_vec(),
        s_values: s_values.to_vec(),
        sigma: s_values.iter().map(|s| (one - s).norm_sqr()).collect(),
    })
}

/// Indices of strict interior local maxima.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&k| values[k] > values[k - 1] && values[k] >= values[k + 1])
        .collect()
}

//! Closed-form eigenvalues: two-level `Z`, PT thresholds, the Cardano solution
//! of the doorway cubic and its triple-crossing limit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::{ComplexValue, ModelMatrix};

/// Default modulus below which a discriminant counts as zero.
pub const DEFAULT_EP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelEigen {
    pub lambda_plus: ComplexValue,
    pub lambda_minus: ComplexValue,
    /// Half the square root of the discriminant.
    pub z: ComplexValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeTag {
    LevelRepulsion,
    WidthBifurcation,
    ExceptionalPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `|D|`, the distance of the discriminant from zero.
    pub detail: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicSolution {
    pub lambdas: [ComplexValue; 3],
    pub r: ComplexValue,
    pub s: ComplexValue,
    pub t: ComplexValue,
    pub p: ComplexValue,
    pub q: ComplexValue,
    pub u: ComplexValue,
    pub v: ComplexValue,
}

fn expect_n(m: &ModelMatrix, n: usize) -> Result<()> {
    if m.n() != n {
        return Err(Error::dimension(format!("N = {n}"), m.n()));
    }
    Ok(())
}

/// `D = (eps1 - eps2)^2 + 4 omega^2`, so that `Z = sqrt(D) / 2`.
pub fn two_level_discriminant(m: &ModelMatrix) -> Result<ComplexValue> {
    expect_n(m, 2)?;
    let d = m.get(0, 0) - m.get(1, 1);
    let w = m.get(0, 1);
    Ok(d * d + 4.0 * w * w)
}

pub fn two_level_eigenvalues(m: &ModelMatrix) -> Result<TwoLevelEigen> {
    let z = 0.5 * two_level_discriminant(m)?.sqrt();
    let mean = 0.5 * (m.get(0, 0) + m.get(1, 1));
    Ok(TwoLevelEigen {
        lambda_plus: mean + z,
        lambda_minus: mean - z,
        z,
    })
}

/// Regime of a two-level matrix from its discriminant.
///
/// Real `D > 0` splits the energies (level repulsion), real `D < 0` splits the
/// widths (width bifurcation). For complex `D` the dominant part of `Z` decides.
pub fn classify_two_level(m: &ModelMatrix, tolerance: f64) -> Result<Regime> {
    let d = two_level_discriminant(m)?;
    let detail = d.norm();
    let tag = if detail <= tolerance {
        RegimeTag::ExceptionalPoint
    } else {
        let z = d.sqrt();
        if z.re.abs() >= z.im.abs() {
            RegimeTag::LevelRepulsion
        } else {
            RegimeTag::WidthBifurcation
        }
    };
    Ok(Regime { tag, detail })
}

/// Real discriminant of the PT pair: `4w^2 - gamma^2` (balanced) or
/// `4w^2 - gamma^2/4` (lossy), evaluated in factored form so the threshold
/// `2|w| = |gamma|` gives exactly zero.
pub fn pt_discriminant(gamma: f64, w: f64, lossy_variant: bool) -> f64 {
    let g = if lossy_variant { 0.5 * gamma } else { gamma };
    let tw = 2.0 * w;
    (tw - g) * (tw + g)
}

pub fn pt_eigenvalues(e: f64, gamma: f64, w: f64, lossy_variant: bool) -> TwoLevelEigen {
    let disc = Complex64::new(pt_discriminant(gamma, w, lossy_variant), 0.0);
    let z = 0.5 * disc.sqrt();
    let center = if lossy_variant {
        Complex64::new(e, -0.25 * gamma)
    } else {
        Complex64::new(e, 0.0)
    };
    TwoLevelEigen {
        lambda_plus: center + z,
        lambda_minus: center - z,
        z,
    }
}

/// Asymptotic lossy-variant modes for large `gamma`: `(e, e - i gamma/2)`.
pub fn pt_large_gamma_limit(e: f64, gamma: f64) -> (ComplexValue, ComplexValue) {
    (Complex64::new(e, 0.0), Complex64::new(e, -0.5 * gamma))
}

/// `Z` from the expanded form with the width difference written out.
pub fn mixed_sign_z(m: &ModelMatrix) -> Result<ComplexValue> {
    expect_n(m, 2)?;
    let (e1, e2) = (m.get(0, 0).re, m.get(1, 1).re);
    let (g1, g2) = (2.0 * m.get(0, 0).im, 2.0 * m.get(1, 1).im);
    let w = m.get(0, 1);
    let de = e1 - e2;
    let dg = g1 - g2;
    let inner = Complex64::new(de * de - 0.25 * dg * dg, de * dg) + 4.0 * w * w;
    Ok(0.5 * inner.sqrt())
}

/// Coefficients `(R, S, T)` of `lambda^3 + R lambda^2 + S lambda + T` for a
/// doorway matrix (`omega_23 = 0`).
pub fn doorway_coefficients(m: &ModelMatrix) -> Result<(ComplexValue, ComplexValue, ComplexValue)> {
    expect_n(m, 3)?;
    if !m.is_doorway() {
        return Err(Error::Structure(
            "cardano_eigenvalues needs omega_23 = 0".into(),
        ));
    }
    let (e1, e2, e3) = (m.get(0, 0), m.get(1, 1), m.get(2, 2));
    let w12 = m.get(0, 1) * m.get(0, 1);
    let w13 = m.get(0, 2) * m.get(0, 2);
    let r = -(e1 + e2 + e3);
    let s = e1 * e2 + e1 * e3 + e2 * e3 - w12 - w13;
    let t = w12 * e3 + w13 * e2 - e1 * e2 * e3;
    Ok((r, s, t))
}

pub fn cardano_eigenvalues(m: &ModelMatrix) -> Result<CubicSolution> {
    let (r, s, t) = doorway_coefficients(m)?;
    let p = (3.0 * s - r * r) / 3.0;
    let q = 2.0 * r * r * r / 27.0 - r * s / 3.0 + t;
    let shift = -r / 3.0;
    let zero = Complex64::new(0.0, 0.0);

    let delta = (p / 3.0).powu(3) + (q / 2.0).powu(2);
    let root = delta.sqrt();
    let (plus, minus) = (-q / 2.0 + root, -q / 2.0 - root);
    let w = if plus.norm() >= minus.norm() {
        plus
    } else {
        minus
    };
    let u = if w == zero { zero } else { w.cbrt() };

    // p and q at the level of their own rounding error count as zero
    let p_noise = 8.0 * f64::EPSILON * (r.norm_sqr() + s.norm());
    let q_noise = 8.0 * f64::EPSILON * (r.norm().powi(3) + (r * s).norm() + t.norm());
    let triple = p.norm() <= p_noise && q.norm() <= q_noise;

    let scale = 1f64.max(p.norm()).max(q.norm()).cbrt();
    let floor = 1e-14 * scale;
    if triple || u.norm() < floor {
        if triple || p.norm() <= floor * floor {
            return Ok(CubicSolution {
                lambdas: [shift; 3],
                r,
                s,
                t,
                p,
                q,
                u: zero,
                v: zero,
            });
        }
        return Err(Error::BranchDegeneracy {
            u_abs: u.norm(),
            floor,
        });
    }
    let v = -p / (3.0 * u);
    let i_sqrt3 = Complex64::new(0.0, 3f64.sqrt());
    let half_sum = -(u + v) / 2.0;
    let half_diff = (u - v) / 2.0 * i_sqrt3;
    Ok(CubicSolution {
        lambdas: [
            u + v + shift,
            half_sum + shift + half_diff,
            half_sum + shift - half_diff,
        ],
        r,
        s,
        t,
        p,
        q,
        u,
        v,
    })
}

/// Eigenvalues on the `v = -u` family: `(-R/3, -R/3 + i u sqrt3, -R/3 - i u sqrt3)`.
pub fn triple_crossing_limit(eps: [ComplexValue; 3], u: ComplexValue) -> [ComplexValue; 3] {
    let center = (eps[0] + eps[1] + eps[2]) / 3.0;
    let split = Complex64::new(0.0, 3f64.sqrt()) * u;
    [center, center + split, center - split]
}

/// `|lambda^3 + R lambda^2 + S lambda + T|`.
pub fn cubic_residual(sol: &CubicSolution, lambda: ComplexValue) -> f64 {
    (((lambda + sol.r) * lambda + sol.s) * lambda + sol.t).norm()
}

//! Declarative parameter sweeps, the JSON config format and the preset catalog.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::{
    build_channel_model, build_pt, build_three_level_doorway, build_two_level, ChannelVector,
    Coupling, Level, LevelSet, ModelMatrix,
};

pub const DEFAULT_POINTS: usize = 2001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelKind {
    TwoLevel,
    PtBalanced,
    PtLossy,
    ThreeDoorway,
    NChannel,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// `c + m x + m2 y + cos * cos(y) + sin * sin(y)` for sweep variable `x` and
/// secondary parameter `y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Affine {
    pub c: f64,
    #[serde(default)]
    pub m: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub m2: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub cos: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub sin: f64,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }

    pub fn linear(c: f64, m: f64) -> Self {
        Self {
            c,
            m,
            ..Self::default()
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut v = self.c + self.m * x;
        if self.m2 != 0.0 {
            v += self.m2 * y;
        }
        if self.cos != 0.0 {
            v += self.cos * y.cos();
        }
        if self.sin != 0.0 {
            v += self.sin * y.sin();
        }
        v
    }

    fn is_finite(&self) -> bool {
        [self.c, self.m, self.m2, self.cos, self.sin]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// Trajectory of one unperturbed level; `gamma` is the full signed width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub e: Affine,
    pub gamma: Affine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default)]
    pub gaussian: bool,
}

impl CouplingSpec {
    pub fn omega(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Second parameter held at `value` during a sweep; `range` bounds the
/// two-parameter EP search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Secondary {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub v: Vec<f64>,
    pub alpha: Affine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    pub model_kind: ModelKind,
    /// For PT kinds a single level `(e, gamma_1)`; the partner gets `-gamma_1`
    /// (balanced) or zero width (lossy). For `N_CHANNEL` the `e` values are the
    /// diagonal of `H^B` and `gamma` must be zero.
    pub levels: Vec<LevelSpec>,
    pub coupling: CouplingSpec,
    pub sweep: SweepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<Secondary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn label(&self) -> &str {
        self.id.as_deref().unwrap_or("scenario")
    }

    /// Number of eigenvalues produced.
    pub fn dimension(&self) -> usize {
        match self.model_kind {
            ModelKind::PtBalanced | ModelKind::PtLossy => 2,
            _ => self.levels.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        let sw = &self.sweep;
        if sw.points < 2 {
            return bad(format!("sweep.points must be >= 2, got {}", sw.points));
        }
        if !sw.start.is_finite() || !sw.stop.is_finite() || sw.start >= sw.stop {
            return bad(format!(
                "sweep needs finite start < stop, got [{}, {}]",
                sw.start, sw.stop
            ));
        }
        if sw.param.is_empty() {
            return bad("sweep.param must be named".into());
        }
        if self
            .levels
            .iter()
            .any(|l| !l.e.is_finite() || !l.gamma.is_finite())
        {
            return bad("level trajectory coefficients must be finite".into());
        }
        if !self.coupling.re.is_finite() || !self.coupling.im.is_finite() {
            return bad("coupling must be finite".into());
        }
        if let Some(sec) = &self.secondary {
            if !sec.value.is_finite() {
                return bad("secondary.value must be finite".into());
            }
            if let Some([lo, hi]) = sec.range {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return bad("secondary.range must be finite and ordered".into());
                }
            }
        }
        let n = self.levels.len();
        match self.model_kind {
            ModelKind::TwoLevel if n != 2 => bad(format!("TWO_LEVEL needs 2 levels, got {n}")),
            ModelKind::ThreeDoorway if n != 3 => {
                bad(format!("THREE_DOORWAY needs 3 levels, got {n}"))
            }
            ModelKind::PtBalanced | ModelKind::PtLossy => {
                if n != 1 {
                    return bad(format!("PT kinds take 1 level, got {n}"));
                }
                if self.coupling.im != 0.0 || self.coupling.gaussian {
                    return bad("PT coupling w must be real and unmodulated".into());
                }
                Ok(())
            }
            ModelKind::NChannel => {
                let Some(ch) = &self.channel else {
                    return bad("N_CHANNEL needs a channel block".into());
                };
                if n < 2 || ch.v.len() != n {
                    return bad(format!(
                        "N_CHANNEL needs N >= 2 levels and |v| = N, got {n} and {}",
                        ch.v.len()
                    ));
                }
                if self.levels.iter().any(|l| l.gamma != Affine::default()) {
                    return bad("N_CHANNEL levels carry no gamma".into());
                }
                if !ch.alpha.is_finite() || ch.v.iter().any(|x| !x.is_finite()) {
                    return bad("channel must be finite".into());
                }
                if ch.v.iter().all(|&x| x == 0.0) {
                    return bad("channel vector needs a nonzero amplitude".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn secondary_value(&self) -> f64 {
        self.secondary.as_ref().map_or(0.0, |s| s.value)
    }

    /// Evenly spaced sweep grid with both endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        linspace(self.sweep.start, self.sweep.stop, self.sweep.points)
    }

    pub fn with_points(&self, points: usize) -> Scenario {
        let mut s = self.clone();
        s.sweep.points = points;
        s
    }

    pub fn matrix_at(&self, x: f64) -> Result<ModelMatrix> {
        self.matrix_at2(x, self.secondary_value())
    }

    /// Matrix at sweep value `x` and secondary value `y`.
    pub fn matrix_at2(&self, x: f64, y: f64) -> Result<ModelMatrix> {
        let level = |l: &LevelSpec| Level::new(l.e.eval(x, y), l.gamma.eval(x, y));
        match self.model_kind {
            ModelKind::TwoLevel | ModelKind::ThreeDoorway => {
                let ls = LevelSet::new(self.levels.iter().map(level).collect())?;
                let cp = Coupling {
                    omega: self.coupling.omega(),
                    gaussian_modulated: self.coupling.gaussian,
                };
                if self.model_kind == ModelKind::TwoLevel {
                    build_two_level(&ls, &cp)
                } else {
                    build_three_level_doorway(&ls, &cp)
                }
            }
            ModelKind::PtBalanced | ModelKind::PtLossy => {
                let l = level(&self.levels[0]);
                build_pt(
                    l.e,
                    -l.gamma,
                    self.coupling.re,
                    self.model_kind == ModelKind::PtLossy,
                )
            }
            ModelKind::NChannel => {
                let ch = self
                    .channel
                    .as_ref()
                    .ok_or_else(|| Error::Validation("N_CHANNEL needs a channel block".into()))?;
                let hb: Vec<f64> = self.levels.iter().map(|l| l.e.eval(x, y)).collect();
                build_channel_model(&hb, &ChannelVector::new(ch.v.clone(), ch.alpha.eval(x, y))?)
            }
        }
    }
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    let last = (points - 1) as f64;
    (0..points)
        .map(|k| {
            if k + 1 == points {
                stop
            } else {
                start + (stop - start) * (k as f64 / last)
            }
        })
        .collect()
}

fn level(e: Affine, gamma: Affine) -> LevelSpec {
    LevelSpec { e, gamma }
}

fn sweep(param: &str, start: f64, stop: f64) -> SweepSpec {
    SweepSpec {
        param: param.into(),
        start,
        stop,
        points: DEFAULT_POINTS,
    }
}

fn coupling(re: f64, im: f64, gaussian: bool) -> CouplingSpec {
    CouplingSpec { re, im, gaussian }
}

fn preset(
    id: &str,
    figure: &str,
    kind: ModelKind,
    levels: Vec<LevelSpec>,
    cp: CouplingSpec,
    sw: SweepSpec,
) -> Scenario {
    Scenario {
        id: Some(id.into()),
        figure: Some(figure.into()),
        model_kind: kind,
        levels,
        coupling: cp,
        sweep: sw,
        secondary: None,
        channel: None,
    }
}

fn with_secondary(mut s: Scenario, name: &str, value: f64, range: Option<[f64; 2]>) -> Scenario {
    s.secondary = Some(Secondary {
        name: name.into(),
        value,
        range,
    });
    s
}

/// Two levels `e1 = 1 - a/2`, `e2 = a` with the given half-widths.
fn part1_fig1(id: &str, figure: &str, g1_half: f64, omega: Complex64) -> Scenario {
    preset(
        id,
        figure,
        ModelKind::TwoLevel,
        vec![
            level(Affine::linear(1.0, -0.5), Affine::constant(2.0 * g1_half)),
            level(Affine::linear(0.0, 1.0), Affine::constant(2.0 * -0.6)),
        ],
        coupling(omega.re, omega.im, false),
        sweep("a", 0.5, 5.0 / 6.0),
    )
}

/// `e1 = 2/3`, `e2 = 2/3 + d`.
fn part1_d_sweep(id: &str, figure: &str, g_half: (f64, f64), omega: Complex64) -> Scenario {
    preset(
        id,
        figure,
        ModelKind::TwoLevel,
        vec![
            level(
                Affine::constant(2.0 / 3.0),
                Affine::constant(2.0 * g_half.0),
            ),
            level(
                Affine::linear(2.0 / 3.0, 1.0),
                Affine::constant(2.0 * g_half.1),
            ),
        ],
        coupling(omega.re, omega.im, false),
        sweep("d", -1.0, 1.0),
    )
}

fn part1_pt(id: &str, figure: &str, kind: ModelKind) -> Scenario {
    preset(
        id,
        figure,
        kind,
        vec![level(
            Affine::constant(0.5),
            Affine::linear(0.0, 2.0 * -0.05),
        )],
        coupling(0.05, 0.0, false),
        sweep("a", -2.5, 2.5),
    )
}

fn part1_fig4(id: &str, figure: &str, balanced: bool) -> Scenario {
    let g2 = if balanced {
        Affine::linear(0.0, 2.0 * 0.05)
    } else {
        Affine::constant(0.0)
    };
    preset(
        id,
        figure,
        ModelKind::TwoLevel,
        vec![
            level(Affine::constant(0.5), Affine::linear(0.0, 2.0 * -0.05)),
            level(Affine::constant(0.495), g2),
        ],
        coupling(0.05, 0.0, false),
        sweep("a", -2.5, 2.5),
    )
}

fn part1_fig11(id: &str, figure: &str, g2_half: f64, omega: Complex64) -> Scenario {
    preset(
        id,
        figure,
        ModelKind::TwoLevel,
        vec![
            level(Affine::linear(1.0, -0.5), Affine::constant(2.0 * -0.05)),
            level(Affine::linear(0.0, 0.5), Affine::constant(2.0 * g2_half)),
        ],
        coupling(omega.re, omega.im, false),
        sweep("a", 0.5, 1.5),
    )
}

/// `e1 = 1 - a/2`, `e2 = a`, optional `e3 = -1/3 + 3a/2`, Gaussian coupling.
fn part2_a_sweep(id: &str, figure: &str, omega: Complex64, g3_half: Option<f64>) -> Scenario {
    let mut levels = vec![
        level(Affine::linear(1.0, -0.5), Affine::constant(2.0 * -0.495)),
        level(Affine::linear(0.0, 1.0), Affine::constant(2.0 * -0.495)),
    ];
    let kind = match g3_half {
        Some(g) => {
            levels.push(level(
                Affine::linear(-1.0 / 3.0, 1.5),
                Affine::constant(2.0 * g),
            ));
            ModelKind::ThreeDoorway
        }
        None => ModelKind::TwoLevel,
    };
    preset(
        id,
        figure,
        kind,
        levels,
        coupling(omega.re, omega.im, true),
        sweep("a", 0.5, 5.0 / 6.0),
    )
}

/// s-sweep at fixed `a` with `e3 = s - 1/3 + 3a/2`.
fn part2_s_sweep(id: &str, figure: &str, omega: Complex64, g3_half: f64, a: f64) -> Scenario {
    let levels = vec![
        level(
            Affine {
                c: 1.0,
                m2: -0.5,
                ..Affine::default()
            },
            Affine::constant(2.0 * -0.495),
        ),
        level(
            Affine {
                m2: 1.0,
                ..Affine::default()
            },
            Affine::constant(2.0 * -0.495),
        ),
        level(
            Affine {
                c: -1.0 / 3.0,
                m: 1.0,
                m2: 1.5,
                ..Affine::default()
            },
            Affine::constant(2.0 * g3_half),
        ),
    ];
    let s = preset(
        id,
        figure,
        ModelKind::ThreeDoorway,
        levels,
        coupling(omega.re, omega.im, true),
        sweep("s", -0.1, 0.1),
    );
    with_secondary(s, "a", a, None)
}

fn part2_gain_loss(
    id: &str,
    figure: &str,
    gammas: [Affine; 3],
    e3: Affine,
    sw: SweepSpec,
) -> Scenario {
    preset(
        id,
        figure,
        ModelKind::ThreeDoorway,
        vec![
            level(Affine::constant(0.5), gammas[0]),
            level(Affine::constant(0.5), gammas[1]),
            level(e3, gammas[2]),
        ],
        coupling(0.05, 0.0, false),
        sw,
    )
}

/// Every preset, in catalog order.
pub fn presets() -> Vec<Scenario> {
    let c = Complex64::new;
    let w_diag = 0.05 * FRAC_1_SQRT_2;
    let loss = Affine::linear(0.0, 2.0 * -0.05);
    let gain = Affine::linear(0.0, 2.0 * 0.05);
    // at fixed a in the s-sweep: gamma_i = c + m2 * a
    let loss_a = Affine {
        m2: 2.0 * -0.05,
        ..Affine::default()
    };
    let gain_a = Affine {
        m2: 2.0 * 0.05,
        ..Affine::default()
    };

    let mut out = vec![
        part1_fig1("part1-fig1ab", "Part I, Fig. 1(a,b)", -0.5, c(0.05, 0.0)),
        part1_fig1(
            "part1-fig1cd",
            "Part I, Fig. 1(c,d)",
            -0.5505,
            c(0.025, 0.025),
        ),
        part1_fig1("part1-fig1ef", "Part I, Fig. 1(e,f)", -0.6, c(0.0, 0.05)),
        part1_fig1("part1-fig2ab", "Part I, Fig. 2(a,b)", -0.5, c(0.05, 0.0)),
        part1_fig1(
            "part1-fig2cd",
            "Part I, Fig. 2(c,d)",
            -0.5505,
            c(0.025, 0.025),
        ),
        part1_fig1("part1-fig2ef", "Part I, Fig. 2(e,f)", -0.6, c(0.0, 0.05)),
        part1_d_sweep(
            "part1-fig1a",
            "Part I, Fig. 1a",
            (-0.5, -0.5999),
            c(0.05, 0.0),
        ),
        part1_d_sweep(
            "part1-fig1b",
            "Part I, Fig. 1b (left)",
            (-0.5, -0.57),
            c(w_diag, w_diag),
        ),
        part1_d_sweep(
            "part1-fig1b-right",
            "Part I, Fig. 1b (right)",
            (-0.5, -0.5),
            c(0.0, 0.05),
        ),
    ];

    let mut theta = preset(
        "part1-fig1ab-theta",
        "Part I, Fig. 1(a,b), theta family",
        ModelKind::TwoLevel,
        vec![
            level(
                Affine {
                    c: 1.0,
                    m: -0.5,
                    cos: 0.05,
                    ..Affine::default()
                },
                Affine::constant(2.0 * -0.5),
            ),
            level(
                Affine {
                    c: 0.0,
                    m: 1.0,
                    sin: 0.05,
                    ..Affine::default()
                },
                Affine::constant(2.0 * -0.6),
            ),
        ],
        coupling(0.05, 0.0, false),
        sweep("a", 0.5, 5.0 / 6.0),
    );
    theta = with_secondary(theta, "theta", 0.0, Some([0.0, PI]));
    out.push(theta);

    out.extend([
        part1_pt("part1-fig3", "Part I, Fig. 3 (left)", ModelKind::PtBalanced),
        part1_pt(
            "part1-fig3-lossy",
            "Part I, Fig. 3 (right)",
            ModelKind::PtLossy,
        ),
        part1_fig4("part1-fig4", "Part I, Fig. 4 (left)", true),
        part1_fig4("part1-fig4-right", "Part I, Fig. 4 (right)", false),
        part1_fig11("part1-fig11", "Part I, Fig. 11 (left)", 0.05, c(0.05, 0.0)),
        part1_fig11(
            "part1-fig11-right",
            "Part I, Fig. 11 (right)",
            0.0205,
            c(w_diag, w_diag),
        ),
        part2_a_sweep(
            "part2-fig5-n2",
            "Part II, Fig. 5(a,c,e)",
            c(0.01, 0.0),
            None,
        ),
        part2_a_sweep(
            "part2-fig5",
            "Part II, Fig. 5(b,d,f)",
            c(0.01, 0.0),
            Some(-0.485),
        ),
        part2_a_sweep(
            "part2-fig6-n2",
            "Part II, Fig. 6(a,c,e)",
            c(0.0, 0.01),
            None,
        ),
        part2_a_sweep(
            "part2-fig6",
            "Part II, Fig. 6(b,d,f)",
            c(0.0, 0.01),
            Some(-0.4853),
        ),
        part2_s_sweep(
            "part2-fig7",
            "Part II, Fig. 7 (left, a = a_cr)",
            c(0.01, 0.0),
            -0.485,
            2.0 / 3.0,
        ),
        part2_s_sweep(
            "part2-fig7-a1",
            "Part II, Fig. 7 (mid, a = a_1)",
            c(0.01, 0.0),
            -0.485,
            0.6539,
        ),
        part2_s_sweep(
            "part2-fig7-a2",
            "Part II, Fig. 7 (right, a = a_2)",
            c(0.01, 0.0),
            -0.485,
            0.675,
        ),
        part2_s_sweep(
            "part2-fig8",
            "Part II, Fig. 8 (left, a = a_cr)",
            c(0.0, 0.01),
            -0.4853,
            2.0 / 3.0,
        ),
        part2_s_sweep(
            "part2-fig8-a1",
            "Part II, Fig. 8 (mid, a = a_1)",
            c(0.0, 0.01),
            -0.4853,
            0.6539,
        ),
        part2_s_sweep(
            "part2-fig8-a2",
            "Part II, Fig. 8 (right, a = a_2)",
            c(0.0, 0.01),
            -0.4853,
            0.6774,
        ),
        part2_gain_loss(
            "part2-fig9",
            "Part II, Fig. 9 (left)",
            [loss, gain, gain],
            Affine::constant(0.487),
            sweep("a", -5.0, 5.0),
        ),
        with_secondary(
            part2_gain_loss(
                "part2-fig9-s",
                "Part II, Fig. 9 (right)",
                [loss_a, gain_a, gain_a],
                Affine::linear(0.487, 1.0),
                sweep("s", -0.2, 0.2),
            ),
            "a",
            0.0,
            None,
        ),
        part2_gain_loss(
            "part2-fig10",
            "Part II, Fig. 10 (left)",
            [loss, gain, Affine::constant(2.0 * 0.05)],
            Affine::constant(0.5),
            sweep("a", -5.0, 5.0),
        ),
        part2_gain_loss(
            "part2-fig10-right",
            "Part II, Fig. 10 (right)",
            [loss, Affine::constant(0.0), Affine::constant(0.0)],
            Affine::constant(0.5),
            sweep("a", -5.0, 5.0),
        ),
    ]);

    let mut channel = preset(
        "part2-channel",
        "Part II, single-channel model",
        ModelKind::NChannel,
        [0.0, 0.1, 0.2, 0.3]
            .iter()
            .map(|&e| level(Affine::constant(e), Affine::default()))
            .collect(),
        coupling(0.0, 0.0, false),
        sweep("alpha", 0.0, 1.0),
    );
    channel.channel = Some(ChannelSpec {
        v: vec![1.0, 0.9, 0.8, 0.7],
        alpha: Affine::linear(0.0, 1.0),
    });
    out.push(channel);
    out
}

pub fn find_preset(id: &str) -> Result<Scenario> {
    presets()
        .into_iter()
        .find(|s| s.id.as_deref() == Some(id))
        .ok_or_else(|| Error::Validation(format!("unknown scenario id '{id}'")))
}

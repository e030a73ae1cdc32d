//! Acceptance criteria, one PASS/FAIL line each. Tolerances are pinned here.
//!
//! Exits 0 after reporting so the rest of `cargo test` still runs; pass
//! `-- --strict` to exit 1 when any criterion fails.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::time::Instant;

use itertools::Itertools;
use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use openqs::closedform::{
    cardano_eigenvalues, pt_discriminant, pt_eigenvalues, two_level_eigenvalues,
};
use openqs::eploc::{find_eps_1d, EpOptions};
use openqs::ham::{build_channel_model, build_pt, ChannelVector, ModelMatrix};
use openqs::scenario::{find_preset, linspace, presets, Scenario};
use openqs::smat::{breit_wigner, double_pole_s, local_maxima, two_resonance_s, Resonance, SModel};
use openqs::spectral::{
    bilinear, eigendecompose, eigenvalues, eigenvector_angle, mixing_coefficients,
    phase_aligned_distance, phase_trajectory,
};
use openqs::sweep::{run_sweep, SweepTable};

const C1_EIG_TOL: f64 = 1e-9;
const C1_TIME_LIMIT_S: f64 = 10.0;
const C2_FIG1_TOL: f64 = 1e-5;
const C2_FIG9_TOL: f64 = 0.1;
const C3_TWO_LEVEL: (f64, f64) = (0.02, 1e-10);
const C3_THREE_LEVEL: (f64, f64) = (0.030, 0.003);
const C4_W: f64 = 0.05;
const C5_BIORTH_TOL: f64 = 1e-8;
const C5_EP_RIGIDITY: f64 = 0.2;
const C5_EP_MIXING: f64 = 10.0;
const C6_COS: f64 = 0.999;
const C6_DIST: f64 = 0.05;
const C7_JUMP_TOL: f64 = 0.05;
const C8_UNITARITY: f64 = 1e-12;
const C8_COALESCENCE: f64 = 1e-12;
const C9_TRACE_TOL: f64 = 1e-12;
const C9_GROWTH: (f64, f64) = (90.0, 110.0);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn matched(a: &[C], b: &[C]) -> f64 {
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

fn uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn criterion_1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let start = Instant::now();
    let mut worst2: f64 = 0.0;
    let mut worst3: f64 = 0.0;
    for _ in 0..1000 {
        let mut z = || C::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0));
        let (d1, d2, w) = (z(), z(), z());
        let m = ModelMatrix::from_upper(2, |i, j| match (i, j) {
            (0, 0) => d1,
            (1, 1) => d2,
            _ => w,
        })
        .unwrap();
        let cf = two_level_eigenvalues(&m).unwrap();
        let num = eigenvalues(&m).unwrap();
        worst2 = worst2.max(matched(&[cf.lambda_plus, cf.lambda_minus], &num));
    }
    for _ in 0..1000 {
        let mut z = || C::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0));
        let (d1, d2, d3, w12, w13) = (z(), z(), z(), z(), z());
        let m = ModelMatrix::from_upper(3, |i, j| match (i, j) {
            (0, 0) => d1,
            (1, 1) => d2,
            (2, 2) => d3,
            (0, 1) => w12,
            (0, 2) => w13,
            _ => C::new(0.0, 0.0),
        })
        .unwrap();
        let cf = cardano_eigenvalues(&m).unwrap();
        let num = eigenvalues(&m).unwrap();
        worst3 = worst3.max(matched(&cf.lambdas, &num));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst2 < C1_EIG_TOL && worst3 < C1_EIG_TOL && secs < C1_TIME_LIMIT_S,
        format!(
            "max mismatch 2x2 {worst2:.2e}, doorway {worst3:.2e} (tol {C1_EIG_TOL:e}); {secs:.2} s (limit {C1_TIME_LIMIT_S} s)"
        ),
    )
}

fn ep_params(id: &str) -> Vec<f64> {
    let s = find_preset(id).unwrap();
    let family = |x: f64| s.matrix_at(x);
    find_eps_1d(&family, &s.grid(), &EpOptions::default())
        .unwrap()
        .eps()
        .map(|l| l.params[0])
        .collect()
}

fn all_within(found: &[f64], want: &[f64], tol: f64) -> bool {
    found.len() == want.len() && found.iter().zip(want).all(|(f, w)| (f - w).abs() <= tol)
}

fn criterion_2() -> Outcome {
    let f1 = ep_params("part1-fig1ab");
    let f2 = ep_params("part1-fig1ef");
    let f9 = ep_params("part2-fig9");
    let fig9 = find_preset("part2-fig9").unwrap();
    let family = |x: f64| fig9.matrix_at(x);
    let minima: Vec<String> = find_eps_1d(&family, &fig9.grid(), &EpOptions::default())
        .unwrap()
        .locations
        .iter()
        .map(|l| format!("{:.4} ({:?}, gap {:.1e})", l.params[0], l.kind, l.gap))
        .collect();
    let ok1 = all_within(&f1, &[2.0 / 3.0], C2_FIG1_TOL);
    let ok2 = all_within(&f2, &[0.6, 11.0 / 15.0], C2_FIG1_TOL);
    let ok9 = all_within(&f9, &[-4.0, -2.0, 2.0, 4.0], C2_FIG9_TOL);
    outcome(
        ok1 && ok2 && ok9,
        format!(
            "fig1ab {f1:.6?} [{}], fig1ef {f2:.6?} [{}], fig9 {f9:.4?} [{}] (want -4,-2,2,4 +/- {C2_FIG9_TOL}; refined minima {minima:?})",
            tag(ok1),
            tag(ok2),
            tag(ok9)
        ),
    )
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISS"
    }
}

fn width_spread(m: &ModelMatrix) -> f64 {
    let im: Vec<f64> = eigenvalues(m).unwrap().iter().map(|l| l.im).collect();
    im.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - im.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn criterion_3() -> Outcome {
    let two = ModelMatrix::from_upper(2, |i, j| {
        if i == j {
            C::new(0.5, -0.495)
        } else {
            C::new(0.0, 0.01)
        }
    })
    .unwrap();
    let s2 = width_spread(&two);
    let s3 = width_spread(
        &find_preset("part2-fig6")
            .unwrap()
            .matrix_at(2.0 / 3.0)
            .unwrap(),
    );
    let ok2 = (s2 - C3_TWO_LEVEL.0).abs() <= C3_TWO_LEVEL.1;
    let ok3 = (s3 - C3_THREE_LEVEL.0).abs() <= C3_THREE_LEVEL.1;
    outcome(
        ok2 && ok3,
        format!(
            "two-level spread {s2:.12} (want {} +/- {:e}), Fig. 6 three-level {s3:.5} (want {} +/- {})",
            C3_TWO_LEVEL.0, C3_TWO_LEVEL.1, C3_THREE_LEVEL.0, C3_THREE_LEVEL.1
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    for k in 0..=400 {
        let g = k as f64 * 5e-4; // gamma from 0 to 0.2; 0.1 lands exactly at k = 200
        for gamma in [g, -g] {
            let d = pt_discriminant(gamma, C4_W, false);
            let e = pt_eigenvalues(0.5, gamma, C4_W, false);
            let expected = if k < 200 {
                d > 0.0 && e.lambda_plus.im == 0.0 && e.lambda_minus.im == 0.0
            } else if k == 200 {
                d == 0.0 && e.lambda_plus == e.lambda_minus
            } else {
                d < 0.0
                    && (e.lambda_plus - e.lambda_minus.conj()).norm() < 1e-15
                    && e.lambda_plus.im != 0.0
            };
            // the numeric route agrees away from the threshold
            let numeric_ok = k == 200 || {
                let num = eigenvalues(&build_pt(0.5, gamma, C4_W, false).unwrap()).unwrap();
                matched(&[e.lambda_plus, e.lambda_minus], &num) < 1e-9
            };
            if !expected || !numeric_ok {
                bad.push(gamma);
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "w = {C4_W}: 802 gamma values in [-0.2, 0.2], {} misclassified {:?}",
            bad.len(),
            bad
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rows = 0usize;
    let mut worst: f64 = 0.0;
    let mut structural = Vec::new();
    let mut ep_checks = Vec::new();
    for s in presets() {
        let id = s.id.clone().unwrap();
        for x in s.grid() {
            let m = s.matrix_at(x).unwrap();
            let sp = eigendecompose(&m).unwrap();
            for i in 0..sp.n() {
                if !(sp.a_norm[i] >= 1.0 - 1e-12
                    && sp.rigidity[i] > 0.0
                    && sp.rigidity[i] <= 1.0 + 1e-12)
                {
                    structural.push(format!("{id}@{x}"));
                }
            }
            if sp.any_near_ep() {
                continue;
            }
            rows += 1;
            for (i, j) in (0..sp.n()).cartesian_product(0..sp.n()) {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((bilinear(&sp.pairs[i].phi, &sp.pairs[j].phi) - want).norm());
            }
        }
        for a in ep_params(&id) {
            let grid = s.grid();
            let x = *grid
                .iter()
                .min_by(|p, q| (*p - a).abs().total_cmp(&(*q - a).abs()))
                .unwrap();
            let m = s.matrix_at(x).unwrap();
            let sp = eigendecompose(&m).unwrap();
            let mix = mixing_coefficients(&sp, &m).unwrap();
            let r_min = sp.rigidity.iter().cloned().fold(f64::INFINITY, f64::min);
            let b_max = mix.magnitudes.iter().flatten().cloned().fold(0.0, f64::max);
            ep_checks.push((id.clone(), a, r_min, b_max));
        }
    }
    let ep_fail: Vec<String> = ep_checks
        .iter()
        .filter(|(_, _, r, b)| !(*r < C5_EP_RIGIDITY && *b > C5_EP_MIXING))
        .map(|(id, a, r, b)| format!("{id}@{a:.6} r={r:.3} |b|={b:.2}"))
        .collect();
    let pass = worst < C5_BIORTH_TOL && structural.is_empty() && ep_fail.is_empty();
    outcome(
        pass,
        format!(
            "{rows} unflagged points, max |<phi_i*|phi_j> - delta| {worst:.2e} (tol {C5_BIORTH_TOL:e}); A>=1, r in (0,1] violations {}; \
             {} EPs checked, {} short of r<{C5_EP_RIGIDITY} & |b|>{C5_EP_MIXING}: {:?}",
            structural.len(),
            ep_checks.len(),
            ep_fail.len(),
            ep_fail
        ),
    )
}

fn criterion_6() -> Outcome {
    let s = find_preset("part1-fig1ab").unwrap();
    let a = ep_params("part1-fig1ab")[0];
    let sp = eigendecompose(&s.matrix_at(a).unwrap()).unwrap();
    let (p1, p2) = (&sp.pairs[0].phi, &sp.pairs[1].phi);
    let cos = eigenvector_angle(p1, p2).unwrap().cos_omega_mag;
    let dist = phase_aligned_distance(p1, p2).unwrap();
    outcome(
        cos > C6_COS && dist < C6_DIST,
        format!("at a = {a:.15}: cos_omega_mag {cos:.12} (> {C6_COS}), phase-aligned distance {dist:.2e} (< {C6_DIST})"),
    )
}

fn criterion_7() -> Outcome {
    let t = run_sweep(&find_preset("part1-fig2ab").unwrap()).unwrap();
    let rows: Vec<_> = t.rows.iter().filter(|r| !r.any_near_ep()).collect();
    let mut lines = Vec::new();
    let mut signs = Vec::new();
    let mut ok = true;
    for k in 0..t.n * t.n {
        let series: Vec<f64> = rows.iter().map(|r| r.theta[k]).collect();
        let jumps = phase_trajectory(&series).jumps;
        let good = jumps.len() == 1 && (jumps[0].magnitude.abs() - FRAC_PI_4).abs() <= C7_JUMP_TOL;
        ok &= good;
        if let Some(j) = jumps.first() {
            signs.push(j.magnitude.signum());
        }
        lines.push(format!(
            "theta_{}_{}: {:?}",
            k / t.n + 1,
            k % t.n + 1,
            jumps
                .iter()
                .map(|j| format!("{:+.4}", j.magnitude))
                .collect::<Vec<_>>()
        ));
    }
    let same = signs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        ok && same,
        format!(
            "part1-fig2ab, jumps > pi/8 = {FRAC_PI_8:.4}, want one of pi/4 +/- {C7_JUMP_TOL} each, same direction: {}",
            lines.join(", ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let grid = linspace(-5.0, 5.0, 10_000);
    let r1 = Resonance::new(0.3, 0.2).unwrap();
    let r2 = Resonance::new(0.5, 0.35).unwrap();
    let (ed, gd) = (0.4, 0.25);
    let mut unitarity: f64 = 0.0;
    let mut coalesced: f64 = 0.0;
    for &e in &grid {
        for s in [
            breit_wigner(e, &r1),
            two_resonance_s(e, &r1, &r2),
            double_pole_s(e, ed, gd),
        ] {
            unitarity = unitarity.max((s.norm() - 1.0).abs());
        }
        let pole = Resonance::new(ed, gd).unwrap();
        coalesced =
            coalesced.max((two_resonance_s(e, &pole, &pole) - double_pole_s(e, ed, gd)).norm());
    }
    let model = SModel::DoublePole { ed, gamma_d: gd };
    let shape = model.line_shape(&grid).unwrap();
    let peaks = local_maxima(&shape.sigma);
    // compare the true maxima, not the grid samples nearest them
    let sigma = |e: f64| (C::new(1.0, 0.0) - model.eval(e)).norm_sqr();
    let heights: Vec<f64> = peaks
        .iter()
        .map(|&k| sigma(golden_max(&sigma, grid[k - 1], grid[k + 1])))
        .collect();
    let unequal = heights.len() == 2 && (heights[0] - heights[1]).abs() > 1e-9 * heights[0];
    outcome(
        unitarity < C8_UNITARITY && coalesced < C8_COALESCENCE && peaks.len() == 2 && unequal,
        format!(
            "max ||S|-1| {unitarity:.1e}, coalesced pair vs double pole {coalesced:.1e}; double-pole sigma maxima at {:?} with heights {:?} (unequal required)",
            peaks.iter().map(|&k| format!("{:.4}", shape.energies[k])).collect::<Vec<_>>(),
            heights.iter().map(|h| format!("{h:.15}")).collect::<Vec<_>>()
        ),
    )
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (x1, x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    0.5 * (lo + hi)
}

fn widths(hb: &[f64], v: &[f64], alpha: f64) -> Vec<f64> {
    let m = build_channel_model(hb, &ChannelVector::new(v.to_vec(), alpha).unwrap()).unwrap();
    let mut w: Vec<f64> = eigenvalues(&m)
        .unwrap()
        .iter()
        .map(|l| -2.0 * l.im)
        .collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

fn criterion_9() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0009);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let hb: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let alpha = uniform(&mut rng, 0.0, 10.0);
        let m = build_channel_model(&hb, &ChannelVector::new(v.clone(), alpha).unwrap()).unwrap();
        let sum_im: f64 = eigenvalues(&m).unwrap().iter().map(|l| l.im).sum();
        let want = -alpha * v.iter().map(|x| x * x).sum::<f64>();
        worst = worst.max((sum_im - want).abs());
    }
    let s = find_preset("part2-channel").unwrap();
    let hb: Vec<f64> = s.levels.iter().map(|l| l.e.c).collect();
    let v = s.channel.as_ref().unwrap().v.clone();
    let (lo, hi) = (widths(&hb, &v, 1.0), widths(&hb, &v, 100.0));
    let ratio = hi[0] / lo[0];
    let others_shrink = (1..hb.len()).all(|k| hi[k] < lo[k]);
    let grows = (C9_GROWTH.0..=C9_GROWTH.1).contains(&ratio);
    outcome(
        worst < C9_TRACE_TOL && grows && others_shrink,
        format!(
            "trace law max error {worst:.1e} (tol {C9_TRACE_TOL:e}); part2-channel alpha 1 -> 100: top width x{ratio:.2} (window {:?}), others {:.3e} -> {:.3e}",
            C9_GROWTH,
            lo[1..].iter().sum::<f64>(),
            hi[1..].iter().sum::<f64>()
        ),
    )
}

fn csv(s: &Scenario) -> String {
    run_sweep(s).map(|t: SweepTable| t.to_csv()).unwrap()
}

fn criterion_10() -> Outcome {
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let mut differing = Vec::new();
    let all = presets();
    for s in &all {
        let a = csv(s);
        let b = csv(s);
        let c = single.install(|| csv(s));
        if a != b || a != c {
            differing.push(s.id.clone().unwrap());
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} presets run 3x (default pool twice, one thread once); differing: {:?}",
            all.len(),
            differing
        ),
    )
}

fn main() {
    let strict = std::env::args().any(|a| a == "--strict");
    let criteria: [Criterion; 10] = [
        ("closed-form/numeric equivalence", criterion_1),
        ("EP locations", criterion_2),
        ("width-bifurcation spread", criterion_3),
        ("PT thresholds", criterion_4),
        ("biorthogonality suite", criterion_5),
        ("EP eigenvector relation", criterion_6),
        ("phase jumps", criterion_7),
        ("S-matrix", criterion_8),
        ("channel trace law and trapping", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if strict && failed > 0 {
        std::process::exit(1);
    }
}

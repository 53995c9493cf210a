//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails. Every tolerance is fixed below.

use std::process::ExitCode;
use std::time::Instant;

use jc_magnus::cli::{cmd_sweep, error_slopes, sweep_rows, RunConfig};
use jc_magnus::hilbert::{anti_hermitian_residual, spectral_norm, unitarity_residual};
use jc_magnus::jc_model::{rotation_chain_residual, verify_bch};
use jc_magnus::magnus::{
    integrals_closed, integrals_quadrature, omega1_closed, omega1_quadrature, omega2_quadrature,
    zeta, zeta_resonance_limit, MagnusTerms,
};
use jc_magnus::observables::{angle_gap, bs_phase_probe, squeezing_report};
use jc_magnus::propagator::{buffered_block, error_report, PropagatorBundle};
use jc_magnus::{AtomLevel, HilbertSpec, ModelParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROTATION_TOL: f64 = 1e-12;
const BCH_TOL: f64 = 1e-12;
const OMEGA1_TOL: f64 = 1e-9;
const OMEGA2_TOL: f64 = 1e-8;
const OMEGA2_SECONDS: f64 = 30.0;
const QUAD_STEPS: usize = 1024;
const IDENTITY_TOL: f64 = 1e-12;
const INTEGRAL_QUAD_TOL: f64 = 1e-8;
const RESONANCE_REL_TOL: f64 = 1e-5;
const STRUCTURE_TOL: f64 = 1e-12;
const UNITARITY_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-10;
const SLOPE1: (f64, f64) = (1.8, 2.2);
const SLOPE2: (f64, f64) = (2.7, 3.3);
const SQUEEZE_VAR_TOL: f64 = 1e-8;
const SQUEEZE_ANGLE_TOL: f64 = 1e-3;
const UNCERTAINTY_SLACK: f64 = 1e-12;
const BS_REL_TOL: f64 = 0.25;
const BS_RATIO: (f64, f64) = (3.2, 4.8);
const BS_STEP_TOL: f64 = 1e-9;
const DRIFT_ERRORS: f64 = 1e-6;
const DRIFT_SQUEEZE: f64 = 1e-9;
const DRIFT_BS_REL: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn params(w: f64, w0: f64, g: f64) -> ModelParams {
    ModelParams::new(w, w0, g).expect("valid parameters")
}

fn spec(n: usize) -> HilbertSpec {
    HilbertSpec::new(n).expect("valid truncation")
}

fn grid() -> Vec<(ModelParams, f64)> {
    let mut points = Vec::new();
    for w0 in [0.5, 0.8, 1.2] {
        for g in [0.01, 0.05, 0.1] {
            for t in [0.5, 1.0, 2.0] {
                points.push((params(1.0, w0, g), t));
            }
        }
    }
    points
}

fn rotation_chain() -> Outcome {
    let p = params(1.0, 0.8, 0.05);
    let s = spec(10);
    let worst = [0.0, 0.3, 1.0, 2.5, 7.0]
        .iter()
        .map(|&t| rotation_chain_residual(&p, &s, t))
        .fold(0.0, f64::max);
    outcome(
        worst <= ROTATION_TOL,
        format!("max relative residual {worst:.3e} (tol {ROTATION_TOL:.0e})"),
    )
}

fn bch() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let s = spec(16);
    let mut worst: f64 = 0.0;
    let mut pairs = Vec::new();
    for _ in 0..3 {
        let w = rng.random_range(0.2..5.0);
        let t = rng.random_range(0.0..10.0);
        worst = worst.max(verify_bch(&params(w, 0.8, 0.05), &s, t));
        pairs.push(format!("({w:.3}, {t:.3})"));
    }
    outcome(
        worst <= BCH_TOL,
        format!(
            "max residual {worst:.3e} at (omega, t) = {} (tol {BCH_TOL:.0e})",
            pairs.join(" ")
        ),
    )
}

fn omega1_oracle() -> Outcome {
    let s = spec(10);
    let worst = grid()
        .iter()
        .map(|(p, t)| {
            let q = omega1_quadrature(p, &s, *t, QUAD_STEPS).expect("quadrature");
            spectral_norm(&(omega1_closed(p, &s, *t) - q))
        })
        .fold(0.0, f64::max);
    outcome(
        worst <= OMEGA1_TOL,
        format!("max spectral distance {worst:.3e} over 27 points (tol {OMEGA1_TOL:.0e})"),
    )
}

fn omega2_oracle() -> Outcome {
    let s = spec(10);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (p, t) in grid() {
        let closed = MagnusTerms::closed(&p, &s, t).expect("closed").omega2;
        let quad = omega2_quadrature(&p, &s, t, QUAD_STEPS).expect("quadrature");
        let diff = buffered_block(&closed, &s, 2).unwrap() - buffered_block(&quad, &s, 2).unwrap();
        worst = worst.max(spectral_norm(&diff));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= OMEGA2_TOL && secs <= OMEGA2_SECONDS,
        format!(
            "max buffered distance {worst:.3e} (tol {OMEGA2_TOL:.0e}), {secs:.1} s (limit {OMEGA2_SECONDS} s)"
        ),
    )
}

/// The printed form of `I_5` carries `-2 omega0` in place of `-omega0`.
fn printed_i5(p: &ModelParams, t: f64) -> C64 {
    let (w, w0) = (p.omega(), p.omega0());
    let e = |x: f64| C64::from_polar(1.0, x);
    (e(-2.0 * w * t) * w0 - e(-p.sigma() * t) * w + e(-p.delta() * t) * w - 2.0 * w0)
        / ((w * w - w0 * w0) * w)
}

fn integral_identities() -> Outcome {
    let mut conj: f64 = 0.0;
    let mut real_part: f64 = 0.0;
    let mut quad_gap: f64 = 0.0;
    let mut printed_gap = f64::INFINITY;
    for (p, t) in grid() {
        let c = integrals_closed(&p, t).unwrap();
        let q = integrals_quadrature(&p, t, QUAD_STEPS).unwrap();
        conj = conj.max((c.i5 - c.i2.conj()).norm());
        conj = conj.max((q.i5 - q.i2.conj()).norm());
        real_part = real_part.max(c.i1.re.abs()).max(c.i6.re.abs());
        for (a, b) in [(c.i1, q.i1), (c.i2, q.i2), (c.i5, q.i5), (c.i6, q.i6)] {
            quad_gap = quad_gap.max((a - b).norm());
        }
        printed_gap = printed_gap.min((printed_i5(&p, t) - q.i5).norm());
    }
    let pass = conj <= IDENTITY_TOL && real_part <= IDENTITY_TOL && quad_gap <= INTEGRAL_QUAD_TOL;
    outcome(
        pass,
        format!(
            "|I5 - conj I2| {conj:.3e}, |Re I1|,|Re I6| {real_part:.3e} (tol {IDENTITY_TOL:.0e}); closed vs quadrature {quad_gap:.3e} (tol {INTEGRAL_QUAD_TOL:.0e}); printed '-2 omega0' form of I5 misses quadrature by at least {printed_gap:.3e}, so it is a typo"
        ),
    )
}

fn resonance() -> Outcome {
    let w = 1.0;
    let t = 1.0;
    let limit = zeta_resonance_limit(2.0 * w, t);
    let mut rel: f64 = 0.0;
    for w0 in [w * (1.0 - 1e-6), w * (1.0 + 1e-6)] {
        let (z, _) = zeta(&params(w, w0, 0.05), t);
        rel = rel.max(if z.is_finite() {
            (z - limit).norm() / limit.norm()
        } else {
            f64::INFINITY
        });
    }
    let mut scan_finite = true;
    for k in 0..=4000 {
        let w0 = 0.98 + 0.04 * k as f64 / 4000.0;
        for tt in [0.5, 1.0, 2.0, 20.0] {
            scan_finite &= zeta(&params(w, w0, 0.05), tt).0.is_finite();
        }
    }
    for eps in [1e-7, 1e-8, 1e-9, 1e-12, 0.0] {
        for sign in [-1.0, 1.0] {
            scan_finite &= zeta(&params(w, w * (1.0 + sign * eps), 0.05), t)
                .0
                .is_finite();
        }
    }
    let cfg = RunConfig {
        omega0: vec![0.999, 1.0 - 1e-9, 1.0, 1.0 + 1e-9, 1.001],
        ..RunConfig::default()
    };
    let rows = sweep_rows(&cfg).expect("sweep");
    let rows_finite = rows.iter().all(|r| {
        [
            r.zeta_re,
            r.zeta_im,
            r.err_rwa,
            r.err_magnus1,
            r.err_magnus2,
            r.var_min,
            r.var_max,
        ]
        .iter()
        .all(|x| x.is_finite())
    });
    let printed = (C64::from(1.0) - C64::from_polar(1.0, 2.0 * w * t)) / (w * (w + w));
    outcome(
        rel <= RESONANCE_REL_TOL && scan_finite && rows_finite,
        format!(
            "relative gap to limit {rel:.3e} (tol {RESONANCE_REL_TOL:.0e}); scan finite {scan_finite}; sweep rows finite {rows_finite}; limit {:.6}{:+.6}i, printed limit {:.6}{:+.6}i disagrees with direct quadrature",
            limit.re, limit.im, printed.re, printed.im
        ),
    )
}

fn structure() -> Outcome {
    let s = spec(10);
    let mut anti: f64 = 0.0;
    let mut unit: f64 = 0.0;
    for (p, t) in grid() {
        let terms = MagnusTerms::closed(&p, &s, t).unwrap();
        for m in [&terms.omega1, &terms.omega2] {
            anti = anti.max(anti_hermitian_residual(m) / spectral_norm(m).max(1.0));
        }
        let bundle = PropagatorBundle::new(&p, &s, t, STEP_TOL).unwrap();
        for (_, u) in bundle.unitaries() {
            unit = unit.max(unitarity_residual(u));
        }
    }
    outcome(
        anti <= STRUCTURE_TOL && unit <= UNITARITY_TOL,
        format!(
            "anti-Hermitian residual {anti:.3e} (tol {STRUCTURE_TOL:.0e}), unitarity {unit:.3e} (tol {UNITARITY_TOL:.0e})"
        ),
    )
}

struct ScalingResult {
    slope1: f64,
    slope2: f64,
    errors: Vec<(f64, f64)>,
}

fn scaling_at(n: usize, buffer: usize) -> ScalingResult {
    let s = spec(n);
    let gs = [0.01, 0.02, 0.04];
    let (slope1, slope2) = error_slopes(1.0, 0.8, &gs, 1.0, &s, STEP_TOL, buffer).unwrap();
    let errors = gs
        .iter()
        .map(|&g| {
            let r = error_report(&params(1.0, 0.8, g), &s, 1.0, STEP_TOL, buffer).unwrap();
            (r.errors.exact_magnus1, r.errors.exact_magnus2)
        })
        .collect();
    ScalingResult {
        slope1,
        slope2,
        errors,
    }
}

fn error_scaling(base: &ScalingResult) -> Outcome {
    let s = spec(12);
    let mut ordered = base.errors.iter().all(|(e1, e2)| e2 < e1);
    for (p, t) in grid() {
        let r = error_report(&p, &s, t, STEP_TOL, 2).unwrap();
        ordered &= r.errors.exact_magnus2 < r.errors.exact_magnus1;
    }
    let in1 = (SLOPE1.0..=SLOPE1.1).contains(&base.slope1);
    let in2 = (SLOPE2.0..=SLOPE2.1).contains(&base.slope2);
    outcome(
        in1 && in2 && ordered,
        format!(
            "slopes {:.3} in {SLOPE1:?}, {:.3} in {SLOPE2:?}; err_magnus2 < err_magnus1 everywhere {ordered}",
            base.slope1, base.slope2
        ),
    )
}

struct SqueezeResult {
    var_min: [f64; 2],
}

fn squeezing_at(n: usize) -> (Outcome, SqueezeResult) {
    let p = params(1.0, 0.5, 0.05);
    let s = spec(n);
    let mut var_gap: f64 = 0.0;
    let mut angle: f64 = 0.0;
    let mut product = f64::INFINITY;
    let mut var_min = [0.0; 2];
    for (k, atom) in [AtomLevel::Excited, AtomLevel::Ground]
        .into_iter()
        .enumerate()
    {
        let r = squeezing_report(&p, &s, 1.0, atom).unwrap();
        let predicted = 0.25 * (-2.0 * r.r_pred).exp();
        var_gap = var_gap.max((r.var_min - predicted).abs());
        angle = angle.max(angle_gap(r.theta_min, r.theta_pred));
        product = product.min(r.product_check);
        var_min[k] = r.var_min;
    }
    let pass = var_gap <= SQUEEZE_VAR_TOL
        && angle <= SQUEEZE_ANGLE_TOL
        && product >= 1.0 / 16.0 - UNCERTAINTY_SLACK;
    (
        outcome(
            pass,
            format!(
                "variance gap {var_gap:.3e} (tol {SQUEEZE_VAR_TOL:.0e}), angle gap {angle:.3e} rad (tol {SQUEEZE_ANGLE_TOL:.0e}), min product {product:.15}"
            ),
        ),
        SqueezeResult { var_min },
    )
}

fn bloch_siegert_at(n: usize) -> (Outcome, Vec<f64>) {
    let s = spec(n);
    let mut measured = Vec::new();
    let mut worst: f64 = 0.0;
    for g in [0.01, 0.02, 0.04] {
        let probe = bs_phase_probe(&params(1.0, 0.9, g), &s, 20.0, BS_STEP_TOL).unwrap();
        worst = worst.max((probe.measured / probe.predicted - 1.0).abs());
        measured.push(probe.measured);
    }
    let ratios = [measured[1] / measured[0], measured[2] / measured[1]];
    let ratios_ok = ratios.iter().all(|r| (BS_RATIO.0..=BS_RATIO.1).contains(r));
    (
        outcome(
            worst <= BS_REL_TOL && ratios_ok,
            format!(
                "max relative gap {worst:.3} (tol {BS_REL_TOL}), doubling ratios {:.3} {:.3} in {BS_RATIO:?}",
                ratios[0], ratios[1]
            ),
        ),
        measured,
    )
}

fn truncation(base8: &ScalingResult, base9: &SqueezeResult, base10: &[f64]) -> Outcome {
    let wide8 = scaling_at(16, 6);
    let drift8 = base8
        .errors
        .iter()
        .zip(&wide8.errors)
        .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
        .fold(0.0, f64::max);
    let (_, wide9) = squeezing_at(28);
    let drift9 = base9
        .var_min
        .iter()
        .zip(wide9.var_min)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let (_, wide10) = bloch_siegert_at(16);
    let drift10 = base10
        .iter()
        .zip(&wide10)
        .map(|(a, b)| ((a - b) / a).abs())
        .fold(0.0, f64::max);
    outcome(
        drift8 <= DRIFT_ERRORS && drift9 <= DRIFT_SQUEEZE && drift10 <= DRIFT_BS_REL,
        format!(
            "N -> N+4: error drift {drift8:.3e} (tol {DRIFT_ERRORS:.0e}), variance drift {drift9:.3e} (tol {DRIFT_SQUEEZE:.0e}), phase drift {drift10:.3e} (tol {DRIFT_BS_REL})"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("jc-magnus-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = |name: &str| RunConfig {
        omega0: vec![0.5, 1.0, 1.2],
        g: vec![0.01, 0.1],
        t: vec![0.5, 2.0],
        output_path: Some(dir.join(name)),
        ..RunConfig::default()
    };
    let first = cmd_sweep(&cfg("a.csv")).unwrap();
    let second = cmd_sweep(&cfg("b.csv")).unwrap();
    let a = std::fs::read(dir.join("a.csv")).unwrap();
    let b = std::fs::read(dir.join("b.csv")).unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        first == second && a == b && a == first.as_bytes(),
        format!(
            "{} bytes, {} rows, identical {}",
            a.len(),
            first.lines().count() - 1,
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 rotation chain", rotation_chain()),
        ("2 BCH residual", bch()),
        ("3 omega1 oracle", omega1_oracle()),
        ("4 omega2 oracle", omega2_oracle()),
        ("5 integral identities", integral_identities()),
        ("6 resonance non-divergence", resonance()),
        ("7 anti-Hermiticity and unitarity", structure()),
    ];
    let base8 = scaling_at(12, 2);
    results.push(("8 error scaling", error_scaling(&base8)));
    let (o9, base9) = squeezing_at(24);
    results.push(("9 squeezing", o9));
    let (o10, base10) = bloch_siegert_at(12);
    results.push(("10 Bloch-Siegert probe", o10));
    results.push((
        "11 truncation robustness",
        truncation(&base8, &base9, &base10),
    ));
    results.push(("12 determinism", determinism()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! First- and second-order Magnus generators of the rotated
//! Jaynes-Cummings Hamiltonian, in closed form and by quadrature.
//!
//! The second-order generator is assembled as
//! `Omega_2 = (g^2 / 2) sum_k I_k C_k`, where `C_k` are the six pairwise
//! commutators of the coupling operators and `I_k` the matching time-ordered
//! double integrals of their phase factors.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, creation, lift_atom, number, pauli, AtomLevel, ComplexMatrix, HilbertSpec, Pauli,
    C64, I,
};
use crate::jc_model::{h_rotated_with, CouplingOperators, ModelParams};
use crate::quadrature::{nested_commutator_simpson, simpson, triangle_simpson};

/// Below this `|x t|` the ramp `t/x - sin(x t)/x^2` is summed as a series.
const RAMP_SERIES_CUTOFF: f64 = 1.0;
/// Relative detuning `|omega - omega0| / omega` below which `zeta` switches to
/// its resonance limit.
pub const RESONANCE_EPS: f64 = 1e-8;
/// Minimum panel count accepted by the quadrature oracles.
pub const MIN_QUAD_STEPS: usize = 64;

/// `(y - sin y) / y^2`, accurate for all `y`.
fn ramp_kernel(y: f64) -> f64 {
    if y.abs() >= RAMP_SERIES_CUTOFF {
        return (y - y.sin()) / (y * y);
    }
    // y/3! - y^3/5! + y^5/7! - ...
    let y2 = y * y;
    let mut term = y / 6.0;
    let mut sum = term;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
        term *= -y2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        sum += term;
        k += 1.0;
    }
    sum
}

/// `t/x - sin(x t)/x^2`, the secular-plus-oscillating coefficient of the
/// number-shift terms. Tends to `x t^3 / 6` as `x -> 0`.
pub fn ramp(x: f64, t: f64) -> f64 {
    t * t * ramp_kernel(x * t)
}

fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        1.0 - y * y / 6.0 + y.powi(4) / 120.0
    } else {
        y.sin() / y
    }
}

/// `(1 - e^{i x t}) / x`, finite at `x = 0` where it equals `-i t`.
pub fn phase_integral(x: f64, t: f64) -> C64 {
    -I * t * C64::from_polar(sinc(0.5 * x * t), 0.5 * x * t)
}

/// Squeezing integral `zeta = I_2` and whether the resonance limit was used.
pub fn zeta(params: &ModelParams, t: f64) -> (C64, bool) {
    let w = params.omega();
    let w0 = params.omega0();
    let delta = params.delta();
    let sigma = params.sigma();
    if delta.abs() < RESONANCE_EPS * w {
        (zeta_resonance_limit(sigma, t), true)
    } else {
        let num = C64::from_polar(w0, 2.0 * w * t) - C64::from_polar(w, sigma * t)
            + C64::from_polar(w, delta * t)
            - C64::from(w0);
        (num / (w * delta * sigma), false)
    }
}

/// `lim_{Delta -> 0} zeta = 2 (1 - e^{i S t}) / S^2 + i t (1 + e^{i S t}) / S`.
pub fn zeta_resonance_limit(sigma: f64, t: f64) -> C64 {
    let e = C64::from_polar(1.0, sigma * t);
    (C64::from(1.0) - e) * (2.0 / (sigma * sigma)) + I * t * (C64::from(1.0) + e) / sigma
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Quadrature,
}

/// The six time-ordered integrals multiplying the commutator table.
#[derive(Debug, Clone, Copy)]
pub struct IntegralSet {
    pub i1: C64,
    pub i2: C64,
    pub i3: C64,
    pub i4: C64,
    pub i5: C64,
    pub i6: C64,
    pub zeta: C64,
    pub t: f64,
    pub params: ModelParams,
    pub provenance: Provenance,
    /// `zeta` came from the resonance limit.
    pub resonance_branch: bool,
}

impl IntegralSet {
    pub fn as_array(&self) -> [C64; 6] {
        [self.i1, self.i2, self.i3, self.i4, self.i5, self.i6]
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTime(t))
    }
}

fn check_steps(n: usize) -> Result<()> {
    if n < MIN_QUAD_STEPS {
        Err(Error::TooFewPanels {
            got: n,
            min: MIN_QUAD_STEPS,
        })
    } else {
        Ok(())
    }
}

pub fn integrals_closed(params: &ModelParams, t: f64) -> Result<IntegralSet> {
    check_time(t)?;
    let (z, resonance_branch) = zeta(params, t);
    let zero = C64::new(0.0, 0.0);
    Ok(IntegralSet {
        i1: -2.0 * I * ramp(params.delta(), t),
        i2: z,
        i3: zero,
        i4: zero,
        i5: z.conj(),
        i6: -2.0 * I * ramp(params.sigma(), t),
        zeta: z,
        t,
        params: *params,
        provenance: Provenance::ClosedForm,
        resonance_branch,
    })
}

/// Triangle-Simpson evaluation of all six integrands with `n` panels per axis.
pub fn integrals_quadrature(params: &ModelParams, t: f64, n: usize) -> Result<IntegralSet> {
    check_time(t)?;
    check_steps(n)?;
    let d = params.delta();
    let s = params.sigma();
    let e = |phase: f64| C64::from_polar(1.0, phase);
    let i1 = triangle_simpson(|a, b| -e(d * (a - b)) + e(-d * (a - b)), t, n);
    let i2 = triangle_simpson(|a, b| e(d * a + s * b) - e(s * a + d * b), t, n);
    let i3 = triangle_simpson(|a, b| -e(d * a - s * b) + e(-(s * a - d * b)), t, n);
    let i4 = triangle_simpson(|a, b| -e(s * a - d * b) + e(-(d * a - s * b)), t, n);
    let i5 = triangle_simpson(|a, b| e(-(d * a + s * b)) - e(-(s * a + d * b)), t, n);
    let i6 = triangle_simpson(|a, b| -e(s * (a - b)) + e(-s * (a - b)), t, n);
    Ok(IntegralSet {
        i1,
        i2,
        i3,
        i4,
        i5,
        i6,
        zeta: i2,
        t,
        params: *params,
        provenance: Provenance::Quadrature,
        resonance_branch: false,
    })
}

/// Closed-form `Omega_1(t)`.
pub fn omega1_closed(params: &ModelParams, spec: &HilbertSpec, t: f64) -> ComplexMatrix {
    let ops = CouplingOperators::new(spec);
    let g = params.g();
    let cd = phase_integral(params.delta(), t);
    let cs = phase_integral(params.sigma(), t);
    (&ops.ad_sm * cd + &ops.a_sp * cd.conj()) * (I * g)
        + (&ops.ad_sp * cs + &ops.a_sm * cs.conj()) * (I * g)
}

/// Closed-form `Omega_2(t)`.
pub fn omega2_closed(params: &ModelParams, spec: &HilbertSpec, t: f64) -> Result<ComplexMatrix> {
    let ints = integrals_closed(params, t)?;
    Ok(omega2_from_integrals(spec, &ints))
}

/// `(g^2 / 2) sum_k I_k C_k` with the closed-form commutators `C_k`.
pub fn omega2_from_integrals(spec: &HilbertSpec, ints: &IntegralSet) -> ComplexMatrix {
    let g2 = ints.params.g().powi(2);
    let closed = closed_commutators(spec);
    let mut out = ComplexMatrix::zeros(spec.dim(), spec.dim());
    for (c, i) in closed.iter().zip(ints.as_array()) {
        out += c * (i * 0.5 * g2);
    }
    out
}

/// `-i int_0^t h_rotated` by composite Simpson.
pub fn omega1_quadrature(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    n: usize,
) -> Result<ComplexMatrix> {
    check_time(t)?;
    check_steps(n)?;
    let ops = CouplingOperators::new(spec);
    Ok(simpson(|s| h_rotated_with(&ops, params, s), 0.0, t, n) * (-I))
}

/// `-(1/2) int int [h_rotated(t1), h_rotated(t2)]` by nested Simpson.
pub fn omega2_quadrature(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    n: usize,
) -> Result<ComplexMatrix> {
    check_time(t)?;
    check_steps(n)?;
    let ops = CouplingOperators::new(spec);
    Ok(nested_commutator_simpson(|s| h_rotated_with(&ops, params, s), t, n) * C64::from(-0.5))
}

#[derive(Debug, Clone)]
pub struct MagnusTerms {
    pub omega1: ComplexMatrix,
    pub omega2: ComplexMatrix,
    pub t: f64,
    pub params: ModelParams,
    pub provenance: Provenance,
}

impl MagnusTerms {
    pub fn closed(params: &ModelParams, spec: &HilbertSpec, t: f64) -> Result<Self> {
        check_time(t)?;
        Ok(Self {
            omega1: omega1_closed(params, spec, t),
            omega2: omega2_closed(params, spec, t)?,
            t,
            params: *params,
            provenance: Provenance::ClosedForm,
        })
    }

    pub fn quadrature(params: &ModelParams, spec: &HilbertSpec, t: f64, n: usize) -> Result<Self> {
        Ok(Self {
            omega1: omega1_quadrature(params, spec, t, n)?,
            omega2: omega2_quadrature(params, spec, t, n)?,
            t,
            params: *params,
            provenance: Provenance::Quadrature,
        })
    }

    pub fn total(&self) -> ComplexMatrix {
        &self.omega1 + &self.omega2
    }
}

pub const COMMUTATOR_LABELS: [&str; 6] = [
    "[a+ s-, a s+]",
    "[a+ s-, a+ s+]",
    "[a+ s-, a s-]",
    "[a+ s+, a s+]",
    "[a s+, a s-]",
    "[a+ s+, a s-]",
];

/// Closed forms of the six commutators, valid away from the truncation edge.
fn closed_commutators(spec: &HilbertSpec) -> [ComplexMatrix; 6] {
    let a = annihilation(spec);
    let ad = creation(spec);
    let n = number(spec);
    let sz = pauli(Pauli::Z);
    let n_sz = n.kronecker(&sz);
    let pe = lift_atom(spec, &pauli(Pauli::ProjE));
    let pg = lift_atom(spec, &pauli(Pauli::ProjG));
    let zero = ComplexMatrix::zeros(spec.dim(), spec.dim());
    [
        -(&n_sz + pe),
        -(&ad * &ad).kronecker(&sz),
        zero.clone(),
        zero,
        (&a * &a).kronecker(&sz),
        n_sz - pg,
    ]
}

#[derive(Debug, Clone)]
pub struct CommutatorEntry {
    pub label: &'static str,
    pub direct: ComplexMatrix,
    pub closed: ComplexMatrix,
}

/// Each commutator computed from the truncated matrices and from its closed
/// form. The two agree on Fock levels below the truncation edge.
pub fn commutator_table(spec: &HilbertSpec) -> Vec<CommutatorEntry> {
    let ops = CouplingOperators::new(spec);
    let pairs = [
        (&ops.ad_sm, &ops.a_sp),
        (&ops.ad_sm, &ops.ad_sp),
        (&ops.ad_sm, &ops.a_sm),
        (&ops.ad_sp, &ops.a_sp),
        (&ops.a_sp, &ops.a_sm),
        (&ops.ad_sp, &ops.a_sm),
    ];
    closed_commutators(spec)
        .into_iter()
        .zip(pairs)
        .zip(COMMUTATOR_LABELS)
        .map(|((closed, (x, y)), label)| CommutatorEntry {
            label,
            direct: x * y - y * x,
            closed,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    pub r: f64,
    pub theta: f64,
}

/// Squeezing amplitude `xi = g^2 zeta s_z`, so that the squeezing part of
/// `Omega_2` on the `s_z` sector reads `(xi^* a^2 - xi a^dag^2) / 2`.
pub fn squeeze_params(params: &ModelParams, t: f64, atom: AtomLevel) -> Result<SqueezeParams> {
    check_time(t)?;
    let (z, _) = zeta(params, t);
    let xi = z * (params.g().powi(2) * atom.sz());
    Ok(SqueezeParams {
        r: xi.norm(),
        theta: xi.arg(),
    })
}

/// Secular phase rates (rad/time) of `|n, atom>` under `Omega_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRates {
    /// photon-number dependent shift from the co-rotating terms, `~ g^2 / Delta`
    pub stark: f64,
    /// counter-rotating shift, `~ g^2 / Sigma`
    pub bloch_siegert: f64,
}

fn rate(numerator: f64, denominator: f64) -> f64 {
    if numerator == 0.0 {
        0.0
    } else {
        numerator / denominator
    }
}

/// On resonance the Stark rate is infinite unless its numerator vanishes.
pub fn shift_rates(params: &ModelParams, n: usize, atom: AtomLevel) -> ShiftRates {
    let g2 = params.g().powi(2);
    let n = n as f64;
    let (stark_num, bs_num) = match atom {
        AtomLevel::Excited => (g2 * (n + 1.0), -g2 * n),
        AtomLevel::Ground => (-g2 * n, g2 * (n + 1.0)),
    };
    ShiftRates {
        stark: rate(stark_num, params.delta()),
        bloch_siegert: rate(bs_num, params.sigma()),
    }
}

/// `g t / pi`; values at or above one are outside the convergent regime.
pub fn convergence_margin(params: &ModelParams, t: f64) -> f64 {
    params.g() * t / PI
}

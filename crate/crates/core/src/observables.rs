//! Field and atom readouts of evolved states: quadrature variances,
//! populations, the squeezing produced by the second-order generator and
//! the vacuum Bloch-Siegert phase.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, creation, expm_antiherm, lift_field, number, unitarity_residual, AtomLevel,
    ComplexMatrix, HilbertSpec, C64,
};
use crate::jc_model::ModelParams;
use crate::magnus::{omega1_closed, omega2_closed, shift_rates, squeeze_params, zeta};
use crate::propagator::{golden_section, u_exact, u_rwa};

pub const NORM_TOL: f64 = 1e-10;
pub const UNITARITY_TOL: f64 = 1e-10;
/// Minimum truncation for squeezing scans.
pub const SQUEEZING_MIN_FOCK: usize = 16;
const THETA_GRID: usize = 360;
const THETA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    spec: HilbertSpec,
}

impl StateVector {
    pub fn new(amplitudes: DVector<C64>, spec: HilbertSpec) -> Result<Self> {
        if amplitudes.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                op: "StateVector::new",
                left: (amplitudes.len(), 1),
                right: (spec.dim(), 1),
            });
        }
        let drift = (amplitudes.norm() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::NormDrift { drift });
        }
        Ok(Self { amplitudes, spec })
    }

    /// `|n> (x) |atom>`
    pub fn basis(spec: &HilbertSpec, n: usize, atom: AtomLevel) -> Self {
        let mut amplitudes = DVector::zeros(spec.dim());
        amplitudes[spec.index(n, atom)] = C64::from(1.0);
        Self {
            amplitudes,
            spec: *spec,
        }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// `psi = U psi0`. Rejects non-unitary `U` and reports norm drift instead of
/// renormalising.
pub fn evolve(u: &ComplexMatrix, psi0: &StateVector) -> Result<StateVector> {
    if u.shape() != (psi0.spec.dim(), psi0.spec.dim()) {
        return Err(Error::DimensionMismatch {
            op: "evolve",
            left: u.shape(),
            right: (psi0.spec.dim(), 1),
        });
    }
    let residual = unitarity_residual(u);
    if residual > UNITARITY_TOL {
        return Err(Error::NotUnitary {
            residual,
            tol: UNITARITY_TOL,
        });
    }
    StateVector::new(u * &psi0.amplitudes, psi0.spec)
}

/// Precomputed `a psi` and `a^dag psi` for repeated quadrature evaluations.
#[derive(Debug, Clone)]
pub struct QuadratureProbe {
    psi: DVector<C64>,
    lowered: DVector<C64>,
    raised: DVector<C64>,
}

impl QuadratureProbe {
    pub fn new(psi: &StateVector) -> Self {
        let a = lift_field(&annihilation(&psi.spec));
        let ad = lift_field(&creation(&psi.spec));
        Self {
            psi: psi.amplitudes.clone(),
            lowered: &a * &psi.amplitudes,
            raised: &ad * &psi.amplitudes,
        }
    }

    /// `Var(X_theta)` with `X_theta = (a e^{-i theta} + a^dag e^{i theta}) / 2`.
    pub fn variance(&self, theta: f64) -> f64 {
        let x_psi = (&self.lowered * C64::from_polar(0.5, -theta))
            + (&self.raised * C64::from_polar(0.5, theta));
        let mean = self.psi.dotc(&x_psi).re;
        x_psi.norm_squared() - mean * mean
    }

    pub fn uncertainty_product(&self, theta: f64) -> f64 {
        self.variance(theta) * self.variance(theta + 0.5 * PI)
    }

    /// Minimum of `Var(X_theta)` over a uniform grid refined by golden
    /// section; returns `(theta in [0, pi), variance)`.
    pub fn minimize(&self) -> (f64, f64) {
        scan(|th| self.variance(th))
    }

    pub fn maximize(&self) -> (f64, f64) {
        let (th, v) = scan(|th| -self.variance(th));
        (th, -v)
    }
}

fn scan(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let h = PI / THETA_GRID as f64;
    let best = (0..THETA_GRID)
        .map(|k| k as f64 * h)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(0.0);
    let (theta, value) = golden_section(&f, best - h, best + h, THETA_TOL);
    (theta.rem_euclid(PI), value)
}

pub fn quadrature_variance(psi: &StateVector, theta: f64) -> f64 {
    QuadratureProbe::new(psi).variance(theta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub excited: f64,
    pub ground: f64,
    pub mean_photons: f64,
}

pub fn populations(psi: &StateVector) -> Populations {
    let mut excited = 0.0;
    let mut ground = 0.0;
    for (k, amp) in psi.amplitudes.iter().enumerate() {
        if k % 2 == AtomLevel::Excited.index() {
            excited += amp.norm_sqr();
        } else {
            ground += amp.norm_sqr();
        }
    }
    let n_op = lift_field(&number(&psi.spec));
    let mean_photons = psi.amplitudes.dotc(&(n_op * &psi.amplitudes)).re;
    Populations {
        excited,
        ground,
        mean_photons,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingReport {
    /// `g^2 |zeta|`
    pub r_pred: f64,
    /// angle of minimum variance predicted by `arg(xi) / 2`, in `[0, pi)`
    pub theta_pred: f64,
    /// `e^{-2 r} / 4`
    pub var_min_pred: f64,
    pub var_min: f64,
    pub var_max: f64,
    pub theta_min: f64,
    pub product_check: f64,
}

/// Evolves `|0> (x) |atom>` under `exp(Omega_2)` and measures the field
/// quadrature extrema.
pub fn squeezing_report(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    atom: AtomLevel,
) -> Result<SqueezingReport> {
    let generator = omega2_closed(params, spec, t)?;
    squeezing_under(&generator, params, spec, t, atom)
}

/// Same measurement under `exp(Omega_1 + Omega_2)`, where first-order Rabi
/// mixing also acts on the field.
pub fn squeezing_report_full(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    atom: AtomLevel,
) -> Result<SqueezingReport> {
    let generator = omega1_closed(params, spec, t) + omega2_closed(params, spec, t)?;
    squeezing_under(&generator, params, spec, t, atom)
}

fn squeezing_under(
    generator: &ComplexMatrix,
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    atom: AtomLevel,
) -> Result<SqueezingReport> {
    if spec.fock_dim() < SQUEEZING_MIN_FOCK {
        return Err(Error::FockDimTooSmall {
            got: spec.fock_dim(),
            min: SQUEEZING_MIN_FOCK,
        });
    }
    let u = expm_antiherm(generator)?;
    let psi = evolve(&u, &StateVector::basis(spec, 0, atom))?;
    let probe = QuadratureProbe::new(&psi);
    let (theta_min, var_min) = probe.minimize();
    let (_, var_max) = probe.maximize();
    let sq = squeeze_params(params, t, atom)?;
    Ok(SqueezingReport {
        r_pred: sq.r,
        theta_pred: (0.5 * sq.theta).rem_euclid(PI),
        var_min_pred: 0.25 * (-2.0 * sq.r).exp(),
        var_min,
        var_max,
        theta_min,
        product_check: var_min * var_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSiegertProbe {
    pub measured: f64,
    pub predicted: f64,
}

/// Phase of `<0,g|U|0,g>` under the exact propagator relative to the RWA
/// one, against the secular prediction `g^2 t / Sigma`.
pub fn bs_phase_probe(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    tol: f64,
) -> Result<BlochSiegertProbe> {
    let margin = params.g() * t / PI;
    if margin >= 0.5 {
        return Err(Error::Precondition(format!(
            "bs_phase_probe needs g t / pi < 0.5, got {margin}"
        )));
    }
    let (ue, _) = u_exact(params, spec, t, tol)?;
    let (ur, _) = u_rwa(params, spec, t, tol)?;
    let k = spec.index(0, AtomLevel::Ground);
    let diff = ue[(k, k)].arg() - ur[(k, k)].arg();
    let measured = (diff + PI).rem_euclid(2.0 * PI) - PI;
    let predicted = shift_rates(params, 0, AtomLevel::Ground).bloch_siegert * t;
    Ok(BlochSiegertProbe {
        measured,
        predicted,
    })
}

/// Distance between two quadrature angles, which are defined modulo `pi`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    ((a - b + 0.5 * PI).rem_euclid(PI) - 0.5 * PI).abs()
}

/// `zeta` together with its branch label, for reports.
pub fn zeta_with_branch(params: &ModelParams, t: f64) -> (C64, &'static str) {
    let (z, resonance) = zeta(params, t);
    (
        z,
        if resonance {
            "resonance branch"
        } else {
            "closed form"
        },
    )
}

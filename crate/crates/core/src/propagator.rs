//! Propagators for the rotated Hamiltonian: a step-doubled exact reference,
//! its RWA counterpart, and the first/second-order Magnus exponentials.

use nalgebra::{DVector, Schur};

use crate::error::{Error, Result};
use crate::hilbert::{
    expm_antiherm, herm_eig, orthonormalize, spectral_norm, ComplexMatrix, HermitianEigen,
    HilbertSpec, C64, I,
};
use crate::jc_model::{coupling, coupling_rwa, frame_generator, ModelParams};
use crate::magnus::{convergence_margin, omega1_closed, omega2_closed};

pub const DEFAULT_STEP_TOL: f64 = 1e-10;
pub const DEFAULT_BUFFER: usize = 2;
pub const MAX_STEPS: usize = 1 << 20;
const MIN_TOL: f64 = 1e-12;
const INITIAL_STEPS: usize = 16;

/// Midpoint-exponential integrator for Hamiltonians of the form
/// `h(t) = R(t)^dag K R(t)` with `R(t) = exp(-i t D)` diagonal.
///
/// Each step applies `exp(-i h(t_mid) dt) = R^dag exp(-i K dt) R`, so the
/// product over `n` steps collapses to
/// `R(t - dt/2)^dag (E P)^{n-1} E R(dt/2)` with `E = exp(-i K dt)` and
/// `P = R(dt)`, with the power taken through a Schur decomposition of
/// `E P - I`.
#[derive(Debug, Clone)]
pub struct MidpointPropagator {
    coupling: HermitianEigen,
    frame: DVector<f64>,
    uncoupled: bool,
}

impl MidpointPropagator {
    pub fn new(coupling: &ComplexMatrix, frame: DVector<f64>) -> Result<Self> {
        Ok(Self {
            coupling: herm_eig(coupling)?,
            frame,
            uncoupled: coupling.iter().all(|z| *z == C64::new(0.0, 0.0)),
        })
    }

    fn frame_phases(&self, s: f64) -> DVector<C64> {
        self.frame.map(|d| C64::from_polar(1.0, -d * s))
    }

    /// Interaction-picture propagator over `[0, t]` with `n >= 1` equal
    /// midpoint steps.
    pub fn propagate(&self, t: f64, n: usize) -> ComplexMatrix {
        let dim = self.frame.len();
        if t == 0.0 || n == 0 || self.uncoupled {
            return ComplexMatrix::identity(dim, dim);
        }
        let dt = t / n as f64;
        // E - I is formed directly so that rounding stays relative to the
        // small step generator rather than to the identity.
        let shift = self.coupling.propagator_minus_identity(dt);
        let step = &shift + ComplexMatrix::identity(dim, dim);
        // (E P - I) = (E - I) P + (P - I)
        let frame_step = self.frame_phases(dt);
        let mut stepped_shift = shift;
        scale_columns(&mut stepped_shift, &frame_step);
        for (k, d) in self.frame.iter().enumerate() {
            let x = d * dt;
            stepped_shift[(k, k)] += -2.0 * I * (0.5 * x).sin() * C64::from_polar(1.0, -0.5 * x);
        }
        let mut u = unitary_power(&stepped_shift, n - 1) * step;
        scale_columns(&mut u, &self.frame_phases(0.5 * dt));
        let last = self.frame_phases(t - 0.5 * dt);
        for (mut row, ph) in u.row_iter_mut().zip(last.iter()) {
            row *= ph.conj();
        }
        u
    }
}

fn scale_columns(m: &mut ComplexMatrix, d: &DVector<C64>) {
    for (mut col, s) in m.column_iter_mut().zip(d.iter()) {
        col *= *s;
    }
}

/// `m^k` for a unitary `m = I + shift`, computed from the Schur form of
/// `shift`. For a normal matrix the triangular factor is diagonal up to
/// rounding and the eigenvalues lie on the unit circle, so
/// `m^k = Q diag(e^{i k theta_j}) Q^dag`. Working with the shift keeps the
/// eigenphases `theta_j` accurate to relative precision, so the error of
/// the power does not grow with `k`.
pub(crate) fn unitary_power(shift: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let (q, _) = Schur::new(shift.clone()).unpack();
    let q = orthonormalize(q);
    // Rayleigh quotients are second-order accurate in the eigenvector error.
    let sq = shift * &q;
    let phases = DVector::from_fn(q.ncols(), |j, _| {
        let mu = q.column(j).dotc(&sq.column(j));
        let theta = mu.im.atan2(1.0 + mu.re);
        C64::from_polar(1.0, theta * k as f64)
    });
    let mut scaled = q.clone();
    scale_columns(&mut scaled, &phases);
    scaled * q.adjoint()
}

/// Straightforward midpoint stepping `U <- exp(-i h(t_mid) dt) U` for an
/// arbitrary Hamiltonian callback.
pub fn midpoint_product(
    h: impl Fn(f64) -> ComplexMatrix,
    dim: usize,
    t: f64,
    n: usize,
) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(dim, dim);
    if n == 0 {
        return Ok(u);
    }
    let dt = t / n as f64;
    for k in 0..n {
        let mid = (k as f64 + 0.5) * dt;
        u = expm_antiherm(&(h(mid) * (-I * dt)))? * u;
    }
    Ok(u)
}

fn check_inputs(t: f64, tol: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    if !(tol.is_finite() && tol >= MIN_TOL) {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(())
}

/// Doubles the step count until successive results differ by at most `tol`
/// in spectral norm; returns the finer result and its step count.
pub fn step_doubling(
    propagator: &MidpointPropagator,
    t: f64,
    tol: f64,
) -> Result<(ComplexMatrix, usize)> {
    check_inputs(t, tol)?;
    let dim = propagator.frame.len();
    if t == 0.0 {
        return Ok((ComplexMatrix::identity(dim, dim), 0));
    }
    let mut n = INITIAL_STEPS;
    let mut coarse = propagator.propagate(t, n);
    loop {
        let fine = propagator.propagate(t, 2 * n);
        let diff = spectral_norm(&(&coarse - &fine));
        if diff <= tol {
            return Ok((fine, 2 * n));
        }
        if 2 * n >= MAX_STEPS {
            return Err(Error::NonConvergence {
                tol,
                max_steps: MAX_STEPS,
                last: diff,
            });
        }
        n *= 2;
        coarse = fine;
    }
}

pub fn exact_stepper(params: &ModelParams, spec: &HilbertSpec) -> Result<MidpointPropagator> {
    MidpointPropagator::new(&coupling(params, spec), frame_generator(params, spec))
}

pub fn rwa_stepper(params: &ModelParams, spec: &HilbertSpec) -> Result<MidpointPropagator> {
    MidpointPropagator::new(&coupling_rwa(params, spec), frame_generator(params, spec))
}

/// Reference propagator of `h_rotated` over `[0, t]`.
pub fn u_exact(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    tol: f64,
) -> Result<(ComplexMatrix, usize)> {
    step_doubling(&exact_stepper(params, spec)?, t, tol)
}

/// Propagator of `h_rwa` over `[0, t]`.
pub fn u_rwa(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    tol: f64,
) -> Result<(ComplexMatrix, usize)> {
    step_doubling(&rwa_stepper(params, spec)?, t, tol)
}

/// `exp(Omega_1)` for order 1, `exp(Omega_1 + Omega_2)` for order 2.
pub fn u_magnus(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    order: u32,
) -> Result<ComplexMatrix> {
    let generator = match order {
        1 => omega1_closed(params, spec, t),
        2 => omega1_closed(params, spec, t) + omega2_closed(params, spec, t)?,
        other => return Err(Error::InvalidOrder(other)),
    };
    expm_antiherm(&generator)
}

/// Orthogonal projector onto Fock levels `0..=N-1-buffer` (both atom states).
pub fn project_buffer(spec: &HilbertSpec, buffer: usize) -> Result<ComplexMatrix> {
    let kept = kept_dim(spec, buffer)?;
    let d = DVector::from_fn(spec.dim(), |k, _| {
        if k < kept {
            C64::from(1.0)
        } else {
            C64::from(0.0)
        }
    });
    Ok(ComplexMatrix::from_diagonal(&d))
}

fn kept_dim(spec: &HilbertSpec, buffer: usize) -> Result<usize> {
    let max = spec.fock_dim() - 2;
    if buffer > max {
        return Err(Error::BufferOutOfRange { buffer, max });
    }
    Ok(2 * (spec.fock_dim() - buffer))
}

/// The block of `m` acting within the buffered subspace.
pub fn buffered_block(
    m: &ComplexMatrix,
    spec: &HilbertSpec,
    buffer: usize,
) -> Result<ComplexMatrix> {
    let kept = kept_dim(spec, buffer)?;
    Ok(m.view((0, 0), (kept, kept)).into_owned())
}

/// `min_phi ||a - e^{i phi} b||` in spectral norm.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let dist = |phi: f64| spectral_norm(&(a - b * C64::from_polar(1.0, phi)));
    let overlap = (b.adjoint() * a).trace();
    let phi0 = if overlap.norm() > 0.0 {
        overlap.arg()
    } else {
        0.0
    };
    let f0 = dist(phi0);
    if f0 == 0.0 {
        return 0.0;
    }
    let (lo, hi) = if f0 < 0.1 {
        let w = (8.0 * f0).min(std::f64::consts::PI);
        (phi0 - w, phi0 + w)
    } else {
        // coarse scan for a bracket when the matrices are far apart
        let k = 64;
        let step = 2.0 * std::f64::consts::PI / k as f64;
        let best = (0..k)
            .map(|j| phi0 + j as f64 * step)
            .min_by(|x, y| dist(*x).total_cmp(&dist(*y)))
            .unwrap_or(phi0);
        (best - step, best + step)
    };
    let (phi, fmin) = golden_section(dist, lo, hi, 1e-13);
    let _ = phi;
    fmin.min(f0)
}

/// Minimises a unimodal `f` on `[lo, hi]`; returns the argmin and value.
pub(crate) fn golden_section(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone)]
pub struct PropagatorBundle {
    pub u_exact: ComplexMatrix,
    pub u_rwa: ComplexMatrix,
    pub u_magnus1: ComplexMatrix,
    pub u_magnus2: ComplexMatrix,
    pub params: ModelParams,
    pub t: f64,
    pub steps_exact: usize,
    pub steps_rwa: usize,
    pub tol: f64,
}

impl PropagatorBundle {
    pub fn new(params: &ModelParams, spec: &HilbertSpec, t: f64, tol: f64) -> Result<Self> {
        let (u_exact, steps_exact) = u_exact(params, spec, t, tol)?;
        let (u_rwa, steps_rwa) = u_rwa(params, spec, t, tol)?;
        Ok(Self {
            u_exact,
            u_rwa,
            u_magnus1: u_magnus(params, spec, t, 1)?,
            u_magnus2: u_magnus(params, spec, t, 2)?,
            params: *params,
            t,
            steps_exact,
            steps_rwa,
            tol,
        })
    }

    pub fn unitaries(&self) -> [(&'static str, &ComplexMatrix); 4] {
        [
            ("exact", &self.u_exact),
            ("rwa", &self.u_rwa),
            ("magnus1", &self.u_magnus1),
            ("magnus2", &self.u_magnus2),
        ]
    }
}

/// Phase-aligned spectral distances on the buffered subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTable {
    pub exact_rwa: f64,
    pub exact_magnus1: f64,
    pub exact_magnus2: f64,
    pub rwa_magnus1: f64,
    pub rwa_magnus2: f64,
    pub magnus1_magnus2: f64,
}

impl ErrorTable {
    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("exact-rwa", self.exact_rwa),
            ("exact-magnus1", self.exact_magnus1),
            ("exact-magnus2", self.exact_magnus2),
            ("rwa-magnus1", self.rwa_magnus1),
            ("rwa-magnus2", self.rwa_magnus2),
            ("magnus1-magnus2", self.magnus1_magnus2),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub bundle: PropagatorBundle,
    pub errors: ErrorTable,
    pub buffer: usize,
    pub convergence_margin: f64,
}

pub fn error_table(
    bundle: &PropagatorBundle,
    spec: &HilbertSpec,
    buffer: usize,
) -> Result<ErrorTable> {
    let e = buffered_block(&bundle.u_exact, spec, buffer)?;
    let r = buffered_block(&bundle.u_rwa, spec, buffer)?;
    let m1 = buffered_block(&bundle.u_magnus1, spec, buffer)?;
    let m2 = buffered_block(&bundle.u_magnus2, spec, buffer)?;
    Ok(ErrorTable {
        exact_rwa: phase_aligned_distance(&e, &r),
        exact_magnus1: phase_aligned_distance(&e, &m1),
        exact_magnus2: phase_aligned_distance(&e, &m2),
        rwa_magnus1: phase_aligned_distance(&r, &m1),
        rwa_magnus2: phase_aligned_distance(&r, &m2),
        magnus1_magnus2: phase_aligned_distance(&m1, &m2),
    })
}

pub fn error_report(
    params: &ModelParams,
    spec: &HilbertSpec,
    t: f64,
    tol: f64,
    buffer: usize,
) -> Result<ErrorReport> {
    kept_dim(spec, buffer)?;
    let bundle = PropagatorBundle::new(params, spec, t, tol)?;
    let errors = error_table(&bundle, spec, buffer)?;
    Ok(ErrorReport {
        bundle,
        errors,
        buffer,
        convergence_margin: convergence_margin(params, t),
    })
}

//! Jaynes-Cummings Hamiltonians and the frame rotations that remove the
//! free field and atom evolution.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, creation, lift_atom, lift_field, number, pauli, spectral_norm, ComplexMatrix,
    HilbertSpec, Pauli, C64, I,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    omega: f64,
    omega0: f64,
    g: f64,
}

impl ModelParams {
    /// `omega` is the cavity frequency, `omega0` the atomic transition and
    /// `g` the coupling, all in rad/time.
    pub fn new(omega: f64, omega0: f64, g: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParams {
                field: "omega",
                value: omega,
                reason: "must be positive and finite",
            });
        }
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidParams {
                field: "omega0",
                value: omega0,
                reason: "must be positive and finite",
            });
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidParams {
                field: "g",
                value: g,
                reason: "must be non-negative and finite",
            });
        }
        Ok(Self { omega, omega0, g })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// Detuning `omega - omega0`.
    pub fn delta(&self) -> f64 {
        self.omega - self.omega0
    }

    /// Sum frequency `omega + omega0`.
    pub fn sigma(&self) -> f64 {
        self.omega + self.omega0
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.omega, self.omega0, g)
    }
}

/// The four atom-field products appearing in the rotated interaction,
/// lifted to the full space.
#[derive(Debug, Clone)]
pub struct CouplingOperators {
    /// `a^dag sigma_-` (co-rotating, phase `e^{i Delta t}`)
    pub ad_sm: ComplexMatrix,
    /// `a sigma_+` (co-rotating, phase `e^{-i Delta t}`)
    pub a_sp: ComplexMatrix,
    /// `a^dag sigma_+` (counter-rotating, phase `e^{i Sigma t}`)
    pub ad_sp: ComplexMatrix,
    /// `a sigma_-` (counter-rotating, phase `e^{-i Sigma t}`)
    pub a_sm: ComplexMatrix,
}

impl CouplingOperators {
    pub fn new(spec: &HilbertSpec) -> Self {
        let a = annihilation(spec);
        let ad = creation(spec);
        let sp = pauli(Pauli::Plus);
        let sm = pauli(Pauli::Minus);
        Self {
            ad_sm: ad.kronecker(&sm),
            a_sp: a.kronecker(&sp),
            ad_sp: ad.kronecker(&sp),
            a_sm: a.kronecker(&sm),
        }
    }
}

/// `omega a^dag a + (omega0 / 2) sigma_z + i g (a^dag - a)(sigma_+ + sigma_-)`
pub fn h_full(params: &ModelParams, spec: &HilbertSpec) -> ComplexMatrix {
    let field = lift_field(&number(spec)) * C64::from(params.omega());
    let atom = lift_atom(spec, &pauli(Pauli::Z)) * C64::from(0.5 * params.omega0());
    field + atom + coupling(params, spec)
}

/// Interaction term `i g (a^dag - a)(sigma_+ + sigma_-)`, which is also the
/// rotated Hamiltonian at `t = 0`.
pub fn coupling(params: &ModelParams, spec: &HilbertSpec) -> ComplexMatrix {
    let quad = creation(spec) - annihilation(spec);
    let sx = pauli(Pauli::Plus) + pauli(Pauli::Minus);
    quad.kronecker(&sx) * (I * params.g())
}

/// Co-rotating part of [`coupling`]: `i g (a^dag sigma_- - a sigma_+)`.
pub fn coupling_rwa(params: &ModelParams, spec: &HilbertSpec) -> ComplexMatrix {
    let ops = CouplingOperators::new(spec);
    (ops.ad_sm - ops.a_sp) * (I * params.g())
}

/// Diagonal of `omega n (x) I + (omega0 / 2) I (x) sigma_z`, the generator of
/// the combined frame `U(t) V(t) = exp(-i t D)`.
pub fn frame_generator(params: &ModelParams, spec: &HilbertSpec) -> DVector<f64> {
    DVector::from_fn(spec.dim(), |k, _| {
        let n = (k / 2) as f64;
        let sz = if k % 2 == 0 { 1.0 } else { -1.0 };
        params.omega() * n + 0.5 * params.omega0() * sz
    })
}

/// Fully rotated Hamiltonian
/// `g (i a^dag s_- e^{i D t} - i a s_+ e^{-i D t} + i a^dag s_+ e^{i S t} - i a s_- e^{-i S t})`.
pub fn h_rotated(params: &ModelParams, spec: &HilbertSpec, t: f64) -> ComplexMatrix {
    let ops = CouplingOperators::new(spec);
    h_rotated_with(&ops, params, t)
}

pub(crate) fn h_rotated_with(
    ops: &CouplingOperators,
    params: &ModelParams,
    t: f64,
) -> ComplexMatrix {
    let g = params.g();
    let pd = C64::from_polar(1.0, params.delta() * t);
    let ps = C64::from_polar(1.0, params.sigma() * t);
    &ops.ad_sm * (I * g * pd) - &ops.a_sp * (I * g * pd.conj()) + &ops.ad_sp * (I * g * ps)
        - &ops.a_sm * (I * g * ps.conj())
}

/// [`h_rotated`] with the sum-frequency terms dropped.
pub fn h_rwa(params: &ModelParams, spec: &HilbertSpec, t: f64) -> ComplexMatrix {
    let ops = CouplingOperators::new(spec);
    h_rwa_with(&ops, params, t)
}

pub(crate) fn h_rwa_with(ops: &CouplingOperators, params: &ModelParams, t: f64) -> ComplexMatrix {
    let g = params.g();
    let pd = C64::from_polar(1.0, params.delta() * t);
    &ops.ad_sm * (I * g * pd) - &ops.a_sp * (I * g * pd.conj())
}

fn diagonal_phases(spec: &HilbertSpec, phase: impl Fn(usize, usize) -> f64) -> ComplexMatrix {
    let d = DVector::from_fn(spec.dim(), |k, _| C64::from_polar(1.0, phase(k / 2, k % 2)));
    ComplexMatrix::from_diagonal(&d)
}

/// Atom frame `U(t) = exp(-i omega0 t sigma_z / 2)`.
pub fn frame_atom(params: &ModelParams, spec: &HilbertSpec, t: f64) -> ComplexMatrix {
    let w0 = params.omega0();
    diagonal_phases(
        spec,
        |_, s| if s == 0 { -0.5 * w0 * t } else { 0.5 * w0 * t },
    )
}

/// Field frame `V(t) = exp(-i omega t n)`.
pub fn frame_field(params: &ModelParams, spec: &HilbertSpec, t: f64) -> ComplexMatrix {
    let w = params.omega();
    diagonal_phases(spec, |n, _| -w * n as f64 * t)
}

/// `W^dag H W - i W^dag dW/dt`.
pub fn rotate_frame(h: &ComplexMatrix, w: &ComplexMatrix, dw: &ComplexMatrix) -> ComplexMatrix {
    w.adjoint() * h * w - w.adjoint() * dw * I
}

/// Applies the atom rotation and then the field rotation to [`h_full`]
/// numerically, using the explicit time derivatives of both frames.
pub fn rotation_chain(params: &ModelParams, spec: &HilbertSpec, t: f64) -> ComplexMatrix {
    let u = frame_atom(params, spec, t);
    let du = lift_atom(spec, &pauli(Pauli::Z)) * (-I * 0.5 * params.omega0()) * &u;
    let v = frame_field(params, spec, t);
    let dv = lift_field(&number(spec)) * (-I * params.omega()) * &v;
    let atom_rotated = rotate_frame(&h_full(params, spec), &u, &du);
    rotate_frame(&atom_rotated, &v, &dv)
}

/// `||h_rotated(t) - rotation_chain(t)|| / ||h_full||`.
pub fn rotation_chain_residual(params: &ModelParams, spec: &HilbertSpec, t: f64) -> f64 {
    let diff = h_rotated(params, spec, t) - rotation_chain(params, spec, t);
    spectral_norm(&diff) / spectral_norm(&h_full(params, spec))
}

/// Residual of `V^dag a V = a e^{-i omega t}` and its adjoint identity.
pub fn verify_bch(params: &ModelParams, spec: &HilbertSpec, t: f64) -> f64 {
    let v = frame_field(params, spec, t);
    let a = lift_field(&annihilation(spec));
    let ad = lift_field(&creation(spec));
    let phase = C64::from_polar(1.0, -params.omega() * t);
    let lower = spectral_norm(&(v.adjoint() * &a * &v - &a * phase));
    let upper = spectral_norm(&(v.adjoint() * &ad * &v - &ad * phase.conj()));
    lower.max(upper)
}

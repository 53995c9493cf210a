//! Truncated Fock space tensored with a two-level atom.
//!
//! States are ordered field-first: the basis vector `|n> (x) |s>` lives at
//! index `2 n + s`, with `s = 0` the excited state (`sigma_z = +1`) and
//! `s = 1` the ground state.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Smallest Fock truncation that still carries nonzero two-photon terms.
pub const MIN_FOCK_DIM: usize = 4;
pub const ATOM_DIM: usize = 2;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    fock_dim: usize,
}

impl HilbertSpec {
    pub fn new(fock_dim: usize) -> Result<Self> {
        if fock_dim < MIN_FOCK_DIM {
            return Err(Error::FockDimTooSmall {
                got: fock_dim,
                min: MIN_FOCK_DIM,
            });
        }
        Ok(Self { fock_dim })
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn atom_dim(&self) -> usize {
        ATOM_DIM
    }

    /// Total dimension `2 N`.
    pub fn dim(&self) -> usize {
        self.fock_dim * ATOM_DIM
    }

    pub fn index(&self, fock: usize, atom: AtomLevel) -> usize {
        debug_assert!(fock < self.fock_dim);
        fock * ATOM_DIM + atom.index()
    }

    pub fn field_identity(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.fock_dim, self.fock_dim)
    }

    pub fn identity(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dim(), self.dim())
    }
}

/// Atomic basis state. `Excited` is the first basis vector, matching
/// `sigma_z = diag(1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomLevel {
    Excited,
    Ground,
}

impl AtomLevel {
    pub fn index(self) -> usize {
        match self {
            AtomLevel::Excited => 0,
            AtomLevel::Ground => 1,
        }
    }

    /// Eigenvalue of `sigma_z`.
    pub fn sz(self) -> f64 {
        match self {
            AtomLevel::Excited => 1.0,
            AtomLevel::Ground => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    Z,
    Plus,
    Minus,
    /// `|e><e| = sigma_+ sigma_-`
    ProjE,
    /// `|g><g| = sigma_- sigma_+`
    ProjG,
}

pub fn pauli(which: Pauli) -> ComplexMatrix {
    let (a, b, c, d) = match which {
        Pauli::Z => (1.0, 0.0, 0.0, -1.0),
        Pauli::Plus => (0.0, 1.0, 0.0, 0.0),
        Pauli::Minus => (0.0, 0.0, 1.0, 0.0),
        Pauli::ProjE => (1.0, 0.0, 0.0, 0.0),
        Pauli::ProjG => (0.0, 0.0, 0.0, 1.0),
    };
    ComplexMatrix::from_row_slice(2, 2, &[a.into(), b.into(), c.into(), d.into()])
}

/// Truncated annihilation operator: `<n-1| a |n> = sqrt(n)`.
pub fn annihilation(spec: &HilbertSpec) -> ComplexMatrix {
    ladder(spec.fock_dim())
}

/// Annihilation matrix on `n` Fock levels with no minimum-size check.
pub fn ladder(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |r, c| {
        if c == r + 1 {
            C64::from((c as f64).sqrt())
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn creation(spec: &HilbertSpec) -> ComplexMatrix {
    annihilation(spec).adjoint()
}

pub fn number(spec: &HilbertSpec) -> ComplexMatrix {
    creation(spec) * annihilation(spec)
}

/// Kronecker product `field (x) atom` in the field-first convention.
pub fn tensor(field_op: &ComplexMatrix, atom_op: &ComplexMatrix) -> Result<ComplexMatrix> {
    if atom_op.shape() != (ATOM_DIM, ATOM_DIM) {
        return Err(Error::DimensionMismatch {
            op: "tensor",
            left: field_op.shape(),
            right: atom_op.shape(),
        });
    }
    if !field_op.is_square() {
        return Err(Error::NotSquare {
            op: "tensor",
            rows: field_op.nrows(),
            cols: field_op.ncols(),
        });
    }
    Ok(field_op.kronecker(atom_op))
}

/// `field (x) I_2`
pub fn lift_field(field_op: &ComplexMatrix) -> ComplexMatrix {
    field_op.kronecker(&ComplexMatrix::identity(ATOM_DIM, ATOM_DIM))
}

/// `I_N (x) atom`
pub fn lift_atom(spec: &HilbertSpec, atom_op: &ComplexMatrix) -> ComplexMatrix {
    spec.field_identity().kronecker(atom_op)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            op: "commutator",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(a * b - b * a)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.norm()
}

/// Largest singular value, from the top eigenvalue of the smaller Gram matrix.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.adjoint()
    } else {
        a.adjoint() * a
    };
    let scale = gram.camax();
    if scale == 0.0 {
        return 0.0;
    }
    let top = eigh_unchecked(&gram).values[gram.nrows() - 1];
    top.max(0.0).sqrt()
}

/// `||A - A^dag||` in spectral norm.
pub fn hermitian_residual(a: &ComplexMatrix) -> f64 {
    spectral_norm(&(a - a.adjoint()))
}

/// `||A + A^dag||` in spectral norm.
pub fn anti_hermitian_residual(a: &ComplexMatrix) -> f64 {
    spectral_norm(&(a + a.adjoint()))
}

/// `||U^dag U - I||` in spectral norm.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    spectral_norm(&(u.adjoint() * u - ComplexMatrix::identity(n, n)))
}

/// Acceptance tolerance for (anti-)Hermiticity checks: `1e-10 max(1, ||A||)`.
pub fn structure_tolerance(a: &ComplexMatrix) -> f64 {
    1e-10 * spectral_norm(a).max(1.0)
}

/// Spectral decomposition `H = Q diag(values) Q^dag`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `exp(-i s H) = Q exp(-i s values) Q^dag`.
    pub fn propagator(&self, s: f64) -> ComplexMatrix {
        let phases = self.values.map(|l| C64::from_polar(1.0, -l * s));
        let mut scaled = self.vectors.clone();
        for (mut col, ph) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *ph;
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i s H) - I`, accurate when `s ||H||` is small.
    pub fn propagator_minus_identity(&self, s: f64) -> ComplexMatrix {
        // e^{-i x} - 1 = -2 i sin(x/2) e^{-i x/2}
        let shifts = self
            .values
            .map(|l| -2.0 * I * (0.5 * l * s).sin() * C64::from_polar(1.0, -0.5 * l * s));
        let mut scaled = self.vectors.clone();
        for (mut col, d) in scaled.column_iter_mut().zip(shifts.iter()) {
            col *= *d;
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (mut col, l) in scaled.column_iter_mut().zip(self.values.iter()) {
            col *= C64::from(*l);
        }
        scaled * self.vectors.adjoint()
    }
}

/// One Newton-Schulz step `Q (3 I - Q^dag Q) / 2` towards the nearest
/// unitary; squares the orthogonality defect of the eigenvector basis.
pub(crate) fn orthonormalize(q: ComplexMatrix) -> ComplexMatrix {
    let n = q.ncols();
    let gram = q.adjoint() * &q;
    let correction = (ComplexMatrix::identity(n, n) * C64::from(3.0) - gram) * C64::from(0.5);
    q * correction
}

fn eigh_unchecked(h: &ComplexMatrix) -> HermitianEigen {
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = ComplexMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    HermitianEigen {
        values,
        vectors: orthonormalize(vectors),
    }
}

pub fn herm_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            op: "herm_eig",
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    let residual = hermitian_residual(h);
    let tol = structure_tolerance(h);
    if residual > tol {
        return Err(Error::NotHermitian { residual, tol });
    }
    Ok(eigh_unchecked(h))
}

/// `exp(G)` for anti-Hermitian `G`, via the eigendecomposition of `iG`.
pub fn expm_antiherm(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !g.is_square() {
        return Err(Error::NotSquare {
            op: "expm_antiherm",
            rows: g.nrows(),
            cols: g.ncols(),
        });
    }
    let residual = anti_hermitian_residual(g);
    let tol = structure_tolerance(g);
    if residual > tol {
        return Err(Error::NotAntiHermitian { residual, tol });
    }
    if g.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(ComplexMatrix::identity(g.nrows(), g.ncols()));
    }
    let h = g * I;
    Ok(eigh_unchecked(&h).propagator(1.0))
}

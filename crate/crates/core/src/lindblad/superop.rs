use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ops::{expm, linalg, CMatrix, HilbertSpace, Operator, C64, I, ONE, ZERO};

/// Row-major vectorization: `vec(X)[a*d + b] = X[a, b]`.
pub fn vectorize(x: &CMatrix) -> DVector<C64> {
    let d = x.nrows();
    DVector::from_fn(d * x.ncols(), |k, _| x[(k / d, k % d)])
}

/// Inverse of [`vectorize`] for a square `d x d` matrix.
pub fn unvectorize(v: &DVector<C64>, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |a, b| v[a * d + b])
}

/// Matrix of `X -> A X B` under row-major vectorization, i.e. `A ⊗ Bᵀ`.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(&b.transpose())
}

/// Linear map on operators, stored as a `d² x d²` matrix acting on
/// row-vectorized operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.dim() * space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix })
    }

    pub(crate) fn from_parts(space: HilbertSpace, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim() * space.dim());
        Self { space, matrix }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.dim() * space.dim();
        Self { space: space.clone(), matrix: CMatrix::identity(n, n) }
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let n = space.dim() * space.dim();
        Self { space: space.clone(), matrix: CMatrix::zeros(n, n) }
    }

    /// Unitary conjugation `rho -> U rho U†`.
    pub fn from_unitary(u: &Operator) -> Self {
        Self { space: u.space().clone(), matrix: sandwich(u.matrix(), &u.matrix().adjoint()) }
    }

    /// `rho -> sum_k K_k rho K_k†`.
    pub fn from_kraus(space: &HilbertSpace, kraus: &[CMatrix]) -> Result<Self> {
        let d = space.dim();
        let mut m = CMatrix::zeros(d * d, d * d);
        for k in kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: k.nrows() });
            }
            m += sandwich(k, &k.adjoint());
        }
        Ok(Self { space: space.clone(), matrix: m })
    }

    /// Coherent generator `-i[H, .]`.
    pub fn hamiltonian(h: &Operator) -> Self {
        let d = h.dim();
        let id = CMatrix::identity(d, d);
        let m = (h.matrix().kronecker(&id) - id.kronecker(&h.matrix().transpose())) * (-I);
        Self { space: h.space().clone(), matrix: m }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    /// Dimension d of the underlying Hilbert space.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(x)), self.dim())
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        Operator::new(self.space.clone(), self.apply_matrix(x.matrix()))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Superoperator) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * C64::new(s, 0.0) }
    }

    /// `exp(t * self)`.
    pub fn exp(&self, t: f64) -> Result<Self> {
        Ok(Self { space: self.space.clone(), matrix: expm(&(&self.matrix * C64::new(t, 0.0)))? })
    }

    /// Map on the composite space acting as `a` on the first factor and `b`
    /// on the second.
    pub fn tensor(a: &Superoperator, b: &Superoperator) -> Self {
        let (d1, d2) = (a.dim(), b.dim());
        let d = d1 * d2;
        let mut m = CMatrix::zeros(d * d, d * d);
        let row = |x1: usize, x2: usize, y1: usize, y2: usize| (x1 * d2 + x2) * d + y1 * d2 + y2;
        for (p1, q1) in (0..d1 * d1).flat_map(|p| (0..d1 * d1).map(move |q| (p, q))) {
            let va = a.matrix[(p1, q1)];
            if va == ZERO {
                continue;
            }
            let (a1, b1, c1, e1) = (p1 / d1, p1 % d1, q1 / d1, q1 % d1);
            for p2 in 0..d2 * d2 {
                for q2 in 0..d2 * d2 {
                    let vb = b.matrix[(p2, q2)];
                    if vb == ZERO {
                        continue;
                    }
                    let (a2, b2, c2, e2) = (p2 / d2, p2 % d2, q2 / d2, q2 % d2);
                    m[(row(a1, a2, b1, b2), row(c1, c2, e1, e2))] = va * vb;
                }
            }
        }
        Self { space: a.space.tensor(&b.space), matrix: m }
    }

    /// Largest deviation of `Tr Φ(E_ij)` from `δ_ij` over matrix units.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for q in 0..d * d {
            let tr: C64 = (0..d).map(|a| self.matrix[(a * d + a, q)]).sum();
            let target = if q / d == q % d { ONE } else { ZERO };
            worst = worst.max((tr - target).norm());
        }
        worst
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_defect() <= tol
    }

    /// Largest entrywise distance to another superoperator.
    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        linalg::max_abs(&(&self.matrix - &other.matrix))
    }

    /// Spectral norm of the matrix.
    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }
}

//! Dense complex operators on labeled tensor-product Hilbert spaces.
//!
//! Composite spaces use row-major tensor layout: the leftmost factor is the
//! slowest-varying index. Qubit basis states follow the convention
//! `|0> <-> sigma_z = -1`, `|1> <-> sigma_z = +1`, so that
//! `sigma_- = (sigma_x - i sigma_y)/2 = |0><1|` lowers into `|0>`.

mod expm;
pub mod linalg;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expm::{expm, expm_frechet};

/// Complex scalar used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Finite-dimensional Hilbert space with labeled tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    factor_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidSpace("no tensor factors".into()));
        }
        if factor_dims.contains(&0) {
            return Err(Error::InvalidSpace(format!("zero-dimensional factor in {factor_dims:?}")));
        }
        Ok(Self { factor_dims })
    }

    /// A single factor of dimension `dim`.
    pub fn single(dim: usize) -> Self {
        Self::new(vec![dim.max(1)]).expect("positive dimension")
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n.max(1)]).expect("positive qubit count")
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    /// Total dimension d.
    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Space of `self ⊗ other`.
    pub fn tensor(&self, other: &HilbertSpace) -> HilbertSpace {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        HilbertSpace { factor_dims: dims }
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factor_dims.iter().map(|d| d.to_string()).collect();
        write!(f, "C^[{}]", parts.join("x"))
    }
}

/// Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The 2x2 Pauli matrix in the `|0> <-> sigma_z = -1` basis.
    pub fn matrix(self) -> CMatrix {
        match self {
            Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, I, -I, ZERO]),
            Axis::Z => CMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE]),
        }
    }
}

/// A square complex matrix acting on a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix })
    }

    /// Wrap a square matrix as an operator on a single factor.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let space = HilbertSpace::single(matrix.nrows());
        Self::new(space, matrix)
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: CMatrix::identity(d, d) }
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: CMatrix::zeros(d, d) }
    }

    /// `|i><j|` in the computational basis.
    pub fn basis_outer(space: &HilbertSpace, i: usize, j: usize) -> Self {
        let mut op = Self::zeros(space);
        op.matrix[(i, j)] = ONE;
        op
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Same matrix relabeled onto another space of equal dimension.
    pub fn relabel(self, space: HilbertSpace) -> Result<Self> {
        Self::new(space, self.matrix)
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let d = self.dim();
        linalg::max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(d, d))) <= tol
    }

    /// Hilbert-Schmidt norm `sqrt(Tr A†A)`.
    pub fn hs_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Checked product `self * other`.
    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        same_dim(self, other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix })
    }

    /// Largest entrywise distance to another operator.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        linalg::max_abs(&(&self.matrix - &other.matrix))
    }
}

fn same_dim(a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { space: self.space, matrix: -self.matrix }
    }
}

/// Pauli operator `1 ⊗ … ⊗ sigma_axis ⊗ … ⊗ 1` with `sigma_axis` at `site`.
pub fn pauli_on(space: &HilbertSpace, site: usize, axis: Axis) -> Result<Operator> {
    let dims = space.factor_dims();
    if site >= dims.len() {
        return Err(Error::SiteOutOfRange { site, factors: dims.len() });
    }
    if let Some((k, &d)) = dims.iter().enumerate().find(|(_, &d)| d != 2) {
        return Err(Error::NotQubit { site: k, dim: d });
    }
    Ok(Operator { space: space.clone(), matrix: embed(dims, site, &axis.matrix()) })
}

/// Place a local matrix on factor `site`, identities elsewhere.
pub fn embed(dims: &[usize], site: usize, local: &CMatrix) -> CMatrix {
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    let l = CMatrix::identity(left, left);
    let r = CMatrix::identity(right, right);
    l.kronecker(local).kronecker(&r)
}

/// Kronecker product on the concatenated space.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator { space: a.space.tensor(&b.space), matrix: a.matrix.kronecker(&b.matrix) }
}

/// `AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    same_dim(a, b)?;
    Ok(Operator { space: a.space.clone(), matrix: mat_commutator(&a.matrix, &b.matrix) })
}

pub(crate) fn mat_commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Hilbert-Schmidt inner product `Tr{A†B}`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    same_dim(a, b)?;
    Ok(linalg::hs_inner(&a.matrix, &b.matrix))
}

/// Hilbert-Schmidt norm of an operator.
pub fn hs_norm(a: &Operator) -> f64 {
    a.hs_norm()
}

/// Operator exponential.
pub fn expm_op(a: &Operator) -> Result<Operator> {
    Ok(Operator { space: a.space.clone(), matrix: expm(&a.matrix)? })
}

/// Trace-one, Hermitian, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub const TOL: f64 = 1e-10;

    pub fn new(op: Operator) -> Result<Self> {
        let tr = op.trace();
        if (tr - ONE).norm() > Self::TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let defect = op.hermiticity_defect();
        if defect > Self::TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let min_eig = linalg::hermitian_eigenvalues(op.matrix()).iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -Self::TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self(op))
    }

    /// Totally mixed state `1/d`.
    pub fn maximally_mixed(space: &HilbertSpace) -> Self {
        let d = space.dim() as f64;
        Self(Operator::identity(space).scale_real(1.0 / d))
    }

    /// Pure state `|k><k|` in the computational basis.
    pub fn basis_state(space: &HilbertSpace, k: usize) -> Self {
        Self(Operator::basis_outer(space, k, k))
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }
}

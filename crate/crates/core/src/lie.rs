//! Dynamical Lie algebras as real spans of anti-Hermitian matrices.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{apply_superprojector, detect_dfs, vectorize, LindbladSpec};
use crate::ops::{mat_commutator, CMatrix, Operator, C64, I};
use crate::zeno::project_hamiltonian;

/// Orthonormal (Hilbert-Schmidt) basis of a real Lie algebra of
/// anti-Hermitian `d x d` matrices.
#[derive(Clone, Debug)]
pub struct LieBasis {
    dim: usize,
    elements: Vec<CMatrix>,
    stack: CMatrix,
}

impl LieBasis {
    fn empty(dim: usize) -> Self {
        Self { dim, elements: Vec::new(), stack: CMatrix::zeros(dim * dim, 0) }
    }

    /// Hilbert-space dimension d.
    pub fn space_dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the algebra.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    fn project_out(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut r = v.clone();
        if self.elements.is_empty() {
            return r;
        }
        for _ in 0..2 {
            let coeffs = self.stack.ad_mul(&r).map(|z| C64::new(z.re, 0.0));
            r -= &self.stack * coeffs;
        }
        r
    }

    /// Norm of the component of `x` outside the span.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        self.project_out(&vectorize(x)).norm()
    }

    fn try_add(&mut self, x: &CMatrix, tol: f64) -> bool {
        let r = self.project_out(&vectorize(x));
        self.push_residual(r, tol)
    }

    /// Appends an already-orthogonalized direction if it clears `tol`.
    fn push_residual(&mut self, r: DVector<C64>, tol: f64) -> bool {
        let norm = r.norm();
        if norm <= tol {
            return false;
        }
        let r = r / C64::new(norm, 0.0);
        let d = self.dim;
        let elem = CMatrix::from_fn(d, d, |a, b| r[a * d + b]);
        let anti = (&elem - elem.adjoint()) * C64::new(0.5, 0.0);
        let n = self.stack.ncols();
        self.stack = std::mem::replace(&mut self.stack, CMatrix::zeros(0, 0)).insert_column(n, C64::new(0.0, 0.0));
        self.stack.set_column(n, &vectorize(&anti));
        self.elements.push(anti);
        true
    }
}

/// Tuning for [`lie_closure_with`].
#[derive(Clone, Debug)]
pub struct ClosureOptions {
    /// Minimum residual norm for a unit-norm candidate to count as new.
    pub tol: f64,
    /// Abort once the dimension exceeds this; defaults to `4 d^2`.
    pub cap: Option<usize>,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        Self { tol: 1e-8, cap: None }
    }
}

/// `Lie(i H_0, ..., i H_m)` with default options.
pub fn lie_closure(generators: &[Operator]) -> Result<LieBasis> {
    lie_closure_with(generators, &ClosureOptions::default())
}

pub fn lie_closure_with(generators: &[Operator], opts: &ClosureOptions) -> Result<LieBasis> {
    let d = generators.first().map(Operator::dim).ok_or_else(|| Error::InvalidParameter("no generators".into()))?;
    for g in generators {
        if g.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: g.dim() });
        }
        let defect = g.hermiticity_defect();
        if defect > LindbladSpec::HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
    }
    let cap = opts.cap.unwrap_or(4 * d * d);
    let full = d * d;
    let mut basis = LieBasis::empty(d);
    for g in generators {
        let x = g.matrix() * I;
        let norm = x.norm();
        if norm > 0.0 {
            basis.try_add(&(x / C64::new(norm, 0.0)), opts.tol);
        }
    }
    if basis.is_empty() {
        return Err(Error::InvalidParameter("all generators vanish".into()));
    }
    // Breadth-first rounds: every commutator involving an element from the
    // previous round is residualized at once, then directions are accepted
    // largest-first so that near-dependent candidates are never promoted
    // before the well-conditioned ones they depend on.
    let mut done = 1;
    while done < basis.len() && basis.len() < full {
        let end = basis.len();
        let pairs: Vec<(usize, usize)> = (done..end).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        done = end;
        let mut residuals: Vec<DVector<C64>> = pairs
            .par_iter()
            .map(|&(i, j)| basis.project_out(&vectorize(&mat_commutator(&basis.elements[i], &basis.elements[j]))))
            .collect();
        while basis.len() < full {
            let Some((k, norm)) = residuals
                .iter()
                .map(DVector::norm)
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(&b.1))
            else {
                break;
            };
            if norm <= opts.tol {
                break;
            }
            let r = basis.project_out(&residuals.swap_remove(k));
            if !basis.push_residual(r, opts.tol) {
                continue;
            }
            if basis.len() > cap {
                return Err(Error::DimensionCap(cap));
            }
            let newest = basis.stack.column(basis.len() - 1).into_owned();
            residuals.par_iter_mut().for_each(|v| {
                let c = C64::new(newest.dotc(v).re, 0.0);
                *v -= &newest * c;
            });
            residuals.retain(|v| v.norm() > opts.tol);
        }
    }
    Ok(basis)
}

/// Generalized Gell-Mann matrices spanning the traceless Hermitian `d x d`
/// matrices.
pub fn gell_mann(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    let one = C64::new(1.0, 0.0);
    for j in 0..d {
        for k in j + 1..d {
            let mut s = CMatrix::zeros(d, d);
            s[(j, k)] = one;
            s[(k, j)] = one;
            out.push(s);
            let mut a = CMatrix::zeros(d, d);
            a[(j, k)] = -I;
            a[(k, j)] = I;
            out.push(a);
        }
    }
    for l in 1..d {
        let f = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for k in 0..l {
            m[(k, k)] = C64::new(f, 0.0);
        }
        m[(l, l)] = C64::new(-f * l as f64, 0.0);
        out.push(m);
    }
    out
}

/// Controllability summary of a closed algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllabilityVerdict {
    pub dim: usize,
    pub contains_su: bool,
    pub equals_u: bool,
    pub block_dims: Vec<usize>,
}

const MEMBERSHIP_TOL: f64 = 1e-7;

pub fn controllability_verdict(basis: &LieBasis) -> ControllabilityVerdict {
    let d = basis.space_dim();
    let dim = basis.len();
    let contains_su = dim + 1 >= d * d
        && gell_mann(d).iter().all(|h| {
            let x = h * I;
            let n = x.norm();
            basis.residual(&(x / C64::new(n, 0.0))) < MEMBERSHIP_TOL
        });
    let ident = CMatrix::identity(d, d) * C64::new(0.0, 1.0 / (d as f64).sqrt());
    let equals_u = contains_su && dim == d * d && basis.residual(&ident) < MEMBERSHIP_TOL;
    ControllabilityVerdict { dim, contains_su, equals_u, block_dims: Vec::new() }
}

/// Dimension of the closure, or 0 when every generator vanishes.
pub fn closure_dim(generators: &[Operator]) -> Result<usize> {
    let live: Vec<Operator> = generators.iter().filter(|g| g.hs_norm() > 1e-12).cloned().collect();
    if live.is_empty() {
        return Ok(0);
    }
    Ok(lie_closure(&live)?.len())
}

/// Closure dimensions of the projected controls.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfsLieDims {
    /// One entry per decoherence-free block.
    pub block_dims: Vec<usize>,
    /// Closure of the superprojected controls, for unital dissipators.
    pub unital_dim: Option<usize>,
}

/// Lie dimensions of the controls projected by the strong-damping limit of
/// `spec`'s dissipative part.
pub fn dfs_lie_dimension(spec: &LindbladSpec, controls: &[Operator]) -> Result<DfsLieDims> {
    let dissipative = spec.dissipative_part();
    let dfs = detect_dfs(&dissipative);
    let mut block_dims = Vec::with_capacity(dfs.len());
    for block in 0..dfs.len() {
        let projected = controls.iter().map(|h| project_hamiltonian(h, &dfs, block)).collect::<Result<Vec<_>>>()?;
        block_dims.push(closure_dim(&projected)?);
    }
    let unital_dim = if dissipative.is_unital(1e-10) {
        let projected =
            controls.iter().map(|h| apply_superprojector(&dissipative, h)).collect::<Result<Vec<_>>>()?;
        let herm: Vec<Operator> = projected
            .into_iter()
            .map(|op| {
                let m = (op.matrix() + op.matrix().adjoint()) * C64::new(0.5, 0.0);
                Operator::new(op.space().clone(), m)
            })
            .collect::<Result<_>>()?;
        Some(closure_dim(&herm)?)
    } else {
        None
    };
    Ok(DfsLieDims { block_dims, unital_dim })
}

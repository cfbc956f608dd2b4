//! Lindblad dissipators in the form
//!
//! ```text
//! D(rho) = -i[H, rho] - sum_j g_j (L_j† L_j rho + rho L_j† L_j - 2 L_j rho L_j†)
//! ```
//!
//! together with their propagators, steady-state superprojectors,
//! decoherence-free subspaces and relaxation rates.

mod dfs;
mod steady;
mod superop;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::{linalg, CMatrix, HilbertSpace, Operator, C64, I};

pub use dfs::{detect_dfs, DFSDecomposition, DfsBlock};
pub use steady::{
    apply_superprojector, relaxation_report, steady_superprojector, superprojector_cg, ZenoBoundReport,
};
pub use superop::{sandwich, unvectorize, vectorize, Superoperator};

/// One dissipation channel `(g_j, L_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladTerm {
    pub rate: f64,
    pub op: Operator,
}

impl LindbladTerm {
    pub fn new(rate: f64, op: Operator) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::NegativeRate(rate));
        }
        Ok(Self { rate, op })
    }
}

/// Hamiltonian plus dissipation channels on a common space.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladSpec {
    hamiltonian: Operator,
    terms: Vec<LindbladTerm>,
}

impl LindbladSpec {
    pub const HERMITIAN_TOL: f64 = 1e-10;

    pub fn new(hamiltonian: Operator, terms: Vec<LindbladTerm>) -> Result<Self> {
        if !hamiltonian.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = hamiltonian.hermiticity_defect();
        if defect > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        for t in &terms {
            if t.op.dim() != hamiltonian.dim() {
                return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), found: t.op.dim() });
            }
            if !t.op.is_finite() {
                return Err(Error::NonFinite);
            }
            if !(t.rate >= 0.0) {
                return Err(Error::NegativeRate(t.rate));
            }
        }
        Ok(Self { hamiltonian, terms })
    }

    /// Purely dissipative spec (zero Hamiltonian).
    pub fn dissipative(space: &HilbertSpace, terms: Vec<LindbladTerm>) -> Result<Self> {
        Self::new(Operator::zeros(space), terms)
    }

    pub fn space(&self) -> &HilbertSpace {
        self.hamiltonian.space()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn terms(&self) -> &[LindbladTerm] {
        &self.terms
    }

    /// Terms with strictly positive rate.
    pub fn active_terms(&self) -> impl Iterator<Item = &LindbladTerm> {
        self.terms.iter().filter(|t| t.rate > 0.0)
    }

    pub fn with_hamiltonian(&self, h: Operator) -> Result<Self> {
        Self::new(h, self.terms.clone())
    }

    /// Same channels with the Hamiltonian removed.
    pub fn dissipative_part(&self) -> Self {
        Self { hamiltonian: Operator::zeros(self.space()), terms: self.terms.clone() }
    }

    /// Every rate multiplied by `factor`.
    pub fn scale_rates(&self, factor: f64) -> Result<Self> {
        let terms = self.terms.iter().map(|t| LindbladTerm::new(t.rate * factor, t.op.clone())).collect::<Result<_>>()?;
        Self::new(self.hamiltonian.clone(), terms)
    }

    /// `G = sum_j g_j L_j† L_j`.
    pub fn g_operator(&self) -> CMatrix {
        let d = self.dim();
        let mut g = CMatrix::zeros(d, d);
        for t in self.active_terms() {
            g += t.op.matrix().adjoint() * t.op.matrix() * C64::new(t.rate, 0.0);
        }
        g
    }

    /// Zero Hamiltonian and Hermitian channels, so the generator is
    /// self-adjoint in the Hilbert-Schmidt inner product.
    pub fn is_self_dual(&self) -> bool {
        linalg::max_abs(self.hamiltonian.matrix()) <= Self::HERMITIAN_TOL
            && self.active_terms().all(|t| t.op.is_hermitian(Self::HERMITIAN_TOL))
    }

    /// `max |D(1)|` for the dissipative part.
    pub fn unitality_defect(&self) -> f64 {
        let d = self.dim();
        linalg::max_abs(&apply_dissipator(self, &CMatrix::identity(d, d)))
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_defect() <= tol
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SpecDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    rate: f64,
    op: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    dims: Vec<usize>,
    #[serde(default)]
    hamiltonian: Vec<[f64; 2]>,
    #[serde(default)]
    terms: Vec<TermDoc>,
}

fn flatten(m: &CMatrix) -> Vec<[f64; 2]> {
    let d = m.nrows();
    (0..d * d).map(|k| m[(k / d, k % d)]).map(|z| [z.re, z.im]).collect()
}

fn unflatten(entries: &[[f64; 2]], d: usize) -> Result<CMatrix> {
    if entries.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: entries.len() });
    }
    Ok(CMatrix::from_fn(d, d, |a, b| {
        let [re, im] = entries[a * d + b];
        C64::new(re, im)
    }))
}

impl From<&LindbladSpec> for SpecDoc {
    fn from(spec: &LindbladSpec) -> Self {
        SpecDoc {
            dims: spec.space().factor_dims().to_vec(),
            hamiltonian: flatten(spec.hamiltonian.matrix()),
            terms: spec.terms.iter().map(|t| TermDoc { rate: t.rate, op: flatten(t.op.matrix()) }).collect(),
        }
    }
}

impl TryFrom<SpecDoc> for LindbladSpec {
    type Error = Error;

    fn try_from(doc: SpecDoc) -> Result<Self> {
        let space = HilbertSpace::new(doc.dims)?;
        let d = space.dim();
        let h = if doc.hamiltonian.is_empty() { CMatrix::zeros(d, d) } else { unflatten(&doc.hamiltonian, d)? };
        let terms = doc
            .terms
            .iter()
            .map(|t| LindbladTerm::new(t.rate, Operator::new(space.clone(), unflatten(&t.op, d)?)?))
            .collect::<Result<Vec<_>>>()?;
        LindbladSpec::new(Operator::new(space, h)?, terms)
    }
}

/// Vectorized generator of the full spec (Hamiltonian and dissipation).
pub fn dissipator_matrix(spec: &LindbladSpec) -> Superoperator {
    let d = spec.dim();
    let id = CMatrix::identity(d, d);
    let h = spec.hamiltonian.matrix();
    let mut m = (h.kronecker(&id) - id.kronecker(&h.transpose())) * (-I);
    for t in spec.active_terms() {
        let l = t.op.matrix();
        let ldl = l.adjoint() * l;
        let g = C64::new(t.rate, 0.0);
        m -= (ldl.kronecker(&id) + id.kronecker(&ldl.transpose())) * g;
        m += l.kronecker(&l.conjugate()) * (g * 2.0);
    }
    Superoperator::from_parts(spec.space().clone(), m)
}

/// Matrix-free action of the full generator on an operator.
pub fn apply_generator(spec: &LindbladSpec, x: &CMatrix) -> CMatrix {
    let h = spec.hamiltonian.matrix();
    (h * x - x * h) * (-I) + apply_dissipator(spec, x)
}

fn apply_dissipator(spec: &LindbladSpec, x: &CMatrix) -> CMatrix {
    let d = spec.dim();
    let mut out = CMatrix::zeros(d, d);
    for t in spec.active_terms() {
        let l = t.op.matrix();
        let ldl = l.adjoint() * l;
        let lx = l * x;
        out += (lx * l.adjoint() * C64::new(2.0, 0.0) - &ldl * x - x * &ldl) * C64::new(t.rate, 0.0);
    }
    out
}

/// `exp(t * D)`.
pub fn propagate(spec: &LindbladSpec, t: f64) -> Result<Superoperator> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    dissipator_matrix(spec).exp(t)
}

/// Matrix of the dual generator under the pairing `Tr{A D(rho)} = Tr{D*(A) rho}`.
pub fn dual_generator(spec: &LindbladSpec) -> Superoperator {
    let m = dissipator_matrix(spec).into_matrix();
    let d = spec.dim();
    let dual = CMatrix::from_fn(d * d, d * d, |p, q| {
        let (a, b) = (p / d, p % d);
        let (c, e) = (q / d, q % d);
        m[(e * d + c, b * d + a)]
    });
    Superoperator::from_parts(spec.space().clone(), dual)
}

//! Projected Hamiltonians and the Zeno / strong-damping limits of a
//! dissipator combined with coherent control.

use crate::error::{Error, Result};
use crate::lindblad::{apply_superprojector, steady_superprojector, DFSDecomposition, LindbladSpec, Superoperator};
use crate::ops::{linalg, CMatrix, HilbertSpace, Operator};

const UNITAL_TOL: f64 = 1e-8;

/// `P_i H P_i` written in the orthonormal basis of block `i`.
pub fn project_hamiltonian(h: &Operator, dfs: &DFSDecomposition, block: usize) -> Result<Operator> {
    let defect = h.hermiticity_defect();
    if defect > LindbladSpec::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    if h.dim() != dfs.space().dim() {
        return Err(Error::DimensionMismatch { expected: dfs.space().dim(), found: h.dim() });
    }
    let b = &dfs.block(block)?.basis;
    let restricted = b.adjoint() * h.matrix() * b;
    let herm = (&restricted + restricted.adjoint()) * crate::ops::c(0.5, 0.0);
    Operator::new(HilbertSpace::single(b.ncols()), herm)
}

/// `P(H)` for a superprojector of a unital dissipator.
pub fn superproject_hamiltonian(h: &Operator, p: &Superoperator) -> Result<Operator> {
    let d = p.dim();
    let ident = CMatrix::identity(d, d);
    let defect = linalg::max_abs(&(p.apply_matrix(&ident) - &ident));
    if defect > UNITAL_TOL {
        return Err(Error::NonUnital(defect));
    }
    p.apply(h)
}

/// Controls projected onto one DFS block and, for unital dissipators,
/// superprojected on the full space.
#[derive(Clone, Debug)]
pub struct ProjectedControlSystem {
    pub block: usize,
    pub restricted: Vec<Operator>,
    pub superprojected: Option<Vec<Operator>>,
}

impl ProjectedControlSystem {
    pub fn build(spec: &LindbladSpec, dfs: &DFSDecomposition, controls: &[Operator], block: usize) -> Result<Self> {
        let restricted = controls.iter().map(|h| project_hamiltonian(h, dfs, block)).collect::<Result<Vec<_>>>()?;
        let dissipative = spec.dissipative_part();
        let superprojected = if dissipative.is_unital(UNITAL_TOL) {
            Some(controls.iter().map(|h| apply_superprojector(&dissipative, h)).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        Ok(Self { block, restricted, superprojected })
    }
}

fn power(step: &CMatrix, mut n: usize) -> CMatrix {
    let size = step.nrows();
    let mut result = CMatrix::identity(size, size);
    let mut base = step.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `(P e^{K t/n} P)^n`.
pub fn zeno_product(p: &Superoperator, k: &Superoperator, t: f64, n: usize) -> Result<Superoperator> {
    if n == 0 {
        return Err(Error::InvalidParameter("Zeno product needs at least one step".into()));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let slice = k.exp(t / n as f64)?;
    let step = p.matrix() * slice.matrix() * p.matrix();
    Superoperator::new(p.space().clone(), power(&step, n))
}

/// `e^{P K P t} P`, the limit of [`zeno_product`].
pub fn zeno_limit(p: &Superoperator, k: &Superoperator, t: f64) -> Result<Superoperator> {
    let pkp = p.compose(k)?.compose(p)?;
    pkp.exp(t)?.compose(p)
}

/// `|| (e^{t(gK + D)} - e^{g t P K P}) P ||` in spectral norm, with `K` the
/// commutator with the spec's Hamiltonian and `D` its dissipative part.
pub fn strong_damping_error(spec: &LindbladSpec, g: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let dissipative = spec.dissipative_part();
    let p = steady_superprojector(&dissipative)?;
    let k = Superoperator::hamiltonian(spec.hamiltonian());
    let d_mat = crate::lindblad::dissipator_matrix(&dissipative);
    let full = Superoperator::new(spec.space().clone(), k.matrix() * crate::ops::c(g, 0.0) + d_mat.matrix())?;
    let exact = full.exp(t)?;
    let effective = p.compose(&k)?.compose(&p)?.exp(g * t)?;
    let diff = (exact.matrix() - effective.matrix()) * p.matrix();
    Ok(linalg::spectral_norm(&diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{detect_dfs, LindbladTerm};
    use crate::ops::{embed, pauli_on, tensor, Axis, ONE, ZERO};

    fn amp_spec() -> LindbladSpec {
        let s = HilbertSpace::qubits(2);
        let l = embed(&[2, 2], 1, &CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));
        LindbladSpec::dissipative(&s, vec![LindbladTerm::new(1.0, Operator::new(s.clone(), l).unwrap()).unwrap()])
            .unwrap()
    }

    fn drift() -> Operator {
        let s = HilbertSpace::qubits(2);
        let x = pauli_on(&s, 0, Axis::X).unwrap();
        &x * &(&pauli_on(&s, 1, Axis::X).unwrap() + &pauli_on(&s, 1, Axis::Z).unwrap())
    }

    #[test]
    fn zero_generator_leaves_projector() {
        let p = steady_superprojector(&amp_spec()).unwrap();
        let k = Superoperator::zeros(p.space());
        for n in [1, 3, 8] {
            assert!(zeno_product(&p, &k, 1.0, n).unwrap().max_abs_diff(&p) < 1e-12);
        }
        assert!(zeno_product(&p, &k, 1.0, 0).is_err());
    }

    #[test]
    fn projected_generator_acts_as_commutator_on_block() {
        let spec = amp_spec();
        let dfs = detect_dfs(&spec);
        let p = steady_superprojector(&spec).unwrap();
        let h = drift();
        let k = Superoperator::hamiltonian(&h);
        let pkp = p.compose(&k).unwrap().compose(&p).unwrap();
        let b = &dfs.blocks()[0].basis;
        let ph = project_hamiltonian(&h, &dfs, 0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let rho = b.columns(i, 1) * b.columns(j, 1).adjoint();
                let lhs = pkp.apply_matrix(&rho);
                let small = CMatrix::from_fn(2, 2, |a, c| if (a, c) == (i, j) { ONE } else { ZERO });
                let comm = (ph.matrix() * &small - &small * ph.matrix()) * (-crate::ops::I);
                let rhs = b * comm * b.adjoint();
                assert!(linalg::max_abs(&(lhs - rhs)) < 1e-8);
            }
        }
    }

    #[test]
    fn non_unital_superprojection_is_rejected() {
        let p = steady_superprojector(&amp_spec()).unwrap();
        assert!(matches!(superproject_hamiltonian(&drift(), &p), Err(Error::NonUnital(_))));
    }

    #[test]
    fn zeno_error_decreases_with_steps() {
        let p = steady_superprojector(&amp_spec()).unwrap();
        let k = Superoperator::hamiltonian(&drift());
        let limit = zeno_limit(&p, &k, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for n in [1, 2, 4, 8, 16] {
            let z = zeno_product(&p, &k, 1.0, n).unwrap();
            let err = linalg::spectral_norm(&(z.matrix() - limit.matrix()));
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn strong_damping_vanishes_without_coupling() {
        let spec = amp_spec().with_hamiltonian(drift()).unwrap();
        assert!(strong_damping_error(&spec, 0.0, 1.0).unwrap() < 1e-10);
    }

    #[test]
    fn identity_is_superprojected_to_itself() {
        let s = HilbertSpace::qubits(2);
        let z = pauli_on(&s, 1, Axis::Z).unwrap();
        let spec = LindbladSpec::dissipative(&s, vec![LindbladTerm::new(1.0, z).unwrap()]).unwrap();
        let p = steady_superprojector(&spec).unwrap();
        let one = Operator::identity(&s);
        assert!(superproject_hamiltonian(&one, &p).unwrap().max_abs_diff(&one) < 1e-10);
        let x1 = Operator::from_matrix(Axis::X.matrix()).unwrap();
        let z2 = Operator::from_matrix(Axis::Z.matrix()).unwrap();
        let expected = tensor(&x1, &z2);
        assert!(superproject_hamiltonian(&drift(), &p).unwrap().max_abs_diff(&expected) < 1e-10);
    }
}

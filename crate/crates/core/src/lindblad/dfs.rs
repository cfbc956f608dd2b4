use super::LindbladSpec;
use crate::error::{Error, Result};
use crate::ops::{linalg, CMatrix, HilbertSpace, Operator, C64};

const CLUSTER_TOL: f64 = 1e-6;
const REFINE_TOL: f64 = 1e-9;

/// One decoherence-free subspace: every basis vector is a joint eigenvector
/// of the active Lindblad operators and of `G = sum_j g_j L_j† L_j`.
#[derive(Clone, Debug)]
pub struct DfsBlock {
    /// Orthonormal basis vectors as columns.
    pub basis: CMatrix,
    /// Hermitian projector onto the block.
    pub projector: Operator,
    /// Eigenvalue of each Lindblad term on the block. Terms with zero rate
    /// carry the expectation value in the first basis vector.
    pub lambdas: Vec<C64>,
    /// Eigenvalue of `G` on the block.
    pub b: f64,
}

impl DfsBlock {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `k`-th basis vector.
    pub fn vector(&self, k: usize) -> CMatrix {
        self.basis.columns(k, 1).into_owned()
    }
}

/// Mutually orthogonal decoherence-free subspaces of a dissipator.
#[derive(Clone, Debug)]
pub struct DFSDecomposition {
    space: HilbertSpace,
    blocks: Vec<DfsBlock>,
}

impl DFSDecomposition {
    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn blocks(&self) -> &[DfsBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, i: usize) -> Result<&DfsBlock> {
        self.blocks.get(i).ok_or(Error::BlockOutOfRange { block: i, count: self.blocks.len() })
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(DfsBlock::dim).collect()
    }
}

/// Groups of nearly equal eigenvalues, each represented by its mean.
fn cluster(values: &[C64], tol: f64) -> Vec<C64> {
    let mut groups: Vec<(C64, usize)> = Vec::new();
    for &v in values {
        match groups.iter_mut().find(|(c, n)| (*c / *n as f64 - v).norm() <= tol) {
            Some((sum, n)) => {
                *sum += v;
                *n += 1;
            }
            None => groups.push((v, 1)),
        }
    }
    groups.into_iter().map(|(s, n)| s / n as f64).collect()
}

/// Joint eigenspaces of `l` inside each subspace in `blocks`.
fn split_by(l: &CMatrix, blocks: Vec<(CMatrix, Vec<C64>)>) -> Vec<(CMatrix, Vec<C64>)> {
    let d = l.nrows();
    let scale = l.norm().max(1.0);
    let ident = CMatrix::identity(d, d);
    let mut out = Vec::new();
    for (basis, lambdas) in blocks {
        let compressed = basis.adjoint() * l * &basis;
        for lambda in cluster(&linalg::eigenvalues(&compressed), CLUSTER_TOL * scale) {
            let coarse = linalg::null_space(&((l - &ident * lambda) * &basis), CLUSTER_TOL * scale);
            if coarse.ncols() == 0 {
                continue;
            }
            let vecs = &basis * coarse;
            let refined = (vecs.adjoint() * l * &vecs).trace() / vecs.ncols() as f64;
            let fine = linalg::null_space(&((l - &ident * refined) * &basis), REFINE_TOL * scale);
            if fine.ncols() == 0 {
                continue;
            }
            let mut tag = lambdas.clone();
            tag.push(refined);
            out.push((&basis * fine, tag));
        }
    }
    out
}

/// Orthonormal basis of the column span of `basis`, preferring
/// computational basis directions in index order.
fn canonical_basis(basis: &CMatrix) -> CMatrix {
    let d = basis.nrows();
    let k = basis.ncols();
    let proj = basis * basis.adjoint();
    let mut chosen: Vec<CMatrix> = Vec::with_capacity(k);
    for _ in 0..k {
        let residuals: Vec<CMatrix> =
            (0..d).map(|i| linalg::orthogonalize(&proj.columns(i, 1).into_owned(), &chosen)).collect();
        let norms: Vec<f64> = residuals.iter().map(|r| r.norm()).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let pick = norms.iter().position(|&n| n >= 0.5 * max).expect("nonempty span");
        let v = &residuals[pick] / C64::new(norms[pick], 0.0);
        chosen.push(v);
    }
    let mut out = CMatrix::zeros(d, k);
    for (j, v) in chosen.iter().enumerate() {
        out.set_column(j, &v.column(0));
    }
    out
}

fn rounded_key(lambdas: &[C64], b: f64) -> Vec<i64> {
    let r = |x: f64| (x / CLUSTER_TOL).round() as i64;
    lambdas.iter().flat_map(|z| [r(z.re), r(z.im)]).chain(std::iter::once(r(b))).collect()
}

/// Decoherence-free subspaces of the dissipative part of `spec`, found by
/// peeling joint eigenspaces of the active Lindblad operators and then
/// imposing `G psi = b psi` with `b = sum_j g_j |lambda_j|^2`.
pub fn detect_dfs(spec: &LindbladSpec) -> DFSDecomposition {
    let d = spec.dim();
    let active: Vec<usize> = (0..spec.terms().len()).filter(|&j| spec.terms()[j].rate > 0.0).collect();
    let mut blocks = vec![(CMatrix::identity(d, d), Vec::new())];
    for &j in &active {
        blocks = split_by(spec.terms()[j].op.matrix(), blocks);
    }
    let g = spec.g_operator();
    let g_scale = g.norm().max(1.0);
    let ident = CMatrix::identity(d, d);

    let mut found: Vec<DfsBlock> = Vec::new();
    for (basis, tags) in blocks {
        let b: f64 = active.iter().zip(&tags).map(|(&j, z)| spec.terms()[j].rate * z.norm_sqr()).sum();
        let keep = linalg::null_space(&((&g - &ident * C64::new(b, 0.0)) * &basis), REFINE_TOL * g_scale);
        if keep.ncols() == 0 {
            continue;
        }
        let basis = canonical_basis(&(&basis * keep));
        let first = basis.columns(0, 1).into_owned();
        let mut lambdas = Vec::with_capacity(spec.terms().len());
        let mut next = tags.iter();
        for t in spec.terms() {
            if t.rate > 0.0 {
                lambdas.push(*next.next().expect("one tag per active term"));
            } else {
                lambdas.push((first.adjoint() * t.op.matrix() * &first)[(0, 0)]);
            }
        }
        let projector = Operator::new(spec.space().clone(), &basis * basis.adjoint()).expect("square projector");
        found.push(DfsBlock { basis, projector, lambdas, b });
    }
    found.sort_by_key(|blk| rounded_key(&blk.lambdas, blk.b));
    DFSDecomposition { space: spec.space().clone(), blocks: found }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::LindbladTerm;
    use crate::ops::{c, embed, pauli_on, Axis, ONE, ZERO};

    fn check_block(spec: &LindbladSpec, block: &DfsBlock) {
        let g = spec.g_operator();
        for k in 0..block.dim() {
            let v = block.vector(k);
            for (t, lambda) in spec.terms().iter().zip(&block.lambdas) {
                if t.rate > 0.0 {
                    assert!((t.op.matrix() * &v - &v * *lambda).norm() < 1e-8);
                }
            }
            assert!((&g * &v - &v * c(block.b, 0.0)).norm() < 1e-8);
        }
        let p = block.projector.matrix();
        assert!(linalg::max_abs(&(p * p - p)) < 1e-12);
    }

    #[test]
    fn amplitude_damping_single_block() {
        let s = HilbertSpace::qubits(2);
        let l = embed(&[2, 2], 1, &CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));
        let spec =
            LindbladSpec::dissipative(&s, vec![LindbladTerm::new(1.0, Operator::new(s.clone(), l).unwrap()).unwrap()])
                .unwrap();
        let dfs = detect_dfs(&spec);
        assert_eq!(dfs.block_dims(), vec![2]);
        let b = &dfs.blocks()[0];
        assert!((b.basis[(0, 0)] - ONE).norm() < 1e-12);
        assert!((b.basis[(2, 1)] - ONE).norm() < 1e-12);
        check_block(&spec, b);
        assert!(matches!(dfs.block(1), Err(Error::BlockOutOfRange { .. })));
    }

    #[test]
    fn dephasing_two_blocks_ordered() {
        let s = HilbertSpace::qubits(2);
        let z = pauli_on(&s, 1, Axis::Z).unwrap();
        let spec = LindbladSpec::dissipative(&s, vec![LindbladTerm::new(2.0, z).unwrap()]).unwrap();
        let dfs = detect_dfs(&spec);
        assert_eq!(dfs.block_dims(), vec![2, 2]);
        assert!((dfs.blocks()[0].lambdas[0] - c(-1.0, 0.0)).norm() < 1e-9);
        assert!((dfs.blocks()[0].b - 2.0).abs() < 1e-9);
        for b in dfs.blocks() {
            check_block(&spec, b);
        }
        let cross = dfs.blocks()[0].projector.matrix() * dfs.blocks()[1].projector.matrix();
        assert!(linalg::max_abs(&cross) < 1e-12);
    }

    #[test]
    fn no_dissipation_gives_whole_space() {
        let spec = LindbladSpec::dissipative(&HilbertSpace::qubits(2), vec![]).unwrap();
        assert_eq!(detect_dfs(&spec).block_dims(), vec![4]);
    }

    #[test]
    fn cluster_merges_nearby_values() {
        let v = [c(0.0, 0.0), c(1e-9, 0.0), c(1.0, 0.0)];
        assert_eq!(cluster(&v, 1e-6).len(), 2);
    }
}

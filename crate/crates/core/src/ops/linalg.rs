//! Small dense linear-algebra helpers over complex matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CMatrix, C64};

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `Tr{A†B}`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Solve `A X = B`; `None` when `A` is singular.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    let x = a.clone().lu().solve(b)?;
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(x)
    } else {
        None
    }
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    let n = a.nrows();
    solve(a, &CMatrix::identity(n, n))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().cloned().unwrap_or(0.0)
}

pub fn rank(m: &CMatrix, tol: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis (as columns) of `{x : M x = 0}`, keeping right singular
/// vectors whose singular value is at most `tol`.
pub fn null_space(m: &CMatrix, tol: f64) -> CMatrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let keep: Vec<usize> = svd.singular_values.iter().enumerate().filter(|(_, &s)| s <= tol).map(|(k, _)| k).collect();
    let mut basis = CMatrix::zeros(cols, keep.len());
    for (out, &k) in keep.iter().enumerate() {
        for r in 0..cols {
            basis[(r, out)] = v_t[(k, r)].conj();
        }
    }
    basis
}

/// Eigenvalues of a general complex matrix. Hermitian input goes through the
/// symmetric solver; otherwise the Schur form is used, retrying on a shifted
/// random unitary similarity when the QR iteration stalls.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let scale = m.norm();
    if max_abs(&(m - m.adjoint())) <= 1e-14 * scale.max(1.0) {
        return hermitian_eigen(m).0.into_iter().map(|x| C64::new(x, 0.0)).collect();
    }
    let diagonal = |t: CMatrix| (0..n).map(|k| t[(k, k)]).collect::<Vec<_>>();
    let max_iter = 200 * n + 1000;
    if let Some(s) = m.clone().try_schur(f64::EPSILON, max_iter) {
        return diagonal(s.unpack().1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (attempt, eps) in [1e-15, 1e-14, 1e-13, 1e-12].into_iter().enumerate() {
        let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let q = g.qr().q();
        let shift = C64::new(0.1 * (attempt + 1) as f64 * scale.max(1.0), 0.0);
        let conj = q.adjoint() * (m + CMatrix::identity(n, n) * shift) * &q;
        if let Some(s) = conj.try_schur(eps, max_iter) {
            return diagonal(s.unpack().1).into_iter().map(|z| z - shift).collect();
        }
    }
    panic!("Schur iteration failed to converge on a {n}x{n} matrix");
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_eigen(m).0;
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Eigen-decomposition `(values, vectors)` of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

/// `f(M)` for Hermitian `M` applied through its eigenvalues.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let fv = C64::new(f(vals[j]), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    scaled * vecs.adjoint()
}

/// Modified Gram-Schmidt of `v` against orthonormal columns of `basis`, two
/// passes. Returns the residual.
pub fn orthogonalize(v: &CMatrix, basis: &[CMatrix]) -> CMatrix {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis {
            let p = hs_inner(b, &r);
            r -= b * p;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::c;

    #[test]
    fn null_space_of_projector() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(1.0, 0.0);
        let n = null_space(&m, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!(max_abs(&(&m * &n)) < 1e-14);
        assert!(max_abs(&(n.adjoint() * &n - CMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = CMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let n = null_space(&m, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!(max_abs(&(&m * &n)) < 1e-14);
    }

    #[test]
    fn hermitian_function_square_root() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let r = hermitian_fn(&m, f64::sqrt);
        assert!(max_abs(&(&r * &r - &m)) < 1e-13);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMatrix::from_row_slice(2, 2, &[c(-3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]);
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-14);
        let ev = eigenvalues(&m);
        assert!(ev.iter().any(|z| (z - c(-3.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn eigenvalues_of_degenerate_matrices() {
        assert_eq!(eigenvalues(&CMatrix::zeros(4, 4)), vec![c(0.0, 0.0); 4]);
        let mut nil = CMatrix::zeros(3, 3);
        nil[(0, 1)] = c(1.0, 0.0);
        nil[(1, 2)] = c(1.0, 0.0);
        assert!(eigenvalues(&nil).iter().all(|z| z.norm() < 1e-4));
    }
}

use super::{apply_generator, dissipator_matrix, LindbladSpec, Superoperator};
use crate::error::{Error, Result};
use crate::ops::{linalg, CMatrix, Operator, C64};

/// Largest Hilbert dimension for which the dense route is used when a
/// matrix-free alternative exists.
const DENSE_DIM_LIMIT: usize = 16;

fn scale_of(m: &CMatrix) -> f64 {
    m.norm().max(1.0)
}

fn kernel_dim(m: &CMatrix, tol: f64) -> usize {
    m.ncols() - linalg::rank(m, tol)
}

/// Spectral projector onto the kernel of the generator along the span of
/// its other generalized eigenspaces (the infinite-time limit of the
/// semigroup).
pub fn steady_superprojector(spec: &LindbladSpec) -> Result<Superoperator> {
    let gen = dissipator_matrix(spec);
    let m = gen.matrix();
    let scale = scale_of(m);
    let tol = 1e-9 * scale;

    let m2 = m * m;
    let k1 = kernel_dim(m, tol);
    let k2 = kernel_dim(&m2, 1e-9 * scale * scale);
    if k1 != k2 {
        return Err(Error::NonSemisimpleKernel { kernel: k1, kernel_sq: k2 });
    }
    check_attractive(m, scale)?;

    let right = linalg::null_space(m, tol);
    let left = linalg::null_space(&m.adjoint(), tol);
    let overlap = left.adjoint() * &right;
    let inv = linalg::inverse(&overlap).ok_or(Error::NonSemisimpleKernel { kernel: k1, kernel_sq: k2 })?;
    let p = right * inv * left.adjoint();
    Ok(Superoperator::from_parts(spec.space().clone(), p))
}

fn check_attractive(m: &CMatrix, scale: f64) -> Result<()> {
    let zero_tol = 1e-7 * scale;
    for z in linalg::eigenvalues(m) {
        if z.norm() > zero_tol && z.re >= -1e-10 * scale {
            return Err(Error::NonAttractive { re: z.re, im: z.im });
        }
    }
    Ok(())
}

/// Kernel component of `x` for a self-dual generator, by conjugate gradients
/// on `-D y = -D x`: the iterates stay in the range of `D`, so `x - y` is the
/// orthogonal (and here spectral) projection onto the kernel.
pub fn superprojector_cg(spec: &LindbladSpec, x: &CMatrix) -> Result<CMatrix> {
    if !spec.is_self_dual() {
        return Err(Error::InvalidParameter("matrix-free superprojection needs a self-dual generator".into()));
    }
    let op = |v: &CMatrix| -apply_generator(spec, v);
    let b = op(x);
    let b_norm = b.norm();
    let mut y = CMatrix::zeros(x.nrows(), x.ncols());
    if b_norm == 0.0 {
        return Ok(x.clone());
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let max_iter = 20 * x.nrows() * x.ncols() + 100;
    for _ in 0..max_iter {
        let ap = op(&p);
        let pap = linalg::hs_inner(&p, &ap).re;
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        y += &p * C64::new(alpha, 0.0);
        r -= ap * C64::new(alpha, 0.0);
        let rr_new = r.norm_squared();
        if rr_new.sqrt() <= 1e-14 * b_norm {
            break;
        }
        p = &r + &p * C64::new(rr_new / rr, 0.0);
        rr = rr_new;
    }
    Ok(x - y)
}

/// `P(x)` for the steady-state superprojector, choosing the matrix-free
/// route for large self-dual generators.
pub fn apply_superprojector(spec: &LindbladSpec, x: &Operator) -> Result<Operator> {
    if x.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: x.dim() });
    }
    let out = if spec.is_self_dual() && spec.dim() > DENSE_DIM_LIMIT {
        superprojector_cg(spec, x.matrix())?
    } else {
        steady_superprojector(spec)?.apply_matrix(x.matrix())
    };
    Operator::new(spec.space().clone(), out)
}

/// Relaxation data of the generator: the nonvanishing eigenvalues and the
/// slowest relaxation time `tau_R = 1 / min |Re lambda_h|`.
#[derive(Clone, Debug)]
pub struct ZenoBoundReport {
    pub tau_r: f64,
    pub eigenvalues: Vec<C64>,
    pub attractive: bool,
}

pub fn relaxation_report(spec: &LindbladSpec) -> Result<ZenoBoundReport> {
    let gen = dissipator_matrix(spec);
    let scale = scale_of(gen.matrix());
    let zero_tol = 1e-7 * scale;
    let eigenvalues: Vec<C64> = linalg::eigenvalues(gen.matrix()).into_iter().filter(|z| z.norm() > zero_tol).collect();
    if eigenvalues.is_empty() {
        return Err(Error::NoRelaxation);
    }
    let slowest = eigenvalues.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let attractive = eigenvalues.iter().all(|z| z.re < -1e-10 * scale);
    Ok(ZenoBoundReport { tau_r: 1.0 / slowest, eigenvalues, attractive })
}

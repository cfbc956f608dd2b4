//! Choi matrices, gate errors between channels and the subsystem lower bound.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::Superoperator;
use crate::ops::{linalg, CMatrix, DensityMatrix, HilbertSpace, Operator, C64};

/// Normalized Choi matrix `(E ⊗ id)(|Ω><Ω|)`, with the channel on the first
/// tensor slot. Entry `[(a,i),(b,j)]` equals `E(|i><j|)[a,b] / d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    d: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Dimension of the system the channel acts on.
    pub fn system_dim(&self) -> usize {
        self.d
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.matrix).first().cloned().unwrap_or(0.0)
    }

    /// Complete positivity test on the spectrum.
    pub fn is_cp(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `J² = J`, which holds exactly for unitary channels.
    pub fn is_unitary_channel(&self, tol: f64) -> bool {
        linalg::max_abs(&(&self.matrix * &self.matrix - &self.matrix)) <= tol
    }

    /// The superoperator this Choi matrix represents.
    pub fn to_superoperator(&self, space: &HilbertSpace) -> Result<Superoperator> {
        let d = self.d;
        if space.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: space.dim() });
        }
        let scale = C64::new(d as f64, 0.0);
        let m = CMatrix::from_fn(d * d, d * d, |r, q| {
            let (a, b, i, j) = (r / d, r % d, q / d, q % d);
            self.matrix[(a * d + i, b * d + j)] * scale
        });
        Superoperator::new(space.clone(), m)
    }
}

pub fn choi(channel: &Superoperator) -> ChoiMatrix {
    let d = channel.dim();
    let m = channel.matrix();
    let inv = C64::new(1.0 / d as f64, 0.0);
    let matrix = CMatrix::from_fn(d * d, d * d, |r, q| {
        let (a, i, b, j) = (r / d, r % d, q / d, q % d);
        m[(a * d + b, i * d + j)] * inv
    });
    ChoiMatrix { d, matrix }
}

/// Permutation `S` sending `(s1, a1, s2, a2)` to `(s1, s2, a1, a2)` with
/// system dimensions `d1`, `d2` and ancillas of equal size, so that
/// `J(E1 ⊗ E2) = S (J(E1) ⊗ J(E2)) Sᵀ`.
pub fn system_swap(d1: usize, d2: usize) -> CMatrix {
    let n = d1 * d1 * d2 * d2;
    let mut s = CMatrix::zeros(n, n);
    for s1 in 0..d1 {
        for a1 in 0..d1 {
            for s2 in 0..d2 {
                for a2 in 0..d2 {
                    let from = ((s1 * d1 + a1) * d2 + s2) * d2 + a2;
                    let to = ((s1 * d2 + s2) * d1 + a1) * d2 + a2;
                    s[(to, from)] = C64::new(1.0, 0.0);
                }
            }
        }
    }
    s
}

/// `S (J1 ⊗ J2) Sᵀ`, the Choi matrix of a product channel.
pub fn choi_product(j1: &ChoiMatrix, j2: &ChoiMatrix) -> ChoiMatrix {
    let s = system_swap(j1.d, j2.d);
    ChoiMatrix { d: j1.d * j2.d, matrix: &s * j1.matrix.kronecker(&j2.matrix) * s.transpose() }
}

fn same_dim(a: &Superoperator, b: &Superoperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `||E_T - E_G||²` in Hilbert-Schmidt norm of the superoperator matrices.
pub fn epsilon1(target: &Superoperator, goal: &Superoperator) -> Result<f64> {
    same_dim(target, goal)?;
    Ok((target.matrix() - goal.matrix()).norm_squared())
}

fn split(total: usize, d1: usize) -> Result<usize> {
    if d1 == 0 || total % d1 != 0 {
        return Err(Error::DimensionMismatch { expected: d1, found: total });
    }
    Ok(total / d1)
}

/// `S (J(U_G) ⊗ 1) Sᵀ` on the Choi space of the bipartite system.
fn embedded_goal(goal: &Operator, d2: usize) -> CMatrix {
    let jg = choi(&Superoperator::from_unitary(goal));
    let s = system_swap(goal.dim(), d2);
    let id = CMatrix::identity(d2 * d2, d2 * d2);
    &s * jg.matrix.kronecker(&id) * s.transpose()
}

/// `Tr{J(E_T)² (1 - S (J(U_G) ⊗ 1) Sᵀ)}` with system 1 the first `U_G.dim()`
/// dimensions of the target's space.
pub fn epsilon2(target: &Superoperator, goal: &Operator) -> Result<f64> {
    let d2 = split(target.dim(), goal.dim())?;
    let j = choi(target).matrix;
    let j2 = &j * &j;
    let g = embedded_goal(goal, d2);
    Ok(j2.trace().re - linalg::hs_inner(&j2.adjoint(), &g).re)
}

/// `1 - Tr{J(E_T) S (J(U_G) ⊗ 1) Sᵀ}`, equal to [`epsilon2`] when `E_T` is
/// unitary.
pub fn epsilon2_unitary(target: &Superoperator, goal: &Operator) -> Result<f64> {
    let d2 = split(target.dim(), goal.dim())?;
    let j = choi(target).matrix;
    Ok(1.0 - linalg::hs_inner(&j.adjoint(), &embedded_goal(goal, d2)).re)
}

/// `rho1 -> Tr_2 E(rho1 ⊗ rho2)`.
pub fn reduced_channel(channel: &Superoperator, rho2: &DensityMatrix) -> Result<Superoperator> {
    let d = channel.dim();
    let d2 = rho2.operator().dim();
    let d1 = split(d, d2)?;
    let r = rho2.operator().matrix();
    let m = channel.matrix();
    let idx = |x1: usize, x2: usize, y1: usize, y2: usize| (x1 * d2 + x2) * d + y1 * d2 + y2;
    let out = CMatrix::from_fn(d1 * d1, d1 * d1, |row, col| {
        let (a, b, i, j) = (row / d1, row % d1, col / d1, col % d1);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..d2 {
            for l in 0..d2 {
                let w = r[(k, l)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d2 {
                    acc += m[(idx(a, c, b, c), idx(i, k, j, l))] * w;
                }
            }
        }
        acc
    });
    let factors = channel.space().factor_dims();
    let space = if factors.len() > 1 && factors.iter().take(factors.len() - 1).product::<usize>() == d1 {
        HilbertSpace::new(factors[..factors.len() - 1].to_vec())?
    } else {
        HilbertSpace::single(d1)
    };
    Superoperator::new(space, out)
}

/// `||E_T^{(1)} - U_G||²` for the reduced channel with system 2 in `rho2`.
pub fn reduced_error(channel: &Superoperator, goal: &Operator, rho2: &DensityMatrix) -> Result<f64> {
    let reduced = reduced_channel(channel, rho2)?;
    if reduced.dim() != goal.dim() {
        return Err(Error::DimensionMismatch { expected: reduced.dim(), found: goal.dim() });
    }
    Ok((reduced.matrix() - Superoperator::from_unitary(goal).matrix()).norm_squared())
}

/// `d ||E_T - E_G||_HS`, an upper bound on the diamond distance.
pub fn diamond_upper(target: &Superoperator, goal: &Superoperator) -> Result<f64> {
    Ok(target.dim() as f64 * epsilon1(target, goal)?.sqrt())
}

/// The same bound on a `d1`-dimensional reduced system from its squared
/// Hilbert-Schmidt error.
pub fn reduced_diamond_upper(d1: usize, reduced_error: f64) -> f64 {
    d1 as f64 * reduced_error.max(0.0).sqrt()
}

/// Gate errors of a realized channel against a factorized goal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateErrorReport {
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub diamond_upper: f64,
    pub reduced_error: f64,
    /// Set when `Tr J² > 1`, i.e. the target is not a CPTP map.
    pub non_physical: bool,
}

/// Evaluate every error measure of `target` against the full goal map and
/// the system-1 goal unitary, with system 2 prepared in `rho2`.
pub fn gate_error_report(
    target: &Superoperator,
    goal_map: &Superoperator,
    goal: &Operator,
    rho2: &DensityMatrix,
) -> Result<GateErrorReport> {
    Ok(GateErrorReport {
        epsilon1: epsilon1(target, goal_map)?,
        epsilon2: epsilon2(target, goal)?,
        diamond_upper: diamond_upper(target, goal_map)?,
        reduced_error: reduced_error(target, goal, rho2)?,
        non_physical: choi(target).purity() > 1.0 + 1e-9,
    })
}

fn gaussian_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
    })
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(space: &HilbertSpace, rng: &mut R) -> Operator {
    let d = space.dim();
    let qr = gaussian_matrix(d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Operator::new(space.clone(), q).expect("square unitary")
}

/// Random CPTP map with `rank` Gaussian Kraus operators rescaled by
/// `(sum K†K)^{-1/2}`.
pub fn random_channel<R: Rng + ?Sized>(space: &HilbertSpace, rank: usize, rng: &mut R) -> Superoperator {
    let d = space.dim();
    let raw: Vec<CMatrix> = (0..rank.max(1)).map(|_| gaussian_matrix(d, rng)).collect();
    let sum: CMatrix = raw.iter().map(|k| k.adjoint() * k).sum();
    let inv_sqrt = linalg::hermitian_fn(&sum, |x| 1.0 / x.sqrt());
    let kraus: Vec<CMatrix> = raw.iter().map(|k| k * &inv_sqrt).collect();
    Superoperator::from_kraus(space, &kraus).expect("square Kraus operators")
}

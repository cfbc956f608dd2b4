//! Ising chain under collective decoherence: builders, DFS dimensions,
//! the rotationally symmetric operator algebra and its generation schedule.
//!
//! Qubit labels in [`SymOp`] are 1-based, as in `H_12 = σ⁽¹⁾·σ⁽²⁾`; dense
//! operators use 0-based tensor sites.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::Matrix3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{LindbladSpec, LindbladTerm};
use crate::ops::{embed, linalg, mat_commutator, Axis, CMatrix, HilbertSpace, Operator, C64, I};

/// Rates of collective decoherence on an `n`-qubit chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectiveSpec {
    pub n: usize,
    pub gamma: [f64; 3],
}

/// Collective-decoherence spec with the Ising drift and first-bond control.
#[derive(Clone, Debug)]
pub struct ChainModel {
    pub collective: CollectiveSpec,
    pub spec: LindbladSpec,
    pub h0: Operator,
    pub h1: Operator,
}

fn pauli(n: usize, site: usize, axis: Axis) -> CMatrix {
    embed(&vec![2; n], site, &axis.matrix())
}

/// `S_axis = (1/2) sum_k sigma_axis^(k)`.
pub fn collective_spin(n: usize, axis: Axis) -> Operator {
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for k in 0..n {
        m += pauli(n, k, axis);
    }
    Operator::new(HilbertSpace::qubits(n), m * C64::new(0.5, 0.0)).expect("qubit chain")
}

/// `sigma^(a) · sigma^(b)` on 0-based sites.
pub fn heisenberg_coupling(n: usize, a: usize, b: usize) -> Operator {
    let m: CMatrix = Axis::ALL.iter().map(|&ax| pauli(n, a, ax) * pauli(n, b, ax)).sum();
    Operator::new(HilbertSpace::qubits(n), m).expect("qubit chain")
}

/// Ising drift `sum_n sigma_z^(n) sigma_z^(n+1)`, control
/// `sigma_z^(1) sigma_z^(2)` and collective channels `(g_alpha, S_alpha)`.
pub fn build_chain(n: usize, gx: f64, gy: f64, gz: f64) -> Result<ChainModel> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("chain needs at least 3 qubits, got {n}")));
    }
    let (h0, h1) = chain_hamiltonians(n);
    let spec = collective_spec(n, gx, gy, gz)?;
    Ok(ChainModel { collective: CollectiveSpec { n, gamma: [gx, gy, gz] }, spec, h0, h1 })
}

/// Drift and control of the chain for any `n ≥ 1`; the control vanishes
/// for a single qubit.
pub fn chain_hamiltonians(n: usize) -> (Operator, Operator) {
    let space = HilbertSpace::qubits(n);
    let dim = 1 << n;
    let zz = |k: usize| pauli(n, k, Axis::Z) * pauli(n, k + 1, Axis::Z);
    let h0 = (0..n.saturating_sub(1)).map(zz).fold(CMatrix::zeros(dim, dim), |a, b| a + b);
    let h1 = if n >= 2 { zz(0) } else { CMatrix::zeros(dim, dim) };
    (Operator::new(space.clone(), h0).expect("qubit chain"), Operator::new(space, h1).expect("qubit chain"))
}

/// Collective decoherence on `n ≥ 1` qubits.
pub fn collective_spec(n: usize, gx: f64, gy: f64, gz: f64) -> Result<LindbladSpec> {
    let terms = Axis::ALL
        .iter()
        .zip([gx, gy, gz])
        .map(|(&ax, g)| LindbladTerm::new(g, collective_spin(n, ax)))
        .collect::<Result<Vec<_>>>()?;
    LindbladSpec::dissipative(&HilbertSpace::qubits(n), terms)
}

fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Allowed values of `2J` for `n` spins, largest first.
pub fn allowed_spins(n: u32) -> Vec<u32> {
    (0..=n / 2).map(|k| n - 2 * k).collect()
}

/// Multiplicity `d_{J,N} = (2J+1) N! / ((N/2+J+1)! (N/2-J)!)` of total spin
/// `J = twice_j / 2`.
pub fn dfs_dimension(twice_j: u32, n: u32) -> Result<u128> {
    if twice_j > n || (n - twice_j) % 2 != 0 {
        return Err(Error::InvalidSpin { twice_j, n });
    }
    let k = (n - twice_j) / 2;
    Ok(binomial(n, k) * (twice_j + 1) as u128 / (n - k + 1) as u128)
}

/// `sum_J dim u(d_{J,N}) = sum_J d_{J,N}^2`.
pub fn sum_dim_u(n: u32) -> u128 {
    allowed_spins(n).into_iter().map(|j| dfs_dimension(j, n).expect("allowed spin").pow(2)).sum()
}

/// `sum_J dim su(d_{J,N})`.
pub fn sum_dim_su(n: u32) -> u128 {
    sum_dim_u(n) - allowed_spins(n).len() as u128
}

/// Large-N estimate `4^N / (sqrt(pi) N^{3/2})` of the DFS Lie dimension.
pub fn asymptotic_dim(n: u32) -> f64 {
    let n = n as f64;
    4f64.powf(n) / (std::f64::consts::PI.sqrt() * n.powf(1.5))
}

/// Action of the collective dissipator on `(XX, YY, ZZ)` of a bond.
pub fn dual_action_matrix(gx: f64, gy: f64, gz: f64) -> Matrix3<f64> {
    Matrix3::new(gy + gz, -gz, -gy, -gz, gz + gx, -gx, -gy, -gx, gx + gy) * -2.0
}

/// Characteristic decoherence rate: the smallest nonvanishing eigenvalue
/// magnitude of [`dual_action_matrix`].
pub fn gamma_bar(gx: f64, gy: f64, gz: f64) -> Option<f64> {
    let m = dual_action_matrix(gx, gy, gz);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    m.symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).filter(|&x| x > 1e-12 * scale).reduce(f64::min)
}

/// Symbolic rotationally symmetric operator.
#[derive(Clone, Debug, PartialEq)]
pub enum SymOp {
    /// `H_mn = σ⁽ᵐ⁾·σ⁽ⁿ⁾`.
    Two(usize, usize),
    /// `H_ijk = σ⁽ⁱ⁾·(σ⁽ʲ⁾ × σ⁽ᵏ⁾)`.
    Three(usize, usize, usize),
    /// Nearest-neighbour Heisenberg sum `sum_n H_{n,n+1}` over the chain.
    Chain,
    Product(Box<SymOp>, Box<SymOp>),
    Sum(Vec<(f64, SymOp)>),
    /// `i[A, B]`.
    IComm(Box<SymOp>, Box<SymOp>),
}

impl SymOp {
    pub fn two(m: usize, n: usize) -> Self {
        SymOp::Two(m.min(n), m.max(n))
    }

    pub fn three(i: usize, j: usize, k: usize) -> Self {
        SymOp::Three(i, j, k)
    }

    pub fn product(a: SymOp, b: SymOp) -> Self {
        SymOp::Product(Box::new(a), Box::new(b))
    }

    pub fn icomm(a: SymOp, b: SymOp) -> Self {
        SymOp::IComm(Box::new(a), Box::new(b))
    }

    pub fn sum(terms: Vec<(f64, SymOp)>) -> Self {
        SymOp::Sum(terms)
    }

    pub fn scaled(c: f64, op: SymOp) -> Self {
        SymOp::Sum(vec![(c, op)])
    }

    /// Highest qubit label used.
    pub fn max_label(&self) -> usize {
        match self {
            SymOp::Two(a, b) => *a.max(b),
            SymOp::Three(a, b, c) => *a.max(b).max(c),
            SymOp::Chain => 2,
            SymOp::Product(a, b) | SymOp::IComm(a, b) => a.max_label().max(b.max_label()),
            SymOp::Sum(t) => t.iter().map(|(_, o)| o.max_label()).max().unwrap_or(0),
        }
    }

    /// Dense matrix on `n` qubits.
    pub fn realize(&self, n: usize) -> CMatrix {
        match self {
            SymOp::Two(a, b) => heisenberg_coupling(n, a - 1, b - 1).into_matrix(),
            SymOp::Three(i, j, k) => {
                let dim = 1 << n;
                let mut m = CMatrix::zeros(dim, dim);
                let ax = Axis::ALL;
                for (a, b, c, sign) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)] {
                    let term = pauli(n, i - 1, ax[a]) * pauli(n, j - 1, ax[b]) * pauli(n, k - 1, ax[c]);
                    m += term * C64::new(sign, 0.0);
                }
                m
            }
            SymOp::Chain => (1..n).map(|k| heisenberg_coupling(n, k - 1, k).into_matrix()).sum(),
            SymOp::Product(a, b) => a.realize(n) * b.realize(n),
            SymOp::Sum(terms) => {
                let dim = 1 << n;
                terms.iter().fold(CMatrix::zeros(dim, dim), |acc, (c, o)| acc + o.realize(n) * C64::new(*c, 0.0))
            }
            SymOp::IComm(a, b) => mat_commutator(&a.realize(n), &b.realize(n)) * I,
        }
    }
}

impl fmt::Display for SymOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymOp::Two(a, b) => write!(f, "H[{a},{b}]"),
            SymOp::Three(i, j, k) => write!(f, "H[{i},{j},{k}]"),
            SymOp::Chain => write!(f, "Hchain"),
            SymOp::Product(a, b) => write!(f, "{a}{b}"),
            SymOp::IComm(a, b) => write!(f, "i[{a}, {b}]"),
            SymOp::Sum(terms) => {
                write!(f, "(")?;
                for (k, (c, o)) in terms.iter().enumerate() {
                    let sign = if *c < 0.0 { "-" } else if k > 0 { "+" } else { "" };
                    let sep = if k > 0 { " " } else { "" };
                    let space = if k > 0 { " " } else { "" };
                    let mag = c.abs();
                    if (mag - 1.0).abs() < 1e-15 {
                        write!(f, "{sep}{sign}{space}{o}")?;
                    } else {
                        write!(f, "{sep}{sign}{space}{mag}*{o}")?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

/// A commutator identity between symbolic operators together with its dense
/// residual.
#[derive(Clone, Debug)]
pub struct SymIdentity {
    pub label: String,
    pub lhs: SymOp,
    pub rhs: SymOp,
    pub residual: f64,
}

impl SymIdentity {
    fn checked(label: String, lhs: SymOp, rhs: SymOp, n: usize) -> Result<Self> {
        let residual = linalg::max_abs(&(lhs.realize(n) - rhs.realize(n)));
        if residual > IDENTITY_TOL {
            return Err(Error::IdentityFailed { label, residual });
        }
        Ok(Self { label, lhs, rhs, residual })
    }
}

const IDENTITY_TOL: f64 = 1e-9;

/// The inductive generation schedule and the operators it reaches.
#[derive(Clone, Debug)]
pub struct GenerationSchedule {
    pub n: usize,
    pub identities: Vec<SymIdentity>,
    pub two_body: BTreeSet<(usize, usize)>,
    pub three_body: BTreeSet<(usize, usize, usize)>,
}

impl GenerationSchedule {
    pub fn inventory_len(&self) -> usize {
        self.two_body.len() + self.three_body.len()
    }
}

/// Serializable view of one identity.
#[derive(Serialize)]
pub struct IdentityRecord {
    pub label: String,
    pub identity: String,
    pub residual: f64,
}

impl From<&SymIdentity> for IdentityRecord {
    fn from(id: &SymIdentity) -> Self {
        Self { label: id.label.clone(), identity: format!("{} = {}", id.lhs, id.rhs), residual: id.residual }
    }
}

/// Commutator schedule generating every two- and three-body rotationally
/// symmetric operator on `n` qubits from the Heisenberg chain sum and the
/// first-bond coupling, each identity verified densely.
pub fn generation_schedule(n: usize) -> Result<GenerationSchedule> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("schedule needs at least 3 qubits, got {n}")));
    }
    let two = SymOp::two;
    let three = SymOp::three;
    let mut ids = Vec::new();
    let mut two_body = BTreeSet::from([(1, 2)]);
    let mut three_body = BTreeSet::new();

    ids.push(SymIdentity::checked(
        "seed".into(),
        SymOp::icomm(SymOp::Chain, two(1, 2)),
        SymOp::scaled(-2.0, three(1, 2, 3)),
        n,
    )?);
    three_body.insert((1, 2, 3));
    let c1 = SymOp::icomm(two(1, 2), three(1, 2, 3));
    ids.push(SymIdentity::checked(
        "seed-a".into(),
        c1.clone(),
        SymOp::sum(vec![(4.0, two(1, 3)), (-4.0, two(2, 3))]),
        n,
    )?);
    ids.push(SymIdentity::checked(
        "seed-b".into(),
        SymOp::icomm(c1, three(1, 2, 3)),
        SymOp::sum(vec![(16.0, two(1, 3)), (16.0, two(2, 3)), (-32.0, two(1, 2))]),
        n,
    )?);
    two_body.extend([(1, 3), (2, 3)]);

    for k in 3..n {
        let new = k + 1;
        ids.push(SymIdentity::checked(
            format!("extend-{new}"),
            SymOp::icomm(two(k - 1, k), SymOp::Chain),
            SymOp::sum(vec![(-2.0, three(k - 2, k - 1, k)), (2.0, three(k - 1, k, new))]),
            n,
        )?);
        three_body.insert((k - 1, k, new));

        let c = SymOp::icomm(two(k - 1, k), three(k - 1, k, new));
        ids.push(SymIdentity::checked(
            format!("pair-{new}-a"),
            c.clone(),
            SymOp::sum(vec![(4.0, two(k - 1, new)), (-4.0, two(k, new))]),
            n,
        )?);
        ids.push(SymIdentity::checked(
            format!("pair-{new}-b"),
            SymOp::icomm(c, three(k - 1, k, new)),
            SymOp::sum(vec![(16.0, two(k - 1, new)), (16.0, two(k, new)), (-32.0, two(k - 1, k))]),
            n,
        )?);
        two_body.extend([(k - 1, new), (k, new)]);

        for m in (1..=k - 2).rev() {
            ids.push(SymIdentity::checked(
                format!("sweep-{new}-{m}-a"),
                SymOp::icomm(two(m, m + 1), two(m + 1, new)),
                SymOp::scaled(2.0, three(m, m + 1, new)),
                n,
            )?);
            ids.push(SymIdentity::checked(
                format!("sweep-{new}-{m}-b"),
                SymOp::icomm(two(m, m + 1), three(m, m + 1, new)),
                SymOp::sum(vec![(4.0, two(m, new)), (-4.0, two(m + 1, new))]),
                n,
            )?);
            three_body.insert((m, m + 1, new));
            two_body.insert((m, new));
        }

        for m2 in 2..=k {
            for m1 in 1..m2 {
                ids.push(SymIdentity::checked(
                    format!("triple-{m1}-{m2}-{new}"),
                    SymOp::icomm(two(m1, m2), two(m2, new)),
                    SymOp::scaled(2.0, three(m1, m2, new)),
                    n,
                )?);
                three_body.insert((m1, m2, new));
            }
        }
    }
    Ok(GenerationSchedule { n, identities: ids, two_body, three_body })
}

/// Four-body commutator identities for qubits `(1,2,3,4)`, realized on `n`
/// qubits.
pub fn four_body_identities(n: usize) -> Result<Vec<SymIdentity>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("four-body identities need at least 4 qubits, got {n}")));
    }
    let (i, j, k, l) = (1, 2, 3, 4);
    let h = SymOp::two;
    let p = SymOp::product;
    let first = SymIdentity::checked(
        "difference".into(),
        SymOp::icomm(h(i, j), SymOp::three(j, k, l)),
        SymOp::sum(vec![(2.0, p(h(i, k), h(j, l))), (-2.0, p(h(i, l), h(j, k)))]),
        n,
    )?;
    let second = SymIdentity::checked(
        "no-split".into(),
        SymOp::icomm(SymOp::three(i, j, k), p(h(i, j), h(k, l))),
        SymOp::sum(vec![
            (4.0, h(j, l)),
            (-4.0, h(i, l)),
            (2.0, p(h(i, l), h(j, k))),
            (-2.0, p(h(i, k), h(j, l))),
        ]),
        n,
    )?;
    Ok(vec![first, second])
}

//! Registry of the example control systems with self-checking expectations.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::chain::{build_chain, dfs_dimension};
use crate::error::{Error, Result};
use crate::grape::{ControlSystem, Target};
use crate::lie::{closure_dim, dfs_lie_dimension};
use crate::lindblad::{detect_dfs, steady_superprojector, LindbladSpec, LindbladTerm, Superoperator};
use crate::ops::{embed, pauli_on, tensor, Axis, CMatrix, HilbertSpace, Operator, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    TwoQubitAmp,
    TwoQubitDephasing,
    NLevelAtom,
    IsingChain,
}

impl ModelName {
    pub const ALL: [ModelName; 4] = [Self::TwoQubitAmp, Self::TwoQubitDephasing, Self::NLevelAtom, Self::IsingChain];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::TwoQubitAmp => "two-qubit-amp",
            Self::TwoQubitDephasing => "two-qubit-dephasing",
            Self::NLevelAtom => "n-level-atom",
            Self::IsingChain => "ising-chain",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Builder inputs. `n` is the level count of the atom or the chain length;
/// `gammas` holds one rate for the two-qubit models, `N` rates for the atom
/// and three for the chain. Missing rates default to 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModelParams {
    pub n: Option<usize>,
    pub gammas: Vec<f64>,
}

/// Results the registry expects each builder to reproduce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub dim_nonoise: usize,
    /// Dimensions of the decoherence-free blocks.
    pub dfs_dims: Vec<usize>,
    /// Lie dimension of the controls projected onto each block, when known.
    pub projected_dims: Option<Vec<usize>>,
    /// Lie dimension of the superprojected controls, for unital noise.
    pub unital_dim: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelDescriptor {
    pub name: ModelName,
    pub params: ModelParams,
    #[serde(skip)]
    pub spec: LindbladSpec,
    #[serde(skip)]
    pub controls: Vec<Operator>,
    pub expected: Expected,
}

/// What the library actually computes for a descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Observed {
    pub dim_nonoise: usize,
    pub dfs_dims: Vec<usize>,
    pub projected_dims: Vec<usize>,
    pub unital_dim: Option<usize>,
}

impl ModelDescriptor {
    pub fn observe(&self) -> Result<Observed> {
        let dfs = detect_dfs(&self.spec.dissipative_part());
        let lie = dfs_lie_dimension(&self.spec, &self.controls)?;
        Ok(Observed {
            dim_nonoise: closure_dim(&self.controls)?,
            dfs_dims: dfs.block_dims(),
            projected_dims: lie.block_dims,
            unital_dim: lie.unital_dim,
        })
    }

    /// Recompute every expectation; an error names the first mismatch.
    pub fn validate(&self) -> Result<Observed> {
        let obs = self.observe()?;
        let e = &self.expected;
        let checks = [
            ("dim_nonoise", e.dim_nonoise == obs.dim_nonoise),
            ("dfs_dims", e.dfs_dims == obs.dfs_dims),
            ("projected_dims", e.projected_dims.as_ref().is_none_or(|p| *p == obs.projected_dims)),
            ("unital_dim", e.unital_dim.is_none() || e.unital_dim == obs.unital_dim),
        ];
        if let Some((field, _)) = checks.iter().find(|(_, ok)| !ok) {
            return Err(Error::InvalidParameter(format!(
                "{} does not reproduce its expected {field}: expected {e:?}, observed {obs:?}",
                self.name
            )));
        }
        Ok(obs)
    }
}

fn rates(params: &ModelParams, count: usize) -> Result<Vec<f64>> {
    let g = match params.gammas.len() {
        0 => vec![1.0; count],
        1 if count > 1 => vec![params.gammas[0]; count],
        k if k == count => params.gammas.clone(),
        k => return Err(Error::InvalidParameter(format!("expected {count} rates, got {k}"))),
    };
    if let Some(bad) = g.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::NegativeRate(*bad));
    }
    Ok(g)
}

/// `H_0 = σx ⊗ (σx + σz)` and `H_1 = σy ⊗ (σx − σz)`.
pub fn two_qubit_controls() -> [Operator; 2] {
    let s = HilbertSpace::qubits(2);
    let p = |site, ax| pauli_on(&s, site, ax).expect("qubit site");
    let h0 = &p(0, Axis::X) * &(&p(1, Axis::X) + &p(1, Axis::Z));
    let h1 = &p(0, Axis::Y) * &(&p(1, Axis::X) - &p(1, Axis::Z));
    [h0, h1]
}

/// Lowering operator `|0><1|` on the second qubit.
pub fn two_qubit_amp_spec(gamma: f64) -> Result<LindbladSpec> {
    let s = HilbertSpace::qubits(2);
    let lower = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    let l = Operator::new(s.clone(), embed(&[2, 2], 1, &lower))?;
    LindbladSpec::dissipative(&s, vec![LindbladTerm::new(gamma, l)?])
}

/// Pure dephasing `σz` on the second qubit.
pub fn two_qubit_dephasing_spec(gamma: f64) -> Result<LindbladSpec> {
    let s = HilbertSpace::qubits(2);
    LindbladSpec::dissipative(&s, vec![LindbladTerm::new(gamma, pauli_on(&s, 1, Axis::Z)?)?])
}

/// Levels `|1>..|N>` at indices `0..N` and the excited level at index `N`.
pub fn atom_operators(n: usize, gammas: &[f64]) -> Result<(LindbladSpec, [Operator; 2])> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("the atom needs at least 2 lower levels, got {n}")));
    }
    let s = HilbertSpace::single(n + 1);
    let e = n;
    let outer = |i, j| Operator::basis_outer(&s, i, j);
    let hop = |i, j| &outer(i, j) + &outer(j, i);
    let mut h0 = hop(e, 1);
    for j in 0..n - 1 {
        h0 = &h0 + &hop(j, j + 1);
    }
    let h1 = &(&outer(e, e) + &outer(0, 0)) - &hop(e, 0);
    let terms = (0..n).map(|j| LindbladTerm::new(gammas[j], outer(j, e))).collect::<Result<Vec<_>>>()?;
    Ok((LindbladSpec::dissipative(&s, terms)?, [h0, h1]))
}

/// Table of projected Lie dimensions for the collective-decoherence chain.
pub fn chain_lie_dim(n: usize) -> Option<usize> {
    match n {
        3 => Some(4),
        4 => Some(12),
        5 => Some(40),
        6 => Some(129),
        _ => None,
    }
}

pub fn build_model(name: ModelName, params: &ModelParams) -> Result<ModelDescriptor> {
    let (spec, controls, expected) = match name {
        ModelName::TwoQubitAmp => {
            let g = rates(params, 1)?[0];
            let expected = Expected { dim_nonoise: 2, dfs_dims: vec![2], projected_dims: Some(vec![3]), unital_dim: None };
            (two_qubit_amp_spec(g)?, two_qubit_controls().to_vec(), expected)
        }
        ModelName::TwoQubitDephasing => {
            let g = rates(params, 1)?[0];
            let expected = Expected { dim_nonoise: 2, dfs_dims: vec![2, 2], projected_dims: Some(vec![3, 3]), unital_dim: Some(3) };
            (two_qubit_dephasing_spec(g)?, two_qubit_controls().to_vec(), expected)
        }
        ModelName::NLevelAtom => {
            let n = params.n.unwrap_or(4);
            let g = rates(params, n)?;
            let (spec, controls) = atom_operators(n, &g)?;
            let expected = Expected { dim_nonoise: 2, dfs_dims: vec![n], projected_dims: Some(vec![n * n]), unital_dim: None };
            (spec, controls.to_vec(), expected)
        }
        ModelName::IsingChain => {
            let n = params.n.unwrap_or(4);
            let g = rates(params, 3)?;
            let chain = build_chain(n, g[0], g[1], g[2])?;
            let singlet = n % 2 == 0 && g.iter().all(|x| *x > 0.0);
            let dfs_dims = if singlet { vec![dfs_dimension(0, n as u32)? as usize] } else { Vec::new() };
            let unital_dim = if g.iter().all(|x| *x > 0.0) { chain_lie_dim(n) } else { None };
            let expected = Expected { dim_nonoise: 2, dfs_dims, projected_dims: None, unital_dim };
            (chain.spec, vec![chain.h0, chain.h1], expected)
        }
    };
    Ok(ModelDescriptor { name, params: params.clone(), spec, controls, expected })
}

/// Which gate error a pulse optimization minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Epsilon1,
    Epsilon2,
}

/// Two-qubit control problem at rate `gamma` with the drift treated as a
/// control and the goal `goal` on the first qubit. For the full-map error
/// the second qubit's goal is the strong-damping limit of the noise.
pub fn two_qubit_control_problem(
    name: ModelName,
    gamma: f64,
    goal: &Operator,
    objective: Objective,
    total_time: f64,
) -> Result<(ControlSystem, Target)> {
    let spec = match name {
        ModelName::TwoQubitAmp => two_qubit_amp_spec(gamma)?,
        ModelName::TwoQubitDephasing => two_qubit_dephasing_spec(gamma)?,
        other => return Err(Error::InvalidParameter(format!("{other} is not a two-qubit model"))),
    };
    let target = match objective {
        Objective::Epsilon2 => Target::Epsilon2(goal.clone()),
        Objective::Epsilon1 => {
            let q = HilbertSpace::qubits(1);
            let second = match name {
                ModelName::TwoQubitAmp => two_qubit_amp_spec(1.0)?,
                _ => two_qubit_dephasing_spec(1.0)?,
            };
            let p = steady_superprojector(&second)?;
            let u = Superoperator::from_unitary(&tensor(goal, &Operator::identity(&q)));
            Target::Epsilon1(u.compose(&p)?)
        }
    };
    let system = ControlSystem::new(None, two_qubit_controls().to_vec(), spec, total_time)?;
    Ok((system, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in ModelName::ALL {
            assert_eq!(m.as_str().parse::<ModelName>().unwrap(), m);
        }
        assert!(matches!("three-qubit".parse::<ModelName>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn controls_commute() {
        let [h0, h1] = two_qubit_controls();
        assert!(crate::ops::commutator(&h0, &h1).unwrap().hs_norm() < 1e-12);
        let (_, [a0, a1]) = atom_operators(4, &[1.0; 4]).unwrap();
        assert!(crate::ops::commutator(&a0, &a1).unwrap().hs_norm() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        let p = ModelParams { n: Some(1), gammas: vec![] };
        assert!(build_model(ModelName::NLevelAtom, &p).is_err());
        let p = ModelParams { n: Some(2), gammas: vec![] };
        assert!(build_model(ModelName::IsingChain, &p).is_err());
        let p = ModelParams { n: None, gammas: vec![1.0, 2.0] };
        assert!(build_model(ModelName::TwoQubitAmp, &p).is_err());
        let p = ModelParams { n: None, gammas: vec![-1.0] };
        assert!(matches!(build_model(ModelName::TwoQubitAmp, &p), Err(Error::NegativeRate(_))));
    }

    #[test]
    fn two_qubit_registry_validates() {
        for m in [ModelName::TwoQubitAmp, ModelName::TwoQubitDephasing] {
            build_model(m, &ModelParams::default()).unwrap().validate().unwrap();
        }
    }
}

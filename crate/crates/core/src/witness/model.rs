use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::pauli::{Pauli, PauliLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MediatorKind {
    ClassicalBit,
    Qubit,
    Reservoir,
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStatePolicy {
    /// Only states diagonal in the `Z_M` basis.
    Diagonal,
    Any,
}

/// What a mediator is allowed to expose to the probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediatorModel {
    pub kind: MediatorKind,
    /// Single-site factors allowed on mediator sites; `None` for non-qubit
    /// mediators.
    pub allowed_factors: Option<Vec<Pauli>>,
    pub initial_states: InitialStatePolicy,
}

impl MediatorModel {
    /// A bit whose only observable is `Z_M`.
    pub fn classical_bit() -> Self {
        MediatorModel {
            kind: MediatorKind::ClassicalBit,
            allowed_factors: Some(vec![Pauli::I, Pauli::Z]),
            initial_states: InitialStatePolicy::Diagonal,
        }
    }

    pub fn qubit() -> Self {
        MediatorModel {
            kind: MediatorKind::Qubit,
            allowed_factors: Some(Pauli::ALL.to_vec()),
            initial_states: InitialStatePolicy::Any,
        }
    }

    pub fn reservoir() -> Self {
        MediatorModel {
            kind: MediatorKind::Reservoir,
            allowed_factors: Some(Pauli::ALL.to_vec()),
            initial_states: InitialStatePolicy::Any,
        }
    }

    pub fn oscillator() -> Self {
        MediatorModel {
            kind: MediatorKind::Oscillator,
            allowed_factors: None,
            initial_states: InitialStatePolicy::Any,
        }
    }

    /// Whether every mediator-site factor of `label` is allowed.
    pub fn admits_label(&self, label: &PauliLabel, mediator_sites: &[usize]) -> bool {
        match &self.allowed_factors {
            None => true,
            Some(allowed) => mediator_sites
                .iter()
                .all(|&s| allowed.contains(&label.sites()[s])),
        }
    }

    pub fn admits_state(&self, rho: &DenseOperator, tol: f64) -> bool {
        match self.initial_states {
            InitialStatePolicy::Any => true,
            InitialStatePolicy::Diagonal => {
                let n = rho.dim();
                (0..n).all(|i| (0..n).all(|j| i == j || rho.get(i, j).norm() <= tol))
            }
        }
    }
}

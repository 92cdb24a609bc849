//! Operator toolkit for single-probe (temporal) non-classicality witnesses.
//!
//! Covers exact Pauli algebra and dense numerics, Heisenberg-picture circuit
//! evolution, conservation-law commutants, axis-rotation root systems and
//! classical-mediator searches, the partial-SWAP homogenizer and a truncated
//! Holstein–Primakoff oscillator mediator.

pub mod conservation;
pub mod dense;
pub mod error;
pub mod heisenberg;
pub mod homogenizer;
pub mod linalg;
pub mod oscillator;
pub mod pauli;
pub mod states;
pub mod witness;

pub use conservation::{
    check_conservation, classicality_filter, commutant_basis, constrain_family, ConservationMode,
    ConservedKind, ConservedQuantity, HamiltonianFamily,
};
pub use dense::{expm_hermitian, partial_trace, pauli_decompose, to_dense, DenseOperator};
pub use error::{Error, Result};
pub use heisenberg::{evolve_descriptors, Circuit, DescriptorFrame, GateSpec};
pub use homogenizer::{HomogenizerConfig, HomogenizerTrajectory};
pub use oscillator::{FockOperators, HPQubit};
pub use pauli::{commutator, pauli_mul, OperatorExpr, Pauli, PauliLabel, PauliString};
pub use witness::{MediatorModel, ProductStateSpec, RotationSpec, TargetMap, WitnessReport};

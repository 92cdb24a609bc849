//! Witnessing tasks, axis-rotation root systems, the classical-mediator
//! search and quantum-mediator demonstrations.

mod model;
pub mod report;
pub mod rotation;
pub mod search;

pub use model::{InitialStatePolicy, MediatorKind, MediatorModel};
pub use report::{Measurement, Parameter, Relation, RootSet, Series, WitnessReport};
pub use rotation::{
    frame_exchange_roots, conjugated_generator, rotation_image, solve_axis_system, solve_system, Axis,
    AxisSolution, AxisSystem, RotationSpec, SignedAxis, SystemRoots, TargetMap,
};
pub use search::{
    axis_system_report, classical_impossibility_search, coherence, quantum_demo, Interaction,
    ProductStateSpec, SearchBudget,
};

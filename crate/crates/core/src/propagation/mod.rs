//! Node-feature propagation: convergence conditions, the iterative solver,
//! the dense vectorized oracle, proximity embeddings and rectified
//! propagation.

mod conditions;
mod direct;
mod proximity;
mod relu;
mod solver;

pub use conditions::{
    check_convergence_conditions, project_for_mode, project_to_feasible, ConvergenceReport, PropagationMode,
};
pub use direct::{solve_direct_vec, DIRECT_SOLVE_LIMIT};
pub use proximity::{proximity_matrix, random_init, structure_embedding, truncation_order, ProximitySchedule};
pub use relu::{relu_propagate, ReluOutcome};
pub use solver::{
    propagate_fixed_point, write_residual_log, NodePropWeights, ResidualRecord, Solution, SolverConfig,
};

pub(crate) use solver::fixed_point_loop;

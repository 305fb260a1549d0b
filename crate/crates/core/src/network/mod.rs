//! Interacting memristor networks under Kirchhoff constraints.

pub mod graph;
pub mod maze;
pub mod dynamics;
pub mod projector;
pub mod soc;
pub mod spectral;

pub use graph::{random_graph, CircuitGraph, Edge, EdgeRole};
pub use maze::{maze_to_circuit, random_maze, random_unique_maze, solve_maze, Cell, MazeCircuit, MazeConfig, MazeSolution, MazeSpec};
pub use dynamics::{
    analytic_jacobian, linearize, memnet_rhs, mesh_currents, simulate_network, MeshSolver, NetworkDrive, NetworkRun, NetworkState,
    JACOBIAN_STEP,
};
pub use projector::{cycle_projector, Projector};
pub use soc::{relaxation_branch, soc_analyze, soc_experiment, BranchFit, SocConfig, SocReport};
pub use spectral::{fit_relaxation_exponent, log_grid, mean_relaxation, mean_relaxation_expm};

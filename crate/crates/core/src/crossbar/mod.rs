//! Crossbar arrays: analog read-out, pulsed storage, plasticity and learning
//! rules, and the energy comparison with digital hardware.

pub mod array;
pub mod energy;
pub mod plasticity;
pub mod storage;

pub use array::{nodal_oracle, program_matrix, program_matrix_clamped, read_mvm, Crossbar, Programmed, PROGRAM_SWEEPS, PROGRAM_TOL};
pub use energy::{energy_estimates, EnergyEstimates, EnergyParams};
pub use plasticity::{apply_generic, apply_update, stdp_program, StdpKernel, UpdateRule, STDP_REST};
pub use storage::{
    pulse_memory, pulse_memory_exact, read_bit, storage_device, storage_pulse, switching_time, write_coefficient, write_pulse,
    write_solution, PulseSpec, ReadOutcome, GUARD_BAND,
};

//! Fixed-step integration, drive waveforms and generic trace analysis.

pub mod analysis;
pub mod integrate;
pub mod signal;
pub mod spectrum;
pub mod trace;

pub use analysis::{loop_area, simulation_cost_metrics};
pub use integrate::{integrate, integrate_with, max_abs, IntegratorSpec, Method, Outcome, Step};
pub use signal::{DriveSignal, Schedule, Segment, SignalKind};
pub use spectrum::{fit_power_law, periodogram, power_spectrum_exponent, spectrum_fit, Periodogram, PowerLawFit, Window};
pub use trace::Trace;

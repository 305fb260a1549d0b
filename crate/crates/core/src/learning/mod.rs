//! Readouts and learning algorithms on analog substrates: random-feature
//! regression, reservoir computing, rate-coded neural populations and sparse
//! coding.

mod data;
mod elm;
mod lca;
mod nef;
mod reservoir;

pub use data::{coefficients_from_csv, coefficients_to_csv, matrix_from_csv};
pub use elm::{elm_features, fit_readout, Feature, Link, RandomFeatures, Readout};
pub use lca::{hard_threshold, lca_simulate, LcaProblem, LcaResult, LCA_TOL};
pub use nef::{
    lif_response, nef_currents, nef_decode, nef_decode_rms, nef_encode, nef_fit_decoders, Decoders, Grid, NefPopulation,
};
pub use reservoir::{linear_convolution_oracle, rc_run, Encoder, Reservoir, ReservoirDynamics};

//! Dempster-Shafer evidence theory plus a small quantum-dynamics kernel,
//! combined into a quantum dynamic belief (QDB) decision model with
//! classical and quantum baselines and dataset-reproduction tooling.
//!
//! Modules build on each other bottom-up:
//!
//! * [`evidence`] — frames of discernment, basic probability assignments,
//!   belief/plausibility/pignistic transforms, Deng and Shannon entropies.
//! * [`quantum`] — dense complex state vectors, Hermitian generators,
//!   unitary evolution via an in-repo Jacobi eigensolver, measurement masks.
//! * [`model`] — the six-step QDB pipeline: two-belief superposition,
//!   block-diagonal Hamiltonian evolution, measured BPAs, entanglement
//!   degree from Deng entropies, and interference-adjusted action
//!   probabilities, plus parameter fitting.
//! * [`baselines`] — the classical Markov (total-probability) model and a
//!   belief-action entanglement (BAE) quantum baseline with coupling fit.
//! * [`experiments`] — two-stage gamble datasets, model reproduction
//!   reports, error metrics, and CSV/JSON serialization.

pub mod baselines;
pub mod evidence;
pub mod experiments;
pub mod model;
pub mod quantum;

pub use baselines::{bae_fit, bae_predict, markov_total_probability, BaeFit, BaeParams, BaePrediction, BaselineError};
pub use evidence::{
    deng_entropy_uniform_powerset, DiscreteDistribution, EvidenceError, FocalSet, Frame,
    MassFunction,
};
pub use experiments::{
    builtin_datasets, compare_models, error_metrics, load_rows, report_to_csv, report_to_json,
    DataFormat, ErrorMetrics, ExperimentError, ExperimentRow, FaceType, PredictionReport,
};
pub use model::{
    fit_h, run_pipeline, BeliefActionBasis, InterferenceSign, ModelError, QdbParams, QdbResult,
};
pub use quantum::{
    HermitianGenerator, MeasurementMask, QuantumError, StateVector, TransitionMatrix,
    UnitaryOperator,
};

//! Phase-step estimation between two phase-shifted fringe patterns.
//!
//! The crate orthonormalizes a pair of interferograms with Gram-Schmidt,
//! recovers the wrapped phase, and estimates the unknown step between the
//! frames with either a robust per-pixel estimator ([`gs::estimate_step_tan`])
//! or a closed-form least-squares fit for unit-amplitude fringes
//! ([`gs::estimate_step_sin`]). Supporting modules synthesize test pairs,
//! normalize raw fringes, and run noise-sweep experiments.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the precision used by the harness and the command-line tool.

pub mod error;
pub mod field;
pub mod gs;
pub mod harness;
pub mod pfm;
pub mod prefilter;
pub mod scalar;
pub mod seed;
pub mod spectral;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use field::{inner_product, norm, scale_add, ScalarField};
pub use gs::{
    delta_map, demodulate, estimate_step, estimate_step_sin, estimate_step_tan, gs_decompose, kappa_ratio,
    wrapped_phase, Aggregator, DeltaMap, Estimator, GsDecomposition, PhaseMap, StepEstimate,
};
pub use harness::{
    aggregate_mae, parse_plan, read_csv, read_plan, run_plan, write_csv, Combination, ExperimentPlan, ExperimentRecord,
    MaeStats, MaeSummary, TrialStatus, CSV_HEADER,
};
pub use pfm::{load_pfm, read_pfm, save_pfm, save_pgm_preview, write_pfm, write_pgm_preview};
pub use prefilter::{
    gabor_filter_bank, isotropic_normalize, remove_background, GfbParams, IsotropicParams, Prefilter, PrefilterConfig,
};
pub use scalar::Real;
pub use spectral::{dft2_forward, dft2_inverse, Spectrum};
pub use synth::{synthesize, Case, FringePair, GroundTruth, SynthSpec};

/// Double-precision field, the working type of the pipeline.
pub type Field = ScalarField<f64>;
/// Single-precision field, the on-disk sample type.
pub type Field32 = ScalarField<f32>;
pub type Decomposition = GsDecomposition<f64>;
pub type Estimate = StepEstimate<f64>;
pub type Pair = FringePair<f64>;

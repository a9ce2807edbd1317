//! Verification experiments: the Bessel test-function bound, parameter
//! sweeps and tail-decay diagnostics.

mod bessel;
mod sweep;
mod witness;

pub use bessel::{bessel_psi, bessel_psi_slope, bessel_scaled};
pub use sweep::{
    decay_check, h2_distance, sweep_a, sweep_mu, DecayCheck, PointSummary, SweepAxis, SweepOptions,
    SweepResult, SweepRow,
};
pub use witness::{
    build_witness, evaluate_witness, search_witness, BesselWitness, Cutoff, CutoffShape,
    WitnessSearch,
};

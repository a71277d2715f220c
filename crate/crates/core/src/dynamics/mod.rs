//! Evolution of spherically symmetric characteristic ensembles with the
//! self-consistent shell field, plus conservation, virial, bound and blow-up
//! diagnostics.

mod blowup;
mod bounds;
mod crossing;
mod diagnostics;
mod initial;
mod run;
mod state;

pub use blowup::{detect_blowup, first_trigger, BlowupConfig, Trigger, Verdict};
pub use bounds::{
    check_apriori_bounds, density_constant, force_constant, predict_support_bound, support_fixed_point,
    BoundContext, BoundExponents, BoundFlags, BoundSample, InitialNorms,
};
pub use diagnostics::{
    attach_residuals, audit_grid, check_dilation_identity, check_second_virial, write_diagnostics_csv,
    DiagnosticsRecord, ResidualSeries, DIAGNOSTICS_HEADER,
};
pub use initial::{
    boost_to_zero_energy, plummer_at_ratio, plummer_base, plummer_data, InitialData, InitialSummary, DEFAULT_CUT,
};
pub use run::{run, Drifts, RunConfig, RunOutcome};
pub use state::{FieldMode, SimulationState, DEFAULT_R_FLOOR};

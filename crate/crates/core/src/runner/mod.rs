//! Campaign orchestration: configuration, measurement sessions, multi-run campaigns,
//! theory tables and the artifacts they leave on disk.

mod campaign;
mod config;
mod output;
mod session;
mod stack;

pub use config::{CampaignConfig, MaterialPair, Measurement, PlateSpec, Profile, RigOptions, Speed};
pub use session::{run_session, SessionOutput, SessionPlan};
pub use campaign::{
    comparison, fit_bending_corrected, gradient_scatter, material_library, rig_config, run_campaign, run_campaign_with_curve,
    session_seed, truth_curve, worker_threads, CampaignResult, Comparison, GradientScatter, ParamRow, RunResult, SessionKind,
    SessionResult, Summary, T_UNIX_START,
};
pub use output::{analytic_hydro_over_r, emit_theory_tables, log_grid, write_artifacts, write_theory_csv, TheoryRow};
pub use stack::StackFile;

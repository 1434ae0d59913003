//! District-heating plant scenario pack: synthetic data generators,
//! discrete-time plant models, window-MILP formulators, rule-based baseline
//! controllers and KPI reporting.
//!
//! Two configurations are provided:
//!
//! * **Scenario A** — gas boiler + biomass boiler + heat storage, hourly
//!   steps. The biomass boiler has a minimum power when committed and a
//!   minimum spacing between stops.
//! * **Scenario B** — biomass boiler + heat pump + heat storage, 15-minute
//!   steps, with a time-varying electricity price driving the heat pump's
//!   marginal cost.
//!
//! Fuel prices are treated as € per MWh of delivered heat (unit boiler
//! efficiency); relative comparisons between control strategies are
//! unaffected by this convention.

mod kpi;
mod rbc;
mod scenario_a;
mod scenario_b;
mod synth;

pub use kpi::{compute_kpis, KpiConfig, KpiReport, SolverStats};
pub use rbc::{rbc_baseline_a, rbc_baseline_b, RbcThresholdsA, RbcThresholdsB};
pub use scenario_a::{
    formulate_scenario_a, simulate_step_a, ControlsA, PlantModuleA, PlantParamsA, PlantStateA,
    ScenarioAFormulator, StepRecordA,
};
pub use scenario_b::{
    formulate_scenario_b, simulate_step_b, ControlsB, PlantModuleB, PlantParamsB, PlantStateB,
    ScenarioBFormulator, StepRecordB,
};
pub use synth::{
    extend_wrapped, generate_synthetic_load, generate_synthetic_price, SyntheticLoadSpec,
    SyntheticPriceSpec, DEFAULT_SEED,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("generated load peak {peak_mw:.3} MW exceeds servable capacity {capacity_mw:.3} MW")]
    SpecInfeasible { peak_mw: f64, capacity_mw: f64 },
    #[error(transparent)]
    Time(#[from] crate::time::TimeError),
}

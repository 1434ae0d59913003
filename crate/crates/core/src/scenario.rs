//! Scenario files: one TOML document describing the grid, the data sources,
//! the plant and the controller, plus named variant overrides so comparison
//! runs stay hermetic inside a single file.
//!
//! ```toml
//! name = "plant-a-mpc"
//!
//! [engine]
//! origin = 0
//! base_period = 3600
//! duration = 31536000
//!
//! [data.load]
//! generator = "load"
//!
//! [plant]
//! kind = "a"
//!
//! [plant.initial]
//! on = true
//!
//! [control]
//! kind = "mpc"
//! period = 86400
//!
//! [control.horizon]
//! length = 172800
//! step = 3600
//!
//! [variants.no_storage]
//! "plant.storage_capacity_mwh" = 0.0
//! "plant.storage_max_mw" = 0.0
//! ```
//!
//! Every random input flows from the `seed` field; when absent it defaults
//! to [`DEFAULT_SEED`](crate::plants::DEFAULT_SEED).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::engine::{
    EngineError, ModuleError, Sequence, SimModule, Simulation, SlotDecl, StepContext,
};
use crate::logic::{parse_logic_model, LogicError, LogicModule};
use crate::milp::MilpOptions;
use crate::mpc::{ForecastSet, Horizon, MpcError, MpcModule};
use crate::plants::{
    extend_wrapped, generate_synthetic_load, generate_synthetic_price, rbc_baseline_a,
    rbc_baseline_b, KpiConfig, PlantError, PlantModuleA, PlantModuleB, PlantParamsA, PlantParamsB,
    PlantStateA, PlantStateB, RbcThresholdsA, RbcThresholdsB, ScenarioAFormulator,
    ScenarioBFormulator, SyntheticLoadSpec, SyntheticPriceSpec, DEFAULT_SEED,
};
use crate::time::{TimeError, TimeGrid, TimeVector};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("unknown variant {0:?}")]
    UnknownVariant(String),
    #[error("invalid scenario:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error(transparent)]
    Plant(#[from] PlantError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Master seed; per-source seeds may override it.
    pub seed: Option<u64>,
    pub engine: EngineBlock,
    #[serde(default)]
    pub data: BTreeMap<String, DataSource>,
    pub plant: PlantBlock,
    pub control: ControlBlock,
    /// Slots whose series the CLI writes as CSV; empty means every recorded
    /// slot.
    #[serde(default)]
    pub probes: Vec<String>,
    /// Named override sets: dotted scenario path -> replacement value.
    #[serde(default)]
    pub variants: BTreeMap<String, BTreeMap<String, toml::Value>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineBlock {
    #[serde(default)]
    pub origin: i64,
    /// Base coupling period, seconds.
    pub base_period: i64,
    /// Run length, seconds (must be a multiple of the base period).
    pub duration: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Load,
    Price,
}

/// Either a `time,value` CSV file or a seeded synthetic generator.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    pub csv: Option<PathBuf>,
    pub generator: Option<GeneratorKind>,
    pub seed: Option<u64>,
    // generator knobs; unset fields keep the generator defaults
    pub annual_mwh: Option<f64>,
    pub peak_limit_mw: Option<f64>,
    pub base: Option<f64>,
    pub peak: Option<f64>,
    pub peak_start_hour: Option<u32>,
    pub peak_end_hour: Option<u32>,
    pub n_points: Option<usize>,
    pub step_s: Option<i64>,
    pub noise: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantKind {
    A,
    B,
}

/// Plant parameters; unset fields keep the scenario defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantBlock {
    pub kind: PlantKind,
    pub gas_max_mw: Option<f64>,
    pub gas_price: Option<f64>,
    pub biomass_max_mw: Option<f64>,
    pub biomass_min_fraction: Option<f64>,
    pub biomass_price: Option<f64>,
    pub storage_capacity_mwh: Option<f64>,
    pub storage_max_mw: Option<f64>,
    pub min_stop_spacing_h: Option<f64>,
    pub hp_max_mw: Option<f64>,
    pub cop: Option<f64>,
    pub renewable_share_target: Option<f64>,
    #[serde(default)]
    pub initial: InitialBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    #[serde(default)]
    pub e_mwh: f64,
    #[serde(default = "default_true")]
    pub on: bool,
    #[serde(default = "default_hours_since_stop")]
    pub hours_since_stop: f64,
}

fn default_true() -> bool {
    true
}

fn default_hours_since_stop() -> f64 {
    1e6
}

impl Default for InitialBlock {
    fn default() -> Self {
        Self { e_mwh: 0.0, on: true, hours_since_stop: 1e6 }
    }
}

impl PlantBlock {
    pub fn params_a(&self) -> PlantParamsA {
        let d = PlantParamsA::default();
        PlantParamsA {
            gas_max_mw: self.gas_max_mw.unwrap_or(d.gas_max_mw),
            gas_price: self.gas_price.unwrap_or(d.gas_price),
            biomass_max_mw: self.biomass_max_mw.unwrap_or(d.biomass_max_mw),
            biomass_min_fraction: self.biomass_min_fraction.unwrap_or(d.biomass_min_fraction),
            biomass_price: self.biomass_price.unwrap_or(d.biomass_price),
            storage_capacity_mwh: self.storage_capacity_mwh.unwrap_or(d.storage_capacity_mwh),
            storage_max_mw: self.storage_max_mw.unwrap_or(d.storage_max_mw),
            min_stop_spacing_h: self.min_stop_spacing_h.unwrap_or(d.min_stop_spacing_h),
            annual_load_mwh: d.annual_load_mwh,
            renewable_share_target: self
                .renewable_share_target
                .unwrap_or(d.renewable_share_target),
        }
    }

    pub fn params_b(&self) -> PlantParamsB {
        let d = PlantParamsB::default();
        PlantParamsB {
            biomass_max_mw: self.biomass_max_mw.unwrap_or(d.biomass_max_mw),
            biomass_min_fraction: self.biomass_min_fraction.unwrap_or(d.biomass_min_fraction),
            biomass_price: self.biomass_price.unwrap_or(d.biomass_price),
            hp_max_mw: self.hp_max_mw.unwrap_or(d.hp_max_mw),
            cop: self.cop.unwrap_or(d.cop),
            storage_capacity_mwh: self.storage_capacity_mwh.unwrap_or(d.storage_capacity_mwh),
            storage_max_mw: self.storage_max_mw.unwrap_or(d.storage_max_mw),
            min_stop_spacing_h: self.min_stop_spacing_h.unwrap_or(d.min_stop_spacing_h),
        }
    }

    pub fn initial_a(&self) -> PlantStateA {
        PlantStateA {
            e_mwh: self.initial.e_mwh,
            u: self.initial.on,
            hours_since_stop: self.initial.hours_since_stop,
            ..Default::default()
        }
    }

    pub fn initial_b(&self) -> PlantStateB {
        PlantStateB {
            e_mwh: self.initial.e_mwh,
            u: self.initial.on,
            hours_since_stop: self.initial.hours_since_stop,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlKind {
    Mpc,
    Rbc,
    None,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBlock {
    pub kind: ControlKind,
    /// Controller firing period, seconds; defaults to the base period.
    pub period: Option<i64>,
    pub horizon: Option<HorizonBlock>,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub rbc: RbcBlock,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonBlock {
    /// Look-ahead length, seconds.
    pub length: i64,
    /// Discretization step inside the window, seconds.
    pub step: i64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    /// Absolute bound-gap tolerance.
    pub gap: Option<f64>,
    pub node_limit: Option<u64>,
    pub time_limit_s: Option<f64>,
}

impl SolverBlock {
    pub fn options(&self) -> MilpOptions {
        let d = MilpOptions::default();
        MilpOptions {
            gap_tol: self.gap.unwrap_or(d.gap_tol),
            node_limit: self.node_limit.unwrap_or(d.node_limit),
            time_limit: self.time_limit_s.map(Duration::from_secs_f64),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbcBlock {
    pub on_threshold_mw: Option<f64>,
    pub off_threshold_mw: Option<f64>,
    pub filter_tau_h: Option<f64>,
    pub price_threshold: Option<f64>,
}

impl Scenario {
    pub fn from_str(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    /// Re-parses the scenario with the named variant's dotted-path overrides
    /// applied (e.g. `"plant.storage_capacity_mwh" = 0.0`).
    pub fn variant_of(text: &str, variant: &str) -> Result<Self, ScenarioError> {
        let mut root: toml::Value =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        let overrides = root
            .get("variants")
            .and_then(|v| v.get(variant))
            .and_then(|v| v.as_table())
            .cloned()
            .ok_or_else(|| ScenarioError::UnknownVariant(variant.to_string()))?;
        for (path, value) in overrides {
            set_dotted(&mut root, &path, value)?;
        }
        if let Some(table) = root.as_table_mut() {
            table.remove("variants");
        }
        let text = toml::to_string(&root).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        let mut s = Self::from_str(&text)?;
        s.name = format!("{}+{variant}", s.name);
        Ok(s)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Structural validation: every finding names the offending field. An
    /// empty list means the scenario can be built.
    pub fn validate(&self, base_dir: &Path) -> Vec<String> {
        let mut errs = Vec::new();
        let e = &self.engine;
        if e.base_period <= 0 {
            errs.push(format!("engine.base_period must be positive, got {}", e.base_period));
        }
        if e.duration <= 0 {
            errs.push(format!("engine.duration must be positive, got {}", e.duration));
        } else if e.base_period > 0 && e.duration % e.base_period != 0 {
            errs.push(format!(
                "engine.duration ({}) is not a multiple of engine.base_period ({})",
                e.duration, e.base_period
            ));
        }

        let period = self.control.period.unwrap_or(e.base_period);
        if e.base_period > 0 && (period <= 0 || period % e.base_period != 0) {
            errs.push(format!(
                "control.period ({period}) is not a positive multiple of engine.base_period ({})",
                e.base_period
            ));
        }
        match self.control.kind {
            ControlKind::Mpc => match &self.control.horizon {
                None => errs.push("control.horizon is required when control.kind = \"mpc\"".into()),
                Some(h) => {
                    if let Err(err) = Horizon::new(period, h.length, h.step) {
                        errs.push(format!("control.horizon: {err}"));
                    }
                    if e.base_period > 0 && h.step % e.base_period != 0 {
                        errs.push(format!(
                            "control.horizon.step ({}) is not a multiple of engine.base_period ({})",
                            h.step, e.base_period
                        ));
                    }
                }
            },
            ControlKind::Rbc | ControlKind::None => {}
        }

        for (name, src) in &self.data {
            match (&src.csv, &src.generator) {
                (None, None) => {
                    errs.push(format!("data.{name}: needs either csv or generator"))
                }
                (Some(_), Some(_)) => {
                    errs.push(format!("data.{name}: csv and generator are mutually exclusive"))
                }
                (Some(csv), None) => {
                    let path = base_dir.join(csv);
                    if !path.is_file() {
                        errs.push(format!("data.{name}: csv file {} not found", path.display()));
                    }
                }
                (None, Some(_)) => {}
            }
        }
        if !self.data.contains_key("load") {
            errs.push("data.load is required".into());
        }
        if self.plant.kind == PlantKind::B && !self.data.contains_key("price_el") {
            errs.push("data.price_el is required when plant.kind = \"b\"".into());
        }

        let frac = self.plant.biomass_min_fraction.unwrap_or(0.4);
        if !(0.0..=1.0).contains(&frac) {
            errs.push(format!("plant.biomass_min_fraction must be within [0, 1], got {frac}"));
        }
        for (field, value) in [
            ("plant.storage_capacity_mwh", self.plant.storage_capacity_mwh),
            ("plant.storage_max_mw", self.plant.storage_max_mw),
            ("plant.gas_max_mw", self.plant.gas_max_mw),
            ("plant.biomass_max_mw", self.plant.biomass_max_mw),
            ("plant.hp_max_mw", self.plant.hp_max_mw),
            ("plant.cop", self.plant.cop),
        ] {
            if let Some(v) = value {
                if v < 0.0 || (field == "plant.cop" && v == 0.0) {
                    errs.push(format!("{field} must be non-negative, got {v}"));
                }
            }
        }
        errs
    }

    /// The KPI extraction matching this scenario's slot layout.
    pub fn kpi_config(&self) -> KpiConfig {
        let sources = match self.plant.kind {
            PlantKind::A => vec![
                ("biomass".to_string(), "plant.Pb".to_string()),
                ("gas".to_string(), "plant.Pg".to_string()),
            ],
            PlantKind::B => vec![
                ("biomass".to_string(), "plant.Pb".to_string()),
                ("heat_pump".to_string(), "plant.Php".to_string()),
            ],
        };
        KpiConfig {
            dt_h: self.engine.base_period as f64 / 3600.0,
            sources,
            renewable_sources: vec!["biomass".into()],
            renewable_share_target: self
                .plant
                .renewable_share_target
                .unwrap_or(PlantParamsA::default().renewable_share_target),
            load_slot: "plant.load".into(),
            cost_rate_slot: "plant.cost_rate".into(),
            violation_slots: vec!["plant.violation".into(), "plant.violation_storage".into()],
            stop_slot: Some("plant.stop".into()),
            mpc_prefix: (self.control.kind == ControlKind::Mpc).then(|| "ems".to_string()),
        }
    }
}

fn set_dotted(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<(), ScenarioError> {
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = cursor.as_table_mut().ok_or_else(|| {
            ScenarioError::Parse(format!("variant override {path:?} crosses a non-table value"))
        })?;
        if i == parts.len() - 1 {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        cursor = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    unreachable!("split never yields an empty iterator")
}

fn resolve_series(
    name: &str,
    src: &DataSource,
    base_dir: &Path,
    master_seed: u64,
    origin: i64,
) -> Result<TimeVector, ScenarioError> {
    if let Some(csv) = &src.csv {
        return Ok(TimeVector::read_csv_file(&base_dir.join(csv), "")?);
    }
    match src.generator.expect("validated: csv or generator") {
        GeneratorKind::Load => {
            let d = SyntheticLoadSpec::default();
            let spec = SyntheticLoadSpec {
                annual_mwh: src.annual_mwh.unwrap_or(d.annual_mwh),
                n_hours: src.n_points.unwrap_or(d.n_hours),
                peak_limit_mw: src.peak_limit_mw.unwrap_or(d.peak_limit_mw),
                seed: src.seed.unwrap_or(master_seed),
                noise_amplitude: src.noise.unwrap_or(d.noise_amplitude),
                origin,
                ..d
            };
            Ok(generate_synthetic_load(&spec)?)
        }
        GeneratorKind::Price => {
            let d = SyntheticPriceSpec::default();
            let spec = SyntheticPriceSpec {
                base: src.base.unwrap_or(d.base),
                peak: src.peak.unwrap_or(d.peak),
                peak_hours: (
                    src.peak_start_hour.unwrap_or(d.peak_hours.0),
                    src.peak_end_hour.unwrap_or(d.peak_hours.1),
                ),
                n_points: src.n_points.unwrap_or(d.n_points),
                step_s: src.step_s.unwrap_or(d.step_s),
                // decorrelate from the load by default, like the generator does
                seed: src.seed.unwrap_or(master_seed ^ 0xE1EC),
                noise_amplitude: src.noise.unwrap_or(d.noise_amplitude),
                origin,
            };
            Ok(generate_synthetic_price(&spec)?)
        }
    }
    .map_err(|e: ScenarioError| {
        // keep the series name in the error chain
        ScenarioError::Parse(format!("data.{name}: {e}"))
    })
}

/// A scenario assembled into a runnable simulation.
/// Exposes resolved data series as time-vector slots. The vectors are
/// immutable, so one write during `initialize` is enough; the module never
/// fires.
struct SeriesPublisher {
    id: String,
    series: Vec<(String, TimeVector)>,
}

impl SimModule for SeriesPublisher {
    fn id(&self) -> &str {
        &self.id
    }

    fn inputs(&self) -> Vec<SlotDecl> {
        vec![]
    }

    fn outputs(&self) -> Vec<SlotDecl> {
        self.series.iter().map(|(s, _)| SlotDecl::time_vector(s)).collect()
    }

    fn initialize(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
        for (slot, tv) in &self.series {
            ctx.write(slot, tv.clone())?;
        }
        Ok(())
    }

    fn do_step(&mut self, _ctx: &mut StepContext) -> Result<(), ModuleError> {
        Ok(())
    }
}

pub struct BuiltScenario {
    pub simulation: Simulation,
    /// End time to pass to [`Simulation::run`].
    pub t_end: i64,
    pub kpi: KpiConfig,
}

/// Assembles the simulation: resolves data sources, instantiates the plant
/// and the controller, and wires the sequences (controller first within a
/// tick). `out_dir`, when given, receives LP dumps and MPC diagnostics.
pub fn build_simulation(
    scenario: &Scenario,
    base_dir: &Path,
    out_dir: Option<&Path>,
) -> Result<BuiltScenario, ScenarioError> {
    let errs = scenario.validate(base_dir);
    if !errs.is_empty() {
        return Err(ScenarioError::Invalid(errs));
    }

    let e = &scenario.engine;
    let seed = scenario.seed();
    let grid = TimeGrid::new(e.origin, e.base_period)?;
    let t_end = e.origin + e.duration;

    let mut load = resolve_series("load", &scenario.data["load"], base_dir, seed, e.origin)?;
    let mut price = match scenario.data.get("price_el") {
        Some(src) => Some(resolve_series("price_el", src, base_dir, seed, e.origin)?),
        None => None,
    };

    // every run samples the series up to the last tick, and forecasts must
    // additionally cover one horizon past the end of the run
    let cover_until = match (scenario.control.kind, &scenario.control.horizon) {
        (ControlKind::Mpc, Some(h)) => t_end + h.length,
        _ => t_end,
    };
    let extend = |tv: &TimeVector| {
        let step = if tv.len() >= 2 {
            tv.times()[tv.len() - 1] - tv.times()[tv.len() - 2]
        } else {
            e.base_period
        };
        let missing = cover_until - tv.last_time();
        if missing <= 0 {
            return tv.clone();
        }
        let extra = (missing / step) as usize + 1;
        extend_wrapped(tv, extra, step)
    };
    load = extend(&load);
    price = price.as_ref().map(extend);

    let mut modules: Vec<Box<dyn SimModule>> = Vec::new();
    let mut sequences = Vec::new();

    // publish the data series as time-vector slots so controllers can sample
    // the value for the tick being decided instead of acting on the previous
    // tick's plant measurement
    let mut published = vec![("data.load".to_string(), load.clone())];
    if let Some(p) = &price {
        published.push(("data.price_el".to_string(), p.clone()));
    }
    modules.push(Box::new(SeriesPublisher { id: "data".into(), series: published }));

    let period = scenario.control.period.unwrap_or(e.base_period);
    let multiplier = (period / e.base_period) as u64;
    let dt_h = period as f64 / 3600.0;

    match scenario.control.kind {
        ControlKind::None => {}
        ControlKind::Rbc => {
            let rbc = &scenario.control.rbc;
            let text = match scenario.plant.kind {
                PlantKind::A => {
                    let d = RbcThresholdsA::default();
                    let th = RbcThresholdsA {
                        on_load_mw: rbc.on_threshold_mw.unwrap_or(d.on_load_mw),
                        off_load_mw: rbc.off_threshold_mw.unwrap_or(d.off_load_mw),
                        filter_tau_h: rbc.filter_tau_h.unwrap_or(d.filter_tau_h),
                        dt_h,
                        init_on: scenario.plant.initial.on,
                    };
                    rbc_baseline_a(&scenario.plant.params_a(), &th, "data.load", "plant.E", "ctl")
                }
                PlantKind::B => {
                    let d = RbcThresholdsB::default();
                    let th = RbcThresholdsB {
                        price_threshold: rbc.price_threshold.unwrap_or(d.price_threshold),
                        on_residual_mw: rbc.on_threshold_mw.unwrap_or(d.on_residual_mw),
                        off_residual_mw: rbc.off_threshold_mw.unwrap_or(d.off_residual_mw),
                        filter_tau_h: rbc.filter_tau_h.unwrap_or(d.filter_tau_h),
                        dt_h,
                        init_on: scenario.plant.initial.on,
                    };
                    rbc_baseline_b(
                        &scenario.plant.params_b(),
                        &th,
                        "data.load",
                        "data.price_el",
                        "plant.E",
                        "ctl",
                    )
                }
            };
            let graph = parse_logic_model(&text)?;
            modules.push(Box::new(LogicModule::new("rbc", graph)?));
            sequences.push(Sequence::new("control", multiplier, vec!["rbc".into()]));
        }
        ControlKind::Mpc => {
            let h = scenario.control.horizon.as_ref().expect("validated");
            let horizon = Horizon::new(period, h.length, h.step)?;
            let mut forecasts = ForecastSet::new();
            forecasts.insert("load", load.clone());
            if let Some(p) = &price {
                forecasts.insert("price_el", p.clone());
            }
            let (formulator, slots): (Box<dyn crate::mpc::MpcFormulator>, Vec<String>) =
                match scenario.plant.kind {
                    PlantKind::A => {
                        let f = ScenarioAFormulator::new(
                            scenario.plant.params_a(),
                            scenario.plant.initial_a(),
                        );
                        let slots = f.control_slots();
                        (Box::new(f), slots)
                    }
                    PlantKind::B => {
                        let f = ScenarioBFormulator::new(
                            scenario.plant.params_b(),
                            scenario.plant.initial_b(),
                        );
                        let slots = f.control_slots();
                        (Box::new(f), slots)
                    }
                };
            let mut ems = MpcModule::new(
                "ems",
                formulator,
                horizon,
                forecasts,
                scenario.control.solver.options(),
            );
            if let Some(dir) = out_dir {
                ems = ems
                    .with_lp_dump_dir(dir)
                    .with_diagnostics_path(dir.join("mpc_diagnostics.csv"));
            }
            modules.push(Box::new(ems.with_control_slots(slots)));
            sequences.push(Sequence::new("control", multiplier, vec!["ems".into()]));
        }
    }

    match scenario.plant.kind {
        PlantKind::A => {
            modules.push(Box::new(PlantModuleA::new(
                "plant",
                scenario.plant.params_a(),
                scenario.plant.initial_a(),
                load,
            )));
        }
        PlantKind::B => {
            let price = price.expect("validated: price_el present for plant b");
            modules.push(Box::new(PlantModuleB::new(
                "plant",
                scenario.plant.params_b(),
                scenario.plant.initial_b(),
                load,
                price,
            )));
        }
    }
    sequences.push(Sequence::new("plant", 1, vec!["plant".into()]));

    let simulation = Simulation::new(grid, sequences, modules)?;
    Ok(BuiltScenario { simulation, t_end, kpi: scenario.kpi_config() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "test-a"

[engine]
base_period = 3600
duration = 172800

[data.load]
generator = "load"

[plant]
kind = "a"

[control]
kind = "rbc"

[variants.no_storage]
"plant.storage_capacity_mwh" = 0.0
"plant.storage_max_mw" = 0.0
"#;

    #[test]
    fn parses_and_validates() {
        let s = Scenario::from_str(BASE).unwrap();
        assert_eq!(s.name, "test-a");
        assert_eq!(s.engine.base_period, 3600);
        assert!(s.validate(Path::new(".")).is_empty());
    }

    #[test]
    fn variant_overrides_apply() {
        let s = Scenario::variant_of(BASE, "no_storage").unwrap();
        assert_eq!(s.plant.storage_capacity_mwh, Some(0.0));
        assert_eq!(s.name, "test-a+no_storage");
        assert!(Scenario::variant_of(BASE, "missing").is_err());
    }

    #[test]
    fn validation_names_the_fields() {
        let text = BASE
            .replace("duration = 172800", "duration = 172801")
            .replace("kind = \"rbc\"", "kind = \"mpc\"");
        let s = Scenario::from_str(&text).unwrap();
        let errs = s.validate(Path::new("."));
        assert!(errs.iter().any(|e| e.contains("engine.duration")), "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("control.horizon")), "{errs:?}");
    }

    #[test]
    fn missing_csv_reported() {
        let text = BASE.replace("generator = \"load\"", "csv = \"nope.csv\"");
        let s = Scenario::from_str(&text).unwrap();
        let errs = s.validate(Path::new("/definitely/not/here"));
        assert!(errs.iter().any(|e| e.contains("data.load") && e.contains("nope.csv")), "{errs:?}");
    }

    #[test]
    fn rbc_run_is_deterministic() {
        let run = || {
            let s = Scenario::from_str(BASE).unwrap();
            let built = build_simulation(&s, Path::new("."), None).unwrap();
            built.simulation.run(built.t_end).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        let (_, pb) = a.slot("plant.Pb").unwrap();
        assert_eq!(pb.len(), 48);
    }

    #[test]
    fn mpc_scenario_builds_and_runs_two_days() {
        let text = BASE.replace(
            "[control]\nkind = \"rbc\"",
            "[control]\nkind = \"mpc\"\nperiod = 86400\n\n[control.horizon]\nlength = 172800\nstep = 3600\n",
        );
        let s = Scenario::from_str(&text).unwrap();
        let built = build_simulation(&s, Path::new("."), None).unwrap();
        let results = built.simulation.run(built.t_end).unwrap();
        let (_, status) = results.slot("ems.status").unwrap();
        assert_eq!(status.len(), 2, "one MPC iteration per day");
        let (_, v) = results.slot("plant.violation").unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-9), "plan should be feasible");
    }
}

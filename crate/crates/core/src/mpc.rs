//! Rolling-horizon MPC driver.
//!
//! Each iteration gathers a state snapshot and forecasts, asks a
//! scenario-supplied formulator to build a fresh MILP over the horizon,
//! solves it, writes the first control-period worth of the solution to the
//! control slots as time-vectors, and shifts the forecasts before the next
//! iteration. The driver is an ordinary [`SimModule`] placed on a slow
//! sequence, so one simulation mixes fast plant dynamics with sparse
//! optimization fires.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{ModuleError, SimModule, SlotDecl, StepContext};
use crate::milp::{
    export_lp_file, MilpError, MilpOptions, MilpProblem, MilpSolution, MilpStatus, VarId,
};
use crate::time::{SampleMode, TimeError, TimeVector};
use crate::zone::SlotValue;

#[derive(Debug, Error)]
pub enum MpcError {
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("forecast {name:?} does not cover the horizon: needs [{needed_from}, {needed_to}], has [{available_from}, {available_to}]")]
    ForecastGap { name: String, needed_from: i64, needed_to: i64, available_from: i64, available_to: i64 },
    #[error("forecast {0:?} is missing")]
    MissingForecast(String),
    #[error("MILP at t = {t} ended {status:?} with no usable plan; model dumped to {lp_path:?}")]
    Infeasible { t: i64, status: MilpStatus, lp_path: PathBuf },
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error("formulation error: {0}")]
    Formulation(String),
}

/// Rolling-horizon timing: how often the MPC runs, how far it looks, and the
/// discretization step inside the window. All three are integer seconds and
/// the control period and horizon are integer multiples of the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Horizon {
    pub control_period: i64,
    pub horizon: i64,
    pub step: i64,
}

impl Horizon {
    pub fn new(control_period: i64, horizon: i64, step: i64) -> Result<Self, MpcError> {
        let bad = |m: String| Err(MpcError::InvalidHorizon(m));
        if step <= 0 {
            return bad(format!("step must be positive, got {step}"));
        }
        if control_period % step != 0 || horizon % step != 0 {
            return bad(format!(
                "control period {control_period} and horizon {horizon} must be multiples of step {step}"
            ));
        }
        if control_period <= 0 || control_period > horizon {
            return bad(format!(
                "control period {control_period} must be in (0, horizon = {horizon}]"
            ));
        }
        Ok(Self { control_period, horizon, step })
    }

    /// Number of optimization intervals in the window.
    pub fn n_steps(&self) -> usize {
        (self.horizon / self.step) as usize
    }

    /// Number of intervals actually applied before the next iteration.
    pub fn applied_steps(&self) -> usize {
        (self.control_period / self.step) as usize
    }
}

/// Named forecast series (loads, prices, weather) feeding the formulator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForecastSet {
    series: BTreeMap<String, TimeVector>,
}

impl ForecastSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tv: TimeVector) {
        self.series.insert(name.into(), tv);
    }

    pub fn get(&self, name: &str) -> Result<&TimeVector, MpcError> {
        self.series.get(name).ok_or_else(|| MpcError::MissingForecast(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    /// Checks that `name` covers every sampled instant of the window
    /// starting at `t_now`: `[t_now, t_now + horizon - step]` (hold-last
    /// sampling carries the final sample across its own interval).
    pub fn check_coverage(&self, name: &str, t_now: i64, horizon: &Horizon) -> Result<(), MpcError> {
        let tv = self.get(name)?;
        let needed_to = t_now + horizon.horizon - horizon.step;
        if tv.first_time() > t_now || tv.last_time() < needed_to {
            return Err(MpcError::ForecastGap {
                name: name.to_string(),
                needed_from: t_now,
                needed_to,
                available_from: tv.first_time(),
                available_to: tv.last_time(),
            });
        }
        Ok(())
    }

    /// Hold-last samples of `name` at the window's `n_steps` instants.
    pub fn sample_steps(&self, name: &str, t_now: i64, horizon: &Horizon) -> Result<Vec<f64>, MpcError> {
        self.check_coverage(name, t_now, horizon)?;
        let tv = self.get(name)?;
        (0..horizon.n_steps())
            .map(|k| {
                tv.sample(t_now + k as i64 * horizon.step, SampleMode::HoldLast)
                    .map_err(MpcError::Time)
            })
            .collect()
    }

    /// Receding update between iterations: every series drops the points
    /// expired by `dt`, then newly arrived samples are overlaid
    /// (last-write-wins at coinciding times).
    pub fn receding_update(
        &mut self,
        dt: i64,
        new_data: &BTreeMap<String, TimeVector>,
    ) -> Result<(), MpcError> {
        for (name, tv) in &mut self.series {
            let mut shifted = tv.shift(dt)?;
            if let Some(new) = new_data.get(name) {
                shifted = shifted.overlay(new);
            }
            *tv = shifted;
        }
        for (name, new) in new_data {
            self.series.entry(name.clone()).or_insert_with(|| new.clone());
        }
        Ok(())
    }
}

/// One control slot and the solution variable carrying its value at each of
/// the window's steps.
#[derive(Debug, Clone)]
pub struct ControlMap {
    pub slot: String,
    pub vars: Vec<VarId>,
}

/// A freshly built window problem plus the variable-to-slot mapping used to
/// extract the control trajectory from its solution.
pub struct Formulation {
    pub problem: MilpProblem,
    pub controls: Vec<ControlMap>,
}

/// Scenario-supplied plug-in building a new MILP at every iteration.
pub trait MpcFormulator: Send {
    /// Forecast series the formulator reads; coverage is checked before
    /// every iteration.
    fn forecast_names(&self) -> Vec<String>;
    /// Scalar state slots snapshotted before every iteration, with the value
    /// assumed while the slot has no producer yet.
    fn state_slots(&self) -> Vec<(String, f64)>;
    fn formulate(
        &self,
        state: &BTreeMap<String, f64>,
        forecasts: &ForecastSet,
        t_now: i64,
        horizon: &Horizon,
    ) -> Result<Formulation, MpcError>;
}

/// Planned control values over the window, per slot, plus the prefix that is
/// actually applied before the next iteration.
#[derive(Debug, Clone)]
pub struct ControlTrajectory {
    pub full: BTreeMap<String, TimeVector>,
    pub applied: BTreeMap<String, TimeVector>,
}

/// One MPC iteration: coverage check, fresh formulation, solve, trajectory
/// extraction. A solve that ends without a usable plan (infeasible,
/// unbounded, or limits hit before any incumbent) dumps the model as an LP
/// file for post-mortem and fails.
pub fn mpc_iterate(
    formulator: &dyn MpcFormulator,
    state: &BTreeMap<String, f64>,
    forecasts: &ForecastSet,
    t_now: i64,
    horizon: &Horizon,
    options: &MilpOptions,
    lp_dump_dir: &Path,
) -> Result<(ControlTrajectory, MilpSolution), MpcError> {
    for name in formulator.forecast_names() {
        forecasts.check_coverage(&name, t_now, horizon)?;
    }
    let formulation = formulator.formulate(state, forecasts, t_now, horizon)?;
    let solution = crate::milp::solve_milp(&formulation.problem, options)?;

    let usable = matches!(
        solution.status,
        MilpStatus::Optimal | MilpStatus::GapLimit | MilpStatus::NodeLimit
    ) && !solution.values.is_empty();
    if !usable {
        let lp_path = lp_dump_dir.join(format!("infeasible_t{t_now}.lp"));
        std::fs::create_dir_all(lp_dump_dir)
            .and_then(|_| {
                export_lp_file(&formulation.problem, &lp_path)
                    .map_err(|e| std::io::Error::other(e.to_string()))
            })
            .map_err(|e| MpcError::Formulation(format!("failed to dump LP file: {e}")))?;
        return Err(MpcError::Infeasible { t: t_now, status: solution.status, lp_path });
    }

    let n = horizon.n_steps();
    let applied_n = horizon.applied_steps();
    let times: Vec<i64> = (0..n).map(|k| t_now + k as i64 * horizon.step).collect();
    let mut full = BTreeMap::new();
    let mut applied = BTreeMap::new();
    for cm in &formulation.controls {
        if cm.vars.len() != n {
            return Err(MpcError::Formulation(format!(
                "control {:?} maps {} variables for a {}-step window",
                cm.slot,
                cm.vars.len(),
                n
            )));
        }
        let values: Vec<f64> = cm.vars.iter().map(|&v| solution.values[v]).collect();
        let last_applied = values[applied_n - 1];
        let tv = TimeVector::new(times.clone(), values, "")?;
        // each plan value holds over its whole step interval, so close the
        // applied span at the end of the last applied interval (callers may
        // sample it on a grid finer than the plan step)
        let mut cut = tv.window(t_now, times[applied_n - 1])?;
        cut = cut.overlay(&TimeVector::new(
            vec![t_now + applied_n as i64 * horizon.step],
            vec![last_applied],
            "",
        )?);
        applied.insert(cm.slot.clone(), cut);
        full.insert(cm.slot.clone(), tv);
    }
    Ok((ControlTrajectory { full, applied }, solution))
}

/// Per-iteration solver diagnostics, also mirrored to scalar slots.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub t: i64,
    pub status: MilpStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub nodes: u64,
    pub wall_ms: f64,
}

fn status_code(s: MilpStatus) -> f64 {
    match s {
        MilpStatus::Optimal => 0.0,
        MilpStatus::GapLimit => 1.0,
        MilpStatus::NodeLimit => 2.0,
        MilpStatus::Infeasible => 3.0,
        MilpStatus::Unbounded => 4.0,
    }
}

/// The MPC loop packaged as a co-simulation module.
///
/// Fires on its sequence's period, which the scenario sets equal to the
/// control period. Each firing reads the state slots, optionally overlays
/// newly published forecast samples (time-vector slots named per series),
/// runs one iteration and writes the applied trajectory to the control
/// slots. Solver diagnostics are written as `<id>.objective`, `<id>.bound`,
/// `<id>.nodes`, `<id>.wall_ms` and `<id>.status` and optionally dumped as a
/// CSV on terminate.
pub struct MpcModule {
    id: String,
    formulator: Box<dyn MpcFormulator>,
    horizon: Horizon,
    options: MilpOptions,
    forecasts: ForecastSet,
    /// series name -> slot holding fresh samples to overlay each iteration
    forecast_slots: BTreeMap<String, String>,
    lp_dump_dir: PathBuf,
    diagnostics_path: Option<PathBuf>,
    diagnostics: Vec<IterationRecord>,
    iterations: u64,
}

impl MpcModule {
    pub fn new(
        id: impl Into<String>,
        formulator: Box<dyn MpcFormulator>,
        horizon: Horizon,
        forecasts: ForecastSet,
        options: MilpOptions,
    ) -> Self {
        Self {
            id: id.into(),
            formulator,
            horizon,
            options,
            forecasts,
            forecast_slots: BTreeMap::new(),
            lp_dump_dir: std::env::temp_dir(),
            diagnostics_path: None,
            diagnostics: Vec::new(),
            iterations: 0,
        }
    }

    /// Overlays samples from `slot` onto forecast series `name` at every
    /// iteration (the slot must hold a time-vector).
    pub fn with_forecast_slot(mut self, name: impl Into<String>, slot: impl Into<String>) -> Self {
        self.forecast_slots.insert(name.into(), slot.into());
        self
    }

    pub fn with_lp_dump_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.lp_dump_dir = dir.into();
        self
    }

    pub fn with_diagnostics_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.diagnostics_path = Some(path.into());
        self
    }

    pub fn diagnostics(&self) -> &[IterationRecord] {
        &self.diagnostics
    }

    /// Declares the control slots this module writes; `SimModule::outputs`
    /// must be known before the first formulation, so the slot list cannot
    /// be inferred from a `ControlMap`. It must match the slots named by
    /// every formulation.
    pub fn with_control_slots(self, slots: Vec<String>) -> MpcModuleWithSlots {
        MpcModuleWithSlots { inner: self, control_slots: slots }
    }
}

/// `MpcModule` with its output slot set pinned down; this is the type that
/// implements [`SimModule`].
pub struct MpcModuleWithSlots {
    inner: MpcModule,
    control_slots: Vec<String>,
}

impl MpcModuleWithSlots {
    pub fn diagnostics(&self) -> &[IterationRecord] {
        self.inner.diagnostics()
    }
}

impl SimModule for MpcModuleWithSlots {
    fn id(&self) -> &str {
        &self.inner.id
    }

    fn inputs(&self) -> Vec<SlotDecl> {
        let mut decls: Vec<SlotDecl> = self
            .inner
            .formulator
            .state_slots()
            .into_iter()
            .map(|(slot, _)| SlotDecl::scalar(slot))
            .collect();
        for slot in self.inner.forecast_slots.values() {
            decls.push(SlotDecl::time_vector(slot.clone()));
        }
        decls
    }

    fn outputs(&self) -> Vec<SlotDecl> {
        let mut decls: Vec<SlotDecl> = self
            .control_slots
            .iter()
            .map(|s| SlotDecl::time_vector(s.clone()))
            .collect();
        let id = &self.inner.id;
        for suffix in ["objective", "bound", "nodes", "wall_ms", "status"] {
            decls.push(SlotDecl::scalar(format!("{id}.{suffix}")));
        }
        decls
    }

    fn initialize(&mut self, _ctx: &mut StepContext) -> Result<(), ModuleError> {
        self.inner.diagnostics.clear();
        self.inner.iterations = 0;
        Ok(())
    }

    fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
        let inner = &mut self.inner;

        // shift forecasts to the new window, overlaying fresh samples
        if inner.iterations > 0 {
            let mut new_data = BTreeMap::new();
            for (name, slot) in &inner.forecast_slots {
                if let Ok(SlotValue::TimeVector(tv)) = ctx.read(slot) {
                    new_data.insert(name.clone(), (*tv).clone());
                }
            }
            inner
                .forecasts
                .receding_update(inner.horizon.control_period, &new_data)
                .map_err(|e| ModuleError::Other(e.to_string()))?;
        } else {
            for (name, slot) in &inner.forecast_slots {
                if let Ok(SlotValue::TimeVector(tv)) = ctx.read(slot) {
                    let merged = match inner.forecasts.get(name) {
                        Ok(existing) => existing.overlay(&tv),
                        Err(_) => (*tv).clone(),
                    };
                    inner.forecasts.insert(name.clone(), merged);
                }
            }
        }

        let mut state = BTreeMap::new();
        for (slot, default) in inner.formulator.state_slots() {
            let v = ctx.read_scalar_or(&slot, default)?;
            state.insert(slot, v);
        }

        let (trajectory, solution) = mpc_iterate(
            inner.formulator.as_ref(),
            &state,
            &inner.forecasts,
            ctx.t,
            &inner.horizon,
            &inner.options,
            &inner.lp_dump_dir,
        )
        .map_err(|e| match e {
            MpcError::Infeasible { .. } => ModuleError::SolverInfeasible(e.to_string()),
            other => ModuleError::Other(other.to_string()),
        })?;

        for (slot, tv) in &trajectory.applied {
            ctx.write(slot, tv.clone())?;
        }
        let id = inner.id.clone();
        ctx.write(&format!("{id}.objective"), solution.objective)?;
        ctx.write(&format!("{id}.bound"), solution.best_bound)?;
        ctx.write(&format!("{id}.nodes"), solution.nodes as f64)?;
        ctx.write(&format!("{id}.wall_ms"), solution.wall_time.as_secs_f64() * 1e3)?;
        ctx.write(&format!("{id}.status"), status_code(solution.status))?;

        inner.diagnostics.push(IterationRecord {
            t: ctx.t,
            status: solution.status,
            objective: solution.objective,
            best_bound: solution.best_bound,
            nodes: solution.nodes,
            wall_ms: solution.wall_time.as_secs_f64() * 1e3,
        });
        inner.iterations += 1;
        Ok(())
    }

    fn terminate(&mut self) -> Result<(), ModuleError> {
        if let Some(path) = &self.inner.diagnostics_path {
            let mut f = std::fs::File::create(path)
                .map_err(|e| ModuleError::Other(format!("{}: {e}", path.display())))?;
            writeln!(f, "t,status,objective,bound,nodes,wall_ms")
                .map_err(|e| ModuleError::Other(e.to_string()))?;
            for r in &self.inner.diagnostics {
                writeln!(
                    f,
                    "{},{:?},{},{},{},{}",
                    r.t, r.status, r.objective, r.best_bound, r.nodes, r.wall_ms
                )
                .map_err(|e| ModuleError::Other(e.to_string()))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Sequence, Simulation};
    use crate::milp::{LinExpr, Sense, VarKind};
    use crate::time::TimeGrid;

    const H: i64 = 3600;

    fn tv(times: &[i64], values: &[f64]) -> TimeVector {
        TimeVector::new(times.to_vec(), values.to_vec(), "MW").unwrap()
    }

    /// Single boiler, capacity 10, cost 1: the unique feasible dispatch is
    /// the load itself.
    struct SingleBoiler;

    impl MpcFormulator for SingleBoiler {
        fn forecast_names(&self) -> Vec<String> {
            vec!["load".into()]
        }
        fn state_slots(&self) -> Vec<(String, f64)> {
            vec![]
        }
        fn formulate(
            &self,
            _state: &BTreeMap<String, f64>,
            forecasts: &ForecastSet,
            t_now: i64,
            horizon: &Horizon,
        ) -> Result<Formulation, MpcError> {
            let load = forecasts.sample_steps("load", t_now, horizon)?;
            let mut p = MilpProblem::new();
            let mut cost = LinExpr::new();
            let mut vars = Vec::new();
            for (k, &l) in load.iter().enumerate() {
                let v = p.add_var(format!("P[{k}]"), VarKind::Continuous, 0.0, 10.0)?;
                p.add_constraint(LinExpr::var(v), Sense::Eq, l)?;
                cost += LinExpr::var(v);
                vars.push(v);
            }
            p.set_objective(cost)?;
            Ok(Formulation { problem: p, controls: vec![ControlMap { slot: "P".into(), vars }] })
        }
    }

    #[test]
    fn horizon_validation() {
        assert!(Horizon::new(24 * H, 48 * H, H).is_ok());
        assert!(Horizon::new(24 * H, 48 * H, 7 * H).is_err()); // not multiples
        assert!(Horizon::new(72 * H, 48 * H, H).is_err()); // period > horizon
        assert!(Horizon::new(0, 48 * H, H).is_err());
    }

    #[test]
    fn single_boiler_trajectory_equals_load() {
        let horizon = Horizon::new(2 * H, 4 * H, H).unwrap();
        let mut fc = ForecastSet::new();
        fc.insert("load", tv(&[0, H, 2 * H, 3 * H], &[5.0, 6.0, 7.0, 8.0]));
        let (traj, sol) = mpc_iterate(
            &SingleBoiler,
            &BTreeMap::new(),
            &fc,
            0,
            &horizon,
            &MilpOptions::default(),
            std::env::temp_dir().as_path(),
        )
        .unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert_eq!(traj.full["P"].values(), &[5.0, 6.0, 7.0, 8.0]);
        // applied prefix: first control period = 2 steps, with a closing
        // point so hold-last sampling covers the whole second interval
        assert_eq!(traj.applied["P"].times(), &[0, H, 2 * H]);
        assert_eq!(traj.applied["P"].values(), &[5.0, 6.0, 6.0]);
    }

    #[test]
    fn forecast_gap_detected() {
        let horizon = Horizon::new(2 * H, 4 * H, H).unwrap();
        let mut fc = ForecastSet::new();
        fc.insert("load", tv(&[0, H], &[5.0, 6.0])); // covers 2 of 4 steps
        let err = mpc_iterate(
            &SingleBoiler,
            &BTreeMap::new(),
            &fc,
            0,
            &horizon,
            &MilpOptions::default(),
            std::env::temp_dir().as_path(),
        )
        .unwrap_err();
        assert!(matches!(err, MpcError::ForecastGap { .. }), "{err}");
    }

    #[test]
    fn receding_update_shift_and_overlay() {
        let mut fc = ForecastSet::new();
        // 72 h of hourly samples
        let times: Vec<i64> = (0..72).map(|k| k * H).collect();
        let values: Vec<f64> = (0..72).map(|k| k as f64).collect();
        fc.insert("load", tv(&times, &values));

        // shift by 24 h: 48 h remain
        fc.receding_update(24 * H, &BTreeMap::new()).unwrap();
        assert_eq!(fc.get("load").unwrap().first_time(), 24 * H);
        assert_eq!(fc.get("load").unwrap().len(), 48);

        // append 24 h of new samples and correct one existing point
        let new_times: Vec<i64> = (71..96).map(|k| k * H).collect();
        let new_values: Vec<f64> = vec![500.0; 25];
        let mut new_data = BTreeMap::new();
        new_data.insert("load".to_string(), tv(&new_times, &new_values));
        fc.receding_update(0, &new_data).unwrap();
        let load = fc.get("load").unwrap();
        assert_eq!(load.last_time(), 95 * H);
        assert_eq!(load.sample(71 * H, SampleMode::HoldLast).unwrap(), 500.0); // corrected
        assert_eq!(load.sample(70 * H, SampleMode::HoldLast).unwrap(), 70.0);
    }

    #[test]
    fn receding_update_past_span_fails() {
        let mut fc = ForecastSet::new();
        fc.insert("load", tv(&[0, H], &[1.0, 2.0]));
        assert!(fc.receding_update(3 * H, &BTreeMap::new()).is_err());
    }

    /// Infeasible window: load exceeds capacity.
    struct Impossible;

    impl MpcFormulator for Impossible {
        fn forecast_names(&self) -> Vec<String> {
            vec![]
        }
        fn state_slots(&self) -> Vec<(String, f64)> {
            vec![]
        }
        fn formulate(
            &self,
            _: &BTreeMap<String, f64>,
            _: &ForecastSet,
            _: i64,
            _: &Horizon,
        ) -> Result<Formulation, MpcError> {
            let mut p = MilpProblem::new();
            let v = p.add_var("x", VarKind::Continuous, 0.0, 1.0)?;
            p.add_constraint(LinExpr::var(v), Sense::Ge, 2.0)?;
            Ok(Formulation { problem: p, controls: vec![] })
        }
    }

    #[test]
    fn infeasible_dumps_lp_and_fails() {
        let dir = std::env::temp_dir().join("mpc_dump_test");
        let horizon = Horizon::new(H, H, H).unwrap();
        let err = mpc_iterate(
            &Impossible,
            &BTreeMap::new(),
            &ForecastSet::new(),
            7200,
            &horizon,
            &MilpOptions::default(),
            &dir,
        )
        .unwrap_err();
        match err {
            MpcError::Infeasible { t, status, lp_path } => {
                assert_eq!(t, 7200);
                assert_eq!(status, MilpStatus::Infeasible);
                assert!(lp_path.exists());
                std::fs::remove_file(lp_path).ok();
            }
            other => panic!("expected Infeasible, got {other}"),
        }
    }

    #[test]
    fn module_runs_on_slow_sequence_and_records_diagnostics() {
        // base period 1 h; MPC control period 2 h, horizon 4 h
        let horizon = Horizon::new(2 * H, 4 * H, H).unwrap();
        let mut fc = ForecastSet::new();
        // enough samples for 3 iterations at t = 0, 2 h, 4 h (needs up to 7 h)
        let times: Vec<i64> = (0..8).map(|k| k * H).collect();
        let values: Vec<f64> = (0..8).map(|k| 1.0 + k as f64).collect();
        fc.insert("load", tv(&times, &values));

        let module = MpcModule::new("mpc", Box::new(SingleBoiler), horizon, fc, MilpOptions::default())
            .with_control_slots(vec!["P".into()]);
        let seqs = vec![Sequence::new("mpc", 2, vec!["mpc".into()])];
        let sim = Simulation::new(
            TimeGrid::new(0, H).unwrap(),
            seqs,
            vec![Box::new(module) as Box<dyn SimModule>],
        )
        .unwrap();
        let results = sim.run(6 * H).unwrap();
        let (t_obj, obj) = results.slot("mpc.objective").unwrap();
        assert_eq!(t_obj, &[0, 2 * H, 4 * H]);
        // window sums of the load: 1+2+3+4, 3+4+5+6, 5+6+7+8
        assert_eq!(obj, &[10.0, 18.0, 26.0]);
        let (_, status) = results.slot("mpc.status").unwrap();
        assert_eq!(status, &[0.0, 0.0, 0.0]);
    }
}

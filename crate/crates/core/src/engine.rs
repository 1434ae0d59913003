//! Explicit co-simulation master.
//!
//! Modules are grouped into sequences whose periods are integer multiples of
//! a unique base period. Within a tick, due sequences fire in declaration
//! order and modules within a sequence fire in declared order; a module sees
//! every value written earlier in the same tick (sequential explicit
//! coupling). The loop is sequential and deterministic: two runs of the same
//! scenario produce bit-identical results.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::time::{TimeGrid, TimeVector};
use crate::zone::{ExchangeZone, SlotKind, SlotValue, ZoneError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("module {module:?}: lifecycle violation, {call} called in state {state:?}")]
    LifecycleViolation { module: String, call: &'static str, state: Lifecycle },
    #[error("module {module:?} assigned to more than one sequence ({first:?} and {second:?})")]
    DuplicateModuleAssignment { module: String, first: String, second: String },
    #[error("sequence {0:?} has multiplier 0")]
    ZeroMultiplier(String),
    #[error("unknown module {0:?} referenced by a sequence")]
    UnknownModule(String),
    #[error("module {module:?} declares no slot {slot:?} for {access}")]
    UndeclaredSlot { module: String, slot: String, access: &'static str },
    #[error("t_end {t_end} is not origin + N x base period")]
    OffGridEnd { t_end: i64 },
    #[error("module {module:?} failed at tick {tick} (t = {t}): {source}")]
    ModuleStepFailure { module: String, tick: u64, t: i64, source: ModuleError },
    #[error("probe slot {0:?} was never written")]
    UnknownProbe(String),
    #[error(transparent)]
    Zone(#[from] ZoneError),
}

/// Error type modules raise from their lifecycle hooks.
#[derive(Debug, Error)]
pub enum ModuleError {
    #[error(transparent)]
    Zone(#[from] ZoneError),
    #[error(transparent)]
    Time(#[from] crate::time::TimeError),
    /// An optimizer inside the module ended without a feasible plan; kept
    /// distinct so front ends can report it separately from runtime faults.
    #[error("{0}")]
    SolverInfeasible(String),
    #[error("{0}")]
    Other(String),
}

impl ModuleError {
    pub fn other(msg: impl Into<String>) -> Self {
        ModuleError::Other(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotDecl {
    pub name: String,
    pub kind: SlotKind,
}

impl SlotDecl {
    pub fn scalar(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: SlotKind::Scalar }
    }

    pub fn time_vector(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: SlotKind::TimeVector }
    }
}

/// Restricted view of the simulation handed to a module during a lifecycle
/// call: the module may only read its declared inputs and write its declared
/// outputs.
pub struct StepContext<'a> {
    zone: &'a ExchangeZone,
    module_id: &'a str,
    inputs: &'a HashSet<String>,
    outputs: &'a HashSet<String>,
    recorder: &'a mut Recorder,
    pub t: i64,
    pub dt: i64,
    pub tick: u64,
}

impl StepContext<'_> {
    pub fn read(&self, slot: &str) -> Result<SlotValue, ModuleError> {
        if !self.inputs.contains(slot) {
            return Err(ModuleError::Other(format!(
                "module {:?} reads undeclared input slot {slot:?}",
                self.module_id
            )));
        }
        Ok(self.zone.read(slot)?.0)
    }

    pub fn read_scalar(&self, slot: &str) -> Result<f64, ModuleError> {
        self.read(slot)?.as_scalar().ok_or_else(|| {
            ModuleError::Other(format!("slot {slot:?} is not a scalar"))
        })
    }

    /// Reads a scalar input, falling back to `default` while the slot has no
    /// producer yet (e.g. the producer fires later in the first tick).
    pub fn read_scalar_or(&self, slot: &str, default: f64) -> Result<f64, ModuleError> {
        if self.zone.contains(slot) {
            self.read_scalar(slot)
        } else if self.inputs.contains(slot) {
            Ok(default)
        } else {
            Err(ModuleError::Other(format!(
                "module {:?} reads undeclared input slot {slot:?}",
                self.module_id
            )))
        }
    }

    pub fn read_time_vector(&self, slot: &str) -> Result<Arc<TimeVector>, ModuleError> {
        match self.read(slot)? {
            SlotValue::TimeVector(tv) => Ok(tv),
            _ => Err(ModuleError::Other(format!("slot {slot:?} is not a time-vector"))),
        }
    }

    pub fn write(&mut self, slot: &str, value: impl Into<SlotValue>) -> Result<(), ModuleError> {
        if !self.outputs.contains(slot) {
            return Err(ModuleError::Other(format!(
                "module {:?} writes undeclared output slot {slot:?}",
                self.module_id
            )));
        }
        let value = value.into();
        if let SlotValue::Scalar(v) = value {
            self.zone.write(slot, v, self.module_id, self.tick)?;
            self.recorder.record(slot, self.t, v);
        } else {
            self.zone.write(slot, value, self.module_id, self.tick)?;
        }
        Ok(())
    }
}

/// Contract every co-simulated sub-model implements.
///
/// The master drives the hooks in lifecycle order: `initialize` once, then
/// per firing `pre_step`, `do_step`, `post_step`, and finally `terminate`
/// once. `do_step` advances the internal state from `ctx.t` to `ctx.t +
/// ctx.dt` and refreshes the output slots.
pub trait SimModule: Send {
    fn id(&self) -> &str;
    fn inputs(&self) -> Vec<SlotDecl>;
    fn outputs(&self) -> Vec<SlotDecl>;

    fn initialize(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError>;

    fn pre_step(&mut self, _ctx: &mut StepContext) -> Result<(), ModuleError> {
        Ok(())
    }

    fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError>;

    fn post_step(&mut self, _ctx: &mut StepContext) -> Result<(), ModuleError> {
        Ok(())
    }

    fn terminate(&mut self) -> Result<(), ModuleError> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lifecycle {
    Created,
    Initialized,
    Running,
    Terminated,
}

/// Wraps a module and enforces the forward-only lifecycle.
pub struct ModuleHost {
    id: String,
    module: Box<dyn SimModule>,
    state: Lifecycle,
    inputs: HashSet<String>,
    outputs: HashSet<String>,
}

impl ModuleHost {
    pub fn new(module: Box<dyn SimModule>) -> Self {
        let id = module.id().to_string();
        let inputs = module.inputs().into_iter().map(|d| d.name).collect();
        let outputs = module.outputs().into_iter().map(|d| d.name).collect();
        Self { id, module, state: Lifecycle::Created, inputs, outputs }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn state(&self) -> Lifecycle {
        self.state
    }

    fn violation(&self, call: &'static str) -> EngineError {
        EngineError::LifecycleViolation { module: self.id.clone(), call, state: self.state }
    }

    pub fn initialize(
        &mut self,
        zone: &ExchangeZone,
        recorder: &mut Recorder,
        t0: i64,
        dt: i64,
    ) -> Result<(), EngineError> {
        if self.state != Lifecycle::Created {
            return Err(self.violation("initialize"));
        }
        let mut ctx = StepContext {
            zone,
            module_id: &self.id,
            inputs: &self.inputs,
            outputs: &self.outputs,
            recorder,
            t: t0,
            dt,
            tick: 0,
        };
        self.module
            .initialize(&mut ctx)
            .map_err(|e| EngineError::ModuleStepFailure { module: self.id.clone(), tick: 0, t: t0, source: e })?;
        self.state = Lifecycle::Initialized;
        Ok(())
    }

    pub fn fire(
        &mut self,
        zone: &ExchangeZone,
        recorder: &mut Recorder,
        t: i64,
        dt: i64,
        tick: u64,
    ) -> Result<(), EngineError> {
        match self.state {
            Lifecycle::Initialized => self.state = Lifecycle::Running,
            Lifecycle::Running => {}
            _ => return Err(self.violation("do_step")),
        }
        let module = &mut self.module;
        let mut ctx = StepContext {
            zone,
            module_id: &self.id,
            inputs: &self.inputs,
            outputs: &self.outputs,
            recorder,
            t,
            dt,
            tick,
        };
        let result = (|| {
            module.pre_step(&mut ctx)?;
            module.do_step(&mut ctx)?;
            module.post_step(&mut ctx)
        })();
        result.map_err(|e| EngineError::ModuleStepFailure {
            module: self.id.clone(),
            tick,
            t,
            source: e,
        })
    }

    pub fn terminate(&mut self) -> Result<(), EngineError> {
        match self.state {
            Lifecycle::Initialized | Lifecycle::Running => {
                self.module.terminate().map_err(|e| EngineError::ModuleStepFailure {
                    module: self.id.clone(),
                    tick: 0,
                    t: 0,
                    source: e,
                })?;
                self.state = Lifecycle::Terminated;
                Ok(())
            }
            _ => Err(self.violation("terminate")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub name: String,
    pub multiplier: u64,
    pub modules: Vec<String>,
}

impl Sequence {
    pub fn new(name: impl Into<String>, multiplier: u64, modules: Vec<String>) -> Self {
        Self { name: name.into(), multiplier, modules }
    }
}

/// Deterministic firing plan: which sequences are due at which tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub entries: Vec<(u64, Vec<String>)>,
}

/// Builds the firing plan, checking that multipliers are positive and that
/// the module-to-sequence assignment is a partition.
pub fn build_schedule(sequences: &[Sequence], n_ticks: u64) -> Result<Schedule, EngineError> {
    validate_sequences(sequences)?;
    let mut entries = Vec::with_capacity(n_ticks as usize);
    for tick in 0..n_ticks {
        let due: Vec<String> = sequences
            .iter()
            .filter(|s| tick % s.multiplier == 0)
            .map(|s| s.name.clone())
            .collect();
        entries.push((tick, due));
    }
    Ok(Schedule { entries })
}

fn validate_sequences(sequences: &[Sequence]) -> Result<(), EngineError> {
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for seq in sequences {
        if seq.multiplier == 0 {
            return Err(EngineError::ZeroMultiplier(seq.name.clone()));
        }
        for m in &seq.modules {
            if let Some(first) = owner.insert(m, &seq.name) {
                return Err(EngineError::DuplicateModuleAssignment {
                    module: m.clone(),
                    first: first.to_string(),
                    second: seq.name.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Per-slot scalar time series collected during a run.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Recorder {
    series: BTreeMap<String, (Vec<i64>, Vec<f64>)>,
}

impl Recorder {
    fn record(&mut self, slot: &str, t: i64, v: f64) {
        let (times, values) = self.series.entry(slot.to_string()).or_default();
        // a rewrite within the same tick replaces the previous sample
        if times.last() == Some(&t) {
            *values.last_mut().unwrap() = v;
        } else {
            times.push(t);
            values.push(v);
        }
    }
}

/// Results of one run: scalar series per slot, at every tick the slot was
/// written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunResults {
    pub series: BTreeMap<String, (Vec<i64>, Vec<f64>)>,
    pub n_ticks: u64,
}

impl RunResults {
    pub fn slot(&self, name: &str) -> Option<(&[i64], &[f64])> {
        self.series.get(name).map(|(t, v)| (t.as_slice(), v.as_slice()))
    }

    pub fn final_value(&self, name: &str) -> Option<f64> {
        self.series.get(name).and_then(|(_, v)| v.last().copied())
    }

    pub fn to_time_vector(&self, name: &str) -> Option<TimeVector> {
        let (t, v) = self.series.get(name)?;
        TimeVector::new(t.clone(), v.clone(), "").ok()
    }
}

/// A fully assembled co-simulation: grid, zone, ordered modules, sequences.
pub struct Simulation {
    grid: TimeGrid,
    zone: ExchangeZone,
    sequences: Vec<Sequence>,
    hosts: Vec<ModuleHost>,
}

impl Simulation {
    pub fn new(grid: TimeGrid, sequences: Vec<Sequence>, modules: Vec<Box<dyn SimModule>>) -> Result<Self, EngineError> {
        validate_sequences(&sequences)?;
        let hosts: Vec<ModuleHost> = modules.into_iter().map(ModuleHost::new).collect();
        for seq in &sequences {
            for m in &seq.modules {
                if !hosts.iter().any(|h| h.id() == m) {
                    return Err(EngineError::UnknownModule(m.clone()));
                }
            }
        }
        Ok(Self { grid, zone: ExchangeZone::new(), sequences, hosts })
    }

    pub fn zone(&self) -> &ExchangeZone {
        &self.zone
    }

    pub fn base_period(&self) -> i64 {
        self.grid.base_period()
    }

    fn host_index(&self, id: &str) -> usize {
        self.hosts.iter().position(|h| h.id() == id).expect("validated module id")
    }

    /// Runs the schedule up to `t_end` (exclusive of a firing at `t_end`).
    pub fn run(mut self, t_end: i64) -> Result<RunResults, EngineError> {
        let n_ticks = self
            .grid
            .ticks_to(t_end)
            .ok_or(EngineError::OffGridEnd { t_end })?;
        let mut recorder = Recorder::default();
        let base = self.grid.base_period();
        let t0 = self.grid.origin();

        // one initialize per module, in declaration order
        for i in 0..self.hosts.len() {
            let host = &mut self.hosts[i];
            // dt hint for initialize is the module's own sequence period
            host.initialize(&self.zone, &mut recorder, t0, base)?;
        }

        let firing_order: Vec<(usize, Vec<usize>, u64, i64)> = self
            .sequences
            .iter()
            .enumerate()
            .map(|(si, s)| {
                let idx = s.modules.iter().map(|m| self.host_index(m)).collect();
                (si, idx, s.multiplier, base * s.multiplier as i64)
            })
            .collect();

        for tick in 0..n_ticks {
            let t = self.grid.current_time();
            for (_, module_idx, multiplier, dt) in &firing_order {
                if tick % multiplier != 0 {
                    continue;
                }
                for &mi in module_idx {
                    self.hosts[mi].fire(&self.zone, &mut recorder, t, *dt, tick)?;
                }
            }
            self.grid.advance();
        }

        // one terminate per module
        for host in &mut self.hosts {
            host.terminate()?;
        }

        Ok(RunResults { series: recorder.series, n_ticks })
    }
}

/// Result of a coupling time-step convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub multipliers: Vec<u64>,
    /// slot -> final value per multiplier, in the order given.
    pub final_values: BTreeMap<String, Vec<f64>>,
    /// slot -> |final(i+1) - final(i)| between successive refinements.
    pub diffs: BTreeMap<String, Vec<f64>>,
}

/// Runs the same scenario once per coupling-period multiplier and reports,
/// per probe slot, the final values and their differences between successive
/// refinements.
pub fn convergence_study<F>(
    build: F,
    multipliers: &[u64],
    probe_slots: &[String],
    t_end: i64,
) -> Result<ConvergenceReport, EngineError>
where
    F: Fn(u64) -> Result<Simulation, EngineError>,
{
    let mut final_values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for &m in multipliers {
        let sim = build(m)?;
        let results = sim.run(t_end)?;
        for slot in probe_slots {
            let v = results
                .final_value(slot)
                .ok_or_else(|| EngineError::UnknownProbe(slot.clone()))?;
            final_values.entry(slot.clone()).or_default().push(v);
        }
    }
    let diffs = final_values
        .iter()
        .map(|(slot, vals)| {
            let d = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            (slot.clone(), d)
        })
        .collect();
    Ok(ConvergenceReport { multipliers: multipliers.to_vec(), final_values, diffs })
}

#[cfg(test)]
pub(crate) mod test_modules {
    use super::*;

    /// Outputs a constant value every step.
    pub struct ConstantModule {
        pub id: String,
        pub slot: String,
        pub value: f64,
    }

    impl SimModule for ConstantModule {
        fn id(&self) -> &str {
            &self.id
        }
        fn inputs(&self) -> Vec<SlotDecl> {
            vec![]
        }
        fn outputs(&self) -> Vec<SlotDecl> {
            vec![SlotDecl::scalar(&self.slot)]
        }
        fn initialize(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
            ctx.write(&self.slot.clone(), self.value)
        }
        fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
            ctx.write(&self.slot.clone(), self.value)
        }
    }

    /// Outputs `gain * input`, reading 0 until the input slot exists.
    pub struct GainModule {
        pub id: String,
        pub input: String,
        pub output: String,
        pub gain: f64,
    }

    impl SimModule for GainModule {
        fn id(&self) -> &str {
            &self.id
        }
        fn inputs(&self) -> Vec<SlotDecl> {
            vec![SlotDecl::scalar(&self.input)]
        }
        fn outputs(&self) -> Vec<SlotDecl> {
            vec![SlotDecl::scalar(&self.output)]
        }
        fn initialize(&mut self, _ctx: &mut StepContext) -> Result<(), ModuleError> {
            Ok(())
        }
        fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
            let v = ctx.read_scalar_or(&self.input, 0.0)?;
            ctx.write(&self.output.clone(), self.gain * v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_modules::*;
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::new(0, 1).unwrap()
    }

    #[test]
    fn schedule_modular_arithmetic() {
        let seqs = vec![
            Sequence::new("a", 1, vec!["A".into()]),
            Sequence::new("b", 5, vec!["B".into()]),
        ];
        let sched = build_schedule(&seqs, 10).unwrap();
        for (tick, due) in &sched.entries {
            assert!(due.contains(&"a".to_string()));
            assert_eq!(due.contains(&"b".to_string()), tick % 5 == 0);
        }
    }

    #[test]
    fn duplicate_module_assignment_rejected() {
        let seqs = vec![
            Sequence::new("a", 1, vec!["A".into()]),
            Sequence::new("b", 2, vec!["A".into()]),
        ];
        assert!(matches!(
            build_schedule(&seqs, 5),
            Err(EngineError::DuplicateModuleAssignment { .. })
        ));
    }

    fn two_module_sim(order: [&str; 2]) -> Simulation {
        let seqs = vec![Sequence::new("main", 1, order.iter().map(|s| s.to_string()).collect())];
        let modules: Vec<Box<dyn SimModule>> = vec![
            Box::new(ConstantModule { id: "A".into(), slot: "a".into(), value: 1.0 }),
            Box::new(GainModule { id: "B".into(), input: "a".into(), output: "b".into(), gain: 2.0 }),
        ];
        Simulation::new(grid(), seqs, modules).unwrap()
    }

    #[test]
    fn same_tick_visibility_in_declared_order() {
        let results = two_module_sim(["A", "B"]).run(5).unwrap();
        let (_, b) = results.slot("b").unwrap();
        assert_eq!(b, &[2.0; 5]);
    }

    #[test]
    fn reversed_order_sees_previous_tick_value() {
        // B fires before A: at tick 0, A initialized the slot, so B already
        // sees the init value; the delay shows when A's value changes.
        let seqs = vec![Sequence::new("main", 1, vec!["B".into(), "A".into()])];
        struct Ramp;
        impl SimModule for Ramp {
            fn id(&self) -> &str {
                "A"
            }
            fn inputs(&self) -> Vec<SlotDecl> {
                vec![]
            }
            fn outputs(&self) -> Vec<SlotDecl> {
                vec![SlotDecl::scalar("a")]
            }
            fn initialize(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
                ctx.write("a", 0.0)
            }
            fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
                let t = ctx.t;
                ctx.write("a", t as f64)
            }
        }
        let modules: Vec<Box<dyn SimModule>> = vec![
            Box::new(Ramp),
            Box::new(GainModule { id: "B".into(), input: "a".into(), output: "b".into(), gain: 2.0 }),
        ];
        let results = Simulation::new(grid(), seqs, modules).unwrap().run(4).unwrap();
        let (_, b) = results.slot("b").unwrap();
        // B at tick k sees a(k-1): 0 (init), 0, 1, 2
        assert_eq!(b, &[0.0, 0.0, 2.0, 4.0]);
    }

    #[test]
    fn lifecycle_violations() {
        let m = ConstantModule { id: "A".into(), slot: "a".into(), value: 1.0 };
        let mut host = ModuleHost::new(Box::new(m));
        let zone = ExchangeZone::new();
        let mut rec = Recorder::default();
        assert!(matches!(
            host.fire(&zone, &mut rec, 0, 1, 0),
            Err(EngineError::LifecycleViolation { call: "do_step", .. })
        ));
        host.initialize(&zone, &mut rec, 0, 1).unwrap();
        host.fire(&zone, &mut rec, 0, 1, 0).unwrap();
        host.terminate().unwrap();
        assert!(matches!(
            host.terminate(),
            Err(EngineError::LifecycleViolation { call: "terminate", .. })
        ));
    }

    #[test]
    fn slow_sequence_fires_on_multiples() {
        struct Counter {
            fired_at: Vec<u64>,
        }
        impl SimModule for Counter {
            fn id(&self) -> &str {
                "C"
            }
            fn inputs(&self) -> Vec<SlotDecl> {
                vec![]
            }
            fn outputs(&self) -> Vec<SlotDecl> {
                vec![SlotDecl::scalar("count")]
            }
            fn initialize(&mut self, _: &mut StepContext) -> Result<(), ModuleError> {
                Ok(())
            }
            fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
                self.fired_at.push(ctx.tick);
                ctx.write("count", self.fired_at.len() as f64)
            }
        }
        let seqs = vec![Sequence::new("slow", 3, vec!["C".into()])];
        let modules: Vec<Box<dyn SimModule>> = vec![Box::new(Counter { fired_at: vec![] })];
        let results = Simulation::new(grid(), seqs, modules).unwrap().run(10).unwrap();
        let (times, values) = results.slot("count").unwrap();
        assert_eq!(times, &[0, 3, 6, 9]);
        assert_eq!(values, &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn nan_write_aborts_with_context() {
        struct Bad;
        impl SimModule for Bad {
            fn id(&self) -> &str {
                "bad"
            }
            fn inputs(&self) -> Vec<SlotDecl> {
                vec![]
            }
            fn outputs(&self) -> Vec<SlotDecl> {
                vec![SlotDecl::scalar("x")]
            }
            fn initialize(&mut self, _: &mut StepContext) -> Result<(), ModuleError> {
                Ok(())
            }
            fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
                ctx.write("x", f64::NAN)
            }
        }
        let seqs = vec![Sequence::new("main", 1, vec!["bad".into()])];
        let err = Simulation::new(grid(), seqs, vec![Box::new(Bad) as Box<dyn SimModule>])
            .unwrap()
            .run(3)
            .unwrap_err();
        match err {
            EngineError::ModuleStepFailure { module, tick, .. } => {
                assert_eq!(module, "bad");
                assert_eq!(tick, 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn reruns_are_bit_identical() {
        let r1 = two_module_sim(["A", "B"]).run(20).unwrap();
        let r2 = two_module_sim(["A", "B"]).run(20).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn convergence_identical_multipliers_give_zero_diff() {
        let build = |_m: u64| Ok(two_module_sim(["A", "B"]));
        let report =
            convergence_study(build, &[2, 2], &["b".to_string()], 10).unwrap();
        assert_eq!(report.diffs["b"], vec![0.0]);
    }

    #[test]
    fn convergence_unknown_probe() {
        let build = |_m: u64| Ok(two_module_sim(["A", "B"]));
        let err = convergence_study(build, &[1], &["nope".to_string()], 10).unwrap_err();
        assert!(matches!(err, EngineError::UnknownProbe(_)));
    }
}

//! Runs a compiled controller as a co-simulation module.

use std::collections::BTreeMap;

use crate::engine::{ModuleError, SimModule, SlotDecl, StepContext};
use crate::time::SampleMode;
use crate::zone::{SlotValue, ZoneError};

use super::blocks::BlockState;
use super::graph::{compile, step, ExecutionPlan, LogicError, LogicGraph};

/// A block-diagram controller exposed as a `SimModule`.
///
/// Each external input with a `slot` binding is read from the exchange zone
/// at every firing: scalar slots are used directly, time-vector slots are
/// sampled hold-last at the current time, and a slot that does not exist yet
/// falls back to the input's declared default. Each external output with a
/// `slot` binding is written as a scalar.
pub struct LogicModule {
    id: String,
    graph: LogicGraph,
    plan: ExecutionPlan,
    states: Vec<BlockState>,
}

impl LogicModule {
    pub fn new(id: impl Into<String>, graph: LogicGraph) -> Result<Self, LogicError> {
        let plan = compile(&graph)?;
        let states = plan.initial_states(&graph);
        Ok(Self { id: id.into(), graph, plan, states })
    }

    /// Output value of any block after the last step (for probing in tests).
    pub fn graph(&self) -> &LogicGraph {
        &self.graph
    }

    fn read_input(&self, ctx: &StepContext, slot: &str, default: f64) -> Result<f64, ModuleError> {
        match ctx.read(slot) {
            Ok(SlotValue::Scalar(v)) => Ok(v),
            Ok(SlotValue::TimeVector(tv)) => {
                tv.sample(ctx.t, SampleMode::HoldLast).map_err(ModuleError::Time)
            }
            Err(ModuleError::Zone(ZoneError::UnknownSlot(_))) => Ok(default),
            Err(e) => Err(e),
        }
    }
}

impl SimModule for LogicModule {
    fn id(&self) -> &str {
        &self.id
    }

    fn inputs(&self) -> Vec<SlotDecl> {
        self.graph
            .inputs
            .iter()
            .filter_map(|i| i.slot.as_deref().map(SlotDecl::scalar))
            .collect()
    }

    fn outputs(&self) -> Vec<SlotDecl> {
        self.graph
            .outputs
            .iter()
            .filter_map(|o| o.slot.as_deref().map(SlotDecl::scalar))
            .collect()
    }

    fn initialize(&mut self, _ctx: &mut StepContext) -> Result<(), ModuleError> {
        self.states = self.plan.initial_states(&self.graph);
        Ok(())
    }

    fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
        let mut ext: BTreeMap<String, f64> = BTreeMap::new();
        for input in &self.graph.inputs {
            if let Some(slot) = &input.slot {
                let v = self.read_input(ctx, slot, input.default)?;
                ext.insert(input.name.clone(), v);
            }
        }
        let out = step(&self.graph, &self.plan, &mut self.states, &ext, ctx.dt as f64)
            .map_err(|e| ModuleError::Other(e.to_string()))?;
        for output in &self.graph.outputs {
            if let Some(slot) = &output.slot {
                ctx.write(slot, out.outputs[&output.name])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Sequence, Simulation};
    use crate::logic::parse_logic_model;
    use crate::time::TimeGrid;

    /// Feeds a zigzag temperature into a thermostat controller and checks
    /// the relay output seen through the exchange zone.
    #[test]
    fn controller_runs_inside_a_simulation() {
        let model = "\
block relay hysteresis on=21 off=19
block power gain k=10
connect relay -> power.in
input temperature -> relay.in slot=temp default=25
output heat = power slot=heat
";
        struct TempSource {
            values: Vec<f64>,
        }
        impl SimModule for TempSource {
            fn id(&self) -> &str {
                "temp-source"
            }
            fn inputs(&self) -> Vec<SlotDecl> {
                vec![]
            }
            fn outputs(&self) -> Vec<SlotDecl> {
                vec![SlotDecl::scalar("temp")]
            }
            fn initialize(&mut self, _: &mut StepContext) -> Result<(), ModuleError> {
                Ok(())
            }
            fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
                let v = self.values[ctx.tick as usize % self.values.len()];
                ctx.write("temp", v)
            }
        }

        let graph = parse_logic_model(model).unwrap();
        let ctrl = LogicModule::new("thermostat", graph).unwrap();
        let modules: Vec<Box<dyn SimModule>> = vec![
            Box::new(TempSource { values: vec![22.0, 20.0, 18.0, 20.0, 22.0] }),
            Box::new(ctrl),
        ];
        let seqs = vec![Sequence::new("main", 1, vec!["temp-source".into(), "thermostat".into()])];
        let sim = Simulation::new(TimeGrid::new(0, 1).unwrap(), seqs, modules).unwrap();
        let results = sim.run(5).unwrap();
        let (_, heat) = results.slot("heat").unwrap();
        // relay engages at >= 21 and releases at <= 19:
        // 22 -> on, 20 -> still on, 18 -> off, 20 -> still off, 22 -> on
        assert_eq!(heat, &[10.0, 10.0, 0.0, 0.0, 10.0]);
    }

    #[test]
    fn missing_slot_uses_declared_default() {
        let model = "\
block g gain k=2
input u -> g.in slot=u default=4
output y = g slot=y
";
        let graph = parse_logic_model(model).unwrap();
        let ctrl = LogicModule::new("c", graph).unwrap();
        let seqs = vec![Sequence::new("main", 1, vec!["c".into()])];
        let sim = Simulation::new(
            TimeGrid::new(0, 1).unwrap(),
            seqs,
            vec![Box::new(ctrl) as Box<dyn SimModule>],
        )
        .unwrap();
        let results = sim.run(2).unwrap();
        assert_eq!(results.final_value("y"), Some(8.0));
    }
}

//! Logic graph representation, compilation to an execution plan and stepping.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::blocks::{eval, BlockState, BlockType};

#[derive(Debug, Error, PartialEq)]
pub enum LogicError {
    #[error("duplicate block id {0:?}")]
    DuplicateBlockId(String),
    #[error("unknown block {0:?}")]
    UnknownBlock(String),
    #[error("block {block:?} ({block_type}) has no input port {port:?}")]
    UnknownPort { block: String, block_type: String, port: String },
    #[error("input port {block:?}.{port:?} is driven more than once")]
    MultipleDrivers { block: String, port: String },
    #[error("algebraic loop with no delay block through: {}", blocks.join(" -> "))]
    AlgebraicLoop { blocks: Vec<String> },
    #[error("invalid parameters for block {block:?}: {message}")]
    InvalidParams { block: String, message: String },
    #[error("block {block:?} produced a non-finite value {value}")]
    NonFiniteSignal { block: String, value: f64 },
    #[error("duplicate external name {0:?}")]
    DuplicateExternalName(String),
    #[error("logic model parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortRef {
    pub block: String,
    pub port: String,
}

/// Connection from a block's output to another block's input port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub from: String,
    pub to: PortRef,
}

/// Named external signal fed into one or more block input ports.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalInput {
    pub name: String,
    pub default: f64,
    pub dests: Vec<PortRef>,
    /// Exchange-zone slot backing this input when run as a co-sim module.
    pub slot: Option<String>,
}

/// Named external signal exposing one block's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalOutput {
    pub name: String,
    pub source: String,
    pub slot: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecl {
    pub id: String,
    pub block: BlockType,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogicGraph {
    pub blocks: Vec<BlockDecl>,
    pub connections: Vec<Connection>,
    pub inputs: Vec<ExternalInput>,
    pub outputs: Vec<ExternalOutput>,
}

impl LogicGraph {
    pub fn block_index(&self, id: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.id == id)
    }
}

/// Where a block input port takes its value from.
#[derive(Debug, Clone, Copy, PartialEq)]
enum InputSource {
    Block(usize),
    External(usize),
    Default(f64),
}

/// Compiled task order plus the resolved wiring needed to execute it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionPlan {
    /// Block indices in execution order.
    pub order: Vec<usize>,
    /// Indices of delay blocks (their outputs break the feedback arcs).
    pub delay_blocks: Vec<usize>,
    inputs: Vec<Vec<InputSource>>,
}

impl ExecutionPlan {
    pub fn initial_states(&self, graph: &LogicGraph) -> Vec<BlockState> {
        graph.blocks.iter().map(|b| b.block.initial_state()).collect()
    }
}

/// Validates the graph, removes the arcs leaving delay blocks and
/// topologically sorts the remainder; ties are broken by ascending block id,
/// so identical graphs always yield identical plans.
pub fn compile(graph: &LogicGraph) -> Result<ExecutionPlan, LogicError> {
    let n = graph.blocks.len();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, b) in graph.blocks.iter().enumerate() {
        if index.insert(&b.id, i).is_some() {
            return Err(LogicError::DuplicateBlockId(b.id.clone()));
        }
        b.block.validate(&b.id)?;
    }

    let port_slot = |pr: &PortRef| -> Result<(usize, usize), LogicError> {
        let &bi = index
            .get(pr.block.as_str())
            .ok_or_else(|| LogicError::UnknownBlock(pr.block.clone()))?;
        let ports = graph.blocks[bi].block.input_ports();
        let pi = ports.iter().position(|(p, _)| *p == pr.port).ok_or_else(|| {
            LogicError::UnknownPort {
                block: pr.block.clone(),
                block_type: graph.blocks[bi].block.type_name().to_string(),
                port: pr.port.clone(),
            }
        })?;
        Ok((bi, pi))
    };

    // resolve every input port: defaults first, then external inputs, then
    // connections; at most one driver per port
    let mut inputs: Vec<Vec<InputSource>> = graph
        .blocks
        .iter()
        .map(|b| b.block.input_ports().iter().map(|&(_, d)| InputSource::Default(d)).collect())
        .collect();
    let mut driven: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut claim = |bi: usize, pi: usize, pr: &PortRef| -> Result<(), LogicError> {
        if !driven.insert((bi, pi)) {
            return Err(LogicError::MultipleDrivers { block: pr.block.clone(), port: pr.port.clone() });
        }
        Ok(())
    };

    let mut ext_names = BTreeSet::new();
    for (k, ext) in graph.inputs.iter().enumerate() {
        if !ext_names.insert(&ext.name) {
            return Err(LogicError::DuplicateExternalName(ext.name.clone()));
        }
        for pr in &ext.dests {
            let (bi, pi) = port_slot(pr)?;
            claim(bi, pi, pr)?;
            inputs[bi][pi] = InputSource::External(k);
        }
    }
    for conn in &graph.connections {
        let &src = index
            .get(conn.from.as_str())
            .ok_or_else(|| LogicError::UnknownBlock(conn.from.clone()))?;
        let (bi, pi) = port_slot(&conn.to)?;
        claim(bi, pi, &conn.to)?;
        inputs[bi][pi] = InputSource::Block(src);
    }
    for out in &graph.outputs {
        if !index.contains_key(out.source.as_str()) {
            return Err(LogicError::UnknownBlock(out.source.clone()));
        }
        if !ext_names.insert(&out.name) {
            return Err(LogicError::DuplicateExternalName(out.name.clone()));
        }
    }

    // dependency graph restricted to non-delay arcs
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for conn in &graph.connections {
        let src = index[conn.from.as_str()];
        if graph.blocks[src].block.is_delay() {
            continue;
        }
        let dst = index[conn.to.block.as_str()];
        successors[src].push(dst);
        indegree[dst] += 1;
    }

    // Kahn's algorithm; the ready set is ordered by block id
    let mut ready: BTreeSet<(&str, usize)> = graph
        .blocks
        .iter()
        .enumerate()
        .filter(|(i, _)| indegree[*i] == 0)
        .map(|(i, b)| (b.id.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&(id, i)) = ready.iter().next() {
        ready.remove(&(id, i));
        order.push(i);
        for &s in &successors[i] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.insert((graph.blocks[s].id.as_str(), s));
            }
        }
    }

    if order.len() < n {
        return Err(LogicError::AlgebraicLoop { blocks: find_cycle(graph, &successors, &indegree) });
    }

    let delay_blocks = (0..n).filter(|&i| graph.blocks[i].block.is_delay()).collect();
    Ok(ExecutionPlan { order, delay_blocks, inputs })
}

/// Extracts one delay-free cycle from the unsorted remainder, for the error
/// message.
fn find_cycle(graph: &LogicGraph, successors: &[Vec<usize>], indegree: &[usize]) -> Vec<String> {
    let remaining: BTreeSet<usize> =
        (0..graph.blocks.len()).filter(|&i| indegree[i] > 0).collect();
    let start = *remaining.iter().next().expect("cycle exists");
    let mut path = vec![start];
    let mut seen: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let next = successors[cur]
            .iter()
            .copied()
            .find(|s| remaining.contains(s))
            .expect("remaining nodes all have a remaining successor");
        if let Some(&at) = seen.get(&next) {
            let mut cycle: Vec<String> =
                path[at..].iter().map(|&i| graph.blocks[i].id.clone()).collect();
            cycle.sort();
            return cycle;
        }
        seen.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

/// Outputs of one logic step: every block's output plus the declared
/// external outputs (mirrors the run-time visibility of all model variables).
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub block_outputs: BTreeMap<String, f64>,
    pub outputs: BTreeMap<String, f64>,
}

/// Executes one step of the compiled plan. Delay blocks publish their stored
/// value before anything runs, so downstream consumers scheduled earlier in
/// the plan see the previous step's input.
pub fn step(
    graph: &LogicGraph,
    plan: &ExecutionPlan,
    states: &mut [BlockState],
    external_inputs: &BTreeMap<String, f64>,
    dt: f64,
) -> Result<StepOutput, LogicError> {
    let n = graph.blocks.len();
    let mut values: Vec<f64> = vec![0.0; n];

    for &i in &plan.delay_blocks {
        if let BlockState::Delay { stored } = states[i] {
            values[i] = stored;
        }
    }

    let mut input_buf: Vec<f64> = Vec::with_capacity(4);
    for &i in &plan.order {
        input_buf.clear();
        for src in &plan.inputs[i] {
            input_buf.push(match *src {
                InputSource::Block(s) => values[s],
                InputSource::External(k) => {
                    let ext = &graph.inputs[k];
                    external_inputs.get(&ext.name).copied().unwrap_or(ext.default)
                }
                InputSource::Default(v) => v,
            });
        }
        let out = eval(&graph.blocks[i].block, &mut states[i], &input_buf, dt);
        if !out.is_finite() {
            return Err(LogicError::NonFiniteSignal { block: graph.blocks[i].id.clone(), value: out });
        }
        values[i] = out;
    }

    let block_outputs: BTreeMap<String, f64> =
        graph.blocks.iter().enumerate().map(|(i, b)| (b.id.clone(), values[i])).collect();
    let outputs = graph
        .outputs
        .iter()
        .map(|o| {
            let i = graph.block_index(&o.source).expect("validated at compile");
            (o.name.clone(), values[i])
        })
        .collect();
    Ok(StepOutput { block_outputs, outputs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::blocks::PidParams;

    fn decl(id: &str, block: BlockType) -> BlockDecl {
        BlockDecl { id: id.into(), block }
    }

    fn conn(from: &str, to: &str, port: &str) -> Connection {
        Connection { from: from.into(), to: PortRef { block: to.into(), port: port.into() } }
    }

    #[test]
    fn chain_topological_order() {
        let g = LogicGraph {
            blocks: vec![
                decl("c", BlockType::Gain { k: 1.0 }),
                decl("a", BlockType::Constant { value: 1.0 }),
                decl("b", BlockType::Gain { k: 2.0 }),
            ],
            connections: vec![conn("a", "b", "in"), conn("b", "c", "in")],
            ..Default::default()
        };
        let plan = compile(&g).unwrap();
        let ids: Vec<&str> = plan.order.iter().map(|&i| g.blocks[i].id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
    }

    #[test]
    fn delay_breaks_cycle() {
        // a -> b -> a with b a unit delay
        let g = LogicGraph {
            blocks: vec![
                decl("a", BlockType::Sum { wa: 1.0, wb: 1.0 }),
                decl("b", BlockType::UnitDelay { init: 0.0 }),
            ],
            connections: vec![conn("a", "b", "in"), conn("b", "a", "a")],
            inputs: vec![ExternalInput {
                name: "u".into(),
                default: 0.0,
                dests: vec![PortRef { block: "a".into(), port: "b".into() }],
                slot: None,
            }],
            ..Default::default()
        };
        let plan = compile(&g).unwrap();
        let ids: Vec<&str> = plan.order.iter().map(|&i| g.blocks[i].id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b"]);

        // accumulator: a_k = u + b_k where b_k = a_{k-1}
        let mut states = plan.initial_states(&g);
        let mut ext = BTreeMap::new();
        ext.insert("u".to_string(), 1.0);
        let mut accum = Vec::new();
        for _ in 0..4 {
            let out = step(&g, &plan, &mut states, &ext, 1.0).unwrap();
            accum.push(out.block_outputs["a"]);
        }
        assert_eq!(accum, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn algebraic_loop_detected() {
        let g = LogicGraph {
            blocks: vec![
                decl("a", BlockType::Gain { k: 1.0 }),
                decl("b", BlockType::Gain { k: 1.0 }),
            ],
            connections: vec![conn("a", "b", "in"), conn("b", "a", "in")],
            ..Default::default()
        };
        match compile(&g) {
            Err(LogicError::AlgebraicLoop { blocks }) => {
                assert_eq!(blocks, vec!["a".to_string(), "b".to_string()]);
            }
            other => panic!("expected AlgebraicLoop, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_tie_break_by_id() {
        // three independent constants in scrambled declaration order
        let g = LogicGraph {
            blocks: vec![
                decl("z", BlockType::Constant { value: 1.0 }),
                decl("a", BlockType::Constant { value: 2.0 }),
                decl("m", BlockType::Constant { value: 3.0 }),
            ],
            ..Default::default()
        };
        let plan = compile(&g).unwrap();
        let ids: Vec<&str> = plan.order.iter().map(|&i| g.blocks[i].id.as_str()).collect();
        assert_eq!(ids, vec!["a", "m", "z"]);
        assert_eq!(compile(&g).unwrap(), plan);
    }

    #[test]
    fn producers_precede_consumers_in_plan() {
        let g = LogicGraph {
            blocks: vec![
                decl("pid", BlockType::Pid(PidParams::default())),
                decl("ref", BlockType::Constant { value: 1.0 }),
                decl("err", BlockType::Sum { wa: 1.0, wb: -1.0 }),
            ],
            connections: vec![conn("ref", "err", "a"), conn("err", "pid", "e")],
            ..Default::default()
        };
        let plan = compile(&g).unwrap();
        let pos = |id: &str| plan.order.iter().position(|&i| g.blocks[i].id == id).unwrap();
        assert!(pos("ref") < pos("err"));
        assert!(pos("err") < pos("pid"));
    }

    #[test]
    fn multiple_drivers_rejected() {
        let g = LogicGraph {
            blocks: vec![
                decl("a", BlockType::Constant { value: 1.0 }),
                decl("b", BlockType::Constant { value: 2.0 }),
                decl("g", BlockType::Gain { k: 1.0 }),
            ],
            connections: vec![conn("a", "g", "in"), conn("b", "g", "in")],
            ..Default::default()
        };
        assert!(matches!(compile(&g), Err(LogicError::MultipleDrivers { .. })));
    }

    #[test]
    fn unknown_port_rejected() {
        let g = LogicGraph {
            blocks: vec![
                decl("a", BlockType::Constant { value: 1.0 }),
                decl("g", BlockType::Gain { k: 1.0 }),
            ],
            connections: vec![conn("a", "g", "nope")],
            ..Default::default()
        };
        assert!(matches!(compile(&g), Err(LogicError::UnknownPort { .. })));
    }
}

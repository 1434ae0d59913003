//! Plain-text controller description format.
//!
//! ```text
//! # comments start with '#'
//! block  <id> <type> [key=value ...]
//! connect <src> -> <dst>.<port>
//! input  <name> -> <dst>.<port> [slot=<slot>] [default=<value>]
//! output <name> = <src> [slot=<slot>]
//! ```
//!
//! Block types and their parameters:
//!
//! | type         | parameters (defaults)                                   |
//! |--------------|---------------------------------------------------------|
//! | `constant`   | `value`                                                 |
//! | `gain`       | `k`                                                     |
//! | `sum`        | `wa` (1), `wb` (1)                                      |
//! | `min`, `max` | none                                                    |
//! | `comparator` | `op` = `lt` `le` `gt` `ge`                              |
//! | `switch`     | none                                                    |
//! | `hysteresis` | `on`, `off`, `init` (0)                                 |
//! | `saturation` | `lo` (-inf), `hi` (+inf)                                |
//! | `delay`      | `init` (0)                                              |
//! | `filter`     | `tau`, `init` (0)                                       |
//! | `pid`        | `kp` (1), `ki` (0), `kd` (0), `umin` (-inf), `umax` (+inf) |
//!
//! Repeated `input` lines with the same name fan the signal out to several
//! ports; `slot` and `default` may only appear on the first line.

use std::collections::HashMap;

use super::blocks::{BlockType, CompareOp, PidParams};
use super::graph::{
    BlockDecl, Connection, ExternalInput, ExternalOutput, LogicError, LogicGraph, PortRef,
};

fn err(line: usize, message: impl Into<String>) -> LogicError {
    LogicError::Parse { line, message: message.into() }
}

/// Parses the text form of a controller into a (not yet compiled) graph.
pub fn parse_logic_model(src: &str) -> Result<LogicGraph, LogicError> {
    let mut graph = LogicGraph::default();
    for (i, raw) in src.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match keyword {
            "block" => parse_block(ln, rest, &mut graph)?,
            "connect" => parse_connect(ln, rest, &mut graph)?,
            "input" => parse_input(ln, rest, &mut graph)?,
            "output" => parse_output(ln, rest, &mut graph)?,
            other => return Err(err(ln, format!("unknown directive {other:?}"))),
        }
    }
    Ok(graph)
}

/// `key=value` pairs; every key must be consumed by the block constructor.
struct Params<'a> {
    line: usize,
    map: HashMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn parse(line: usize, tokens: &[&'a str]) -> Result<Self, LogicError> {
        let mut map = HashMap::new();
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected key=value, got {tok:?}")))?;
            if map.insert(k, v).is_some() {
                return Err(err(line, format!("duplicate parameter {k:?}")));
            }
        }
        Ok(Self { line, map })
    }

    fn num(&mut self, key: &str) -> Result<f64, LogicError> {
        let v = self
            .map
            .remove(key)
            .ok_or_else(|| err(self.line, format!("missing parameter {key:?}")))?;
        parse_num(self.line, v)
    }

    fn num_or(&mut self, key: &str, default: f64) -> Result<f64, LogicError> {
        match self.map.remove(key) {
            Some(v) => parse_num(self.line, v),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<(), LogicError> {
        if let Some(k) = self.map.keys().min() {
            return Err(err(self.line, format!("unknown parameter {k:?}")));
        }
        Ok(())
    }
}

fn parse_num(line: usize, v: &str) -> Result<f64, LogicError> {
    match v {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => v.parse().map_err(|_| err(line, format!("invalid number {v:?}"))),
    }
}

fn parse_block(ln: usize, rest: &str, graph: &mut LogicGraph) -> Result<(), LogicError> {
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    if tokens.len() < 2 {
        return Err(err(ln, "expected: block <id> <type> [key=value ...]"));
    }
    let id = tokens[0];
    let type_name = tokens[1];
    let mut p = Params::parse(ln, &tokens[2..])?;
    let block = match type_name {
        "constant" => BlockType::Constant { value: p.num("value")? },
        "gain" => BlockType::Gain { k: p.num("k")? },
        "sum" => BlockType::Sum { wa: p.num_or("wa", 1.0)?, wb: p.num_or("wb", 1.0)? },
        "min" => BlockType::Min,
        "max" => BlockType::Max,
        "comparator" => {
            let op = match p.map.remove("op") {
                Some("lt") => CompareOp::Lt,
                Some("le") => CompareOp::Le,
                Some("gt") => CompareOp::Gt,
                Some("ge") => CompareOp::Ge,
                Some(other) => return Err(err(ln, format!("unknown comparator op {other:?}"))),
                None => return Err(err(ln, "missing parameter \"op\"")),
            };
            BlockType::Comparator { op }
        }
        "switch" => BlockType::Switch,
        "hysteresis" => BlockType::Hysteresis {
            on: p.num("on")?,
            off: p.num("off")?,
            init: p.num_or("init", 0.0)? > 0.5,
        },
        "saturation" => BlockType::Saturation {
            lo: p.num_or("lo", f64::NEG_INFINITY)?,
            hi: p.num_or("hi", f64::INFINITY)?,
        },
        "delay" => BlockType::UnitDelay { init: p.num_or("init", 0.0)? },
        "filter" => BlockType::FirstOrderFilter { tau: p.num("tau")?, init: p.num_or("init", 0.0)? },
        "pid" => BlockType::Pid(PidParams {
            kp: p.num_or("kp", 1.0)?,
            ki: p.num_or("ki", 0.0)?,
            kd: p.num_or("kd", 0.0)?,
            u_min: p.num_or("umin", f64::NEG_INFINITY)?,
            u_max: p.num_or("umax", f64::INFINITY)?,
        }),
        other => return Err(err(ln, format!("unknown block type {other:?}"))),
    };
    p.finish()?;
    graph.blocks.push(BlockDecl { id: id.to_string(), block });
    Ok(())
}

fn parse_port_ref(ln: usize, s: &str) -> Result<PortRef, LogicError> {
    let (block, port) = s
        .split_once('.')
        .ok_or_else(|| err(ln, format!("expected <block>.<port>, got {s:?}")))?;
    if block.is_empty() || port.is_empty() {
        return Err(err(ln, format!("expected <block>.<port>, got {s:?}")));
    }
    Ok(PortRef { block: block.to_string(), port: port.to_string() })
}

fn parse_connect(ln: usize, rest: &str, graph: &mut LogicGraph) -> Result<(), LogicError> {
    let (from, to) = rest
        .split_once("->")
        .ok_or_else(|| err(ln, "expected: connect <src> -> <dst>.<port>"))?;
    let from = from.trim();
    if from.is_empty() || from.contains(char::is_whitespace) {
        return Err(err(ln, "expected: connect <src> -> <dst>.<port>"));
    }
    let to = parse_port_ref(ln, to.trim())?;
    graph.connections.push(Connection { from: from.to_string(), to });
    Ok(())
}

fn parse_input(ln: usize, rest: &str, graph: &mut LogicGraph) -> Result<(), LogicError> {
    let (name, rhs) = rest
        .split_once("->")
        .ok_or_else(|| err(ln, "expected: input <name> -> <dst>.<port> [slot=..] [default=..]"))?;
    let name = name.trim();
    let mut tokens = rhs.split_whitespace();
    let dest = parse_port_ref(ln, tokens.next().ok_or_else(|| err(ln, "missing destination port"))?)?;
    let mut slot = None;
    let mut default = None;
    for tok in tokens {
        match tok.split_once('=') {
            Some(("slot", v)) => slot = Some(v.to_string()),
            Some(("default", v)) => default = Some(parse_num(ln, v)?),
            _ => return Err(err(ln, format!("unknown input option {tok:?}"))),
        }
    }
    if let Some(existing) = graph.inputs.iter_mut().find(|i| i.name == name) {
        if slot.is_some() || default.is_some() {
            return Err(err(
                ln,
                format!("input {name:?} already declared; slot/default only allowed on the first line"),
            ));
        }
        existing.dests.push(dest);
    } else {
        graph.inputs.push(ExternalInput {
            name: name.to_string(),
            default: default.unwrap_or(0.0),
            dests: vec![dest],
            slot,
        });
    }
    Ok(())
}

fn parse_output(ln: usize, rest: &str, graph: &mut LogicGraph) -> Result<(), LogicError> {
    let (name, rhs) = rest
        .split_once('=')
        .ok_or_else(|| err(ln, "expected: output <name> = <src> [slot=..]"))?;
    let mut tokens = rhs.split_whitespace();
    let source = tokens.next().ok_or_else(|| err(ln, "missing source block"))?;
    let mut slot = None;
    for tok in tokens {
        match tok.split_once('=') {
            Some(("slot", v)) => slot = Some(v.to_string()),
            _ => return Err(err(ln, format!("unknown output option {tok:?}"))),
        }
    }
    graph.outputs.push(ExternalOutput {
        name: name.trim().to_string(),
        source: source.to_string(),
        slot,
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::graph::compile;
    use crate::logic::step;
    use std::collections::BTreeMap;

    const THERMOSTAT: &str = "\
# bang-bang thermostat with a minimum setpoint
block relay hysteresis on=21 off=19
block boost gain k=5.0          # kW per relay state
block floor constant value=1.0
block power max

connect relay -> boost.in
connect boost -> power.a
connect floor -> power.b

input temperature -> relay.in slot=zone.temp default=20
output heat = power slot=zone.heat
";

    #[test]
    fn parses_and_runs_thermostat() {
        let g = parse_logic_model(THERMOSTAT).unwrap();
        assert_eq!(g.blocks.len(), 4);
        assert_eq!(g.inputs[0].slot.as_deref(), Some("zone.temp"));
        assert_eq!(g.inputs[0].default, 20.0);
        assert_eq!(g.outputs[0].slot.as_deref(), Some("zone.heat"));

        let plan = compile(&g).unwrap();
        let mut states = plan.initial_states(&g);
        let mut ext = BTreeMap::new();
        // relay engages above 21, disengages below 19
        ext.insert("temperature".to_string(), 18.0);
        let out = step(&g, &plan, &mut states, &ext, 1.0).unwrap();
        assert_eq!(out.outputs["heat"], 1.0); // relay off, floor keeps output at 1
        ext.insert("temperature".to_string(), 22.0);
        let out = step(&g, &plan, &mut states, &ext, 1.0).unwrap();
        assert_eq!(out.outputs["heat"], 5.0);
    }

    #[test]
    fn fan_out_input_lines_merge() {
        let src = "\
block a gain k=1
block b gain k=2
input u -> a.in default=3
input u -> b.in
";
        let g = parse_logic_model(src).unwrap();
        assert_eq!(g.inputs.len(), 1);
        assert_eq!(g.inputs[0].dests.len(), 2);
        assert_eq!(g.inputs[0].default, 3.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let src = "block a gain k=1\nblock b gain\n";
        match parse_logic_model(src) {
            Err(LogicError::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("missing parameter"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_directive_and_type_rejected() {
        assert!(matches!(
            parse_logic_model("wire a -> b.in\n"),
            Err(LogicError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_logic_model("block a integrator\n"),
            Err(LogicError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_logic_model("block a gain k=1 extra=2\n"),
            Err(LogicError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn infinities_in_parameters() {
        let g = parse_logic_model("block s saturation lo=0\n").unwrap();
        assert_eq!(g.blocks[0].block, BlockType::Saturation { lo: 0.0, hi: f64::INFINITY });
    }
}

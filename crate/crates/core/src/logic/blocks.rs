//! Block library: type definitions, per-block persistent state and update
//! equations.

use super::graph::LogicError;

/// PID parameters. The regulator uses the positional discrete form
///
/// `u_k = Kp e_k + Ki * sum(e_j dt) + Kd (e_k - e_{k-1}) / dt`
///
/// with the output clamped to `[u_min, u_max]` and clamping anti-windup: the
/// integral accumulator is frozen at steps where the unclamped output
/// saturates.
#[derive(Debug, Clone, PartialEq)]
pub struct PidParams {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl Default for PidParams {
    fn default() -> Self {
        Self { kp: 1.0, ki: 0.0, kd: 0.0, u_min: f64::NEG_INFINITY, u_max: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockType {
    /// `out = value`
    Constant { value: f64 },
    /// `out = k * in`
    Gain { k: f64 },
    /// `out = wa * a + wb * b`
    Sum { wa: f64, wb: f64 },
    /// `out = min(a, b)` / `out = max(a, b)`
    Min,
    Max,
    /// `out = 1 if (a op b) else 0`
    Comparator { op: CompareOp },
    /// `out = a if cond > 0.5 else b`
    Switch,
    /// Relay: switches to 1 when `in >= on`, back to 0 when `in <= off`.
    Hysteresis { on: f64, off: f64, init: bool },
    /// `out = clamp(in, lo, hi)`
    Saturation { lo: f64, hi: f64 },
    /// One-step delay: emits the input of the previous step.
    UnitDelay { init: f64 },
    /// Implicit-Euler first-order lag: `y = (y_prev + dt/tau * u) / (1 + dt/tau)`.
    FirstOrderFilter { tau: f64, init: f64 },
    Pid(PidParams),
}

impl BlockType {
    pub fn type_name(&self) -> &'static str {
        match self {
            BlockType::Constant { .. } => "constant",
            BlockType::Gain { .. } => "gain",
            BlockType::Sum { .. } => "sum",
            BlockType::Min => "min",
            BlockType::Max => "max",
            BlockType::Comparator { .. } => "comparator",
            BlockType::Switch => "switch",
            BlockType::Hysteresis { .. } => "hysteresis",
            BlockType::Saturation { .. } => "saturation",
            BlockType::UnitDelay { .. } => "delay",
            BlockType::FirstOrderFilter { .. } => "filter",
            BlockType::Pid(_) => "pid",
        }
    }

    /// Input port names and their default values when left unconnected.
    pub fn input_ports(&self) -> &'static [(&'static str, f64)] {
        match self {
            BlockType::Constant { .. } => &[],
            BlockType::Gain { .. }
            | BlockType::Saturation { .. }
            | BlockType::UnitDelay { .. }
            | BlockType::FirstOrderFilter { .. } => &[("in", 0.0)],
            BlockType::Hysteresis { .. } => &[("in", 0.0)],
            BlockType::Sum { .. } | BlockType::Min | BlockType::Max => {
                &[("a", 0.0), ("b", 0.0)]
            }
            BlockType::Comparator { .. } => &[("a", 0.0), ("b", 0.0)],
            BlockType::Switch => &[("cond", 0.0), ("a", 0.0), ("b", 0.0)],
            BlockType::Pid(_) => &[("e", 0.0)],
        }
    }

    pub fn is_delay(&self) -> bool {
        matches!(self, BlockType::UnitDelay { .. })
    }

    /// Parameter validation performed at compile time.
    pub fn validate(&self, block_id: &str) -> Result<(), LogicError> {
        let bad = |msg: String| Err(LogicError::InvalidParams { block: block_id.to_string(), message: msg });
        match self {
            BlockType::FirstOrderFilter { tau, .. } if *tau <= 0.0 => {
                bad(format!("filter time constant must be positive, got {tau}"))
            }
            BlockType::Hysteresis { on, off, .. } if on <= off => {
                bad(format!("hysteresis requires on > off, got on={on} off={off}"))
            }
            BlockType::Saturation { lo, hi } if lo > hi => {
                bad(format!("saturation requires lo <= hi, got [{lo}, {hi}]"))
            }
            BlockType::Pid(p) if p.u_min > p.u_max => {
                bad(format!("pid requires u_min <= u_max, got [{}, {}]", p.u_min, p.u_max))
            }
            _ => Ok(()),
        }
    }

    pub fn initial_state(&self) -> BlockState {
        match self {
            BlockType::UnitDelay { init } => BlockState::Delay { stored: *init },
            BlockType::FirstOrderFilter { init, .. } => BlockState::Filter { y: *init },
            BlockType::Hysteresis { init, .. } => BlockState::Relay { on: *init },
            BlockType::Pid(_) => BlockState::Pid { integral: 0.0, prev_error: 0.0, primed: false },
            _ => BlockState::Stateless,
        }
    }
}

/// Persistent per-block state; evolves only during `step`, and `reset`
/// restores the declared initial values.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockState {
    Stateless,
    Delay { stored: f64 },
    Filter { y: f64 },
    Relay { on: bool },
    Pid { integral: f64, prev_error: f64, primed: bool },
}

/// Computes the block output for this step and updates its state.
/// For a unit delay the returned value is the stored previous input; the
/// current input is stored for the next step.
pub fn eval(
    block: &BlockType,
    state: &mut BlockState,
    inputs: &[f64],
    dt: f64,
) -> f64 {
    match (block, state) {
        (BlockType::Constant { value }, _) => *value,
        (BlockType::Gain { k }, _) => k * inputs[0],
        (BlockType::Sum { wa, wb }, _) => wa * inputs[0] + wb * inputs[1],
        (BlockType::Min, _) => inputs[0].min(inputs[1]),
        (BlockType::Max, _) => inputs[0].max(inputs[1]),
        (BlockType::Comparator { op }, _) => {
            let (a, b) = (inputs[0], inputs[1]);
            let hit = match op {
                CompareOp::Lt => a < b,
                CompareOp::Le => a <= b,
                CompareOp::Gt => a > b,
                CompareOp::Ge => a >= b,
            };
            if hit {
                1.0
            } else {
                0.0
            }
        }
        (BlockType::Switch, _) => {
            if inputs[0] > 0.5 {
                inputs[1]
            } else {
                inputs[2]
            }
        }
        (BlockType::Hysteresis { on, off, .. }, BlockState::Relay { on: engaged }) => {
            if inputs[0] >= *on {
                *engaged = true;
            } else if inputs[0] <= *off {
                *engaged = false;
            }
            if *engaged {
                1.0
            } else {
                0.0
            }
        }
        (BlockType::Saturation { lo, hi }, _) => inputs[0].clamp(*lo, *hi),
        (BlockType::UnitDelay { .. }, BlockState::Delay { stored }) => {
            let out = *stored;
            *stored = inputs[0];
            out
        }
        (BlockType::FirstOrderFilter { tau, .. }, BlockState::Filter { y }) => {
            let a = dt / tau;
            *y = (*y + a * inputs[0]) / (1.0 + a);
            *y
        }
        (BlockType::Pid(p), BlockState::Pid { integral, prev_error, primed }) => {
            let e = inputs[0];
            let de = if *primed { (e - *prev_error) / dt } else { 0.0 };
            let integral_candidate = *integral + e * dt;
            let raw = p.kp * e + p.ki * integral_candidate + p.kd * de;
            let u = raw.clamp(p.u_min, p.u_max);
            if u == raw {
                *integral = integral_candidate;
            }
            *prev_error = e;
            *primed = true;
            u
        }
        (b, s) => unreachable!("state {s:?} does not match block {b:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(block: BlockType, inputs: &[&[f64]], dt: f64) -> Vec<f64> {
        let mut state = block.initial_state();
        inputs.iter().map(|i| eval(&block, &mut state, i, dt)).collect()
    }

    #[test]
    fn unit_delay_emits_previous_input() {
        let outs = run(
            BlockType::UnitDelay { init: 0.0 },
            &[&[1.0], &[2.0], &[3.0]],
            1.0,
        );
        assert_eq!(outs, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn pure_proportional_pid_jumps_and_holds() {
        let pid = BlockType::Pid(PidParams { kp: 2.0, ..Default::default() });
        let outs = run(pid, &[&[0.0], &[1.0], &[1.0], &[1.0]], 1.0);
        assert_eq!(outs, vec![0.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn pid_integral_accumulates() {
        let pid = BlockType::Pid(PidParams { kp: 0.0, ki: 1.0, ..Default::default() });
        let outs = run(pid, &[&[1.0], &[1.0], &[1.0]], 0.5);
        assert_eq!(outs, vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn pid_anti_windup_freezes_integral_when_clamped() {
        let pid = BlockType::Pid(PidParams {
            kp: 0.0,
            ki: 1.0,
            u_min: 0.0,
            u_max: 1.0,
            ..Default::default()
        });
        // error 1 for 5 steps of dt=1: unclamped integral would reach 5
        let outs = run(pid, &[&[1.0], &[1.0], &[1.0], &[1.0], &[1.0]], 1.0);
        assert_eq!(outs, vec![1.0, 1.0, 1.0, 1.0, 1.0]);
        // reversal acts immediately because the integral never wound up past 1
        let pidb = BlockType::Pid(PidParams {
            kp: 0.0,
            ki: 1.0,
            u_min: -1.0,
            u_max: 1.0,
            ..Default::default()
        });
        let mut state = pidb.initial_state();
        for _ in 0..5 {
            eval(&pidb, &mut state, &[1.0], 1.0);
        }
        let after_reversal = eval(&pidb, &mut state, &[-1.0], 1.0);
        assert_eq!(after_reversal, 0.0); // integral was held at 1, not 5
    }

    #[test]
    fn hysteresis_relay_on_off_cycle() {
        let relay = BlockType::Hysteresis { on: 0.8, off: 0.2, init: false };
        let mut state = relay.initial_state();
        let ramp: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let mut transitions = Vec::new();
        let mut prev = 0.0;
        for &u in ramp.iter().chain(ramp.iter().rev()) {
            let out = eval(&relay, &mut state, &[u], 1.0);
            if out != prev {
                transitions.push((u, out));
                prev = out;
            }
        }
        // exactly one switch-on at 0.8 and one switch-off at 0.2
        assert_eq!(transitions, vec![(0.8, 1.0), (0.2, 0.0)]);
    }

    #[test]
    fn filter_with_tau_equal_dt_averages() {
        let f = BlockType::FirstOrderFilter { tau: 1.0, init: 0.0 };
        let mut state = f.initial_state();
        let y1 = eval(&f, &mut state, &[1.0], 1.0);
        assert_eq!(y1, 0.5); // (0 + 1) / 2
        let y2 = eval(&f, &mut state, &[1.0], 1.0);
        assert_eq!(y2, 0.75);
    }

    #[test]
    fn saturation_and_switch() {
        assert_eq!(run(BlockType::Saturation { lo: 0.0, hi: 1.0 }, &[&[2.0]], 1.0), vec![1.0]);
        assert_eq!(run(BlockType::Switch, &[&[1.0, 5.0, 7.0]], 1.0), vec![5.0]);
        assert_eq!(run(BlockType::Switch, &[&[0.0, 5.0, 7.0]], 1.0), vec![7.0]);
    }

    #[test]
    fn parameter_validation() {
        assert!(BlockType::FirstOrderFilter { tau: 0.0, init: 0.0 }.validate("f").is_err());
        assert!(BlockType::Hysteresis { on: 0.2, off: 0.8, init: false }.validate("h").is_err());
        assert!(BlockType::Saturation { lo: 1.0, hi: 0.0 }.validate("s").is_err());
    }
}

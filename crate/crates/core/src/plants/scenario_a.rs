//! Scenario A: gas boiler + biomass boiler + heat storage, hourly steps.
//!
//! The biomass boiler is the cheap source but has a minimum power when
//! committed and a minimum spacing between stops; the gas boiler is flexible
//! and expensive; the storage is a lossless energy box. The window MILP
//! decides commitment, dispatch and storage flows; the plant model enforces
//! the physics independently and records any imbalance as a violation.

use std::collections::BTreeMap;

use crate::engine::{ModuleError, SimModule, SlotDecl, StepContext};
use crate::milp::{LinExpr, MilpError, MilpProblem, Sense, VarId, VarKind};
use crate::mpc::{ControlMap, ForecastSet, Formulation, Horizon, MpcError, MpcFormulator};
use crate::time::{SampleMode, TimeVector};
use crate::zone::{SlotValue, ZoneError};

/// Plant sizing and prices (defaults follow the reference configuration).
#[derive(Debug, Clone, PartialEq)]
pub struct PlantParamsA {
    pub gas_max_mw: f64,
    /// €/MWh of delivered heat.
    pub gas_price: f64,
    pub biomass_max_mw: f64,
    /// Minimum stable output as a fraction of the maximum when committed.
    pub biomass_min_fraction: f64,
    pub biomass_price: f64,
    pub storage_capacity_mwh: f64,
    pub storage_max_mw: f64,
    /// Minimum spacing between two biomass stops, hours.
    pub min_stop_spacing_h: f64,
    pub annual_load_mwh: f64,
    /// Yearly renewable-share goal, reported as a KPI (not a constraint).
    pub renewable_share_target: f64,
}

impl Default for PlantParamsA {
    fn default() -> Self {
        Self {
            gas_max_mw: 9.8,
            gas_price: 35.0,
            biomass_max_mw: 3.05,
            biomass_min_fraction: 0.40,
            biomass_price: 30.0,
            storage_capacity_mwh: 2.0,
            storage_max_mw: 1.0,
            min_stop_spacing_h: 10.0,
            annual_load_mwh: 21_217.0,
            renewable_share_target: 0.60,
        }
    }
}

impl PlantParamsA {
    pub fn biomass_min_mw(&self) -> f64 {
        self.biomass_min_fraction * self.biomass_max_mw
    }
}

/// Physical plant state carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantStateA {
    /// Stored energy, MWh.
    pub e_mwh: f64,
    /// Biomass commitment.
    pub u: bool,
    /// Hours elapsed since the last biomass stop.
    pub hours_since_stop: f64,
    pub energy_gas_mwh: f64,
    pub energy_biomass_mwh: f64,
}

impl Default for PlantStateA {
    fn default() -> Self {
        Self {
            e_mwh: 0.0,
            u: false,
            hours_since_stop: 1e6,
            energy_gas_mwh: 0.0,
            energy_biomass_mwh: 0.0,
        }
    }
}

/// Variable ids of one window formulation, per step.
#[derive(Debug, Clone)]
pub struct ScenarioAVars {
    pub pg: Vec<VarId>,
    pub pb: Vec<VarId>,
    pub u: Vec<VarId>,
    pub s: Vec<VarId>,
    pub pch: Vec<VarId>,
    pub pdis: Vec<VarId>,
    pub m: Vec<VarId>,
    /// `e[t]` is the stored energy at the END of step `t`.
    pub e: Vec<VarId>,
}

/// Builds the window MILP for scenario A.
///
/// Per step `t` of the horizon: gas `Pg(t)`, biomass `Pb(t)` with commitment
/// `u(t)` and stop indicator `s(t)`, storage charge/discharge with an
/// exclusivity mode binary `m(t)`, and stored energy `E`. Constraints:
/// balance, biomass min/max when committed, lossless storage integration
/// from the measured initial energy, stop-indicator linking with the
/// pre-window commitment, at most one stop per spacing window (sliding, with
/// the leading window shortened by the hours already elapsed since the last
/// stop and trailing windows truncated at the horizon edge), and
/// charge/discharge exclusivity. Objective: fuel cost minus the terminal
/// stored energy credited at the biomass price.
pub fn formulate_scenario_a(
    state: &PlantStateA,
    load: &[f64],
    params: &PlantParamsA,
    dt_h: f64,
) -> Result<(MilpProblem, ScenarioAVars), MilpError> {
    let h = load.len();
    let mut p = MilpProblem::new();
    let mut vars = ScenarioAVars {
        pg: Vec::with_capacity(h),
        pb: Vec::with_capacity(h),
        u: Vec::with_capacity(h),
        s: Vec::with_capacity(h),
        pch: Vec::with_capacity(h),
        pdis: Vec::with_capacity(h),
        m: Vec::with_capacity(h),
        e: Vec::with_capacity(h),
    };
    for t in 0..h {
        vars.pg.push(p.add_var(format!("Pg[{t}]"), VarKind::Continuous, 0.0, params.gas_max_mw)?);
        vars.pb.push(p.add_var(format!("Pb[{t}]"), VarKind::Continuous, 0.0, params.biomass_max_mw)?);
        vars.u.push(p.add_binary(format!("u[{t}]"))?);
        vars.s.push(p.add_binary(format!("s[{t}]"))?);
        vars.pch.push(p.add_var(format!("Pch[{t}]"), VarKind::Continuous, 0.0, params.storage_max_mw)?);
        vars.pdis.push(p.add_var(format!("Pdis[{t}]"), VarKind::Continuous, 0.0, params.storage_max_mw)?);
        vars.m.push(p.add_binary(format!("m[{t}]"))?);
        vars.e.push(p.add_var(format!("E[{t}]"), VarKind::Continuous, 0.0, params.storage_capacity_mwh)?);
    }

    let pb_min = params.biomass_min_mw();
    for t in 0..h {
        // Pg + Pb + Pdis - Pch = L
        let balance = LinExpr::var(vars.pg[t])
            + LinExpr::var(vars.pb[t])
            + LinExpr::var(vars.pdis[t])
            - LinExpr::var(vars.pch[t]);
        p.add_named_constraint(format!("bal[{t}]"), balance, Sense::Eq, load[t])?;

        // biomass operating range when committed
        p.add_named_constraint(
            format!("bmax[{t}]"),
            LinExpr::var(vars.pb[t]) - params.biomass_max_mw * LinExpr::var(vars.u[t]),
            Sense::Le,
            0.0,
        )?;
        p.add_named_constraint(
            format!("bmin[{t}]"),
            LinExpr::var(vars.pb[t]) - pb_min * LinExpr::var(vars.u[t]),
            Sense::Ge,
            0.0,
        )?;

        // storage integration: E(t) = E(t-1) + dt (Pch - Pdis)
        let flow = dt_h * (LinExpr::var(vars.pch[t]) - LinExpr::var(vars.pdis[t]));
        if t == 0 {
            p.add_named_constraint(
                format!("edyn[{t}]"),
                LinExpr::var(vars.e[t]) - flow,
                Sense::Eq,
                state.e_mwh,
            )?;
        } else {
            p.add_named_constraint(
                format!("edyn[{t}]"),
                LinExpr::var(vars.e[t]) - LinExpr::var(vars.e[t - 1]) - flow,
                Sense::Eq,
                0.0,
            )?;
        }

        // stop indicator: s(t) >= u(t-1) - u(t)
        if t == 0 {
            let u_prev = if state.u { 1.0 } else { 0.0 };
            p.add_named_constraint(
                format!("stop[{t}]"),
                LinExpr::var(vars.s[t]) + LinExpr::var(vars.u[t]),
                Sense::Ge,
                u_prev,
            )?;
        } else {
            p.add_named_constraint(
                format!("stop[{t}]"),
                LinExpr::var(vars.s[t]) + LinExpr::var(vars.u[t]) - LinExpr::var(vars.u[t - 1]),
                Sense::Ge,
                0.0,
            )?;
        }

        // charge/discharge exclusivity
        p.add_named_constraint(
            format!("chm[{t}]"),
            LinExpr::var(vars.pch[t]) - params.storage_max_mw * LinExpr::var(vars.m[t]),
            Sense::Le,
            0.0,
        )?;
        p.add_named_constraint(
            format!("dism[{t}]"),
            LinExpr::var(vars.pdis[t]) + params.storage_max_mw * LinExpr::var(vars.m[t]),
            Sense::Le,
            params.storage_max_mw,
        )?;
    }

    // at most one stop per spacing window, sliding over the horizon
    let w = (params.min_stop_spacing_h / dt_h).round() as usize;
    for t0 in 0..h {
        let end = (t0 + w).min(h);
        let mut sum = LinExpr::new();
        for t in t0..end {
            sum += LinExpr::var(vars.s[t]);
        }
        p.add_named_constraint(format!("win[{t0}]"), sum, Sense::Le, 1.0)?;
    }
    // leading window: if the last stop was fewer than `w` steps ago, no stop
    // may occur until the spacing has elapsed. The counter reads 0 right
    // after the step containing the stop, so `steps_since + 1` steps have
    // already passed and the next stop is legal at step `w - steps_since - 1`.
    let steps_since = (state.hours_since_stop / dt_h).floor() as usize;
    if steps_since + 1 < w {
        let forbid = (w - steps_since - 1).min(h);
        let mut sum = LinExpr::new();
        for t in 0..forbid {
            sum += LinExpr::var(vars.s[t]);
        }
        p.add_named_constraint("win[lead]", sum, Sense::Le, 0.0)?;
    }

    // fuel cost minus terminal storage credit at the biomass price
    let mut cost = LinExpr::new();
    for t in 0..h {
        cost += dt_h * params.gas_price * LinExpr::var(vars.pg[t]);
        cost += dt_h * params.biomass_price * LinExpr::var(vars.pb[t]);
    }
    cost -= params.biomass_price * LinExpr::var(vars.e[h - 1]);
    p.set_objective(cost)?;

    Ok((p, vars))
}

/// MPC plug-in wrapping [`formulate_scenario_a`]; reads the plant state
/// slots and the `load` forecast, writes the `ctl.*` trajectory slots.
pub struct ScenarioAFormulator {
    pub params: PlantParamsA,
    pub initial_state: PlantStateA,
    /// Prefix of the plant's measurement slots (`<prefix>.E` etc.).
    pub state_prefix: String,
    /// Prefix of the control slots this formulator maps (`<prefix>.Pb` etc.).
    pub control_prefix: String,
    pub load_name: String,
}

impl ScenarioAFormulator {
    pub fn new(params: PlantParamsA, initial_state: PlantStateA) -> Self {
        Self {
            params,
            initial_state,
            state_prefix: "plant".into(),
            control_prefix: "ctl".into(),
            load_name: "load".into(),
        }
    }

    pub fn control_slots(&self) -> Vec<String> {
        ["u", "Pb", "Pch", "Pdis", "Pg"]
            .iter()
            .map(|s| format!("{}.{s}", self.control_prefix))
            .collect()
    }
}

impl MpcFormulator for ScenarioAFormulator {
    fn forecast_names(&self) -> Vec<String> {
        vec![self.load_name.clone()]
    }

    fn state_slots(&self) -> Vec<(String, f64)> {
        let p = &self.state_prefix;
        vec![
            (format!("{p}.E"), self.initial_state.e_mwh),
            (format!("{p}.u"), if self.initial_state.u { 1.0 } else { 0.0 }),
            (format!("{p}.h_since_stop"), self.initial_state.hours_since_stop),
        ]
    }

    fn formulate(
        &self,
        state: &BTreeMap<String, f64>,
        forecasts: &ForecastSet,
        t_now: i64,
        horizon: &Horizon,
    ) -> Result<Formulation, MpcError> {
        let load = forecasts.sample_steps(&self.load_name, t_now, horizon)?;
        let dt_h = horizon.step as f64 / 3600.0;
        let p = &self.state_prefix;
        let snapshot = PlantStateA {
            e_mwh: state[&format!("{p}.E")],
            u: state[&format!("{p}.u")] > 0.5,
            hours_since_stop: state[&format!("{p}.h_since_stop")],
            ..Default::default()
        };
        let (problem, vars) = formulate_scenario_a(&snapshot, &load, &self.params, dt_h)?;
        let c = &self.control_prefix;
        let controls = vec![
            ControlMap { slot: format!("{c}.u"), vars: vars.u },
            ControlMap { slot: format!("{c}.Pb"), vars: vars.pb },
            ControlMap { slot: format!("{c}.Pch"), vars: vars.pch },
            ControlMap { slot: format!("{c}.Pdis"), vars: vars.pdis },
            ControlMap { slot: format!("{c}.Pg"), vars: vars.pg },
        ];
        Ok(Formulation { problem, controls })
    }
}

/// Set points applied to the plant for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControlsA {
    pub u: bool,
    pub pb_mw: f64,
    pub pch_mw: f64,
    pub pdis_mw: f64,
}

/// What actually happened during one simulated step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecordA {
    pub pg_mw: f64,
    pub pb_mw: f64,
    pub pch_mw: f64,
    pub pdis_mw: f64,
    pub e_mwh: f64,
    pub u: bool,
    /// produced + discharged − charged − load (positive = dumped surplus,
    /// negative = unmet load); zero when the command set is balanced.
    pub violation_balance_mw: f64,
    /// Commanded storage power that had to be clipped, MWh over the step.
    pub violation_storage_mwh: f64,
    /// €/h at the current dispatch.
    pub cost_rate: f64,
    pub stop: bool,
}

/// Advances the plant one step under the given set points, enforcing the
/// physics regardless of what the optimizer promised: storage is integrated
/// and clipped to its bounds, the biomass output is clamped to its operating
/// range, the gas boiler covers any remaining imbalance up to its maximum,
/// and whatever cannot be balanced is recorded as a violation (data, not an
/// error).
pub fn simulate_step_a(
    state: &mut PlantStateA,
    ctl: &ControlsA,
    load_mw: f64,
    dt_h: f64,
    params: &PlantParamsA,
) -> StepRecordA {
    let pb = if ctl.u {
        ctl.pb_mw.clamp(params.biomass_min_mw(), params.biomass_max_mw)
    } else {
        0.0
    };

    // storage: clip commanded powers to the rating and the available room
    let pch_cmd = ctl.pch_mw.clamp(0.0, params.storage_max_mw);
    let pdis_cmd = ctl.pdis_mw.clamp(0.0, params.storage_max_mw);
    let room = (params.storage_capacity_mwh - state.e_mwh) / dt_h;
    let pch = pch_cmd.min(room).max(0.0);
    let avail = (state.e_mwh + pch * dt_h) / dt_h;
    let pdis = pdis_cmd.min(avail).max(0.0);
    let violation_storage = ((pch_cmd - pch) + (pdis_cmd - pdis)) * dt_h;
    let e_next = state.e_mwh + dt_h * (pch - pdis);

    // gas covers the residual
    let residual = load_mw - pb - pdis + pch;
    let pg = residual.clamp(0.0, params.gas_max_mw);
    let violation_balance = pg + pb + pdis - pch - load_mw;

    let stop = state.u && !ctl.u;
    state.hours_since_stop = if stop { 0.0 } else { state.hours_since_stop + dt_h };
    state.u = ctl.u;
    state.e_mwh = e_next;
    state.energy_gas_mwh += pg * dt_h;
    state.energy_biomass_mwh += pb * dt_h;

    StepRecordA {
        pg_mw: pg,
        pb_mw: pb,
        pch_mw: pch,
        pdis_mw: pdis,
        e_mwh: e_next,
        u: ctl.u,
        violation_balance_mw: violation_balance,
        violation_storage_mwh: violation_storage,
        cost_rate: params.gas_price * pg + params.biomass_price * pb,
        stop,
    }
}

/// Reads a control slot that may hold a scalar (rule-based controller) or a
/// time-vector trajectory (MPC), falling back to `default` while no producer
/// has written it yet.
pub(crate) fn read_signal(ctx: &StepContext, slot: &str, default: f64) -> Result<f64, ModuleError> {
    match ctx.read(slot) {
        Ok(SlotValue::Scalar(v)) => Ok(v),
        Ok(SlotValue::TimeVector(tv)) => {
            tv.sample(ctx.t, SampleMode::HoldLast).map_err(ModuleError::Time)
        }
        Err(ModuleError::Zone(ZoneError::UnknownSlot(_))) => Ok(default),
        Err(e) => Err(e),
    }
}

/// Scenario-A plant as a co-simulation module.
///
/// Reads `ctl.*` set points (scalars or trajectories), samples the actual
/// load, advances the physics and publishes measurements under the `plant.*`
/// prefix. The state slots are also written during initialization so that an
/// MPC firing in the same first tick sees the true initial condition.
pub struct PlantModuleA {
    id: String,
    params: PlantParamsA,
    state: PlantStateA,
    initial_state: PlantStateA,
    load: TimeVector,
    state_prefix: String,
    control_prefix: String,
}

impl PlantModuleA {
    pub fn new(
        id: impl Into<String>,
        params: PlantParamsA,
        initial_state: PlantStateA,
        load: TimeVector,
    ) -> Self {
        Self {
            id: id.into(),
            params,
            state: initial_state.clone(),
            initial_state,
            load,
            state_prefix: "plant".into(),
            control_prefix: "ctl".into(),
        }
    }

    fn out(&self, name: &str) -> String {
        format!("{}.{name}", self.state_prefix)
    }

    fn ctl(&self, name: &str) -> String {
        format!("{}.{name}", self.control_prefix)
    }
}

impl SimModule for PlantModuleA {
    fn id(&self) -> &str {
        &self.id
    }

    fn inputs(&self) -> Vec<SlotDecl> {
        ["u", "Pb", "Pch", "Pdis"].iter().map(|s| SlotDecl::scalar(self.ctl(s))).collect()
    }

    fn outputs(&self) -> Vec<SlotDecl> {
        [
            "load", "Pg", "Pb", "Pch", "Pdis", "E", "u", "h_since_stop", "violation",
            "violation_storage", "cost_rate", "stop",
        ]
        .iter()
        .map(|s| SlotDecl::scalar(self.out(s)))
        .collect()
    }

    fn initialize(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
        self.state = self.initial_state.clone();
        ctx.write(&self.out("E"), self.state.e_mwh)?;
        ctx.write(&self.out("u"), if self.state.u { 1.0 } else { 0.0 })?;
        ctx.write(&self.out("h_since_stop"), self.state.hours_since_stop)?;
        Ok(())
    }

    fn do_step(&mut self, ctx: &mut StepContext) -> Result<(), ModuleError> {
        let load = self.load.sample(ctx.t, SampleMode::HoldLast)?;
        let ctl = ControlsA {
            u: read_signal(ctx, &self.ctl("u"), 0.0)? > 0.5,
            pb_mw: read_signal(ctx, &self.ctl("Pb"), 0.0)?,
            pch_mw: read_signal(ctx, &self.ctl("Pch"), 0.0)?,
            pdis_mw: read_signal(ctx, &self.ctl("Pdis"), 0.0)?,
        };
        let dt_h = ctx.dt as f64 / 3600.0;
        let rec = simulate_step_a(&mut self.state, &ctl, load, dt_h, &self.params);
        ctx.write(&self.out("load"), load)?;
        ctx.write(&self.out("Pg"), rec.pg_mw)?;
        ctx.write(&self.out("Pb"), rec.pb_mw)?;
        ctx.write(&self.out("Pch"), rec.pch_mw)?;
        ctx.write(&self.out("Pdis"), rec.pdis_mw)?;
        ctx.write(&self.out("E"), rec.e_mwh)?;
        ctx.write(&self.out("u"), if rec.u { 1.0 } else { 0.0 })?;
        ctx.write(&self.out("h_since_stop"), self.state.hours_since_stop)?;
        ctx.write(&self.out("violation"), rec.violation_balance_mw)?;
        ctx.write(&self.out("violation_storage"), rec.violation_storage_mwh)?;
        ctx.write(&self.out("cost_rate"), rec.cost_rate)?;
        ctx.write(&self.out("stop"), if rec.stop { 1.0 } else { 0.0 })?;
        Ok(())
    }
}

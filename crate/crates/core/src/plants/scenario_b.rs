//! Scenario B: biomass boiler + heat pump + heat storage, 15-minute steps.
//!
//! The heat pump's marginal cost is the electricity price divided by its
//! coefficient of performance, so a time-varying price shifts the merit
//! order during the day. Component sizes and the price series are
//! representative (the real ones are not published), which makes cost
//! comparisons between control strategies directional rather than absolute.

use std::collections::BTreeMap;

use crate::engine::{ModuleError, SimModule, SlotDecl, StepContext};
use crate::milp::{LinExpr, MilpError, MilpProblem, Sense, VarId, VarKind};
use crate::mpc::{ControlMap, ForecastSet, Formulation, Horizon, MpcError, MpcFormulator};
use crate::time::{SampleMode, TimeVector};

use super::scenario_a::read_signal;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantParamsB {
    pub biomass_max_mw: f64,
    pub biomass_min_fraction: f64,
    pub biomass_price: f64,
    /// Heat pump maximum thermal output, MW.
    pub hp_max_mw: f64,
    /// Constant coefficient of performance (thermal out / electric in).
    pub cop: f64,
    pub storage_capacity_mwh: f64,
    pub storage_max_mw: f64,
    pub min_stop_spacing_h: f64,
}

impl Default for PlantParamsB {
    fn default() -> Self {
        Self {
            biomass_max_mw: 2.0,
            biomass_min_fraction: 0.40,
            biomass_price: 30.0,
            hp_max_mw: 2.5,
            cop: 3.0,
            storage_capacity_mwh: 2.0,
            storage_max_mw: 1.0,
            min_stop_spacing_h: 10.0,
        }
    }
}

impl PlantParamsB {
    pub fn biomass_min_mw(&self) -> f64 {
        self.biomass_min_fraction * self.biomass_max_mw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantStateB {
    pub e_mwh: f64,
    pub u: bool,
    pub hours_since_stop: f64,
    pub energy_biomass_mwh: f64,
    pub energy_hp_mwh: f64,
}

impl Default for PlantStateB {
    fn default() -> Self {
        Self {
            e_mwh: 0.0,
            u: false,
            hours_since_stop: 1e6,
            energy_biomass_mwh: 0.0,
            energy_hp_mwh: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioBVars {
    pub pb: Vec<VarId>,
    pub php: Vec<VarId>,
    pub u: Vec<VarId>,
    pub s: Vec<VarId>,
    pub pch: Vec<VarId>,
    pub pdis: Vec<VarId>,
    pub m: Vec<VarId>,
    pub e: Vec<VarId>,
}

/// Builds the window MILP for scenario B: same structure as scenario A with
/// the gas boiler replaced by a heat pump whose per-step cost is
/// `price_el(t) / COP` per MWh of heat. The heat pump maximum is written as
/// an explicit row (not just a bound) so formulation size reports match the
/// constraint-counting convention of the reference configuration.
pub fn formulate_scenario_b(
    state: &PlantStateB,
    load: &[f64],
    price_el: &[f64],
    params: &PlantParamsB,
    dt_h: f64,
) -> Result<(MilpProblem, ScenarioBVars), MilpError> {
    assert_eq!(load.len(), price_el.len());
    let h = load.len();
    let mut p = MilpProblem::new();
    let mut vars = ScenarioBVars {
        pb: Vec::with_capacity(h),
        php: Vec::with_capacity(h),
        u: Vec::with_capacity(h),
        s: Vec::with_capacity(h),
        pch: Vec::with_capacity(h),
        pdis: Vec::with_capacity(h),
        m: Vec::with_capacity(h),
        e: Vec::with_capacity(h),
    };
    for t in 0..h {
        vars.pb.push(p.add_var(format!("Pb[{t}]"), VarKind::Continuous, 0.0, params.biomass_max_mw)?);
        vars.php.push(p.add_var(format!("Php[{t}]"), VarKind::Continuous, 0.0, params.hp_max_mw)?);
        vars.u.push(p.add_binary(format!("u[{t}]"))?);
        vars.s.push(p.add_binary(format!("s[{t}]"))?);
        vars.pch.push(p.add_var(format!("Pch[{t}]"), VarKind::Continuous, 0.0, params.storage_max_mw)?);
        vars.pdis.push(p.add_var(format!("Pdis[{t}]"), VarKind::Continuous, 0.0, params.storage_max_mw)?);
        vars.m.push(p.add_binary(format!("m[{t}]"))?);
        vars.e.push(p.add_var(format!("E[{t}]"), VarKind::Continuous, 0.0, params.storage_capacity_mwh)?);
    }

    let pb_min = params.biomass_min_mw();
    for t in 0..h {
        let balance = LinExpr::var(vars.pb[t])
            + LinExpr::var(vars.php[t])
            + LinExpr::var(vars.pdis[t])
            - LinExpr::var(vars.pch[t]);
        p.add_named_constraint(format!("bal[{t}]"), balance, Sense::Eq, load[t])?;
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
        p.add_named_constraint(
            format!("hpmax[{t}]"),
            LinExpr::var(vars.php[t]),
            Sense::Le,
            params.hp_max_mw,
        )?;
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

    let w = (params.min_stop_spacing_h / dt_h).round() as usize;
    for t0 in 0..h {
        let end = (t0 + w).min(h);
        let mut sum = LinExpr::new();
        for t in t0..end {
            sum += LinExpr::var(vars.s[t]);
        }
        p.add_named_constraint(format!("win[{t0}]"), sum, Sense::Le, 1.0)?;
    }
    // The counter reads 0 right after the step containing the stop, so
    // `steps_since + 1` steps have already passed and the next stop is legal
    // at step `w - steps_since - 1`.
    let steps_since = (state.hours_since_stop / dt_h).floor() as usize;
    if steps_since + 1 < w {
        let forbid = (w - steps_since - 1).min(h);
        let mut sum = LinExpr::new();
        for t in 0..forbid {
            sum += LinExpr::var(vars.s[t]);
        }
        p.add_named_constraint("win[lead]", sum, Sense::Le, 0.0)?;
    }

    let mut cost = LinExpr::new();
    for t in 0..h {
        cost += dt_h * params.biomass_price * LinExpr::var(vars.pb[t]);
        cost += dt_h * (price_el[t] / params.cop) * LinExpr::var(vars.php[t]);
    }
    cost -= params.biomass_price * LinExpr::var(vars.e[h - 1]);
    p.set_objective(cost)?;

    Ok((p, vars))
}

/// MPC plug-in wrapping [`formulate_scenario_b`]; reads the `load` and
/// `price_el` forecasts.
pub struct ScenarioBFormulator {
    pub params: PlantParamsB,
    pub initial_state: PlantStateB,
    pub state_prefix: String,
    pub control_prefix: String,
    pub load_name: String,
    pub price_name: String,
}

impl ScenarioBFormulator {
    pub fn new(params: PlantParamsB, initial_state: PlantStateB) -> Self {
        Self {
            params,
            initial_state,
            state_prefix: "plant".into(),
            control_prefix: "ctl".into(),
            load_name: "load".into(),
            price_name: "price_el".into(),
        }
    }

    pub fn control_slots(&self) -> Vec<String> {
        ["u", "Pb", "Pch", "Pdis", "Php"]
            .iter()
            .map(|s| format!("{}.{s}", self.control_prefix))
            .collect()
    }
}

impl MpcFormulator for ScenarioBFormulator {
    fn forecast_names(&self) -> Vec<String> {
        vec![self.load_name.clone(), self.price_name.clone()]
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
        let price = forecasts.sample_steps(&self.price_name, t_now, horizon)?;
        let dt_h = horizon.step as f64 / 3600.0;
        let p = &self.state_prefix;
        let snapshot = PlantStateB {
            e_mwh: state[&format!("{p}.E")],
            u: state[&format!("{p}.u")] > 0.5,
            hours_since_stop: state[&format!("{p}.h_since_stop")],
            ..Default::default()
        };
        let (problem, vars) = formulate_scenario_b(&snapshot, &load, &price, &self.params, dt_h)?;
        let c = &self.control_prefix;
        let controls = vec![
            ControlMap { slot: format!("{c}.u"), vars: vars.u },
            ControlMap { slot: format!("{c}.Pb"), vars: vars.pb },
            ControlMap { slot: format!("{c}.Pch"), vars: vars.pch },
            ControlMap { slot: format!("{c}.Pdis"), vars: vars.pdis },
            ControlMap { slot: format!("{c}.Php"), vars: vars.php },
        ];
        Ok(Formulation { problem, controls })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControlsB {
    pub u: bool,
    pub pb_mw: f64,
    pub pch_mw: f64,
    pub pdis_mw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecordB {
    pub pb_mw: f64,
    pub php_mw: f64,
    pub pch_mw: f64,
    pub pdis_mw: f64,
    pub e_mwh: f64,
    pub u: bool,
    pub violation_balance_mw: f64,
    pub violation_storage_mwh: f64,
    pub cost_rate: f64,
    pub stop: bool,
}

/// Advances the scenario-B plant one step. The heat pump plays the balancing
/// role the gas boiler has in scenario A: it covers whatever the biomass and
/// storage commands leave open, up to its thermal maximum; the shortfall or
/// surplus beyond that is a recorded violation.
pub fn simulate_step_b(
    state: &mut PlantStateB,
    ctl: &ControlsB,
    load_mw: f64,
    price_el: f64,
    dt_h: f64,
    params: &PlantParamsB,
) -> StepRecordB {
    let pb = if ctl.u {
        ctl.pb_mw.clamp(params.biomass_min_mw(), params.biomass_max_mw)
    } else {
        0.0
    };

    let pch_cmd = ctl.pch_mw.clamp(0.0, params.storage_max_mw);
    let pdis_cmd = ctl.pdis_mw.clamp(0.0, params.storage_max_mw);
    let room = (params.storage_capacity_mwh - state.e_mwh) / dt_h;
    let pch = pch_cmd.min(room).max(0.0);
    let avail = (state.e_mwh + pch * dt_h) / dt_h;
    let pdis = pdis_cmd.min(avail).max(0.0);
    let violation_storage = ((pch_cmd - pch) + (pdis_cmd - pdis)) * dt_h;
    let e_next = state.e_mwh + dt_h * (pch - pdis);

    let residual = load_mw - pb - pdis + pch;
    let php = residual.clamp(0.0, params.hp_max_mw);
    let violation_balance = pb + php + pdis - pch - load_mw;

    let stop = state.u && !ctl.u;
    state.hours_since_stop = if stop { 0.0 } else { state.hours_since_stop + dt_h };
    state.u = ctl.u;
    state.e_mwh = e_next;
    state.energy_biomass_mwh += pb * dt_h;
    state.energy_hp_mwh += php * dt_h;

    StepRecordB {
        pb_mw: pb,
        php_mw: php,
        pch_mw: pch,
        pdis_mw: pdis,
        e_mwh: e_next,
        u: ctl.u,
        violation_balance_mw: violation_balance,
        violation_storage_mwh: violation_storage,
        cost_rate: params.biomass_price * pb + (price_el / params.cop) * php,
        stop,
    }
}

/// Scenario-B plant as a co-simulation module.
pub struct PlantModuleB {
    id: String,
    params: PlantParamsB,
    state: PlantStateB,
    initial_state: PlantStateB,
    load: TimeVector,
    price_el: TimeVector,
    state_prefix: String,
    control_prefix: String,
}

impl PlantModuleB {
    pub fn new(
        id: impl Into<String>,
        params: PlantParamsB,
        initial_state: PlantStateB,
        load: TimeVector,
        price_el: TimeVector,
    ) -> Self {
        Self {
            id: id.into(),
            params,
            state: initial_state.clone(),
            initial_state,
            load,
            price_el,
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

impl SimModule for PlantModuleB {
    fn id(&self) -> &str {
        &self.id
    }

    fn inputs(&self) -> Vec<SlotDecl> {
        ["u", "Pb", "Pch", "Pdis"].iter().map(|s| SlotDecl::scalar(self.ctl(s))).collect()
    }

    fn outputs(&self) -> Vec<SlotDecl> {
        [
            "load", "price_el", "Pb", "Php", "Pch", "Pdis", "E", "u", "h_since_stop",
            "violation", "violation_storage", "cost_rate", "stop",
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
        let price = self.price_el.sample(ctx.t, SampleMode::HoldLast)?;
        let ctl = ControlsB {
            u: read_signal(ctx, &self.ctl("u"), 0.0)? > 0.5,
            pb_mw: read_signal(ctx, &self.ctl("Pb"), 0.0)?,
            pch_mw: read_signal(ctx, &self.ctl("Pch"), 0.0)?,
            pdis_mw: read_signal(ctx, &self.ctl("Pdis"), 0.0)?,
        };
        let dt_h = ctx.dt as f64 / 3600.0;
        let rec = simulate_step_b(&mut self.state, &ctl, load, price, dt_h, &self.params);
        ctx.write(&self.out("load"), load)?;
        ctx.write(&self.out("price_el"), price)?;
        ctx.write(&self.out("Pb"), rec.pb_mw)?;
        ctx.write(&self.out("Php"), rec.php_mw)?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_milp, MilpOptions, MilpStatus};

    #[test]
    fn formulation_size_for_96_steps() {
        let state = PlantStateB::default();
        let load = vec![1.0; 96];
        let price = vec![40.0; 96];
        let (p, _) = formulate_scenario_b(&state, &load, &price, &PlantParamsB::default(), 0.25).unwrap();
        assert_eq!(p.num_continuous(), 5 * 96); // Pb, Php, Pch, Pdis, E
        assert_eq!(p.num_binaries(), 3 * 96); // u, s, m
        assert_eq!(p.num_constraints(), 9 * 96); // 8 per-step rows + windows
    }

    #[test]
    fn expensive_electricity_dispatches_biomass_first() {
        // price_el / COP = 120/3 = 40 > 30: biomass runs at every step
        let state = PlantStateB { u: true, ..Default::default() };
        let load = vec![1.5; 4];
        let price = vec![120.0; 4];
        let (p, vars) = formulate_scenario_b(&state, &load, &price, &PlantParamsB::default(), 0.25).unwrap();
        let sol = solve_milp(&p, &MilpOptions::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        for t in 0..4 {
            assert!(sol.values[vars.u[t]] > 0.5);
            // the heat pump staying off is the strict part of the optimum;
            // shuffling biomass heat through the storage is value-neutral
            // under the terminal credit, so per-step Pb is not pinned
            assert!(sol.values[vars.php[t]].abs() < 1e-6);
        }
        let biomass_mwh: f64 = (0..4).map(|t| sol.values[vars.pb[t]] * 0.25).sum();
        let stored_mwh = sol.values[vars.e[3]];
        assert!(
            (biomass_mwh - (1.5 * 4.0 * 0.25 + stored_mwh)).abs() < 1e-6,
            "biomass should carry the load plus any banked heat"
        );
    }

    #[test]
    fn cheap_electricity_window_charges_storage() {
        // zero-cost electricity for the first 2 h (8 steps), expensive
        // after; the late load exceeds the biomass maximum so discharge
        // displaces heat-pump output at 50 EUR/MWh, strictly better than
        // the 30 EUR/MWh terminal credit for keeping the heat stored
        let state = PlantStateB::default();
        let mut load = vec![1.0; 16];
        let mut price = vec![0.0; 16];
        for t in 8..16 {
            load[t] = 2.8;
            price[t] = 150.0;
        }
        let (p, vars) = formulate_scenario_b(&state, &load, &price, &PlantParamsB::default(), 0.25).unwrap();
        let sol = solve_milp(&p, &MilpOptions::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        let charged: f64 = (0..8).map(|t| sol.values[vars.pch[t]] * 0.25).sum();
        assert!(charged > 1.5, "free electricity should fill the storage, charged {charged}");
        // 0.8 MW of heat-pump output is displaceable at each late step
        let discharged: f64 = (8..16).map(|t| sol.values[vars.pdis[t]] * 0.25).sum();
        assert!(discharged >= 1.6 - 1e-6, "stored heat should displace expensive supply, discharged {discharged}");
        for t in 8..16 {
            assert!(sol.values[vars.php[t]].abs() < 1e-6, "storage should cover the residual at step {t}");
        }
    }

    #[test]
    fn heat_pump_covers_residual_in_simulation() {
        let params = PlantParamsB::default();
        let mut state = PlantStateB::default();
        let rec = simulate_step_b(&mut state, &ControlsB::default(), 1.8, 60.0, 0.25, &params);
        assert!((rec.php_mw - 1.8).abs() < 1e-12);
        assert_eq!(rec.violation_balance_mw, 0.0);
        assert!((rec.cost_rate - 60.0 / 3.0 * 1.8).abs() < 1e-12);

        // beyond the heat pump maximum the shortfall is recorded
        let rec2 = simulate_step_b(&mut state, &ControlsB::default(), 3.0, 60.0, 0.25, &params);
        assert!((rec2.php_mw - 2.5).abs() < 1e-12);
        assert!((rec2.violation_balance_mw - (2.5 - 3.0)).abs() < 1e-12);
    }
}

//! Rule-based baseline controllers, expressed in the block-diagram text
//! format and compiled by the logic engine.
//!
//! Scenario A rules: the biomass boiler follows the (filtered) load with a
//! hysteresis commitment, a hold keeps it running while a stop happened less
//! than the spacing ago, the storage charges whenever the boiler has
//! headroom and discharges what the boiler cannot cover; the gas boiler
//! picks up the residual inside the plant model. Scenario B adds a
//! price-threshold rule: when electricity is cheap the heat pump carries the
//! load and the biomass commitment reacts only to the residual.

use super::scenario_a::PlantParamsA;
use super::scenario_b::PlantParamsB;

#[derive(Debug, Clone, PartialEq)]
pub struct RbcThresholdsA {
    /// Filtered load at which the biomass boiler is committed, MW.
    pub on_load_mw: f64,
    /// Filtered load below which it is released, MW.
    pub off_load_mw: f64,
    /// Time constant of the load filter, hours.
    pub filter_tau_h: f64,
    /// Controller step, hours (must match its sequence period).
    pub dt_h: f64,
    /// Commitment state assumed before the first step.
    pub init_on: bool,
}

impl Default for RbcThresholdsA {
    fn default() -> Self {
        // the release threshold sits just above the boiler's minimum power,
        // so the baseline does not linger committed below minimum output
        Self { on_load_mw: 1.6, off_load_mw: 1.25, filter_tau_h: 3.0, dt_h: 1.0, init_on: true }
    }
}

/// Shared commitment chain: hysteresis intent, a hold that forbids a second
/// stop within the spacing, and an hours-since-stop timer built from a unit
/// delay.
fn commitment_blocks(
    intent_src: &str,
    spacing_h: f64,
    dt_h: f64,
    init_on: bool,
) -> String {
    let init_u = if init_on { 1 } else { 0 };
    format!(
        "\
block uprev delay init={init_u}
block tprev delay init=1000000
block dth constant value={dt_h}
block tinc sum
block spacing constant value={spacing_h}
block recent comparator op=lt
block hold min
block u max
block stopraw sum wa=1 wb=-1
block zero constant value=0
block stoppos max
block notstop comparator op=le
block timer switch
connect {intent_src} -> u.a
connect uprev -> hold.a
connect recent -> hold.b
connect hold -> u.b
connect u -> uprev.in
connect tprev -> tinc.a
connect dth -> tinc.b
connect tprev -> recent.a
connect spacing -> recent.b
connect uprev -> stopraw.a
connect u -> stopraw.b
connect stopraw -> stoppos.a
connect zero -> stoppos.b
connect stoppos -> notstop.a
connect zero -> notstop.b
connect notstop -> timer.cond
connect tinc -> timer.a
connect zero -> timer.b
connect timer -> tprev.in
"
    )
}

/// The storage-feedback block chunk shared by both baselines: limits the
/// charge command by the remaining room and the discharge command by the
/// stored energy (both measured from the `energy` external input).
fn storage_limit_blocks(capacity_mwh: f64, dt_h: f64) -> String {
    let inv_dt = 1.0 / dt_h;
    format!(
        "\
block cap constant value={capacity_mwh}
block roomraw sum wa=1 wb=-1
block room gain k={inv_dt}
block chlim min
block avail gain k={inv_dt}
block availtot sum
connect cap -> roomraw.a
connect roomraw -> room.in
connect room -> chlim.b
connect pch -> availtot.b
"
    )
}

/// Text of the scenario-A baseline controller. Reads the measured load from
/// `load_slot` and the stored energy from `energy_slot`, writes
/// `ctl_prefix.u/.Pb/.Pch/.Pdis`.
pub fn rbc_baseline_a(
    params: &PlantParamsA,
    th: &RbcThresholdsA,
    load_slot: &str,
    energy_slot: &str,
    ctl_prefix: &str,
) -> String {
    let tau_s = th.filter_tau_h * 3600.0;
    let (on, off) = (th.on_load_mw, th.off_load_mw);
    let init_load = if th.init_on { on } else { 0.0 };
    let init_u = if th.init_on { 1 } else { 0 };
    let (bmax, bmin, stmax) = (params.biomass_max_mw, params.biomass_min_mw(), params.storage_max_mw);
    let commitment = commitment_blocks("want", params.min_stop_spacing_h, th.dt_h, th.init_on);
    let storage = storage_limit_blocks(params.storage_capacity_mwh, th.dt_h);
    format!(
        "\
# biomass commitment from the filtered load
block loadfilt filter tau={tau_s} init={init_load}
block want hysteresis on={on} off={off} init={init_u}
connect loadfilt -> want.in
{commitment}
# charge with the boiler's headroom, capped by the storage room,
# follow load plus charging
block biomax constant value={bmax}
block headroom sum wa=1 wb=-1
block chsat saturation lo=0 hi={stmax}
block pch switch
block loadch sum
block pbsat saturation lo={bmin} hi={bmax}
block pb switch
# discharge what the boiler cannot cover, capped by the stored energy
block deficit sum wa=1 wb=-1
block pdisraw saturation lo=0 hi={stmax}
block pdis min
{storage}
connect biomax -> headroom.a
connect headroom -> chsat.in
connect chsat -> chlim.a
connect u -> pch.cond
connect chlim -> pch.a
connect zero -> pch.b
connect pch -> loadch.b
connect loadch -> pbsat.in
connect u -> pb.cond
connect pbsat -> pb.a
connect zero -> pb.b
connect pb -> deficit.b
connect deficit -> pdisraw.in
connect pdisraw -> pdis.a
connect availtot -> pdis.b
input load -> loadfilt.in slot={load_slot} default={init_load}
input load -> headroom.b
input load -> loadch.a
input load -> deficit.a
input energy -> roomraw.b slot={energy_slot} default=0
input energy -> avail.in
connect avail -> availtot.a
output u = u slot={ctl_prefix}.u
output pb = pb slot={ctl_prefix}.Pb
output pch = pch slot={ctl_prefix}.Pch
output pdis = pdis slot={ctl_prefix}.Pdis
"
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbcThresholdsB {
    /// Electricity price below which the heat pump carries the load, €/MWh.
    pub price_threshold: f64,
    /// Filtered residual at which the biomass boiler is committed, MW.
    pub on_residual_mw: f64,
    pub off_residual_mw: f64,
    pub filter_tau_h: f64,
    pub dt_h: f64,
    pub init_on: bool,
}

impl Default for RbcThresholdsB {
    fn default() -> Self {
        Self {
            // biomass price x COP: below this the heat pump heat is cheaper
            price_threshold: 90.0,
            on_residual_mw: 1.0,
            off_residual_mw: 0.4,
            filter_tau_h: 1.0,
            dt_h: 0.25,
            init_on: false,
        }
    }
}

/// Text of the scenario-B baseline controller: scenario-A rules applied to
/// the residual left after the price-threshold heat-pump rule.
pub fn rbc_baseline_b(
    params: &PlantParamsB,
    th: &RbcThresholdsB,
    load_slot: &str,
    price_slot: &str,
    energy_slot: &str,
    ctl_prefix: &str,
) -> String {
    let tau_s = th.filter_tau_h * 3600.0;
    let (on, off) = (th.on_residual_mw, th.off_residual_mw);
    let init_u = if th.init_on { 1 } else { 0 };
    let init_res = if th.init_on { on } else { 0.0 };
    let thr = th.price_threshold;
    let (bmax, bmin, stmax, hpmax) = (
        params.biomass_max_mw,
        params.biomass_min_mw(),
        params.storage_max_mw,
        params.hp_max_mw,
    );
    let commitment = commitment_blocks("want", params.min_stop_spacing_h, th.dt_h, th.init_on);
    let storage = storage_limit_blocks(params.storage_capacity_mwh, th.dt_h);
    format!(
        "\
# cheap electricity: the heat pump carries the load
block thresh constant value={thr}
block cheap comparator op=lt
block hpsat saturation lo=0 hi={hpmax}
block hptarget switch
block residual sum wa=1 wb=-1
connect thresh -> cheap.b
connect cheap -> hptarget.cond
connect hpsat -> hptarget.a
connect hptarget -> residual.b
# biomass commitment from the filtered residual
block resfilt filter tau={tau_s} init={init_res}
block want hysteresis on={on} off={off} init={init_u}
connect residual -> resfilt.in
connect resfilt -> want.in
{commitment}
connect zero -> hptarget.b
# charge with the boiler's headroom (capped by the storage room), follow
# the residual plus charging
block biomax constant value={bmax}
block headroom sum wa=1 wb=-1
block chsat saturation lo=0 hi={stmax}
block pch switch
block resch sum
block pbsat saturation lo={bmin} hi={bmax}
block pb switch
block served sum
block deficit sum wa=1 wb=-1
block pdisraw saturation lo=0 hi={stmax}
block pdis min
{storage}
connect biomax -> headroom.a
connect residual -> headroom.b
connect headroom -> chsat.in
connect chsat -> chlim.a
connect u -> pch.cond
connect chlim -> pch.a
connect zero -> pch.b
connect residual -> resch.a
connect pch -> resch.b
connect resch -> pbsat.in
connect u -> pb.cond
connect pbsat -> pb.a
connect zero -> pb.b
connect hptarget -> served.a
connect pb -> served.b
connect served -> deficit.b
connect deficit -> pdisraw.in
connect pdisraw -> pdis.a
connect availtot -> pdis.b
input load -> hpsat.in slot={load_slot} default=0
input load -> residual.a
input load -> deficit.a
input price -> cheap.a slot={price_slot} default={thr}
input energy -> roomraw.b slot={energy_slot} default=0
input energy -> avail.in
connect avail -> availtot.a
output u = u slot={ctl_prefix}.u
output pb = pb slot={ctl_prefix}.Pb
output pch = pch slot={ctl_prefix}.Pch
output pdis = pdis slot={ctl_prefix}.Pdis
"
    )
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::logic::{compile, parse_logic_model, step};

    fn run_a(loads: &[f64], energy: f64, th: &RbcThresholdsA) -> Vec<BTreeMap<String, f64>> {
        let params = PlantParamsA::default();
        let text = rbc_baseline_a(&params, th, "plant.load", "plant.E", "ctl");
        let g = parse_logic_model(&text).unwrap();
        let plan = compile(&g).unwrap();
        let mut states = plan.initial_states(&g);
        let dt_s = th.dt_h * 3600.0;
        loads
            .iter()
            .map(|&l| {
                let mut ext = BTreeMap::new();
                ext.insert("load".to_string(), l);
                ext.insert("energy".to_string(), energy);
                step(&g, &plan, &mut states, &ext, dt_s).unwrap().outputs
            })
            .collect()
    }

    #[test]
    fn template_compiles() {
        let a = rbc_baseline_a(&PlantParamsA::default(), &RbcThresholdsA::default(), "plant.load", "plant.E", "ctl");
        let ga = parse_logic_model(&a).unwrap();
        compile(&ga).unwrap();
        let b = rbc_baseline_b(
            &PlantParamsB::default(),
            &RbcThresholdsB::default(),
            "plant.load",
            "plant.price_el",
            "plant.E",
            "ctl",
        );
        let gb = parse_logic_model(&b).unwrap();
        compile(&gb).unwrap();
    }

    #[test]
    fn high_load_keeps_biomass_at_max() {
        let outs = run_a(&[5.0; 6], 2.0, &RbcThresholdsA::default());
        for o in &outs {
            assert_eq!(o["u"], 1.0);
            assert_eq!(o["pb"], 3.05);
            assert_eq!(o["pch"], 0.0); // no headroom
            // boiler cannot cover 5 MW: discharge at the storage rating
            assert_eq!(o["pdis"], 1.0);
        }
    }

    #[test]
    fn sustained_low_load_releases_the_boiler() {
        // start committed, then the load collapses; the 3 h filter delays
        // the release, after which biomass output drops to zero
        let th = RbcThresholdsA::default();
        let outs = run_a(&[3.0, 3.0, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2], 0.0, &th);
        assert_eq!(outs[0]["u"], 1.0);
        let last = outs.last().unwrap();
        assert_eq!(last["u"], 0.0, "boiler should be released after sustained low load");
        assert_eq!(last["pb"], 0.0);
    }

    #[test]
    fn moderate_load_charges_with_headroom() {
        let outs = run_a(&[2.0; 4], 0.0, &RbcThresholdsA::default());
        let o = outs.last().unwrap();
        assert_eq!(o["u"], 1.0);
        // headroom 3.05 - 2.0 = 1.05, clipped to the 1 MW storage rating
        assert_eq!(o["pch"], 1.0);
        assert_eq!(o["pb"], 3.0); // load + charge
        assert_eq!(o["pdis"], 0.0);
    }

    #[test]
    fn stop_spacing_hold_delays_second_stop() {
        // dt 1 h, spacing 10 h; drive the boiler off, back on, then off
        // again quickly: the second release must wait for the spacing
        let th = RbcThresholdsA { filter_tau_h: 1e-6, ..Default::default() };
        let mut loads = vec![3.0, 0.2]; // stop at step 1
        loads.extend([3.0, 3.0]); // restart
        loads.extend([0.2; 12]); // wants to stop again immediately
        let outs = run_a(&loads, 0.0, &th);
        assert_eq!(outs[1]["u"], 0.0, "first stop");
        assert_eq!(outs[2]["u"], 1.0, "restart");
        // the stop at step 1 started the 10 h timer; u must stay 1 until the
        // timer passes 10 h (reached during step 11), despite the low load
        for (k, o) in outs.iter().enumerate().take(11).skip(4) {
            assert_eq!(o["u"], 1.0, "step {k} must hold the boiler on: {o:?}");
        }
        assert_eq!(outs.last().unwrap()["u"], 0.0, "released after the spacing");
    }

    #[test]
    fn price_threshold_prefers_heat_pump_when_cheap() {
        let params = PlantParamsB::default();
        let th = RbcThresholdsB::default();
        let text = rbc_baseline_b(&params, &th, "plant.load", "plant.price_el", "plant.E", "ctl");
        let g = parse_logic_model(&text).unwrap();
        let plan = compile(&g).unwrap();
        let mut states = plan.initial_states(&g);
        let mut ext = BTreeMap::new();
        ext.insert("load".to_string(), 1.5);
        ext.insert("energy".to_string(), 0.0);
        ext.insert("price".to_string(), 40.0); // cheap: 40 < 90
        let out = step(&g, &plan, &mut states, &ext, 900.0).unwrap().outputs;
        assert_eq!(out["u"], 0.0, "biomass stays off while electricity is cheap");
        assert_eq!(out["pb"], 0.0);

        // expensive electricity: the residual is the full load, biomass commits
        let mut states = plan.initial_states(&g);
        ext.insert("price".to_string(), 120.0);
        let mut out = BTreeMap::new();
        for _ in 0..8 {
            out = step(&g, &plan, &mut states, &ext, 900.0).unwrap().outputs;
        }
        assert_eq!(out["u"], 1.0);
        assert!((out["pb"] - 1.5).abs() < 1e-9 || out["pb"] > 1.5, "biomass carries the load: {out:?}");
    }
}

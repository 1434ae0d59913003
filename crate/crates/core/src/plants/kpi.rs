//! Techno-economic indicators computed from recorded run results.

use std::collections::BTreeMap;
use std::fmt;

use crate::engine::RunResults;

/// Where to find the relevant series in the recorded results.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiConfig {
    /// Step length behind each recorded sample, hours.
    pub dt_h: f64,
    /// `(display name, slot)` pairs of per-source power series, MW.
    pub sources: Vec<(String, String)>,
    /// Sources counted toward the renewable share (by display name).
    pub renewable_sources: Vec<String>,
    pub renewable_share_target: f64,
    pub load_slot: String,
    /// €/h series.
    pub cost_rate_slot: String,
    /// Slots whose nonzero samples count as violations (MW or MWh scale).
    pub violation_slots: Vec<String>,
    /// 0/1 series marking generator stop events, if tracked.
    pub stop_slot: Option<String>,
    /// Diagnostics prefix of an MPC module (`<prefix>.nodes` etc.), if any.
    pub mpc_prefix: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub iterations: usize,
    pub total_nodes: f64,
    pub max_wall_ms: f64,
    pub total_wall_ms: f64,
    /// Iterations that did not end proven optimal.
    pub non_optimal: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpiReport {
    /// Energy produced per source over the run, MWh.
    pub energies_mwh: BTreeMap<String, f64>,
    pub total_production_mwh: f64,
    pub total_load_mwh: f64,
    /// Renewable production / total production.
    pub renewable_share: f64,
    pub renewable_share_target: f64,
    pub total_cost: f64,
    /// Steps where at least one violation slot is nonzero.
    pub violation_count: usize,
    /// Sum of absolute violation magnitudes (slot units x hours).
    pub violation_magnitude: f64,
    pub stop_count: usize,
    pub solver: Option<SolverStats>,
}

const VIOLATION_TOL: f64 = 1e-9;

pub fn compute_kpis(results: &RunResults, config: &KpiConfig) -> KpiReport {
    let sum_energy = |slot: &str| -> f64 {
        results
            .slot(slot)
            .map(|(_, v)| v.iter().sum::<f64>() * config.dt_h)
            .unwrap_or(0.0)
    };

    let mut energies = BTreeMap::new();
    for (name, slot) in &config.sources {
        energies.insert(name.clone(), sum_energy(slot));
    }
    let total_production: f64 = energies.values().sum();
    let renewable: f64 = config
        .renewable_sources
        .iter()
        .filter_map(|n| energies.get(n))
        .sum();

    let total_cost = sum_energy(&config.cost_rate_slot); // €/h x h

    let mut violation_magnitude = 0.0;
    // count per step across all violation slots (slots share the tick grid)
    let mut violated_ticks: BTreeMap<i64, bool> = BTreeMap::new();
    for slot in &config.violation_slots {
        if let Some((t, v)) = results.slot(slot) {
            for (&ti, &vi) in t.iter().zip(v) {
                if vi.abs() > VIOLATION_TOL {
                    *violated_ticks.entry(ti).or_insert(false) |= true;
                    violation_magnitude += vi.abs() * config.dt_h;
                }
            }
        }
    }
    let violation_count = violated_ticks.values().filter(|&&b| b).count();

    let stop_count = config
        .stop_slot
        .as_deref()
        .and_then(|s| results.slot(s))
        .map(|(_, v)| v.iter().filter(|&&x| x > 0.5).count())
        .unwrap_or(0);

    let solver = config.mpc_prefix.as_deref().and_then(|p| {
        let (_, nodes) = results.slot(&format!("{p}.nodes"))?;
        let (_, wall) = results.slot(&format!("{p}.wall_ms"))?;
        let (_, status) = results.slot(&format!("{p}.status"))?;
        Some(SolverStats {
            iterations: nodes.len(),
            total_nodes: nodes.iter().sum(),
            max_wall_ms: wall.iter().cloned().fold(0.0, f64::max),
            total_wall_ms: wall.iter().sum(),
            non_optimal: status.iter().filter(|&&s| s != 0.0).count(),
        })
    });

    KpiReport {
        energies_mwh: energies,
        total_production_mwh: total_production,
        total_load_mwh: sum_energy(&config.load_slot),
        renewable_share: if total_production > 0.0 { renewable / total_production } else { 0.0 },
        renewable_share_target: config.renewable_share_target,
        total_cost,
        violation_count,
        violation_magnitude,
        stop_count,
        solver,
    }
}

impl fmt::Display for KpiReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "energy production by source:")?;
        for (name, e) in &self.energies_mwh {
            writeln!(f, "  {name:<12} {e:12.1} MWh")?;
        }
        writeln!(f, "total production  {:12.1} MWh", self.total_production_mwh)?;
        writeln!(f, "total load        {:12.1} MWh", self.total_load_mwh)?;
        writeln!(
            f,
            "renewable share   {:12.1} %   (target {:.0} %)",
            100.0 * self.renewable_share,
            100.0 * self.renewable_share_target
        )?;
        writeln!(f, "operational cost  {:12.0} EUR", self.total_cost)?;
        writeln!(f, "violations        {:6} steps, magnitude {:.3}", self.violation_count, self.violation_magnitude)?;
        writeln!(f, "generator stops   {:6}", self.stop_count)?;
        if let Some(s) = &self.solver {
            writeln!(
                f,
                "solver            {} iterations, {} nodes, max {:.0} ms, total {:.1} s, {} not proven optimal",
                s.iterations,
                s.total_nodes,
                s.max_wall_ms,
                s.total_wall_ms / 1e3,
                s.non_optimal
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RunResults;

    fn results_with(series: &[(&str, &[f64])]) -> RunResults {
        let mut r = RunResults::default();
        for (slot, values) in series {
            let times: Vec<i64> = (0..values.len() as i64).collect();
            r.series.insert(slot.to_string(), (times, values.to_vec()));
        }
        r
    }

    fn config() -> KpiConfig {
        KpiConfig {
            dt_h: 1.0,
            sources: vec![
                ("biomass".into(), "plant.Pb".into()),
                ("gas".into(), "plant.Pg".into()),
            ],
            renewable_sources: vec!["biomass".into()],
            renewable_share_target: 0.6,
            load_slot: "plant.load".into(),
            cost_rate_slot: "plant.cost_rate".into(),
            violation_slots: vec!["plant.violation".into()],
            stop_slot: Some("plant.stop".into()),
            mpc_prefix: None,
        }
    }

    #[test]
    fn shares_and_energies_from_definitions() {
        let r = results_with(&[
            ("plant.Pb", &[3.0, 3.0]),
            ("plant.Pg", &[1.0, 3.0]),
            ("plant.load", &[4.0, 6.0]),
            ("plant.cost_rate", &[125.0, 195.0]),
            ("plant.violation", &[0.0, 0.0]),
            ("plant.stop", &[0.0, 1.0]),
        ]);
        let k = compute_kpis(&r, &config());
        assert_eq!(k.energies_mwh["biomass"], 6.0);
        assert_eq!(k.energies_mwh["gas"], 4.0);
        assert_eq!(k.renewable_share, 0.6);
        assert_eq!(k.total_cost, 320.0);
        assert_eq!(k.violation_count, 0);
        assert_eq!(k.stop_count, 1);
    }

    #[test]
    fn violations_counted_per_step() {
        let r = results_with(&[
            ("plant.Pb", &[1.0]),
            ("plant.Pg", &[0.0]),
            ("plant.load", &[1.0]),
            ("plant.cost_rate", &[30.0]),
            ("plant.violation", &[0.0, -0.5, 0.0, 0.25]),
        ]);
        let k = compute_kpis(&r, &config());
        assert_eq!(k.violation_count, 2);
        assert!((k.violation_magnitude - 0.75).abs() < 1e-12);
    }
}

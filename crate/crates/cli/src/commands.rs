//! Implementations of the `cosim` subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use cosim_core::engine::{ConvergenceReport, EngineError, ModuleError, RunResults};
use cosim_core::milp::{solve_milp, LinExpr, MilpOptions, MilpProblem, Sense, VarKind};
use cosim_core::plants::{
    compute_kpis, formulate_scenario_a, formulate_scenario_b, generate_synthetic_load,
    KpiReport, PlantParamsA, PlantParamsB, PlantStateA, PlantStateB, SyntheticLoadSpec,
};
use cosim_core::scenario::{build_simulation, ControlKind, Scenario, ScenarioError};

/// Command failure, classified to match the documented exit codes:
/// 2 validation, 3 runtime, 4 solver infeasible.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) | CliError::Infeasible(m) => m,
        }
    }
}

fn classify(err: ScenarioError) -> CliError {
    match err {
        ScenarioError::Invalid(_)
        | ScenarioError::Parse(_)
        | ScenarioError::UnknownVariant(_)
        | ScenarioError::Io(_) => CliError::Validation(err.to_string()),
        ScenarioError::Engine(ref e) => classify_engine(e, &err),
        other => CliError::Runtime(other.to_string()),
    }
}

fn classify_engine(e: &EngineError, display: &dyn std::fmt::Display) -> CliError {
    if let EngineError::ModuleStepFailure { source: ModuleError::SolverInfeasible(_), .. } = e {
        CliError::Infeasible(display.to_string())
    } else {
        CliError::Runtime(display.to_string())
    }
}

/// Shared flags: output directory and scenario-wide overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub gap: Option<f64>,
}

impl RunOptions {
    fn out_dir(&self) -> &Path {
        self.out.as_deref().unwrap_or(Path::new("out"))
    }
}

struct LoadedScenario {
    scenario: Scenario,
    text: String,
    /// SHA-256 of the scenario file, embedded in reports so a result can be
    /// traced back to the exact scenario text that produced it.
    hash: String,
    base_dir: PathBuf,
}

fn load(path: &Path, options: &RunOptions) -> Result<LoadedScenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    let scenario = Scenario::from_str(&text).map_err(classify)?;
    let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut loaded = LoadedScenario { scenario, text, hash, base_dir };
    apply_overrides(&mut loaded.scenario, options);
    Ok(loaded)
}

fn apply_overrides(scenario: &mut Scenario, options: &RunOptions) {
    if options.seed.is_some() {
        scenario.seed = options.seed;
    }
    if options.gap.is_some() {
        scenario.control.solver.gap = options.gap;
    }
}

pub fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let loaded = load(path, &RunOptions::default())?;
    let mut errs = loaded.scenario.validate(&loaded.base_dir);
    for name in loaded.scenario.variants.keys() {
        match Scenario::variant_of(&loaded.text, name) {
            Ok(v) => errs.extend(
                v.validate(&loaded.base_dir).into_iter().map(|e| format!("variants.{name}: {e}")),
            ),
            Err(e) => errs.push(format!("variants.{name}: {e}")),
        }
    }
    if errs.is_empty() {
        println!("ok: {}", loaded.scenario.name);
        Ok(())
    } else {
        for e in &errs {
            eprintln!("error: {e}");
        }
        Err(CliError::Validation(format!("{} validation error(s)", errs.len())))
    }
}

struct RunOutcome {
    results: RunResults,
    kpis: KpiReport,
    wall_s: f64,
}

fn execute(loaded: &LoadedScenario, scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", out_dir.display())))?;
    let built = build_simulation(scenario, &loaded.base_dir, Some(out_dir)).map_err(classify)?;
    let started = Instant::now();
    let results = built
        .simulation
        .run(built.t_end)
        .map_err(|e| classify_engine(&e, &e))?;
    let wall_s = started.elapsed().as_secs_f64();
    let kpis = compute_kpis(&results, &built.kpi);
    Ok(RunOutcome { results, kpis, wall_s })
}

/// Writes per-probe series CSVs, the KPI CSV, and a human-readable report.
/// Wall-clock series are skipped so reruns stay byte-identical.
fn write_outputs(
    loaded: &LoadedScenario,
    scenario: &Scenario,
    outcome: &RunOutcome,
    out_dir: &Path,
) -> Result<(), CliError> {
    let io_err = |p: &Path| {
        let p = p.display().to_string();
        move |e: std::io::Error| CliError::Runtime(format!("{p}: {e}"))
    };

    let slots: Vec<&String> = if scenario.probes.is_empty() {
        outcome.results.series.keys().collect()
    } else {
        scenario.probes.iter().collect()
    };
    for slot in slots {
        if slot.ends_with(".wall_ms") {
            continue;
        }
        let Some((times, values)) = outcome.results.slot(slot) else {
            return Err(CliError::Runtime(format!("probe slot {slot:?} was never written")));
        };
        let mut csv = String::from("time,value\n");
        for (t, v) in times.iter().zip(values) {
            writeln!(csv, "{t},{v}").expect("write to string");
        }
        let path = out_dir.join(format!("{slot}.csv"));
        std::fs::write(&path, csv).map_err(io_err(&path))?;
    }

    let path = out_dir.join("kpis.csv");
    std::fs::write(&path, kpi_csv(&outcome.kpis)).map_err(io_err(&path))?;

    let mut report = String::new();
    let _ = writeln!(report, "scenario          {}", scenario.name);
    let _ = writeln!(report, "file sha256       {}", loaded.hash);
    let _ = writeln!(report, "seed              {}", scenario.seed());
    let _ = writeln!(report, "ticks             {}", outcome.results.n_ticks);
    let _ = writeln!(report, "run wall time     {:.2} s", outcome.wall_s);
    let _ = writeln!(report);
    let _ = write!(report, "{}", outcome.kpis);
    let path = out_dir.join("report.txt");
    std::fs::write(&path, &report).map_err(io_err(&path))?;
    print!("{report}");
    Ok(())
}

fn kpi_csv(k: &KpiReport) -> String {
    let mut csv = String::from("kpi,value\n");
    for (name, e) in &k.energies_mwh {
        let _ = writeln!(csv, "energy_{name}_mwh,{e}");
    }
    let _ = writeln!(csv, "total_production_mwh,{}", k.total_production_mwh);
    let _ = writeln!(csv, "total_load_mwh,{}", k.total_load_mwh);
    let _ = writeln!(csv, "renewable_share,{}", k.renewable_share);
    let _ = writeln!(csv, "total_cost,{}", k.total_cost);
    let _ = writeln!(csv, "violation_count,{}", k.violation_count);
    let _ = writeln!(csv, "violation_magnitude,{}", k.violation_magnitude);
    let _ = writeln!(csv, "stop_count,{}", k.stop_count);
    csv
}

pub fn cmd_run(path: &Path, options: &RunOptions) -> Result<(), CliError> {
    let loaded = load(path, options)?;
    let outcome = execute(&loaded, &loaded.scenario, options.out_dir())?;
    write_outputs(&loaded, &loaded.scenario, &outcome, options.out_dir())
}

/// Like `run`, but with the MPC controller active regardless of the
/// scenario's declared control kind.
pub fn cmd_mpc(path: &Path, options: &RunOptions) -> Result<(), CliError> {
    let loaded = load(path, options)?;
    let mut scenario = loaded.scenario.clone();
    scenario.control.kind = ControlKind::Mpc;
    let outcome = execute(&loaded, &scenario, options.out_dir())?;
    write_outputs(&loaded, &scenario, &outcome, options.out_dir())
}

/// Runs the scenario as declared plus every named variant on identical data,
/// then reports KPI deltas against the base run.
pub fn cmd_compare(path: &Path, options: &RunOptions) -> Result<(), CliError> {
    let loaded = load(path, options)?;
    if loaded.scenario.variants.is_empty() {
        return Err(CliError::Validation(
            "compare needs at least one [variants.<name>] block".into(),
        ));
    }

    let out_root = options.out_dir().to_path_buf();
    let mut runs: Vec<(String, KpiReport)> = Vec::new();
    let base = execute(&loaded, &loaded.scenario, &out_root.join("base"))?;
    write_outputs(&loaded, &loaded.scenario, &base, &out_root.join("base"))?;
    runs.push(("base".into(), base.kpis));

    for name in loaded.scenario.variants.keys() {
        let mut variant = Scenario::variant_of(&loaded.text, name).map_err(classify)?;
        apply_overrides(&mut variant, options);
        let out = out_root.join(name);
        let outcome = execute(&loaded, &variant, &out)?;
        write_outputs(&loaded, &variant, &outcome, &out)?;
        runs.push((name.clone(), outcome.kpis));
    }

    let mut csv = String::from(
        "run,total_cost,renewable_share,violation_count,stop_count,delta_cost,delta_share\n",
    );
    let base_kpis = runs[0].1.clone();
    println!("\ncomparison vs base:");
    for (name, k) in &runs {
        let d_cost = k.total_cost - base_kpis.total_cost;
        let d_share = k.renewable_share - base_kpis.renewable_share;
        let _ = writeln!(
            csv,
            "{name},{},{},{},{},{d_cost},{d_share}",
            k.total_cost, k.renewable_share, k.violation_count, k.stop_count
        );
        println!(
            "  {name:<16} cost {:10.0} EUR ({d_cost:+8.0})   share {:5.1} % ({:+.2} pp)",
            k.total_cost,
            100.0 * k.renewable_share,
            100.0 * d_share
        );
    }
    let path = out_root.join("comparison.csv");
    std::fs::write(&path, csv).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Runs the scenario at successively finer coupling periods (base period
/// divided by each multiplier) and reports the probes' final values.
pub fn cmd_convergence(
    path: &Path,
    multipliers: &[u64],
    options: &RunOptions,
) -> Result<(), CliError> {
    let loaded = load(path, options)?;
    let base_period = loaded.scenario.engine.base_period;
    let probes: Vec<String> = if loaded.scenario.probes.is_empty() {
        vec!["plant.E".into()]
    } else {
        loaded.scenario.probes.clone()
    };

    let mut report = ConvergenceReport {
        multipliers: multipliers.to_vec(),
        final_values: Default::default(),
        diffs: Default::default(),
    };
    for &m in multipliers {
        if m == 0 || base_period % m as i64 != 0 {
            return Err(CliError::Validation(format!(
                "multiplier {m} does not divide engine.base_period ({base_period})"
            )));
        }
        let mut scenario = loaded.scenario.clone();
        scenario.engine.base_period = base_period / m as i64;
        let outcome = execute(&loaded, &scenario, options.out_dir())?;
        for probe in &probes {
            let v = outcome.results.final_value(probe).ok_or_else(|| {
                CliError::Runtime(format!("probe slot {probe:?} was never written"))
            })?;
            report.final_values.entry(probe.clone()).or_default().push(v);
        }
    }
    for (slot, vals) in &report.final_values {
        report
            .diffs
            .insert(slot.clone(), vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect());
    }

    let mut csv = String::from("slot,multiplier,final_value,diff_to_previous\n");
    println!("coupling-period refinement (base period / multiplier):");
    for (slot, vals) in &report.final_values {
        for (i, (&m, v)) in report.multipliers.iter().zip(vals).enumerate() {
            let diff = if i == 0 { String::new() } else { report.diffs[slot][i - 1].to_string() };
            let _ = writeln!(csv, "{slot},{m},{v},{diff}");
            println!("  {slot:<20} /{m:<3} final {v:14.6}  diff {diff}");
        }
    }
    let out = options.out_dir();
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    let path = out.join("convergence.csv");
    std::fs::write(&path, csv).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Timing table: large-model build cost and the daily scheduling problems of
/// both reference plants.
pub fn cmd_benchmark(options: &RunOptions) -> Result<(), CliError> {
    let mut rows: Vec<(String, String)> = Vec::new();

    // 10,000 variables, 20,000 nonzeros spread over 5,000 constraints
    let t0 = Instant::now();
    let mut p = MilpProblem::new();
    let mut vars = Vec::with_capacity(10_000);
    for i in 0..10_000usize {
        vars.push(
            p.add_var(format!("x{i}"), VarKind::Continuous, 0.0, 10.0)
                .map_err(|e| CliError::Runtime(e.to_string()))?,
        );
    }
    for c in 0..5_000usize {
        let mut expr = LinExpr::new();
        for k in 0..4 {
            expr += (k + 1) as f64 * LinExpr::var(vars[(4 * c + k) % 10_000]);
        }
        p.add_constraint(expr, Sense::Le, 100.0).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;
    rows.push((
        format!("build {} vars / {} nonzeros", p.num_vars(), p.num_nonzeros()),
        format!("{build_ms:.1} ms"),
    ));

    // daily scheduling problem, plant A (48 hourly steps)
    let load_tv = generate_synthetic_load(&SyntheticLoadSpec::default())
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let load: Vec<f64> = load_tv.values()[..48].to_vec();
    let state = PlantStateA { u: true, e_mwh: 1.0, ..Default::default() };
    let t0 = Instant::now();
    let (pa, _) = formulate_scenario_a(&state, &load, &PlantParamsA::default(), 1.0)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let form_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t0 = Instant::now();
    let sol = solve_milp(&pa, &MilpOptions::default()).map_err(|e| CliError::Runtime(e.to_string()))?;
    let solve_ms = t0.elapsed().as_secs_f64() * 1e3;
    rows.push((
        format!(
            "plant A 48-step window ({} vars, {} rows)",
            pa.num_vars(),
            pa.num_constraints()
        ),
        format!("build {form_ms:.1} ms, solve {solve_ms:.1} ms ({:?}, {} nodes)", sol.status, sol.nodes),
    ));

    // plant B 96-step formulation size check
    let t0 = Instant::now();
    let (pb, _) = formulate_scenario_b(
        &PlantStateB::default(),
        &vec![1.0; 96],
        &vec![60.0; 96],
        &PlantParamsB::default(),
        0.25,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let form_ms = t0.elapsed().as_secs_f64() * 1e3;
    rows.push((
        format!(
            "plant B 96-step window ({} continuous, {} binary, {} rows)",
            pb.num_continuous(),
            pb.num_binaries(),
            pb.num_constraints()
        ),
        format!("build {form_ms:.1} ms"),
    ));

    let mut csv = String::from("benchmark,result\n");
    println!("benchmarks:");
    for (name, result) in &rows {
        let _ = writeln!(csv, "\"{name}\",\"{result}\"");
        println!("  {name:<55} {result}");
    }
    if let Some(out) = &options.out {
        std::fs::create_dir_all(out)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
        let path = out.join("benchmark.csv");
        std::fs::write(&path, csv)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

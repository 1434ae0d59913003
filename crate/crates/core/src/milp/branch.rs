//! Branch-and-bound over binary variables.
//!
//! Node selection dives depth-first until the first incumbent, then switches
//! to best-bound. Branching picks the first fractional binary in variable
//! order; the child fixing the binary to its rounded LP value is explored
//! first. All tie-breaking is deterministic, so repeated solves of the same
//! problem return the same solution.
//!
//! Node and time limits only take effect once an incumbent exists, so a
//! truncated solve still returns a feasible plan (rolling-horizon callers
//! rely on this).

use std::time::{Duration, Instant};

use super::model::{MilpError, MilpProblem, VarId};
use super::simplex::{solve_lp_bounded, LpStatus};
use super::{GAP_TOL, INT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Stopped at the time limit; carries the incumbent and remaining gap.
    GapLimit,
    /// Stopped at the node limit; carries the incumbent and remaining gap.
    NodeLimit,
}

#[derive(Debug, Clone)]
pub struct MilpOptions {
    /// Absolute bound-gap tolerance: the search stops as optimal once
    /// `incumbent - best bound <= gap_tol`.
    pub gap_tol: f64,
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self { gap_tol: GAP_TOL, node_limit: 1_000_000, time_limit: None }
    }
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// One value per problem variable; empty when no incumbent exists.
    pub values: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    pub nodes: u64,
    pub wall_time: Duration,
}

struct Node {
    id: u64,
    depth: u32,
    /// LP bound of the parent (a valid lower bound for this node too).
    bound: f64,
    /// (binary var, fixed value) pairs along the path from the root.
    fixings: Vec<(VarId, f64)>,
}

pub fn solve_milp(problem: &MilpProblem, options: &MilpOptions) -> Result<MilpSolution, MilpError> {
    let start = Instant::now();
    let base_lb: Vec<f64> = problem.variables().iter().map(|v| v.lb).collect();
    let base_ub: Vec<f64> = problem.variables().iter().map(|v| v.ub).collect();

    let mut open: Vec<Node> = vec![Node { id: 0, depth: 0, bound: f64::NEG_INFINITY, fixings: vec![] }];
    let mut next_id = 1u64;
    let mut nodes_explored = 0u64;
    let mut incumbent: Option<(Vec<f64>, f64)> = None;

    let finish = |status: MilpStatus,
                  incumbent: Option<(Vec<f64>, f64)>,
                  best_bound: f64,
                  nodes: u64,
                  start: Instant| {
        let (values, objective) = incumbent.unwrap_or((vec![], f64::INFINITY));
        MilpSolution { status, values, objective, best_bound, nodes, wall_time: start.elapsed() }
    };

    loop {
        // prune nodes dominated by the incumbent
        if let Some((_, inc_obj)) = &incumbent {
            open.retain(|n| n.bound < inc_obj - options.gap_tol);
        }

        let best_open = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
        if open.is_empty() {
            let status = if incumbent.is_some() { MilpStatus::Optimal } else { MilpStatus::Infeasible };
            let bound = incumbent.as_ref().map(|(_, o)| *o).unwrap_or(f64::INFINITY);
            return Ok(finish(status, incumbent, bound, nodes_explored, start));
        }
        if let Some((_, inc_obj)) = &incumbent {
            if inc_obj - best_open <= options.gap_tol {
                return Ok(finish(MilpStatus::Optimal, incumbent, best_open, nodes_explored, start));
            }
        }
        // limits are deferred until an incumbent exists so truncated solves
        // always carry a feasible plan
        if incumbent.is_some() {
            if nodes_explored >= options.node_limit {
                return Ok(finish(MilpStatus::NodeLimit, incumbent, best_open, nodes_explored, start));
            }
            if let Some(limit) = options.time_limit {
                if start.elapsed() >= limit {
                    return Ok(finish(MilpStatus::GapLimit, incumbent, best_open, nodes_explored, start));
                }
            }
        }

        // node selection: dive while no incumbent, then best bound
        let pick = if incumbent.is_none() {
            // deepest node, newest first (LIFO dive)
            (0..open.len())
                .max_by(|&a, &b| {
                    (open[a].depth, open[a].id).cmp(&(open[b].depth, open[b].id))
                })
                .unwrap()
        } else {
            (0..open.len())
                .min_by(|&a, &b| {
                    open[a]
                        .bound
                        .partial_cmp(&open[b].bound)
                        .unwrap()
                        .then(open[a].id.cmp(&open[b].id))
                })
                .unwrap()
        };
        let node = open.swap_remove(pick);
        nodes_explored += 1;

        let mut lb = base_lb.clone();
        let mut ub = base_ub.clone();
        for &(v, val) in &node.fixings {
            lb[v] = val;
            ub[v] = val;
        }
        let relax = solve_lp_bounded(problem, &lb, &ub)?;
        match relax.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                // with finite variable bounds this cannot happen, but report
                // it faithfully if it ever does at the root
                if node.depth == 0 {
                    return Ok(finish(MilpStatus::Unbounded, None, f64::NEG_INFINITY, nodes_explored, start));
                }
                continue;
            }
            LpStatus::Optimal => {}
        }
        if let Some((_, inc_obj)) = &incumbent {
            if relax.objective >= inc_obj - options.gap_tol {
                continue;
            }
        }

        // first fractional binary in index order; on staged problems (e.g.
        // unit commitment built period by period) this fixes early decisions
        // first and lets the relaxation repair the later periods, which gives
        // far better dive incumbents than most-fractional branching
        let mut branch_var: Option<(VarId, f64)> = None;
        for v in problem.binary_ids() {
            let frac = (relax.values[v] - relax.values[v].round()).abs();
            if frac > INT_TOL {
                branch_var = Some((v, relax.values[v]));
                break;
            }
        }

        match branch_var {
            None => {
                // integral: candidate incumbent (round binaries exactly)
                let mut values = relax.values;
                for v in problem.binary_ids() {
                    values[v] = values[v].round();
                }
                let better = incumbent
                    .as_ref()
                    .map_or(true, |(_, obj)| relax.objective < *obj);
                if better {
                    incumbent = Some((values, relax.objective));
                }
            }
            Some((v, x)) => {
                // rounding heuristic at the root: fix every binary at its
                // rounded relaxation value and solve one more LP; a feasible
                // result seeds the incumbent and lets near-integral instances
                // close in two LP solves instead of a full dive
                if node.depth == 0 && incumbent.is_none() {
                    let mut hlb = lb.clone();
                    let mut hub = ub.clone();
                    for b in problem.binary_ids() {
                        let r = relax.values[b].round().clamp(0.0, 1.0);
                        hlb[b] = r;
                        hub[b] = r;
                    }
                    let fixed = solve_lp_bounded(problem, &hlb, &hub)?;
                    if fixed.status == LpStatus::Optimal {
                        let mut values = fixed.values;
                        for b in problem.binary_ids() {
                            values[b] = values[b].round();
                        }
                        incumbent = Some((values, fixed.objective));
                    }
                }
                let first = x.round().clamp(0.0, 1.0);
                let second = 1.0 - first;
                for val in [second, first] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((v, val));
                    open.push(Node {
                        id: next_id,
                        depth: node.depth + 1,
                        bound: relax.objective,
                        fixings,
                    });
                    next_id += 1;
                }
            }
        }
    }
}

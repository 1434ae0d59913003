//! Bounded-variable primal simplex on a dense tableau.
//!
//! Two phases: phase 1 drives artificial variables (added only for rows whose
//! initial slack value violates its bounds) to zero, phase 2 minimizes the
//! true objective. Entering variables are picked by the Dantzig rule; after a
//! stall (no objective progress for a fixed number of iterations) the solver
//! switches to Bland's rule, which guarantees termination.

use super::model::{MilpError, MilpProblem, Sense};
use super::{FEAS_TOL, OPT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per problem variable; empty unless status is Optimal.
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Solves the LP relaxation of the problem (binaries relaxed to their bounds).
pub fn solve_lp(problem: &MilpProblem) -> Result<LpSolution, MilpError> {
    let lb: Vec<f64> = problem.variables().iter().map(|v| v.lb).collect();
    let ub: Vec<f64> = problem.variables().iter().map(|v| v.ub).collect();
    solve_lp_bounded(problem, &lb, &ub)
}

/// Solves the LP relaxation with overridden variable bounds (used by
/// branch-and-bound to fix binaries without rebuilding the problem).
pub fn solve_lp_bounded(
    problem: &MilpProblem,
    lb: &[f64],
    ub: &[f64],
) -> Result<LpSolution, MilpError> {
    for (l, u) in lb.iter().zip(ub) {
        if l > u {
            return Ok(LpSolution { status: LpStatus::Infeasible, values: vec![], objective: f64::INFINITY });
        }
    }
    Tableau::build(problem, lb, ub).solve(problem)
}

const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau {
    n_struct: usize,
    n_cols: usize,
    rows: Vec<Vec<f64>>,
    /// Bounds per column (slacks may be one-side infinite).
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Current value per column.
    x: Vec<f64>,
    state: Vec<ColState>,
    /// Basic column per row.
    basis: Vec<usize>,
    /// `B^-1 b`, kept in lockstep with the tableau rows.
    rhs: Vec<f64>,
    /// Reduced-cost row for the active phase.
    d: Vec<f64>,
    artificials: Vec<usize>,
    /// Objective change of the most recent step, for stall detection.
    last_step_change: Option<f64>,
}

impl Tableau {
    fn build(problem: &MilpProblem, var_lb: &[f64], var_ub: &[f64]) -> Tableau {
        let n = problem.num_vars();
        let m = problem.num_constraints();
        let mut x: Vec<f64> = var_lb.to_vec();
        let mut state = vec![ColState::AtLower; n];

        // structural variables start at the bound closer to zero (deterministic)
        for j in 0..n {
            if var_ub[j] < 0.0 || (var_lb[j] <= 0.0 && var_ub[j].abs() < var_lb[j].abs()) {
                x[j] = var_ub[j];
                state[j] = ColState::AtUpper;
            }
        }

        let mut t = Tableau {
            n_struct: n,
            n_cols: n + m,
            rows: Vec::with_capacity(m),
            lo: var_lb.to_vec(),
            hi: var_ub.to_vec(),
            x,
            state,
            basis: Vec::with_capacity(m),
            rhs: Vec::with_capacity(m),
            d: vec![],
            artificials: vec![],
            last_step_change: None,
        };

        // rows needing an artificial, with the sign of the residual gap
        let mut pending: Vec<(usize, f64)> = Vec::new();

        for (i, c) in problem.constraints().iter().enumerate() {
            let mut row = vec![0.0; n + m];
            for &(v, a) in &c.coeffs {
                row[v] += a;
            }
            let slack = n + i;
            row[slack] = 1.0;
            let (slo, shi) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            t.lo.push(slo);
            t.hi.push(shi);
            // value the slack must take given the nonbasic point
            let residual: f64 =
                c.rhs - c.coeffs.iter().map(|&(v, a)| a * t.x[v]).sum::<f64>();
            if residual >= slo - FEAS_TOL && residual <= shi + FEAS_TOL {
                t.x.push(residual.clamp(slo.max(f64::MIN), shi.min(f64::MAX)));
                t.state.push(ColState::Basic(i));
                t.basis.push(slack);
            } else {
                // slack parks at its nearest bound; an artificial absorbs the gap
                let parked = if residual < slo { slo } else { shi };
                t.x.push(parked);
                t.state.push(if residual < slo { ColState::AtLower } else { ColState::AtUpper });
                pending.push((i, residual - parked));
                t.basis.push(usize::MAX); // patched below
            }
            t.rhs.push(c.rhs);
            t.rows.push(row);
        }

        // append artificial columns; a negative gap negates the whole row so
        // the basis column stays +1 and the tableau remains B^-1 A
        t.n_cols += pending.len();
        for row in &mut t.rows {
            row.resize(t.n_cols, 0.0);
        }
        for (k, &(i, gap)) in pending.iter().enumerate() {
            let art = n + m + k;
            if gap < 0.0 {
                for v in &mut t.rows[i] {
                    *v = -*v;
                }
                t.rhs[i] = -t.rhs[i];
            }
            t.rows[i][art] = 1.0;
            t.lo.push(0.0);
            t.hi.push(f64::INFINITY);
            t.x.push(gap.abs());
            t.state.push(ColState::Basic(i));
            t.basis[i] = art;
            t.artificials.push(art);
        }
        t
    }

    /// Recomputes every basic value from `B^-1 b` and the nonbasic point,
    /// clearing accumulated incremental-update drift.
    fn refresh_basic_values(&mut self) {
        for (i, row) in self.rows.iter().enumerate() {
            let mut v = self.rhs[i];
            for (j, &coef) in row.iter().enumerate() {
                if coef != 0.0 && !matches!(self.state[j], ColState::Basic(_)) && self.x[j] != 0.0 {
                    v -= coef * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn solve(mut self, problem: &MilpProblem) -> Result<LpSolution, MilpError> {
        if !self.artificials.is_empty() {
            let mut cost = vec![0.0; self.n_cols];
            for &a in &self.artificials {
                cost[a] = 1.0;
            }
            self.reduced_costs(&cost);
            self.iterate(&cost)?;
            self.refresh_basic_values();
            let infeas: f64 = self.artificials.iter().map(|&a| self.x[a].abs()).sum();
            if infeas > FEAS_TOL * 10.0 {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    values: vec![],
                    objective: f64::INFINITY,
                });
            }
            // artificials are pinned at zero for phase 2
            for &a in &self.artificials {
                self.lo[a] = 0.0;
                self.hi[a] = 0.0;
                self.x[a] = 0.0;
            }
        }

        let mut cost = vec![0.0; self.n_cols];
        for (v, c) in problem.objective().terms() {
            cost[v] = c;
        }
        self.reduced_costs(&cost);
        let end = self.iterate(&cost)?;
        self.refresh_basic_values();
        match end {
            IterateEnd::Optimal => {}
            IterateEnd::Unbounded => {
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    values: vec![],
                    objective: f64::NEG_INFINITY,
                })
            }
        }

        let mut values = Vec::with_capacity(self.n_struct);
        for j in 0..self.n_struct {
            values.push(self.x[j].clamp(self.lo[j], self.hi[j]));
        }
        let objective = problem.objective().eval(&values);
        Ok(LpSolution { status: LpStatus::Optimal, values, objective })
    }

    /// Fills the reduced-cost row `d = cost - cost_B . rows` from scratch.
    fn reduced_costs(&mut self, cost: &[f64]) {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                let row = &self.rows[i];
                for (dj, rj) in d.iter_mut().zip(row) {
                    *dj -= cb * rj;
                }
            }
        }
        self.d = d;
    }

    fn iterate(&mut self, cost: &[f64]) -> Result<IterateEnd, MilpError> {
        let max_iters = 20_000 + 50 * (self.n_cols as u64);
        let stall_limit = 200u64;
        let mut stall = 0u64;
        let mut bland = false;

        for iter in 0..max_iters {
            let Some((q, dir)) = self.pick_entering(bland) else {
                return Ok(IterateEnd::Optimal);
            };
            match self.ratio_test(q, dir, bland) {
                Step::Unbounded => return Ok(IterateEnd::Unbounded),
                Step::BoundFlip(t) => {
                    self.apply_step(q, dir, t, None);
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                    self.state[q] =
                        if dir > 0.0 { ColState::AtUpper } else { ColState::AtLower };
                }
                Step::Pivot { t, row, to_upper } => {
                    self.apply_step(q, dir, t, Some(row));
                    let leaving = self.basis[row];
                    self.x[leaving] = if to_upper { self.hi[leaving] } else { self.lo[leaving] };
                    self.state[leaving] =
                        if to_upper { ColState::AtUpper } else { ColState::AtLower };
                    self.x[q] += dir * t;
                    self.pivot(row, q);
                }
            }
            // Dantzig can cycle on degenerate vertices; fall back to Bland
            if let Some(dz) = self.last_step_change {
                if dz.abs() > 1e-12 {
                    stall = 0;
                    bland = false;
                } else {
                    stall += 1;
                    if stall >= stall_limit {
                        bland = true;
                    }
                }
            }
            if iter % 256 == 255 {
                self.refresh_basic_values();
            }
            let _ = cost;
        }
        Err(MilpError::IterationLimit(max_iters))
    }

    fn pick_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, |d|)
        for j in 0..self.n_cols {
            if self.hi[j] - self.lo[j] < 1e-15 {
                continue; // fixed column can never move
            }
            let (dir, score) = match self.state[j] {
                ColState::Basic(_) => continue,
                ColState::AtLower => {
                    if self.d[j] < -OPT_TOL {
                        (1.0, -self.d[j])
                    } else {
                        continue;
                    }
                }
                ColState::AtUpper => {
                    if self.d[j] > OPT_TOL {
                        (-1.0, self.d[j])
                    } else {
                        continue;
                    }
                }
            };
            if bland {
                return Some((j, dir));
            }
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Step {
        // the entering variable's own opposite bound limits the step
        let own_range = self.hi[q] - self.lo[q];
        let mut t_best = own_range;
        let mut choice: Option<(usize, bool, f64)> = None; // (row, to_upper, |pivot|)

        for (i, row) in self.rows.iter().enumerate() {
            let coef = row[q];
            if coef.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.basis[i];
            let rate = -dir * coef; // d x_B(i) / d t
            let (limit, to_upper) = if rate > 0.0 {
                (self.hi[b], true)
            } else {
                (self.lo[b], false)
            };
            if !limit.is_finite() {
                continue;
            }
            let t_i = ((limit - self.x[b]) / rate).max(0.0);
            let better = if t_i < t_best - 1e-12 {
                true
            } else if t_i > t_best + 1e-12 {
                false
            } else {
                // tie-break: Bland picks the lowest basic column, otherwise the
                // largest pivot magnitude for numerical stability
                match &choice {
                    None => true,
                    Some((r, _, mag)) => {
                        if bland {
                            b < self.basis[*r]
                        } else {
                            coef.abs() > *mag
                        }
                    }
                }
            };
            if better {
                t_best = t_best.min(t_i);
                choice = Some((i, to_upper, coef.abs()));
            }
        }

        match choice {
            None if !t_best.is_finite() => Step::Unbounded,
            None => Step::BoundFlip(t_best),
            Some((row, to_upper, _)) => Step::Pivot { t: t_best, row, to_upper },
        }
    }

    /// Moves the entering variable by `dir * t`, updating all basic values.
    /// `except` marks the pivot row, whose basic variable is set exactly to
    /// its bound by the caller.
    fn apply_step(&mut self, q: usize, dir: f64, t: f64, except: Option<usize>) {
        self.last_step_change = Some(self.d[q] * dir * t);
        if t == 0.0 {
            return;
        }
        for i in 0..self.rows.len() {
            if Some(i) == except {
                continue;
            }
            let coef = self.rows[i][q];
            if coef != 0.0 {
                let b = self.basis[i];
                self.x[b] -= dir * coef * t;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.rows[r][q];
        let prow: Vec<f64> = self.rows[r].iter().map(|v| v / piv).collect();
        let prhs = self.rhs[r] / piv;
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (rv, pv) in row.iter_mut().zip(&prow) {
                    *rv -= f * pv;
                }
                row[q] = 0.0; // exact
                self.rhs[i] -= f * prhs;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (dv, pv) in self.d.iter_mut().zip(&prow) {
                *dv -= f * pv;
            }
            self.d[q] = 0.0;
        }
        self.rows[r] = prow;
        self.rhs[r] = prhs;
        self.state[q] = ColState::Basic(r);
        self.basis[r] = q;
    }
}

enum Step {
    Unbounded,
    BoundFlip(f64),
    Pivot { t: f64, row: usize, to_upper: bool },
}

enum IterateEnd {
    Optimal,
    Unbounded,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{LinExpr, VarKind};

    fn simple_lp() -> MilpProblem {
        let mut p = MilpProblem::new();
        let x = p.add_var("x", VarKind::Continuous, 0.0, 1.0).unwrap();
        let y = p.add_var("y", VarKind::Continuous, 0.0, 1.0).unwrap();
        p.add_constraint(LinExpr::var(x) + LinExpr::var(y), Sense::Le, 1.0).unwrap();
        p.set_objective(-2.0 * LinExpr::var(x) - LinExpr::var(y)).unwrap();
        p
    }

    #[test]
    fn unique_vertex_optimum() {
        let sol = solve_lp(&simple_lp()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 1.0).abs() < 1e-9);
        assert!(sol.values[1].abs() < 1e-9);
        assert!((sol.objective + 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_lp() {
        let mut p = MilpProblem::new();
        let x = p.add_var("x", VarKind::Continuous, 0.0, 1.0).unwrap();
        p.add_constraint(LinExpr::var(x), Sense::Ge, 3.0).unwrap();
        p.set_objective(LinExpr::var(x)).unwrap();
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_constraints() {
        let mut p = MilpProblem::new();
        let x = p.add_var("x", VarKind::Continuous, -5.0, 5.0).unwrap();
        let y = p.add_var("y", VarKind::Continuous, -5.0, 5.0).unwrap();
        p.add_constraint(LinExpr::var(x) + LinExpr::var(y), Sense::Eq, 3.0).unwrap();
        p.add_constraint(LinExpr::var(x) - LinExpr::var(y), Sense::Eq, 1.0).unwrap();
        p.set_objective(LinExpr::var(x)).unwrap();
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 2.0).abs() < 1e-8);
        assert!((sol.values[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn negative_bounds_and_ge_rows() {
        let mut p = MilpProblem::new();
        let x = p.add_var("x", VarKind::Continuous, -10.0, -1.0).unwrap();
        let y = p.add_var("y", VarKind::Continuous, 0.0, 10.0).unwrap();
        p.add_constraint(LinExpr::var(x) + LinExpr::var(y), Sense::Ge, 2.0).unwrap();
        p.set_objective(LinExpr::var(y)).unwrap();
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // y must cover 2 - x, best x = -1 -> y = 3
        assert!((sol.objective - 3.0).abs() < 1e-8);
    }

    #[test]
    fn no_constraints_sits_at_best_bounds() {
        let mut p = MilpProblem::new();
        let x = p.add_var("x", VarKind::Continuous, -2.0, 7.0).unwrap();
        p.set_objective(-1.0 * LinExpr::var(x)).unwrap();
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_lp_terminates() {
        // many redundant rows through the same vertex
        let mut p = MilpProblem::new();
        let x = p.add_var("x", VarKind::Continuous, 0.0, 10.0).unwrap();
        let y = p.add_var("y", VarKind::Continuous, 0.0, 10.0).unwrap();
        for k in 1..=6 {
            p.add_constraint(
                (k as f64) * LinExpr::var(x) + (k as f64) * LinExpr::var(y),
                Sense::Le,
                0.0,
            )
            .unwrap();
        }
        p.set_objective(-1.0 * LinExpr::var(x) - LinExpr::var(y)).unwrap();
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective.abs() < 1e-9);
    }
}

//! Incremental MILP model builder.
//!
//! Minimization-only canonical form: a maximization is expressed by negating
//! the objective at the modelling level. All variables carry explicit finite
//! bounds; binaries are bounded within [0, 1].

use std::collections::HashMap;

use thiserror::Error;

use super::expr::LinExpr;

pub type VarId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum MilpError {
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("invalid bounds for {name:?}: [{lb}, {ub}]")]
    InvalidBounds { name: String, lb: f64, ub: f64 },
    #[error("constraint references unknown variable id {0}")]
    UnknownVariable(VarId),
    #[error("lp parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("simplex iteration limit hit ({0} iterations); numerical trouble")]
    IterationLimit(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl std::fmt::Display for Sense {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Eq => write!(f, "="),
            Sense::Ge => write!(f, ">="),
        }
    }
}

/// One sparse constraint row `sum coeffs . x  (sense)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization MILP: variables with finite bounds, sparse rows, sparse
/// objective plus constant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpProblem {
    vars: Vec<Variable>,
    names: HashMap<String, VarId>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
}

impl MilpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lb: f64,
        ub: f64,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if self.names.contains_key(&name) {
            return Err(MilpError::DuplicateName(name));
        }
        let bounds_ok = lb.is_finite()
            && ub.is_finite()
            && lb <= ub
            && (kind != VarKind::Binary || (lb >= 0.0 && ub <= 1.0));
        if !bounds_ok {
            return Err(MilpError::InvalidBounds { name, lb, ub });
        }
        let id = self.vars.len();
        self.names.insert(name.clone(), id);
        self.vars.push(Variable { name, kind, lb, ub });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds `expr (sense) rhs`; the expression's constant folds into the rhs.
    pub fn add_constraint(&mut self, expr: LinExpr, sense: Sense, rhs: f64) -> Result<(), MilpError> {
        let name = format!("c{}", self.constraints.len());
        self.add_named_constraint(name, expr, sense, rhs)
    }

    pub fn add_named_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<(), MilpError> {
        let mut coeffs = Vec::with_capacity(expr.num_terms());
        for (v, c) in expr.terms() {
            if v >= self.vars.len() {
                return Err(MilpError::UnknownVariable(v));
            }
            coeffs.push((v, c));
        }
        // empty rows are dropped (the only presolve performed); a constant
        // row that is infeasible is kept so the solver reports it
        let rhs = rhs - expr.constant_part();
        if coeffs.is_empty() {
            let violated = match sense {
                Sense::Le => 0.0 > rhs + 1e-12,
                Sense::Ge => 0.0 < rhs - 1e-12,
                Sense::Eq => rhs.abs() > 1e-12,
            };
            if !violated {
                return Ok(());
            }
        }
        self.constraints.push(Constraint { name: name.into(), coeffs, sense, rhs });
        Ok(())
    }

    pub fn set_objective(&mut self, expr: LinExpr) -> Result<(), MilpError> {
        for (v, _) in expr.terms() {
            if v >= self.vars.len() {
                return Err(MilpError::UnknownVariable(v));
            }
        }
        self.objective = expr;
        Ok(())
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_continuous(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Continuous).count()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn binary_ids(&self) -> Vec<VarId> {
        (0..self.vars.len()).filter(|&i| self.vars[i].kind == VarKind::Binary).collect()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coeffs.len()).sum()
    }

    /// Max constraint violation of a point, for feasibility checks.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, v) in self.vars.iter().enumerate() {
            worst = worst.max(v.lb - values[i]).max(values[i] - v.ub);
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(v, a)| a * values[v]).sum();
            let viol = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

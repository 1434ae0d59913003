//! LP-file (CPLEX text format) export and import.
//!
//! Used to cross-check problems against external solvers and to dump
//! infeasible predictive-control windows for post-mortem analysis. Import of
//! an exported file reproduces the problem structurally (same variable and
//! row order). Continuous variables must end up with finite bounds, matching
//! the modeller's contract; binaries default to [0, 1].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::expr::LinExpr;
use super::model::{MilpError, MilpProblem, Sense, VarKind};

pub fn export_lp(problem: &MilpProblem) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let obj = problem.objective();
    if obj.num_terms() == 0 && obj.constant_part() == 0.0 {
        out.push_str(" 0");
    } else {
        write_terms(&mut out, obj, problem);
        let c = obj.constant_part();
        if c < 0.0 {
            let _ = write!(out, " - {}", -c);
        } else if c > 0.0 {
            let _ = write!(out, " + {}", c);
        }
    }
    out.push_str("\nSubject To\n");
    for c in problem.constraints() {
        let mut expr = LinExpr::new();
        for &(v, a) in &c.coeffs {
            expr.add_term(v, a);
        }
        let _ = write!(out, " {}:", c.name);
        if c.coeffs.is_empty() {
            out.push_str(" 0");
        } else {
            write_terms(&mut out, &expr, problem);
        }
        let _ = writeln!(out, " {} {}", c.sense, c.rhs);
    }
    out.push_str("Bounds\n");
    for v in problem.variables() {
        let _ = writeln!(out, " {} <= {} <= {}", v.lb, v.name, v.ub);
    }
    let binaries: Vec<&str> = problem
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

fn write_terms(out: &mut String, expr: &LinExpr, problem: &MilpProblem) {
    for (v, c) in expr.terms() {
        let name = &problem.variables()[v].name;
        if c < 0.0 {
            let _ = write!(out, " - {} {}", -c, name);
        } else {
            let _ = write!(out, " + {} {}", c, name);
        }
    }
}

pub fn export_lp_file(problem: &MilpProblem, path: &Path) -> Result<(), MilpError> {
    std::fs::write(path, export_lp(problem))
        .map_err(|e| MilpError::Io(format!("{}: {e}", path.display())))
}

pub fn import_lp_file(path: &Path) -> Result<MilpProblem, MilpError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MilpError::Io(format!("{}: {e}", path.display())))?;
    import_lp(&text)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Le,
    Ge,
    Eq,
    Colon,
    Plus,
    Minus,
}

fn err(line: usize, message: impl Into<String>) -> MilpError {
    MilpError::ParseError { line, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, MilpError> {
    let mut toks = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('\\').next().unwrap_or("");
        let mut chars = content.chars().peekable();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
            } else if c == '<' || c == '>' || c == '=' {
                chars.next();
                if chars.peek() == Some(&'=') {
                    chars.next();
                }
                toks.push((
                    match c {
                        '<' => Tok::Le,
                        '>' => Tok::Ge,
                        _ => Tok::Eq,
                    },
                    line,
                ));
            } else if c == ':' {
                chars.next();
                toks.push((Tok::Colon, line));
            } else if c == '+' {
                chars.next();
                toks.push((Tok::Plus, line));
            } else if c == '-' {
                chars.next();
                toks.push((Tok::Minus, line));
            } else if c.is_ascii_digit() || c == '.' {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || d == '.' {
                        s.push(d);
                        chars.next();
                    } else if d == 'e' || d == 'E' {
                        s.push(d);
                        chars.next();
                        if let Some(&sign) = chars.peek() {
                            if sign == '+' || sign == '-' {
                                s.push(sign);
                                chars.next();
                            }
                        }
                    } else {
                        break;
                    }
                }
                let v: f64 = s.parse().map_err(|_| err(line, format!("bad number {s:?}")))?;
                toks.push((Tok::Num(v), line));
            } else if c.is_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '.' || d == '(' || d == ')' || d == '[' || d == ']' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Word(s), line));
            } else {
                return Err(err(line, format!("unexpected character {c:?}")));
            }
        }
    }
    Ok(toks)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binary,
}

/// Parses the LP text form into a problem. Maximization objectives are
/// negated into the minimization canonical form.
pub fn import_lp(text: &str) -> Result<MilpProblem, MilpError> {
    let toks = tokenize(text)?;
    let mut pos = 0usize;

    struct VarInfo {
        lb: Option<f64>,
        ub: Option<f64>,
        binary: bool,
    }
    let mut order: Vec<String> = Vec::new();
    let mut vars: HashMap<String, VarInfo> = HashMap::new();
    let mut intern = |name: &str, order: &mut Vec<String>, vars: &mut HashMap<String, VarInfo>| {
        if !vars.contains_key(name) {
            order.push(name.to_string());
            vars.insert(name.to_string(), VarInfo { lb: None, ub: None, binary: false });
        }
    };

    let keyword = |w: &str| -> Option<&'static str> {
        match w.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => Some("min"),
            "maximize" | "maximise" | "max" => Some("max"),
            "subject" | "such" | "st" | "s.t." => Some("st"),
            "bounds" | "bound" => Some("bounds"),
            "binary" | "binaries" | "bin" => Some("binary"),
            "general" | "gen" | "generals" => Some("general"),
            "end" => Some("end"),
            "free" => Some("free"),
            _ => None,
        }
    };

    let mut maximize = false;
    let mut section: Option<Section> = None;
    // raw parse products, assembled into a problem at the end
    let mut objective: Vec<(String, f64)> = Vec::new();
    let mut obj_constant = 0.0f64;
    struct RawRow {
        name: Option<String>,
        terms: Vec<(String, f64)>,
        sense: Sense,
        rhs: f64,
    }
    let mut rows: Vec<RawRow> = Vec::new();

    // expects the token stream of a linear expression; stops before a sense
    // token or a section keyword
    let parse_expr = |toks: &[(Tok, usize)],
                      pos: &mut usize,
                      order: &mut Vec<String>,
                      vars: &mut HashMap<String, VarInfo>,
                      intern: &mut dyn FnMut(&str, &mut Vec<String>, &mut HashMap<String, VarInfo>)|
     -> Result<(Vec<(String, f64)>, f64), MilpError> {
        let mut terms: Vec<(String, f64)> = Vec::new();
        let mut constant = 0.0f64;
        loop {
            let mut sign = 1.0f64;
            let mut saw_sign = false;
            while let Some((tok, _)) = toks.get(*pos) {
                match tok {
                    Tok::Plus => {
                        *pos += 1;
                        saw_sign = true;
                    }
                    Tok::Minus => {
                        sign = -sign;
                        *pos += 1;
                        saw_sign = true;
                    }
                    _ => break,
                }
            }
            match toks.get(*pos) {
                Some((Tok::Num(v), line)) => {
                    let line = *line;
                    let v = *v;
                    *pos += 1;
                    match toks.get(*pos) {
                        Some((Tok::Word(w), _)) if keyword(w).is_none() => {
                            intern(w, order, vars);
                            terms.push((w.clone(), sign * v));
                            *pos += 1;
                        }
                        Some((Tok::Word(w), _)) if keyword(w).is_some() => {
                            constant += sign * v;
                            return Ok((terms, constant));
                        }
                        Some((Tok::Num(_), _)) => {
                            return Err(err(line, "two numbers in a row"));
                        }
                        _ => {
                            constant += sign * v;
                        }
                    }
                }
                Some((Tok::Word(w), _)) if keyword(w).is_none() => {
                    intern(w, order, vars);
                    terms.push((w.clone(), sign));
                    *pos += 1;
                }
                Some((tok, line)) if saw_sign => {
                    return Err(err(*line, format!("dangling sign before {tok:?}")));
                }
                _ => return Ok((terms, constant)),
            }
        }
    };

    while pos < toks.len() {
        let (tok, line) = &toks[pos];
        let line = *line;
        // section switches
        if let Tok::Word(w) = tok {
            match keyword(w) {
                Some("min") => {
                    maximize = false;
                    section = Some(Section::Objective);
                    pos += 1;
                    continue;
                }
                Some("max") => {
                    maximize = true;
                    section = Some(Section::Objective);
                    pos += 1;
                    continue;
                }
                Some("st") => {
                    pos += 1;
                    // swallow the "to" / "that" continuation word
                    if let Some((Tok::Word(w2), _)) = toks.get(pos) {
                        let lw = w2.to_ascii_lowercase();
                        if lw == "to" || lw == "that" {
                            pos += 1;
                        }
                    }
                    section = Some(Section::Constraints);
                    continue;
                }
                Some("bounds") => {
                    section = Some(Section::Bounds);
                    pos += 1;
                    continue;
                }
                Some("binary") => {
                    section = Some(Section::Binary);
                    pos += 1;
                    continue;
                }
                Some("general") => {
                    return Err(err(line, "general integer variables are not supported"));
                }
                Some("end") => {
                    pos += 1;
                    continue;
                }
                _ => {}
            }
        }

        match section {
            None => return Err(err(line, format!("expected a section keyword, got {tok:?}"))),
            Some(Section::Objective) => {
                // optional "name :" prefix
                if let (Some((Tok::Word(_), _)), Some((Tok::Colon, _))) = (toks.get(pos), toks.get(pos + 1)) {
                    pos += 2;
                }
                let (terms, constant) =
                    parse_expr(&toks, &mut pos, &mut order, &mut vars, &mut intern)?;
                for (name, c) in terms {
                    objective.push((name, c));
                }
                obj_constant += constant;
            }
            Some(Section::Constraints) => {
                let mut name = None;
                if let (Some((Tok::Word(w), _)), Some((Tok::Colon, _))) = (toks.get(pos), toks.get(pos + 1)) {
                    name = Some(w.clone());
                    pos += 2;
                }
                let (terms, constant) =
                    parse_expr(&toks, &mut pos, &mut order, &mut vars, &mut intern)?;
                let sense = match toks.get(pos) {
                    Some((Tok::Le, _)) => Sense::Le,
                    Some((Tok::Ge, _)) => Sense::Ge,
                    Some((Tok::Eq, _)) => Sense::Eq,
                    other => {
                        return Err(err(
                            other.map(|(_, l)| *l).unwrap_or(line),
                            "expected a sense token (<=, =, >=)",
                        ))
                    }
                };
                pos += 1;
                let mut rhs_sign = 1.0;
                while let Some((tok, _)) = toks.get(pos) {
                    match tok {
                        Tok::Plus => pos += 1,
                        Tok::Minus => {
                            rhs_sign = -rhs_sign;
                            pos += 1;
                        }
                        _ => break,
                    }
                }
                let rhs = match toks.get(pos) {
                    Some((Tok::Num(v), _)) => rhs_sign * *v,
                    other => {
                        return Err(err(
                            other.map(|(_, l)| *l).unwrap_or(line),
                            "expected a numeric right-hand side",
                        ))
                    }
                };
                pos += 1;
                rows.push(RawRow { name, terms: terms.clone(), sense, rhs: rhs - constant });
            }
            Some(Section::Bounds) => {
                // forms: "l <= x <= u" | "x <= u" | "x >= l" | "x = v" | "x free"
                let mut lead_sign = 1.0;
                while let Some((tok, _)) = toks.get(pos) {
                    match tok {
                        Tok::Minus => {
                            lead_sign = -lead_sign;
                            pos += 1;
                        }
                        Tok::Plus => pos += 1,
                        _ => break,
                    }
                }
                match toks.get(pos) {
                    Some((Tok::Num(l), _)) => {
                        let l = lead_sign * *l;
                        pos += 1;
                        if !matches!(toks.get(pos), Some((Tok::Le, _))) {
                            return Err(err(line, "expected <= after bound value"));
                        }
                        pos += 1;
                        let name = match toks.get(pos) {
                            Some((Tok::Word(w), _)) => w.clone(),
                            _ => return Err(err(line, "expected a variable name in bounds")),
                        };
                        pos += 1;
                        intern(&name, &mut order, &mut vars);
                        vars.get_mut(&name).unwrap().lb = Some(l);
                        if matches!(toks.get(pos), Some((Tok::Le, _))) {
                            pos += 1;
                            let mut s = 1.0;
                            while let Some((Tok::Minus, _)) = toks.get(pos) {
                                s = -s;
                                pos += 1;
                            }
                            match toks.get(pos) {
                                Some((Tok::Num(u), _)) => {
                                    vars.get_mut(&name).unwrap().ub = Some(s * *u);
                                    pos += 1;
                                }
                                _ => return Err(err(line, "expected an upper bound value")),
                            }
                        }
                    }
                    Some((Tok::Word(w), _)) if keyword(w).is_none() => {
                        let name = w.clone();
                        pos += 1;
                        intern(&name, &mut order, &mut vars);
                        match toks.get(pos) {
                            Some((Tok::Word(f), _)) if keyword(f) == Some("free") => {
                                pos += 1; // free: bounds stay unset, rejected later
                            }
                            Some((sense @ (Tok::Le | Tok::Ge | Tok::Eq), _)) => {
                                let sense = sense.clone();
                                pos += 1;
                                let mut s = 1.0;
                                while let Some((Tok::Minus, _)) = toks.get(pos) {
                                    s = -s;
                                    pos += 1;
                                }
                                let v = match toks.get(pos) {
                                    Some((Tok::Num(v), _)) => s * *v,
                                    _ => return Err(err(line, "expected a bound value")),
                                };
                                pos += 1;
                                let info = vars.get_mut(&name).unwrap();
                                match sense {
                                    Tok::Le => info.ub = Some(v),
                                    Tok::Ge => info.lb = Some(v),
                                    _ => {
                                        info.lb = Some(v);
                                        info.ub = Some(v);
                                    }
                                }
                            }
                            _ => return Err(err(line, "malformed bounds line")),
                        }
                    }
                    Some((tok, l)) => return Err(err(*l, format!("malformed bounds line at {tok:?}"))),
                    None => break,
                }
            }
            Some(Section::Binary) => match toks.get(pos) {
                Some((Tok::Word(w), _)) if keyword(w).is_none() => {
                    intern(w, &mut order, &mut vars);
                    vars.get_mut(w.as_str()).unwrap().binary = true;
                    pos += 1;
                }
                Some((tok, l)) => return Err(err(*l, format!("expected a variable name, got {tok:?}"))),
                None => break,
            },
        }
    }

    // assemble
    let mut problem = MilpProblem::new();
    for name in &order {
        let info = &vars[name];
        let (kind, lb, ub) = if info.binary {
            (VarKind::Binary, info.lb.unwrap_or(0.0), info.ub.unwrap_or(1.0))
        } else {
            let lb = info.lb.ok_or_else(|| {
                err(0, format!("continuous variable {name:?} has no finite lower bound"))
            })?;
            let ub = info.ub.ok_or_else(|| {
                err(0, format!("continuous variable {name:?} has no finite upper bound"))
            })?;
            (VarKind::Continuous, lb, ub)
        };
        problem.add_var(name.clone(), kind, lb, ub)?;
    }
    let mut obj = LinExpr::constant(obj_constant);
    for (name, c) in objective {
        obj.add_term(problem.var_id(&name).unwrap(), c);
    }
    if maximize {
        obj = -obj;
    }
    problem.set_objective(obj)?;
    for row in rows {
        let mut expr = LinExpr::new();
        for (name, c) in row.terms {
            expr.add_term(problem.var_id(&name).unwrap(), c);
        }
        match row.name {
            Some(name) => problem.add_named_constraint(name, expr, row.sense, row.rhs)?,
            None => problem.add_constraint(expr, row.sense, row.rhs)?,
        }
    }
    Ok(problem)
}

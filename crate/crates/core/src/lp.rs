//! CPLEX-LP export of the mixed-integer model, a reader for the same subset,
//! and a checker that substitutes a plan into every row.
//!
//! Variable names (ship `i` and call `c` are 1-based; external berth `k`
//! becomes ship `n + k` with a single call):
//!
//! | name | meaning |
//! |------|---------|
//! | `x_i_c`, `y_i_c` | berth position and start |
//! | `h_i_c` | handling time |
//! | `r_i_c` | distance from the ideal position |
//! | `a_i_c` | arrival time |
//! | `d_i_c`, `u_i_c` | time past EFT and past LFT |
//! | `v_i_c_s` | speed `s` (1-based) on the leg leaving call `c` |
//! | `sig_i_c_j_k` | visit `(i,c)` lies left of `(j,k)` |
//! | `del_i_c_j_k` | visit `(i,c)` finishes before `(j,k)` starts |
//!
//! External berths only get `x`, `y` and `h`, each fixed by its bounds.
//! Left/right and before/after binaries exist for every ordered pair of
//! distinct visits at a port except pairs of two external berths.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::math::{abs, EPS};
use crate::model::{CallId, Instance, Solution};

/// A visit at a port: an optimized call or an external berth.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Visit {
    tag: (usize, usize),
    external: bool,
    length: f64,
}

fn call_tag(inst: &Instance, c: CallId) -> (usize, usize) {
    let call = &inst.calls[c.0];
    (call.ship.0 + 1, call.call_index)
}

fn ext_tag(inst: &Instance, e: usize) -> (usize, usize) {
    (inst.ships.len() + e + 1, 1)
}

fn var(prefix: &str, t: (usize, usize)) -> String {
    format!("{prefix}_{}_{}", t.0, t.1)
}

fn pair_var(prefix: &str, a: (usize, usize), b: (usize, usize)) -> String {
    format!("{prefix}_{}_{}_{}_{}", a.0, a.1, b.0, b.1)
}

fn visits_by_port(inst: &Instance) -> Vec<Vec<Visit>> {
    let mut out: Vec<Vec<Visit>> = alloc::vec![Vec::new(); inst.ports.len()];
    for (i, call) in inst.calls.iter().enumerate() {
        out[call.port.0].push(Visit {
            tag: call_tag(inst, CallId(i)),
            external: false,
            length: inst.ships[call.ship.0].length,
        });
    }
    for (e, ext) in inst.externals.iter().enumerate() {
        out[ext.port.0].push(Visit {
            tag: ext_tag(inst, e),
            external: true,
            length: ext.length,
        });
    }
    out
}

/// Comparison sense of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// The subset of the LP format written by [`export_lp`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<Row>,
    /// `(lower, upper)` per variable; absent means `[0, inf)`.
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: BTreeSet<String>,
    /// Every variable mentioned anywhere, in first-mention order.
    pub variables: Vec<String>,
}

impl LpModel {
    fn note(&mut self, v: &str) {
        if !self.variables.iter().any(|n| n == v) {
            self.variables.push(v.to_string());
        }
    }

    fn add_row(&mut self, name: String, terms: Vec<(f64, String)>, sense: Sense, rhs: f64) {
        for (_, v) in &terms {
            self.note(v);
        }
        self.rows.push(Row { name, terms, sense, rhs });
    }

    pub fn binary_count(&self) -> usize {
        self.binaries.len()
    }

    pub fn continuous_count(&self) -> usize {
        self.variables.len() - self.binaries.len()
    }

    /// Variables whose name starts with `prefix_`.
    pub fn count_prefix(&self, prefix: &str) -> usize {
        let p = format!("{prefix}_");
        self.variables.iter().filter(|v| v.starts_with(&p)).count()
    }
}

/// Big-M of the time disjunctions: twice the horizon plus the longest
/// handling time anywhere on the quay. Plans that finish later than this
/// are outside the model.
pub fn disjunction_bound(inst: &Instance) -> f64 {
    let longest = inst
        .calls
        .iter()
        .enumerate()
        .map(|(i, call)| {
            let quay = inst.ports[call.port.0].quay_length;
            let ship = inst.ships[call.ship.0].length;
            inst.handling_at(CallId(i), 0.0).max(inst.handling_at(CallId(i), (quay - ship).max(0.0)))
        })
        .chain(inst.externals.iter().map(|e| e.duration))
        .fold(0.0, f64::max);
    2.0 * inst.horizon + longest
}

/// Builds the model for `inst`.
pub fn build_model(inst: &Instance) -> LpModel {
    let r = &inst.rates;
    let mut m = LpModel::default();
    let big_m = disjunction_bound(inst);

    for (i, call) in inst.calls.iter().enumerate() {
        let c = CallId(i);
        let t = call_tag(inst, c);
        let (x, y, h, rr, a, d, u) = (
            var("x", t),
            var("y", t),
            var("h", t),
            var("r", t),
            var("a", t),
            var("d", t),
            var("u", t),
        );
        m.objective.push((r.waiting_rate, y.clone()));
        m.objective.push((-r.waiting_rate, a.clone()));
        m.objective.push((r.handling_rate, h.clone()));
        m.objective.push((r.delay_rate, d.clone()));
        m.objective.push((r.lft_penalty_rate, u.clone()));
        for v in [&x, &y, &h, &rr, &a, &d, &u] {
            m.note(v);
        }
        let ship = &inst.ships[call.ship.0];
        let quay = inst.ports[call.port.0].quay_length;
        m.add_row(format!("quay_{}_{}", t.0, t.1), alloc::vec![(1.0, x.clone())], Sense::Le, quay - ship.length);
        m.add_row(
            format!("arr_{}_{}", t.0, t.1),
            alloc::vec![(1.0, a.clone()), (-1.0, y.clone())],
            Sense::Le,
            0.0,
        );
        m.add_row(format!("est_{}_{}", t.0, t.1), alloc::vec![(1.0, y.clone())], Sense::Ge, call.est);
        m.add_row(
            format!("delay_{}_{}", t.0, t.1),
            alloc::vec![(1.0, y.clone()), (1.0, h.clone()), (-1.0, d.clone())],
            Sense::Le,
            call.eft,
        );
        m.add_row(
            format!("lft_{}_{}", t.0, t.1),
            alloc::vec![(1.0, y.clone()), (1.0, h.clone()), (-1.0, u.clone())],
            Sense::Le,
            call.lft,
        );
        m.add_row(
            format!("hand_{}_{}", t.0, t.1),
            alloc::vec![(1.0, h.clone()), (-r.deviation_factor * call.base_handling, rr.clone())],
            Sense::Eq,
            call.base_handling,
        );
        m.add_row(
            format!("rplus_{}_{}", t.0, t.1),
            alloc::vec![(1.0, x.clone()), (-1.0, rr.clone())],
            Sense::Le,
            call.ideal_position,
        );
        m.add_row(
            format!("rminus_{}_{}", t.0, t.1),
            alloc::vec![(-1.0, x.clone()), (-1.0, rr.clone())],
            Sense::Le,
            -call.ideal_position,
        );
        if let Some(n) = inst.next_call(c) {
            let nt = call_tag(inst, n);
            let dist = inst.distance(call.port, inst.calls[n.0].port);
            let mut travel = alloc::vec![(1.0, y.clone()), (1.0, h.clone())];
            let mut one = Vec::new();
            for (s, lvl) in inst.speeds.iter().enumerate() {
                let v = format!("v_{}_{}_{}", t.0, t.1, s + 1);
                travel.push((lvl.time_per_distance() * dist, v.clone()));
                one.push((1.0, v.clone()));
                m.objective.push((inst.leg_cost(c, s), v.clone()));
                m.binaries.insert(v);
            }
            travel.push((-1.0, var("a", nt)));
            m.add_row(format!("travel_{}_{}", t.0, t.1), travel, Sense::Eq, 0.0);
            m.add_row(format!("speed_{}_{}", t.0, t.1), one, Sense::Eq, 1.0);
        }
    }

    for (e, ext) in inst.externals.iter().enumerate() {
        let t = ext_tag(inst, e);
        for (p, val) in [("x", ext.position), ("y", ext.start), ("h", ext.duration)] {
            let v = var(p, t);
            m.note(&v);
            m.bounds.insert(v, (val, val));
        }
    }

    for (p, visits) in visits_by_port(inst).iter().enumerate() {
        let quay = inst.ports[p].quay_length;
        for (ai, a) in visits.iter().enumerate() {
            for (bi, b) in visits.iter().enumerate() {
                if ai == bi || (a.external && b.external) {
                    continue;
                }
                let sig = pair_var("sig", a.tag, b.tag);
                let del = pair_var("del", a.tag, b.tag);
                m.add_row(
                    format!("left_{}_{}_{}_{}", a.tag.0, a.tag.1, b.tag.0, b.tag.1),
                    alloc::vec![(1.0, var("x", a.tag)), (-1.0, var("x", b.tag)), (quay, sig.clone())],
                    Sense::Le,
                    quay - a.length,
                );
                m.add_row(
                    format!("before_{}_{}_{}_{}", a.tag.0, a.tag.1, b.tag.0, b.tag.1),
                    alloc::vec![
                        (1.0, var("y", a.tag)),
                        (1.0, var("h", a.tag)),
                        (-1.0, var("y", b.tag)),
                        (big_m, del.clone()),
                    ],
                    Sense::Le,
                    big_m,
                );
                m.binaries.insert(sig);
                m.binaries.insert(del);
                if ai < bi {
                    m.add_row(
                        format!("apart_{}_{}_{}_{}", a.tag.0, a.tag.1, b.tag.0, b.tag.1),
                        alloc::vec![
                            (1.0, pair_var("sig", a.tag, b.tag)),
                            (1.0, pair_var("sig", b.tag, a.tag)),
                            (1.0, pair_var("del", a.tag, b.tag)),
                            (1.0, pair_var("del", b.tag, a.tag)),
                        ],
                        Sense::Ge,
                        1.0,
                    );
                }
            }
        }
    }
    m
}

fn write_terms(out: &mut String, terms: &[(f64, String)]) {
    let mut line_len = 0usize;
    for (k, (coef, v)) in terms.iter().enumerate() {
        let term = if k == 0 {
            if *coef < 0.0 {
                format!("- {} {v}", -coef)
            } else {
                format!("{coef} {v}")
            }
        } else if *coef < 0.0 {
            format!(" - {} {v}", -coef)
        } else {
            format!(" + {coef} {v}")
        };
        if line_len + term.len() > 200 {
            out.push_str("\n   ");
            line_len = 3;
        }
        line_len += term.len();
        out.push_str(&term);
    }
}

/// Renders `m` as CPLEX-LP text.
pub fn to_lp_string(m: &LpModel, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {title}");
    out.push_str("Minimize\n obj: ");
    write_terms(&mut out, &m.objective);
    out.push_str("\nSubject To\n");
    for row in &m.rows {
        let _ = write!(out, " {}: ", row.name);
        write_terms(&mut out, &row.terms);
        let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
    }
    out.push_str("Bounds\n");
    for (v, (lo, hi)) in &m.bounds {
        if lo == hi {
            let _ = writeln!(out, " {v} = {lo}");
        } else {
            let _ = writeln!(out, " {lo} <= {v} <= {hi}");
        }
    }
    if !m.binaries.is_empty() {
        out.push_str("Binaries\n");
        for v in &m.binaries {
            let _ = writeln!(out, " {v}");
        }
    }
    out.push_str("End\n");
    out
}

/// The model of `inst` in CPLEX-LP text.
pub fn export_lp(inst: &Instance) -> String {
    to_lp_string(&build_model(inst), &format!("berth allocation model for {}", inst.name))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LpParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl core::error::Error for LpParseError {}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

fn parse_number(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn parse_terms(tokens: &[&str], line: usize) -> Result<Vec<(f64, String)>, LpParseError> {
    let err = |m: &str| LpParseError { line, message: m.to_string() };
    let mut out = Vec::new();
    let mut sign: Option<f64> = None;
    let mut coef: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" | "-" => {
                if sign.is_some() || coef.is_some() {
                    return Err(err("operator without a term"));
                }
                sign = Some(if tok == "-" { -1.0 } else { 1.0 });
            }
            _ => {
                if let Some(v) = parse_number(tok) {
                    if coef.is_some() {
                        return Err(err("two coefficients in a row"));
                    }
                    coef = Some(v);
                } else {
                    out.push((sign.unwrap_or(1.0) * coef.unwrap_or(1.0), tok.to_string()));
                    sign = None;
                    coef = None;
                }
            }
        }
    }
    if sign.is_some() || coef.is_some() {
        return Err(err("expression ends without a variable"));
    }
    Ok(out)
}

/// Reads the subset of the LP format that [`to_lp_string`] writes.
pub fn parse_lp(text: &str) -> Result<LpModel, LpParseError> {
    let mut m = LpModel::default();
    let mut section = Section::None;
    // Statements may span lines; a statement is complete when the next line
    // does not start with whitespace.
    let mut stmts: Vec<(usize, String, Section)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let head = line.trim().to_ascii_lowercase();
        let next = match head.as_str() {
            "minimize" | "minimise" | "min" => Some(Section::Objective),
            "subject to" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        if section == Section::None || section == Section::End {
            return Err(LpParseError { line: line_no, message: "text outside a section".into() });
        }
        let continues = raw.starts_with("   ") && !stmts.is_empty() && stmts.last().is_some_and(|s| s.2 == section);
        let starts_new = section == Section::Bounds || section == Section::Binaries || !continues;
        if starts_new {
            stmts.push((line_no, line.trim().to_string(), section));
        } else {
            let last = stmts.last_mut().expect("checked non-empty");
            last.1.push(' ');
            last.1.push_str(line.trim());
        }
    }
    if section != Section::End {
        return Err(LpParseError { line: text.lines().count(), message: "missing End".into() });
    }

    for (line, stmt, sec) in stmts {
        let err = |msg: &str| LpParseError { line, message: msg.to_string() };
        match sec {
            Section::Objective => {
                let body = stmt.split_once(':').map_or(stmt.as_str(), |(_, b)| b);
                let toks: Vec<&str> = body.split_whitespace().collect();
                m.objective = parse_terms(&toks, line)?;
                for (_, v) in m.objective.clone() {
                    m.note(&v);
                }
            }
            Section::Constraints => {
                let (name, body) = stmt.split_once(':').ok_or_else(|| err("unnamed row"))?;
                let toks: Vec<&str> = body.split_whitespace().collect();
                let pos = toks
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "=" | "=<" | "=>"))
                    .ok_or_else(|| err("row without comparison"))?;
                let sense = match toks[pos] {
                    "<=" | "=<" => Sense::Le,
                    ">=" | "=>" => Sense::Ge,
                    _ => Sense::Eq,
                };
                if toks.len() != pos + 2 {
                    return Err(err("right-hand side must be one number"));
                }
                let rhs = parse_number(toks[pos + 1]).ok_or_else(|| err("bad right-hand side"))?;
                let terms = parse_terms(&toks[..pos], line)?;
                m.add_row(name.trim().to_string(), terms, sense, rhs);
            }
            Section::Bounds => {
                let toks: Vec<&str> = stmt.split_whitespace().collect();
                match toks.as_slice() {
                    [v, "=", val] => {
                        let val = parse_number(val).ok_or_else(|| err("bad bound"))?;
                        m.note(v);
                        m.bounds.insert(v.to_string(), (val, val));
                    }
                    [lo, "<=", v, "<=", hi] => {
                        let lo = parse_number(lo).ok_or_else(|| err("bad bound"))?;
                        let hi = parse_number(hi).ok_or_else(|| err("bad bound"))?;
                        m.note(v);
                        m.bounds.insert(v.to_string(), (lo, hi));
                    }
                    [v, "<=", hi] => {
                        let hi = parse_number(hi).ok_or_else(|| err("bad bound"))?;
                        m.note(v);
                        let e = m.bounds.entry(v.to_string()).or_insert((0.0, f64::INFINITY));
                        e.1 = hi;
                    }
                    [v, ">=", lo] => {
                        let lo = parse_number(lo).ok_or_else(|| err("bad bound"))?;
                        m.note(v);
                        let e = m.bounds.entry(v.to_string()).or_insert((0.0, f64::INFINITY));
                        e.0 = lo;
                    }
                    _ => return Err(err("unsupported bound")),
                }
            }
            Section::Binaries => {
                for v in stmt.split_whitespace() {
                    m.note(v);
                    m.binaries.insert(v.to_string());
                }
            }
            Section::None | Section::End => unreachable!("filtered above"),
        }
    }
    Ok(m)
}

/// Variable values of `sol` in the model's naming, with the left/right and
/// before/after binaries read off the geometry.
pub fn solution_values(inst: &Instance, sol: &Solution) -> Result<BTreeMap<String, f64>, crate::model::ModelError> {
    let mut vals = BTreeMap::new();
    let mut rect_of: BTreeMap<(usize, usize), (f64, f64, f64, f64)> = BTreeMap::new();
    for (i, call) in inst.calls.iter().enumerate() {
        let c = CallId(i);
        let t = call_tag(inst, c);
        let a = sol
            .get(c)
            .ok_or_else(|| crate::model::ModelError::IncompleteSolution { missing: sol.missing() })?;
        let st = inst.call_state(sol, c)?;
        vals.insert(var("x", t), a.berth_position);
        vals.insert(var("y", t), a.berth_start);
        vals.insert(var("h", t), st.handling);
        vals.insert(var("r", t), abs(a.berth_position - call.ideal_position));
        vals.insert(var("a", t), st.arrival);
        vals.insert(var("d", t), st.delay);
        vals.insert(var("u", t), st.lft_excess);
        if inst.next_call(c).is_some() {
            for s in 0..inst.speeds.len() {
                let on = a.leg_speed == Some(s);
                vals.insert(format!("v_{}_{}_{}", t.0, t.1, s + 1), if on { 1.0 } else { 0.0 });
            }
        }
        rect_of.insert(t, (a.berth_position, inst.ships[call.ship.0].length, a.berth_start, st.handling));
    }
    for (e, ext) in inst.externals.iter().enumerate() {
        let t = ext_tag(inst, e);
        vals.insert(var("x", t), ext.position);
        vals.insert(var("y", t), ext.start);
        vals.insert(var("h", t), ext.duration);
        rect_of.insert(t, (ext.position, ext.length, ext.start, ext.duration));
    }
    for visits in visits_by_port(inst) {
        for a in &visits {
            for b in &visits {
                if a.tag == b.tag || (a.external && b.external) {
                    continue;
                }
                let (ax, al, ay, ah) = rect_of[&a.tag];
                let (bx, _, by, _) = rect_of[&b.tag];
                let sig = ax + al <= bx + EPS;
                let del = ay + ah <= by + EPS;
                vals.insert(pair_var("sig", a.tag, b.tag), if sig { 1.0 } else { 0.0 });
                vals.insert(pair_var("del", a.tag, b.tag), if del { 1.0 } else { 0.0 });
            }
        }
    }
    Ok(vals)
}

/// Outcome of substituting values into a model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubstitutionReport {
    pub objective: f64,
    /// `(row name, lhs - rhs)` of every violated row.
    pub violated_rows: Vec<(String, f64)>,
    pub violated_bounds: Vec<String>,
    pub non_binary: Vec<String>,
}

impl SubstitutionReport {
    pub fn is_feasible(&self) -> bool {
        self.violated_rows.is_empty() && self.violated_bounds.is_empty() && self.non_binary.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubstitutionError {
    MissingValue(String),
    UnknownVariable(String),
}

impl fmt::Display for SubstitutionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubstitutionError::MissingValue(v) => write!(f, "no value for model variable {v}"),
            SubstitutionError::UnknownVariable(v) => write!(f, "value given for {v}, which the model lacks"),
        }
    }
}

impl core::error::Error for SubstitutionError {}

/// Evaluates every row, bound and integrality requirement at `values`.
/// Row tolerance is `1e-6` scaled by the row's magnitude.
pub fn substitute_and_check(m: &LpModel, values: &BTreeMap<String, f64>) -> Result<SubstitutionReport, SubstitutionError> {
    for v in &m.variables {
        if !values.contains_key(v) {
            return Err(SubstitutionError::MissingValue(v.clone()));
        }
    }
    let known: BTreeSet<&str> = m.variables.iter().map(String::as_str).collect();
    for v in values.keys() {
        if !known.contains(v.as_str()) {
            return Err(SubstitutionError::UnknownVariable(v.clone()));
        }
    }
    let mut rep = SubstitutionReport {
        objective: m.objective.iter().map(|(c, v)| c * values[v]).sum(),
        ..Default::default()
    };
    for row in &m.rows {
        let lhs: f64 = row.terms.iter().map(|(c, v)| c * values[v]).sum();
        let scale = 1.0 + row.rhs.abs() + row.terms.iter().map(|(c, v)| (c * values[v]).abs()).fold(0.0, f64::max);
        let tol = 1e-6 * scale;
        let excess = lhs - row.rhs;
        let bad = match row.sense {
            Sense::Le => excess > tol,
            Sense::Ge => excess < -tol,
            Sense::Eq => excess.abs() > tol,
        };
        if bad {
            rep.violated_rows.push((row.name.clone(), excess));
        }
    }
    for v in &m.variables {
        let val = values[v];
        let (lo, hi) = m.bounds.get(v).copied().unwrap_or((0.0, f64::INFINITY));
        if val < lo - 1e-9 * (1.0 + lo.abs()) || val > hi + 1e-9 * (1.0 + hi.abs()) {
            rep.violated_bounds.push(v.clone());
        }
        if m.binaries.contains(v) && val != 0.0 && val != 1.0 {
            rep.non_binary.push(v.clone());
        }
    }
    Ok(rep)
}

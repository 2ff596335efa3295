//! Exact depth-first branch and bound on the heuristics' grid.
//!
//! Calls are fixed one at a time in route-consistent order (ascending EST).
//! For each call every grid position, every grid start up to the horizon and,
//! when the predecessor is fixed, every speed that arrives in time is a
//! branch. Branches are explored cheapest first and cut when the partial cost
//! plus a lower bound on the remaining calls reaches the incumbent. The
//! starting incumbent is the construction heuristic's plan, and only strictly
//! better plans replace it, so among equal-cost optima the first one in this
//! order is returned.

use alloc::vec::Vec;
use core::fmt;

use crate::construct::construct;
use crate::math::{ceil_to, floor_to, EPS};
use crate::model::{Assignment, CallId, Instance, Rect, Solution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub max_ships: usize,
    pub max_calls: usize,
    /// Branch-and-bound nodes expanded before giving up.
    pub max_nodes: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_ships: 4,
            max_calls: 8,
            max_nodes: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    TooManyShips { ships: usize, max: usize },
    TooManyCalls { calls: usize, max: usize },
    NodeLimit { nodes: u64 },
    RouteOrder,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManyShips { ships, max } => {
                write!(f, "instance has {ships} ships, oracle accepts at most {max}")
            }
            OracleError::TooManyCalls { calls, max } => {
                write!(f, "instance has {calls} calls, oracle accepts at most {max}")
            }
            OracleError::NodeLimit { nodes } => {
                write!(f, "search space exceeded the cap of {nodes} nodes")
            }
            OracleError::RouteOrder => write!(f, "route ESTs are not increasing"),
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub solution: Solution,
    pub objective: f64,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    x: f64,
    y: f64,
    in_speed: Option<usize>,
    cost: f64,
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<CallId>,
    /// Lower bound on the cost of `order[k..]`.
    tail_bound: Vec<f64>,
    sol: Solution,
    best: Solution,
    best_cost: f64,
    nodes: u64,
    max_nodes: u64,
}

impl Search<'_> {
    /// Branches of `c` cheaper than `budget`. For a fixed position and speed
    /// the cost never decreases with the start, so each scan along `y` stops
    /// once every speed has exceeded the budget.
    fn branches(&self, c: CallId, budget: f64) -> Vec<Branch> {
        let inst = self.inst;
        let r = &inst.rates;
        let call = &inst.calls[c.0];
        let port = inst.port_of(c);
        let step = inst.time_step;
        let len = inst.ship_of(c).length;
        let mut rects: Vec<Rect> = Vec::new();
        for (i, a) in self.sol.assignments.iter().enumerate() {
            if let Some(a) = a {
                if inst.calls[i].port == call.port {
                    rects.push(inst.call_rect(CallId(i), a));
                }
            }
        }
        for (e, ext) in inst.externals.iter().enumerate() {
            if ext.port == call.port {
                rects.push(inst.external_rect(e));
            }
        }
        let prev = inst.prev_call(c).map(|p| {
            let a = self.sol.get(p).expect("predecessor fixed first");
            let depart = a.berth_start + inst.handling_at(p, a.berth_position);
            (p, depart, inst.distance(inst.calls[p.0].port, call.port))
        });
        let fastest = inst.speeds[inst.fastest_speed()].time_per_distance();
        let lo = match prev {
            Some((_, depart, d)) => call.est.max(depart + fastest * d),
            None => call.est,
        };
        let lo = ceil_to(lo, step);
        let y_max = floor_to(inst.horizon, step);
        let x_max = floor_to(inst.max_position(c), port.segment_length);

        let mut out = Vec::new();
        let mut x = 0.0;
        while x <= x_max + EPS {
            let h = inst.handling_at(c, x);
            let own_fixed = r.handling_rate * h;
            let n_speeds = if prev.is_some() { inst.speeds.len() } else { 1 };
            let mut dead = alloc::vec![false; n_speeds];
            let mut y = lo;
            while y <= y_max + EPS && dead.iter().any(|d| !d) {
                let finish = y + h;
                let own = own_fixed
                    + r.delay_rate * (finish - call.eft).max(0.0)
                    + r.lft_penalty_rate * (finish - call.lft).max(0.0);
                let me = Rect { x, length: len, start: y, duration: h };
                let free = !rects.iter().any(|o| o.overlaps(&me));
                match prev {
                    None => {
                        if own >= budget {
                            dead[0] = true;
                        } else if free {
                            out.push(Branch { x, y, in_speed: None, cost: own });
                        }
                    }
                    Some((p, depart, d)) => {
                        for (s, lvl) in inst.speeds.iter().enumerate() {
                            if dead[s] {
                                continue;
                            }
                            let arrival = depart + lvl.time_per_distance() * d;
                            if arrival > y + EPS {
                                continue;
                            }
                            let cost = own + inst.leg_cost(p, s) + r.waiting_rate * (y - arrival);
                            if cost >= budget {
                                dead[s] = true;
                            } else if free {
                                out.push(Branch { x, y, in_speed: Some(s), cost });
                            }
                        }
                    }
                }
                y += step;
            }
            x += port.segment_length;
        }
        let ideal = call.ideal_position;
        out.sort_by(|a, b| {
            a.cost
                .total_cmp(&b.cost)
                .then(a.y.total_cmp(&b.y))
                .then(crate::math::abs(a.x - ideal).total_cmp(&crate::math::abs(b.x - ideal)))
                .then(a.x.total_cmp(&b.x))
                .then(b.in_speed.cmp(&a.in_speed))
        });
        out
    }

    fn dfs(&mut self, k: usize, partial: f64) -> Result<(), OracleError> {
        if k == self.order.len() {
            if partial < self.best_cost - 1e-9 {
                self.best_cost = partial;
                self.best = self.sol.clone();
            }
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(OracleError::NodeLimit { nodes: self.max_nodes });
        }
        let c = self.order[k];
        let prev = self.inst.prev_call(c);
        let rest = self.tail_bound[k + 1];
        let budget = self.best_cost - 1e-9 - partial - rest;
        for b in self.branches(c, budget) {
            if partial + b.cost + rest >= self.best_cost - 1e-9 {
                break;
            }
            if let Some(p) = prev {
                self.sol.assignments[p.0].as_mut().expect("fixed").leg_speed = b.in_speed;
            }
            self.sol.assignments[c.0] = Some(Assignment {
                berth_position: b.x,
                berth_start: b.y,
                leg_speed: None,
            });
            self.dfs(k + 1, partial + b.cost)?;
            self.sol.assignments[c.0] = None;
        }
        if let Some(p) = prev {
            self.sol.assignments[p.0].as_mut().expect("fixed").leg_speed = None;
        }
        Ok(())
    }
}

/// Optimal plan on the instance's position and start grids, or a refusal when
/// the instance exceeds the caps.
pub fn brute_force(inst: &Instance, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    if inst.ships.len() > cfg.max_ships {
        return Err(OracleError::TooManyShips { ships: inst.ships.len(), max: cfg.max_ships });
    }
    if inst.num_calls() > cfg.max_calls {
        return Err(OracleError::TooManyCalls { calls: inst.num_calls(), max: cfg.max_calls });
    }
    let mut order: Vec<CallId> = (0..inst.num_calls()).map(CallId).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&inst.calls[a.0], &inst.calls[b.0]);
        ca.est
            .total_cmp(&cb.est)
            .then(ca.ship.cmp(&cb.ship))
            .then(ca.call_index.cmp(&cb.call_index))
    });
    for (k, &c) in order.iter().enumerate() {
        if let Some(p) = inst.prev_call(c) {
            if !order[..k].contains(&p) {
                return Err(OracleError::RouteOrder);
            }
        }
    }
    let r = &inst.rates;
    let slow = inst.slowest_speed();
    let mut tail_bound = alloc::vec![0.0; order.len() + 1];
    for k in (0..order.len()).rev() {
        let c = order[k];
        let mut lb = r.handling_rate * inst.calls[c.0].base_handling;
        if inst.next_call(c).is_some() {
            lb += inst.leg_cost(c, slow);
        }
        tail_bound[k] = tail_bound[k + 1] + lb;
    }
    // Fuel of a leg is charged when its destination is fixed, so the bound of
    // a call's own outgoing leg must stay in the tail until then.
    for k in 0..order.len() {
        let mut extra = 0.0;
        for &c in &order[..k] {
            if let Some(n) = inst.next_call(c) {
                if order[k..].contains(&n) {
                    extra += inst.leg_cost(c, slow);
                }
            }
        }
        tail_bound[k] += extra;
    }

    let start = construct(inst);
    let start_cost = inst.objective(&start).expect("construction is complete");
    let mut s = Search {
        inst,
        order,
        tail_bound,
        sol: Solution::empty(inst),
        best: start,
        best_cost: start_cost,
        nodes: 0,
        max_nodes: cfg.max_nodes,
    };
    s.dfs(0, 0.0)?;
    Ok(OracleResult {
        objective: s.best_cost,
        solution: s.best,
        nodes: s.nodes,
    })
}

//! Steepest-descent local search over ejection chains.
//!
//! A chain starts by shifting one visit a single grid step (one segment
//! towards its ideal position, one time step earlier, or one time step later).
//! Every rectangle it now overlaps and every route neighbour it makes
//! unreachable is shifted the same way, and so on, until the plan is
//! conflict-free or the chain exceeds its move budget. External berths never
//! move, so a chain hitting one is dropped.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::math::EPS;
use crate::model::{Assignment, CallId, Instance, Rect, ShipId, Solution};
use crate::placement::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
    Earlier,
    Later,
}

/// Default chain budget: twice the number of ships.
pub fn default_k_chain(inst: &Instance) -> usize {
    2 * inst.ships.len()
}

/// Counters of one local-search run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LsStats {
    pub chains_tried: u64,
    pub chains_feasible: u64,
    pub improvements: u64,
    /// Longest chain (in moves) among the adopted ones.
    pub longest_adopted: usize,
}

/// A candidate neighbour: the moved calls with their new assignments.
#[derive(Debug, Clone)]
pub struct Chain {
    pub moves: usize,
    pub changes: Vec<(CallId, Assignment)>,
    pub delta: f64,
}

struct Ctx<'a> {
    inst: &'a Instance,
    by_port: Vec<Vec<CallId>>,
    ext_by_port: Vec<Vec<usize>>,
}

impl<'a> Ctx<'a> {
    fn new(inst: &'a Instance) -> Self {
        Ctx {
            inst,
            by_port: inst.calls_by_port(),
            ext_by_port: inst.externals_by_port(),
        }
    }

    fn shift(&self, c: CallId, a: &Assignment, dir: Direction) -> Assignment {
        let seg = self.inst.port_of(c).segment_length;
        let step = self.inst.time_step;
        let mut b = *a;
        match dir {
            Direction::Left => b.berth_position -= seg,
            Direction::Right => b.berth_position += seg,
            Direction::Earlier => b.berth_start -= step,
            Direction::Later => b.berth_start += step,
        }
        b
    }

    /// Coordinate that orders rectangles along `dir`; larger is further ahead.
    fn ahead(r: &Rect, dir: Direction) -> f64 {
        match dir {
            Direction::Left => -r.x,
            Direction::Right => r.x,
            Direction::Earlier => -r.start,
            Direction::Later => r.start,
        }
    }

    fn fastest_travel(&self, from: CallId, to: CallId) -> f64 {
        let inst = self.inst;
        let d = inst.distance(inst.calls[from.0].port, inst.calls[to.0].port);
        inst.speeds[inst.fastest_speed()].time_per_distance() * d
    }

    fn finish(&self, c: CallId, a: &Assignment) -> f64 {
        a.berth_start + self.inst.handling_at(c, a.berth_position)
    }

    /// Builds the chain seeded by moving `seed` towards `dir`.
    fn chain(&self, sol: &Solution, seed: CallId, dir: Direction, k_chain: usize) -> Option<Chain> {
        let inst = self.inst;
        let mut changed: Vec<(CallId, Assignment)> = Vec::new();
        let get = |changed: &Vec<(CallId, Assignment)>, c: CallId| -> Option<Assignment> {
            changed
                .iter()
                .find(|(o, _)| *o == c)
                .map(|(_, a)| *a)
                .or_else(|| sol.get(c).copied())
        };
        let mut queue: VecDeque<CallId> = VecDeque::from([seed]);
        let mut moves = 0usize;
        while let Some(o) = queue.pop_front() {
            moves += 1;
            if moves > k_chain {
                return None;
            }
            let old = get(&changed, o)?;
            let new = self.shift(o, &old, dir);
            let call = &inst.calls[o.0];
            if new.berth_position < -EPS || new.berth_position > inst.max_position(o) + EPS {
                return None;
            }
            if new.berth_start < call.est - EPS {
                return None;
            }
            match changed.iter_mut().find(|(c, _)| *c == o) {
                Some(e) => e.1 = new,
                None => changed.push((o, new)),
            }
            let rect = inst.call_rect(o, &new);
            let push = |queue: &mut VecDeque<CallId>, c: CallId| {
                if !queue.contains(&c) {
                    queue.push_back(c);
                }
            };

            let port = call.port.0;
            for &e in &self.ext_by_port[port] {
                if rect.overlaps(&inst.external_rect(e)) {
                    return None;
                }
            }
            for &q in &self.by_port[port] {
                if q == o {
                    continue;
                }
                let Some(qa) = get(&changed, q) else { continue };
                let qr = inst.call_rect(q, &qa);
                if rect.overlaps(&qr) {
                    let o_ahead = Self::ahead(&rect, dir) > Self::ahead(&qr, dir) + EPS;
                    push(&mut queue, if o_ahead { o } else { q });
                }
            }

            let finish = rect.end();
            if let Some(n) = inst.next_call(o) {
                if let Some(na) = get(&changed, n) {
                    if na.berth_start < finish + self.fastest_travel(o, n) - EPS {
                        if dir == Direction::Later {
                            push(&mut queue, n);
                        } else {
                            return None;
                        }
                    }
                }
            }
            if let Some(p) = inst.prev_call(o) {
                if let Some(pa) = get(&changed, p) {
                    if new.berth_start < self.finish(p, &pa) + self.fastest_travel(p, o) - EPS {
                        if dir == Direction::Earlier {
                            push(&mut queue, p);
                        } else {
                            return None;
                        }
                    }
                }
            }
        }

        // Re-sail every leg touching a moved call at its slowest fitting speed.
        let mut legs: Vec<CallId> = Vec::new();
        for &(c, _) in &changed {
            if inst.next_call(c).is_some() && !legs.contains(&c) {
                legs.push(c);
            }
            if let Some(p) = inst.prev_call(c) {
                if !legs.contains(&p) {
                    legs.push(p);
                }
            }
        }
        for from in legs {
            let to = inst.next_call(from).expect("leg has a destination");
            let fa = get(&changed, from)?;
            let ta = get(&changed, to)?;
            let d = inst.distance(inst.calls[from.0].port, inst.calls[to.0].port);
            let s = Schedule::slowest_fitting_speed(inst, d, ta.berth_start - self.finish(from, &fa))?;
            let mut fa = fa;
            fa.leg_speed = Some(s);
            match changed.iter_mut().find(|(c, _)| *c == from) {
                Some(e) => e.1 = fa,
                None => changed.push((from, fa)),
            }
        }

        let mut ships: Vec<ShipId> = changed.iter().map(|(c, _)| inst.calls[c.0].ship).collect();
        ships.sort();
        ships.dedup();
        let mut cand = sol.clone();
        for &(c, a) in &changed {
            cand.assignments[c.0] = Some(a);
        }
        let delta: f64 = ships
            .iter()
            .map(|&s| ship_cost(inst, &cand, s) - ship_cost(inst, sol, s))
            .sum();
        Some(Chain { moves, changes: changed, delta })
    }
}

/// Objective contribution of one ship's route.
pub fn ship_cost(inst: &Instance, sol: &Solution, ship: ShipId) -> f64 {
    let r = &inst.rates;
    let mut total = 0.0;
    for &c in &inst.ships[ship.0].route {
        let a = sol.get(c).expect("complete solution");
        let st = inst.call_state(sol, c).expect("complete solution");
        total += r.waiting_rate * (a.berth_start - st.arrival)
            + r.handling_rate * st.handling
            + r.delay_rate * st.delay
            + r.lft_penalty_rate * st.lft_excess;
        if let Some(s) = a.leg_speed {
            total += inst.leg_cost(c, s);
        }
    }
    total
}

/// Seed directions tried for `c`: towards the ideal position (if not there),
/// earlier and later.
pub fn seed_directions(inst: &Instance, sol: &Solution, c: CallId) -> Vec<Direction> {
    let a = sol.get(c).expect("complete solution");
    let ideal = inst.calls[c.0].ideal_position;
    let mut out = Vec::with_capacity(3);
    if a.berth_position > ideal + EPS {
        out.push(Direction::Left);
    } else if a.berth_position < ideal - EPS {
        out.push(Direction::Right);
    }
    out.push(Direction::Earlier);
    out.push(Direction::Later);
    out
}

/// All feasible chains from the current solution.
pub fn neighbourhood(inst: &Instance, sol: &Solution, k_chain: usize) -> Vec<Chain> {
    let ctx = Ctx::new(inst);
    let mut out = Vec::new();
    for port in &ctx.by_port {
        for &c in port {
            for dir in seed_directions(inst, sol, c) {
                if let Some(ch) = ctx.chain(sol, c, dir, k_chain) {
                    out.push(ch);
                }
            }
        }
    }
    out
}

/// Applies the best strictly improving chain until none exists. The result
/// is never worse than `sol` and stays feasible.
pub fn local_search(inst: &Instance, sol: &Solution, k_chain: usize) -> (Solution, LsStats) {
    let ctx = Ctx::new(inst);
    let mut cur = sol.clone();
    let mut stats = LsStats::default();
    loop {
        let mut best: Option<Chain> = None;
        for port in &ctx.by_port {
            for &c in port {
                for dir in seed_directions(inst, &cur, c) {
                    stats.chains_tried += 1;
                    let Some(ch) = ctx.chain(&cur, c, dir, k_chain) else { continue };
                    stats.chains_feasible += 1;
                    if ch.delta < -1e-6 && best.as_ref().is_none_or(|b| ch.delta < b.delta) {
                        best = Some(ch);
                    }
                }
            }
        }
        let Some(ch) = best else { break };
        for (c, a) in ch.changes {
            cur.assignments[c.0] = Some(a);
        }
        stats.improvements += 1;
        stats.longest_adopted = stats.longest_adopted.max(ch.moves);
    }
    (cur, stats)
}

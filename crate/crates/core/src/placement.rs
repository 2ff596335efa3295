//! Grid placement of port visits into a partial schedule.
//!
//! A [`Schedule`] is a partial [`Solution`] together with per-port occupancy.
//! For an unscheduled call it can count the feasible (segment, start) grid
//! points, find the cheapest feasible position, and enumerate the positions
//! that touch another rectangle or a boundary of the decision space.
//!
//! Feasibility of a grid point means: inside the quay, no overlap with any
//! scheduled or external rectangle at the port, start not before the earliest
//! start nor before the fastest possible arrival from a scheduled predecessor,
//! and a scheduled successor still reachable at the fastest speed.
//!
//! The incremental cost of a placement is the call's own handling, delay and
//! LFT penalty plus, for every adjacent leg whose other end is scheduled, the
//! leg's fuel and the waiting at its destination. Legs always sail at the
//! slowest speed that still arrives in time, which minimises both terms.

use alloc::vec::Vec;

use crate::math::{self, ceil_to, floor_to, EPS};
use crate::model::{Assignment, CallId, Instance, Occupant, Rect, Solution};

/// Which grid points are admissible insertion positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateMode {
    /// Every feasible grid point.
    All,
    /// Feasible grid points whose rectangle touches another rectangle, a quay
    /// end, the earliest feasible start or the latest admissible start.
    Adjacent,
}

/// A priced position for one call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub call: CallId,
    pub x: f64,
    pub y: f64,
    pub cost: f64,
    /// Speed for the leg arriving from the scheduled predecessor.
    pub in_speed: Option<usize>,
    /// Speed for the leg towards the scheduled successor.
    pub out_speed: Option<usize>,
}

impl Placement {
    /// Deterministic preference: cost, then earlier start, then closer to the
    /// ideal position, then lower position.
    pub fn better_than(&self, other: &Placement, ideal: f64) -> bool {
        const TOL: f64 = 1e-7;
        if self.cost < other.cost - TOL {
            return true;
        }
        if self.cost > other.cost + TOL {
            return false;
        }
        if self.y != other.y {
            return self.y < other.y;
        }
        let (da, db) = (math::abs(self.x - ideal), math::abs(other.x - ideal));
        if math::abs(da - db) > EPS {
            return da < db;
        }
        self.x < other.x
    }
}

/// Partial solution with occupancy lists per port.
#[derive(Debug, Clone)]
pub struct Schedule<'a> {
    inst: &'a Instance,
    sol: Solution,
    by_port: Vec<Vec<CallId>>,
    ext_by_port: Vec<Vec<usize>>,
}

/// Time-feasibility window of a call independent of the position.
#[derive(Debug, Clone, Copy)]
struct Window {
    lo: f64,
    /// Latest finish (start + handling) allowed by the successor, or +inf.
    finish_by: f64,
}

impl<'a> Schedule<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Schedule {
            inst,
            sol: Solution::empty(inst),
            by_port: alloc::vec![Vec::new(); inst.ports.len()],
            ext_by_port: inst.externals_by_port(),
        }
    }

    pub fn from_solution(inst: &'a Instance, sol: Solution) -> Self {
        let mut by_port = alloc::vec![Vec::new(); inst.ports.len()];
        for (i, a) in sol.assignments.iter().enumerate() {
            if a.is_some() {
                by_port[inst.calls[i].port.0].push(CallId(i));
            }
        }
        Schedule {
            inst,
            sol,
            by_port,
            ext_by_port: inst.externals_by_port(),
        }
    }

    #[inline]
    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    #[inline]
    pub fn solution(&self) -> &Solution {
        &self.sol
    }

    pub fn into_solution(self) -> Solution {
        self.sol
    }

    #[inline]
    pub fn is_scheduled(&self, c: CallId) -> bool {
        self.sol.is_scheduled(c)
    }

    pub fn unscheduled(&self) -> Vec<CallId> {
        self.sol.missing()
    }

    /// Rectangles (scheduled calls and externals) at the port of `c`,
    /// excluding `c` itself.
    pub fn rects_near(&self, c: CallId) -> Vec<(Occupant, Rect)> {
        let p = self.inst.calls[c.0].port.0;
        let mut out = Vec::with_capacity(self.by_port[p].len() + self.ext_by_port[p].len());
        for &o in &self.by_port[p] {
            if o != c {
                let a = self.sol.get(o).expect("listed calls are scheduled");
                out.push((Occupant::Call(o), self.inst.call_rect(o, a)));
            }
        }
        for &e in &self.ext_by_port[p] {
            out.push((Occupant::External(e), self.inst.external_rect(e)));
        }
        out
    }

    /// Removes `c` from the schedule. The predecessor's leg speed is cleared.
    pub fn unschedule(&mut self, c: CallId) {
        if self.sol.assignments[c.0].take().is_none() {
            return;
        }
        let p = self.inst.calls[c.0].port.0;
        self.by_port[p].retain(|&o| o != c);
        if let Some(prev) = self.inst.prev_call(c) {
            if let Some(a) = self.sol.get_mut(prev) {
                a.leg_speed = None;
            }
        }
    }

    /// Puts `c` at the placement's position and sets both adjacent leg speeds.
    pub fn place(&mut self, pl: &Placement) {
        let c = pl.call;
        debug_assert!(!self.is_scheduled(c));
        self.sol.assignments[c.0] = Some(Assignment {
            berth_position: pl.x,
            berth_start: pl.y,
            leg_speed: pl.out_speed,
        });
        self.by_port[self.inst.calls[c.0].port.0].push(c);
        if let Some(prev) = self.inst.prev_call(c) {
            if let Some(a) = self.sol.get_mut(prev) {
                a.leg_speed = pl.in_speed;
            }
        }
    }

    /// Places `c` exactly at `a`, recomputing the adjacent leg speeds. Used to
    /// restore removed assignments.
    pub fn place_assignment(&mut self, c: CallId, a: &Assignment) -> Option<Placement> {
        let pl = self.price(c, a.berth_position, a.berth_start)?;
        self.place(&pl);
        Some(pl)
    }

    /// Slowest speed index whose sailing time fits into `gap` hours.
    pub fn slowest_fitting_speed(inst: &Instance, distance: f64, gap: f64) -> Option<usize> {
        inst.speeds
            .iter()
            .position(|s| s.time_per_distance() * distance <= gap + EPS)
    }

    fn window(&self, c: CallId) -> Window {
        let inst = self.inst;
        let call = &inst.calls[c.0];
        let fastest = &inst.speeds[inst.fastest_speed()];
        let mut lo = call.est;
        if let Some(p) = inst.prev_call(c) {
            if let Some(a) = self.sol.get(p) {
                let dist = inst.distance(inst.calls[p.0].port, call.port);
                let arr = a.berth_start
                    + inst.handling_at(p, a.berth_position)
                    + fastest.time_per_distance() * dist;
                lo = lo.max(arr);
            }
        }
        let mut finish_by = f64::INFINITY;
        if let Some(n) = inst.next_call(c) {
            if let Some(a) = self.sol.get(n) {
                let dist = inst.distance(call.port, inst.calls[n.0].port);
                finish_by = a.berth_start - fastest.time_per_distance() * dist;
            }
        }
        Window {
            lo: ceil_to(lo, inst.time_step),
            finish_by,
        }
    }

    /// Prices `c` at `(x, y)` ignoring overlaps; `None` if an adjacent leg
    /// cannot be sailed at any speed.
    pub fn price(&self, c: CallId, x: f64, y: f64) -> Option<Placement> {
        let inst = self.inst;
        let r = &inst.rates;
        let call = &inst.calls[c.0];
        let h = inst.handling_at(c, x);
        let finish = y + h;
        let mut cost = r.handling_rate * h
            + r.delay_rate * (finish - call.eft).max(0.0)
            + r.lft_penalty_rate * (finish - call.lft).max(0.0);
        let mut in_speed = None;
        let mut out_speed = None;
        if let Some(p) = inst.prev_call(c) {
            if let Some(a) = self.sol.get(p) {
                let dist = inst.distance(inst.calls[p.0].port, call.port);
                let depart = a.berth_start + inst.handling_at(p, a.berth_position);
                let s = Self::slowest_fitting_speed(inst, dist, y - depart)?;
                let arrival = depart + inst.speeds[s].time_per_distance() * dist;
                cost += inst.leg_cost(p, s) + r.waiting_rate * (y - arrival);
                in_speed = Some(s);
            }
        }
        if let Some(n) = inst.next_call(c) {
            if let Some(a) = self.sol.get(n) {
                let dist = inst.distance(call.port, inst.calls[n.0].port);
                let s = Self::slowest_fitting_speed(inst, dist, a.berth_start - finish)?;
                let arrival = finish + inst.speeds[s].time_per_distance() * dist;
                cost += inst.leg_cost(c, s) + r.waiting_rate * (a.berth_start - arrival);
                out_speed = Some(s);
            }
        }
        Some(Placement {
            call: c,
            x,
            y,
            cost,
            in_speed,
            out_speed,
        })
    }

    /// Grid positions (leftmost points) for `c`, ascending.
    pub fn x_grid(&self, c: CallId) -> impl Iterator<Item = f64> {
        let seg = self.inst.port_of(c).segment_length;
        let max_k = math::floor(self.inst.max_position(c) / seg + EPS);
        let max_k = if max_k < 0.0 { -1 } else { max_k as i64 };
        (0..=max_k).map(move |k| k as f64 * seg)
    }

    fn max_grid_x(&self, c: CallId) -> f64 {
        floor_to(self.inst.max_position(c), self.inst.port_of(c).segment_length)
    }

    /// Open start-time intervals `(a, b)` that make `c` at `x` overlap a
    /// rectangle, merged and sorted.
    fn blocked(&self, rects: &[(Occupant, Rect)], x: f64, len: f64, h: f64) -> Vec<(f64, f64)> {
        let probe = Rect {
            x,
            length: len,
            start: 0.0,
            duration: 0.0,
        };
        let mut iv: Vec<(f64, f64)> = rects
            .iter()
            .filter(|(_, r)| probe.overlaps_space(r))
            .map(|(_, r)| (r.start - h, r.end()))
            .collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a < last.1 - EPS => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        merged
    }

    /// Smallest grid start `>= t` not strictly inside a blocked interval.
    fn next_free(blocked: &[(f64, f64)], t: f64, step: f64) -> f64 {
        let mut y = ceil_to(t, step);
        for &(a, b) in blocked {
            if b <= y + EPS {
                continue;
            }
            if a < y - EPS {
                y = ceil_to(b, step);
            } else {
                break;
            }
        }
        y
    }

    fn is_free(blocked: &[(f64, f64)], y: f64) -> bool {
        !blocked.iter().any(|&(a, b)| a < y - EPS && y < b - EPS)
    }

    /// Whether the rectangle of `c` at `(x, y)` touches something.
    #[allow(clippy::too_many_arguments)]
    fn touches(
        &self,
        c: CallId,
        rects: &[(Occupant, Rect)],
        x: f64,
        y: f64,
        h: f64,
        lo: f64,
        latest: f64,
    ) -> bool {
        let inst = self.inst;
        let seg = inst.port_of(c).segment_length;
        let step = inst.time_step;
        if x <= EPS || x >= self.max_grid_x(c) - EPS {
            return true;
        }
        if y <= lo + EPS || y + step > latest + EPS {
            return true;
        }
        let len = inst.ship_of(c).length;
        let shifted = [
            Rect { x: x - seg, length: len, start: y, duration: h },
            Rect { x: x + seg, length: len, start: y, duration: h },
            Rect { x, length: len, start: y - step, duration: h },
            Rect { x, length: len, start: y + step, duration: h },
        ];
        rects
            .iter()
            .any(|(_, r)| shifted.iter().any(|s| s.overlaps(r)))
    }

    /// Latest admissible start at `x` (successor reachability), and the
    /// adjacency "latest" boundary which also respects the horizon.
    fn latest_start(&self, w: &Window, h: f64) -> (f64, f64) {
        let step = self.inst.time_step;
        let hi = if w.finish_by.is_finite() {
            floor_to(w.finish_by - h, step)
        } else {
            f64::INFINITY
        };
        let boundary = hi.min(floor_to(self.inst.horizon - h, step).max(w.lo));
        (hi, boundary)
    }

    /// Cheapest placement of `c` at grid position `x`, over the admissible
    /// starts for `mode`.
    fn best_at_x(
        &self,
        c: CallId,
        rects: &[(Occupant, Rect)],
        w: &Window,
        x: f64,
        mode: CandidateMode,
    ) -> Option<Placement> {
        let inst = self.inst;
        let call = &inst.calls[c.0];
        let step = inst.time_step;
        let h = inst.handling_at(c, x);
        let (hi, latest) = self.latest_start(w, h);
        if w.lo > hi + EPS {
            return None;
        }
        let blocked = self.blocked(rects, x, inst.ship_of(c).length, h);

        // Past `mono` the cost is non-decreasing in the start time, so only the
        // first admissible start beyond it matters.
        let mono = if w.finish_by.is_finite() {
            hi
        } else {
            let mut m = w.lo.max(call.eft - h);
            if let Some(p) = inst.prev_call(c) {
                if let Some(a) = self.sol.get(p) {
                    let dist = inst.distance(inst.calls[p.0].port, call.port);
                    let slow = &inst.speeds[inst.slowest_speed()];
                    m = m.max(
                        a.berth_start
                            + inst.handling_at(p, a.berth_position)
                            + slow.time_per_distance() * dist,
                    );
                }
            }
            m
        };

        let mut best: Option<Placement> = None;
        let consider = |y: f64, best: &mut Option<Placement>| {
            if let Some(pl) = self.price(c, x, y) {
                if best.is_none_or(|b| pl.better_than(&b, call.ideal_position)) {
                    *best = Some(pl);
                }
            }
        };

        let mut y = Self::next_free(&blocked, w.lo, step);
        while y <= hi + EPS {
            let admissible = match mode {
                CandidateMode::All => true,
                CandidateMode::Adjacent => self.touches(c, rects, x, y, h, w.lo, latest),
            };
            if admissible {
                consider(y, &mut best);
                if y >= mono - EPS {
                    break;
                }
            }
            if y >= mono - EPS {
                // Adjacent mode beyond the monotone point: jump to the next
                // touching start instead of walking the grid.
                if let Some(next) = self.next_touching(c, rects, &blocked, x, y + step, h, w.lo, hi, latest) {
                    consider(next, &mut best);
                }
                break;
            }
            y = Self::next_free(&blocked, y + step, step);
        }
        best
    }

    /// First start `>= t` that is free, within `hi`, and touches something.
    #[allow(clippy::too_many_arguments)]
    fn next_touching(
        &self,
        c: CallId,
        rects: &[(Occupant, Rect)],
        blocked: &[(f64, f64)],
        x: f64,
        t: f64,
        h: f64,
        lo: f64,
        hi: f64,
        latest: f64,
    ) -> Option<f64> {
        let inst = self.inst;
        let step = inst.time_step;
        let seg = inst.port_of(c).segment_length;
        let len = inst.ship_of(c).length;
        if x <= EPS || x >= self.max_grid_x(c) - EPS {
            let y = Self::next_free(blocked, t, step);
            return (y <= hi + EPS).then_some(y);
        }
        let here = Rect { x, length: len, start: 0.0, duration: 0.0 };
        let left = Rect { x: x - seg, ..here };
        let right = Rect { x: x + seg, ..here };
        let mut events: Vec<f64> = alloc::vec![lo, latest];
        for (_, r) in rects {
            if here.overlaps_space(r) {
                events.push(ceil_to(r.end(), step));
                events.push(floor_to(r.start - h, step));
            } else if left.overlaps_space(r) || right.overlaps_space(r) {
                let first = ceil_to(t.max(r.start - h + 2.0 * EPS), step);
                let first = if first <= r.start - h + EPS { first + step } else { first };
                if first < r.end() - EPS {
                    events.push(first);
                }
            }
        }
        events
            .into_iter()
            .filter(|&y| y >= t - EPS && y <= hi + EPS && y >= lo - EPS)
            .filter(|&y| Self::is_free(blocked, y))
            .filter(|&y| self.touches(c, rects, x, y, h, lo, latest))
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Cheapest placement per grid position `x`, ascending in `x`.
    pub fn best_per_x(&self, c: CallId, mode: CandidateMode) -> Vec<Placement> {
        let rects = self.rects_near(c);
        let w = self.window(c);
        self.x_grid(c)
            .filter_map(|x| self.best_at_x(c, &rects, &w, x, mode))
            .collect()
    }

    /// Cheapest feasible placement of `c`; `None` when no grid point is
    /// feasible (only possible when a scheduled successor is unreachable).
    pub fn best_placement(&self, c: CallId, mode: CandidateMode) -> Option<Placement> {
        let ideal = self.inst.calls[c.0].ideal_position;
        self.best_per_x(c, mode)
            .into_iter()
            .reduce(|a, b| if b.better_than(&a, ideal) { b } else { a })
    }

    /// The `k` cheapest per-position placements of `c`, cheapest first.
    pub fn k_best(&self, c: CallId, k: usize, mode: CandidateMode) -> Vec<Placement> {
        let ideal = self.inst.calls[c.0].ideal_position;
        let mut all = self.best_per_x(c, mode);
        all.sort_by(|a, b| {
            if a.better_than(b, ideal) {
                core::cmp::Ordering::Less
            } else if b.better_than(a, ideal) {
                core::cmp::Ordering::Greater
            } else {
                core::cmp::Ordering::Equal
            }
        });
        all.truncate(k);
        all
    }

    /// Number of feasible (segment, start) grid points for `c` whose berthing
    /// period finishes by the latest finish time.
    pub fn count_positions(&self, c: CallId) -> usize {
        let inst = self.inst;
        let step = inst.time_step;
        let lft = inst.calls[c.0].lft;
        let rects = self.rects_near(c);
        let w = self.window(c);
        let len = inst.ship_of(c).length;
        let mut total = 0usize;
        for x in self.x_grid(c) {
            let h = inst.handling_at(c, x);
            let (hi, _) = self.latest_start(&w, h);
            let up = hi.min(floor_to(lft - h, step));
            if up < w.lo - EPS {
                continue;
            }
            let k_lo = math::grid_index(w.lo, step);
            let k_up = math::grid_index(up, step);
            let mut n = (k_up - k_lo + 1) as usize;
            for (a, b) in self.blocked(&rects, x, len, h) {
                // grid points strictly inside (a, b), clipped to [lo, up]
                let first = math::grid_index(ceil_to(a + 2.0 * EPS, step), step).max(k_lo);
                let last = math::grid_index(floor_to(b - 2.0 * EPS, step), step).min(k_up);
                if last >= first {
                    n -= (last - first + 1) as usize;
                }
            }
            total += n;
        }
        total
    }

    /// All admissible grid points with start `<= y_max`, for inspection and
    /// tests. Exhaustive, so only meant for small windows.
    pub fn enumerate_positions(&self, c: CallId, mode: CandidateMode, y_max: f64) -> Vec<(f64, f64)> {
        let inst = self.inst;
        let step = inst.time_step;
        let rects = self.rects_near(c);
        let w = self.window(c);
        let len = inst.ship_of(c).length;
        let mut out = Vec::new();
        for x in self.x_grid(c) {
            let h = inst.handling_at(c, x);
            let (hi, latest) = self.latest_start(&w, h);
            let blocked = self.blocked(&rects, x, len, h);
            let mut y = w.lo;
            while y <= hi.min(y_max) + EPS {
                if Self::is_free(&blocked, y)
                    && self.price(c, x, y).is_some()
                    && (mode == CandidateMode::All
                        || self.touches(c, &rects, x, y, h, w.lo, latest))
                {
                    out.push((x, y));
                }
                y += step;
            }
        }
        out
    }

    /// Earliest time the ship can be at the port of `c`: fastest arrival from
    /// a scheduled predecessor, otherwise the earliest start.
    pub fn earliest_arrival(&self, c: CallId) -> f64 {
        let inst = self.inst;
        let call = &inst.calls[c.0];
        match inst.prev_call(c).and_then(|p| self.sol.get(p).map(|a| (p, a))) {
            Some((p, a)) => {
                let dist = inst.distance(inst.calls[p.0].port, call.port);
                a.berth_start
                    + inst.handling_at(p, a.berth_position)
                    + inst.speeds[inst.fastest_speed()].time_per_distance() * dist
            }
            None => call.est,
        }
    }

    /// Unschedules the successor of `c` if it is scheduled; returns it.
    pub fn release_successor(&mut self, c: CallId) -> Option<CallId> {
        let n = self.inst.next_call(c)?;
        if self.is_scheduled(n) {
            self.unschedule(n);
            Some(n)
        } else {
            None
        }
    }

    /// Total objective of the (complete) schedule.
    pub fn objective(&self) -> f64 {
        self.inst
            .objective(&self.sol)
            .expect("objective of a complete schedule")
    }
}

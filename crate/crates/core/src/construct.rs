//! Most-constrained-first greedy construction.

use alloc::vec::Vec;

use crate::model::{CallId, Instance, Solution};
use crate::placement::{CandidateMode, Schedule};

/// Number of feasible (segment, start) grid points for an unscheduled call
/// whose berthing period ends by its latest finish time.
pub fn feasible_position_count(partial: &Schedule<'_>, call: CallId) -> usize {
    partial.count_positions(call)
}

/// Ordering key of the most-constrained rule: fewest positions, then earliest
/// EST, then lowest ship id, then lowest call index.
pub fn constraint_key(inst: &Instance, count: usize, c: CallId) -> (usize, f64, usize, usize) {
    let call = &inst.calls[c.0];
    (count, call.est, call.ship.0, call.call_index)
}

fn key_less(a: &(usize, f64, usize, usize), b: &(usize, f64, usize, usize)) -> bool {
    a.0.cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.cmp(&b.2))
        .then(a.3.cmp(&b.3))
        .is_lt()
}

/// Pending call with the fewest feasible positions, given cached counts.
pub fn most_constrained(inst: &Instance, pending: &[CallId], counts: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, (usize, f64, usize, usize))> = None;
    for (i, &c) in pending.iter().enumerate() {
        let k = constraint_key(inst, counts[c.0], c);
        if best.as_ref().is_none_or(|(_, b)| key_less(&k, b)) {
            best = Some((i, k));
        }
    }
    best.map(|(i, _)| i)
}

/// Per-call cache of feasible-position counts, invalidated around changes.
#[derive(Debug, Clone)]
pub struct CountCache {
    counts: Vec<Option<usize>>,
}

impl CountCache {
    pub fn new(inst: &Instance) -> Self {
        CountCache { counts: alloc::vec![None; inst.num_calls()] }
    }

    pub fn get(&mut self, s: &Schedule<'_>, c: CallId) -> usize {
        *self.counts[c.0].get_or_insert_with(|| s.count_positions(c))
    }

    /// Drops counts that a change to `c` can affect: calls at the same port
    /// and the route neighbours of `c`.
    pub fn invalidate(&mut self, inst: &Instance, c: CallId) {
        let port = inst.calls[c.0].port;
        for (i, call) in inst.calls.iter().enumerate() {
            if call.port == port {
                self.counts[i] = None;
            }
        }
        for n in [inst.prev_call(c), inst.next_call(c)].into_iter().flatten() {
            self.counts[n.0] = None;
        }
    }
}

/// Places every call of `pending` into `sched` with the most-constrained
/// rule and the cheapest position of `mode`. Calls whose scheduled successor
/// blocks every position release that successor, which is queued again.
pub fn place_most_constrained(sched: &mut Schedule<'_>, mut pending: Vec<CallId>, mode: CandidateMode) {
    let inst = sched.instance();
    let mut cache = CountCache::new(inst);
    while !pending.is_empty() {
        let counts: Vec<usize> = {
            let mut v = alloc::vec![0; inst.num_calls()];
            for &c in &pending {
                v[c.0] = cache.get(sched, c);
            }
            v
        };
        let i = most_constrained(inst, &pending, &counts).expect("pending is non-empty");
        let c = pending[i];
        insert_or_release(sched, c, mode, &mut pending, &mut cache);
    }
}

/// Inserts `c` at its cheapest position and removes it from `pending`. When
/// a scheduled successor blocks every position, the successor is released
/// into `pending` first.
pub fn insert_or_release(
    sched: &mut Schedule<'_>,
    c: CallId,
    mode: CandidateMode,
    pending: &mut Vec<CallId>,
    cache: &mut CountCache,
) {
    let inst = sched.instance();
    let pl = match cheapest(sched, c, mode) {
        Some(pl) => pl,
        None => {
            let n = sched
                .release_successor(c)
                .expect("only a scheduled successor can block every position");
            pending.push(n);
            cache.invalidate(inst, n);
            cheapest(sched, c, mode).expect("an unconstrained call always fits after the last rectangle")
        }
    };
    sched.place(&pl);
    pending.retain(|&o| o != c);
    cache.invalidate(inst, c);
}

fn cheapest(sched: &Schedule<'_>, c: CallId, mode: CandidateMode) -> Option<crate::placement::Placement> {
    sched.best_placement(c, mode).or_else(|| {
        if mode == CandidateMode::Adjacent {
            sched.best_placement(c, CandidateMode::All)
        } else {
            None
        }
    })
}

/// Greedy construction: repeatedly schedules the most constrained call at its
/// cheapest position touching another rectangle or a boundary.
pub fn construct(inst: &Instance) -> Solution {
    let mut sched = Schedule::new(inst);
    let pending: Vec<CallId> = (0..inst.num_calls()).map(CallId).collect();
    place_most_constrained(&mut sched, pending, CandidateMode::Adjacent);
    sched.into_solution()
}

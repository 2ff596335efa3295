//! Destroy and repair operators with roulette-wheel adaptive selection.

use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::construct::{constraint_key, insert_or_release, CountCache};
use crate::math::{self, ceil, powf, round};
use crate::model::{CallId, Instance, Solution};
use crate::placement::{CandidateMode, Placement, Schedule};
use crate::sampling::{sample_indices, unit};

/// Parameters shared by the operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    /// Fraction of all calls removed per iteration.
    pub rho: f64,
    /// Relatedness weights for berth position, start and end.
    pub shaw_a: f64,
    pub shaw_b: f64,
    pub shaw_c: f64,
    /// Randomness exponent of the removal picks.
    pub alpha: f64,
    /// Randomness exponent of greedy and packing insertion.
    pub gamma: f64,
    /// Randomness exponent of arrival insertion.
    pub mu: f64,
    /// Regret depth.
    pub kappa: usize,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams {
            rho: 0.326,
            shaw_a: 0.55,
            shaw_b: 1.36,
            shaw_c: 0.89,
            alpha: 2.66,
            gamma: 2.85,
            mu: 2.6,
            kappa: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Removal {
    Shaw,
    CostTime,
    CostSpace,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Insertion {
    Greedy,
    Regret,
    Packing,
    Arrival,
}

impl Removal {
    pub const ALL: [Removal; 4] = [Removal::Shaw, Removal::CostTime, Removal::CostSpace, Removal::Random];

    pub fn name(self) -> &'static str {
        match self {
            Removal::Shaw => "shaw",
            Removal::CostTime => "cost_time",
            Removal::CostSpace => "cost_space",
            Removal::Random => "random",
        }
    }
}

impl Insertion {
    pub const ALL: [Insertion; 4] = [
        Insertion::Greedy,
        Insertion::Regret,
        Insertion::Packing,
        Insertion::Arrival,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Insertion::Greedy => "greedy",
            Insertion::Regret => "regret",
            Insertion::Packing => "packing",
            Insertion::Arrival => "arrival",
        }
    }
}

impl fmt::Display for Removal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Insertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Number of calls removed per iteration: `max(1, round(rho * total))`.
pub fn removal_count(total: usize, rho: f64) -> usize {
    (round(rho * total as f64) as usize).clamp(1, total.max(1))
}

/// 1-based index `ceil(n * p^alpha)` clamped to `1..=n`.
pub fn randomized_index(n: usize, alpha: f64, p: f64) -> usize {
    debug_assert!(n >= 1);
    let v = ceil(n as f64 * powf(p, alpha));
    if v < 1.0 {
        1
    } else if v > n as f64 {
        n
    } else {
        v as usize
    }
}

/// Draws a 0-based position with [`randomized_index`].
pub fn randomized_pick(rng: &mut impl RngCore, n: usize, alpha: f64) -> usize {
    randomized_index(n, alpha, unit(rng)) - 1
}

/// `A |dx| + B |dy| + C |d(end)|` between two scheduled calls; lower means
/// more related.
pub fn relatedness(inst: &Instance, sol: &Solution, i: CallId, j: CallId, a: f64, b: f64, c: f64) -> f64 {
    let ai = sol.get(i).expect("scheduled");
    let aj = sol.get(j).expect("scheduled");
    let ei = ai.berth_start + inst.handling_at(i, ai.berth_position);
    let ej = aj.berth_start + inst.handling_at(j, aj.berth_position);
    a * math::abs(ai.berth_position - aj.berth_position)
        + b * math::abs(ai.berth_start - aj.berth_start)
        + c * math::abs(ei - ej)
}

/// A partial schedule and the calls taken out of it.
#[derive(Debug, Clone)]
pub struct RemovalResult<'a> {
    pub partial: Schedule<'a>,
    pub removed: Vec<CallId>,
}

fn scheduled_calls(s: &Schedule<'_>) -> Vec<CallId> {
    (0..s.instance().num_calls())
        .map(CallId)
        .filter(|&c| s.is_scheduled(c))
        .collect()
}

fn finish_removal<'a>(mut partial: Schedule<'a>, mut removed: Vec<CallId>, k: usize) -> RemovalResult<'a> {
    removed.truncate(k);
    for &c in &removed {
        partial.unschedule(c);
    }
    RemovalResult { partial, removed }
}

fn push_unique(list: &mut Vec<CallId>, c: CallId) {
    if !list.contains(&c) {
        list.push(c);
    }
}

/// Shaw removal over same-port pairs sorted by relatedness.
pub fn shaw_removal<'a>(
    inst: &'a Instance,
    sol: &Solution,
    k: usize,
    p: &OperatorParams,
    rng: &mut impl RngCore,
) -> RemovalResult<'a> {
    let partial = Schedule::from_solution(inst, sol.clone());
    let mut pairs: Vec<(f64, CallId, CallId)> = Vec::new();
    for calls in inst.calls_by_port() {
        for (n, &i) in calls.iter().enumerate() {
            for &j in &calls[n + 1..] {
                if sol.is_scheduled(i) && sol.is_scheduled(j) {
                    pairs.push((relatedness(inst, sol, i, j, p.shaw_a, p.shaw_b, p.shaw_c), i, j));
                }
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut removed = Vec::with_capacity(k + 1);
    while removed.len() < k && !pairs.is_empty() {
        let (_, i, j) = pairs.remove(randomized_pick(rng, pairs.len(), p.alpha));
        push_unique(&mut removed, i);
        push_unique(&mut removed, j);
    }
    if removed.len() < k {
        let rest: Vec<CallId> = scheduled_calls(&partial)
            .into_iter()
            .filter(|c| !removed.contains(c))
            .collect();
        for idx in sample_indices(rng, rest.len(), k - removed.len()) {
            removed.push(rest[idx]);
        }
    }
    finish_removal(partial, removed, k)
}

/// Which band around the selected visit is cleared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Time,
    Space,
}

/// Cost-band removal: pick an expensive visit, remove it with every visit at
/// the same port sharing its time (or space) band; repeat.
pub fn cost_band_removal<'a>(
    inst: &'a Instance,
    sol: &Solution,
    k: usize,
    band: Band,
    alpha: f64,
    rng: &mut impl RngCore,
) -> RemovalResult<'a> {
    let mut work = Schedule::from_solution(inst, sol.clone());
    let mut removed: Vec<CallId> = Vec::with_capacity(k);
    while removed.len() < k {
        let mut ranked: Vec<(f64, CallId)> = scheduled_calls(&work)
            .into_iter()
            .map(|c| (inst.port_visit_cost(work.solution(), c), c))
            .collect();
        if ranked.is_empty() {
            break;
        }
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let sel = ranked[randomized_pick(rng, ranked.len(), alpha)].1;
        let rs = inst.call_rect(sel, work.solution().get(sel).expect("scheduled"));
        let mut round_calls = alloc::vec![sel];
        for (occ, r) in work.rects_near(sel) {
            if let crate::model::Occupant::Call(o) = occ {
                let hit = match band {
                    Band::Time => rs.overlaps_time(&r),
                    Band::Space => rs.overlaps_space(&r),
                };
                if hit {
                    round_calls.push(o);
                }
            }
        }
        round_calls[1..].sort();
        for c in round_calls {
            if removed.len() == k {
                break;
            }
            work.unschedule(c);
            removed.push(c);
        }
    }
    RemovalResult { partial: work, removed }
}

/// Uniform sample of `k` scheduled calls.
pub fn random_removal<'a>(inst: &'a Instance, sol: &Solution, k: usize, rng: &mut impl RngCore) -> RemovalResult<'a> {
    let partial = Schedule::from_solution(inst, sol.clone());
    let calls = scheduled_calls(&partial);
    let removed = sample_indices(rng, calls.len(), k)
        .into_iter()
        .map(|i| calls[i])
        .collect();
    finish_removal(partial, removed, k)
}

/// Runs removal operator `op`.
pub fn apply_removal<'a>(
    op: Removal,
    inst: &'a Instance,
    sol: &Solution,
    k: usize,
    p: &OperatorParams,
    rng: &mut impl RngCore,
) -> RemovalResult<'a> {
    match op {
        Removal::Shaw => shaw_removal(inst, sol, k, p, rng),
        Removal::CostTime => cost_band_removal(inst, sol, k, Band::Time, p.alpha, rng),
        Removal::CostSpace => cost_band_removal(inst, sol, k, Band::Space, p.alpha, rng),
        Removal::Random => random_removal(inst, sol, k, rng),
    }
}

fn sorted_by_key<K: Copy>(pending: &[CallId], mut key: impl FnMut(CallId) -> K, cmp: impl Fn(&K, &K) -> core::cmp::Ordering) -> Vec<CallId> {
    let mut keyed: Vec<(K, CallId)> = pending.iter().map(|&c| (key(c), c)).collect();
    keyed.sort_by(|a, b| cmp(&a.0, &b.0));
    keyed.into_iter().map(|(_, c)| c).collect()
}

fn cmp_constraint(a: &(usize, f64, usize, usize), b: &(usize, f64, usize, usize)) -> core::cmp::Ordering {
    a.0.cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.cmp(&b.2))
        .then(a.3.cmp(&b.3))
}

/// Randomised greedy insertion ordered by ascending position counts. With
/// [`CandidateMode::Adjacent`] this is the packing insertion.
pub fn greedy_insertion(
    partial: &mut Schedule<'_>,
    removed: &[CallId],
    gamma: f64,
    mode: CandidateMode,
    rng: &mut impl RngCore,
) {
    let inst = partial.instance();
    let mut cache = CountCache::new(inst);
    let mut pending = removed.to_vec();
    while !pending.is_empty() {
        let order = sorted_by_key(
            &pending,
            |c| constraint_key(inst, cache.get(partial, c), c),
            cmp_constraint,
        );
        let c = order[randomized_pick(rng, order.len(), gamma)];
        insert_or_release(partial, c, mode, &mut pending, &mut cache);
    }
}

/// Greedy insertion restricted to positions touching another rectangle or a
/// boundary.
pub fn packing_insertion(partial: &mut Schedule<'_>, removed: &[CallId], gamma: f64, rng: &mut impl RngCore) {
    greedy_insertion(partial, removed, gamma, CandidateMode::Adjacent, rng);
}

/// Insertion ordered by the earliest achievable arrival at the port.
pub fn arrival_insertion(partial: &mut Schedule<'_>, removed: &[CallId], mu: f64, rng: &mut impl RngCore) {
    let inst = partial.instance();
    let mut cache = CountCache::new(inst);
    let mut pending = removed.to_vec();
    while !pending.is_empty() {
        let order = sorted_by_key(
            &pending,
            |c| {
                let call = &inst.calls[c.0];
                (partial.earliest_arrival(c), call.est, call.ship.0, call.call_index)
            },
            |a, b| {
                a.0.total_cmp(&b.0)
                    .then(a.1.total_cmp(&b.1))
                    .then(a.2.cmp(&b.2))
                    .then(a.3.cmp(&b.3))
            },
        );
        let c = order[randomized_pick(rng, order.len(), mu)];
        insert_or_release(partial, c, CandidateMode::All, &mut pending, &mut cache);
    }
}

/// Regret of a candidate list: cost of the kappa-th best minus the best, or
/// infinity with fewer than kappa candidates.
pub fn regret(costs: &[f64], kappa: usize) -> f64 {
    if costs.len() < kappa.max(1) {
        f64::INFINITY
    } else {
        costs[kappa - 1] - costs[0]
    }
}

/// Index into `cands` of the call to insert next: maximal regret, ties by
/// the larger best cost, then by position in `cands`.
pub fn regret_choice(cands: &[(f64, f64)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &(r, c)) in cands.iter().enumerate() {
        let take = match best {
            None => true,
            Some(b) => {
                let (br, bc) = cands[b];
                r > br || (r == br && c > bc)
            }
        };
        if take {
            best = Some(i);
        }
    }
    best
}

/// kappa-regret insertion over the cheapest placement per berth position.
pub fn kregret_insertion(partial: &mut Schedule<'_>, removed: &[CallId], kappa: usize) {
    let inst = partial.instance();
    let mut pending: Vec<CallId> = sorted_by_key(
        removed,
        |c| {
            let call = &inst.calls[c.0];
            (0usize, call.est, call.ship.0, call.call_index)
        },
        cmp_constraint,
    );
    let mut cache: Vec<Option<Vec<Placement>>> = alloc::vec![None; inst.num_calls()];
    while !pending.is_empty() {
        let mut cands = Vec::with_capacity(pending.len());
        for &c in &pending {
            let list = cache[c.0].get_or_insert_with(|| partial.k_best(c, kappa, CandidateMode::All));
            let costs: Vec<f64> = list.iter().map(|p| p.cost).collect();
            let best = costs.first().copied().unwrap_or(f64::INFINITY);
            cands.push((regret(&costs, kappa), best));
        }
        let i = regret_choice(&cands).expect("pending is non-empty");
        let c = pending[i];
        let mut changed = alloc::vec![c];
        let pl = match cache[c.0].as_ref().and_then(|l| l.first()).copied() {
            Some(pl) => pl,
            None => {
                let n = partial
                    .release_successor(c)
                    .expect("only a scheduled successor can block every position");
                pending.push(n);
                changed.push(n);
                partial
                    .best_placement(c, CandidateMode::All)
                    .expect("an unconstrained call always fits after the last rectangle")
            }
        };
        partial.place(&pl);
        pending.retain(|&o| o != c);
        for ch in changed {
            invalidate_lists(inst, &mut cache, ch);
        }
    }
}

fn invalidate_lists(inst: &Instance, cache: &mut [Option<Vec<Placement>>], c: CallId) {
    let port = inst.calls[c.0].port;
    for (j, call) in inst.calls.iter().enumerate() {
        if call.port == port {
            cache[j] = None;
        }
    }
    for nb in [inst.prev_call(c), inst.next_call(c)].into_iter().flatten() {
        cache[nb.0] = None;
    }
}

/// Runs insertion operator `op` until `partial` is complete.
pub fn apply_insertion(
    op: Insertion,
    partial: &mut Schedule<'_>,
    removed: &[CallId],
    p: &OperatorParams,
    rng: &mut impl RngCore,
) {
    match op {
        Insertion::Greedy => greedy_insertion(partial, removed, p.gamma, CandidateMode::All, rng),
        Insertion::Regret => kregret_insertion(partial, removed, p.kappa),
        Insertion::Packing => packing_insertion(partial, removed, p.gamma, rng),
        Insertion::Arrival => arrival_insertion(partial, removed, p.mu, rng),
    }
}

/// Reward category of an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    NewBest,
    Better,
    Accepted,
    Rejected,
}

impl Outcome {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::NewBest => "new_best",
            Outcome::Better => "better",
            Outcome::Accepted => "accepted",
            Outcome::Rejected => "rejected",
        }
    }
}

/// Weight, probability and score bookkeeping of one operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorStats {
    pub weight: f64,
    pub probability: f64,
    pub score: f64,
    pub uses: u64,
    /// Uses whose outcome was not a rejection.
    pub successes: u64,
}

impl OperatorStats {
    fn new(n: usize) -> Self {
        OperatorStats {
            weight: 1.0,
            probability: 1.0 / n as f64,
            score: 0.0,
            uses: 0,
            successes: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Removal,
    Insertion,
}

/// Adaptive operator selection.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBank {
    pub removal: [OperatorStats; 4],
    pub insertion: [OperatorStats; 4],
    /// Rewards for new best, better, accepted, rejected.
    pub rewards: [f64; 4],
    pub lambda: f64,
    /// Time between weight updates.
    pub update_interval: f64,
    last_update: f64,
}

pub const DEFAULT_REWARDS: [f64; 4] = [11.0, 4.0, 2.0, 0.0];

impl OperatorBank {
    pub fn new(rewards: [f64; 4], lambda: f64, update_interval: f64) -> Self {
        OperatorBank {
            removal: [OperatorStats::new(4); 4],
            insertion: [OperatorStats::new(4); 4],
            rewards,
            lambda,
            update_interval,
            last_update: 0.0,
        }
    }

    pub fn family(&self, f: Family) -> &[OperatorStats; 4] {
        match f {
            Family::Removal => &self.removal,
            Family::Insertion => &self.insertion,
        }
    }

    fn family_mut(&mut self, f: Family) -> &mut [OperatorStats; 4] {
        match f {
            Family::Removal => &mut self.removal,
            Family::Insertion => &mut self.insertion,
        }
    }

    pub fn probabilities(&self, f: Family) -> [f64; 4] {
        self.family(f).map(|s| s.probability)
    }

    /// Sets the weights of a family and renormalises its probabilities.
    pub fn set_weights(&mut self, f: Family, w: [f64; 4]) {
        for (s, w) in self.family_mut(f).iter_mut().zip(w) {
            s.weight = w;
        }
        normalise(self.family_mut(f));
    }

    /// Roulette-wheel draw proportional to the probabilities.
    pub fn select(&self, f: Family, rng: &mut impl RngCore) -> usize {
        roulette(&self.probabilities(f), unit(rng))
    }

    /// Adds the reward of `outcome` to both operators used.
    pub fn record(&mut self, removal: usize, insertion: usize, outcome: Outcome) {
        let psi = self.rewards[outcome.index()];
        for s in [&mut self.removal[removal], &mut self.insertion[insertion]] {
            s.score += psi;
            s.uses += 1;
            if outcome != Outcome::Rejected {
                s.successes += 1;
            }
        }
    }

    /// Applies the weight update once `elapsed` has advanced by the update
    /// interval since the last update. Returns whether it did.
    pub fn maybe_update(&mut self, elapsed: f64) -> bool {
        if elapsed - self.last_update + 1e-12 < self.update_interval {
            return false;
        }
        self.last_update = elapsed;
        self.update_weights();
        true
    }

    /// `w <- (1 - lambda) w + lambda psi`, reset scores, renormalise.
    pub fn update_weights(&mut self) {
        let lambda = self.lambda;
        for fam in [&mut self.removal, &mut self.insertion] {
            for s in fam.iter_mut() {
                s.weight = (1.0 - lambda) * s.weight + lambda * s.score;
                s.score = 0.0;
            }
            normalise(fam);
        }
    }

    /// Records an iteration and applies a due weight update.
    pub fn record_and_update(&mut self, removal: usize, insertion: usize, outcome: Outcome, elapsed: f64) -> bool {
        self.record(removal, insertion, outcome);
        self.maybe_update(elapsed)
    }
}

fn normalise(fam: &mut [OperatorStats; 4]) {
    let total: f64 = fam.iter().map(|s| s.weight).sum();
    for s in fam.iter_mut() {
        s.probability = if total > 0.0 { s.weight / total } else { 0.25 };
    }
}

/// Index selected by a uniform draw `u` on the cumulative distribution
/// `probs`. Zero-probability entries are never selected.
pub fn roulette(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

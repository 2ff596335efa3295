//! Adaptive large neighbourhood search with annealing acceptance.
//!
//! Each iteration destroys part of the current plan with a removal operator,
//! repairs it with an insertion operator, optionally polishes the result with
//! the ejection-chain local search, and accepts it with the annealing rule.
//! The temperature decays with elapsed time and is reset to its start value
//! whenever it falls to the end value. Time comes from a [`Clock`], so runs
//! driven by a [`VirtualClock`] are fully reproducible.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::construct::construct;
use crate::local_search::{default_k_chain, local_search, LsStats};
use crate::math::{exp, powf};
use crate::model::{Instance, Solution};
use crate::operators::{
    apply_insertion, apply_removal, removal_count, Family, Insertion, OperatorBank, OperatorParams,
    Outcome, Removal,
};
use crate::sampling::{rng_from_seed, unit};

/// Annealing acceptance: always for improvements, otherwise with
/// probability `exp(-(f_new - f_cur) / t)`.
pub fn accept(f_new: f64, f_cur: f64, t: f64, rng: &mut impl RngCore) -> bool {
    if f_new < f_cur {
        return true;
    }
    unit(rng) < exp(-(f_new - f_cur) / t)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleError {
    Temperatures { t_start: f64, t_end: f64 },
    CoolingTime(f64),
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::Temperatures { t_start, t_end } => {
                write!(f, "need T_start > T_end > 0, got {t_start} and {t_end}")
            }
            ScheduleError::CoolingTime(t) => write!(f, "cooling time must be positive, got {t}"),
        }
    }
}

impl core::error::Error for ScheduleError {}

/// `tau` with `t_end = t_start * tau^t_cool`.
pub fn cooling_factor(t_start: f64, t_end: f64, t_cool: f64) -> Result<f64, ScheduleError> {
    if !(t_start > t_end && t_end > 0.0) {
        return Err(ScheduleError::Temperatures { t_start, t_end });
    }
    if !(t_cool > 0.0) {
        return Err(ScheduleError::CoolingTime(t_cool));
    }
    Ok(powf(t_end / t_start, 1.0 / t_cool))
}

/// Temperature schedule with reheating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SAState {
    pub t_start: f64,
    pub t_end: f64,
    pub tau: f64,
    pub t_cool: f64,
    pub temperature: f64,
    pub reheats: u64,
}

impl SAState {
    /// `t_start = phi * f0`, `t_end = xi * f0`, `t_cool = epsilon * time_limit`.
    pub fn new(f0: f64, phi: f64, xi: f64, epsilon: f64, time_limit: f64) -> Result<Self, ScheduleError> {
        let (t_start, t_end, t_cool) = (phi * f0, xi * f0, epsilon * time_limit);
        let tau = cooling_factor(t_start, t_end, t_cool)?;
        Ok(SAState {
            t_start,
            t_end,
            tau,
            t_cool,
            temperature: t_start,
            reheats: 0,
        })
    }

    /// Decays the temperature over an iteration of `t_it` time units and
    /// reheats once it reaches the end temperature.
    pub fn cool(&mut self, t_it: f64) {
        self.temperature *= powf(self.tau, t_it.max(0.0));
        if self.temperature <= self.t_end {
            self.temperature = self.t_start;
            self.reheats += 1;
        }
    }
}

/// When to run the local search on a repaired solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LsPolicy {
    /// Only when the repaired solution beats the current one.
    #[default]
    OnImprove,
    Every,
    Every2,
    Every4,
    Off,
}

impl LsPolicy {
    pub const ALL: [LsPolicy; 5] = [
        LsPolicy::Every,
        LsPolicy::OnImprove,
        LsPolicy::Every2,
        LsPolicy::Every4,
        LsPolicy::Off,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LsPolicy::OnImprove => "on-improve",
            LsPolicy::Every => "every",
            LsPolicy::Every2 => "every2",
            LsPolicy::Every4 => "every4",
            LsPolicy::Off => "off",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Whether to polish at 1-based `iteration` given the improvement test.
    pub fn applies(self, iteration: u64, improved: bool) -> bool {
        match self {
            LsPolicy::OnImprove => improved,
            LsPolicy::Every => true,
            LsPolicy::Every2 => iteration.is_multiple_of(2),
            LsPolicy::Every4 => iteration.is_multiple_of(4),
            LsPolicy::Off => false,
        }
    }
}

/// Adaptive or plain operator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Alns,
    /// Fixed uniform operator probabilities (adaptability 0).
    Lns,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Alns => "alns",
            Variant::Lns => "lns",
        }
    }
}

/// The tuned parameters plus run controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    pub epsilon: f64,
    pub phi: f64,
    pub xi: f64,
    pub rho: f64,
    pub shaw_a: f64,
    pub shaw_b: f64,
    pub shaw_c: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub mu: f64,
    pub kappa: usize,
    /// Weight-update interval as a fraction of the time limit.
    pub update_interval: f64,
    pub lambda: f64,
    pub rewards: [f64; 4],
    /// Position bound in ship lengths; consumed by the generator's latest
    /// finish times and carried here for manifests.
    pub position_bound: f64,
    pub time_limit: f64,
    pub max_iterations: Option<u64>,
    pub seed: u64,
    pub ls_policy: LsPolicy,
    pub variant: Variant,
    /// Chain budget; `None` uses twice the number of ships.
    pub k_chain: Option<usize>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            epsilon: 0.157,
            phi: 0.0246,
            xi: 0.000269,
            rho: 0.326,
            shaw_a: 0.55,
            shaw_b: 1.36,
            shaw_c: 0.89,
            alpha: 2.66,
            gamma: 2.85,
            mu: 2.6,
            kappa: 2,
            update_interval: 0.017,
            lambda: 0.456,
            rewards: crate::operators::DEFAULT_REWARDS,
            position_bound: 4.02,
            time_limit: 300.0,
            max_iterations: None,
            seed: 1,
            ls_policy: LsPolicy::OnImprove,
            variant: Variant::Alns,
            k_chain: None,
        }
    }
}

/// A parameter outside its tuning range.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamError {
    pub name: &'static str,
    pub value: f64,
    pub min: f64,
    pub max: f64,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parameter {} = {} outside [{}, {}]",
            self.name, self.value, self.min, self.max
        )
    }
}

impl core::error::Error for ParamError {}

impl SearchParams {
    pub fn operator_params(&self) -> OperatorParams {
        OperatorParams {
            rho: self.rho,
            shaw_a: self.shaw_a,
            shaw_b: self.shaw_b,
            shaw_c: self.shaw_c,
            alpha: self.alpha,
            gamma: self.gamma,
            mu: self.mu,
            kappa: self.kappa,
        }
    }

    /// `(name, value, min, max)` of every tuned parameter.
    pub fn ranges(&self) -> [(&'static str, f64, f64, f64); 18] {
        [
            ("epsilon", self.epsilon, 0.005, 0.2),
            ("phi", self.phi, 0.01, 0.05),
            ("xi", self.xi, 0.00005, 0.001),
            ("rho", self.rho, 0.3, 0.6),
            ("shaw_a", self.shaw_a, 0.5, 2.0),
            ("shaw_b", self.shaw_b, 0.5, 2.0),
            ("shaw_c", self.shaw_c, 0.5, 2.0),
            ("alpha", self.alpha, 1.0, 3.0),
            ("gamma", self.gamma, 1.0, 3.0),
            ("mu", self.mu, 1.0, 3.0),
            ("kappa", self.kappa as f64, 2.0, 4.0),
            ("update_interval", self.update_interval, 0.01, 0.05),
            ("lambda", self.lambda, 0.3, 0.7),
            ("psi1", self.rewards[0], 10.0, 20.0),
            ("psi2", self.rewards[1], 4.0, 8.0),
            ("psi3", self.rewards[2], 1.0, 3.0),
            ("psi4", self.rewards[3], 0.0, 0.0),
            ("position_bound", self.position_bound, 2.0, 5.0),
        ]
    }

    /// Checks every tuned parameter against its tuning range. The adaptability
    /// is exempt in the LNS variant, which pins it to zero.
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value, min, max) in self.ranges() {
            if name == "lambda" && self.variant == Variant::Lns {
                continue;
            }
            if !(value >= min - 1e-12 && value <= max + 1e-12) {
                return Err(ParamError { name, value, min, max });
            }
        }
        Ok(())
    }

    /// Adaptability actually used by the run.
    pub fn effective_lambda(&self) -> f64 {
        match self.variant {
            Variant::Alns => self.lambda,
            Variant::Lns => 0.0,
        }
    }
}

/// Source of elapsed time for the search.
pub trait Clock {
    /// Time units since the search started.
    fn elapsed(&mut self) -> f64;
    /// Called once after every iteration.
    fn tick(&mut self) {}
}

/// Deterministic clock advancing a fixed amount per iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualClock {
    now: f64,
    per_iteration: f64,
}

impl VirtualClock {
    pub fn new(per_iteration: f64) -> Self {
        VirtualClock { now: 0.0, per_iteration }
    }

    /// Spreads `time_limit` evenly over `iterations`.
    pub fn spread(time_limit: f64, iterations: u64) -> Self {
        Self::new(time_limit / iterations.max(1) as f64)
    }
}

impl Clock for VirtualClock {
    fn elapsed(&mut self) -> f64 {
        self.now
    }

    fn tick(&mut self) {
        self.now += self.per_iteration;
    }
}

/// One line of the run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub iteration: u64,
    pub current: f64,
    pub best: f64,
    pub temperature: f64,
    pub removal: Removal,
    pub insertion: Insertion,
    pub outcome: Outcome,
}

/// Operator probabilities right after a weight update.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySnapshot {
    pub time: f64,
    pub iteration: u64,
    pub removal: [f64; 4],
    pub insertion: [f64; 4],
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: Solution,
    pub best_objective: f64,
    pub initial_objective: f64,
    pub iterations: u64,
    pub elapsed: f64,
    pub bank: OperatorBank,
    pub trace: Vec<TraceRow>,
    pub probabilities: Vec<ProbabilitySnapshot>,
    pub ls: LsStats,
    pub reheats: u64,
}

impl SearchResult {
    pub fn summary(&self) -> String {
        alloc::format!(
            "best {:.2} (initial {:.2}) after {} iterations",
            self.best_objective,
            self.initial_objective,
            self.iterations
        )
    }
}

fn add_stats(acc: &mut LsStats, s: &LsStats) {
    acc.chains_tried += s.chains_tried;
    acc.chains_feasible += s.chains_feasible;
    acc.improvements += s.improvements;
    acc.longest_adopted = acc.longest_adopted.max(s.longest_adopted);
}

/// Runs the search until the time limit or the iteration cap.
pub fn run_alns(inst: &Instance, params: &SearchParams, clock: &mut dyn Clock) -> SearchResult {
    let initial = construct(inst);
    run_alns_from(inst, params, initial, clock)
}

/// As [`run_alns`] but starting from a given complete solution.
pub fn run_alns_from(inst: &Instance, params: &SearchParams, initial: Solution, clock: &mut dyn Clock) -> SearchResult {
    let f0 = inst.objective(&initial).expect("initial solution is complete");
    let lambda = params.effective_lambda();
    let mut bank = OperatorBank::new(params.rewards, lambda, params.update_interval * params.time_limit);
    let mut result = SearchResult {
        best: initial.clone(),
        best_objective: f0,
        initial_objective: f0,
        iterations: 0,
        elapsed: 0.0,
        bank: bank.clone(),
        trace: Vec::new(),
        probabilities: Vec::new(),
        ls: LsStats::default(),
        reheats: 0,
    };
    let cap_reached = |it: u64| params.max_iterations.is_some_and(|m| it >= m);
    if !(params.time_limit > 0.0) || cap_reached(0) || inst.num_calls() == 0 || f0 <= 0.0 {
        return result;
    }
    let Ok(mut sa) = SAState::new(f0, params.phi, params.xi, params.epsilon, params.time_limit) else {
        return result;
    };

    let op = params.operator_params();
    let k = removal_count(inst.num_calls(), op.rho);
    let k_chain = params.k_chain.unwrap_or_else(|| default_k_chain(inst));
    let mut rng = rng_from_seed(params.seed);

    let mut current = initial;
    let mut f_cur = f0;
    let mut last = clock.elapsed();
    let mut it = 0u64;
    while last < params.time_limit && !cap_reached(it) {
        it += 1;
        let ri = bank.select(Family::Removal, &mut rng);
        let ii = bank.select(Family::Insertion, &mut rng);
        let (rop, iop) = (Removal::ALL[ri], Insertion::ALL[ii]);

        let mut rem = apply_removal(rop, inst, &current, k, &op, &mut rng);
        apply_insertion(iop, &mut rem.partial, &rem.removed, &op, &mut rng);
        let mut cand = rem.partial.into_solution();
        let mut f_cand = inst.objective(&cand).expect("repair completes the plan");

        if params.ls_policy.applies(it, f_cand < f_cur) {
            let (polished, stats) = local_search(inst, &cand, k_chain);
            add_stats(&mut result.ls, &stats);
            cand = polished;
            f_cand = inst.objective(&cand).expect("complete");
        }

        let outcome = if f_cand < result.best_objective - 1e-9 {
            Outcome::NewBest
        } else if f_cand < f_cur - 1e-9 {
            Outcome::Better
        } else if accept(f_cand, f_cur, sa.temperature, &mut rng) {
            Outcome::Accepted
        } else {
            Outcome::Rejected
        };
        if outcome != Outcome::Rejected {
            current = cand;
            f_cur = f_cand;
            if outcome == Outcome::NewBest {
                result.best = current.clone();
                result.best_objective = f_cur;
            }
        }

        clock.tick();
        let now = clock.elapsed();
        if bank.record_and_update(ri, ii, outcome, now) {
            result.probabilities.push(ProbabilitySnapshot {
                time: now,
                iteration: it,
                removal: bank.probabilities(Family::Removal),
                insertion: bank.probabilities(Family::Insertion),
            });
        }
        result.trace.push(TraceRow {
            time: now,
            iteration: it,
            current: f_cur,
            best: result.best_objective,
            temperature: sa.temperature,
            removal: rop,
            insertion: iop,
            outcome,
        });
        sa.cool(now - last);
        last = now;
    }
    result.iterations = it;
    result.elapsed = last;
    result.bank = bank;
    result.reheats = sa.reheats;
    result
}

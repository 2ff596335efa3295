//! Domain types, the cost function and the feasibility checker.
//!
//! Every other module asks this one what a solution costs and whether it is
//! valid. Evaluation accepts real-valued positions and start times; only the
//! heuristics restrict themselves to the segment and time grids.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::math::{self, EPS};

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Index into [`Instance::ports`].
    PortId
);
id_type!(
    /// Index into [`Instance::ships`].
    ShipId
);
id_type!(
    /// Index into [`Instance::calls`].
    CallId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShipClass {
    Feeder,
    Medium,
    Large,
}

impl ShipClass {
    pub const ALL: [ShipClass; 3] = [ShipClass::Feeder, ShipClass::Medium, ShipClass::Large];

    pub fn index(self) -> usize {
        match self {
            ShipClass::Feeder => 0,
            ShipClass::Medium => 1,
            ShipClass::Large => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub code: String,
    #[serde(rename = "quay_length_m")]
    pub quay_length: f64,
    /// Spacing of the berthing-position grid used by the heuristics.
    #[serde(rename = "segment_length_m")]
    pub segment_length: f64,
}

/// One entry of the discrete speed set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedLevel {
    #[serde(rename = "speed_kn")]
    pub speed: f64,
}

impl SpeedLevel {
    /// Hours per nautical mile.
    #[inline]
    pub fn time_per_distance(&self) -> f64 {
        1.0 / self.speed
    }

    /// Tonnes per nautical mile for `ship`, from the cubic speed-fuel law.
    #[inline]
    pub fn fuel_per_distance(&self, ship: &Ship) -> f64 {
        let ratio = self.speed / ship.design_speed;
        ratio * ratio * ratio * ship.design_fuel_rate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ship {
    pub name: String,
    #[serde(rename = "length_m")]
    pub length: f64,
    pub class: ShipClass,
    #[serde(rename = "design_speed_kn")]
    pub design_speed: f64,
    /// Fuel burnt per nautical mile when sailing at the design speed.
    #[serde(rename = "design_fuel_t_per_nm")]
    pub design_fuel_rate: f64,
    /// Port calls in visiting order.
    pub route: Vec<CallId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortCall {
    pub ship: ShipId,
    /// 1-based position in the ship's route.
    pub call_index: usize,
    pub port: PortId,
    /// Leftmost quay position at which handling is fastest.
    #[serde(rename = "ideal_position_m")]
    pub ideal_position: f64,
    #[serde(rename = "est_h")]
    pub est: f64,
    #[serde(rename = "eft_h")]
    pub eft: f64,
    #[serde(rename = "lft_h")]
    pub lft: f64,
    #[serde(rename = "base_handling_h")]
    pub base_handling: f64,
}

/// A fixed rectangle occupied by a ship outside the optimisation.
///
/// Occupies `[start, start + duration) x [position, position + length)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalBerth {
    pub port: PortId,
    #[serde(rename = "position_m")]
    pub position: f64,
    #[serde(rename = "start_h")]
    pub start: f64,
    #[serde(rename = "duration_h")]
    pub duration: f64,
    #[serde(rename = "length_m")]
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRates {
    #[serde(rename = "fuel_price_usd_per_t")]
    pub fuel_price: f64,
    #[serde(rename = "handling_usd_per_h")]
    pub handling_rate: f64,
    #[serde(rename = "delay_usd_per_h")]
    pub delay_rate: f64,
    #[serde(rename = "waiting_usd_per_h")]
    pub waiting_rate: f64,
    /// Charged per hour of finishing after the latest finish time.
    #[serde(rename = "lft_penalty_usd_per_h")]
    pub lft_penalty_rate: f64,
    /// Relative handling-time increase per meter away from the ideal position.
    #[serde(rename = "deviation_per_m")]
    pub deviation_factor: f64,
}

impl Default for CostRates {
    fn default() -> Self {
        CostRates {
            fuel_price: 500.0,
            handling_rate: 1_000.0,
            delay_rate: 2_000.0,
            waiting_rate: 500.0,
            lft_penalty_rate: 10_000.0,
            deviation_factor: 0.001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub ports: Vec<Port>,
    pub ships: Vec<Ship>,
    pub calls: Vec<PortCall>,
    pub externals: Vec<ExternalBerth>,
    /// Strictly increasing speeds; index 0 is the slowest.
    pub speeds: Vec<SpeedLevel>,
    #[serde(rename = "distances_nm")]
    pub distances: Vec<Vec<f64>>,
    pub rates: CostRates,
    /// Latest berth start considered by the heuristics.
    #[serde(rename = "horizon_h")]
    pub horizon: f64,
    /// Spacing of the berth-start grid used by the heuristics.
    #[serde(rename = "time_step_h")]
    pub time_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    #[serde(rename = "berth_position_m")]
    pub berth_position: f64,
    #[serde(rename = "berth_start_h")]
    pub berth_start: f64,
    /// Speed index for the leg leaving this call; `None` on the last call.
    pub leg_speed: Option<usize>,
}

/// Assignments indexed by [`CallId`]; `None` marks an unscheduled call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub assignments: Vec<Option<Assignment>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub waiting: f64,
    pub handling: f64,
    pub delay: f64,
    pub lft_penalty: f64,
    pub fuel: f64,
    pub total: f64,
}

/// Quantities that follow from an assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CallState {
    pub handling: f64,
    pub arrival: f64,
    pub delay: f64,
    pub lft_excess: f64,
}

/// Something occupying quay space at a port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Occupant {
    Call(CallId),
    External(usize),
}

impl fmt::Display for Occupant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Occupant::Call(c) => write!(f, "call {c}"),
            Occupant::External(e) => write!(f, "external {e}"),
        }
    }
}

/// An axis-aligned rectangle `[x, x + length) x [start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub length: f64,
    pub start: f64,
    pub duration: f64,
}

impl Rect {
    #[inline]
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.x + self.length
    }

    #[inline]
    pub fn overlaps_space(&self, other: &Rect) -> bool {
        self.x < other.right() - EPS && other.x < self.right() - EPS
    }

    #[inline]
    pub fn overlaps_time(&self, other: &Rect) -> bool {
        self.start < other.end() - EPS && other.start < self.end() - EPS
    }

    /// Closed-open overlap in both dimensions; touching edges do not overlap.
    #[inline]
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.overlaps_space(other) && self.overlaps_time(other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Unassigned { call: CallId },
    OutOfQuay { call: CallId },
    Overlap { port: PortId, a: Occupant, b: Occupant },
    BeforeEst { call: CallId },
    BeforeArrival { call: CallId },
    MissingSpeed { call: CallId },
    UnexpectedSpeed { call: CallId },
    UnknownSpeed { call: CallId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unassigned { call } => write!(f, "call {call} is not scheduled"),
            Violation::OutOfQuay { call } => write!(f, "call {call} berths outside the quay"),
            Violation::Overlap { port, a, b } => write!(f, "{a} and {b} overlap at port {port}"),
            Violation::BeforeEst { call } => {
                write!(f, "call {call} starts before its earliest start time")
            }
            Violation::BeforeArrival { call } => {
                write!(f, "call {call} starts before the ship arrives")
            }
            Violation::MissingSpeed { call } => write!(f, "call {call} has no leg speed"),
            Violation::UnexpectedSpeed { call } => {
                write!(f, "call {call} is the last of its route but has a leg speed")
            }
            Violation::UnknownSpeed { call } => write!(f, "call {call} uses an unknown speed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    PositionOutOfQuay { call: CallId, position: f64 },
    IncompleteSolution { missing: Vec<CallId> },
    MissingSpeed { call: CallId },
    NonPositiveBest(f64),
    SolutionSize { expected: usize, found: usize },
    InvalidInstance(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::PositionOutOfQuay { call, position } => {
                write!(f, "position {position} m is outside the quay for call {call}")
            }
            ModelError::IncompleteSolution { missing } => {
                write!(f, "solution is incomplete; unscheduled calls:")?;
                for c in missing {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
            ModelError::MissingSpeed { call } => {
                write!(f, "call {call} is not the last of its route but has no leg speed")
            }
            ModelError::NonPositiveBest(z) => {
                write!(f, "reference objective must be positive, got {z}")
            }
            ModelError::SolutionSize { expected, found } => write!(
                f,
                "solution has {found} assignment slots but the instance has {expected} calls"
            ),
            ModelError::InvalidInstance(msg) => write!(f, "invalid instance: {msg}"),
        }
    }
}

impl core::error::Error for ModelError {}

/// `(1 + beta * |x - ideal|) * base`.
#[inline]
pub fn handling_formula(base_handling: f64, ideal_position: f64, position: f64, beta: f64) -> f64 {
    (1.0 + beta * math::abs(position - ideal_position)) * base_handling
}

/// Fuel cost in USD of sailing `distance` nm at `speed`.
pub fn leg_fuel_cost(ship: &Ship, speed: &SpeedLevel, distance: f64, rates: &CostRates) -> f64 {
    rates.fuel_price * speed.fuel_per_distance(ship) * distance
}

/// Arrival at the next port after berthing at `prev_start` for `prev_handling`
/// hours and sailing `distance` nm at `speed`.
#[inline]
pub fn arrival_time(prev_start: f64, prev_handling: f64, speed: &SpeedLevel, distance: f64) -> f64 {
    prev_start + prev_handling + speed.time_per_distance() * distance
}

/// Relative gap `(z_obj - z_best) / z_best`.
pub fn gap(z_obj: f64, z_best: f64) -> Result<f64, ModelError> {
    if !(z_best > 0.0) {
        return Err(ModelError::NonPositiveBest(z_best));
    }
    Ok((z_obj - z_best) / z_best)
}

impl Solution {
    pub fn empty(instance: &Instance) -> Self {
        Solution {
            assignments: alloc::vec![None; instance.calls.len()],
        }
    }

    #[inline]
    pub fn get(&self, call: CallId) -> Option<&Assignment> {
        self.assignments.get(call.0).and_then(Option::as_ref)
    }

    #[inline]
    pub fn get_mut(&mut self, call: CallId) -> Option<&mut Assignment> {
        self.assignments.get_mut(call.0).and_then(Option::as_mut)
    }

    #[inline]
    pub fn is_scheduled(&self, call: CallId) -> bool {
        self.get(call).is_some()
    }

    pub fn missing(&self) -> Vec<CallId> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_none())
            .map(|(i, _)| CallId(i))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.assignments.iter().all(Option::is_some)
    }
}

impl Instance {
    #[inline]
    pub fn call(&self, c: CallId) -> &PortCall {
        &self.calls[c.0]
    }

    #[inline]
    pub fn ship_of(&self, c: CallId) -> &Ship {
        &self.ships[self.calls[c.0].ship.0]
    }

    #[inline]
    pub fn port_of(&self, c: CallId) -> &Port {
        &self.ports[self.calls[c.0].port.0]
    }

    #[inline]
    pub fn distance(&self, a: PortId, b: PortId) -> f64 {
        self.distances[a.0][b.0]
    }

    pub fn prev_call(&self, c: CallId) -> Option<CallId> {
        let call = &self.calls[c.0];
        if call.call_index <= 1 {
            None
        } else {
            Some(self.ships[call.ship.0].route[call.call_index - 2])
        }
    }

    pub fn next_call(&self, c: CallId) -> Option<CallId> {
        let call = &self.calls[c.0];
        self.ships[call.ship.0].route.get(call.call_index).copied()
    }

    /// Distance of the leg leaving `c`, if `c` is not the last call.
    pub fn leg_distance(&self, c: CallId) -> Option<f64> {
        self.next_call(c)
            .map(|n| self.distance(self.calls[c.0].port, self.calls[n.0].port))
    }

    #[inline]
    pub fn slowest_speed(&self) -> usize {
        0
    }

    #[inline]
    pub fn fastest_speed(&self) -> usize {
        self.speeds.len() - 1
    }

    /// Largest admissible leftmost position for `c`.
    #[inline]
    pub fn max_position(&self, c: CallId) -> f64 {
        self.port_of(c).quay_length - self.ship_of(c).length
    }

    /// Handling time of `c` at `position`, without a quay-range check.
    #[inline]
    pub fn handling_at(&self, c: CallId, position: f64) -> f64 {
        let call = &self.calls[c.0];
        handling_formula(
            call.base_handling,
            call.ideal_position,
            position,
            self.rates.deviation_factor,
        )
    }

    /// Handling time of `c` when berthing with its leftmost point at `position`.
    pub fn handling_time(&self, c: CallId, position: f64) -> Result<f64, ModelError> {
        if position < -EPS || position > self.max_position(c) + EPS {
            return Err(ModelError::PositionOutOfQuay { call: c, position });
        }
        Ok(self.handling_at(c, position))
    }

    /// Fuel cost of sailing the leg leaving `c` at speed index `speed`.
    pub fn leg_cost(&self, c: CallId, speed: usize) -> f64 {
        match self.leg_distance(c) {
            Some(d) => leg_fuel_cost(self.ship_of(c), &self.speeds[speed], d, &self.rates),
            None => 0.0,
        }
    }

    /// Rectangle of a scheduled call.
    pub fn call_rect(&self, c: CallId, a: &Assignment) -> Rect {
        Rect {
            x: a.berth_position,
            length: self.ship_of(c).length,
            start: a.berth_start,
            duration: self.handling_at(c, a.berth_position),
        }
    }

    pub fn external_rect(&self, e: usize) -> Rect {
        let ext = &self.externals[e];
        Rect {
            x: ext.position,
            length: ext.length,
            start: ext.start,
            duration: ext.duration,
        }
    }

    /// Calls visiting each port, indexed by port.
    pub fn calls_by_port(&self) -> Vec<Vec<CallId>> {
        let mut out = alloc::vec![Vec::new(); self.ports.len()];
        for (i, call) in self.calls.iter().enumerate() {
            out[call.port.0].push(CallId(i));
        }
        out
    }

    /// External berths at each port, indexed by port.
    pub fn externals_by_port(&self) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); self.ports.len()];
        for (i, e) in self.externals.iter().enumerate() {
            out[e.port.0].push(i);
        }
        out
    }

    /// Arrival time of `c` under `sol`. The first call of a route arrives when
    /// it starts berthing.
    pub fn arrival(&self, sol: &Solution, c: CallId) -> Result<f64, ModelError> {
        let own = sol
            .get(c)
            .ok_or_else(|| ModelError::IncompleteSolution { missing: alloc::vec![c] })?;
        let Some(p) = self.prev_call(c) else {
            return Ok(own.berth_start);
        };
        let prev = sol
            .get(p)
            .ok_or_else(|| ModelError::IncompleteSolution { missing: alloc::vec![p] })?;
        let speed = prev.leg_speed.ok_or(ModelError::MissingSpeed { call: p })?;
        let speed = self
            .speeds
            .get(speed)
            .ok_or(ModelError::MissingSpeed { call: p })?;
        let dist = self.distance(self.calls[p.0].port, self.calls[c.0].port);
        Ok(arrival_time(
            prev.berth_start,
            self.handling_at(p, prev.berth_position),
            speed,
            dist,
        ))
    }

    /// Handling, arrival, delay and LFT excess of a scheduled call.
    pub fn call_state(&self, sol: &Solution, c: CallId) -> Result<CallState, ModelError> {
        let a = sol
            .get(c)
            .ok_or_else(|| ModelError::IncompleteSolution { missing: alloc::vec![c] })?;
        let call = &self.calls[c.0];
        let handling = self.handling_at(c, a.berth_position);
        let finish = a.berth_start + handling;
        Ok(CallState {
            handling,
            arrival: self.arrival(sol, c)?,
            delay: (finish - call.eft).max(0.0),
            lft_excess: (finish - call.lft).max(0.0),
        })
    }

    /// Objective value split into its five cost terms. External berths cost
    /// nothing.
    pub fn evaluate(&self, sol: &Solution) -> Result<CostBreakdown, ModelError> {
        if sol.assignments.len() != self.calls.len() {
            return Err(ModelError::SolutionSize {
                expected: self.calls.len(),
                found: sol.assignments.len(),
            });
        }
        let missing = sol.missing();
        if !missing.is_empty() {
            return Err(ModelError::IncompleteSolution { missing });
        }
        let r = &self.rates;
        let mut out = CostBreakdown::default();
        for ship in &self.ships {
            for &c in &ship.route {
                let a = sol.get(c).expect("complete");
                let st = self.call_state(sol, c)?;
                out.waiting += r.waiting_rate * (a.berth_start - st.arrival);
                out.handling += r.handling_rate * st.handling;
                out.delay += r.delay_rate * st.delay;
                out.lft_penalty += r.lft_penalty_rate * st.lft_excess;
                if let Some(dist) = self.leg_distance(c) {
                    let s = a.leg_speed.ok_or(ModelError::MissingSpeed { call: c })?;
                    let speed = self.speeds.get(s).ok_or(ModelError::MissingSpeed { call: c })?;
                    out.fuel += leg_fuel_cost(ship, speed, dist, r);
                }
            }
        }
        out.total = out.waiting + out.handling + out.delay + out.lft_penalty + out.fuel;
        Ok(out)
    }

    /// Objective value; shorthand for `evaluate(..).total`.
    pub fn objective(&self, sol: &Solution) -> Result<f64, ModelError> {
        self.evaluate(sol).map(|b| b.total)
    }

    /// All hard-constraint violations of `sol`. Finishing after the latest
    /// finish time is penalised, not a violation.
    pub fn check_feasibility(&self, sol: &Solution) -> Vec<Violation> {
        let mut out = Vec::new();
        if sol.assignments.len() != self.calls.len() {
            for i in sol.assignments.len()..self.calls.len() {
                out.push(Violation::Unassigned { call: CallId(i) });
            }
        }
        let n = self.calls.len().min(sol.assignments.len());
        for i in 0..n {
            let c = CallId(i);
            let Some(a) = sol.get(c) else {
                out.push(Violation::Unassigned { call: c });
                continue;
            };
            let call = &self.calls[i];
            if a.berth_position < -EPS || a.berth_position > self.max_position(c) + EPS {
                out.push(Violation::OutOfQuay { call: c });
            }
            if a.berth_start < call.est - EPS {
                out.push(Violation::BeforeEst { call: c });
            }
            match (self.next_call(c), a.leg_speed) {
                (Some(_), None) => out.push(Violation::MissingSpeed { call: c }),
                (None, Some(_)) => out.push(Violation::UnexpectedSpeed { call: c }),
                (Some(_), Some(s)) if s >= self.speeds.len() => {
                    out.push(Violation::UnknownSpeed { call: c })
                }
                _ => {}
            }
            if let Some(p) = self.prev_call(c) {
                if let Some(prev) = sol.get(p) {
                    if let Some(s) = prev.leg_speed.filter(|&s| s < self.speeds.len()) {
                        let dist = self.distance(self.calls[p.0].port, call.port);
                        let arr = arrival_time(
                            prev.berth_start,
                            self.handling_at(p, prev.berth_position),
                            &self.speeds[s],
                            dist,
                        );
                        if a.berth_start < arr - EPS {
                            out.push(Violation::BeforeArrival { call: c });
                        }
                    }
                }
            }
        }

        let ext_by_port = self.externals_by_port();
        for (p, calls) in self.calls_by_port().iter().enumerate() {
            let mut rects: Vec<(Occupant, Rect)> = Vec::new();
            for &c in calls {
                if let Some(a) = sol.get(c) {
                    rects.push((Occupant::Call(c), self.call_rect(c, a)));
                }
            }
            for &e in &ext_by_port[p] {
                rects.push((Occupant::External(e), self.external_rect(e)));
            }
            for i in 0..rects.len() {
                for j in (i + 1)..rects.len() {
                    if matches!(
                        (rects[i].0, rects[j].0),
                        (Occupant::External(_), Occupant::External(_))
                    ) {
                        continue;
                    }
                    if rects[i].1.overlaps(&rects[j].1) {
                        out.push(Violation::Overlap {
                            port: PortId(p),
                            a: rects[i].0,
                            b: rects[j].0,
                        });
                    }
                }
            }
        }
        out
    }

    /// Cost attributed to one port visit: handling, delay and waiting there
    /// plus half the fuel of the adjacent legs that are present.
    pub fn port_visit_cost(&self, sol: &Solution, c: CallId) -> f64 {
        let Some(a) = sol.get(c) else {
            return 0.0;
        };
        let r = &self.rates;
        let call = &self.calls[c.0];
        let h = self.handling_at(c, a.berth_position);
        let delay = (a.berth_start + h - call.eft).max(0.0);
        let mut fuel = 0.0;
        let mut arrival = a.berth_start;
        if let Some(p) = self.prev_call(c) {
            if let Some(prev) = sol.get(p) {
                if let Some(s) = prev.leg_speed {
                    fuel += self.leg_cost(p, s);
                    let dist = self.distance(self.calls[p.0].port, call.port);
                    arrival = arrival_time(
                        prev.berth_start,
                        self.handling_at(p, prev.berth_position),
                        &self.speeds[s],
                        dist,
                    );
                }
            }
        }
        if let (Some(n), Some(s)) = (self.next_call(c), a.leg_speed) {
            if sol.is_scheduled(n) {
                fuel += self.leg_cost(c, s);
            }
        }
        r.handling_rate * h + r.delay_rate * delay + r.waiting_rate * (a.berth_start - arrival)
            + fuel / 2.0
    }

    /// Checks structural invariants of the instance.
    pub fn validate(&self) -> Result<(), ModelError> {
        use alloc::format;
        let bad = |m: String| Err(ModelError::InvalidInstance(m));
        if self.speeds.is_empty() {
            return bad("speed set is empty".into());
        }
        for w in self.speeds.windows(2) {
            if !(w[0].speed < w[1].speed) {
                return bad("speeds must be strictly increasing".into());
            }
        }
        if self.speeds.iter().any(|s| !(s.speed > 0.0)) {
            return bad("speeds must be positive".into());
        }
        if !(self.time_step > 0.0) {
            return bad("time step must be positive".into());
        }
        for (i, p) in self.ports.iter().enumerate() {
            if !(p.quay_length > 0.0) || !(p.segment_length > 0.0) {
                return bad(format!("port {i}: quay and segment lengths must be positive"));
            }
            if p.segment_length > p.quay_length {
                return bad(format!("port {i}: segment longer than quay"));
            }
        }
        let np = self.ports.len();
        if self.distances.len() != np || self.distances.iter().any(|r| r.len() != np) {
            return bad("distance matrix must be ports x ports".into());
        }
        for a in 0..np {
            for b in 0..np {
                let d = self.distances[a][b];
                if (d - self.distances[b][a]).abs() > EPS {
                    return bad("distance matrix must be symmetric".into());
                }
                if a != b && !(d > 0.0) {
                    return bad("off-diagonal distances must be positive".into());
                }
            }
        }
        let r = &self.rates;
        for v in [
            r.fuel_price,
            r.handling_rate,
            r.delay_rate,
            r.waiting_rate,
            r.lft_penalty_rate,
            r.deviation_factor,
        ] {
            if !(v >= 0.0) {
                return bad("cost rates must be non-negative".into());
            }
        }
        let mut seen = alloc::vec![false; self.calls.len()];
        for (s, ship) in self.ships.iter().enumerate() {
            if !(ship.length > 0.0) || !(ship.design_speed > 0.0) || !(ship.design_fuel_rate > 0.0)
            {
                return bad(format!("ship {s}: length and design values must be positive"));
            }
            if ship.route.is_empty() {
                return bad(format!("ship {s}: empty route"));
            }
            for (k, &c) in ship.route.iter().enumerate() {
                let Some(call) = self.calls.get(c.0) else {
                    return bad(format!("ship {s}: unknown call {c}"));
                };
                if seen[c.0] {
                    return bad(format!("call {c} appears in more than one route"));
                }
                seen[c.0] = true;
                if call.ship.0 != s || call.call_index != k + 1 {
                    return bad(format!("call {c}: ship or call index disagrees with route"));
                }
                if k > 0 && self.calls[ship.route[k - 1].0].port == call.port {
                    return bad(format!("ship {s}: consecutive calls at the same port"));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("every call must belong to exactly one route".into());
        }
        for (i, call) in self.calls.iter().enumerate() {
            if call.port.0 >= np {
                return bad(format!("call {i}: unknown port"));
            }
            let c = CallId(i);
            if call.ideal_position < -EPS || call.ideal_position > self.max_position(c) + EPS {
                return bad(format!("call {i}: ideal position outside the quay"));
            }
            if call.est < 0.0 || !(call.base_handling > 0.0) {
                return bad(format!("call {i}: negative EST or non-positive handling"));
            }
            if (call.eft - (call.est + call.base_handling)).abs() > 1e-6 {
                return bad(format!("call {i}: EFT must equal EST plus base handling"));
            }
            if call.lft < call.eft - EPS {
                return bad(format!("call {i}: LFT before EFT"));
            }
        }
        for (i, e) in self.externals.iter().enumerate() {
            if e.port.0 >= np {
                return bad(format!("external {i}: unknown port"));
            }
            let quay = self.ports[e.port.0].quay_length;
            if e.position < -EPS || e.position + e.length > quay + EPS {
                return bad(format!("external {i}: outside the quay"));
            }
            if !(e.duration > 0.0) || e.start < 0.0 || !(e.length > 0.0) {
                return bad(format!("external {i}: invalid start, duration or length"));
            }
        }
        Ok(())
    }

    /// Number of calls per ship summed; the `|N|`-independent size measure.
    pub fn num_calls(&self) -> usize {
        self.calls.len()
    }

    /// Latest finish time over all calls.
    pub fn max_lft(&self) -> f64 {
        self.calls.iter().map(|c| c.lft).fold(0.0, f64::max)
    }
}

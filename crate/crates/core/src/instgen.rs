//! Seeded benchmark instance generator.
//!
//! Three North Sea terminals, six ship patterns, minimum handling times per
//! (ship class, terminal), time windows chained along each route so that the
//! next call is reachable at the slowest speed, and fixed external berths.
//! Every draw comes from one ChaCha8 stream seeded with the config seed, in a
//! fixed order, so a config always produces the same instance.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::math::{ceil_to, floor_to, round, EPS};
use crate::model::{
    CallId, CostRates, ExternalBerth, Instance, Port, PortCall, PortId, Rect, Ship, ShipClass,
    ShipId, SpeedLevel,
};
use crate::sampling::{below, rng_from_seed, uniform};

/// Terminal codes, quay lengths (m).
pub const PORTS: [(&str, f64); 3] = [("NLRTM", 1600.0), ("DEBRV", 1800.0), ("DEHAM", 2100.0)];

/// Sea distances (nm) between the terminals of [`PORTS`].
pub const DISTANCES: [[f64; 3]; 3] = [
    [0.0, 260.0, 320.0],
    [260.0, 0.0, 130.0],
    [320.0, 130.0, 0.0],
];

/// Minimum handling hours by class (feeder, medium, large) and terminal
/// (NLRTM, DEBRV, DEHAM).
pub const MIN_HANDLING: [[f64; 3]; 3] = [
    [10.4, 12.1, 10.1],
    [18.4, 21.8, 18.0],
    [26.7, 33.7, 41.0],
];

/// Design speed (kn) and fuel rate at design speed (t/nm) per class.
pub const CLASS_FUEL: [(f64, f64); 3] = [(20.0, 0.10), (22.0, 0.20), (23.0, 0.30)];

/// Maximum deviation from the ideal position, in ship lengths, used for the
/// maximum handling time behind the latest finish time.
pub const POSITION_BOUND: f64 = 4.02;

/// Handling hours per meter of external ship length.
pub const EXTERNAL_HOURS_PER_METER: f64 = 0.1;

const RTM: usize = 0;
const BRV: usize = 1;
const HAM: usize = 2;

/// A route template ships are sampled from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShipPattern {
    pub route: &'static [usize],
    pub class: ShipClass,
    pub length: f64,
}

pub const PATTERNS: [ShipPattern; 6] = [
    ShipPattern { route: &[RTM, BRV, HAM], class: ShipClass::Large, length: 350.0 },
    ShipPattern { route: &[HAM, BRV, RTM], class: ShipClass::Large, length: 330.0 },
    ShipPattern { route: &[RTM, HAM], class: ShipClass::Medium, length: 250.0 },
    ShipPattern { route: &[BRV, RTM, HAM], class: ShipClass::Medium, length: 230.0 },
    ShipPattern { route: &[HAM, BRV], class: ShipClass::Feeder, length: 180.0 },
    ShipPattern { route: &[BRV, RTM], class: ShipClass::Feeder, length: 150.0 },
];

/// The ten speed levels 17.0, 17.5, ..., 21.5 kn.
pub fn speed_levels() -> Vec<SpeedLevel> {
    (0..10).map(|k| SpeedLevel { speed: 17.0 + 0.5 * k as f64 }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_ships: usize,
    pub n_external_per_port: usize,
    pub segment_length: f64,
    /// Cost rates; the fuel price lives here too.
    pub rates: CostRates,
    /// Start-time grid (h).
    pub time_step: f64,
    /// Terminal indices into [`PORTS`] to keep; `None` keeps all three.
    /// Dropped terminals are removed from every route.
    pub ports: Option<Vec<usize>>,
}

impl GeneratorConfig {
    pub fn new(seed: u64, n_ships: usize, n_external_per_port: usize, segment_length: f64) -> Self {
        GeneratorConfig {
            seed,
            n_ships,
            n_external_per_port,
            segment_length,
            rates: CostRates::default(),
            time_step: 1.0,
            ports: None,
        }
    }

    pub fn with_fuel_price(mut self, price: f64) -> Self {
        self.rates.fuel_price = price;
        self
    }

    /// Group name `X_Y_Z` (ships, externals per port, segment length).
    pub fn group(&self) -> String {
        format!("{}_{}_{}", self.n_ships, self.n_external_per_port, round(self.segment_length) as i64)
    }

    /// Instance name `X_Y_Z_seedN`.
    pub fn name(&self) -> String {
        format!("{}_seed{}", self.group(), self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenerateError {
    InvalidConfig(String),
    ExternalPlacement { port: String, placed: usize, wanted: usize },
}

impl fmt::Display for GenerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerateError::InvalidConfig(m) => write!(f, "invalid generator config: {m}"),
            GenerateError::ExternalPlacement { port, placed, wanted } => write!(
                f,
                "could not place external berths at {port}: {placed} of {wanted} placed"
            ),
        }
    }
}

impl core::error::Error for GenerateError {}

const EXTERNAL_ATTEMPTS: usize = 10_000;

/// Builds the instance described by `cfg`.
pub fn generate(cfg: &GeneratorConfig) -> Result<Instance, GenerateError> {
    if cfg.n_ships == 0 {
        return Err(GenerateError::InvalidConfig("n_ships must be positive".to_string()));
    }
    if !(cfg.segment_length > 0.0) || !(cfg.time_step > 0.0) {
        return Err(GenerateError::InvalidConfig(
            "segment length and time step must be positive".to_string(),
        ));
    }
    let kept: Vec<usize> = cfg.ports.clone().unwrap_or_else(|| (0..PORTS.len()).collect());
    if kept.is_empty() || kept.iter().any(|&p| p >= PORTS.len()) {
        return Err(GenerateError::InvalidConfig("unknown terminal index".to_string()));
    }
    let local = |global: usize| kept.iter().position(|&k| k == global);
    let patterns: Vec<(ShipPattern, Vec<usize>)> = PATTERNS
        .iter()
        .map(|p| (*p, p.route.iter().filter_map(|&g| local(g)).collect::<Vec<_>>()))
        .filter(|(_, r)| !r.is_empty())
        .collect();
    if patterns.is_empty() {
        return Err(GenerateError::InvalidConfig("no ship pattern visits the kept terminals".to_string()));
    }

    let ports: Vec<Port> = kept
        .iter()
        .map(|&g| Port {
            code: PORTS[g].0.to_string(),
            quay_length: PORTS[g].1,
            segment_length: cfg.segment_length,
        })
        .collect();
    let distances: Vec<Vec<f64>> = kept
        .iter()
        .map(|&a| kept.iter().map(|&b| DISTANCES[a][b]).collect())
        .collect();
    let speeds = speed_levels();
    let slowest_hours_per_nm = 1.0 / speeds[0].speed;
    let beta = cfg.rates.deviation_factor;
    let step = cfg.time_step;

    let mut rng = rng_from_seed(cfg.seed);
    let first_window = 8.0 * cfg.n_ships as f64;

    let mut ships = Vec::with_capacity(cfg.n_ships);
    let mut calls = Vec::new();
    for i in 0..cfg.n_ships {
        let (pat, route) = &patterns[below(&mut rng, patterns.len() as u64) as usize];
        let (design_speed, design_fuel_rate) = CLASS_FUEL[pat.class.index()];
        let mut ids = Vec::with_capacity(route.len());
        let mut prev: Option<(usize, f64, f64)> = None; // (port, est, h0)
        for (k, &p) in route.iter().enumerate() {
            let quay = ports[p].quay_length;
            let ideal = floor_to(uniform(&mut rng, 0.0, quay - pat.length), cfg.segment_length);
            let h0 = MIN_HANDLING[pat.class.index()][kept[p]];
            let est = match prev {
                None => ceil_to(uniform(&mut rng, 0.0, first_window), step),
                Some((pp, pest, ph0)) => {
                    let slack = uniform(&mut rng, 0.0, 24.0);
                    ceil_to(pest + ph0 + slowest_hours_per_nm * distances[pp][p] + slack, step)
                }
            };
            let h_max = (1.0 + beta * POSITION_BOUND * pat.length) * h0;
            let eft = est + h0;
            ids.push(CallId(calls.len()));
            calls.push(PortCall {
                ship: ShipId(i),
                call_index: k + 1,
                port: PortId(p),
                ideal_position: ideal,
                est,
                eft,
                lft: eft + (h_max - h0) / 2.0,
                base_handling: h0,
            });
            prev = Some((p, est, h0));
        }
        ships.push(Ship {
            name: format!("ship{}", i + 1),
            length: pat.length,
            class: pat.class,
            design_speed,
            design_fuel_rate,
            route: ids,
        });
    }

    let max_lft = calls.iter().map(|c| c.lft).fold(0.0, f64::max);
    let mut externals: Vec<ExternalBerth> = Vec::new();
    for (p, port) in ports.iter().enumerate() {
        let mut placed: Vec<Rect> = Vec::with_capacity(cfg.n_external_per_port);
        let mut attempts = 0;
        while placed.len() < cfg.n_external_per_port {
            if attempts == EXTERNAL_ATTEMPTS {
                return Err(GenerateError::ExternalPlacement {
                    port: port.code.clone(),
                    placed: placed.len(),
                    wanted: cfg.n_external_per_port,
                });
            }
            attempts += 1;
            let length = uniform(&mut rng, 180.0, 330.0);
            let position = floor_to(uniform(&mut rng, 0.0, port.quay_length - length), cfg.segment_length);
            let start = floor_to(uniform(&mut rng, 0.0, max_lft), step);
            let rect = Rect {
                x: position,
                length,
                start,
                duration: EXTERNAL_HOURS_PER_METER * length,
            };
            if placed.iter().any(|r| r.overlaps(&rect)) || position + length > port.quay_length + EPS {
                continue;
            }
            placed.push(rect);
            externals.push(ExternalBerth {
                port: PortId(p),
                position,
                start,
                duration: rect.duration,
                length,
            });
        }
    }

    let inst = Instance {
        name: cfg.name(),
        ports,
        ships,
        calls,
        externals,
        speeds,
        distances,
        rates: cfg.rates,
        horizon: 1.5 * max_lft,
        time_step: step,
    };
    inst.validate()
        .map_err(|e| GenerateError::InvalidConfig(e.to_string()))?;
    Ok(inst)
}

/// Which benchmark grid to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Seeds 1-10, 30/50/70 ships, 5/10 externals, 10/20/40/80 m segments.
    Main,
    /// Seeds 1-5, 4-15 ships, 3/4/5 externals, 10/20/40/80 m segments.
    Small,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Main => "main",
            GridKind::Small => "small",
        }
    }
}

pub const SEGMENTS: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

/// All configs of a benchmark grid, ordered by group then seed.
pub fn benchmark_grid(kind: GridKind) -> Vec<GeneratorConfig> {
    let (seeds, ships, externals): (u64, Vec<usize>, Vec<usize>) = match kind {
        GridKind::Main => (10, alloc::vec![30, 50, 70], alloc::vec![5, 10]),
        GridKind::Small => (5, (4..=15).collect(), alloc::vec![3, 4, 5]),
    };
    let mut out = Vec::new();
    for &n in &ships {
        for &e in &externals {
            for &s in &SEGMENTS {
                for seed in 1..=seeds {
                    out.push(GeneratorConfig::new(seed, n, e, s));
                }
            }
        }
    }
    out
}

/// Relative output path `bench/<kind>/<X>_<Y>_<Z>/seed<N>.json`.
pub fn bench_path(kind: GridKind, cfg: &GeneratorConfig) -> String {
    format!("bench/{}/{}/seed{}.json", kind.as_str(), cfg.group(), cfg.seed)
}

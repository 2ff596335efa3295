#![allow(dead_code)]

use mcbap_core::instgen::{generate, speed_levels, GeneratorConfig};
use mcbap_core::model::{
    CallId, CostRates, ExternalBerth, Instance, Port, PortCall, PortId, Ship, ShipClass, ShipId,
};

/// One visit of a hand-built route.
#[derive(Clone, Copy)]
pub struct Visit {
    pub port: usize,
    pub ideal: f64,
    pub est: f64,
    pub h0: f64,
    /// LFT minus EFT.
    pub slack: f64,
}

pub fn visit(port: usize, ideal: f64, est: f64, h0: f64) -> Visit {
    Visit { port, ideal, est, h0, slack: 10.0 }
}

pub struct Builder {
    ports: Vec<Port>,
    distances: Vec<Vec<f64>>,
    ships: Vec<(f64, Vec<Visit>)>,
    externals: Vec<ExternalBerth>,
    pub rates: CostRates,
    pub time_step: f64,
    pub horizon: f64,
}

impl Builder {
    /// Ports given as `(quay, segment)`; all distances equal `dist`.
    pub fn new(ports: &[(f64, f64)], dist: f64) -> Self {
        let n = ports.len();
        Builder {
            ports: ports
                .iter()
                .enumerate()
                .map(|(i, &(q, s))| Port { code: format!("P{i}"), quay_length: q, segment_length: s })
                .collect(),
            distances: (0..n)
                .map(|a| (0..n).map(|b| if a == b { 0.0 } else { dist }).collect())
                .collect(),
            ships: Vec::new(),
            externals: Vec::new(),
            rates: CostRates::default(),
            time_step: 1.0,
            horizon: 200.0,
        }
    }

    pub fn ship(mut self, length: f64, route: &[Visit]) -> Self {
        self.ships.push((length, route.to_vec()));
        self
    }

    pub fn external(mut self, port: usize, position: f64, length: f64, start: f64, duration: f64) -> Self {
        self.externals.push(ExternalBerth { port: PortId(port), position, start, duration, length });
        self
    }

    pub fn step(mut self, step: f64) -> Self {
        self.time_step = step;
        self
    }

    pub fn horizon(mut self, h: f64) -> Self {
        self.horizon = h;
        self
    }

    pub fn build(self) -> Instance {
        let mut calls = Vec::new();
        let mut ships = Vec::new();
        for (s, (length, route)) in self.ships.iter().enumerate() {
            let mut ids = Vec::new();
            for (k, v) in route.iter().enumerate() {
                ids.push(CallId(calls.len()));
                calls.push(PortCall {
                    ship: ShipId(s),
                    call_index: k + 1,
                    port: PortId(v.port),
                    ideal_position: v.ideal,
                    est: v.est,
                    eft: v.est + v.h0,
                    lft: v.est + v.h0 + v.slack,
                    base_handling: v.h0,
                });
            }
            ships.push(Ship {
                name: format!("S{s}"),
                length: *length,
                class: ShipClass::Feeder,
                design_speed: 20.0,
                design_fuel_rate: 0.1,
                route: ids,
            });
        }
        let inst = Instance {
            name: "hand".into(),
            ports: self.ports,
            ships,
            calls,
            externals: self.externals,
            speeds: speed_levels(),
            distances: self.distances,
            rates: self.rates,
            horizon: self.horizon,
            time_step: self.time_step,
        };
        inst.validate().expect("hand-built instance is valid");
        inst
    }
}

/// Small generated instance: two terminals, 80 m segments, 4 h start grid.
pub fn tiny(seed: u64, ships: usize, externals: usize) -> Instance {
    let mut cfg = GeneratorConfig::new(seed, ships, externals, 80.0);
    cfg.time_step = 4.0;
    cfg.ports = Some(vec![0, 1]);
    generate(&cfg).expect("tiny instance generates")
}

use std::time::Instant;

use mcbap_core::search::Clock;

/// Seconds of wall time since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn start() -> Self {
        WallClock { start: Instant::now() }
    }
}

impl Clock for WallClock {
    fn elapsed(&mut self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

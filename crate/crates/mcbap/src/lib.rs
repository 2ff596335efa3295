//! File formats, reports and the command-line front end of the solver in
//! [`mcbap_core`].

pub mod bench;
pub mod cli;
pub mod clock;
pub mod io;
pub mod manifest;
pub mod plot;
pub mod report;

pub use clock::WallClock;

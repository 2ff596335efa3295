//! CSV and text reports of runs.

use std::fmt::Write as _;

use mcbap_core::model::{CostBreakdown, Violation};
use mcbap_core::operators::{Family, Insertion, Removal};
use mcbap_core::search::SearchResult;

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

/// One row per iteration.
pub fn trace_csv(r: &SearchResult) -> String {
    csv_string(|w| {
        w.write_record(["time", "iteration", "current", "best", "temperature", "removal", "insertion", "outcome"])?;
        for t in &r.trace {
            w.write_record([
                t.time.to_string(),
                t.iteration.to_string(),
                t.current.to_string(),
                t.best.to_string(),
                t.temperature.to_string(),
                t.removal.name().to_string(),
                t.insertion.name().to_string(),
                t.outcome.name().to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Operator probabilities after every weight update, one row per operator.
pub fn probabilities_csv(r: &SearchResult) -> String {
    csv_string(|w| {
        w.write_record(["time", "iteration", "family", "operator", "probability"])?;
        for s in &r.probabilities {
            for (k, p) in s.removal.iter().enumerate() {
                w.write_record([
                    s.time.to_string(),
                    s.iteration.to_string(),
                    "removal".into(),
                    Removal::ALL[k].name().into(),
                    p.to_string(),
                ])?;
            }
            for (k, p) in s.insertion.iter().enumerate() {
                w.write_record([
                    s.time.to_string(),
                    s.iteration.to_string(),
                    "insertion".into(),
                    Insertion::ALL[k].name().into(),
                    p.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

/// Final weight, probability and usage of each operator.
pub fn operator_stats_csv(r: &SearchResult) -> String {
    csv_string(|w| {
        w.write_record(["family", "operator", "weight", "probability", "uses", "successes"])?;
        for (fam, label) in [(Family::Removal, "removal"), (Family::Insertion, "insertion")] {
            for (k, s) in r.bank.family(fam).iter().enumerate() {
                let name = match fam {
                    Family::Removal => Removal::ALL[k].name(),
                    Family::Insertion => Insertion::ALL[k].name(),
                };
                w.write_record([
                    label.to_string(),
                    name.to_string(),
                    s.weight.to_string(),
                    s.probability.to_string(),
                    s.uses.to_string(),
                    s.successes.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

pub fn breakdown_text(b: &CostBreakdown) -> String {
    let mut s = String::new();
    for (name, v) in [
        ("waiting", b.waiting),
        ("handling", b.handling),
        ("delay", b.delay),
        ("lft_penalty", b.lft_penalty),
        ("fuel", b.fuel),
        ("total", b.total),
    ] {
        let _ = writeln!(s, "{name:<12} {v:>16.2}");
    }
    s
}

pub fn violations_text(v: &[Violation]) -> String {
    v.iter().map(|x| format!("violation: {x}\n")).collect()
}

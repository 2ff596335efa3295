mod common;

use common::{tiny, visit, Builder, Visit};
use mcbap_core::construct::{construct, feasible_position_count, most_constrained};
use mcbap_core::instgen::{generate, GeneratorConfig};
use mcbap_core::model::CallId;
use mcbap_core::placement::{CandidateMode, Schedule};

fn window(port: usize, ideal: f64, est: f64, h0: f64, slack: f64) -> Visit {
    Visit { slack, ..visit(port, ideal, est, h0) }
}

#[test]
fn counts_every_start_in_the_window() {
    let inst = Builder::new(&[(100.0, 10.0)], 100.0).ship(100.0, &[window(0, 0.0, 0.0, 10.0, 4.0)]).build();
    assert_eq!(feasible_position_count(&Schedule::new(&inst), CallId(0)), 5);
}

#[test]
fn fully_blocked_quay_has_no_positions() {
    let inst = Builder::new(&[(100.0, 10.0)], 100.0)
        .ship(100.0, &[window(0, 0.0, 0.0, 10.0, 4.0)])
        .external(0, 0.0, 100.0, 0.0, 30.0)
        .build();
    assert_eq!(feasible_position_count(&Schedule::new(&inst), CallId(0)), 0);
}

#[test]
fn two_free_spans_are_counted_separately() {
    // Starts 0..=4 and 10..=14 remain once the quay is busy during [6, 10).
    let inst = Builder::new(&[(100.0, 10.0)], 100.0)
        .ship(100.0, &[window(0, 0.0, 0.0, 2.0, 14.0)])
        .external(0, 0.0, 100.0, 6.0, 4.0)
        .build();
    let s = Schedule::new(&inst);
    assert_eq!(feasible_position_count(&s, CallId(0)), 10);
    assert_eq!(s.enumerate_positions(CallId(0), CandidateMode::All, 14.0).len(), 10);
}

#[test]
fn most_constrained_rule_and_ties() {
    let mut b = Builder::new(&[(500.0, 10.0)], 100.0);
    for est in [5.0, 3.0, 4.0] {
        b = b.ship(100.0, &[visit(0, 0.0, est, 10.0)]);
    }
    let inst = b.build();
    let pending = [CallId(0), CallId(1), CallId(2)];
    assert_eq!(most_constrained(&inst, &pending, &[3, 7, 7]), Some(0));
    assert_eq!(most_constrained(&inst, &pending, &[7, 7, 0]), Some(2));
    assert_eq!(most_constrained(&inst, &pending, &[4, 4, 4]), Some(1));
    assert_eq!(most_constrained(&inst, &[], &[]), None);
}

#[test]
fn single_call_goes_to_ideal_spot_at_est() {
    let inst = Builder::new(&[(500.0, 10.0)], 100.0).ship(100.0, &[visit(0, 120.0, 7.0, 10.0)]).build();
    let sol = construct(&inst);
    let a = sol.get(CallId(0)).unwrap();
    assert_eq!((a.berth_position, a.berth_start), (120.0, 7.0));
    assert_eq!(inst.objective(&sol).unwrap(), 10_000.0);
}

#[test]
fn two_identical_ships_berth_side_by_side() {
    let inst = Builder::new(&[(200.0, 10.0)], 100.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .build();
    let sol = construct(&inst);
    let a = sol.get(CallId(0)).unwrap();
    let b = sol.get(CallId(1)).unwrap();
    assert_eq!((a.berth_start, b.berth_start), (0.0, 0.0));
    assert_eq!((a.berth_position - b.berth_position).abs(), 100.0);
    assert!(inst.check_feasibility(&sol).is_empty());
}

#[test]
fn blocked_call_is_placed_at_first_free_hour() {
    // The long ship cannot berth until the external leaves at 20.
    let inst = Builder::new(&[(300.0, 10.0)], 100.0)
        .ship(200.0, &[window(0, 0.0, 0.0, 10.0, 30.0)])
        .ship(100.0, &[window(0, 200.0, 0.0, 10.0, 100.0)])
        .external(0, 0.0, 200.0, 0.0, 20.0)
        .build();
    let s = Schedule::new(&inst);
    assert!(feasible_position_count(&s, CallId(0)) < feasible_position_count(&s, CallId(1)));
    let sol = construct(&inst);
    let a = sol.get(CallId(0)).unwrap();
    assert_eq!(a.berth_start, 20.0);
    let b = sol.get(CallId(1)).unwrap();
    assert_eq!((b.berth_position, b.berth_start), (200.0, 0.0));
}

#[test]
fn adjacent_mode_only_offers_touching_positions() {
    let inst = Builder::new(&[(300.0, 20.0)], 100.0)
        .ship(100.0, &[window(0, 100.0, 0.0, 10.0, 20.0)])
        .horizon(60.0)
        .build();
    let s = Schedule::new(&inst);
    let all = s.enumerate_positions(CallId(0), CandidateMode::All, 48.0);
    let adj = s.enumerate_positions(CallId(0), CandidateMode::Adjacent, 48.0);
    assert!(adj.len() < all.len());
    assert!(all.contains(&(100.0, 10.0)));
    assert!(!adj.contains(&(100.0, 10.0)));
    for (x, y) in adj {
        assert!(x == 0.0 || x == 200.0 || y == 0.0, "floating candidate ({x}, {y})");
    }
}

#[test]
fn earliest_arrival_uses_fastest_speed_from_predecessor() {
    let inst = Builder::new(&[(500.0, 10.0), (500.0, 10.0)], 215.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0), visit(1, 0.0, 15.0, 10.0)])
        .build();
    let mut s = Schedule::new(&inst);
    assert_eq!(s.earliest_arrival(CallId(1)), 15.0);
    let pl = s.price(CallId(0), 0.0, 4.0).unwrap();
    s.place(&pl);
    assert!((s.earliest_arrival(CallId(1)) - 24.0).abs() < 1e-9);
}

#[test]
fn construction_is_feasible_on_generated_instances() {
    for seed in 1..=3 {
        for (n, e, seg) in [(30, 5, 10.0), (30, 10, 80.0), (15, 5, 40.0)] {
            let inst = generate(&GeneratorConfig::new(seed, n, e, seg)).unwrap();
            let sol = construct(&inst);
            assert!(sol.is_complete());
            assert!(inst.check_feasibility(&sol).is_empty(), "{}", inst.name);
        }
        let inst = tiny(seed, 3, 1);
        assert!(inst.check_feasibility(&construct(&inst)).is_empty());
    }
}

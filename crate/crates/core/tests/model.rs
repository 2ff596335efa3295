mod common;

use common::{visit, Builder};
use mcbap_core::instgen::speed_levels;
use mcbap_core::model::{
    arrival_time, gap, handling_formula, leg_fuel_cost, Assignment, CallId, CostRates, ModelError, Ship,
    ShipClass, Solution, SpeedLevel, Violation,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn ship(design_speed: f64, fuel: f64) -> Ship {
    Ship {
        name: "s".into(),
        length: 100.0,
        class: ShipClass::Feeder,
        design_speed,
        design_fuel_rate: fuel,
        route: vec![],
    }
}

fn at(x: f64, y: f64, s: Option<usize>) -> Option<Assignment> {
    Some(Assignment { berth_position: x, berth_start: y, leg_speed: s })
}

#[test]
fn handling_time_grows_linearly_with_deviation() {
    assert_eq!(handling_formula(12.0, 300.0, 300.0, 0.001), 12.0);
    assert!(close(handling_formula(10.0, 0.0, 50.0, 0.01), 15.0, 1e-12));
    assert!(close(handling_formula(10.0, 100.0, 50.0, 0.01), 15.0, 1e-12));
    assert_eq!(handling_formula(10.1, 40.0, 40.0, 0.001), 10.1);
}

#[test]
fn handling_outside_quay_is_an_error() {
    let inst = Builder::new(&[(200.0, 10.0)], 100.0).ship(100.0, &[visit(0, 0.0, 0.0, 10.0)]).build();
    assert!(inst.handling_time(CallId(0), 150.0).is_err());
    assert!(inst.handling_time(CallId(0), -10.0).is_err());
    assert!(close(inst.handling_time(CallId(0), 100.0).unwrap(), 11.0, 1e-12));
}

#[test]
fn fuel_cost_follows_cubic_law() {
    let r = CostRates::default();
    let s = ship(20.0, 1.0);
    assert!(close(leg_fuel_cost(&s, &SpeedLevel { speed: 20.0 }, 100.0, &r), 50_000.0, 1e-9));
    let slow = leg_fuel_cost(&ship(10.0, 1.0), &SpeedLevel { speed: 10.0 }, 100.0, &r);
    let fast = leg_fuel_cost(&ship(10.0, 1.0), &SpeedLevel { speed: 20.0 }, 100.0, &r);
    assert!(close(fast, 8.0 * slow, 1e-9));
    let v = leg_fuel_cost(&ship(20.0, 0.1), &SpeedLevel { speed: 17.0 }, 100.0, &r);
    assert!(close(v, 3070.625, 1e-9));
}

#[test]
fn arrival_is_departure_plus_sailing() {
    assert!(close(arrival_time(0.0, 10.0, &SpeedLevel { speed: 10.0 }, 240.0), 34.0, 1e-12));
    assert_eq!(arrival_time(3.0, 10.0, &SpeedLevel { speed: 17.0 }, 0.0), 13.0);
    assert!(close(arrival_time(5.0, 10.1, &SpeedLevel { speed: 20.0 }, 400.0), 35.1, 1e-12));
}

#[test]
fn missing_leg_speed_is_reported() {
    let inst = Builder::new(&[(500.0, 10.0), (500.0, 10.0)], 100.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0), visit(1, 0.0, 20.0, 10.0)])
        .build();
    let sol = Solution { assignments: vec![at(0.0, 0.0, None), at(0.0, 20.0, None)] };
    assert!(inst.arrival(&sol, CallId(1)).is_err());
}

#[test]
fn evaluation_of_empty_and_single_call_instances() {
    let inst = Builder::new(&[(500.0, 10.0)], 100.0).build();
    let b = inst.evaluate(&Solution::empty(&inst)).unwrap();
    assert_eq!(b.total, 0.0);

    let inst = Builder::new(&[(500.0, 10.0)], 100.0).ship(100.0, &[visit(0, 40.0, 6.0, 10.0)]).build();
    let sol = Solution { assignments: vec![at(40.0, 6.0, None)] };
    let b = inst.evaluate(&sol).unwrap();
    assert!(close(b.total, 10_000.0, 1e-9));
    assert_eq!((b.waiting, b.delay, b.lft_penalty, b.fuel), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn evaluation_of_two_call_route_by_hand() {
    // Leg of 170 nm at 17 kn takes 10 h; the ship arrives at 20 and starts at 25.
    let inst = Builder::new(&[(500.0, 10.0), (500.0, 10.0)], 170.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0), visit(1, 0.0, 20.0, 10.0)])
        .build();
    let sol = Solution { assignments: vec![at(20.0, 0.0, Some(0)), at(0.0, 25.0, None)] };
    let b = inst.evaluate(&sol).unwrap();
    let h1 = 10.0 * (1.0 + 0.001 * 20.0);
    let arrival = h1 + 10.0;
    let waiting = 500.0 * (25.0 - arrival);
    let handling = 1000.0 * (h1 + 10.0);
    let delay = 2000.0 * (h1 - 10.0 + 5.0);
    let fuel = 500.0 * (17.0f64 / 20.0).powi(3) * 0.1 * 170.0;
    assert!(close(b.waiting, waiting, 1e-6));
    assert!(close(b.handling, handling, 1e-6));
    assert!(close(b.delay, delay, 1e-6));
    assert!(close(b.fuel, fuel, 1e-6));
    assert_eq!(b.lft_penalty, 0.0);
    assert!(close(b.total, waiting + handling + delay + fuel, 1e-6));
}

#[test]
fn incomplete_solution_lists_missing_calls() {
    let inst = Builder::new(&[(500.0, 10.0)], 100.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .build();
    let sol = Solution { assignments: vec![at(0.0, 0.0, None), None] };
    match inst.evaluate(&sol) {
        Err(ModelError::IncompleteSolution { missing }) => assert_eq!(missing, vec![CallId(1)]),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn feasibility_checks() {
    let inst = Builder::new(&[(300.0, 10.0)], 100.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .build();
    let same = Solution { assignments: vec![at(0.0, 0.0, None), at(0.0, 0.0, None), at(200.0, 0.0, None)] };
    assert!(inst
        .check_feasibility(&same)
        .iter()
        .any(|v| matches!(v, Violation::Overlap { .. })));
    // Last ship ends exactly at the quay end; the first two share space but not time.
    let ok = Solution { assignments: vec![at(0.0, 0.0, None), at(0.0, 10.0, None), at(200.0, 0.0, None)] };
    assert!(inst.check_feasibility(&ok).is_empty(), "{:?}", inst.check_feasibility(&ok));
    let over = Solution { assignments: vec![at(0.0, 0.0, None), at(0.0, 10.0, None), at(210.0, 0.0, None)] };
    assert!(!inst.check_feasibility(&over).is_empty());
}

#[test]
fn temporal_overlap_with_disjoint_positions_is_feasible() {
    let inst = Builder::new(&[(400.0, 10.0)], 100.0)
        .ship(120.0, &[visit(0, 0.0, 0.0, 10.0)])
        .ship(120.0, &[visit(0, 120.0, 0.0, 10.0)])
        .ship(120.0, &[visit(0, 240.0, 2.0, 10.0)])
        .build();
    let sol = Solution { assignments: vec![at(0.0, 0.0, None), at(120.0, 3.0, None), at(240.0, 2.0, None)] };
    assert!(inst.check_feasibility(&sol).is_empty());
}

#[test]
fn port_visit_cost_splits_fuel_between_neighbours() {
    let inst = Builder::new(&[(500.0, 10.0), (500.0, 10.0)], 170.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0), visit(1, 0.0, 20.0, 10.0), visit(0, 0.0, 40.0, 10.0)])
        .build();
    let sol = Solution {
        assignments: vec![
            at(0.0, 0.0, None),
            at(100.0, 0.0, Some(0)),
            at(0.0, 22.0, Some(9)),
            at(100.0, 40.0, None),
        ],
    };
    assert!(close(inst.port_visit_cost(&sol, CallId(0)), 10_000.0, 1e-9));
    let leg1 = inst.leg_cost(CallId(1), 0);
    let leg2 = inst.leg_cost(CallId(2), 9);
    let h1 = 10.0 * 1.1;
    let first = 1000.0 * h1 + 2000.0 * (h1 - 10.0) + leg1 / 2.0;
    assert!(close(inst.port_visit_cost(&sol, CallId(1)), first, 1e-6));
    // Arrives at 11 + 10 = 21, starts at 22 and finishes 2 h past EFT.
    let middle = 1000.0 * 10.0 + 500.0 * 1.0 + 2000.0 * 2.0 + (leg1 + leg2) / 2.0;
    assert!(close(inst.port_visit_cost(&sol, CallId(2)), middle, 1e-6));
}

#[test]
fn gap_metric() {
    assert_eq!(gap(100.0, 100.0).unwrap(), 0.0);
    assert!(close(gap(110.0, 100.0).unwrap(), 0.10, 1e-12));
    assert!(gap(90.0, 100.0).unwrap() < 0.0);
    assert!(gap(5.0, 0.0).is_err());
    assert!(gap(5.0, -1.0).is_err());
}

#[test]
fn speed_set_is_uniform_from_17_to_21_5() {
    let s: Vec<f64> = speed_levels().iter().map(|l| l.speed).collect();
    let want: Vec<f64> = (0..10).map(|k| 17.0 + 0.5 * k as f64).collect();
    assert_eq!(s, want);
}

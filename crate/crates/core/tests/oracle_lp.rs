mod common;

use common::{tiny, visit, Builder};
use mcbap_core::construct::construct;
use mcbap_core::instgen::{generate, GeneratorConfig};
use mcbap_core::lp::{build_model, export_lp, parse_lp, solution_values, substitute_and_check, SubstitutionError};
use mcbap_core::model::{Assignment, CallId, Solution};
use mcbap_core::oracle::{brute_force, OracleConfig, OracleError};

#[test]
fn oracle_single_call() {
    let inst = Builder::new(&[(500.0, 10.0)], 100.0).ship(100.0, &[visit(0, 60.0, 3.0, 12.0)]).build();
    let r = brute_force(&inst, &OracleConfig::default()).unwrap();
    let a = r.solution.get(CallId(0)).unwrap();
    assert_eq!((a.berth_position, a.berth_start), (60.0, 3.0));
    assert_eq!(r.objective, 12_000.0);
}

#[test]
fn oracle_makes_one_ship_wait_for_the_other() {
    let inst = Builder::new(&[(100.0, 10.0)], 100.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .build();
    let r = brute_force(&inst, &OracleConfig::default()).unwrap();
    let mut starts: Vec<f64> = (0..2).map(|c| r.solution.get(CallId(c)).unwrap().berth_start).collect();
    starts.sort_by(f64::total_cmp);
    assert_eq!(starts, vec![0.0, 10.0]);
    assert_eq!(r.objective, 2.0 * 10_000.0 + 10.0 * 2000.0);
}

#[test]
fn oracle_never_loses_to_construction() {
    for seed in 1..=6 {
        let inst = tiny(seed, 3, 1);
        let r = brute_force(&inst, &OracleConfig::default()).unwrap();
        let c = inst.objective(&construct(&inst)).unwrap();
        assert!(r.objective <= c + 1e-9);
        assert!(inst.check_feasibility(&r.solution).is_empty());
        assert!((inst.objective(&r.solution).unwrap() - r.objective).abs() < 1e-6);
    }
}

#[test]
fn oracle_refuses_large_instances() {
    let inst = tiny(1, 6, 1);
    assert!(matches!(
        brute_force(&inst, &OracleConfig::default()),
        Err(OracleError::TooManyShips { ships: 6, max: 4 })
    ));
    let cfg = OracleConfig { max_ships: 10, max_calls: 3, ..Default::default() };
    assert!(matches!(brute_force(&inst, &cfg), Err(OracleError::TooManyCalls { .. })));
    let inst = tiny(5, 4, 1);
    let cfg = OracleConfig { max_nodes: 10, ..Default::default() };
    assert_eq!(brute_force(&inst, &cfg).unwrap_err(), OracleError::NodeLimit { nodes: 10 });
}

#[test]
fn variable_counts() {
    let one = Builder::new(&[(500.0, 10.0)], 100.0).ship(100.0, &[visit(0, 0.0, 0.0, 10.0)]).build();
    let m = build_model(&one);
    assert_eq!(m.continuous_count(), 7);
    assert_eq!(m.binary_count(), 0);
    assert_eq!(m.count_prefix("v"), 0);

    let route: Vec<_> = (0..4).map(|k| visit(k % 2, 0.0, 40.0 * k as f64, 10.0)).collect();
    let inst = Builder::new(&[(500.0, 10.0), (500.0, 10.0)], 100.0).ship(100.0, &route).build();
    let m = build_model(&inst);
    assert_eq!(m.count_prefix("v"), 3 * 10);
    assert_eq!(m.binary_count(), 30 + 2 * 2 * 2);
}

#[test]
fn exported_text_parses_back() {
    let inst = generate(&GeneratorConfig::new(1, 5, 2, 40.0)).unwrap();
    let text = export_lp(&inst);
    let parsed = parse_lp(&text).unwrap();
    let built = build_model(&inst);
    assert_eq!(parsed.rows, built.rows);
    assert_eq!(parsed.objective, built.objective);
    assert_eq!(parsed.binaries, built.binaries);
    assert_eq!(parsed.bounds, built.bounds);
    let mut a = parsed.variables.clone();
    let mut b = built.variables.clone();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn malformed_lp_reports_a_line() {
    let err = parse_lp("Minimize\n obj: x\nSubject To\n c1: x + <= 3\nEnd\n").unwrap_err();
    assert_eq!(err.line, 4);
    assert!(parse_lp("Minimize\n obj: x\n").is_err());
}

#[test]
fn construction_satisfies_every_row() {
    for (n, e, s) in [(30, 5, 10.0), (8, 3, 80.0)] {
        let inst = generate(&GeneratorConfig::new(2, n, e, s)).unwrap();
        let sol = construct(&inst);
        let m = build_model(&inst);
        let rep = substitute_and_check(&m, &solution_values(&inst, &sol).unwrap()).unwrap();
        assert!(rep.is_feasible(), "{:?}", &rep.violated_rows[..rep.violated_rows.len().min(5)]);
        let f = inst.objective(&sol).unwrap();
        assert!((rep.objective - f).abs() <= 1e-6 * f);
    }
}

#[test]
fn overlap_violates_the_separation_rows() {
    let inst = Builder::new(&[(300.0, 10.0)], 100.0)
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .ship(100.0, &[visit(0, 0.0, 0.0, 10.0)])
        .build();
    let a = Some(Assignment { berth_position: 0.0, berth_start: 0.0, leg_speed: None });
    let sol = Solution { assignments: vec![a, a] };
    let m = build_model(&inst);
    let rep = substitute_and_check(&m, &solution_values(&inst, &sol).unwrap()).unwrap();
    assert_eq!(rep.violated_rows.len(), 1);
    assert!(rep.violated_rows[0].0.starts_with("apart_"));
}

#[test]
fn substitution_rejects_mismatched_dimensions() {
    let inst = tiny(1, 2, 1);
    let m = build_model(&inst);
    let mut vals = solution_values(&inst, &construct(&inst)).unwrap();
    vals.insert("zz_9_9".into(), 1.0);
    assert_eq!(substitute_and_check(&m, &vals).unwrap_err(), SubstitutionError::UnknownVariable("zz_9_9".into()));
    vals.remove("zz_9_9");
    let first = m.variables[0].clone();
    vals.remove(&first);
    assert_eq!(substitute_and_check(&m, &vals).unwrap_err(), SubstitutionError::MissingValue(first));
}

#[test]
fn oracle_optimum_satisfies_the_model() {
    for seed in 1..=4 {
        let inst = tiny(seed, 2, 1);
        let r = brute_force(&inst, &OracleConfig::default()).unwrap();
        let rep = substitute_and_check(&build_model(&inst), &solution_values(&inst, &r.solution).unwrap()).unwrap();
        assert!(rep.is_feasible());
        assert!((rep.objective - r.objective).abs() <= 1e-6 * r.objective);
    }
}

/// A grid plan with random positions (possibly off the quay), starts around
/// the EST and random leg speeds. Usually infeasible.
fn random_grid_plan(inst: &mcbap_core::model::Instance, seed: u64) -> Solution {
    use mcbap_core::sampling::{below, int_inclusive, rng_from_seed};
    let mut rng = rng_from_seed(seed);
    let mut sol = Solution::empty(inst);
    for (i, call) in inst.calls.iter().enumerate() {
        let port = &inst.ports[call.port.0];
        let slots = (port.quay_length / port.segment_length) as u64;
        let x = below(&mut rng, slots + 1) as f64 * port.segment_length;
        let y = (call.est / inst.time_step).floor() * inst.time_step
            + int_inclusive(&mut rng, -2, 10) as f64 * inst.time_step;
        let leg_speed = inst.next_call(CallId(i)).map(|_| below(&mut rng, inst.speeds.len() as u64) as usize);
        sol.assignments[i] = Some(Assignment { berth_position: x, berth_start: y.max(0.0), leg_speed });
    }
    sol
}

#[test]
fn model_rows_agree_with_feasibility_checker() {
    let (mut feasible, mut infeasible) = (0, 0);
    for seed in 0..400u64 {
        let inst = tiny(1 + seed / 20, 2 + (seed % 3) as usize, (seed % 2) as usize);
        let sol = random_grid_plan(&inst, seed);
        let rep = substitute_and_check(&build_model(&inst), &solution_values(&inst, &sol).unwrap()).unwrap();
        let ok = inst.check_feasibility(&sol).is_empty();
        assert_eq!(rep.is_feasible(), ok, "seed {seed}: {:?} vs {:?}", rep, inst.check_feasibility(&sol));
        if ok {
            feasible += 1;
        } else {
            infeasible += 1;
        }
    }
    assert!(feasible > 0 && infeasible > 0, "feasible {feasible}, infeasible {infeasible}");
}

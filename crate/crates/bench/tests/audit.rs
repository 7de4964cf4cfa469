use std::path::PathBuf;

use tamper_bench::audit::audit_trace;
use tamper_core::executor::run_tamper;
use tamper_core::scenario::Scenario;
use tamper_core::trace::Event;

fn scenario(rel: &str) -> Scenario {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/scenarios").join(rel);
    Scenario::load(&p).unwrap()
}

#[test]
fn real_runs_are_clean() {
    for name in ["hstack/h01.toml", "kitchen/k03.toml", "grocery/g01.toml", "misc/regrasp.toml"] {
        let sc = scenario(name);
        let r = run_tamper(&sc, 1);
        assert!(audit_trace(&r.trace, &sc.domain).is_empty(), "{name}");
    }
}

/// Slip a constraint in front of the first plan that its first step breaks.
fn planted(sc: &Scenario) -> (tamper_core::trace::RunTrace, usize, String) {
    let mut t = run_tamper(sc, 1).trace;
    let at = t
        .events
        .iter()
        .position(|e| matches!(e, Event::PlanComputed { .. }))
        .unwrap();
    let Event::PlanComputed { steps, .. } = &t.events[at] else { unreachable!() };
    let forbid = steps[0].action.clone();
    t.events.insert(
        at,
        Event::ConstraintAsserted {
            epoch: 0,
            when: vec![],
            forbid: forbid.clone(),
            reason: "test".into(),
        },
    );
    (t, at + 1, forbid)
}

#[test]
fn planted_violation_is_found() {
    let sc = scenario("hstack/h02.toml");
    let (t, plan_at, forbid) = planted(&sc);
    let v = audit_trace(&t, &sc.domain);
    assert!(!v.is_empty());
    assert_eq!(v[0].event, plan_at);
    assert_eq!(v[0].step, 0);
    assert_eq!(v[0].action, forbid);
}

#[test]
fn clearing_lifts_the_constraint() {
    let sc = scenario("hstack/h02.toml");
    let (mut t, plan_at, _) = planted(&sc);
    t.events.insert(
        plan_at,
        Event::ConstraintsCleared {
            epoch: 1,
            budget_multiplier: 2.0,
        },
    );
    assert!(audit_trace(&t, &sc.domain).is_empty());
}

#[test]
fn permanent_rules_always_apply() {
    let sc = scenario("grocery/g01.toml");
    let mut t = run_tamper(&sc, 1).trace;
    let Some(Event::PlanComputed { steps, .. }) = t.events.iter_mut().find(|e| matches!(e, Event::PlanComputed { .. })) else {
        panic!()
    };
    // a step that puts apples in the cart while the eggs are already there
    let d = &sc.domain;
    let mut s = tamper_core::domain::SymbolicState::all_false(d.width());
    s.set(d.variables().resolve("at(eggs,cart)").unwrap(), true);
    s.set(d.variables().resolve("holding(apples)").unwrap(), true);
    steps[0].action = "place(apples,cart)".into();
    steps[0].state = s.to_bitstring();
    let v = audit_trace(&t, d);
    assert_eq!(v.len(), 1);
    assert!(v[0].constraint.starts_with("place(apples,cart)"));
}

#[test]
fn unreadable_entries_are_reported() {
    let sc = scenario("hstack/h01.toml");
    let mut t = run_tamper(&sc, 1).trace;
    t.events.insert(
        0,
        Event::ConstraintAsserted {
            epoch: 0,
            when: vec!["no_such_variable".into()],
            forbid: "pick(L,start)".into(),
            reason: "test".into(),
        },
    );
    assert!(!audit_trace(&t, &sc.domain).is_empty());
}

mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tamper_core::behaviors::{behavior_for, BehaviorFailure, BehaviorOutcome, BehaviorReport};
use tamper_core::behaviors::BehaviorEnv;
use tamper_core::belief::Belief;
use tamper_core::scenario::Scenario;
use tamper_core::world::Simulator;

fn run(sc: &Scenario, sim: &mut Simulator, action: &str, seed: u64) -> (BehaviorReport, &'static str) {
    let a = sc.domain.action(sc.domain.find_action(action).unwrap());
    let b = behavior_for(a).unwrap();
    let mut belief = Belief::new(sc).fuse(&sim.sense());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = BehaviorEnv {
        scenario: sc,
        sim,
        belief: &mut belief,
        rng: &mut rng,
        budget_s: 10.0,
        plan_s: 0.0,
        sense_s: 0.0,
    };
    (b.run(a, &mut env), b.name())
}

#[test]
fn wrong_bag_first_costs_one_extra_grasp() {
    let sc = scenario("grocery/g01.toml");
    let mut sim = Simulator::new(&sc, 1);
    let (r, name) = run(&sc, &mut sim, "pick(apples,table)", 1);
    assert_eq!(name, "pick_identity");
    assert!(r.success(), "{:?}", r.outcome);
    assert_eq!(r.grasp_count, 2);
    let held = sim.held_object().unwrap();
    assert_eq!(sc.object(held).unwrap().label(), "apples");
}

#[test]
fn right_bag_first_is_one_grasp() {
    let sc = scenario("grocery/g01.toml");
    let mut sim = Simulator::new(&sc, 1);
    let (r, _) = run(&sc, &mut sim, "pick(eggs,table)", 1);
    assert!(r.success());
    assert_eq!(r.grasp_count, 1);
    assert_eq!(sc.object(sim.held_object().unwrap()).unwrap().label(), "eggs");
}

#[test]
fn hidden_target_is_reported() {
    let sc = scenario("hstack/h01.toml");
    let mut sim = Simulator::new(&sc, 1);
    let before = sim.snapshot();
    let (r, name) = run(&sc, &mut sim, "pick(S,start)", 1);
    assert_eq!(name, "pick");
    assert!(matches!(
        r.outcome,
        BehaviorOutcome::Failure {
            reason: BehaviorFailure::NotDetected,
            ..
        }
    ));
    assert_eq!(r.grasp_count, 0);
    assert_eq!(sim.snapshot(), before);
}

#[test]
fn drawer_opens_and_the_hand_is_free() {
    let sc = scenario("kitchen/k01.toml");
    let mut sim = Simulator::new(&sc, 1);
    let (r, name) = run(&sc, &mut sim, "open_drawer", 1);
    assert_eq!(name, "open_drawer");
    assert!(r.success(), "{:?}", r.outcome);
    let s = sim.snapshot();
    assert!(s.drawer_fraction.unwrap() > 0.9);
    assert!(!s.handle_grasped);
    assert!(s.held.is_none());
    // the contents can now be seen
    assert!(sim.sense().detected.iter().any(|(id, _)| id == "D"));
}

#[test]
fn push_pick_ends_holding_the_plate() {
    let sc = scenario("kitchen/k01.toml");
    for seed in 1..=4 {
        let mut sim = Simulator::new(&sc, seed);
        let (r, name) = run(&sc, &mut sim, "push_pick(P,start)", seed);
        assert_eq!(name, "push_pick");
        assert!(r.success(), "seed {seed}: {:?}", r.outcome);
        assert_eq!(r.grasp_count, 1);
        assert_eq!(sim.held_object(), Some("P"));
    }
}

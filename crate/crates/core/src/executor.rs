//! Planning and execution loops: open-loop TAMP, TAMPER with behaviors and
//! repair, and the greedy replanning baseline.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behaviors::{behavior_for, execute_with_retreat, BehaviorEnv, BehaviorFailure, BehaviorOutcome};
use crate::belief::Belief;
use crate::collision::{ArmChecker, PLANNING_MARGIN};
use crate::domain::{
    apply_unchecked, ActionId, Constraint, GroundingConfidence, Literal, PartialAssignment,
    SymbolicState,
};
use crate::geometry::Polygon;
use crate::grounding::{
    can_ground, failure_constraint, ground, object_literals, occlusion_constraint,
    optimistic_restart, placement_ok, project, target, GroundCtx, Grounded,
};
use crate::kinematics::{max_norm, Config};
use crate::motion::{solve, MotionQuery, CHECK_STEP};
use crate::planner::{plan, ConstraintStack, PlanQuery};
use crate::scenario::Scenario;
use crate::trace::{Event, Method, RunTrace, Status, TraceHeader, TracedStep, TRACE_SCHEMA_VERSION};
use crate::world::{SimError, Simulator, WorldSnapshot};

/// Constraint-stack clears allowed before giving up.
pub const MAX_CLEARS: u32 = 3;
const PLAN_SALT: u64 = 0x7a3b_91c4_0d2e_55f1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub plan_be_s: f64,
    pub plan_ae_s: f64,
    pub sense_ae_s: f64,
    pub exec_s: f64,
    pub grasps: usize,
    pub actions_executed: usize,
    pub behaviors_invoked: usize,
    pub success: bool,
}

impl Metrics {
    pub fn total_s(&self) -> f64 {
        self.plan_be_s + self.plan_ae_s + self.sense_ae_s + self.exec_s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedStep {
    pub action: ActionId,
    pub name: String,
    /// Planned symbolic state before the step.
    pub state: String,
    /// `None` marks a gap left to a behavior.
    pub grounded: Option<Grounded>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialPlan {
    pub steps: Vec<PlannedStep>,
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub status: Status,
    pub metrics: Metrics,
    pub trace: RunTrace,
    pub plans: Vec<PartialPlan>,
    pub final_world: WorldSnapshot,
    pub final_state: SymbolicState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairKind {
    Unchanged,
    JoinStart,
    JoinEnd,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("neither end of the next trajectory can be rejoined")]
pub struct RepairFailure;

/// Rejoins the precomputed `next` step from `current` after a behavior:
/// its start if the body is still valid, else its end.
pub fn repair<R: Rng>(
    scenario: &Scenario,
    belief: &Belief,
    current: Config,
    next: &Grounded,
    budget_s: f64,
    rng: &mut R,
) -> Result<(Grounded, RepairKind), RepairFailure> {
    let Some(body) = next.approach() else {
        return Ok((next.clone(), RepairKind::Unchanged));
    };
    let arm = &scenario.file.arm;
    let scene = belief.scene(scenario);
    let checker = ArmChecker::new(arm, &scene, belief.held_shape(), PLANNING_MARGIN);

    // where a place would actually put the object, given the real grasp
    let placed = |end: &Config| -> Option<Option<crate::geometry::Pose2>> {
        match next {
            Grounded::Place { region, .. } => {
                let h = belief.held.as_ref()?;
                let half = belief.half_extents(&h.id)?;
                let pose = arm.fk(end).compose(&h.rel);
                let poly: Polygon = belief.region_polygon(scenario, region)?;
                let fp = Polygon::rectangle(&pose, half);
                placement_ok(belief, scenario, &scene, &poly, &fp).then_some(Some(pose))
            }
            _ => Some(None),
        }
    };
    let with_approach = |traj: crate::kinematics::Trajectory, pose: Option<crate::geometry::Pose2>| {
        let mut g = next.clone();
        *g.approach_mut().unwrap() = traj;
        if let (Grounded::Place { pose: p, .. }, Some(new)) = (&mut g, pose) {
            *p = new;
        }
        g
    };

    let end = body.end();
    let end_place = placed(&end);
    let body_ok = end_place.is_some()
        && checker.is_valid(&body.start())
        && body
            .waypoints
            .windows(2)
            .all(|w| checker.edge_valid(&w[0], &w[1], CHECK_STEP));
    if body_ok {
        let pose = end_place.unwrap();
        if max_norm(&current, &body.start()) < 1e-9 {
            return Ok((with_approach(body.clone(), pose), RepairKind::Unchanged));
        }
        let q = MotionQuery {
            start: current,
            goals: vec![body.start()],
            checker,
            budget_s,
        };
        if let Ok(bridge) = solve(&q, rng) {
            return Ok((with_approach(bridge.then(body), pose), RepairKind::JoinStart));
        }
    }
    if let Some(pose) = end_place {
        let q = MotionQuery {
            start: current,
            goals: vec![end],
            checker,
            budget_s,
        };
        if let Ok(bridge) = solve(&q, rng) {
            return Ok((with_approach(bridge, pose), RepairKind::JoinEnd));
        }
    }
    Err(RepairFailure)
}

struct Fault {
    op: &'static str,
    error: SimError,
    after_push: bool,
}

struct Episode<'a> {
    scenario: &'a Scenario,
    method: Method,
    sim: Simulator,
    belief: Belief,
    state: SymbolicState,
    constraints: ConstraintStack,
    rng: ChaCha8Rng,
    events: Vec<Event>,
    plans: Vec<PartialPlan>,
    metrics: Metrics,
    executing: bool,
}

impl<'a> Episode<'a> {
    fn new(scenario: &'a Scenario, method: Method, seed: u64) -> Self {
        Self {
            scenario,
            method,
            sim: Simulator::new(scenario, seed),
            belief: Belief::new(scenario),
            state: scenario.init.clone(),
            constraints: ConstraintStack::new(),
            rng: ChaCha8Rng::seed_from_u64(seed ^ PLAN_SALT),
            events: Vec::new(),
            plans: Vec::new(),
            metrics: Metrics::default(),
            executing: false,
        }
    }

    fn domain(&self) -> &crate::domain::Domain {
        &self.scenario.domain
    }

    fn add_plan_time(&mut self, t: Instant) {
        let dt = t.elapsed().as_secs_f64();
        if self.executing {
            self.metrics.plan_ae_s += dt;
        } else {
            self.metrics.plan_be_s += dt;
        }
    }

    fn add_sense_time(&mut self, dt: f64) {
        if self.executing {
            self.metrics.sense_ae_s += dt;
        } else {
            self.metrics.plan_be_s += dt;
        }
    }

    fn budget(&self) -> f64 {
        self.scenario.file.motion_budget_s * self.constraints.budget_multiplier()
    }

    fn sense(&mut self) {
        let t = Instant::now();
        let obs = self.sim.sense();
        self.belief = self.belief.fuse(&obs);
        self.state = self.belief.abstract_state(self.scenario, &self.state);
        self.add_sense_time(t.elapsed().as_secs_f64());
        self.events.push(Event::Sense {
            detected: obs.detected.iter().map(|(id, _)| id.clone()).collect(),
            state: self.state.to_bitstring(),
            belief: self.belief.clone(),
        });
    }

    fn assert(&mut self, c: Constraint, reason: String) -> bool {
        let when = self.domain().assignment_text(&c.state_pred);
        let forbid = self.domain().action(c.forbidden_action).id();
        let new = self.constraints.assert_constraint(c);
        self.events.push(Event::ConstraintAsserted {
            epoch: self.constraints.epoch(),
            when,
            forbid,
            reason,
        });
        new
    }

    fn clear(&mut self) -> bool {
        if self.constraints.clears() >= MAX_CLEARS {
            return false;
        }
        self.constraints.clear();
        self.events.push(Event::ConstraintsCleared {
            epoch: self.constraints.epoch(),
            budget_multiplier: self.constraints.budget_multiplier(),
        });
        true
    }

    fn satisfied(&self, goal: &PartialAssignment) -> bool {
        self.domain().satisfies(&self.state, goal).unwrap_or(false)
    }

    fn full_state_constraint(&self, a: ActionId) -> Constraint {
        Constraint {
            state_pred: PartialAssignment::of_state(&self.state),
            forbidden_action: a,
        }
    }

    /// Task plan plus per-step grounding; grounding failures become constraints
    /// and trigger a replan.
    fn plan_partial(&mut self, goal: &PartialAssignment) -> Option<PartialPlan> {
        let t = Instant::now();
        let out = self.plan_partial_inner(goal);
        self.add_plan_time(t);
        if let Some(p) = &out {
            self.events.push(Event::PlanComputed {
                epoch: self.constraints.epoch(),
                steps: p
                    .steps
                    .iter()
                    .map(|s| TracedStep {
                        action: s.name.clone(),
                        gap: s.grounded.is_none(),
                        state: s.state.clone(),
                        end: s.grounded.as_ref().map(|g| g.end_config(self.sim.robot_config())),
                        duration: s
                            .grounded
                            .as_ref()
                            .and_then(|g| g.approach())
                            .map_or(0.0, |t| t.duration()),
                    })
                    .collect(),
            });
            self.plans.push(p.clone());
        }
        out
    }

    fn plan_partial_inner(&mut self, goal: &PartialAssignment) -> Option<PartialPlan> {
        let scenario = self.scenario;
        let domain = &scenario.domain;
        loop {
            let q = PlanQuery::new(self.state.clone(), goal.clone(), &self.constraints);
            let tp = match plan(domain, &q) {
                Ok(tp) => tp,
                Err(_) => {
                    if self.constraints.is_empty() || !self.clear() {
                        return None;
                    }
                    continue;
                }
            };
            let mut belief = self.belief.clone();
            let mut config = self.sim.robot_config();
            let mut steps = Vec::new();
            let mut failed = None;
            for (i, &a) in tp.steps.iter().enumerate() {
                let action = domain.action(a);
                let s_i = &tp.states[i];
                let gap = match self.method {
                    Method::Baseline => {
                        !can_ground(action, &belief)
                            && action.confidence != GroundingConfidence::GapDynamics
                    }
                    _ => !can_ground(action, &belief),
                };
                if gap && i == 0 && self.method == Method::Tamper && undetected(action, &belief) {
                    // the behavior would start by sensing the current, unchanged scene
                    let c = occlusion_constraint(domain, s_i, a, &belief, scenario);
                    failed = Some((c, "target not detected".to_string()));
                    break;
                }
                if gap {
                    if self.method == Method::Tamper
                        && scenario.has_behavior(&action.name)
                        && behavior_for(action).is_some()
                    {
                        steps.push(PlannedStep {
                            action: a,
                            name: action.id(),
                            state: s_i.to_bitstring(),
                            grounded: None,
                        });
                        (belief, config) = optimistic_restart(action, &belief, scenario);
                        continue;
                    }
                    let lits = object_literals(domain, s_i, action.params.first().map_or("", |p| p));
                    let pred = if lits.is_empty() {
                        PartialAssignment::of_state(s_i)
                    } else {
                        PartialAssignment::new(lits).unwrap_or_else(|_| PartialAssignment::of_state(s_i))
                    };
                    failed = Some((
                        Constraint {
                            state_pred: pred,
                            forbidden_action: a,
                        },
                        "cannot ground".to_string(),
                    ));
                    break;
                }
                let budget = self.budget();
                let ctx = GroundCtx {
                    scenario,
                    belief: &belief,
                    start: config,
                    budget_s: budget,
                };
                match ground(action, &ctx, &mut self.rng) {
                    Ok(g) => {
                        let (b, c) = project(&g, &belief, scenario, config);
                        steps.push(PlannedStep {
                            action: a,
                            name: action.id(),
                            state: s_i.to_bitstring(),
                            grounded: Some(g),
                        });
                        belief = b;
                        config = c;
                    }
                    Err(f) => {
                        let c = failure_constraint(domain, s_i, a, &ctx, &f, &mut self.rng);
                        failed = Some((c, f.to_string()));
                        break;
                    }
                }
            }
            match failed {
                None => return Some(PartialPlan { steps }),
                Some((c, reason)) => {
                    if !self.assert(c, reason) && !self.clear() {
                        return None;
                    }
                }
            }
        }
    }

    fn exec_traj(&mut self, traj: &crate::kinematics::Trajectory, after_push: bool) -> Result<(), Fault> {
        execute_with_retreat(&mut self.sim, traj).map_err(|error| Fault {
            op: "trajectory",
            error,
            after_push,
        })
    }

    fn execute_grounded(&mut self, g: &Grounded) -> Result<(), Fault> {
        match g {
            Grounded::Pick { traj, .. } => {
                self.exec_traj(traj, false)?;
                self.close(false)
            }
            Grounded::Place { traj, .. } => {
                self.exec_traj(traj, false)?;
                self.sim.open_gripper();
                Ok(())
            }
            Grounded::OpenDrawer { approach, pull } => {
                self.exec_traj(approach, false)?;
                self.sim.grasp_handle().map_err(|error| Fault {
                    op: "grasp_handle",
                    error,
                    after_push: false,
                })?;
                let r = self.exec_traj(pull, false);
                let set = self.sim.set_drawer(1.0);
                self.sim.release_handle();
                r?;
                set.map_err(|error| Fault {
                    op: "set_drawer",
                    error,
                    after_push: false,
                })
            }
            Grounded::PushPick {
                object,
                axis,
                approach,
                regrasp,
                ..
            } => {
                self.exec_traj(approach, false)?;
                self.sim.apply_push(object, *axis).map_err(|error| Fault {
                    op: "push",
                    error,
                    after_push: false,
                })?;
                self.exec_traj(regrasp, true)?;
                self.close(true)
            }
            Grounded::Symbolic => Ok(()),
        }
    }

    fn close(&mut self, after_push: bool) -> Result<(), Fault> {
        match self.sim.close_gripper() {
            Ok(_) => {
                self.metrics.grasps += 1;
                Ok(())
            }
            Err(error) => Err(Fault {
                op: "close_gripper",
                error,
                after_push,
            }),
        }
    }

    /// Runs one grounded step; on success advances belief and symbolic state.
    fn step_grounded(&mut self, a: ActionId, g: &Grounded) -> Result<(), Fault> {
        self.executing = true;
        self.metrics.actions_executed += 1;
        let before = self.sim.robot_config();
        let name = self.domain().action(a).id();
        match self.execute_grounded(g) {
            Ok(()) => {
                let (b, _) = project(g, &self.belief, self.scenario, before);
                self.belief = b;
                self.state = apply_unchecked(&self.state, &self.domain().action(a).eff);
                self.events.push(Event::ActionExecuted {
                    action: name,
                    exec_time: self.sim.exec_time(),
                    world: self.sim.snapshot(),
                });
                Ok(())
            }
            Err(f) => {
                self.events.push(Event::ExecutionFault {
                    action: name,
                    op: f.op.to_string(),
                    error: f.error.to_string(),
                    after_push: f.after_push,
                    world: self.sim.snapshot(),
                });
                Err(f)
            }
        }
    }

    fn finish(mut self, status: Status) -> EpisodeResult {
        self.metrics.exec_s = self.sim.exec_time();
        self.metrics.success = status == Status::Success;
        self.events.push(Event::Finished {
            status,
            actions_executed: self.metrics.actions_executed,
            behaviors_invoked: self.metrics.behaviors_invoked,
            grasps: self.metrics.grasps,
            exec_s: self.metrics.exec_s,
        });
        let domain = &self.scenario.domain;
        let header = TraceHeader {
            schema_version: TRACE_SCHEMA_VERSION,
            scenario: self.scenario.name().to_string(),
            seed: 0,
            method: self.method,
            epsilon: self.belief.epsilon,
            variables: domain.variables().names().to_vec(),
            actions: domain.actions().iter().map(|a| a.id()).collect(),
        };
        EpisodeResult {
            status,
            metrics: self.metrics,
            trace: RunTrace {
                header,
                events: self.events,
            },
            plans: self.plans,
            final_world: self.sim.snapshot(),
            final_state: self.state,
        }
    }

    fn cap_reached(&self) -> bool {
        self.metrics.actions_executed >= self.scenario.file.step_cap
    }

    fn run_tamp(mut self) -> EpisodeResult {
        let goal = self.scenario.goal.clone();
        self.sense();
        if self.satisfied(&goal) {
            return self.finish(Status::Success);
        }
        let Some(p) = self.plan_partial(&goal) else {
            return self.finish(Status::NoSolution);
        };
        for s in &p.steps {
            let g = s.grounded.as_ref().expect("tamp plans have no gaps");
            if self.step_grounded(s.action, g).is_err() {
                return self.finish(Status::Failed);
            }
        }
        self.sense();
        let status = if self.satisfied(&goal) {
            Status::Success
        } else {
            Status::Failed
        };
        self.finish(status)
    }

    /// Goal literals about objects the robot has seen, plus object-free ones.
    fn observed_subgoal(&self, goal: &PartialAssignment) -> PartialAssignment {
        let domain = self.domain();
        let lits: Vec<Literal> = goal
            .literals()
            .iter()
            .copied()
            .filter(|l| match domain.meaning(l.var).object() {
                None => true,
                Some(sym) => self
                    .belief
                    .resolve(sym)
                    .is_some_and(|id| self.belief.pose(&id).is_some()),
            })
            .collect();
        PartialAssignment::new(lits).expect("subset of a consistent goal")
    }

    fn run_baseline(mut self) -> EpisodeResult {
        let goal = self.scenario.goal.clone();
        loop {
            self.sense();
            if self.satisfied(&goal) {
                return self.finish(Status::Success);
            }
            if self.cap_reached() {
                return self.finish(Status::Aborted);
            }
            let sub = self.observed_subgoal(&goal);
            if self.satisfied(&sub) {
                return self.finish(Status::NoSolution);
            }
            let Some(p) = self.plan_partial(&sub) else {
                return self.finish(Status::NoSolution);
            };
            for s in &p.steps {
                let g = s.grounded.as_ref().expect("baseline plans have no gaps");
                if self.step_grounded(s.action, g).is_err() {
                    return self.finish(Status::Failed);
                }
            }
        }
    }

    fn run_tamper(mut self) -> EpisodeResult {
        let goal = self.scenario.goal.clone();
        self.sense();
        loop {
            if self.satisfied(&goal) {
                return self.finish(Status::Success);
            }
            if self.cap_reached() {
                return self.finish(Status::Aborted);
            }
            let Some(p) = self.plan_partial(&goal) else {
                return self.finish(Status::NoSolution);
            };
            let mut steps = p.steps;
            let mut replan = false;
            let mut i = 0;
            while i < steps.len() {
                if self.cap_reached() {
                    return self.finish(Status::Aborted);
                }
                let a = steps[i].action;
                match steps[i].grounded.clone() {
                    Some(g) => {
                        if self.step_grounded(a, &g).is_err() {
                            let c = self.full_state_constraint(a);
                            self.assert(c, "execution fault".into());
                            self.sense();
                            replan = true;
                            break;
                        }
                    }
                    None => {
                        let ok = self.run_behavior(a);
                        if !ok.0 {
                            let c = match ok.1 {
                                Some(BehaviorFailure::NotDetected) => occlusion_constraint(
                                    self.domain(),
                                    &self.state,
                                    a,
                                    &self.belief,
                                    self.scenario,
                                ),
                                _ => self.full_state_constraint(a),
                            };
                            self.assert(c, "behavior failed".into());
                            self.sense();
                            replan = true;
                            break;
                        }
                        self.state = apply_unchecked(&self.state, &self.domain().action(a).eff);
                        if let Some(next) = steps.get(i + 1).and_then(|s| s.grounded.clone()) {
                            let t = Instant::now();
                            let budget = self.budget();
                            let r = repair(
                                self.scenario,
                                &self.belief,
                                self.sim.robot_config(),
                                &next,
                                budget,
                                &mut self.rng,
                            );
                            self.add_plan_time(t);
                            let next_name = steps[i + 1].name.clone();
                            match r {
                                Ok((g, kind)) => {
                                    self.events.push(Event::RepairOutcome {
                                        action: next_name,
                                        outcome: format!("{kind:?}"),
                                    });
                                    steps[i + 1].grounded = Some(g);
                                }
                                Err(_) => {
                                    self.events.push(Event::RepairOutcome {
                                        action: next_name,
                                        outcome: "Failed".into(),
                                    });
                                    let c = self.full_state_constraint(steps[i + 1].action);
                                    self.assert(c, "repair failed".into());
                                    self.sense();
                                    replan = true;
                                    break;
                                }
                            }
                        }
                    }
                }
                i += 1;
            }
            if !replan {
                self.sense();
            }
        }
    }

    /// Returns success and, on failure, the reason.
    fn run_behavior(&mut self, a: ActionId) -> (bool, Option<BehaviorFailure>) {
        self.executing = true;
        self.metrics.actions_executed += 1;
        self.metrics.behaviors_invoked += 1;
        let scenario = self.scenario;
        let action = scenario.domain.action(a);
        let name = action.id();
        let behavior = behavior_for(action).expect("gaps only for actions with behaviors");
        self.events.push(Event::BehaviorInvoked {
            action: name.clone(),
            behavior: behavior.name().to_string(),
        });
        let mut env = BehaviorEnv {
            scenario,
            sim: &mut self.sim,
            belief: &mut self.belief,
            rng: &mut self.rng,
            budget_s: scenario.file.behavior_budget_s * self.constraints.budget_multiplier(),
            plan_s: 0.0,
            sense_s: 0.0,
        };
        let report = behavior.run(action, &mut env);
        let (plan_s, sense_s) = (env.plan_s, env.sense_s);
        self.metrics.plan_ae_s += plan_s;
        self.metrics.sense_ae_s += sense_s;
        self.metrics.grasps += report.grasp_count;
        let (success, step, reason) = match &report.outcome {
            BehaviorOutcome::Success => (true, None, None),
            BehaviorOutcome::Failure { step, reason } => (false, Some(*step), Some(reason.clone())),
        };
        self.events.push(Event::BehaviorOutcome {
            action: name,
            behavior: behavior.name().to_string(),
            success,
            step,
            reason: reason.as_ref().map(|r| format!("{r:?}")),
            grasps: report.grasp_count,
            world: self.sim.snapshot(),
        });
        if success {
            // the behavior's last observation already updated the belief
            self.state = self.belief.abstract_state(self.scenario, &self.state);
        }
        (success, reason)
    }
}

fn undetected(action: &crate::domain::Action, belief: &Belief) -> bool {
    action.confidence == GroundingConfidence::GapPerception
        && target(action, belief).and_then(|id| belief.pose(&id)).is_none()
}

pub fn run_episode(scenario: &Scenario, method: Method, seed: u64) -> EpisodeResult {
    let ep = Episode::new(scenario, method, seed);
    let mut r = match method {
        Method::Tamp => ep.run_tamp(),
        Method::Tamper => ep.run_tamper(),
        Method::Baseline => ep.run_baseline(),
    };
    r.trace.header.seed = seed;
    r
}

pub fn run_tamp(scenario: &Scenario, seed: u64) -> EpisodeResult {
    run_episode(scenario, Method::Tamp, seed)
}

pub fn run_tamper(scenario: &Scenario, seed: u64) -> EpisodeResult {
    run_episode(scenario, Method::Tamper, seed)
}

pub fn run_baseline(scenario: &Scenario, seed: u64) -> EpisodeResult {
    run_episode(scenario, Method::Baseline, seed)
}

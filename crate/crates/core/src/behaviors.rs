//! Closed-loop behaviors: sense, plan online, execute, stop at the first
//! failing step.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::collision::{ArmChecker, PLANNING_MARGIN};
use crate::domain::{Action, ActionKind, GroundingConfidence};
use crate::geometry::Pose2;
use crate::grounding::{
    ground_open_drawer, ground_pick, push_choices, GroundCtx, Grounded, GroundingFailure,
};
use crate::kinematics::{l2, Config, Trajectory};
use crate::motion::{solve, MotionQuery};
use crate::scenario::Scenario;
use crate::world::{Observation, SimError, Simulator};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorFailure {
    NotDetected,
    NotDetectedAfterPush,
    NoGrasp,
    MotionFail,
    Collision,
    GraspMiss,
    PushBlocked,
    HandleUnreached,
    AllCandidatesExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BehaviorOutcome {
    Success,
    Failure { step: usize, reason: BehaviorFailure },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorReport {
    pub outcome: BehaviorOutcome,
    pub observations: Vec<Observation>,
    pub trajectories: Vec<Trajectory>,
    /// Gripper attaches.
    pub grasp_count: usize,
}

impl BehaviorReport {
    pub fn success(&self) -> bool {
        self.outcome == BehaviorOutcome::Success
    }
}

/// What a behavior may touch while it runs.
pub struct BehaviorEnv<'a> {
    pub scenario: &'a Scenario,
    pub sim: &'a mut Simulator,
    pub belief: &'a mut Belief,
    pub rng: &'a mut ChaCha8Rng,
    pub budget_s: f64,
    /// Wall-clock seconds spent planning and sensing, for metrics.
    pub plan_s: f64,
    pub sense_s: f64,
}

pub trait Behavior {
    fn name(&self) -> &'static str;
    fn run(&self, action: &Action, env: &mut BehaviorEnv) -> BehaviorReport;
}

pub struct PickBehavior;
pub struct PushPickBehavior;
pub struct OpenDrawerBehavior;
pub struct PickIdentityBehavior;

/// Behavior implementation for an action schema.
pub fn behavior_for(action: &Action) -> Option<Box<dyn Behavior>> {
    match (action.kind, action.confidence) {
        (ActionKind::Pick, GroundingConfidence::GapIdentity) => Some(Box::new(PickIdentityBehavior)),
        (ActionKind::Pick, _) => Some(Box::new(PickBehavior)),
        (ActionKind::PushPick, _) => Some(Box::new(PushPickBehavior)),
        (ActionKind::OpenDrawer, _) => Some(Box::new(OpenDrawerBehavior)),
        _ => None,
    }
}

struct Run<'e, 'a> {
    env: &'e mut BehaviorEnv<'a>,
    report: BehaviorReport,
}

type Step<T> = Result<T, (usize, BehaviorFailure)>;

impl<'e, 'a> Run<'e, 'a> {
    fn new(env: &'e mut BehaviorEnv<'a>) -> Self {
        Run {
            env,
            report: BehaviorReport {
                outcome: BehaviorOutcome::Success,
                observations: Vec::new(),
                trajectories: Vec::new(),
                grasp_count: 0,
            },
        }
    }

    fn finish(mut self, r: Step<()>) -> BehaviorReport {
        if let Err((step, reason)) = r {
            self.report.outcome = BehaviorOutcome::Failure { step, reason };
        }
        self.report
    }

    fn sense(&mut self) -> Observation {
        let t = Instant::now();
        let obs = self.env.sim.sense();
        *self.env.belief = self.env.belief.fuse(&obs);
        self.env.sense_s += t.elapsed().as_secs_f64();
        self.report.observations.push(obs.clone());
        obs
    }

    fn ctx(&self) -> GroundCtx<'_> {
        GroundCtx {
            scenario: self.env.scenario,
            belief: self.env.belief,
            start: self.env.sim.robot_config(),
            budget_s: self.env.budget_s,
        }
    }

    fn plan_pick(&mut self, obj: &str, step: usize) -> Step<Trajectory> {
        let t = Instant::now();
        let env = &mut *self.env;
        let ctx = GroundCtx {
            scenario: env.scenario,
            belief: env.belief,
            start: env.sim.robot_config(),
            budget_s: env.budget_s,
        };
        let r = ground_pick(obj, &ctx, env.rng);
        self.env.plan_s += t.elapsed().as_secs_f64();
        match r {
            Ok(Grounded::Pick { traj, .. }) => Ok(traj),
            Ok(_) => unreachable!(),
            Err(GroundingFailure::Motion(_)) => Err((step + 1, BehaviorFailure::MotionFail)),
            Err(_) => Err((step, BehaviorFailure::NoGrasp)),
        }
    }

    fn plan_motion(&mut self, goals: Vec<Config>, step: usize) -> Step<Trajectory> {
        let t = Instant::now();
        let scene = self.env.belief.scene(self.env.scenario);
        let checker = ArmChecker::new(
            &self.env.scenario.file.arm,
            &scene,
            self.env.belief.held_shape(),
            PLANNING_MARGIN,
        );
        let q = MotionQuery {
            start: self.env.sim.robot_config(),
            goals,
            checker,
            budget_s: self.env.budget_s,
        };
        let r = solve(&q, self.env.rng);
        self.env.plan_s += t.elapsed().as_secs_f64();
        r.map_err(|_| (step, BehaviorFailure::MotionFail))
    }

    fn execute(&mut self, traj: &Trajectory, step: usize) -> Step<()> {
        self.report.trajectories.push(traj.clone());
        match execute_with_retreat(self.env.sim, traj) {
            Ok(()) => Ok(()),
            Err(_) => Err((step, BehaviorFailure::Collision)),
        }
    }

    fn close(&mut self, step: usize) -> Step<String> {
        match self.env.sim.close_gripper() {
            Ok(id) => {
                self.report.grasp_count += 1;
                Ok(id)
            }
            Err(_) => Err((step, BehaviorFailure::GraspMiss)),
        }
    }

    /// Steps 1-4 of a pick on an object the last observation detected.
    fn pick_detected(&mut self, obj: &str, first_step: usize) -> Step<()> {
        let traj = self.plan_pick(obj, first_step)?;
        self.execute(&traj, first_step + 1)?;
        let got = self.close(first_step + 2)?;
        if got != obj {
            return Err((first_step + 2, BehaviorFailure::GraspMiss));
        }
        self.sense();
        Ok(())
    }
}

/// Executes `traj`; on a collision, backs out along the path just travelled.
pub fn execute_with_retreat(sim: &mut Simulator, traj: &Trajectory) -> Result<(), SimError> {
    match sim.execute_trajectory(traj) {
        Ok(_) => Ok(()),
        Err(SimError::CollisionFault { halt, with }) => {
            if let Some(back) = retreat_path(traj, &halt) {
                let _ = sim.execute_trajectory(&back);
            }
            Err(SimError::CollisionFault { halt, with })
        }
        Err(e) => Err(e),
    }
}

/// Reverse of the part of `traj` before `halt`.
pub fn retreat_path(traj: &Trajectory, halt: &Config) -> Option<Trajectory> {
    let w = &traj.waypoints;
    for j in 0..w.len().saturating_sub(1) {
        let (a, b) = (&w[j], &w[j + 1]);
        if (l2(a, halt) + l2(halt, b) - l2(a, b)).abs() < 1e-9 {
            let mut back = vec![*halt];
            back.extend(w[..=j].iter().rev().copied());
            return Some(Trajectory::new(back));
        }
    }
    None
}

fn target_id(action: &Action, belief: &Belief) -> Option<String> {
    belief.resolve(action.params.first()?)
}

impl Behavior for PickBehavior {
    fn name(&self) -> &'static str {
        "pick"
    }

    fn run(&self, action: &Action, env: &mut BehaviorEnv) -> BehaviorReport {
        let mut run = Run::new(env);
        let r = (|| {
            let obs = run.sense();
            let obj = target_id(action, run.env.belief)
                .filter(|id| obs.pose_of(id).is_some())
                .ok_or((1, BehaviorFailure::NotDetected))?;
            run.pick_detected(&obj, 2)
        })();
        run.finish(r)
    }
}

impl Behavior for PushPickBehavior {
    fn name(&self) -> &'static str {
        "push_pick"
    }

    fn run(&self, action: &Action, env: &mut BehaviorEnv) -> BehaviorReport {
        let mut run = Run::new(env);
        let r = (|| {
            let obs = run.sense();
            let obj = target_id(action, run.env.belief)
                .filter(|id| obs.pose_of(id).is_some())
                .ok_or((1, BehaviorFailure::NotDetected))?;
            let t = Instant::now();
            let choices = push_choices(&obj, &run.ctx());
            run.env.plan_s += t.elapsed().as_secs_f64();
            let choice = choices
                .into_iter()
                .next()
                .ok_or((1, BehaviorFailure::PushBlocked))?;
            let approach = run.plan_motion(choice.push_goals.clone(), 1)?;
            run.execute(&approach, 1)?;
            run.env
                .sim
                .apply_push(&obj, choice.axis)
                .map_err(|_| (1, BehaviorFailure::PushBlocked))?;
            let obs = run.sense();
            if obs.pose_of(&obj).is_none() {
                return Err((2, BehaviorFailure::NotDetectedAfterPush));
            }
            let traj = run.plan_pick(&obj, 3)?;
            run.execute(&traj, 4)?;
            let got = run.close(4)?;
            if got != obj {
                return Err((4, BehaviorFailure::GraspMiss));
            }
            run.sense();
            Ok(())
        })();
        run.finish(r)
    }
}

impl Behavior for OpenDrawerBehavior {
    fn name(&self) -> &'static str {
        "open_drawer"
    }

    fn run(&self, _action: &Action, env: &mut BehaviorEnv) -> BehaviorReport {
        let mut run = Run::new(env);
        let r = (|| {
            run.sense();
            let t = Instant::now();
            let env = &mut *run.env;
            let ctx = GroundCtx {
                scenario: env.scenario,
                belief: env.belief,
                start: env.sim.robot_config(),
                budget_s: env.budget_s,
            };
            let g = ground_open_drawer(&ctx, env.rng);
            run.env.plan_s += t.elapsed().as_secs_f64();
            let Ok(Grounded::OpenDrawer { approach, pull }) = g else {
                return Err((1, BehaviorFailure::MotionFail));
            };
            run.execute(&approach, 1)?;
            run.env
                .sim
                .grasp_handle()
                .map_err(|_| (2, BehaviorFailure::HandleUnreached))?;
            run.execute(&pull, 3)?;
            let set = run.env.sim.set_drawer(1.0);
            run.env.sim.release_handle();
            set.map_err(|_| (3, BehaviorFailure::HandleUnreached))?;
            run.sense();
            Ok(())
        })();
        run.finish(r)
    }
}

/// End-effector headings tried when presenting an object to the camera.
const SCAN_HEADINGS: usize = 16;

impl Behavior for PickIdentityBehavior {
    fn name(&self) -> &'static str {
        "pick_identity"
    }

    fn run(&self, action: &Action, env: &mut BehaviorEnv) -> BehaviorReport {
        let mut run = Run::new(env);
        let r = (|| {
            let want = action.params.first().cloned().unwrap_or_default();
            run.sense();
            if let Some(id) = run.env.belief.object_for_symbol(&want).map(str::to_string) {
                if run.env.belief.pose(&id).is_some() {
                    return run.pick_detected(&id, 2);
                }
            }
            let candidates: Vec<String> = run
                .env
                .belief
                .known
                .keys()
                .filter(|id| !run.env.belief.identities.contains_key(*id))
                .cloned()
                .collect();
            let scan = run
                .env
                .scenario
                .file
                .scan
                .ok_or((1, BehaviorFailure::AllCandidatesExhausted))?;
            for c in candidates {
                let Ok(traj) = run.plan_pick(&c, 2) else {
                    continue;
                };
                run.execute(&traj, 3)?;
                run.close(3)?;
                run.sense();
                let arm = &run.env.scenario.file.arm;
                let goals: Vec<Config> = (0..SCAN_HEADINGS)
                    .flat_map(|k| {
                        let th = k as f64 * std::f64::consts::TAU / SCAN_HEADINGS as f64;
                        arm.inverse_kinematics(&Pose2::from_parts(scan.point.0, th), 2)
                    })
                    .collect();
                let to_scan = run.plan_motion(goals, 4)?;
                run.execute(&to_scan, 4)?;
                let label = run
                    .env
                    .sim
                    .reveal_identity()
                    .map_err(|_| (4, BehaviorFailure::MotionFail))?;
                run.sense();
                if label == want {
                    return Ok(());
                }
                // put it back where it was
                let mut back = to_scan.waypoints.clone();
                back.reverse();
                run.execute(&Trajectory::new(back), 5)?;
                run.env.sim.open_gripper();
                run.sense();
            }
            Err((1, BehaviorFailure::AllCandidatesExhausted))
        })();
        run.finish(r)
    }
}

//! From symbolic actions to motion queries: the canGround gate, grasp and
//! placement sampling, drawer pulls, and constraint predicates for failures.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{shrink_region, Belief};
use crate::collision::{ArmChecker, HeldShape, Scene, Source, PLANNING_MARGIN};
use crate::domain::{
    Action, ActionId, ActionKind, Constraint, Domain, GroundingConfidence, Literal,
    PartialAssignment, SymbolicState, VariableMeaning,
};
use crate::geometry::{convex_hull, Polygon, Pose2, Vec2};
use crate::grasp::{axis_grasps, canonical_relative, corridor, push_pose, Grasp, STANDOFF};
use crate::kinematics::{max_norm, Config, Trajectory};
use crate::motion::{solve, MotionError, MotionQuery, CHECK_STEP};
use crate::scenario::Scenario;
use crate::world::shadow_polygon;

pub const PLACE_BATCH: usize = 50;
/// Number of placement batches tried before giving up.
pub const PLACE_BATCHES: usize = 20;
/// Gap kept between a placed footprint and its neighbours (m).
pub const PLACE_CLEARANCE: f64 = 0.01;
pub const IK_SAMPLES: usize = 2;
const PULL_STEPS: usize = 24;
/// Largest joint jump tolerated between consecutive pull waypoints (rad).
const PULL_JUMP: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroundingFailure {
    #[error("pose of {0} is unknown")]
    TargetUnknown(String),
    #[error("{0} is not held")]
    NotHeld(String),
    #[error("no unobstructed grasp on {0}")]
    NoGrasp(String),
    #[error("no placement for {0} in {1}")]
    NoPlacement(String, String),
    #[error("unknown region {0}")]
    UnknownRegion(String),
    #[error("drawer handle unreachable")]
    HandleUnreachable,
    #[error("no push axis for {0}")]
    NoPushAxis(String),
    #[error("scenario has no drawer")]
    NoDrawer,
    #[error("motion: {0}")]
    Motion(#[from] MotionError),
}

/// Geometric payload of a grounded action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Grounded {
    Pick {
        object: String,
        traj: Trajectory,
        rel: Pose2,
    },
    Place {
        object: String,
        region: String,
        traj: Trajectory,
        pose: Pose2,
    },
    OpenDrawer {
        approach: Trajectory,
        pull: Trajectory,
    },
    /// Open-loop push then grasp at the predicted pose.
    PushPick {
        object: String,
        axis: Vec2,
        approach: Trajectory,
        predicted: Pose2,
        regrasp: Trajectory,
        rel: Pose2,
    },
    Symbolic,
}

impl Grounded {
    /// The motion that starts the action; Repair rejoins this one.
    pub fn approach(&self) -> Option<&Trajectory> {
        match self {
            Grounded::Pick { traj, .. } | Grounded::Place { traj, .. } => Some(traj),
            Grounded::OpenDrawer { approach, .. } | Grounded::PushPick { approach, .. } => {
                Some(approach)
            }
            Grounded::Symbolic => None,
        }
    }

    pub fn approach_mut(&mut self) -> Option<&mut Trajectory> {
        match self {
            Grounded::Pick { traj, .. } | Grounded::Place { traj, .. } => Some(traj),
            Grounded::OpenDrawer { approach, .. } | Grounded::PushPick { approach, .. } => {
                Some(approach)
            }
            Grounded::Symbolic => None,
        }
    }

    pub fn end_config(&self, start: Config) -> Config {
        match self {
            Grounded::Pick { traj, .. } | Grounded::Place { traj, .. } => traj.end(),
            Grounded::OpenDrawer { pull, .. } => pull.end(),
            Grounded::PushPick { regrasp, .. } => regrasp.end(),
            Grounded::Symbolic => start,
        }
    }
}

pub struct GroundCtx<'a> {
    pub scenario: &'a Scenario,
    pub belief: &'a Belief,
    pub start: Config,
    pub budget_s: f64,
}

impl<'a> GroundCtx<'a> {
    fn with_belief<'b>(&self, belief: &'b Belief) -> GroundCtx<'b>
    where
        'a: 'b,
    {
        GroundCtx {
            scenario: self.scenario,
            belief,
            start: self.start,
            budget_s: self.budget_s,
        }
    }
}

/// Object an action is about.
pub fn target(action: &Action, belief: &Belief) -> Option<String> {
    match action.kind {
        ActionKind::Pick | ActionKind::Place | ActionKind::PushPick => {
            belief.resolve(action.params.first()?)
        }
        _ => None,
    }
}

pub fn can_ground(action: &Action, belief: &Belief) -> bool {
    match action.confidence {
        GroundingConfidence::Reliable => true,
        GroundingConfidence::GapDynamics => false,
        GroundingConfidence::GapPerception => {
            target(action, belief).is_some_and(|id| belief.pose(&id).is_some())
        }
        GroundingConfidence::GapIdentity => action
            .params
            .first()
            .and_then(|sym| belief.object_for_symbol(sym))
            .is_some_and(|id| belief.pose(id).is_some()),
    }
}

/// Grounds `action` ignoring its confidence. Push-pick becomes an open-loop
/// push followed by a grasp at the nominal outcome.
pub fn ground<R: Rng>(action: &Action, ctx: &GroundCtx, rng: &mut R) -> Result<Grounded, GroundingFailure> {
    let obj = || {
        target(action, ctx.belief)
            .ok_or_else(|| GroundingFailure::TargetUnknown(action.params.first().cloned().unwrap_or_default()))
    };
    match action.kind {
        ActionKind::Pick => ground_pick(&obj()?, ctx, rng),
        ActionKind::Place => {
            let region = action
                .params
                .get(1)
                .ok_or_else(|| GroundingFailure::UnknownRegion(String::new()))?;
            ground_place(&obj()?, region, ctx, rng)
        }
        ActionKind::OpenDrawer => ground_open_drawer(ctx, rng),
        ActionKind::PushPick => ground_push_pick(&obj()?, ctx, rng),
        ActionKind::Abstract => Ok(Grounded::Symbolic),
    }
}

fn checker<'a>(ctx: &'a GroundCtx, scene: &'a Scene, held: Option<HeldShape>) -> ArmChecker<'a> {
    ArmChecker::new(&ctx.scenario.file.arm, scene, held, PLANNING_MARGIN)
}

/// Statics plus known objects with a larger footprint than `obj`.
fn corridor_blockers(belief: &Belief, scenario: &Scenario, obj: &str) -> Scene {
    let own = belief
        .half_extents(obj)
        .map(|h| h.x * h.y)
        .unwrap_or(0.0);
    let mut s = Scene::default();
    for b in &scenario.file.statics {
        s.push(b.polygon(), Source::Static(b.name.clone()));
    }
    for (id, _) in &belief.known {
        if id == obj || belief.is_held(id) {
            continue;
        }
        let h = belief.half_extents(id).unwrap_or(Vec2::ZERO);
        if h.x * h.y > own {
            if let Some(f) = belief.footprint(id) {
                s.push(f, Source::Object(id.clone()));
            }
        }
    }
    s
}

/// Axis grasps on `pose` that fit the gripper and have a clear approach corridor.
pub fn open_grasps(belief: &Belief, scenario: &Scenario, obj: &str, pose: &Pose2) -> Vec<Grasp> {
    let arm = &scenario.file.arm;
    let Some(half) = belief.half_extents(obj) else {
        return Vec::new();
    };
    let blockers = corridor_blockers(belief, scenario, obj);
    axis_grasps(pose, half, STANDOFF)
        .into_iter()
        .filter(|g| g.width <= arm.max_opening)
        .filter(|g| {
            blockers
                .polygon_contact(&corridor(pose, g, arm.palm_half_width), 0.0)
                .is_none()
        })
        .collect()
}

fn grasp_goals(ctx: &GroundCtx, scene: &Scene, grasps: &[Grasp]) -> Vec<(Config, usize)> {
    let arm = &ctx.scenario.file.arm;
    let c = checker(ctx, scene, None);
    let mut goals = Vec::new();
    for (k, g) in grasps.iter().enumerate() {
        for q in arm.inverse_kinematics(&g.ee, IK_SAMPLES) {
            if c.is_valid(&q) {
                goals.push((q, k));
            }
        }
    }
    goals
}

fn plan_to<R: Rng, T: Clone>(
    ctx: &GroundCtx,
    checker: ArmChecker,
    start: Config,
    goals: &[(Config, T)],
    rng: &mut R,
) -> Result<(Trajectory, T), MotionError> {
    let q = MotionQuery {
        start,
        goals: goals.iter().map(|g| g.0).collect(),
        checker,
        budget_s: ctx.budget_s,
    };
    let traj = solve(&q, rng)?;
    let end = traj.end();
    let tag = goals
        .iter()
        .find(|g| max_norm(&g.0, &end) < 1e-9)
        .map(|g| g.1.clone())
        .expect("trajectory ends at a goal");
    Ok((traj, tag))
}

pub fn ground_pick<R: Rng>(obj: &str, ctx: &GroundCtx, rng: &mut R) -> Result<Grounded, GroundingFailure> {
    let pose = ctx
        .belief
        .pose(obj)
        .ok_or_else(|| GroundingFailure::TargetUnknown(obj.to_string()))?;
    let grasps = open_grasps(ctx.belief, ctx.scenario, obj, &pose);
    let scene = ctx.belief.scene(ctx.scenario);
    let goals = grasp_goals(ctx, &scene, &grasps);
    if goals.is_empty() {
        return Err(GroundingFailure::NoGrasp(obj.to_string()));
    }
    let (traj, k) = plan_to(ctx, checker(ctx, &scene, None), ctx.start, &goals, rng)?;
    Ok(Grounded::Pick {
        object: obj.to_string(),
        rel: grasps[k].relative(&pose),
        traj,
    })
}

/// Placement region polygon and the object headings allowed in it.
fn region_of(ctx: &GroundCtx, region: &str) -> Option<(Polygon, Vec<f64>)> {
    let poly = ctx.belief.region_polygon(ctx.scenario, region)?;
    let yaws = match ctx.scenario.region(region) {
        Some(r) => r.yaw_choices(),
        None => {
            let d = ctx.scenario.file.drawer.as_ref()?;
            (0..4)
                .map(|k| d.pose.0.theta + k as f64 * std::f64::consts::FRAC_PI_2)
                .collect()
        }
    };
    Some((poly, yaws))
}

/// Rejects placements whose footprint touches anything, or whose shadow would
/// overlap an existing occlusion region.
pub fn placement_ok(belief: &Belief, scenario: &Scenario, scene: &Scene, region: &Polygon, fp: &Polygon) -> bool {
    if !fp.vertices.iter().all(|v| region.contains(*v)) {
        return false;
    }
    if scene.polygon_contact(fp, PLACE_CLEARANCE).is_some() {
        return false;
    }
    if belief.unknown.is_empty() {
        return true;
    }
    let cam = scenario.file.camera.position.0;
    let ws = scenario.workspace().to_polygon();
    let Some(shadow) = shadow_polygon(cam, fp, &ws) else {
        return true;
    };
    let Ok(shrunk) = shrink_region(&shadow, belief.epsilon) else {
        return true;
    };
    if shrunk.area() <= crate::geometry::DEGENERATE_AREA {
        return true;
    }
    let held = belief.held.as_ref().map(|h| h.id.as_str());
    !belief
        .regions
        .iter()
        .filter(|r| Some(r.occluder.as_str()) != held && belief.pose(&r.occluder) == r.cast_from)
        .filter_map(|r| r.region.as_ref())
        .any(|r| r.intersects(&shrunk))
}

pub fn ground_place<R: Rng>(
    obj: &str,
    region: &str,
    ctx: &GroundCtx,
    rng: &mut R,
) -> Result<Grounded, GroundingFailure> {
    let held = ctx
        .belief
        .held
        .as_ref()
        .filter(|h| h.id == obj)
        .ok_or_else(|| GroundingFailure::NotHeld(obj.to_string()))?;
    let shape = ctx.belief.held_shape().expect("held object in catalog");
    let (poly, yaws) =
        region_of(ctx, region).ok_or_else(|| GroundingFailure::UnknownRegion(region.to_string()))?;
    let arm = &ctx.scenario.file.arm;
    let scene = ctx.belief.scene(ctx.scenario);
    let c = checker(ctx, &scene, Some(shape));
    let inv = held.rel.inverse();
    let b = poly.bounds();
    for _ in 0..PLACE_BATCHES {
        let mut goals = Vec::new();
        for _ in 0..PLACE_BATCH {
            let x = rng.random_range(b.min.x..=b.max.x);
            let y = rng.random_range(b.min.y..=b.max.y);
            let yaw = yaws[rng.random_range(0..yaws.len())];
            let pose = Pose2::new(x, y, yaw);
            let fp = Polygon::rectangle(&pose, shape.half_extents);
            if !placement_ok(ctx.belief, ctx.scenario, &scene, &poly, &fp) {
                continue;
            }
            let ee = pose.compose(&inv);
            for q in arm.inverse_kinematics(&ee, IK_SAMPLES) {
                if c.is_valid(&q) {
                    goals.push((q, pose));
                }
            }
        }
        if !goals.is_empty() {
            let (traj, pose) = plan_to(ctx, c, ctx.start, &goals, rng)?;
            return Ok(Grounded::Place {
                object: obj.to_string(),
                region: region.to_string(),
                traj,
                pose,
            });
        }
    }
    Err(GroundingFailure::NoPlacement(obj.to_string(), region.to_string()))
}

/// Joint path that keeps the gripper on the handle while the drawer slides
/// from `from` to fully open, following the elbow branch of `q0`.
pub fn pull_path(ctx: &GroundCtx, scene: &Scene, q0: Config, from: f64) -> Option<Trajectory> {
    let d = ctx.scenario.file.drawer.as_ref()?;
    let arm = &ctx.scenario.file.arm;
    let c = checker(ctx, scene, None);
    let mut path = vec![q0];
    for k in 1..=PULL_STEPS {
        let f = from + (1.0 - from) * k as f64 / PULL_STEPS as f64;
        let prev = *path.last().unwrap();
        let next = arm
            .inverse_kinematics(&d.handle_pose(f), IK_SAMPLES)
            .into_iter()
            .min_by(|a, b| max_norm(a, &prev).total_cmp(&max_norm(b, &prev)))?;
        if max_norm(&next, &prev) > PULL_JUMP || !c.edge_valid(&prev, &next, CHECK_STEP) {
            return None;
        }
        path.push(next);
    }
    Some(Trajectory::new(path).densified(CHECK_STEP))
}

pub fn ground_open_drawer<R: Rng>(ctx: &GroundCtx, rng: &mut R) -> Result<Grounded, GroundingFailure> {
    let d = ctx.scenario.file.drawer.as_ref().ok_or(GroundingFailure::NoDrawer)?;
    let arm = &ctx.scenario.file.arm;
    let f0 = ctx.belief.drawer_fraction.unwrap_or(0.0);
    let scene = ctx.belief.scene(ctx.scenario);
    let c = checker(ctx, &scene, None);
    let mut goals = Vec::new();
    for q in arm.inverse_kinematics(&d.handle_pose(f0), IK_SAMPLES) {
        if c.is_valid(&q) {
            if let Some(pull) = pull_path(ctx, &scene, q, f0) {
                goals.push((q, pull));
            }
        }
    }
    if goals.is_empty() {
        return Err(GroundingFailure::HandleUnreachable);
    }
    let (approach, pull) = plan_to(ctx, c, ctx.start, &goals, rng)?;
    Ok(Grounded::OpenDrawer { approach, pull })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushChoice {
    pub axis: Vec2,
    pub predicted: Pose2,
    pub push_goals: Vec<Config>,
}

/// Push directions along the object axes whose sweep is clear, whose push pose
/// is reachable, and whose nominal outcome can be grasped. Best clearance first.
pub fn push_choices(obj: &str, ctx: &GroundCtx) -> Vec<PushChoice> {
    let (Some(pose), Some(half)) = (ctx.belief.pose(obj), ctx.belief.half_extents(obj)) else {
        return Vec::new();
    };
    let arm = &ctx.scenario.file.arm;
    let d = ctx.scenario.file.push.nominal_distance;
    let scene = ctx.belief.scene(ctx.scenario);
    let others = scene.without_owner(obj);
    let c = checker(ctx, &scene, None);
    let statics = scene.statics_only();
    let mut out: Vec<(f64, PushChoice)> = Vec::new();
    for k in 0..4 {
        let axis = Vec2::from_angle(pose.theta + k as f64 * std::f64::consts::FRAC_PI_2);
        let predicted = Pose2::new(pose.x + axis.x * d, pose.y + axis.y * d, pose.theta);
        let start_fp = Polygon::rectangle(&pose, half);
        let end_fp = Polygon::rectangle(&predicted, half);
        let mut pts = start_fp.vertices.clone();
        pts.extend(end_fp.vertices.iter().copied());
        if others.polygon_contact(&convex_hull(&pts), 0.0).is_some() {
            continue;
        }
        let target = push_pose(&pose, half, axis, STANDOFF);
        let push_goals: Vec<Config> = arm
            .inverse_kinematics(&target, IK_SAMPLES)
            .into_iter()
            .filter(|q| c.is_valid(q))
            .collect();
        if push_goals.is_empty() {
            continue;
        }
        let mut moved = ctx.belief.clone();
        moved.assume_pose(obj, predicted);
        if open_grasps(&moved, ctx.scenario, obj, &predicted).is_empty() {
            continue;
        }
        let clearance = statics
            .obstacles
            .iter()
            .map(|o| o.polygon.distance_to_polygon(&end_fp))
            .fold(f64::INFINITY, f64::min);
        out.push((
            clearance,
            PushChoice {
                axis,
                predicted,
                push_goals,
            },
        ));
    }
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out.into_iter().map(|(_, c)| c).collect()
}

pub fn ground_push_pick<R: Rng>(obj: &str, ctx: &GroundCtx, rng: &mut R) -> Result<Grounded, GroundingFailure> {
    let choice = push_choices(obj, ctx)
        .into_iter()
        .next()
        .ok_or_else(|| GroundingFailure::NoPushAxis(obj.to_string()))?;
    let scene = ctx.belief.scene(ctx.scenario);
    let goals: Vec<(Config, ())> = choice.push_goals.iter().map(|q| (*q, ())).collect();
    let (approach, ()) = plan_to(ctx, checker(ctx, &scene, None), ctx.start, &goals, rng)?;
    let mut moved = ctx.belief.clone();
    moved.assume_pose(obj, choice.predicted);
    // the push swept through its own shadow
    moved.regions.retain(|r| r.occluder != obj);
    let after = GroundCtx {
        start: approach.end(),
        ..ctx.with_belief(&moved)
    };
    match ground_pick(obj, &after, rng)? {
        Grounded::Pick { traj, rel, .. } => Ok(Grounded::PushPick {
            object: obj.to_string(),
            axis: choice.axis,
            approach,
            predicted: choice.predicted,
            regrasp: traj,
            rel,
        }),
        _ => unreachable!(),
    }
}

/// Belief and configuration expected after a grounded action executes as planned.
pub fn project(g: &Grounded, belief: &Belief, scenario: &Scenario, start: Config) -> (Belief, Config) {
    let arm = &scenario.file.arm;
    let mut b = belief.clone();
    let end = g.end_config(start);
    match g {
        Grounded::Pick { object, rel, .. } => b.assume_grasp(object, *rel, arm.fk(&end)),
        Grounded::Place { .. } => b.assume_release(arm.fk(&end)),
        Grounded::OpenDrawer { .. } => b.drawer_fraction = Some(1.0),
        Grounded::PushPick {
            object,
            predicted,
            rel,
            ..
        } => {
            b.assume_pose(object, *predicted);
            b.regions.retain(|r| &r.occluder != object);
            b.assume_grasp(object, *rel, arm.fk(&end));
        }
        Grounded::Symbolic => {}
    }
    (b, end)
}

/// Assumed start of the next plan step after a gap: arm at home, the gapped
/// action's effect taken for granted.
pub fn optimistic_restart(action: &Action, belief: &Belief, scenario: &Scenario) -> (Belief, Config) {
    let arm = &scenario.file.arm;
    let home = arm.home;
    let mut b = belief.clone();
    match action.kind {
        ActionKind::Pick | ActionKind::PushPick => {
            let sym = action.params.first().cloned().unwrap_or_default();
            let id = target(action, belief).or_else(|| {
                // any unidentified candidate stands in for the object
                b.catalog
                    .iter()
                    .find(|c| !b.identities.contains_key(&c.id) && b.pose(&c.id).is_some())
                    .map(|c| c.id.clone())
            });
            if let Some(id) = id {
                if action.confidence == GroundingConfidence::GapIdentity {
                    b.identities.insert(id.clone(), sym);
                }
                if let Some(rel) = b
                    .half_extents(&id)
                    .and_then(|h| canonical_relative(h, arm.max_opening, STANDOFF))
                {
                    b.regions.retain(|r| r.occluder != id);
                    b.assume_grasp(&id, rel, arm.fk(&home));
                }
            }
        }
        ActionKind::Place => {
            if let Some(h) = b.held.take() {
                b.known.remove(&h.id);
                b.unknown.insert(h.id);
            }
        }
        ActionKind::OpenDrawer => b.drawer_fraction = Some(1.0),
        ActionKind::Abstract => {}
    }
    (b, home)
}

/// True literals in `s` that mention task symbol `sym`.
pub fn object_literals(domain: &Domain, s: &SymbolicState, sym: &str) -> Vec<Literal> {
    (0..domain.width())
        .filter(|&v| s.get(v))
        .filter(|&v| match domain.meaning(v) {
            VariableMeaning::At { object, .. } | VariableMeaning::Holding { object } => object == sym,
            _ => false,
        })
        .map(|v| Literal::new(v, true))
        .collect()
}

fn pred_or_state(s: &SymbolicState, lits: Vec<Literal>) -> PartialAssignment {
    if lits.is_empty() {
        PartialAssignment::of_state(s)
    } else {
        PartialAssignment::new(lits).unwrap_or_else(|_| PartialAssignment::of_state(s))
    }
}

/// Constraint for a grounding failure of `a` in state `s`: the action is
/// forbidden while the objects that block it stay where they are.
pub fn failure_constraint<R: Rng>(
    domain: &Domain,
    s: &SymbolicState,
    a: ActionId,
    ctx: &GroundCtx,
    failure: &GroundingFailure,
    rng: &mut R,
) -> Constraint {
    let action = domain.action(a);
    let own_sym = action.params.first().cloned().unwrap_or_default();
    let own = || object_literals(domain, s, &own_sym);
    let geometric = !matches!(
        failure,
        GroundingFailure::TargetUnknown(_)
            | GroundingFailure::NotHeld(_)
            | GroundingFailure::UnknownRegion(_)
            | GroundingFailure::NoDrawer
    );
    let pred = if !geometric {
        pred_or_state(s, own())
    } else {
        let me = target(action, ctx.belief);
        let others: Vec<String> = ctx
            .belief
            .known
            .keys()
            .filter(|id| Some(*id) != me.as_ref() && !ctx.belief.is_held(id))
            .cloned()
            .collect();
        let mut lits = Vec::new();
        let mut any = false;
        for o in &others {
            let b = ctx.belief.without(o);
            if ground(action, &ctx.with_belief(&b), rng).is_ok() {
                any = true;
                if let Some(sym) = ctx.belief.symbol(o) {
                    lits.extend(object_literals(domain, s, sym));
                }
            }
        }
        if any {
            lits.sort();
            lits.dedup();
            pred_or_state(s, lits)
        } else {
            let mut b = ctx.belief.clone();
            for o in &others {
                b = b.without(o);
            }
            if others.is_empty() || ground(action, &ctx.with_belief(&b), rng).is_err() {
                pred_or_state(s, own())
            } else {
                PartialAssignment::of_state(s)
            }
        }
    };
    Constraint {
        state_pred: pred,
        forbidden_action: a,
    }
}

/// Constraint for a target that could not be seen: forbidden while the
/// objects whose shadows cover its region stay put.
pub fn occlusion_constraint(
    domain: &Domain,
    s: &SymbolicState,
    a: ActionId,
    belief: &Belief,
    scenario: &Scenario,
) -> Constraint {
    let action = domain.action(a);
    let region = action
        .params
        .get(1)
        .and_then(|r| belief.region_polygon(scenario, r));
    let mut lits = Vec::new();
    if let Some(region) = region {
        for r in &belief.regions {
            if r.shadow.intersects(&region) {
                if let Some(sym) = belief.symbol(&r.occluder) {
                    lits.extend(object_literals(domain, s, sym));
                }
            }
        }
        // hidden inside a closed fixture
        if let Some(d) = &scenario.file.drawer {
            if belief.hidden.iter().any(|h| h.intersects(&region)) {
                if let Ok(l) = domain.parse_literal(&format!("open({})", d.name)) {
                    if !s.get(l.var) {
                        lits.push(Literal::new(l.var, false));
                    }
                }
            }
        }
    }
    if lits.is_empty() {
        lits = object_literals(domain, s, action.params.first().map(String::as_str).unwrap_or(""));
    }
    lits.sort();
    lits.dedup();
    Constraint {
        state_pred: pred_or_state(s, lits),
        forbidden_action: a,
    }
}

//! Ground-truth tabletop simulator.
//!
//! The world state is private. Planning code interacts with it only through
//! the operations below, plus proprioception (joint angles, gripper
//! contents) and a read-only snapshot meant for logging.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collision::{ArmChecker, HeldShape, Scene, Source};
use crate::geometry::{angle_diff, convex_hull, wrap_angle, Aabb, Polygon, Pose2, Vec2};
use crate::grasp::{axis_grasps, push_pose, STANDOFF};
use crate::kinematics::{interpolate, l2, max_norm, ArmSpec, Config, Trajectory, JOINT_SPEED};
use crate::scenario::{CameraSpec, DrawerSpec, PushSpec, Scenario, ScanSpec, DRAWER_OPEN_THRESHOLD};

pub const START_TOLERANCE: f64 = 1e-6;
/// Resolution of execution-time collision checking (rad, max-norm).
pub const EXEC_STEP: f64 = 1e-3;
pub const GRASP_POSITION_TOLERANCE: f64 = 0.005;
pub const GRASP_ANGLE_TOLERANCE: f64 = 0.02;
pub const PUSH_POSITION_TOLERANCE: f64 = 0.01;
pub const PUSH_ANGLE_TOLERANCE: f64 = 0.05;
/// Speed of the pushing stroke, used only for execution time (m/s).
pub const PUSH_SPEED: f64 = 0.1;
const SHADOW_FAR: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("trajectory starts {distance:.2e} rad away from the robot configuration")]
    StartMismatch { distance: f64 },
    #[error("collision with {with} at {halt:?}")]
    CollisionFault { halt: Config, with: String },
    #[error("push blocked by {by}")]
    PushBlocked { by: String },
    #[error("end effector is not at the pushing face of {object}")]
    NotAtPushFace { object: String },
    #[error("object {0} is held")]
    ObjectHeld(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("gripper is not at the drawer handle")]
    HandleUnreached,
    #[error("scenario has no drawer")]
    NoDrawer,
    #[error("gripper closed on nothing")]
    GraspMiss,
    #[error("gripper is already holding something")]
    GripperOccupied,
    #[error("gripper is empty")]
    GripperEmpty,
    #[error("held object is not at the scan point")]
    NotAtScanPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectSnapshot {
    pub id: String,
    pub label: String,
    pub pose: Pose2,
    pub half_extents: Vec2,
    pub identity_visible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub robot: Config,
    pub held: Option<String>,
    pub handle_grasped: bool,
    pub drawer_fraction: Option<f64>,
    pub objects: Vec<ObjectSnapshot>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shadow {
    pub occluder: String,
    pub polygon: Polygon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub detected: Vec<(String, Pose2)>,
    pub identities: Vec<(String, String)>,
    pub shadows: Vec<Shadow>,
    pub held: Option<String>,
    pub drawer_fraction: Option<f64>,
    pub camera: Vec2,
    pub fov: [f64; 2],
    /// Proprioceptive end-effector pose.
    pub ee: Pose2,
    /// Areas the camera cannot see into regardless of line of sight.
    pub hidden: Vec<Polygon>,
}

impl Observation {
    pub fn pose_of(&self, id: &str) -> Option<Pose2> {
        self.detected.iter().find(|(i, _)| i == id).map(|(_, p)| *p)
    }

    /// True iff `p` is in the field of view and outside every shadow and hidden area.
    pub fn sees_point(&self, p: Vec2) -> bool {
        in_fov(self.camera, self.fov, p)
            && !self.shadows.iter().any(|s| s.polygon.contains(p))
            && !self.hidden.iter().any(|h| h.contains(p))
    }
}

#[derive(Clone, Debug)]
struct Body {
    id: String,
    label: String,
    pose: Pose2,
    half: Vec2,
    identity_visible: bool,
}

#[derive(Clone, Debug)]
struct Held {
    index: usize,
    rel: Pose2,
}

#[derive(Clone, Debug)]
struct WorldState {
    robot: Config,
    held: Option<Held>,
    handle_grasped: bool,
    drawer_fraction: f64,
    contents: Vec<usize>,
    objects: Vec<Body>,
}

#[derive(Clone, Debug)]
pub struct Simulator {
    state: WorldState,
    arm: ArmSpec,
    statics: Vec<(String, Polygon)>,
    drawer: Option<DrawerSpec>,
    camera: CameraSpec,
    workspace: Aabb,
    push: PushSpec,
    scan: Option<ScanSpec>,
    rng: ChaCha8Rng,
    exec_time: f64,
}

impl Simulator {
    pub fn new(scenario: &Scenario, seed: u64) -> Self {
        let f = &scenario.file;
        let objects: Vec<Body> = f
            .objects
            .iter()
            .map(|o| Body {
                id: o.id.clone(),
                label: o.label().to_string(),
                pose: o.pose.0,
                half: o.half_extents.0,
                identity_visible: !o.identity_hidden,
            })
            .collect();
        let contents = f
            .drawer
            .as_ref()
            .map(|d| {
                d.contents
                    .iter()
                    .filter_map(|c| objects.iter().position(|o| &o.id == c))
                    .collect()
            })
            .unwrap_or_default();
        Self {
            state: WorldState {
                robot: f.arm.home,
                held: None,
                handle_grasped: false,
                drawer_fraction: f.drawer.as_ref().map_or(0.0, |d| d.open_fraction),
                contents,
                objects,
            },
            arm: f.arm.clone(),
            statics: f
                .statics
                .iter()
                .map(|s| (s.name.clone(), s.polygon()))
                .collect(),
            drawer: f.drawer.clone(),
            camera: f.camera.clone(),
            workspace: scenario.workspace(),
            push: f.push,
            scan: f.scan,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_5157),
            exec_time: 0.0,
        }
    }

    pub fn robot_config(&self) -> Config {
        self.state.robot
    }

    pub fn held_object(&self) -> Option<&str> {
        self.state
            .held
            .as_ref()
            .map(|h| self.state.objects[h.index].id.as_str())
    }

    pub fn handle_grasped(&self) -> bool {
        self.state.handle_grasped
    }

    /// Simulated execution time accumulated so far (s).
    pub fn exec_time(&self) -> f64 {
        self.exec_time
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        WorldSnapshot {
            robot: self.state.robot,
            held: self.held_object().map(str::to_string),
            handle_grasped: self.state.handle_grasped,
            drawer_fraction: self.drawer.as_ref().map(|_| self.state.drawer_fraction),
            objects: self
                .state
                .objects
                .iter()
                .map(|o| ObjectSnapshot {
                    id: o.id.clone(),
                    label: o.label.clone(),
                    pose: o.pose,
                    half_extents: o.half,
                    identity_visible: o.identity_visible,
                })
                .collect(),
        }
    }

    fn drawer_closed(&self) -> bool {
        self.drawer.is_some() && self.state.drawer_fraction <= DRAWER_OPEN_THRESHOLD
    }

    fn hidden_in_drawer(&self, i: usize) -> bool {
        self.drawer_closed() && self.state.contents.contains(&i)
    }

    fn held_index(&self) -> Option<usize> {
        self.state.held.as_ref().map(|h| h.index)
    }

    fn scene(&self, skip_contents: bool) -> Scene {
        let mut scene = Scene::default();
        for (name, p) in &self.statics {
            scene.push(p.clone(), Source::Static(name.clone()));
        }
        for (i, o) in self.state.objects.iter().enumerate() {
            // a closed drawer shields its contents
            if Some(i) == self.held_index()
                || self.hidden_in_drawer(i)
                || (skip_contents && self.state.contents.contains(&i))
            {
                continue;
            }
            scene.push(Polygon::rectangle(&o.pose, o.half), Source::Object(o.id.clone()));
        }
        scene
    }

    fn held_shape(&self) -> Option<HeldShape> {
        self.state.held.as_ref().map(|h| HeldShape {
            rel: h.rel,
            half_extents: self.state.objects[h.index].half,
        })
    }

    fn sync_held(&mut self) {
        if let Some(h) = &self.state.held {
            let ee = self.arm.fk(&self.state.robot);
            self.state.objects[h.index].pose = ee.compose(&h.rel);
        }
    }

    fn move_drawer_to(&mut self, fraction: f64) {
        let Some(d) = &self.drawer else { return };
        let shift = d.axis() * (d.travel * (fraction - self.state.drawer_fraction));
        for &i in &self.state.contents {
            let p = &mut self.state.objects[i].pose;
            p.x += shift.x;
            p.y += shift.y;
        }
        self.state.drawer_fraction = fraction;
    }

    fn drag_fraction(&self, q: &Config) -> f64 {
        let d = self.drawer.as_ref().unwrap();
        let ee = self.arm.fk(q).position();
        ((ee - d.handle_point(0.0)).dot(d.axis()) / d.travel).clamp(0.0, 1.0)
    }

    /// Moves the arm along `traj`, halting at the first configuration in contact.
    pub fn execute_trajectory(&mut self, traj: &Trajectory) -> Result<f64, SimError> {
        let distance = max_norm(&traj.start(), &self.state.robot);
        if distance > START_TOLERANCE {
            return Err(SimError::StartMismatch { distance });
        }
        let dragging = self.state.handle_grasped && self.drawer.is_some();
        let scene = self.scene(dragging);
        let held = self.held_shape();
        let checker = ArmChecker::new(&self.arm, &scene, held, 0.0);
        let mut prev = self.state.robot;
        let mut travelled = 0.0;
        let mut fault = None;
        'outer: for w in traj.waypoints.windows(2) {
            for q in interpolate(&w[0], &w[1], EXEC_STEP).skip(1) {
                let hit = if !self.arm.within_limits(&q) {
                    Some("joint limit".to_string())
                } else if self.arm.self_collides(&q) {
                    Some("self".to_string())
                } else {
                    checker.contact(&q).map(|o| source_name(&o.source))
                };
                if let Some(with) = hit {
                    fault = Some(with);
                    break 'outer;
                }
                travelled += l2(&prev, &q);
                prev = q;
            }
        }
        self.state.robot = prev;
        if dragging {
            let f = self.drag_fraction(&prev);
            self.move_drawer_to(f);
        }
        self.sync_held();
        let dt = travelled / JOINT_SPEED;
        self.exec_time += dt;
        match fault {
            Some(with) => Err(SimError::CollisionFault { halt: prev, with }),
            None => Ok(dt),
        }
    }

    /// Pushes `object` along `axis` from the current end-effector pose.
    pub fn apply_push(&mut self, object: &str, axis: Vec2) -> Result<(), SimError> {
        let i = self.index_of(object)?;
        if Some(i) == self.held_index() {
            return Err(SimError::ObjectHeld(object.to_string()));
        }
        let axis = axis.normalized();
        let body = self.state.objects[i].clone();
        let ee = self.arm.fk(&self.state.robot);
        let want = push_pose(&body.pose, body.half, axis, STANDOFF);
        if ee.distance(&want) > PUSH_POSITION_TOLERANCE
            || angle_diff(ee.theta, want.theta).abs() > PUSH_ANGLE_TOLERANCE
        {
            return Err(SimError::NotAtPushFace {
                object: object.to_string(),
            });
        }
        // Noise is drawn before any check so the stream does not depend on outcomes.
        let u: f64 = self.rng.random();
        let v: f64 = self.rng.random();
        let dd = (2.0 * u - 1.0) * self.push.d_max;
        let dth = (2.0 * v - 1.0) * self.push.theta_max;
        let d = self.push.nominal_distance;

        let others = self.others_scene(i);
        let start = Polygon::rectangle(&body.pose, body.half);
        let mut end_pose = body.pose;
        end_pose.x += axis.x * d;
        end_pose.y += axis.y * d;
        let end = Polygon::rectangle(&end_pose, body.half);
        let mut pts = start.vertices.clone();
        pts.extend(end.vertices.iter().copied());
        let sweep = convex_hull(&pts);
        if let Some(o) = others.polygon_contact(&sweep, 0.0) {
            return Err(SimError::PushBlocked {
                by: source_name(&o.source),
            });
        }

        let disp = axis.rotated(dth) * (d + dd);
        let at = |t: f64| {
            Pose2::new(
                body.pose.x + disp.x * t,
                body.pose.y + disp.y * t,
                wrap_angle(body.pose.theta + dth * t),
            )
        };
        let free = |p: &Pose2| {
            let poly = Polygon::rectangle(p, body.half);
            others.polygon_contact(&poly, 0.0).is_none()
                && poly.vertices.iter().all(|v| self.workspace.contains(*v))
        };
        let t = if free(&at(1.0)) {
            1.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if free(&at(mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        self.state.objects[i].pose = at(t);
        self.exec_time += (d + dd).abs() * t / PUSH_SPEED;
        Ok(())
    }

    fn others_scene(&self, skip: usize) -> Scene {
        let mut scene = Scene::default();
        for (name, p) in &self.statics {
            scene.push(p.clone(), Source::Static(name.clone()));
        }
        for (j, o) in self.state.objects.iter().enumerate() {
            if j == skip || Some(j) == self.held_index() || self.hidden_in_drawer(j) {
                continue;
            }
            scene.push(Polygon::rectangle(&o.pose, o.half), Source::Object(o.id.clone()));
        }
        scene
    }

    fn index_of(&self, id: &str) -> Result<usize, SimError> {
        self.state
            .objects
            .iter()
            .position(|o| o.id == id)
            .ok_or_else(|| SimError::UnknownObject(id.to_string()))
    }

    pub fn sense(&self) -> Observation {
        let cam = self.camera.position.0;
        let fov = self.camera.fov;
        let held = self.held_index();
        let blockers: Vec<(usize, Polygon)> = self
            .state
            .objects
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != held && !self.hidden_in_drawer(*i))
            .map(|(i, o)| (i, Polygon::rectangle(&o.pose, o.half)))
            .collect();
        let mut detected = Vec::new();
        let mut identities = Vec::new();
        let mut shadows = Vec::new();
        let ws = self.workspace.to_polygon();
        for (i, o) in self.state.objects.iter().enumerate() {
            let seen = if Some(i) == held {
                true
            } else if self.hidden_in_drawer(i) {
                false
            } else {
                let c = o.pose.position();
                in_fov(cam, fov, c)
                    && !blockers
                        .iter()
                        .any(|(j, p)| *j != i && p.distance_to_segment(cam, c) < 1e-12)
            };
            if !seen {
                continue;
            }
            detected.push((o.id.clone(), o.pose));
            if o.identity_visible {
                identities.push((o.id.clone(), o.label.clone()));
            }
            if Some(i) != held {
                let poly = Polygon::rectangle(&o.pose, o.half);
                if let Some(s) = shadow_polygon(cam, &poly, &ws) {
                    shadows.push(Shadow {
                        occluder: o.id.clone(),
                        polygon: s,
                    });
                }
            }
        }
        let hidden = match (&self.drawer, self.drawer_closed()) {
            (Some(d), true) => vec![d.box_polygon(self.state.drawer_fraction)],
            _ => Vec::new(),
        };
        Observation {
            detected,
            identities,
            shadows,
            held: self.held_object().map(str::to_string),
            drawer_fraction: self.drawer.as_ref().map(|_| self.state.drawer_fraction),
            camera: cam,
            fov,
            ee: self.arm.fk(&self.state.robot),
            hidden,
        }
    }

    fn ee_near(&self, target: &Pose2) -> bool {
        let ee = self.arm.fk(&self.state.robot);
        ee.distance(target) <= GRASP_POSITION_TOLERANCE
            && angle_diff(ee.theta, target.theta).abs() <= GRASP_ANGLE_TOLERANCE
    }

    pub fn grasp_handle(&mut self) -> Result<(), SimError> {
        let d = self.drawer.as_ref().ok_or(SimError::NoDrawer)?;
        if self.state.held.is_some() || self.state.handle_grasped {
            return Err(SimError::GripperOccupied);
        }
        if !self.ee_near(&d.handle_pose(self.state.drawer_fraction)) {
            return Err(SimError::HandleUnreached);
        }
        self.state.handle_grasped = true;
        Ok(())
    }

    pub fn release_handle(&mut self) {
        self.state.handle_grasped = false;
    }

    /// Sets the drawer opening; the gripper must hold the handle at that opening.
    pub fn set_drawer(&mut self, fraction: f64) -> Result<(), SimError> {
        let d = self.drawer.as_ref().ok_or(SimError::NoDrawer)?;
        let fraction = fraction.clamp(0.0, 1.0);
        let ee = self.arm.fk(&self.state.robot);
        if !self.state.handle_grasped
            || ee.position().distance(d.handle_point(fraction)) > GRASP_POSITION_TOLERANCE
        {
            return Err(SimError::HandleUnreached);
        }
        self.move_drawer_to(fraction);
        Ok(())
    }

    /// Closes the gripper; attaches the object whose axis grasp matches the end effector.
    pub fn close_gripper(&mut self) -> Result<String, SimError> {
        if self.state.held.is_some() || self.state.handle_grasped {
            return Err(SimError::GripperOccupied);
        }
        let ee = self.arm.fk(&self.state.robot);
        for (i, o) in self.state.objects.iter().enumerate() {
            if self.hidden_in_drawer(i) {
                continue;
            }
            for g in axis_grasps(&o.pose, o.half, STANDOFF) {
                if g.width > self.arm.max_opening {
                    continue;
                }
                if ee.distance(&g.ee) <= GRASP_POSITION_TOLERANCE
                    && angle_diff(ee.theta, g.ee.theta).abs() <= GRASP_ANGLE_TOLERANCE
                {
                    let rel = ee.inverse().compose(&o.pose);
                    let id = o.id.clone();
                    self.state.held = Some(Held { index: i, rel });
                    self.state.contents.retain(|&c| c != i);
                    return Ok(id);
                }
            }
        }
        Err(SimError::GraspMiss)
    }

    /// Opens the gripper, leaving any held object where it is.
    pub fn open_gripper(&mut self) -> Option<String> {
        let h = self.state.held.take()?;
        self.sync_held_index(&h);
        if let Some(d) = &self.drawer {
            let c = self.state.objects[h.index].pose.position();
            if d.box_polygon(self.state.drawer_fraction).contains(c) {
                self.state.contents.push(h.index);
            }
        }
        Some(self.state.objects[h.index].id.clone())
    }

    fn sync_held_index(&mut self, h: &Held) {
        let ee = self.arm.fk(&self.state.robot);
        self.state.objects[h.index].pose = ee.compose(&h.rel);
    }

    /// Identity query for the held object; it must be presented at the scan point.
    pub fn reveal_identity(&mut self) -> Result<String, SimError> {
        let h = self.state.held.as_ref().ok_or(SimError::GripperEmpty)?;
        let scan = self.scan.ok_or(SimError::NotAtScanPoint)?;
        let ee = self.arm.fk(&self.state.robot).position();
        if ee.distance(scan.point.0) > scan.tolerance {
            return Err(SimError::NotAtScanPoint);
        }
        let o = &mut self.state.objects[h.index];
        o.identity_visible = true;
        Ok(o.label.clone())
    }
}

pub fn source_name(s: &Source) -> String {
    match s {
        Source::Static(n) | Source::Object(n) => n.clone(),
        Source::Shadow(n) => format!("shadow of {n}"),
    }
}

pub fn in_fov(cam: Vec2, fov: [f64; 2], p: Vec2) -> bool {
    let bearing = (p - cam).angle();
    let span = fov[1] - fov[0];
    let off = (bearing - fov[0]).rem_euclid(2.0 * std::f64::consts::PI);
    off <= span
}

/// Region hidden behind `occluder` as seen from `cam`, clipped to `bounds`.
pub fn shadow_polygon(cam: Vec2, occluder: &Polygon, bounds: &Polygon) -> Option<Polygon> {
    if occluder.contains(cam) {
        return None;
    }
    let dir = occluder.centroid() - cam;
    let offset = |v: Vec2| {
        let r = v - cam;
        dir.cross(r).atan2(dir.dot(r))
    };
    let (mut lo, mut hi) = (occluder.vertices[0], occluder.vertices[0]);
    for &v in &occluder.vertices {
        if offset(v) < offset(lo) {
            lo = v;
        }
        if offset(v) > offset(hi) {
            hi = v;
        }
    }
    let far = |v: Vec2| v + (v - cam).normalized() * SHADOW_FAR;
    let quad = Polygon::new(vec![lo, far(lo), far(hi), hi]);
    // only what lies beyond the occluder's back
    let d = dir.normalized();
    let back = occluder
        .vertices
        .iter()
        .map(|v| (*v - cam).dot(d))
        .fold(f64::MIN, f64::max);
    let beyond = Polygon::rectangle(
        &Pose2::from_parts(cam + d * (back + 2.0 * SHADOW_FAR), d.angle()),
        Vec2::new(2.0 * SHADOW_FAR, 4.0 * SHADOW_FAR),
    );
    let clipped = quad.clip_convex(&beyond).clip_convex(bounds);
    (clipped.area() > crate::geometry::DEGENERATE_AREA).then_some(clipped)
}

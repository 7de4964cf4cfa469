//! Three-link planar arm: forward/inverse kinematics, link geometry, and
//! piecewise-linear joint trajectories.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, Capsule, Pose2, Vec2};

pub type Config = [f64; 3];

/// Fixed joint speed used to time trajectories (rad/s).
pub const JOINT_SPEED: f64 = 0.5;

const IK_DEDUPE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("joint {joint} value {value:.4} outside [{lo:.4}, {hi:.4}]")]
    JointLimit { joint: usize, value: f64, lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    #[serde(default)]
    pub base: Vec2,
    pub links: [f64; 3],
    pub limits: [[f64; 2]; 3],
    pub link_radius: f64,
    /// Half of the palm's width, perpendicular to the approach direction.
    pub palm_half_width: f64,
    /// Widest object extent the gripper can close around.
    pub max_opening: f64,
    pub home: Config,
}

impl Default for ArmSpec {
    fn default() -> Self {
        Self {
            base: Vec2::ZERO,
            links: [0.45, 0.35, 0.22],
            limits: [[-std::f64::consts::PI, std::f64::consts::PI], [-2.7, 2.7], [-2.7, 2.7]],
            link_radius: 0.01,
            palm_half_width: 0.05,
            max_opening: 0.11,
            home: [2.4, 1.6, 1.4],
        }
    }
}

impl ArmSpec {
    pub fn reach(&self) -> f64 {
        self.links.iter().sum()
    }

    pub fn within_limits(&self, q: &Config) -> bool {
        q.iter()
            .zip(&self.limits)
            .all(|(v, [lo, hi])| *v >= *lo && *v <= *hi)
    }

    pub fn check_limits(&self, q: &Config) -> Result<(), KinematicsError> {
        for (joint, (v, [lo, hi])) in q.iter().zip(&self.limits).enumerate() {
            if v < lo || v > hi {
                return Err(KinematicsError::JointLimit {
                    joint,
                    value: *v,
                    lo: *lo,
                    hi: *hi,
                });
            }
        }
        Ok(())
    }

    pub fn forward_kinematics(&self, q: &Config) -> Result<Pose2, KinematicsError> {
        self.check_limits(q)?;
        Ok(self.fk(q))
    }

    /// Forward kinematics without the joint-limit check.
    pub fn fk(&self, q: &Config) -> Pose2 {
        let p = self.joint_points(q);
        Pose2::from_parts(p[3], q[0] + q[1] + q[2])
    }

    /// Base, elbow, wrist and end-effector positions.
    pub fn joint_points(&self, q: &Config) -> [Vec2; 4] {
        let mut pts = [self.base; 4];
        let mut angle = 0.0;
        for i in 0..3 {
            angle += q[i];
            pts[i + 1] = pts[i] + Vec2::from_angle(angle) * self.links[i];
        }
        pts
    }

    /// Link capsules followed by the palm capsule.
    pub fn capsules(&self, q: &Config) -> [Capsule; 4] {
        let p = self.joint_points(q);
        let heading = q[0] + q[1] + q[2];
        let side = Vec2::from_angle(heading).perp() * self.palm_half_width;
        let r = self.link_radius;
        [
            Capsule { a: p[0], b: p[1], radius: r },
            Capsule { a: p[1], b: p[2], radius: r },
            Capsule { a: p[2], b: p[3], radius: r },
            Capsule { a: p[3] - side, b: p[3] + side, radius: r },
        ]
    }

    /// Non-adjacent parts of the arm touching each other.
    pub fn self_collides(&self, q: &Config) -> bool {
        let c = self.capsules(q);
        let touching = |a: &Capsule, b: &Capsule| {
            crate::geometry::segment_segment_distance(a.a, a.b, b.a, b.b) < a.radius + b.radius
        };
        touching(&c[0], &c[2]) || touching(&c[0], &c[3]) || touching(&c[1], &c[3])
    }

    /// Analytic inverse kinematics; at most two solutions (elbow up/down).
    pub fn inverse_kinematics(&self, target: &Pose2, n_samples: usize) -> Vec<Config> {
        let [l1, l2, l3] = self.links;
        let wrist = target.position() - target.heading() * l3 - self.base;
        let d2 = wrist.norm_squared();
        let c2 = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
        if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&c2) {
            return Vec::new();
        }
        let c2 = c2.clamp(-1.0, 1.0);
        let s2 = (1.0 - c2 * c2).sqrt();
        let mut out: Vec<Config> = Vec::new();
        for s in [s2, -s2] {
            let q2 = s.atan2(c2);
            let q1 = wrap_angle(wrist.y.atan2(wrist.x) - (l2 * s).atan2(l1 + l2 * c2));
            let q3 = wrap_angle(target.theta - q1 - q2);
            let q = [q1, q2, q3];
            if !self.within_limits(&q) {
                continue;
            }
            if out.iter().any(|p| max_norm(p, &q) < IK_DEDUPE) {
                continue;
            }
            out.push(q);
            if out.len() >= n_samples {
                break;
            }
        }
        out
    }
}

pub fn max_norm(a: &Config, b: &Config) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

pub fn l2(a: &Config, b: &Config) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

pub fn lerp(a: &Config, b: &Config, t: f64) -> Config {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

/// Points along a->b spaced at most `step` apart in max-norm, endpoints included.
pub fn interpolate(a: &Config, b: &Config, step: f64) -> impl Iterator<Item = Config> {
    let n = (max_norm(a, b) / step).ceil().max(1.0) as usize;
    let (a, b) = (*a, *b);
    (0..=n).map(move |i| if i == n { b } else { lerp(&a, &b, i as f64 / n as f64) })
}

/// Piecewise-linear joint path traversed at constant joint speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Config>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Config>) -> Self {
        assert!(!waypoints.is_empty(), "trajectory needs at least one waypoint");
        Self { waypoints }
    }

    pub fn stationary(q: Config) -> Self {
        Self { waypoints: vec![q] }
    }

    pub fn start(&self) -> Config {
        self.waypoints[0]
    }

    pub fn end(&self) -> Config {
        *self.waypoints.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| l2(&w[0], &w[1])).sum()
    }

    pub fn duration(&self) -> f64 {
        self.length() / JOINT_SPEED
    }

    /// Configuration at normalized arc-length parameter `tau` in [0, 1].
    pub fn at(&self, tau: f64) -> Config {
        let total = self.length();
        if total == 0.0 || tau <= 0.0 {
            return self.start();
        }
        let mut remaining = tau.min(1.0) * total;
        for w in self.waypoints.windows(2) {
            let seg = l2(&w[0], &w[1]);
            if remaining <= seg && seg > 0.0 {
                return lerp(&w[0], &w[1], remaining / seg);
            }
            remaining -= seg;
        }
        self.end()
    }

    /// Inserts points so consecutive waypoints are at most `step` apart (max-norm).
    pub fn densified(&self, step: f64) -> Trajectory {
        let mut out = vec![self.start()];
        for w in self.waypoints.windows(2) {
            out.extend(interpolate(&w[0], &w[1], step).skip(1));
        }
        Trajectory { waypoints: out }
    }

    pub fn max_step(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| max_norm(&w[0], &w[1]))
            .fold(0.0, f64::max)
    }

    /// Concatenates `next` after this one; the joint must coincide.
    pub fn then(&self, next: &Trajectory) -> Trajectory {
        let mut out = self.waypoints.clone();
        let skip = usize::from(max_norm(&self.end(), &next.start()) < 1e-12);
        out.extend(next.waypoints.iter().skip(skip));
        Trajectory { waypoints: out }
    }
}

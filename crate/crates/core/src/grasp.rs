//! Axis-aligned grasp and push poses for rectangular footprints.

use crate::geometry::{Polygon, Pose2, Vec2};

/// Gap between the palm and the face it approaches (m).
pub const STANDOFF: f64 = 0.04;
/// Length of the approach corridor swept outward from the grasped face (m).
pub const CORRIDOR_LENGTH: f64 = 0.12;
/// Extra width added to the gripper when testing the approach corridor (m).
pub const CORRIDOR_CLEARANCE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grasp {
    /// 0..4: approach from the +x, +y, -x, -y face of the object frame.
    pub index: usize,
    /// Outward normal of the approached face, world frame.
    pub normal: Vec2,
    /// Distance from the object center to the approached face.
    pub depth: f64,
    /// Object extent the fingers close across.
    pub width: f64,
    /// End-effector pose, heading into the face.
    pub ee: Pose2,
}

impl Grasp {
    /// Object pose expressed in the end-effector frame.
    pub fn relative(&self, object: &Pose2) -> Pose2 {
        self.ee.inverse().compose(object)
    }
}

/// Extent of a rectangle along a unit direction, measured from its center.
pub fn support(pose: &Pose2, half: Vec2, dir: Vec2) -> f64 {
    let ex = Vec2::from_angle(pose.theta);
    let ey = ex.perp();
    half.x * dir.dot(ex).abs() + half.y * dir.dot(ey).abs()
}

pub fn axis_grasps(pose: &Pose2, half: Vec2, standoff: f64) -> [Grasp; 4] {
    std::array::from_fn(|k| {
        let normal = Vec2::from_angle(pose.theta + k as f64 * std::f64::consts::FRAC_PI_2);
        let (depth, width) = if k % 2 == 0 {
            (half.x, 2.0 * half.y)
        } else {
            (half.y, 2.0 * half.x)
        };
        let p = pose.position() + normal * (depth + standoff);
        Grasp {
            index: k,
            normal,
            depth,
            width,
            ee: Pose2::from_parts(p, (-normal).angle()),
        }
    })
}

/// Rectangle swept by the gripper on its way to `grasp`.
pub fn corridor(pose: &Pose2, grasp: &Grasp, palm_half_width: f64) -> Polygon {
    let face = pose.position() + grasp.normal * grasp.depth;
    let center = face + grasp.normal * (CORRIDOR_LENGTH * 0.5);
    Polygon::rectangle(
        &Pose2::from_parts(center, grasp.normal.angle()),
        Vec2::new(
            CORRIDOR_LENGTH * 0.5,
            palm_half_width + CORRIDOR_CLEARANCE * 0.5,
        ),
    )
}

/// End-effector pose that touches the face opposite to `axis` and pushes along it.
pub fn push_pose(pose: &Pose2, half: Vec2, axis: Vec2, standoff: f64) -> Pose2 {
    let h = support(pose, half, axis);
    Pose2::from_parts(pose.position() - axis * (h + standoff), axis.angle())
}

/// Held-object pose for the first grasp the gripper can close around.
///
/// Used when the actual grasp is only known after execution.
pub fn canonical_relative(half: Vec2, max_opening: f64, standoff: f64) -> Option<Pose2> {
    let grasps = axis_grasps(&Pose2::IDENTITY, half, standoff);
    let g = grasps.iter().find(|g| g.width <= max_opening)?;
    Some(g.relative(&Pose2::IDENTITY))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grasp_pose_faces_object() {
        let pose = Pose2::new(0.5, 0.2, 0.3);
        let half = Vec2::new(0.05, 0.03);
        for g in axis_grasps(&pose, half, STANDOFF) {
            let rel = g.relative(&pose);
            // object sits straight ahead of the palm
            assert!(rel.y.abs() < 1e-12);
            assert!((rel.x - (g.depth + STANDOFF)).abs() < 1e-12);
            assert!((g.ee.compose(&rel).distance(&pose)) < 1e-12);
        }
    }

    #[test]
    fn widths_alternate() {
        let g = axis_grasps(&Pose2::IDENTITY, Vec2::new(0.09, 0.05), STANDOFF);
        assert_eq!(g.map(|g| g.width), [0.1, 0.18, 0.1, 0.18]);
    }

    #[test]
    fn canonical_uses_narrow_side() {
        let rel = canonical_relative(Vec2::new(0.05, 0.09), 0.11, STANDOFF).unwrap();
        assert!((rel.x - (0.09 + STANDOFF)).abs() < 1e-12);
        assert!(canonical_relative(Vec2::new(0.1, 0.1), 0.11, STANDOFF).is_none());
    }

    #[test]
    fn corridor_starts_at_face() {
        let pose = Pose2::IDENTITY;
        let g = axis_grasps(&pose, Vec2::new(0.05, 0.05), STANDOFF)[2];
        let c = corridor(&pose, &g, 0.05);
        let b = c.bounds();
        assert!((b.max.x + 0.05).abs() < 1e-12);
        assert!((b.min.x + 0.05 + CORRIDOR_LENGTH).abs() < 1e-12);
    }

    #[test]
    fn push_pose_behind_face() {
        let p = push_pose(&Pose2::IDENTITY, Vec2::new(0.05, 0.09), Vec2::new(1.0, 0.0), STANDOFF);
        assert!((p.x + 0.09).abs() < 1e-12 && p.theta == 0.0);
    }
}

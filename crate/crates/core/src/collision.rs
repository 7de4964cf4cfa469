//! Arm-versus-polygon collision queries.

use crate::geometry::{Aabb, Polygon, Pose2, Vec2};
use crate::kinematics::{interpolate, ArmSpec, Config};

/// Clearance required by the planner on top of contact (m).
pub const PLANNING_MARGIN: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Static(String),
    Object(String),
    /// Shrunk occlusion region cast by the named occluder.
    Shadow(String),
}

impl Source {
    /// Object this obstacle belongs to, counting an occluder's shadows as its own.
    pub fn owner(&self) -> Option<&str> {
        match self {
            Source::Object(id) | Source::Shadow(id) => Some(id),
            Source::Static(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Obstacle {
    pub polygon: Polygon,
    pub bounds: Aabb,
    pub source: Source,
}

impl Obstacle {
    pub fn new(polygon: Polygon, source: Source) -> Self {
        let bounds = polygon.bounds();
        Self {
            polygon,
            bounds,
            source,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scene {
    pub obstacles: Vec<Obstacle>,
}

impl Scene {
    pub fn push(&mut self, polygon: Polygon, source: Source) {
        self.obstacles.push(Obstacle::new(polygon, source));
    }

    /// Copy without the obstacles owned by `id`.
    pub fn without_owner(&self, id: &str) -> Scene {
        Scene {
            obstacles: self
                .obstacles
                .iter()
                .filter(|o| o.source.owner() != Some(id))
                .cloned()
                .collect(),
        }
    }

    /// Copy keeping only static geometry.
    pub fn statics_only(&self) -> Scene {
        Scene {
            obstacles: self
                .obstacles
                .iter()
                .filter(|o| matches!(o.source, Source::Static(_)))
                .cloned()
                .collect(),
        }
    }

    /// First obstacle within `margin` of `poly`.
    pub fn polygon_contact(&self, poly: &Polygon, margin: f64) -> Option<&Obstacle> {
        let b = poly.bounds().inflated(margin);
        self.obstacles.iter().find(|o| {
            o.bounds.overlaps(&b)
                && if margin > 0.0 {
                    o.polygon.distance_to_polygon(poly) <= margin
                } else {
                    o.polygon.intersects(poly)
                }
        })
    }

    pub fn point_occupied(&self, p: Vec2) -> bool {
        self.obstacles
            .iter()
            .any(|o| o.bounds.contains(p) && o.polygon.contains(p))
    }
}

/// Held object geometry in the end-effector frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeldShape {
    pub rel: Pose2,
    pub half_extents: Vec2,
}

impl HeldShape {
    pub fn pose_at(&self, ee: &Pose2) -> Pose2 {
        ee.compose(&self.rel)
    }

    pub fn polygon_at(&self, ee: &Pose2) -> Polygon {
        Polygon::rectangle(&self.pose_at(ee), self.half_extents)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ArmChecker<'a> {
    pub arm: &'a ArmSpec,
    pub scene: &'a Scene,
    pub held: Option<HeldShape>,
    pub margin: f64,
}

impl<'a> ArmChecker<'a> {
    pub fn new(arm: &'a ArmSpec, scene: &'a Scene, held: Option<HeldShape>, margin: f64) -> Self {
        Self {
            arm,
            scene,
            held,
            margin,
        }
    }

    pub fn is_valid(&self, q: &Config) -> bool {
        self.arm.within_limits(q) && !self.arm.self_collides(q) && self.contact(q).is_none()
    }

    /// Obstacle touched by the arm or held object at `q`, if any.
    pub fn contact(&self, q: &Config) -> Option<&'a Obstacle> {
        let scene: &'a Scene = self.scene;
        for cap in self.arm.capsules(q) {
            let reach = cap.radius + self.margin;
            let b = cap.bounds().inflated(self.margin);
            for o in &scene.obstacles {
                if !o.bounds.overlaps(&b) {
                    continue;
                }
                let d = o.polygon.distance_to_segment(cap.a, cap.b);
                let hit = if self.margin > 0.0 { d <= reach } else { d < reach };
                if hit {
                    return Some(o);
                }
            }
        }
        if let Some(h) = self.held {
            let poly = h.polygon_at(&self.arm.fk(q));
            return scene.polygon_contact(&poly, self.margin);
        }
        None
    }

    /// Checks the straight segment a->b at `step` resolution (max-norm), endpoints included.
    pub fn edge_valid(&self, a: &Config, b: &Config, step: f64) -> bool {
        interpolate(a, b, step).all(|q| self.is_valid(&q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_arm_hits_box_on_x_axis() {
        let arm = ArmSpec::default();
        let mut scene = Scene::default();
        scene.push(
            Aabb::new(Vec2::new(0.5, -0.05), Vec2::new(0.6, 0.05)).to_polygon(),
            Source::Static("box".into()),
        );
        let c = ArmChecker::new(&arm, &scene, None, 0.0);
        assert!(c.contact(&[0.0, 0.0, 0.0]).is_some());
        assert!(c.contact(&[1.5, 0.0, 0.0]).is_none());
    }

    #[test]
    fn margin_is_conservative() {
        let arm = ArmSpec::default();
        let mut scene = Scene::default();
        // box 0.015 above the straight arm's center line
        scene.push(
            Aabb::new(Vec2::new(0.2, 0.025), Vec2::new(0.3, 0.1)).to_polygon(),
            Source::Static("box".into()),
        );
        let q = [0.0, 0.0, 0.0];
        assert!(ArmChecker::new(&arm, &scene, None, 0.0).is_valid(&q));
        assert!(!ArmChecker::new(&arm, &scene, None, PLANNING_MARGIN).is_valid(&q));
    }

    #[test]
    fn held_object_collides() {
        let arm = ArmSpec::default();
        let mut scene = Scene::default();
        scene.push(
            Aabb::new(Vec2::new(1.05, -0.02), Vec2::new(1.1, 0.02)).to_polygon(),
            Source::Object("o".into()),
        );
        let held = HeldShape {
            rel: Pose2::new(0.08, 0.0, 0.0),
            half_extents: Vec2::new(0.04, 0.04),
        };
        let q = [0.0, 0.0, 0.0];
        assert!(ArmChecker::new(&arm, &scene, None, 0.0).is_valid(&q));
        assert!(!ArmChecker::new(&arm, &scene, Some(held), 0.0).is_valid(&q));
        assert!(scene.without_owner("o").obstacles.is_empty());
    }
}

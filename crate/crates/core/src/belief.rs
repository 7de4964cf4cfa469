//! Planner-side partial world model with the ε occlusion model.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::collision::{HeldShape, Scene, Source};
use crate::domain::{SymbolicState, VariableMeaning};
use crate::geometry::{GeometryError, Polygon, Pose2, Vec2};
use crate::scenario::{Scenario, DRAWER_OPEN_THRESHOLD};
use crate::world::Observation;

/// Scales `poly` about its area-weighted centroid by `epsilon`.
pub fn shrink_region(poly: &Polygon, epsilon: f64) -> Result<Polygon, GeometryError> {
    poly.scaled_about_centroid(epsilon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub half_extents: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OcclusionRegion {
    pub occluder: String,
    /// Full shadow as sensed.
    pub shadow: Polygon,
    /// Shadow shrunk by ε; `None` when it has no area.
    pub region: Option<Polygon>,
    /// Occluder pose when the shadow was observed.
    pub cast_from: Option<Pose2>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeldBelief {
    pub id: String,
    /// Object pose in the end-effector frame.
    pub rel: Pose2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub epsilon: f64,
    pub catalog: Vec<CatalogEntry>,
    pub known: BTreeMap<String, Pose2>,
    pub unknown: BTreeSet<String>,
    pub identities: BTreeMap<String, String>,
    pub regions: Vec<OcclusionRegion>,
    pub drawer_fraction: Option<f64>,
    pub held: Option<HeldBelief>,
    /// Areas the last observation could not see into at all.
    pub hidden: Vec<Polygon>,
}

impl Belief {
    pub fn new(scenario: &Scenario) -> Self {
        let f = &scenario.file;
        let mut known = BTreeMap::new();
        let mut unknown = BTreeSet::new();
        let mut identities = BTreeMap::new();
        for o in &f.objects {
            if f.prior_known.contains(&o.id) {
                known.insert(o.id.clone(), o.pose.0);
                if !o.identity_hidden {
                    identities.insert(o.id.clone(), o.label().to_string());
                }
            } else {
                unknown.insert(o.id.clone());
            }
        }
        Self {
            epsilon: f.epsilon,
            catalog: f
                .objects
                .iter()
                .map(|o| CatalogEntry {
                    id: o.id.clone(),
                    half_extents: o.half_extents.0,
                })
                .collect(),
            known,
            unknown,
            identities,
            regions: Vec::new(),
            drawer_fraction: f.drawer.as_ref().map(|d| d.open_fraction),
            held: None,
            hidden: Vec::new(),
        }
    }

    pub fn half_extents(&self, id: &str) -> Option<Vec2> {
        self.catalog
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.half_extents)
    }

    pub fn pose(&self, id: &str) -> Option<Pose2> {
        self.known.get(id).copied()
    }

    pub fn footprint(&self, id: &str) -> Option<Polygon> {
        Some(Polygon::rectangle(&self.pose(id)?, self.half_extents(id)?))
    }

    pub fn is_held(&self, id: &str) -> bool {
        self.held.as_ref().is_some_and(|h| h.id == id)
    }

    /// Symbol naming `id` in the task domain, once its identity is known.
    pub fn symbol(&self, id: &str) -> Option<&str> {
        self.identities.get(id).map(String::as_str)
    }

    /// Object carrying the task symbol `sym`, if identified.
    pub fn object_for_symbol(&self, sym: &str) -> Option<&str> {
        self.identities
            .iter()
            .find(|(_, l)| *l == sym)
            .map(|(id, _)| id.as_str())
    }

    /// Object id a task symbol refers to: an identified object, or an object with that id.
    pub fn resolve(&self, sym: &str) -> Option<String> {
        if let Some(id) = self.object_for_symbol(sym) {
            return Some(id.to_string());
        }
        self.catalog
            .iter()
            .find(|c| c.id == sym && self.identities.get(&c.id).is_none_or(|l| l == sym))
            .map(|c| c.id.clone())
    }

    /// Hypothetical belief with `id` and its shadows taken out.
    pub fn without(&self, id: &str) -> Belief {
        let mut b = self.clone();
        b.known.remove(id);
        b.regions.retain(|r| r.occluder != id);
        b
    }

    pub fn held_shape(&self) -> Option<HeldShape> {
        let h = self.held.as_ref()?;
        Some(HeldShape {
            rel: h.rel,
            half_extents: self.half_extents(&h.id)?,
        })
    }

    pub fn fuse(&self, obs: &Observation) -> Belief {
        let mut b = self.clone();
        for (id, pose) in &obs.detected {
            b.known.insert(id.clone(), *pose);
            b.unknown.remove(id);
        }
        for (id, label) in &obs.identities {
            b.identities.insert(id.clone(), label.clone());
        }
        b.held = obs.held.as_ref().and_then(|id| {
            let pose = obs.pose_of(id)?;
            Some(HeldBelief {
                id: id.clone(),
                rel: obs.ee.inverse().compose(&pose),
            })
        });
        b.regions = obs
            .shadows
            .iter()
            .map(|s| OcclusionRegion {
                occluder: s.occluder.clone(),
                shadow: s.polygon.clone(),
                region: shrink_region(&s.polygon, self.epsilon)
                    .ok()
                    .filter(|p| p.area() > crate::geometry::DEGENERATE_AREA),
                cast_from: obs.pose_of(&s.occluder),
            })
            .collect();
        b.hidden = obs.hidden.clone();
        b.drawer_fraction = obs.drawer_fraction;
        // stale poses: we should have seen it, but did not
        let stale: Vec<String> = b
            .known
            .iter()
            .filter(|(id, p)| obs.pose_of(id).is_none() && obs.sees_point(p.position()))
            .map(|(id, _)| id.clone())
            .collect();
        for id in stale {
            b.known.remove(&id);
            b.unknown.insert(id);
        }
        b
    }

    fn solid_footprints(&self) -> impl Iterator<Item = (&String, Polygon)> + '_ {
        self.known
            .iter()
            .filter(|(id, _)| !self.is_held(id))
            .filter_map(|(id, p)| Some((id, Polygon::rectangle(p, self.half_extents(id)?))))
    }

    pub fn occupied_point(&self, p: Vec2) -> bool {
        self.solid_footprints().any(|(_, f)| f.contains(p))
            || self
                .regions
                .iter()
                .filter_map(|r| r.region.as_ref())
                .any(|r| r.contains(p))
    }

    pub fn occupied_segment(&self, a: Vec2, b: Vec2) -> bool {
        self.solid_footprints()
            .any(|(_, f)| f.distance_to_segment(a, b) < 1e-12)
            || self
                .regions
                .iter()
                .filter_map(|r| r.region.as_ref())
                .any(|r| r.distance_to_segment(a, b) < 1e-12)
    }

    /// Obstacles for motion planning: statics, known objects, shrunk shadows.
    pub fn scene(&self, scenario: &Scenario) -> Scene {
        let mut scene = Scene::default();
        for s in &scenario.file.statics {
            scene.push(s.polygon(), Source::Static(s.name.clone()));
        }
        for (id, f) in self.solid_footprints() {
            scene.push(f, Source::Object(id.clone()));
        }
        // once every catalog object is localized the shadows hide nothing
        if !self.unknown.is_empty() {
            for r in &self.regions {
                if let Some(p) = &r.region {
                    scene.push(p.clone(), Source::Shadow(r.occluder.clone()));
                }
            }
        }
        scene
    }

    /// Polygon of a named region; the drawer region follows the believed opening.
    pub fn region_polygon(&self, scenario: &Scenario, name: &str) -> Option<Polygon> {
        if let Some(d) = &scenario.file.drawer {
            if d.name == name {
                return Some(d.box_polygon(self.drawer_fraction.unwrap_or(0.0)));
            }
        }
        scenario.region(name).map(|r| r.polygon())
    }

    /// Symbolic abstraction of the belief. Values the belief cannot decide
    /// are carried over from `prev`.
    pub fn abstract_state(&self, scenario: &Scenario, prev: &SymbolicState) -> SymbolicState {
        let domain = &scenario.domain;
        let mut s = prev.clone();
        for var in 0..domain.width() {
            match domain.meaning(var) {
                VariableMeaning::HandEmpty => s.set(var, self.held.is_none()),
                VariableMeaning::Open { fixture } => {
                    if scenario.file.drawer.as_ref().is_some_and(|d| &d.name == fixture) {
                        s.set(var, self.drawer_fraction.unwrap_or(0.0) > DRAWER_OPEN_THRESHOLD);
                    }
                }
                _ => {}
            }
        }
        for (id, pose) in &self.known {
            let Some(sym) = self.symbol(id) else { continue };
            let at_vars: Vec<(usize, &str)> = (0..domain.width())
                .filter_map(|v| match domain.meaning(v) {
                    VariableMeaning::At { object, region } if object == sym => {
                        Some((v, region.as_str()))
                    }
                    _ => None,
                })
                .collect();
            let holding = (0..domain.width()).find(|&v| {
                matches!(domain.meaning(v), VariableMeaning::Holding { object } if object == sym)
            });
            if self.is_held(id) {
                if let Some(v) = holding {
                    s.set(v, true);
                }
                for (v, _) in &at_vars {
                    s.set(*v, false);
                }
                continue;
            }
            if let Some(v) = holding {
                s.set(v, false);
            }
            let c = pose.position();
            let named = scenario
                .file
                .regions
                .iter()
                .map(|r| r.name.as_str())
                .chain(scenario.file.drawer.as_ref().map(|d| d.name.as_str()));
            let mut hit = None;
            for name in named {
                let Some(&(v, _)) = at_vars.iter().find(|(_, r)| *r == name) else {
                    continue;
                };
                if self
                    .region_polygon(scenario, name)
                    .is_some_and(|p| p.contains(c))
                {
                    hit = Some(v);
                    break;
                }
            }
            if hit.is_none() {
                if let Some(fb) = &scenario.file.fallback_region {
                    hit = at_vars.iter().find(|(_, r)| r == fb).map(|(v, _)| *v);
                }
            }
            if let Some(h) = hit {
                for (v, _) in &at_vars {
                    s.set(*v, *v == h);
                }
            }
        }
        s
    }

    /// Pose bookkeeping for a grasp the planner expects to happen.
    pub fn assume_grasp(&mut self, id: &str, rel: Pose2, ee: Pose2) {
        self.known.insert(id.to_string(), ee.compose(&rel));
        self.unknown.remove(id);
        self.held = Some(HeldBelief {
            id: id.to_string(),
            rel,
        });
    }

    pub fn assume_release(&mut self, ee: Pose2) {
        if let Some(h) = self.held.take() {
            self.known.insert(h.id, ee.compose(&h.rel));
        }
    }

    pub fn assume_pose(&mut self, id: &str, pose: Pose2) {
        self.known.insert(id.to_string(), pose);
        self.unknown.remove(id);
    }
}

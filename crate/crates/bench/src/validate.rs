//! Static checks on a scenario before it is run.

use std::fmt;

use tamper_core::collision::{ArmChecker, Scene, Source};
use tamper_core::domain::VariableMeaning;
use tamper_core::planner::{plan, ConstraintStack, PlanQuery};
use tamper_core::scenario::Scenario;
use tamper_core::world::in_fov;

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    /// Field path inside the scenario file, e.g. `objects[2].pose`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn diag(path: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        path: path.into(),
        message: message.into(),
    }
}

pub const GOAL_UNREACHABLE: &str = "goal unreachable ignoring geometry";

pub fn validate(sc: &Scenario) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let f = &sc.file;
    let ws = sc.workspace();
    let ws_poly = ws.to_polygon();

    for (i, o) in f.objects.iter().enumerate() {
        if f.objects[..i].iter().any(|p| p.id == o.id) {
            out.push(diag(format!("objects[{i}].id"), format!("duplicate object id {}", o.id)));
        }
        let fp = o.footprint();
        if !fp.vertices.iter().all(|v| ws.contains(*v)) {
            out.push(diag(format!("objects[{i}].pose"), format!("{} leaves the workspace", o.id)));
        }
        for (j, p) in f.objects.iter().enumerate().skip(i + 1) {
            if fp.intersects(&p.footprint()) {
                out.push(diag(
                    format!("objects[{j}].pose"),
                    format!("{} overlaps {}", o.id, p.id),
                ));
            }
        }
        for (j, s) in f.statics.iter().enumerate() {
            if fp.intersects(&s.polygon()) {
                out.push(diag(
                    format!("objects[{i}].pose"),
                    format!("{} overlaps static {} (statics[{j}])", o.id, s.name),
                ));
            }
        }
    }

    let cam = f.camera.position.0;
    if !ws.contains(cam) {
        out.push(diag("camera.position", "camera is outside the workspace"));
    }
    if f.camera.fov[0] >= f.camera.fov[1] {
        out.push(diag("camera.fov", "field of view is empty"));
    }
    for o in &f.objects {
        if o.footprint().contains(cam) {
            out.push(diag("camera.position", format!("camera is inside {}", o.id)));
        }
    }
    for s in &f.statics {
        if s.polygon().contains(cam) {
            out.push(diag("camera.position", format!("camera is inside static {}", s.name)));
        }
    }
    if !f.objects.iter().any(|o| in_fov(cam, f.camera.fov, o.pose.0.position())) && !f.objects.is_empty() {
        out.push(diag("camera.fov", "no object lies in the field of view"));
    }

    let arm = &f.arm;
    let home = arm.home;
    if !arm.within_limits(&home) {
        out.push(diag("arm.home", "home configuration violates joint limits"));
    } else if arm.self_collides(&home) {
        out.push(diag("arm.home", "home configuration collides with itself"));
    } else {
        let mut scene = Scene::default();
        for s in &f.statics {
            scene.push(s.polygon(), Source::Static(s.name.clone()));
        }
        for o in &f.objects {
            scene.push(o.footprint(), Source::Object(o.id.clone()));
        }
        if let Some(hit) = ArmChecker::new(arm, &scene, None, 0.0).contact(&home) {
            out.push(diag("arm.home", format!("home configuration touches {:?}", hit.source)));
        }
        if arm.capsules(&home).iter().any(|c| !ws_poly.contains(c.a) || !ws_poly.contains(c.b)) {
            out.push(diag("arm.home", "home configuration leaves the workspace"));
        }
    }

    if let Some(d) = &f.drawer {
        for c in &d.contents {
            if sc.object(c).is_none() {
                out.push(diag("drawer.contents", format!("unknown object {c}")));
            }
        }
    }
    for v in 0..sc.domain.width() {
        if let VariableMeaning::At { region, .. } = sc.domain.meaning(v) {
            let known = sc.region(region).is_some() || f.drawer.as_ref().is_some_and(|d| &d.name == region);
            if !known {
                out.push(diag(
                    "regions",
                    format!("domain variable {} names a missing region", sc.domain.variables().name(v)),
                ));
            }
        }
    }

    let empty = ConstraintStack::new();
    if plan(&sc.domain, &PlanQuery::new(sc.init.clone(), sc.goal.clone(), &empty)).is_err() {
        out.push(diag("goal", GOAL_UNREACHABLE));
    }
    out
}

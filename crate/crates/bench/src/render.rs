//! Top-down PNG snapshots of a world state.

use std::path::Path;

use plotters::prelude::*;
use tamper_core::belief::Belief;
use tamper_core::geometry::{Polygon, Vec2};
use tamper_core::scenario::Scenario;
use tamper_core::world::WorldSnapshot;

const PX_PER_M: f64 = 500.0;

fn palette(i: usize) -> RGBColor {
    const C: [RGBColor; 6] = [
        RGBColor(214, 39, 40),
        RGBColor(31, 119, 180),
        RGBColor(44, 160, 44),
        RGBColor(255, 127, 14),
        RGBColor(148, 103, 189),
        RGBColor(140, 86, 75),
    ];
    C[i % C.len()]
}

pub fn render_png(
    path: &Path,
    scenario: &Scenario,
    world: &WorldSnapshot,
    belief: Option<&Belief>,
) -> Result<(), String> {
    let ws = scenario.workspace();
    let w = ((ws.max.x - ws.min.x) * PX_PER_M).ceil() as u32;
    let h = ((ws.max.y - ws.min.y) * PX_PER_M).ceil() as u32;
    let root = BitMapBackend::new(path, (w.max(8), h.max(8))).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let px = |p: Vec2| -> (i32, i32) {
        (
            ((p.x - ws.min.x) * PX_PER_M).round() as i32,
            ((ws.max.y - p.y) * PX_PER_M).round() as i32,
        )
    };
    let outline = |poly: &Polygon| -> Vec<(i32, i32)> {
        let mut v: Vec<_> = poly.vertices.iter().map(|p| px(*p)).collect();
        if let Some(f) = v.first().copied() {
            v.push(f);
        }
        v
    };
    let fill = |poly: &Polygon, style: ShapeStyle| {
        let v: Vec<_> = poly.vertices.iter().map(|p| px(*p)).collect();
        root.draw(&plotters::element::Polygon::new(v, style))
            .map_err(|e| e.to_string())
    };
    let line = |pts: Vec<(i32, i32)>, style: ShapeStyle| {
        root.draw(&PathElement::new(pts, style)).map_err(|e| e.to_string())
    };

    for r in &scenario.file.regions {
        line(outline(&r.polygon()), RGBColor(120, 180, 120).stroke_width(1))?;
    }
    if let Some(b) = belief {
        for r in &b.regions {
            fill(&r.shadow, RGBColor(200, 200, 200).mix(0.3).filled())?;
            if let Some(s) = &r.region {
                fill(s, RGBColor(90, 90, 90).mix(0.35).filled())?;
            }
        }
    }
    for s in &scenario.file.statics {
        fill(&s.polygon(), RGBColor(110, 110, 110).filled())?;
    }
    if let Some(d) = &scenario.file.drawer {
        let f = world.drawer_fraction.unwrap_or(d.open_fraction);
        line(outline(&d.box_polygon(f)), RGBColor(150, 100, 40).stroke_width(2))?;
        let hp = px(d.handle_point(f));
        root.draw(&Circle::new(hp, 3, RGBColor(150, 100, 40).filled()))
            .map_err(|e| e.to_string())?;
    }
    for (i, o) in world.objects.iter().enumerate() {
        let poly = Polygon::rectangle(&o.pose, o.half_extents);
        fill(&poly, palette(i).mix(0.8).filled())?;
        line(outline(&poly), BLACK.stroke_width(1))?;
    }
    let arm = &scenario.file.arm;
    for c in arm.capsules(&world.robot) {
        line(vec![px(c.a), px(c.b)], BLACK.stroke_width(3))?;
    }
    for p in arm.joint_points(&world.robot) {
        root.draw(&Circle::new(px(p), 3, BLUE.filled()))
            .map_err(|e| e.to_string())?;
    }
    let cam = px(scenario.file.camera.position.0);
    root.draw(&Circle::new(cam, 5, MAGENTA.filled()))
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())?;
    Ok(())
}

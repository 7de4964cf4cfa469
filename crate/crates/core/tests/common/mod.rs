#![allow(dead_code)]

use std::path::PathBuf;

use tamper_core::geometry::{Polygon, Vec2};
use tamper_core::kinematics::{ArmSpec, Config};
use tamper_core::scenario::Scenario;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

pub fn scenario(rel: &str) -> Scenario {
    Scenario::load(&data(&format!("scenarios/{rel}"))).unwrap()
}

// plain geometry below, written without the library's collision code

fn seg_point(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0)
    };
    let (x, y) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (x * x + y * y).sqrt()
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

pub fn seg_seg(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> f64 {
    let crosses = orient(a, b, c) * orient(a, b, d) < 0.0 && orient(c, d, a) * orient(c, d, b) < 0.0;
    if crosses {
        return 0.0;
    }
    seg_point(a, b, c)
        .min(seg_point(a, b, d))
        .min(seg_point(c, d, a))
        .min(seg_point(c, d, b))
}

pub fn inside(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    let mut odd = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) && p.0 < a.0 + (p.1 - a.1) / (b.1 - a.1) * (b.0 - a.0) {
            odd = !odd;
        }
    }
    odd
}

pub fn pts(p: &Polygon) -> Vec<(f64, f64)> {
    p.vertices.iter().map(|v| (v.x, v.y)).collect()
}

/// Rectangle corners from center, half extents and heading.
pub fn rect(cx: f64, cy: f64, hx: f64, hy: f64, th: f64) -> Vec<(f64, f64)> {
    let (s, c) = th.sin_cos();
    [(hx, hy), (-hx, hy), (-hx, -hy), (hx, -hy)]
        .iter()
        .map(|&(x, y)| (cx + c * x - s * y, cy + s * x + c * y))
        .collect()
}

/// Joint positions and palm ends by direct trigonometry.
pub fn arm_segments(arm: &ArmSpec, q: &Config) -> Vec<((f64, f64), (f64, f64))> {
    let mut p = (arm.base.x, arm.base.y);
    let mut th = 0.0;
    let mut segs = Vec::new();
    for k in 0..3 {
        th += q[k];
        let n = (p.0 + arm.links[k] * th.cos(), p.1 + arm.links[k] * th.sin());
        segs.push((p, n));
        p = n;
    }
    let (sx, sy) = (-th.sin() * arm.palm_half_width, th.cos() * arm.palm_half_width);
    segs.push(((p.0 - sx, p.1 - sy), (p.0 + sx, p.1 + sy)));
    segs
}

/// True if the arm at `q` comes closer than its link radius to the polygon.
pub fn arm_hits(arm: &ArmSpec, q: &Config, poly: &[(f64, f64)]) -> bool {
    arm_segments(arm, q).iter().any(|&(a, b)| {
        inside(poly, a)
            || inside(poly, b)
            || (0..poly.len()).any(|i| seg_seg(a, b, poly[i], poly[(i + 1) % poly.len()]) < arm.link_radius)
    })
}

/// Statics and true object footprints of the scenario file.
pub fn world_polygons(sc: &Scenario) -> Vec<Vec<(f64, f64)>> {
    let f = &sc.file;
    let mut out: Vec<Vec<(f64, f64)>> = f
        .statics
        .iter()
        .map(|s| rect(s.pose.0.x, s.pose.0.y, s.half_extents.0.x, s.half_extents.0.y, s.pose.0.theta))
        .collect();
    for o in &f.objects {
        out.push(rect(o.pose.0.x, o.pose.0.y, o.half_extents.0.x, o.half_extents.0.y, o.pose.0.theta));
    }
    out
}

pub fn lerp(a: &Config, b: &Config, t: f64) -> Config {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t]
}

pub fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

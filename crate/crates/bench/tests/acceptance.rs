//! One line per acceptance criterion. Exits non-zero if any fails.

use std::collections::{HashMap, VecDeque};
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tamper_bench::replay::rerun_matches;
use tamper_bench::suite::{run_suite, RunOptions, Suite, SuiteReport};
use tamper_core::belief::{shrink_region, Belief};
use tamper_core::domain::{
    Action, ActionId, ActionKind, Constraint, Domain, GroundingConfidence, Literal, PartialAssignment, SymbolicState,
    VariableTable,
};
use tamper_core::executor::{repair, run_episode, run_tamp, run_tamper, RepairKind};
use tamper_core::geometry::{Polygon, Pose2, Vec2};
use tamper_core::grounding::{ground_pick, GroundCtx, Grounded};
use tamper_core::kinematics::{ArmSpec, Config};
use tamper_core::planner::{plan, ConstraintStack, PlanQuery};
use tamper_core::scenario::Scenario;
use tamper_core::trace::{Event, Method, RunTrace, Status};
use tamper_core::world::{Simulator, EXEC_STEP};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn scenario(rel: &str) -> Scenario {
    Scenario::load(&data(&format!("scenarios/{rel}"))).unwrap()
}

fn suite(name: &str) -> (SuiteReport, f64) {
    let s = Suite::load(&data(&format!("suites/{name}.toml"))).unwrap();
    let t = Instant::now();
    let r = run_suite(&s, &RunOptions::default()).unwrap();
    (r, t.elapsed().as_secs_f64())
}

fn successes(r: &SuiteReport, m: Method) -> (usize, usize) {
    let n = r.rows_for(m).count();
    (r.rows_for(m).filter(|x| x.status == Status::Success).count(), n)
}

fn mean(r: &SuiteReport, m: Method, f: impl Fn(&tamper_bench::suite::RunRow) -> f64) -> f64 {
    let v: Vec<f64> = r.rows_for(m).map(f).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c1(h: &(SuiteReport, f64)) -> Outcome {
    let (r, wall) = h;
    let t = successes(r, Method::Tamper);
    let b = successes(r, Method::Baseline);
    let gt = mean(r, Method::Tamper, |x| x.metrics.grasps as f64);
    let gb = mean(r, Method::Baseline, |x| x.metrics.grasps as f64);
    outcome(
        t == (10, 10) && b == (10, 10) && gt <= gb - 1.0 && *wall < 60.0,
        format!("tamper {}/{} baseline {}/{} grasps {gt:.2} vs {gb:.2} in {wall:.1}s", t.0, t.1, b.0, b.1),
    )
}

/// Last fault of a failed run: right after a push, and either a collision or a missed grasp.
fn push_fault(trace: &RunTrace) -> bool {
    trace
        .events
        .iter()
        .rev()
        .find_map(|e| match e {
            Event::ExecutionFault { op, after_push, .. } => Some(*after_push && (op == "close_gripper" || op == "trajectory")),
            _ => None,
        })
        .unwrap_or(false)
}

fn c2(k: &(SuiteReport, f64)) -> Outcome {
    let (r, wall) = k;
    let t = successes(r, Method::Tamper);
    let b = successes(r, Method::Baseline);
    let explained = r
        .rows_for(Method::Baseline)
        .filter(|x| x.status != Status::Success)
        .all(|x| push_fault(&x.trace));
    outcome(
        t == (10, 10) && b == (0, 10) && explained && *wall < 120.0,
        format!(
            "tamper {}/{} baseline {}/{} failures after push: {explained} in {wall:.1}s",
            t.0, t.1, b.0, b.1
        ),
    )
}

fn c3(h: &SuiteReport, k: &SuiteReport) -> Outcome {
    let a = |r| mean(r, Method::Tamper, |x| x.metrics.actions_executed as f64);
    let b = |r| mean(r, Method::Tamper, |x| x.metrics.behaviors_invoked as f64);
    let (ah, ak, bh, bk) = (a(h), a(k), b(h), b(k));
    outcome(
        (ah - 9.2).abs() <= 2.0 && (ak - 8.4).abs() <= 2.0 && (bh - 1.1).abs() <= 1.0 && (bk - 2.3).abs() <= 1.0,
        format!("actions {ah:.2} / {ak:.2}, behaviors {bh:.2} / {bk:.2}"),
    )
}

fn c4() -> Outcome {
    let sc = scenario("misc/observable.toml");
    let mut ok = sc.file.behaviors.is_empty();
    for seed in 1..=5 {
        let a = run_tamp(&sc, seed);
        let b = run_tamper(&sc, seed);
        ok &= a.status == Status::Success
            && serde_json::to_vec(&a.plans).unwrap() == serde_json::to_vec(&b.plans).unwrap()
            && serde_json::to_vec(&a.final_world).unwrap() == serde_json::to_vec(&b.final_world).unwrap();
    }
    outcome(ok, "5 seeds, plans and final worlds compared as bytes")
}

// -- criterion 5: a plain breadth-first search over explicit states

type Bits = Vec<bool>;

struct Rule {
    pre: Vec<(usize, bool)>,
    eff: Vec<(usize, bool)>,
}

fn bfs_len(rules: &[Rule], init: &Bits, goal: &[(usize, bool)], forbidden: &[(Vec<(usize, bool)>, usize)]) -> Option<usize> {
    let holds = |s: &Bits, lits: &[(usize, bool)]| lits.iter().all(|&(v, b)| s[v] == b);
    let mut seen: HashMap<Bits, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(init.clone(), 0);
    queue.push_back(init.clone());
    while let Some(s) = queue.pop_front() {
        let d = seen[&s];
        if holds(&s, goal) {
            return Some(d);
        }
        for (i, r) in rules.iter().enumerate() {
            if !holds(&s, &r.pre) || forbidden.iter().any(|(w, a)| *a == i && holds(&s, w)) {
                continue;
            }
            let mut n = s.clone();
            for &(v, b) in &r.eff {
                n[v] = b;
            }
            if !seen.contains_key(&n) {
                seen.insert(n.clone(), d + 1);
                queue.push_back(n);
            }
        }
    }
    None
}

fn random_lits(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    for v in 0..n {
        if rng.random_bool(p) {
            out.push((v, rng.random_bool(0.5)));
        }
    }
    out
}

fn assignment(lits: &[(usize, bool)]) -> PartialAssignment {
    PartialAssignment::new(lits.iter().map(|&(v, b)| Literal::new(v, b)).collect()).unwrap()
}

fn c5() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    let mut solvable = 0;
    for _ in 0..100 {
        let n = rng.random_range(3..=8);
        let rules: Vec<Rule> = (0..rng.random_range(2..=10))
            .map(|_| Rule {
                pre: random_lits(&mut rng, n, 0.3),
                eff: {
                    let mut e = random_lits(&mut rng, n, 0.3);
                    if e.is_empty() {
                        e.push((rng.random_range(0..n), rng.random_bool(0.5)));
                    }
                    e
                },
            })
            .collect();
        let init: Bits = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let mut goal = random_lits(&mut rng, n, 0.4);
        if goal.is_empty() {
            goal.push((0, true));
        }
        let forbidden: Vec<(Vec<(usize, bool)>, usize)> = (0..rng.random_range(0..4))
            .map(|_| (random_lits(&mut rng, n, 0.3), rng.random_range(0..rules.len())))
            .collect();

        let vars = VariableTable::new((0..n).map(|i| format!("v{i}"))).unwrap();
        let actions = rules
            .iter()
            .enumerate()
            .map(|(i, r)| Action {
                name: format!("a{i}"),
                params: vec![],
                kind: ActionKind::Abstract,
                confidence: GroundingConfidence::Reliable,
                pre: assignment(&r.pre),
                eff: assignment(&r.eff),
            })
            .collect();
        let d = Domain::new(vars, actions).unwrap();
        let mut stack = ConstraintStack::new();
        for (w, a) in &forbidden {
            stack.assert_constraint(Constraint {
                state_pred: assignment(w),
                forbidden_action: ActionId(*a),
            });
        }
        let mut s0 = SymbolicState::all_false(n);
        for (v, &b) in init.iter().enumerate() {
            s0.set(v, b);
        }
        let want = bfs_len(&rules, &init, &goal, &forbidden);
        let got = plan(&d, &PlanQuery::new(s0, assignment(&goal), &stack));
        let ok = match (want, got) {
            (None, Err(_)) => true,
            (Some(k), Ok(p)) => {
                solvable += 1;
                // replay the plan by hand
                let mut s = init.clone();
                let mut legal = p.steps.len() == k;
                for a in &p.steps {
                    let r = &rules[a.0];
                    legal &= r.pre.iter().all(|&(v, b)| s[v] == b);
                    legal &= !forbidden.iter().any(|(w, f)| *f == a.0 && w.iter().all(|&(v, b)| s[v] == b));
                    for &(v, b) in &r.eff {
                        s[v] = b;
                    }
                }
                legal && goal.iter().all(|&(v, b)| s[v] == b)
            }
            _ => false,
        };
        mismatches += usize::from(!ok);
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 30.0,
        format!("100 domains ({solvable} solvable), {mismatches} disagreements, {secs:.2}s"),
    )
}

// -- criterion 6: re-audit traces with a reading of the events only

fn audit(trace: &RunTrace, sc: &Scenario) -> (usize, usize) {
    let vars = &trace.header.variables;
    let parse = |when: &[String]| -> Vec<(usize, bool)> {
        when.iter()
            .map(|l| {
                let (name, val) = match l.strip_prefix('!') {
                    Some(n) => (n, false),
                    None => (l.as_str(), true),
                };
                (vars.iter().position(|v| v == name).expect("known variable"), val)
            })
            .collect()
    };
    let d = &sc.domain;
    let permanent: Vec<(Vec<(usize, bool)>, String)> = d
        .permanent_constraints()
        .iter()
        .map(|c| (parse(&d.assignment_text(&c.state_pred)), d.action(c.forbidden_action).id()))
        .collect();
    let mut active = permanent.clone();
    let (mut checked, mut bad) = (0, 0);
    for e in &trace.events {
        match e {
            Event::ConstraintsCleared { .. } => active = permanent.clone(),
            Event::ConstraintAsserted { when, forbid, .. } => active.push((parse(when), forbid.clone())),
            Event::PlanComputed { steps, .. } => {
                for s in steps {
                    let bits: Vec<bool> = s.state.chars().map(|c| c == '1').collect();
                    for (w, a) in &active {
                        checked += 1;
                        if *a == s.action && w.iter().all(|&(v, b)| bits[v] == b) {
                            bad += 1;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    (checked, bad)
}

fn c6(reports: &[&SuiteReport]) -> Outcome {
    let mut runs: Vec<(RunTrace, Scenario)> = Vec::new();
    let by_name: HashMap<String, Scenario> = ["hstack", "kitchen", "grocery", "misc"]
        .iter()
        .flat_map(|dir| std::fs::read_dir(data(&format!("scenarios/{dir}"))).unwrap())
        .map(|e| Scenario::load(&e.unwrap().path()).unwrap())
        .map(|s| (s.name().to_string(), s))
        .collect();
    for r in reports {
        for row in &r.rows {
            runs.push((row.trace.clone(), by_name[&row.problem].clone()));
        }
    }
    let rg = scenario("misc/regrasp.toml");
    runs.push((run_tamper(&rg, 1).trace, rg));
    let (mut checked, mut bad) = (0, 0);
    for (t, sc) in &runs {
        let (c, b) = audit(t, sc);
        checked += c;
        bad += b;
    }
    outcome(
        bad == 0 && checked > 0,
        format!("{} traces, {checked} step/constraint pairs, {bad} violations", runs.len()),
    )
}

// -- criterion 7

fn inside(poly: &Polygon, p: Vec2) -> bool {
    let v = &poly.vertices;
    let mut odd = false;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x) {
            odd = !odd;
        }
    }
    odd
}

fn shoelace(p: &Polygon) -> f64 {
    let v = &p.vertices;
    (0..v.len())
        .map(|i| v[i].x * v[(i + 1) % v.len()].y - v[(i + 1) % v.len()].x * v[i].y)
        .sum::<f64>()
        .abs()
        / 2.0
}

fn c7() -> Outcome {
    let eps = [0.0, 0.3, 0.6, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut queries, mut nonmono, mut full_miss, mut empty_hit, mut shadow_pts) = (0, 0, 0, 0, 0);
    for k in 1..=10 {
        let base = scenario(&format!("hstack/h{k:02}.toml"));
        let obs = Simulator::new(&base, 0).sense();
        let beliefs: Vec<Belief> = eps
            .iter()
            .map(|&e| {
                let mut sc = base.clone();
                sc.file.epsilon = e;
                Belief::new(&sc).fuse(&obs)
            })
            .collect();
        let ws = base.workspace();
        let objects: Vec<Polygon> = beliefs[0]
            .known
            .iter()
            .map(|(id, p)| Polygon::rectangle(p, beliefs[0].half_extents(id).unwrap()))
            .collect();
        for i in 0..100 {
            // every other query is drawn from inside some shadow
            let p = loop {
                let p = Vec2::new(rng.random_range(ws.min.x..ws.max.x), rng.random_range(ws.min.y..ws.max.y));
                if i % 2 == 0 || obs.shadows.iter().any(|s| inside(&s.polygon, p)) {
                    break p;
                }
            };
            queries += 1;
            let occ: Vec<bool> = beliefs.iter().map(|b| b.occupied_point(p)).collect();
            if occ.windows(2).any(|w| w[0] && !w[1]) {
                nonmono += 1;
            }
            let in_shadow = obs.shadows.iter().any(|s| inside(&s.polygon, p));
            let on_object = objects.iter().any(|o| inside(o, p));
            if in_shadow {
                shadow_pts += 1;
                if !occ[3] {
                    full_miss += 1;
                }
                if occ[0] && !on_object {
                    empty_hit += 1;
                }
            }
        }
    }
    let square = Polygon::rectangle(&Pose2::new(0.5, 0.5, 0.0), Vec2::new(0.5, 0.5));
    let area = shoelace(&shrink_region(&square, 0.6).unwrap());
    outcome(
        queries == 1000 && nonmono == 0 && full_miss == 0 && empty_hit == 0 && shadow_pts > 0 && (area - 0.36).abs() < 1e-12,
        format!(
            "{queries} queries ({shadow_pts} in shadow): {nonmono} non-monotone, {full_miss} missed at 1, {empty_hit} marked at 0; shrunk area {area:.4}"
        ),
    )
}

fn c8() -> Outcome {
    let mut ok = true;
    let mut n = 0;
    for (name, m) in [
        ("hstack/h05.toml", Method::Tamper),
        ("hstack/h05.toml", Method::Baseline),
        ("kitchen/k04.toml", Method::Tamper),
        ("kitchen/k04.toml", Method::Baseline),
        ("grocery/g01.toml", Method::Tamper),
        ("misc/regrasp.toml", Method::Tamper),
    ] {
        let sc = scenario(name);
        let a = run_episode(&sc, m, 42).trace;
        let b = run_episode(&sc, m, 42).trace;
        ok &= a.to_jsonl().into_bytes() == b.to_jsonl().into_bytes();
        ok &= rerun_matches(&RunTrace::from_jsonl(&a.to_jsonl()).unwrap(), &sc);
        n += 1;
    }
    outcome(ok, format!("{n} runs repeated and replayed"))
}

// -- criterion 9

fn segments(arm: &ArmSpec, q: &Config) -> Vec<(Vec2, Vec2)> {
    let mut p = arm.base;
    let mut th = 0.0;
    let mut out = Vec::new();
    for k in 0..3 {
        th += q[k];
        let n = p + Vec2::new(th.cos(), th.sin()) * arm.links[k];
        out.push((p, n));
        p = n;
    }
    let side = Vec2::new(-th.sin(), th.cos()) * arm.palm_half_width;
    out.push((p - side, p + side));
    out
}

fn seg_dist(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    let point = |a: Vec2, b: Vec2, p: Vec2| {
        let ab = b - a;
        let t = if ab.norm_squared() == 0.0 { 0.0 } else { ((p - a).dot(ab) / ab.norm_squared()).clamp(0.0, 1.0) };
        (a + ab * t).distance(p)
    };
    let o = |a: Vec2, b: Vec2, c: Vec2| (b - a).cross(c - a);
    if o(a, b, c) * o(a, b, d) < 0.0 && o(c, d, a) * o(c, d, b) < 0.0 {
        return 0.0;
    }
    point(a, b, c).min(point(a, b, d)).min(point(c, d, a)).min(point(c, d, b))
}

fn clear(arm: &ArmSpec, q: &Config, world: &[Polygon]) -> bool {
    segments(arm, q).iter().all(|&(a, b)| {
        world.iter().all(|w| {
            let v = &w.vertices;
            !inside(w, a) && !inside(w, b) && (0..v.len()).all(|i| seg_dist(a, b, v[i], v[(i + 1) % v.len()]) >= arm.link_radius)
        })
    })
}

fn c9() -> Outcome {
    // displacement: chain back to the start of the stored step
    let sc = scenario("hstack/h01.toml");
    let arm = &sc.file.arm;
    let b = Belief::new(&sc).fuse(&Simulator::new(&sc, 0).sense());
    let ctx = GroundCtx {
        scenario: &sc,
        belief: &b,
        start: arm.home,
        budget_s: 2.0,
    };
    let g = ground_pick("L", &ctx, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let body = g.approach().unwrap().clone();
    let current = [arm.home[0] - 0.1, arm.home[1] + 0.05, arm.home[2]];
    let mut world: Vec<Polygon> = sc.file.statics.iter().map(|s| s.polygon()).collect();
    world.extend(sc.file.objects.iter().map(|o| o.footprint()));
    let same = |a: &Config, b: &Config| (0..3).all(|k| (a[k] - b[k]).abs() < 1e-9);
    let chained = match repair(&sc, &b, current, &g, 2.0, &mut ChaCha8Rng::seed_from_u64(5)) {
        Ok((g2, RepairKind::JoinStart)) => {
            let t = g2.approach().unwrap();
            let through_start = t.waypoints.iter().any(|q| same(q, &body.start()));
            let dense = t.waypoints.windows(2).all(|w| {
                let d = (0..3).map(|k| (w[1][k] - w[0][k]).abs()).fold(0.0, f64::max);
                let n = (d / EXEC_STEP).ceil().max(1.0) as usize;
                (0..=n).all(|i| {
                    let s = i as f64 / n as f64;
                    let q = [0, 1, 2].map(|k| w[0][k] + (w[1][k] - w[0][k]) * s);
                    clear(arm, &q, &world)
                })
            });
            same(&t.start(), &current) && same(&t.end(), &body.end()) && through_start && dense
        }
        _ => false,
    };

    // failure: the real grasp cannot be placed in the tray, so neither end can be rejoined
    let rg = scenario("misc/regrasp.toml");
    let r = run_tamper(&rg, 1);
    let ev = &r.trace.events;
    let single = ev
        .iter()
        .position(|e| matches!(e, Event::RepairOutcome { outcome, .. } if outcome == "Failed"))
        .and_then(|i| {
            let j = i + ev[i..].iter().position(|e| matches!(e, Event::PlanComputed { .. }))?;
            let asserted: Vec<(&Vec<String>, &String)> = ev[i..j]
                .iter()
                .filter_map(|e| match e {
                    Event::ConstraintAsserted { when, forbid, .. } => Some((when, forbid)),
                    _ => None,
                })
                .collect();
            let [(when, forbid)] = asserted[..] else { return Some(false) };
            let vars = &r.trace.header.variables;
            let lits: Vec<(usize, bool)> = when
                .iter()
                .map(|l| match l.strip_prefix('!') {
                    Some(n) => (vars.iter().position(|v| v == n).unwrap(), false),
                    None => (vars.iter().position(|v| v == l).unwrap(), true),
                })
                .collect();
            let Event::PlanComputed { steps, .. } = &ev[j] else { return Some(false) };
            let respected = steps.iter().all(|s| {
                let bits: Vec<bool> = s.state.chars().map(|c| c == '1').collect();
                !(s.action == *forbid && lits.iter().all(|&(v, b)| bits[v] == b))
            });
            // certificate: the grasp actually taken puts X outside the tray at the planned end
            let outcome = ev[..i].iter().rev().find_map(|e| match e {
                Event::BehaviorOutcome { world, success: true, .. } => Some(world),
                _ => None,
            })?;
            let x = outcome.objects.iter().find(|o| o.id == "X")?;
            let ee = rg.file.arm.fk(&outcome.robot);
            let rel = ee.inverse().compose(&x.pose);
            let step = r.plans[0].steps.iter().find(|s| s.name == "place(X,tray)")?;
            let Some(Grounded::Place { traj, .. }) = &step.grounded else { return Some(false) };
            let at = rg.file.arm.fk(&traj.end()).compose(&rel);
            let fp = Polygon::rectangle(&at, x.half_extents);
            let tray = rg.region("tray")?.polygon();
            let certified = fp.vertices.iter().any(|v| !inside(&tray, *v));
            Some(respected && certified && forbid == "place(X,tray)")
        })
        .unwrap_or(false);
    outcome(
        chained && single && r.status == Status::Success,
        format!("displaced chain valid: {chained}; failed repair -> one respected constraint: {single}"),
    )
}

fn c10(g: &SuiteReport) -> Outcome {
    let sc = scenario("grocery/g01.toml");
    let cart = sc.region("cart").unwrap().polygon();
    let label = |id: &str| sc.object(id).unwrap().label().to_string();
    let (ok, n) = successes(g, Method::Tamper);
    let mut via = true;
    let mut worst = 0;
    let mut on_eggs = 0;
    for row in g.rows_for(Method::Tamper) {
        let mut used = false;
        for e in &row.trace.events {
            match e {
                Event::BehaviorOutcome {
                    behavior,
                    success: true,
                    grasps,
                    ..
                } if behavior == "pick_identity" => {
                    used = true;
                    worst = worst.max(*grasps);
                }
                Event::ActionExecuted { action, world, .. } if action.starts_with("place(apples") => {
                    // after this place: apples in the cart with eggs already there
                    let in_cart = |lab: &str| {
                        world
                            .objects
                            .iter()
                            .filter(|o| label(&o.id) == lab)
                            .any(|o| inside(&cart, o.pose.position()))
                    };
                    if in_cart("apples") && in_cart("eggs") {
                        on_eggs += 1;
                    }
                }
                _ => {}
            }
        }
        via &= used;
    }
    outcome(
        ok == 5 && n == 5 && via && worst <= 2 && on_eggs == 0,
        format!("{ok}/{n} via pick_identity: {via}, max grasps {worst}, apples on eggs {on_eggs}"),
    )
}

fn main() {
    let h = suite("hstack");
    let k = suite("kitchen");
    let g = suite("grocery");
    let results = [
        ("H-stacking", c1(&h)),
        ("Kitchen", c2(&k)),
        ("TAMPER means", c3(&h.0, &k.0)),
        ("Reduction to TAMP", c4()),
        ("Planner minimality", c5()),
        ("Constraint soundness", c6(&[&h.0, &k.0, &g.0])),
        ("Occlusion model", c7()),
        ("Trace determinism", c8()),
        ("Repair contract", c9()),
        ("Grocery", c10(&g.0)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {:2} {:<22} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}

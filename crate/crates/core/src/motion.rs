//! RRT-Connect in joint space with random shortcutting.

use rand::Rng;
use thiserror::Error;

use crate::collision::ArmChecker;
use crate::kinematics::{l2, max_norm, Config, Trajectory};

pub const EXTEND_STEP: f64 = 0.15;
/// Resolution of edge validation and of the returned waypoints (rad, max-norm).
pub const CHECK_STEP: f64 = 0.015;
pub const SHORTCUT_ATTEMPTS: usize = 100;
/// Planning budgets are counted in tree-growth iterations, not wall time,
/// so results do not depend on machine load.
pub const ITERATIONS_PER_SECOND: f64 = 1000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("start configuration is invalid")]
    InvalidStart,
    #[error("goal set is empty")]
    GoalSetEmpty,
    #[error("no goal configuration is valid")]
    GoalsInvalid,
    #[error("no path found within {iterations} iterations")]
    BudgetExhausted { iterations: usize },
}

pub struct MotionQuery<'a> {
    pub start: Config,
    pub goals: Vec<Config>,
    pub checker: ArmChecker<'a>,
    pub budget_s: f64,
}

struct Tree {
    nodes: Vec<Config>,
    parent: Vec<Option<usize>>,
}

impl Tree {
    fn new() -> Self {
        Tree {
            nodes: Vec::new(),
            parent: Vec::new(),
        }
    }

    fn add(&mut self, q: Config, parent: Option<usize>) -> usize {
        self.nodes.push(q);
        self.parent.push(parent);
        self.nodes.len() - 1
    }

    fn nearest(&self, q: &Config) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = l2(n, q);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }

    /// Node sequence from the root down to `i`.
    fn branch(&self, mut i: usize) -> Vec<Config> {
        let mut out = vec![self.nodes[i]];
        while let Some(p) = self.parent[i] {
            out.push(self.nodes[p]);
            i = p;
        }
        out.reverse();
        out
    }
}

enum Extend {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

fn steer(from: &Config, to: &Config) -> (Config, bool) {
    let d = l2(from, to);
    if d <= EXTEND_STEP {
        return (*to, true);
    }
    let t = EXTEND_STEP / d;
    (std::array::from_fn(|k| from[k] + (to[k] - from[k]) * t), false)
}

fn extend(tree: &mut Tree, target: &Config, checker: &ArmChecker) -> Extend {
    let near = tree.nearest(target);
    let (q, reached) = steer(&tree.nodes[near], target);
    if !checker.edge_valid(&tree.nodes[near], &q, CHECK_STEP) {
        return Extend::Trapped;
    }
    let i = tree.add(q, Some(near));
    if reached {
        Extend::Reached(i)
    } else {
        Extend::Advanced(i)
    }
}

fn connect(tree: &mut Tree, target: &Config, checker: &ArmChecker) -> Option<usize> {
    loop {
        match extend(tree, target, checker) {
            Extend::Trapped => return None,
            Extend::Reached(i) => return Some(i),
            Extend::Advanced(_) => {}
        }
    }
}

pub fn iterations_for(budget_s: f64) -> usize {
    ((budget_s * ITERATIONS_PER_SECOND).round() as usize).max(1)
}

pub fn solve<R: Rng>(q: &MotionQuery, rng: &mut R) -> Result<Trajectory, MotionError> {
    let checker = &q.checker;
    if q.goals.is_empty() {
        return Err(MotionError::GoalSetEmpty);
    }
    if !checker.is_valid(&q.start) {
        return Err(MotionError::InvalidStart);
    }
    if q.goals.iter().any(|g| max_norm(g, &q.start) < 1e-12) {
        return Ok(Trajectory::stationary(q.start));
    }
    let goals: Vec<Config> = q.goals.iter().copied().filter(|g| checker.is_valid(g)).collect();
    if goals.is_empty() {
        return Err(MotionError::GoalsInvalid);
    }
    for g in &goals {
        if checker.edge_valid(&q.start, g, CHECK_STEP) {
            return Ok(Trajectory::new(vec![q.start, *g]).densified(CHECK_STEP));
        }
    }

    let iterations = iterations_for(q.budget_s);
    let limits = checker.arm.limits;
    let mut start_tree = Tree::new();
    start_tree.add(q.start, None);
    let mut goal_tree = Tree::new();
    let mut pending = goals.into_iter();
    let mut from_start = true;
    let mut found = None;
    for _ in 0..iterations {
        if let Some(g) = pending.next() {
            goal_tree.add(g, None);
        }
        let sample: Config = std::array::from_fn(|k| rng.random_range(limits[k][0]..=limits[k][1]));
        let (a, b) = if from_start {
            (&mut start_tree, &mut goal_tree)
        } else {
            (&mut goal_tree, &mut start_tree)
        };
        let new = match extend(a, &sample, checker) {
            Extend::Trapped => None,
            Extend::Advanced(i) | Extend::Reached(i) => Some(i),
        };
        if let Some(i) = new {
            let target = a.nodes[i];
            if let Some(j) = connect(b, &target, checker) {
                found = Some(if from_start { (i, j) } else { (j, i) });
                break;
            }
        }
        from_start = !from_start;
    }
    let Some((si, gi)) = found else {
        return Err(MotionError::BudgetExhausted { iterations });
    };
    let mut path = start_tree.branch(si);
    let mut tail = goal_tree.branch(gi);
    tail.reverse();
    // the two trees meet at the same configuration
    path.extend(tail.into_iter().skip(1));
    let path = shortcut(path, checker, rng);
    Ok(Trajectory::new(path).densified(CHECK_STEP))
}

fn shortcut<R: Rng>(mut path: Vec<Config>, checker: &ArmChecker, rng: &mut R) -> Vec<Config> {
    for _ in 0..SHORTCUT_ATTEMPTS {
        if path.len() < 3 {
            break;
        }
        let i = rng.random_range(0..path.len() - 2);
        let j = rng.random_range(i + 2..path.len());
        if checker.edge_valid(&path[i], &path[j], CHECK_STEP) {
            path.drain(i + 1..j);
        }
    }
    path
}

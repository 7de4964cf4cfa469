//! Shortest constraint-respecting task plans by breadth-first layering.
//!
//! Layers grow one step at a time, which is the explicit-state equivalent of
//! solving a bounded-horizon encoding at k = 0, 1, 2, ... . Once the first
//! goal layer is known, states that can still reach a goal in the remaining
//! steps are marked backwards and the plan is read off greedily by smallest
//! action index, which yields the lexicographically smallest shortest plan.

use std::collections::HashMap;

use thiserror::Error;

use crate::domain::{apply_unchecked, holds, ActionId, Constraint, Domain, PartialAssignment, SymbolicState, TaskPlan};

pub const DEFAULT_HORIZON: usize = 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("no plan exists under the current constraints")]
    NoPlanExists,
    #[error("shortest plan has {shortest} steps, horizon limit is {limit}")]
    HorizonExceeded { shortest: usize, limit: usize },
    #[error("query state width {found} does not match domain width {expected}")]
    Malformed { found: usize, expected: usize },
}

/// Constraint store with push/assert semantics; `clear` empties every frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintStack {
    frames: Vec<Vec<Constraint>>,
    clears: u32,
}

impl ConstraintStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_frame(&mut self) {
        self.frames.push(Vec::new());
    }

    /// Adds `c` to the top frame. Duplicates are ignored.
    pub fn assert_constraint(&mut self, c: Constraint) -> bool {
        if self.iter().any(|x| *x == c) {
            return false;
        }
        if self.frames.is_empty() {
            self.push_frame();
        }
        self.frames.last_mut().unwrap().push(c);
        true
    }

    pub fn clear(&mut self) {
        self.frames.clear();
        self.clears += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.frames.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.frames.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clears(&self) -> u32 {
        self.clears
    }

    /// Index of the current constraint epoch (number of clears so far).
    pub fn epoch(&self) -> u32 {
        self.clears
    }

    /// Motion budget escalation, doubled on every clear.
    pub fn budget_multiplier(&self) -> f64 {
        2f64.powi(self.clears as i32)
    }
}

#[derive(Clone, Debug)]
pub struct PlanQuery<'a> {
    pub init: SymbolicState,
    pub goal: PartialAssignment,
    pub horizon_limit: usize,
    pub constraints: &'a ConstraintStack,
}

impl<'a> PlanQuery<'a> {
    pub fn new(init: SymbolicState, goal: PartialAssignment, constraints: &'a ConstraintStack) -> Self {
        Self {
            init,
            goal,
            horizon_limit: DEFAULT_HORIZON,
            constraints,
        }
    }
}

pub fn plan(domain: &Domain, q: &PlanQuery<'_>) -> Result<TaskPlan, PlanError> {
    if q.init.width() != domain.width() {
        return Err(PlanError::Malformed {
            found: q.init.width(),
            expected: domain.width(),
        });
    }
    let active: Vec<&Constraint> = q
        .constraints
        .iter()
        .chain(domain.permanent_constraints())
        .collect();
    let allowed = |s: &SymbolicState, a: ActionId| {
        domain.applicable(s, a) && !active.iter().any(|c| domain.violates(s, a, c))
    };
    let successor = |s: &SymbolicState, a: ActionId| apply_unchecked(s, &domain.action(a).eff);

    let mut depth: HashMap<SymbolicState, usize> = HashMap::new();
    depth.insert(q.init.clone(), 0);
    let mut layers: Vec<Vec<SymbolicState>> = vec![vec![q.init.clone()]];
    let goal_depth = loop {
        let k = layers.len() - 1;
        if layers[k].iter().any(|s| holds(s, &q.goal)) {
            break k;
        }
        let mut next = Vec::new();
        for s in &layers[k] {
            for a in domain.action_ids() {
                if !allowed(s, a) {
                    continue;
                }
                let t = successor(s, a);
                if !depth.contains_key(&t) {
                    depth.insert(t.clone(), k + 1);
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            return Err(PlanError::NoPlanExists);
        }
        layers.push(next);
    };
    if goal_depth > q.horizon_limit {
        return Err(PlanError::HorizonExceeded {
            shortest: goal_depth,
            limit: q.horizon_limit,
        });
    }

    // good[k] holds the states of layer k that reach a goal in goal_depth - k steps.
    let mut good: Vec<std::collections::HashSet<SymbolicState>> =
        vec![Default::default(); goal_depth + 1];
    good[goal_depth] = layers[goal_depth]
        .iter()
        .filter(|s| holds(s, &q.goal))
        .cloned()
        .collect();
    for k in (0..goal_depth).rev() {
        let (lower, upper) = good.split_at_mut(k + 1);
        let ahead = &upper[0];
        for s in &layers[k] {
            let reaches = domain
                .action_ids()
                .any(|a| allowed(s, a) && ahead.contains(&successor(s, a)));
            if reaches {
                lower[k].insert(s.clone());
            }
        }
    }

    let mut steps = Vec::with_capacity(goal_depth);
    let mut states = vec![q.init.clone()];
    for k in 0..goal_depth {
        let s = states.last().unwrap();
        let (a, t) = domain
            .action_ids()
            .filter(|&a| allowed(s, a))
            .map(|a| (a, successor(s, a)))
            .find(|(_, t)| good[k + 1].contains(t))
            .expect("marked state has a marked successor");
        steps.push(a);
        states.push(t);
    }
    Ok(TaskPlan { steps, states })
}

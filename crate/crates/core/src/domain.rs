//! Symbolic planning domain: boolean state variables, ground actions with
//! pre/eff literal sets, and exclusion constraints.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DOMAIN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("state does not satisfy the precondition of `{action}`")]
    PreconditionUnsatisfied { action: String },
    #[error("contradictory literals on variable `{0}`")]
    Contradiction(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("action `{action}` expects {expected} parameters, binding has {found}")]
    BindingArity {
        action: String,
        expected: usize,
        found: usize,
    },
    #[error("domain schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("state has {found} variables, domain has {expected}")]
    StateWidth { found: usize, expected: usize },
    #[error("domain file: {0}")]
    Parse(String),
}

/// Fixed-order variable names; the order is part of the domain's identity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VariableTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl VariableTable {
    pub fn new<I, S>(names: I) -> Result<Self, DomainError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = VariableTable::default();
        for name in names {
            let name = name.into();
            if table.index.contains_key(&name) {
                return Err(DomainError::DuplicateVariable(name));
            }
            table.index.insert(name.clone(), table.names.len());
            table.names.push(name);
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn resolve(&self, name: &str) -> Result<usize, DomainError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| DomainError::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Assignment to every variable of a domain, one bit per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolicState {
    bits: FixedBitSet,
}

impl SymbolicState {
    pub fn all_false(width: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(width),
        }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, var: usize) -> bool {
        self.bits.contains(var)
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.bits.set(var, value);
    }

    pub fn true_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    /// `'0'`/`'1'` string in variable order.
    pub fn to_bitstring(&self) -> String {
        (0..self.width())
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self, DomainError> {
        let mut state = Self::all_false(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => state.set(i, true),
                other => {
                    return Err(DomainError::Parse(format!(
                        "invalid state character `{other}`"
                    )))
                }
            }
        }
        Ok(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub value: bool,
}

impl Literal {
    pub fn new(var: usize, value: bool) -> Self {
        Self { var, value }
    }
}

/// A conjunction of literals, at most one per variable, sorted by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    literals: Vec<Literal>,
}

impl PartialAssignment {
    pub fn new(mut literals: Vec<Literal>) -> Result<Self, DomainError> {
        literals.sort();
        literals.dedup();
        for pair in literals.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(DomainError::Contradiction(format!("#{}", pair[0].var)));
            }
        }
        Ok(Self { literals })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The complete assignment describing `state`.
    pub fn of_state(state: &SymbolicState) -> Self {
        Self {
            literals: (0..state.width())
                .map(|v| Literal::new(v, state.get(v)))
                .collect(),
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn mentions(&self, var: usize) -> bool {
        self.literals.iter().any(|l| l.var == var)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(pub usize);

/// Which gap source, if any, the grounding of an action is subject to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundingConfidence {
    #[default]
    Reliable,
    GapPerception,
    GapDynamics,
    GapIdentity,
}

/// Geometric meaning of an action schema, used to dispatch grounding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Pick,
    Place,
    PushPick,
    OpenDrawer,
    #[default]
    Abstract,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub name: String,
    pub params: Vec<String>,
    pub kind: ActionKind,
    pub confidence: GroundingConfidence,
    pub pre: PartialAssignment,
    pub eff: PartialAssignment,
}

impl Action {
    /// Ground identifier such as `pick(S,init_S)`.
    pub fn id(&self) -> String {
        if self.params.is_empty() {
            self.name.clone()
        } else {
            format!("{}({})", self.name, self.params.join(","))
        }
    }
}

/// Forbids `forbidden_action` from every state satisfying `state_pred`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub state_pred: PartialAssignment,
    pub forbidden_action: ActionId,
}

/// Structured reading of a variable name, used to map symbols onto geometry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VariableMeaning {
    /// `at(object,region)`
    At { object: String, region: String },
    /// `holding(object)`
    Holding { object: String },
    /// `handempty`
    HandEmpty,
    /// `open(fixture)`
    Open { fixture: String },
    Other,
}

impl VariableMeaning {
    pub fn parse(name: &str) -> Self {
        if name == "handempty" {
            return Self::HandEmpty;
        }
        let Some((head, rest)) = name.split_once('(') else {
            return Self::Other;
        };
        let Some(args) = rest.strip_suffix(')') else {
            return Self::Other;
        };
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        match (head, args.as_slice()) {
            ("at", [o, r]) => Self::At {
                object: o.to_string(),
                region: r.to_string(),
            },
            ("holding", [o]) => Self::Holding {
                object: o.to_string(),
            },
            ("open", [f]) => Self::Open {
                fixture: f.to_string(),
            },
            _ => Self::Other,
        }
    }

    pub fn object(&self) -> Option<&str> {
        match self {
            Self::At { object, .. } | Self::Holding { object } => Some(object),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    variables: VariableTable,
    meanings: Vec<VariableMeaning>,
    actions: Vec<Action>,
    action_index: HashMap<String, ActionId>,
    permanent: Vec<Constraint>,
}

impl Domain {
    pub fn new(variables: VariableTable, actions: Vec<Action>) -> Result<Self, DomainError> {
        let width = variables.len();
        let mut action_index = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            for lit in a.pre.literals().iter().chain(a.eff.literals()) {
                if lit.var >= width {
                    return Err(DomainError::UnknownVariable(format!("#{}", lit.var)));
                }
            }
            action_index.insert(a.id(), ActionId(i));
        }
        let meanings = variables
            .names()
            .iter()
            .map(|n| VariableMeaning::parse(n))
            .collect();
        Ok(Self {
            variables,
            meanings,
            actions,
            action_index,
            permanent: Vec::new(),
        })
    }

    pub fn variables(&self) -> &VariableTable {
        &self.variables
    }

    pub fn width(&self) -> usize {
        self.variables.len()
    }

    pub fn meaning(&self, var: usize) -> &VariableMeaning {
        &self.meanings[var]
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &Action {
        &self.actions[id.0]
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len()).map(ActionId)
    }

    pub fn find_action(&self, ident: &str) -> Result<ActionId, DomainError> {
        self.action_index
            .get(ident)
            .copied()
            .ok_or_else(|| DomainError::UnknownAction(ident.to_string()))
    }

    /// Constraints that belong to the problem itself and are never cleared.
    pub fn permanent_constraints(&self) -> &[Constraint] {
        &self.permanent
    }

    pub fn add_permanent_constraint(&mut self, c: Constraint) {
        self.permanent.push(c);
    }

    /// Parses `name`, `!name` or `not name`.
    pub fn parse_literal(&self, text: &str) -> Result<Literal, DomainError> {
        let text = text.trim();
        let (name, value) = if let Some(rest) = text.strip_prefix('!') {
            (rest.trim(), false)
        } else if let Some(rest) = text.strip_prefix("not ") {
            (rest.trim(), false)
        } else {
            (text, true)
        };
        Ok(Literal::new(self.variables.resolve(name)?, value))
    }

    pub fn assignment<S: AsRef<str>>(&self, literals: &[S]) -> Result<PartialAssignment, DomainError> {
        let lits = literals
            .iter()
            .map(|l| self.parse_literal(l.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        PartialAssignment::new(lits).map_err(|e| match e {
            DomainError::Contradiction(v) => {
                let idx: usize = v.trim_start_matches('#').parse().unwrap_or(0);
                DomainError::Contradiction(self.variables.name(idx).to_string())
            }
            other => other,
        })
    }

    /// State with exactly the named variables true.
    pub fn state_from_true<S: AsRef<str>>(&self, names: &[S]) -> Result<SymbolicState, DomainError> {
        let mut s = SymbolicState::all_false(self.width());
        for n in names {
            s.set(self.variables.resolve(n.as_ref())?, true);
        }
        Ok(s)
    }

    pub fn literal_text(&self, lit: &Literal) -> String {
        let name = self.variables.name(lit.var);
        if lit.value {
            name.to_string()
        } else {
            format!("!{name}")
        }
    }

    pub fn assignment_text(&self, pred: &PartialAssignment) -> Vec<String> {
        pred.literals().iter().map(|l| self.literal_text(l)).collect()
    }

    pub fn true_names(&self, state: &SymbolicState) -> Vec<String> {
        state
            .true_vars()
            .map(|v| self.variables.name(v).to_string())
            .collect()
    }

    pub fn satisfies(&self, s: &SymbolicState, pred: &PartialAssignment) -> Result<bool, DomainError> {
        if s.width() != self.width() {
            return Err(DomainError::StateWidth {
                found: s.width(),
                expected: self.width(),
            });
        }
        for lit in pred.literals() {
            if lit.var >= self.width() {
                return Err(DomainError::UnknownVariable(format!("#{}", lit.var)));
            }
        }
        Ok(holds(s, pred))
    }

    pub fn applicable(&self, s: &SymbolicState, a: ActionId) -> bool {
        holds(s, &self.action(a).pre)
    }

    pub fn apply(&self, s: &SymbolicState, a: ActionId) -> Result<SymbolicState, DomainError> {
        let action = self.action(a);
        if !self.satisfies(s, &action.pre)? {
            return Err(DomainError::PreconditionUnsatisfied { action: action.id() });
        }
        Ok(apply_unchecked(s, &action.eff))
    }

    pub fn violates(&self, s: &SymbolicState, a: ActionId, c: &Constraint) -> bool {
        c.forbidden_action == a && holds(s, &c.state_pred)
    }

    /// Checks a plan end to end: preconditions, goal, and every constraint.
    pub fn validate_plan(
        &self,
        init: &SymbolicState,
        goal: &PartialAssignment,
        steps: &[ActionId],
        constraints: &[Constraint],
    ) -> Result<TaskPlan, PlanValidationError> {
        let mut states = vec![init.clone()];
        for (i, &a) in steps.iter().enumerate() {
            let s = states.last().unwrap();
            if let Some(c) = constraints.iter().find(|c| self.violates(s, a, c)) {
                return Err(PlanValidationError::ConstraintViolated {
                    step: i,
                    action: self.action(a).id(),
                    constraint: self.assignment_text(&c.state_pred),
                });
            }
            let next = self
                .apply(s, a)
                .map_err(|_| PlanValidationError::Precondition { step: i })?;
            states.push(next);
        }
        if !holds(states.last().unwrap(), goal) {
            return Err(PlanValidationError::GoalUnsatisfied);
        }
        Ok(TaskPlan {
            steps: steps.to_vec(),
            states,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, DomainError> {
        let file: DomainFile = toml::from_str(text).map_err(|e| DomainError::Parse(e.to_string()))?;
        file.build()
    }

    pub fn load(path: &Path) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DomainError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

pub(crate) fn holds(s: &SymbolicState, pred: &PartialAssignment) -> bool {
    pred.literals().iter().all(|l| s.get(l.var) == l.value)
}

pub(crate) fn apply_unchecked(s: &SymbolicState, eff: &PartialAssignment) -> SymbolicState {
    let mut next = s.clone();
    for lit in eff.literals() {
        next.set(lit.var, lit.value);
    }
    next
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanValidationError {
    #[error("step {step}: precondition unsatisfied")]
    Precondition { step: usize },
    #[error("step {step}: `{action}` violates constraint {constraint:?}")]
    ConstraintViolated {
        step: usize,
        action: String,
        constraint: Vec<String>,
    },
    #[error("final state does not satisfy the goal")]
    GoalUnsatisfied,
}

/// A sequence of ground actions and the states it induces (`states.len() == steps.len() + 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct TaskPlan {
    pub steps: Vec<ActionId>,
    pub states: Vec<SymbolicState>,
}

impl TaskPlan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for TaskPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "#{}", a.0)?;
        }
        write!(f, "]")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    schema_version: u32,
    variables: Vec<String>,
    #[serde(default)]
    actions: Vec<ActionSchemaFile>,
    #[serde(default)]
    constraints: Vec<ConstraintFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionSchemaFile {
    name: String,
    #[serde(default)]
    kind: ActionKind,
    #[serde(default)]
    confidence: GroundingConfidence,
    #[serde(default)]
    params: Vec<String>,
    #[serde(default)]
    pre: Vec<String>,
    #[serde(default)]
    eff: Vec<String>,
    #[serde(default)]
    bindings: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintFile {
    when: Vec<String>,
    forbid: String,
}

impl DomainFile {
    fn build(self) -> Result<Domain, DomainError> {
        if self.schema_version != DOMAIN_SCHEMA_VERSION {
            return Err(DomainError::SchemaVersion {
                found: self.schema_version,
                expected: DOMAIN_SCHEMA_VERSION,
            });
        }
        let variables = VariableTable::new(self.variables)?;
        let shell = Domain::new(variables.clone(), Vec::new())?;
        let mut actions = Vec::new();
        for schema in &self.actions {
            let bindings = if schema.params.is_empty() && schema.bindings.is_empty() {
                vec![Vec::new()]
            } else {
                schema.bindings.clone()
            };
            for binding in bindings {
                if binding.len() != schema.params.len() {
                    return Err(DomainError::BindingArity {
                        action: schema.name.clone(),
                        expected: schema.params.len(),
                        found: binding.len(),
                    });
                }
                let subst = |text: &String| substitute(text, &schema.params, &binding);
                let pre: Vec<String> = schema.pre.iter().map(subst).collect();
                let eff: Vec<String> = schema.eff.iter().map(subst).collect();
                actions.push(Action {
                    name: schema.name.clone(),
                    params: binding.clone(),
                    kind: schema.kind,
                    confidence: schema.confidence,
                    pre: shell.assignment(&pre)?,
                    eff: shell.assignment(&eff)?,
                });
            }
        }
        let mut domain = Domain::new(variables, actions)?;
        for c in &self.constraints {
            let state_pred = domain.assignment(&c.when)?;
            let forbidden_action = domain.find_action(&c.forbid)?;
            domain.add_permanent_constraint(Constraint {
                state_pred,
                forbidden_action,
            });
        }
        Ok(domain)
    }
}

fn substitute(text: &str, params: &[String], binding: &[String]) -> String {
    let mut out = text.to_string();
    // Longest names first so `?ob` is not clobbered by `?o`.
    let mut order: Vec<usize> = (0..params.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(params[i].len()));
    for i in order {
        out = out.replace(&format!("?{}", params[i]), &binding[i]);
    }
    out
}

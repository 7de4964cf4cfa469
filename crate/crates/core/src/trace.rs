//! Line-delimited JSON run traces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::Belief;
use crate::kinematics::Config;
use crate::world::WorldSnapshot;

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tamp,
    Tamper,
    Baseline,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Tamp => "tamp",
            Method::Tamper => "tamper",
            Method::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tamp" => Ok(Method::Tamp),
            "tamper" => Ok(Method::Tamper),
            "baseline" | "base" => Ok(Method::Baseline),
            _ => Err(format!("unknown method {s}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    NoSolution,
    Aborted,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub method: Method,
    pub epsilon: f64,
    pub variables: Vec<String>,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracedStep {
    pub action: String,
    pub gap: bool,
    /// Symbolic state the step is planned from, as a bitstring.
    pub state: String,
    pub end: Option<Config>,
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Sense {
        detected: Vec<String>,
        state: String,
        belief: Belief,
    },
    PlanComputed {
        epoch: u32,
        steps: Vec<TracedStep>,
    },
    ConstraintAsserted {
        epoch: u32,
        when: Vec<String>,
        forbid: String,
        reason: String,
    },
    ConstraintsCleared {
        epoch: u32,
        budget_multiplier: f64,
    },
    ActionExecuted {
        action: String,
        exec_time: f64,
        world: WorldSnapshot,
    },
    BehaviorInvoked {
        action: String,
        behavior: String,
    },
    BehaviorOutcome {
        action: String,
        behavior: String,
        success: bool,
        step: Option<usize>,
        reason: Option<String>,
        grasps: usize,
        world: WorldSnapshot,
    },
    RepairOutcome {
        action: String,
        outcome: String,
    },
    ExecutionFault {
        action: String,
        /// Sim operation that failed, e.g. `trajectory`, `close_gripper`.
        op: String,
        error: String,
        after_push: bool,
        world: WorldSnapshot,
    },
    Finished {
        status: Status,
        actions_executed: usize,
        behaviors_invoked: usize,
        grasps: usize,
        exec_s: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub events: Vec<Event>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace schema version {found} does not match {expected}")]
    SchemaMismatch { found: u32, expected: u32 },
    #[error("trace is truncated: no finished event")]
    Truncated,
}

impl RunTrace {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<RunTrace, TraceError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TraceError::Empty)?;
        let raw: serde_json::Value = serde_json::from_str(first).map_err(|e| TraceError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let found = raw
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .unwrap_or(0) as u32;
        if found != TRACE_SCHEMA_VERSION {
            return Err(TraceError::SchemaMismatch {
                found,
                expected: TRACE_SCHEMA_VERSION,
            });
        }
        let header: TraceHeader = serde_json::from_value(raw).map_err(|e| TraceError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let mut events = Vec::new();
        for (i, l) in lines {
            let e: Event = serde_json::from_str(l).map_err(|e| TraceError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            events.push(e);
        }
        if !matches!(events.last(), Some(Event::Finished { .. })) {
            return Err(TraceError::Truncated);
        }
        Ok(RunTrace { header, events })
    }

    pub fn status(&self) -> Option<Status> {
        self.events.iter().rev().find_map(|e| match e {
            Event::Finished { status, .. } => Some(*status),
            _ => None,
        })
    }
}

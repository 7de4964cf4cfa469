//! Step-by-step rendering of a recorded run.

use std::path::Path;

use tamper_core::belief::Belief;
use tamper_core::domain::SymbolicState;
use tamper_core::executor::run_episode;
use tamper_core::scenario::Scenario;
use tamper_core::trace::{Event, RunTrace};
use tamper_core::world::WorldSnapshot;

use crate::render::render_png;

fn state_names(sc: Option<&Scenario>, bits: &str) -> String {
    match (sc, SymbolicState::from_bitstring(bits)) {
        (Some(sc), Ok(s)) => sc.domain.true_names(&s).join(" "),
        _ => bits.to_string(),
    }
}

/// One line per event. World-carrying events get a PNG in `plot_dir` when
/// a scenario is supplied.
pub fn replay(trace: &RunTrace, scenario: Option<&Scenario>, plot_dir: Option<&Path>) -> Result<Vec<String>, String> {
    let h = &trace.header;
    let mut lines = vec![format!(
        "{} seed={} method={} epsilon={}",
        h.scenario,
        h.seed,
        h.method.as_str(),
        h.epsilon
    )];
    let mut belief: Option<&Belief> = None;
    if let Some(d) = plot_dir {
        std::fs::create_dir_all(d).map_err(|e| e.to_string())?;
    }
    for (i, e) in trace.events.iter().enumerate() {
        let mut world: Option<&WorldSnapshot> = None;
        let line = match e {
            Event::Sense { detected, state, belief: b } => {
                belief = Some(b);
                format!("sense detected=[{}] state=[{}]", detected.join(" "), state_names(scenario, state))
            }
            Event::PlanComputed { epoch, steps } => {
                let s: Vec<String> = steps
                    .iter()
                    .map(|s| if s.gap { format!("<{}>", s.action) } else { s.action.clone() })
                    .collect();
                format!("plan epoch={epoch} {}", s.join(" "))
            }
            Event::ConstraintAsserted { forbid, when, reason, .. } => {
                format!("constraint forbid {forbid} when [{}] ({reason})", when.join(" "))
            }
            Event::ConstraintsCleared { epoch, budget_multiplier } => {
                format!("cleared epoch={epoch} budget x{budget_multiplier}")
            }
            Event::ActionExecuted { action, exec_time, world: w } => {
                world = Some(w);
                format!("executed {action} t={exec_time:.2}")
            }
            Event::BehaviorInvoked { action, behavior } => format!("behavior {behavior} for {action}"),
            Event::BehaviorOutcome {
                behavior,
                success,
                step,
                reason,
                grasps,
                world: w,
                ..
            } => {
                world = Some(w);
                if *success {
                    format!("behavior {behavior} succeeded grasps={grasps}")
                } else {
                    format!(
                        "behavior {behavior} failed at step {} ({}) grasps={grasps}",
                        step.unwrap_or(0),
                        reason.as_deref().unwrap_or("")
                    )
                }
            }
            Event::RepairOutcome { action, outcome } => format!("repair {action}: {outcome}"),
            Event::ExecutionFault {
                action,
                op,
                error,
                after_push,
                world: w,
            } => {
                world = Some(w);
                format!(
                    "fault {action} {op}: {error}{}",
                    if *after_push { " (after push)" } else { "" }
                )
            }
            Event::Finished {
                status,
                actions_executed,
                behaviors_invoked,
                grasps,
                exec_s,
            } => format!(
                "finished {status:?} actions={actions_executed} behaviors={behaviors_invoked} grasps={grasps} exec={exec_s:.2}s"
            ),
        };
        lines.push(format!("{i:4} {line}"));
        if let (Some(sc), Some(dir), Some(w)) = (scenario, plot_dir, world) {
            render_png(&dir.join(format!("{i:04}.png")), sc, w, belief)?;
        }
    }
    Ok(lines)
}

/// Re-simulates the run from its scenario and seed and compares the
/// serialized traces.
pub fn rerun_matches(trace: &RunTrace, scenario: &Scenario) -> bool {
    let mut sc = scenario.clone();
    sc.file.epsilon = trace.header.epsilon;
    let again = run_episode(&sc, trace.header.method, trace.header.seed);
    again.trace.to_jsonl() == trace.to_jsonl()
}

//! Trace audit: no planned step may violate a constraint asserted earlier in
//! the same epoch, or a permanent one.

use tamper_core::domain::{Constraint, Domain, SymbolicState};
use tamper_core::trace::{Event, RunTrace};

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub event: usize,
    pub step: usize,
    pub action: String,
    pub constraint: String,
}

/// Problems found while reading the trace are reported as violations too.
pub fn audit_trace(trace: &RunTrace, domain: &Domain) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut active: Vec<(Constraint, String)> = domain
        .permanent_constraints()
        .iter()
        .map(|c| (c.clone(), describe(domain, c)))
        .collect();
    let permanent = active.len();
    let malformed = |event: usize, what: String| Violation {
        event,
        step: 0,
        action: String::new(),
        constraint: what,
    };
    for (i, e) in trace.events.iter().enumerate() {
        match e {
            Event::ConstraintsCleared { .. } => active.truncate(permanent),
            Event::ConstraintAsserted { when, forbid, .. } => {
                let parsed = domain
                    .assignment(when)
                    .and_then(|state_pred| Ok((state_pred, domain.find_action(forbid)?)));
                match parsed {
                    Ok((state_pred, forbidden_action)) => {
                        let c = Constraint {
                            state_pred,
                            forbidden_action,
                        };
                        let text = describe(domain, &c);
                        active.push((c, text));
                    }
                    Err(err) => out.push(malformed(i, err.to_string())),
                }
            }
            Event::PlanComputed { steps, .. } => {
                for (k, step) in steps.iter().enumerate() {
                    let (Ok(s), Ok(a)) = (
                        SymbolicState::from_bitstring(&step.state),
                        domain.find_action(&step.action),
                    ) else {
                        out.push(malformed(i, format!("unreadable step {k}")));
                        continue;
                    };
                    for (c, text) in &active {
                        if domain.violates(&s, a, c) {
                            out.push(Violation {
                                event: i,
                                step: k,
                                action: step.action.clone(),
                                constraint: text.clone(),
                            });
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

fn describe(domain: &Domain, c: &Constraint) -> String {
    format!(
        "{} when {:?}",
        domain.action(c.forbidden_action).id(),
        domain.assignment_text(&c.state_pred)
    )
}

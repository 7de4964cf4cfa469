//! Benchmark suites: a list of (scenario, seed) problems run under one or
//! more methods, aggregated into Table-style summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tamper_core::executor::{run_episode, Metrics};
use tamper_core::scenario::Scenario;
use tamper_core::trace::{Event, Method, RunTrace, Status};
use thiserror::Error;

use crate::audit::audit_trace;

pub const SUITE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("suite schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("scenario {path} is invalid: {message}")]
    ScenarioInvalid { path: PathBuf, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessExpectation {
    All,
    None,
}

/// Assertions a suite run is gated on.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default)]
    pub success: BTreeMap<String, SuccessExpectation>,
    /// Baseline mean grasps minus TAMPER mean grasps must reach this.
    pub grasp_margin: Option<f64>,
    #[serde(default)]
    pub mean_actions: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub mean_behaviors: BTreeMap<String, [f64; 2]>,
    /// Methods whose every failure must come from a fault right after a push.
    #[serde(default)]
    pub failures_after_push: Vec<String>,
    /// Upper bound on grasps inside any successful behavior.
    pub max_behavior_grasps: Option<usize>,
    /// Behavior that must succeed at least once per TAMPER episode.
    pub uses_behavior: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub scenario: PathBuf,
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub schema_version: u32,
    pub name: String,
    pub methods: Vec<String>,
    #[serde(default)]
    pub problems: Vec<Problem>,
    #[serde(default)]
    pub expect: Expectations,
}

#[derive(Clone, Debug)]
pub struct Suite {
    pub file: SuiteFile,
    pub methods: Vec<Method>,
    pub dir: PathBuf,
}

impl Suite {
    pub fn load(path: &Path) -> Result<Suite, SuiteError> {
        let text = std::fs::read_to_string(path).map_err(|e| SuiteError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let file: SuiteFile = toml::from_str(&text).map_err(|e| SuiteError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if file.schema_version != SUITE_SCHEMA_VERSION {
            return Err(SuiteError::SchemaVersion {
                found: file.schema_version,
                expected: SUITE_SCHEMA_VERSION,
            });
        }
        let methods = file
            .methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<Vec<Method>, String>>()
            .map_err(|message| SuiteError::Parse {
                path: path.to_path_buf(),
                message,
            })?;
        Ok(Suite {
            file,
            methods,
            dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        })
    }

    pub fn scenario_path(&self, p: &Problem) -> PathBuf {
        self.dir.join(&p.scenario)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub methods: Option<Vec<Method>>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunRow {
    pub problem: String,
    pub seed: u64,
    pub method: Method,
    pub status: Status,
    pub metrics: Metrics,
    pub trace: RunTrace,
    pub audit_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: String,
    pub methods: Vec<Method>,
    pub problems: Vec<String>,
    pub rows: Vec<RunRow>,
    pub checks: Vec<Check>,
    pub wall_s: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn rows_for(&self, m: Method) -> impl Iterator<Item = &RunRow> {
        self.rows.iter().filter(move |r| r.method == m)
    }

    pub fn mean(&self, m: Method, f: impl Fn(&RunRow) -> f64) -> f64 {
        let v: Vec<f64> = self.rows_for(m).map(f).collect();
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    }
}

pub fn trace_file_name(problem: &str, method: Method, seed: u64) -> String {
    format!("{problem}-{}-s{seed}.jsonl", method.as_str())
}

pub fn run_suite(suite: &Suite, opts: &RunOptions) -> Result<SuiteReport, SuiteError> {
    let t0 = std::time::Instant::now();
    let methods = opts.methods.clone().unwrap_or_else(|| suite.methods.clone());
    let mut loaded = Vec::new();
    for p in &suite.file.problems {
        let path = suite.scenario_path(p);
        let mut sc = Scenario::load(&path).map_err(|e| SuiteError::ScenarioInvalid {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let diags = crate::validate::validate(&sc);
        if let Some(d) = diags.first() {
            return Err(SuiteError::ScenarioInvalid {
                path,
                message: d.to_string(),
            });
        }
        if let Some(e) = opts.epsilon {
            sc.file.epsilon = e;
        }
        loaded.push((sc, opts.seed.unwrap_or(p.seed)));
    }
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir.join("traces")).map_err(|e| SuiteError::Io {
            path: dir.clone(),
            message: e.to_string(),
        })?;
    }
    let mut rows = Vec::new();
    for &method in &methods {
        for (sc, seed) in &loaded {
            let r = run_episode(sc, method, *seed);
            let audit_violations = audit_trace(&r.trace, &sc.domain).len();
            if let Some(dir) = &opts.out_dir {
                let path = dir.join("traces").join(trace_file_name(sc.name(), method, *seed));
                std::fs::write(&path, r.trace.to_jsonl()).map_err(|e| SuiteError::Io {
                    path,
                    message: e.to_string(),
                })?;
            }
            rows.push(RunRow {
                problem: sc.name().to_string(),
                seed: *seed,
                method,
                status: r.status,
                metrics: r.metrics,
                trace: r.trace,
                audit_violations,
            });
        }
    }
    let mut report = SuiteReport {
        name: suite.file.name.clone(),
        methods,
        problems: loaded.iter().map(|(s, _)| s.name().to_string()).collect(),
        rows,
        checks: Vec::new(),
        wall_s: 0.0,
    };
    report.checks = evaluate(&report, &suite.file.expect);
    report.wall_s = t0.elapsed().as_secs_f64();
    if let Some(dir) = &opts.out_dir {
        let write = |name: String, text: String| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| SuiteError::Io {
                path,
                message: e.to_string(),
            })
        };
        write(format!("{}.csv", report.name), table_csv(&report))?;
        write(format!("{}.md", report.name), table_markdown(&report))?;
    }
    Ok(report)
}

/// Why a failed run stopped, if it stopped on a fault right after a push.
pub fn post_push_fault(trace: &RunTrace) -> Option<String> {
    trace.events.iter().rev().find_map(|e| match e {
        Event::ExecutionFault {
            action,
            op,
            error,
            after_push: true,
            ..
        } if op == "close_gripper" || op == "trajectory" => Some(format!("{action} {op}: {error}")),
        _ => None,
    })
}

fn method_named(report: &SuiteReport, name: &str) -> Option<Method> {
    let m: Method = name.parse().ok()?;
    report.methods.contains(&m).then_some(m)
}

fn evaluate(report: &SuiteReport, expect: &Expectations) -> Vec<Check> {
    let mut out = Vec::new();
    let additive = report
        .rows
        .iter()
        .all(|r| (r.metrics.total_s() - (r.metrics.plan_be_s + r.metrics.plan_ae_s + r.metrics.sense_ae_s + r.metrics.exec_s)).abs() < 1e-12);
    out.push(Check {
        name: "metrics additivity".into(),
        pass: additive,
        detail: String::new(),
    });
    let bad: usize = report.rows.iter().map(|r| r.audit_violations).sum();
    out.push(Check {
        name: "constraint audit".into(),
        pass: bad == 0,
        detail: format!("{bad} violating plan steps"),
    });
    for (name, want) in &expect.success {
        let Some(m) = method_named(report, name) else { continue };
        let n = report.rows_for(m).count();
        let ok = report.rows_for(m).filter(|r| r.status == Status::Success).count();
        let pass = match want {
            SuccessExpectation::All => ok == n,
            SuccessExpectation::None => ok == 0,
        };
        out.push(Check {
            name: format!("{name} success {want:?}"),
            pass,
            detail: format!("{ok}/{n}"),
        });
    }
    if let Some(margin) = expect.grasp_margin {
        if report.methods.contains(&Method::Tamper) && report.methods.contains(&Method::Baseline) {
            let t = report.mean(Method::Tamper, |r| r.metrics.grasps as f64);
            let b = report.mean(Method::Baseline, |r| r.metrics.grasps as f64);
            out.push(Check {
                name: format!("grasp margin >= {margin}"),
                pass: b - t >= margin,
                detail: format!("tamper {t:.2} baseline {b:.2}"),
            });
        }
    }
    let ranges = [
        ("actions", &expect.mean_actions, (|r: &RunRow| r.metrics.actions_executed as f64) as fn(&RunRow) -> f64),
        ("behaviors", &expect.mean_behaviors, |r: &RunRow| r.metrics.behaviors_invoked as f64),
    ];
    for (what, map, f) in ranges {
        for (name, [lo, hi]) in map {
            let Some(m) = method_named(report, name) else { continue };
            let v = report.mean(m, f);
            out.push(Check {
                name: format!("{name} mean {what} in [{lo}, {hi}]"),
                pass: (*lo..=*hi).contains(&v),
                detail: format!("{v:.2}"),
            });
        }
    }
    for name in &expect.failures_after_push {
        let Some(m) = method_named(report, name) else { continue };
        let unexplained: Vec<String> = report
            .rows_for(m)
            .filter(|r| r.status != Status::Success && post_push_fault(&r.trace).is_none())
            .map(|r| r.problem.clone())
            .collect();
        out.push(Check {
            name: format!("{name} failures follow a push"),
            pass: unexplained.is_empty(),
            detail: unexplained.join(" "),
        });
    }
    if let Some(max) = expect.max_behavior_grasps {
        let worst = report
            .rows
            .iter()
            .flat_map(|r| r.trace.events.iter())
            .filter_map(|e| match e {
                Event::BehaviorOutcome {
                    success: true,
                    grasps,
                    ..
                } => Some(*grasps),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        out.push(Check {
            name: format!("behavior grasps <= {max}"),
            pass: worst <= max,
            detail: format!("max {worst}"),
        });
    }
    if let Some(b) = &expect.uses_behavior {
        let missing: Vec<String> = report
            .rows_for(Method::Tamper)
            .filter(|r| !behavior_succeeded(&r.trace, b))
            .map(|r| r.problem.clone())
            .collect();
        out.push(Check {
            name: format!("completes via {b}"),
            pass: missing.is_empty(),
            detail: missing.join(" "),
        });
    }
    out
}

/// True when `behavior` ran to success somewhere in the trace.
pub fn behavior_succeeded(trace: &RunTrace, behavior: &str) -> bool {
    trace.events.iter().any(|e| {
        matches!(e, Event::BehaviorOutcome { success: true, behavior: b, .. } if b == behavior)
    })
}

const METRIC_ROWS: [&str; 9] = [
    "Plan-BE (s)",
    "Plan-AE (s)",
    "Sense-AE (s)",
    "Exec (s)",
    "Total (s)",
    "#Grasps",
    "#Actions",
    "#Behaviors",
    "Success",
];

fn metric_cells(r: &RunRow) -> [String; 9] {
    let m = &r.metrics;
    [
        format!("{:.3}", m.plan_be_s),
        format!("{:.3}", m.plan_ae_s),
        format!("{:.3}", m.sense_ae_s),
        format!("{:.2}", m.exec_s),
        format!("{:.2}", m.total_s()),
        m.grasps.to_string(),
        m.actions_executed.to_string(),
        m.behaviors_invoked.to_string(),
        (r.status == Status::Success).to_string(),
    ]
}

fn mean_cells(report: &SuiteReport, m: Method) -> [String; 9] {
    let f = |g: fn(&RunRow) -> f64| report.mean(m, g);
    [
        format!("{:.3}", f(|r| r.metrics.plan_be_s)),
        format!("{:.3}", f(|r| r.metrics.plan_ae_s)),
        format!("{:.3}", f(|r| r.metrics.sense_ae_s)),
        format!("{:.2}", f(|r| r.metrics.exec_s)),
        format!("{:.2}", f(|r| r.metrics.total_s())),
        format!("{:.2}", f(|r| r.metrics.grasps as f64)),
        format!("{:.2}", f(|r| r.metrics.actions_executed as f64)),
        format!("{:.2}", f(|r| r.metrics.behaviors_invoked as f64)),
        format!(
            "{}/{}",
            report.rows_for(m).filter(|r| r.status == Status::Success).count(),
            report.rows_for(m).count()
        ),
    ]
}

/// Grid of metric rows by problem columns, one block per method.
fn grid(report: &SuiteReport) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["method".to_string(), "metric".to_string()];
    header.extend((1..=report.problems.len()).map(|i| format!("P{i}")));
    header.push("Mean".into());
    let mut body = Vec::new();
    for &m in &report.methods {
        let cols: Vec<[String; 9]> = report.rows_for(m).map(metric_cells).collect();
        let mean = mean_cells(report, m);
        for (k, label) in METRIC_ROWS.iter().enumerate() {
            let mut line = vec![m.as_str().to_string(), label.to_string()];
            line.extend(cols.iter().map(|c| c[k].clone()));
            line.push(mean[k].clone());
            body.push(line);
        }
    }
    (header, body)
}

pub fn table_csv(report: &SuiteReport) -> String {
    let (header, body) = grid(report);
    let mut s = header.join(",");
    s.push('\n');
    for line in body {
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn table_markdown(report: &SuiteReport) -> String {
    let (header, body) = grid(report);
    let mut s = format!("## {}\n\n", report.name);
    for (i, p) in report.problems.iter().enumerate() {
        let _ = writeln!(s, "- P{}: {p}", i + 1);
    }
    s.push('\n');
    let _ = writeln!(s, "| {} |", header.join(" | "));
    let _ = writeln!(s, "|{}", "---|".repeat(header.len()));
    for line in body {
        let _ = writeln!(s, "| {} |", line.join(" | "));
    }
    if !report.checks.is_empty() {
        s.push('\n');
        for c in &report.checks {
            let _ = writeln!(
                s,
                "- [{}] {} {}",
                if c.pass { "x" } else { " " },
                c.name,
                c.detail
            );
        }
    }
    s
}

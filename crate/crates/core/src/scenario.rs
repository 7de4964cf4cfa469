//! Scenario files: ground-truth layout, camera, noise model, and the
//! symbolic problem on top of a domain file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Domain, DomainError, PartialAssignment, SymbolicState};
use crate::geometry::{Aabb, Polygon, Pose2, Vec2};
use crate::kinematics::ArmSpec;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("scenario schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("domain: {0}")]
    Domain(#[from] DomainError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct PoseSpec(pub Pose2);

impl From<[f64; 3]> for PoseSpec {
    fn from(v: [f64; 3]) -> Self {
        PoseSpec(Pose2::new(v[0], v[1], v[2]))
    }
}

impl From<PoseSpec> for [f64; 3] {
    fn from(p: PoseSpec) -> Self {
        [p.0.x, p.0.y, p.0.theta]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct PointSpec(pub Vec2);

impl From<[f64; 2]> for PointSpec {
    fn from(v: [f64; 2]) -> Self {
        PointSpec(Vec2::new(v[0], v[1]))
    }
}

impl From<PointSpec> for [f64; 2] {
    fn from(p: PointSpec) -> Self {
        [p.0.x, p.0.y]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub id: String,
    pub half_extents: PointSpec,
    pub pose: PoseSpec,
    /// Label used by the symbolic domain. Defaults to the id.
    #[serde(default)]
    pub label: Option<String>,
    /// The label can only be learned by the identity-reveal query.
    #[serde(default)]
    pub identity_hidden: bool,
}

impl ObjectSpec {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.id)
    }

    pub fn footprint(&self) -> Polygon {
        Polygon::rectangle(&self.pose.0, self.half_extents.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub name: String,
    pub pose: PoseSpec,
    pub half_extents: PointSpec,
}

impl BoxSpec {
    pub fn polygon(&self) -> Polygon {
        Polygon::rectangle(&self.pose.0, self.half_extents.0)
    }
}

/// A drawer that slides along its pose heading. The pose is the box center
/// when fully closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawerSpec {
    pub name: String,
    pub pose: PoseSpec,
    pub half_extents: PointSpec,
    pub travel: f64,
    /// How far the handle sticks out in front of the drawer face.
    pub handle_offset: f64,
    #[serde(default)]
    pub open_fraction: f64,
    #[serde(default)]
    pub contents: Vec<String>,
}

/// Fraction above which the drawer interior counts as open and reachable.
pub const DRAWER_OPEN_THRESHOLD: f64 = 0.9;

impl DrawerSpec {
    pub fn axis(&self) -> Vec2 {
        self.pose.0.heading()
    }

    pub fn box_pose(&self, fraction: f64) -> Pose2 {
        let p = self.pose.0.position() + self.axis() * (self.travel * fraction);
        Pose2::from_parts(p, self.pose.0.theta)
    }

    pub fn box_polygon(&self, fraction: f64) -> Polygon {
        Polygon::rectangle(&self.box_pose(fraction), self.half_extents.0)
    }

    pub fn handle_point(&self, fraction: f64) -> Vec2 {
        self.box_pose(fraction).position() + self.axis() * (self.half_extents.0.x + self.handle_offset)
    }

    /// End-effector pose that holds the handle at `fraction`.
    pub fn handle_pose(&self, fraction: f64) -> Pose2 {
        Pose2::from_parts(self.handle_point(fraction), (-self.axis()).angle())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub name: String,
    pub pose: PoseSpec,
    pub half_extents: PointSpec,
    /// Candidate object headings for placements, relative to the region pose.
    /// Defaults to the four axis directions.
    #[serde(default)]
    pub yaws: Option<Vec<f64>>,
}

impl RegionSpec {
    pub fn polygon(&self) -> Polygon {
        Polygon::rectangle(&self.pose.0, self.half_extents.0)
    }

    pub fn yaw_choices(&self) -> Vec<f64> {
        let rel = self.yaws.clone().unwrap_or_else(|| {
            (0..4)
                .map(|k| k as f64 * std::f64::consts::FRAC_PI_2)
                .collect()
        });
        rel.iter().map(|y| self.pose.0.theta + y).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub position: PointSpec,
    /// Absolute bearing interval seen by the camera (rad).
    pub fov: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushSpec {
    pub nominal_distance: f64,
    #[serde(default)]
    pub d_max: f64,
    #[serde(default)]
    pub theta_max: f64,
}

impl Default for PushSpec {
    fn default() -> Self {
        Self {
            nominal_distance: 0.12,
            d_max: 0.0,
            theta_max: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub point: PointSpec,
    #[serde(default = "default_scan_tolerance")]
    pub tolerance: f64,
}

fn default_scan_tolerance() -> f64 {
    0.05
}

fn default_epsilon() -> f64 {
    0.6
}

fn default_motion_budget() -> f64 {
    2.0
}

fn default_behavior_budget() -> f64 {
    10.0
}

fn default_step_cap() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    pub domain: String,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub behaviors: Vec<String>,
    pub init: Vec<String>,
    pub goal: Vec<String>,
    #[serde(default)]
    pub prior_known: Vec<String>,
    #[serde(default = "default_motion_budget")]
    pub motion_budget_s: f64,
    #[serde(default = "default_behavior_budget")]
    pub behavior_budget_s: f64,
    #[serde(default = "default_step_cap")]
    pub step_cap: usize,
    /// Name of the catch-all region for poses outside every named region.
    #[serde(default)]
    pub fallback_region: Option<String>,
    pub workspace: [PointSpec; 2],
    #[serde(default)]
    pub arm: ArmSpec,
    pub camera: CameraSpec,
    #[serde(default)]
    pub push: PushSpec,
    #[serde(default)]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub statics: Vec<BoxSpec>,
    #[serde(default)]
    pub drawer: Option<DrawerSpec>,
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
}

/// A scenario with its domain resolved and the symbolic problem parsed.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub domain: Domain,
    pub init: SymbolicState,
    pub goal: PartialAssignment,
    pub source: Option<PathBuf>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ScenarioFile = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let domain_path = dir.join(&file.domain);
        let domain = Domain::load(&domain_path)?;
        let mut s = Self::from_parts(file, domain)?;
        s.source = Some(path.to_path_buf());
        Ok(s)
    }

    pub fn from_parts(file: ScenarioFile, domain: Domain) -> Result<Self, ScenarioError> {
        if file.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(ScenarioError::SchemaVersion {
                found: file.schema_version,
                expected: SCENARIO_SCHEMA_VERSION,
            });
        }
        let init = domain.state_from_true(&file.init)?;
        let goal = domain.assignment(&file.goal)?;
        Ok(Self {
            file,
            domain,
            init,
            goal,
            source: None,
        })
    }

    pub fn from_toml_str(text: &str, domain: Domain) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            path: PathBuf::from("<inline>"),
            message: e.to_string(),
        })?;
        Self::from_parts(file, domain)
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn workspace(&self) -> Aabb {
        Aabb::new(self.file.workspace[0].0, self.file.workspace[1].0)
    }

    pub fn object(&self, id: &str) -> Option<&ObjectSpec> {
        self.file.objects.iter().find(|o| o.id == id)
    }

    pub fn region(&self, name: &str) -> Option<&RegionSpec> {
        self.file.regions.iter().find(|r| r.name == name)
    }

    pub fn static_polygons(&self) -> Vec<Polygon> {
        self.file.statics.iter().map(BoxSpec::polygon).collect()
    }

    pub fn has_behavior(&self, schema: &str) -> bool {
        self.file.behaviors.iter().any(|b| b == schema)
    }
}

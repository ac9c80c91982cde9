//! Discrete agent kinematics and fixed-route execution.
//!
//! Yaw 0 faces `+z`, yaw 90 faces `+x`. Positive head pitch looks up.
//! Every action yields one captured frame; the start pose is frame 0.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io;
use crate::scene::Scene;
use crate::FORMAT_VERSION;

pub const ROTATION_STEP_DEG: i32 = 90;
pub const PITCH_STEP_DEG: i32 = 30;
pub const MAX_PITCH_DEG: i32 = 30;
pub const DEFAULT_GRID_STEP: f64 = 0.25;
pub const DEFAULT_CAMERA_HEIGHT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    MoveAhead,
    MoveBack,
    MoveLeft,
    MoveRight,
    RotateLeft,
    RotateRight,
    LookUp,
    LookDown,
}

impl Action {
    pub const ALL: [Action; 8] = [
        Action::MoveAhead,
        Action::MoveBack,
        Action::MoveLeft,
        Action::MoveRight,
        Action::RotateLeft,
        Action::RotateRight,
        Action::LookUp,
        Action::LookDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::MoveAhead => "MoveAhead",
            Action::MoveBack => "MoveBack",
            Action::MoveLeft => "MoveLeft",
            Action::MoveRight => "MoveRight",
            Action::RotateLeft => "RotateLeft",
            Action::RotateRight => "RotateRight",
            Action::LookUp => "LookUp",
            Action::LookDown => "LookDown",
        }
    }

    pub fn from_name(name: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn is_translation(self) -> bool {
        matches!(
            self,
            Action::MoveAhead | Action::MoveBack | Action::MoveLeft | Action::MoveRight
        )
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentPose {
    /// Plan-view `(x, z)` in meters, on a grid cell centre.
    pub position: [f64; 2],
    /// One of 0, 90, 180, 270.
    pub yaw: i32,
    /// One of -30, 0, 30.
    pub head_pitch: i32,
    pub camera_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PitchSaturated {
    pub head_pitch: i32,
}

// (dx, dz) unit steps for forward and right at each yaw, exact.
fn axes(yaw: i32) -> ((f64, f64), (f64, f64)) {
    match yaw.rem_euclid(360) {
        0 => ((0.0, 1.0), (1.0, 0.0)),
        90 => ((1.0, 0.0), (0.0, -1.0)),
        180 => ((0.0, -1.0), (-1.0, 0.0)),
        270 => ((-1.0, 0.0), (0.0, 1.0)),
        other => panic!("yaw {other} is not a multiple of 90"),
    }
}

impl AgentPose {
    pub fn is_valid_orientation(&self) -> bool {
        self.yaw.rem_euclid(ROTATION_STEP_DEG) == 0
            && (0..360).contains(&self.yaw)
            && self.head_pitch.rem_euclid(PITCH_STEP_DEG) == 0
            && self.head_pitch.abs() <= MAX_PITCH_DEG
    }

    /// World-space camera centre.
    pub fn camera_position(&self) -> [f64; 3] {
        [self.position[0], self.camera_height, self.position[1]]
    }
}

/// Pose after one action, ignoring walkability.
///
/// Looking past the pitch limits is an error rather than a clamp so that a
/// route cannot silently produce duplicate frames.
pub fn apply_action(
    pose: &AgentPose,
    action: Action,
    grid_step: f64,
) -> Result<AgentPose, PitchSaturated> {
    let mut next = *pose;
    let ((fx, fz), (rx, rz)) = axes(pose.yaw);
    let mut translate = |dx: f64, dz: f64| {
        next.position[0] += dx * grid_step;
        next.position[1] += dz * grid_step;
    };
    match action {
        Action::MoveAhead => translate(fx, fz),
        Action::MoveBack => translate(-fx, -fz),
        Action::MoveRight => translate(rx, rz),
        Action::MoveLeft => translate(-rx, -rz),
        Action::RotateRight => next.yaw = (pose.yaw + ROTATION_STEP_DEG).rem_euclid(360),
        Action::RotateLeft => next.yaw = (pose.yaw - ROTATION_STEP_DEG).rem_euclid(360),
        Action::LookUp | Action::LookDown => {
            let delta = if action == Action::LookUp {
                PITCH_STEP_DEG
            } else {
                -PITCH_STEP_DEG
            };
            let pitch = pose.head_pitch + delta;
            if pitch.abs() > MAX_PITCH_DEG {
                return Err(PitchSaturated {
                    head_pitch: pose.head_pitch,
                });
            }
            next.head_pitch = pitch;
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub start_pose: AgentPose,
    pub grid_step: f64,
    pub actions: Vec<Action>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteFile {
    #[serde(default = "default_version")]
    format_version: u32,
    start_pose: AgentPose,
    grid_step: f64,
    actions: Vec<String>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

impl Route {
    pub fn from_json(text: &str) -> Result<Route> {
        let file: RouteFile = io::parse_json(text, "route")?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: file.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let actions = file
            .actions
            .iter()
            .enumerate()
            .map(|(i, name)| {
                Action::from_name(name).ok_or_else(|| {
                    Error::schema(format!("actions[{i}]"), format!("unknown action `{name}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Route {
            start_pose: file.start_pose,
            grid_step: file.grid_step,
            actions,
        })
    }

    pub fn to_json(&self) -> String {
        let file = RouteFile {
            format_version: FORMAT_VERSION,
            start_pose: self.start_pose,
            grid_step: self.grid_step,
            actions: self.actions.iter().map(|a| a.name().to_string()).collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("route serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Route> {
        Route::from_json(&io::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_json().as_bytes())
    }

    /// Hex SHA-256 of the canonical route document; identifies the route in frame logs.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    EmptyRoute,
    GridMismatch { route: f64, scene: f64 },
    InvalidStart(String),
    Collision { cell: Option<(usize, usize)>, position: [f64; 2] },
    Saturation { head_pitch: i32 },
}

/// One problem found while validating a route. `action_index` is `None` for
/// problems with the route as a whole or its start pose.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteViolation {
    pub action_index: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for RouteViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(i) = self.action_index {
            write!(f, "action {i}: ")?;
        }
        match &self.kind {
            ViolationKind::EmptyRoute => write!(f, "route has no actions"),
            ViolationKind::GridMismatch { route, scene } => {
                write!(f, "route grid_step {route} differs from scene grid_step {scene}")
            }
            ViolationKind::InvalidStart(why) => write!(f, "invalid start pose: {why}"),
            ViolationKind::Collision { cell, position } => match cell {
                Some((i, j)) => write!(
                    f,
                    "collision: cell ({i}, {j}) at x={:.3}, z={:.3} is not walkable",
                    position[0], position[1]
                ),
                None => write!(
                    f,
                    "collision: x={:.3}, z={:.3} is outside the grid",
                    position[0], position[1]
                ),
            },
            ViolationKind::Saturation { head_pitch } => {
                write!(f, "head pitch saturated at {head_pitch}°")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub frame_index: u32,
    pub pose: AgentPose,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoseTrace {
    pub entries: Vec<TraceEntry>,
}

impl PoseTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn start_problem(scene: &Scene, pose: &AgentPose) -> Option<String> {
    if !pose.is_valid_orientation() {
        return Some(format!(
            "yaw {} / head_pitch {} outside the discrete sets",
            pose.yaw, pose.head_pitch
        ));
    }
    if !(pose.camera_height.is_finite() && pose.camera_height > 0.0) {
        return Some("camera_height must be positive".into());
    }
    let grid = scene.walkable();
    let [x, z] = pose.position;
    let Some((i, j)) = grid.cell_of(x, z) else {
        return Some(format!("x={x}, z={z} is outside the grid"));
    };
    let c = grid.cell_center(i, j);
    if (c[0] - x).abs() > 1e-6 || (c[1] - z).abs() > 1e-6 {
        return Some(format!("x={x}, z={z} is not a cell centre"));
    }
    if !grid.is_walkable_cell(i, j) {
        return Some(format!("cell ({i}, {j}) is not walkable"));
    }
    None
}

/// Walks the route, collecting every violation. After a violation the agent
/// stays where it was and validation continues with the next action.
pub fn validate_route(scene: &Scene, route: &Route) -> Vec<RouteViolation> {
    walk(scene, route).1
}

fn walk(scene: &Scene, route: &Route) -> (Vec<AgentPose>, Vec<RouteViolation>) {
    let mut violations = Vec::new();
    if route.actions.is_empty() {
        violations.push(RouteViolation {
            action_index: None,
            kind: ViolationKind::EmptyRoute,
        });
    }
    if (route.grid_step - scene.grid_step()).abs() > 1e-12 {
        violations.push(RouteViolation {
            action_index: None,
            kind: ViolationKind::GridMismatch {
                route: route.grid_step,
                scene: scene.grid_step(),
            },
        });
        return (Vec::new(), violations);
    }
    if let Some(why) = start_problem(scene, &route.start_pose) {
        violations.push(RouteViolation {
            action_index: None,
            kind: ViolationKind::InvalidStart(why),
        });
        return (Vec::new(), violations);
    }

    let grid = scene.walkable();
    let mut pose = route.start_pose;
    let mut poses = vec![pose];
    for (i, &action) in route.actions.iter().enumerate() {
        match apply_action(&pose, action, route.grid_step) {
            Err(sat) => violations.push(RouteViolation {
                action_index: Some(i),
                kind: ViolationKind::Saturation {
                    head_pitch: sat.head_pitch,
                },
            }),
            Ok(next) => {
                let [x, z] = next.position;
                if action.is_translation() && !grid.is_walkable(x, z) {
                    violations.push(RouteViolation {
                        action_index: Some(i),
                        kind: ViolationKind::Collision {
                            cell: grid.cell_of(x, z),
                            position: next.position,
                        },
                    });
                } else {
                    pose = next;
                }
            }
        }
        poses.push(pose);
    }
    (poses, violations)
}

/// Executes a validated route; frame `k` is the pose after `k` actions.
pub fn execute_route(scene: &Scene, route: &Route) -> Result<PoseTrace> {
    let (poses, violations) = walk(scene, route);
    if !violations.is_empty() {
        return Err(Error::Route(violations));
    }
    Ok(PoseTrace {
        entries: poses
            .into_iter()
            .enumerate()
            .map(|(k, pose)| TraceEntry {
                frame_index: k as u32,
                pose,
            })
            .collect(),
    })
}

//! Episode logs: one JSONL record per control step, plus optional plan
//! publications.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{ObjectKind, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ObjectRecord {
    Planar {
        pose: [f64; 3],
        vel: [f64; 2],
        yaw_rate: f64,
    },
    Hinged {
        angle: f64,
        rate: f64,
    },
}

impl From<&ObjectKind> for ObjectRecord {
    fn from(kind: &ObjectKind) -> Self {
        match kind {
            ObjectKind::Planar {
                pose,
                vel,
                yaw_rate,
            } => ObjectRecord::Planar {
                pose: [pose.x, pose.y, pose.yaw],
                vel: *vel,
                yaw_rate: *yaw_rate,
            },
            ObjectKind::Hinged { angle, rate } => ObjectRecord::Hinged {
                angle: *angle,
                rate: *rate,
            },
        }
    }
}

/// One executed control step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub robot_pose: [f64; 3],
    pub base_vel: [f64; 3],
    pub arm_joints: [f64; 6],
    pub gripper_pos: f64,
    pub effector: [f64; 3],
    pub object: ObjectRecord,
    pub action: Vec<f64>,
    /// Assembled 25-dim command (hierarchical mode only).
    pub command: Option<Vec<f64>>,
    pub cost: f64,
    /// Age of the executed plan at this step (s).
    pub plan_age: f64,
}

impl StepRecord {
    pub fn from_state(state: &WorldState, t: f64) -> Self {
        Self {
            t,
            robot_pose: [state.robot.pose.x, state.robot.pose.y, state.robot.pose.yaw],
            base_vel: state.robot.base_vel,
            arm_joints: state.robot.arm_joints,
            gripper_pos: state.robot.gripper_pos,
            effector: [
                state.robot.effector.x,
                state.robot.effector.y,
                state.robot.effector.z,
            ],
            object: ObjectRecord::from(&state.object.kind),
            action: Vec::new(),
            command: None,
            cost: 0.0,
            plan_age: 0.0,
        }
    }
}

/// A plan publication event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub t: f64,
    pub iteration: u64,
    pub best_cost: f64,
    pub knots: Vec<Vec<f64>>,
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::Config(format!("serialize: {e}")))?;
        writeln!(w, "{line}").map_err(|e| Error::Config(format!("write: {e}")))?;
    }
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::Config(format!("read: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| Error::Config(format!("parse: {e}")))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let dir = std::env::temp_dir().join(format!("hsmpc-log-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("steps.jsonl");
        let records = vec![
            StepRecord {
                t: 0.02,
                robot_pose: [0.1, 0.2, 0.3],
                base_vel: [0.0; 3],
                arm_joints: [0.0; 6],
                gripper_pos: 1.0,
                effector: [0.9, 0.0, 0.35],
                object: ObjectRecord::Planar {
                    pose: [1.0, 0.0, 0.0],
                    vel: [0.0, 0.0],
                    yaw_rate: 0.0,
                },
                action: vec![0.1, 0.2],
                command: None,
                cost: 1.5,
                plan_age: 0.02,
            },
        ];
        write_jsonl(&path, &records).unwrap();
        let back: Vec<StepRecord> = read_jsonl(&path).unwrap();
        assert_eq!(records, back);
        std::fs::remove_dir_all(&dir).ok();
    }
}

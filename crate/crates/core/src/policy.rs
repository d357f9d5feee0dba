//! The low-level policy interface and its analytic reference
//! implementation: a proportional-derivative velocity/posture tracker that
//! maps full commands to joint-level controls. The trait boundary is where
//! a learned whole-body policy would plug in.

use serde::{Deserialize, Serialize};

use crate::command::CommandVector;
use crate::world::{JointControls, RobotState};

pub trait LowLevelPolicy: Send + Sync {
    /// Map the current robot state and a command to joint-level controls.
    /// Outputs must be finite and within actuator bounds.
    fn policy_step(&self, robot: &RobotState, command: &CommandVector) -> JointControls;

    /// Control period in seconds (50 Hz by default).
    fn control_period(&self) -> f64 {
        0.02
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActuatorBounds {
    pub base_force_max: [f64; 3],
    pub arm_torque_max: f64,
    pub gripper_vel_max: f64,
}

impl Default for ActuatorBounds {
    fn default() -> Self {
        Self {
            base_force_max: [60.0, 60.0, 8.0],
            arm_torque_max: 10.0,
            gripper_vel_max: 2.0,
        }
    }
}

/// Reference velocity-tracking controller: base wrench proportional to the
/// body-frame velocity error, PD on arm joints toward their targets,
/// proportional gripper drive. Everything saturates at actuator bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdVelocityTracker {
    pub base_gain: [f64; 3],
    pub arm_kp: f64,
    pub arm_kd: f64,
    pub gripper_gain: f64,
    pub bounds: ActuatorBounds,
}

impl Default for PdVelocityTracker {
    fn default() -> Self {
        Self {
            base_gain: [80.0, 80.0, 6.0],
            arm_kp: 20.0,
            arm_kd: 4.0,
            gripper_gain: 5.0,
            bounds: ActuatorBounds::default(),
        }
    }
}

impl LowLevelPolicy for PdVelocityTracker {
    fn policy_step(&self, robot: &RobotState, command: &CommandVector) -> JointControls {
        let mut base_force = [0.0; 3];
        for i in 0..3 {
            let f = self.base_gain[i] * (command.base_vel[i] - robot.base_vel[i]);
            base_force[i] = f.clamp(-self.bounds.base_force_max[i], self.bounds.base_force_max[i]);
        }

        let mut arm_torque = [0.0; 6];
        for i in 0..6 {
            let tau = self.arm_kp * (command.arm_targets[i] - robot.arm_joints[i])
                - self.arm_kd * robot.arm_vel[i];
            arm_torque[i] = tau.clamp(-self.bounds.arm_torque_max, self.bounds.arm_torque_max);
        }

        let gv = self.gripper_gain * (command.gripper_pos - robot.gripper_pos);
        let gripper_vel = gv.clamp(-self.bounds.gripper_vel_max, self.bounds.gripper_vel_max);

        JointControls {
            base_force,
            arm_torque,
            gripper_vel,
        }
    }
}

//! Desk-scale robot model shared by both worlds: a kinematic base disk
//! driven by tracked velocity, a planar 2-link arm for effector placement
//! (the remaining four arm joints are carried and regularized but do not
//! move the effector), and a 1-DoF gripper.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Planar rigid-body pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }
}

/// Joint-level controls accepted by the desk robot's actuators:
/// body-frame base wrench (3), arm joint torques (6), gripper drive rate (1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointControls {
    pub base_force: [f64; 3],
    pub arm_torque: [f64; 6],
    pub gripper_vel: f64,
}

/// Flat control dimension (what a planner samples in flat mode).
pub const CONTROL_DIM: usize = 10;

impl JointControls {
    pub fn zeros() -> Self {
        Self {
            base_force: [0.0; 3],
            arm_torque: [0.0; 6],
            gripper_vel: 0.0,
        }
    }

    pub fn from_flat(v: &[f64]) -> Self {
        debug_assert_eq!(v.len(), CONTROL_DIM);
        Self {
            base_force: [v[0], v[1], v[2]],
            arm_torque: [v[3], v[4], v[5], v[6], v[7], v[8]],
            gripper_vel: v[9],
        }
    }

    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for v in self.base_force {
            s += v * v;
        }
        for v in self.arm_torque {
            s += v * v;
        }
        s += self.gripper_vel * self.gripper_vel;
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.base_force.iter().all(|v| v.is_finite())
            && self.arm_torque.iter().all(|v| v.is_finite())
            && self.gripper_vel.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotParams {
    pub base_mass: f64,
    pub base_inertia: f64,
    /// Linear damping on base velocity (models foot scrub).
    pub base_damping: f64,
    pub arm_inertia: f64,
    pub arm_damping: f64,
    /// Shoulder mount, forward of the base center along the heading.
    pub shoulder_offset: f64,
    pub shoulder_height: f64,
    pub link1: f64,
    pub link2: f64,
    pub effector_radius: f64,
    pub gripper_min: f64,
    pub gripper_max: f64,
    pub torso_height: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            base_mass: 10.0,
            base_inertia: 1.0,
            base_damping: 0.2,
            arm_inertia: 0.4,
            arm_damping: 1.5,
            shoulder_offset: 0.25,
            shoulder_height: 0.35,
            link1: 0.35,
            link2: 0.30,
            effector_radius: 0.06,
            gripper_min: 0.0,
            gripper_max: 1.0,
            torso_height: 0.35,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub pose: Pose2,
    /// Body-frame base velocity: vx, vy, yaw rate.
    pub base_vel: [f64; 3],
    pub arm_joints: [f64; 6],
    pub arm_vel: [f64; 6],
    pub gripper_pos: f64,
    /// Effector site in world frame; derived from pose + arm via the
    /// fixed-chain forward map and kept consistent on every step.
    pub effector: Vector3<f64>,
}

impl RobotState {
    pub fn at_rest(pose: Pose2, params: &RobotParams) -> Self {
        let mut s = Self {
            pose,
            base_vel: [0.0; 3],
            arm_joints: [0.0; 6],
            arm_vel: [0.0; 6],
            gripper_pos: params.gripper_max,
            effector: Vector3::zeros(),
        };
        s.effector = effector_position(&s.pose, &s.arm_joints, params);
        s
    }

    pub fn is_finite(&self) -> bool {
        self.pose.x.is_finite()
            && self.pose.y.is_finite()
            && self.pose.yaw.is_finite()
            && self.base_vel.iter().all(|v| v.is_finite())
            && self.arm_joints.iter().all(|v| v.is_finite())
            && self.arm_vel.iter().all(|v| v.is_finite())
            && self.gripper_pos.is_finite()
            && self.effector.iter().all(|v| v.is_finite())
    }

    /// Torso site: base center at torso height.
    pub fn torso_position(&self, params: &RobotParams) -> Vector3<f64> {
        Vector3::new(self.pose.x, self.pose.y, params.torso_height)
    }

    /// Base velocity rotated into the world frame (vx, vy, yaw rate).
    pub fn base_vel_world(&self) -> [f64; 3] {
        let (s, c) = self.pose.yaw.sin_cos();
        [
            self.base_vel[0] * c - self.base_vel[1] * s,
            self.base_vel[0] * s + self.base_vel[1] * c,
            self.base_vel[2],
        ]
    }

    pub fn kinetic_energy(&self, params: &RobotParams) -> f64 {
        let v2 = self.base_vel[0] * self.base_vel[0] + self.base_vel[1] * self.base_vel[1];
        let w2 = self.base_vel[2] * self.base_vel[2];
        let arm: f64 = self.arm_vel.iter().map(|v| v * v).sum();
        0.5 * (params.base_mass * v2 + params.base_inertia * w2 + params.arm_inertia * arm)
    }
}

/// Fixed-chain forward map: shoulder sits ahead of the base center along
/// the heading; joints 0 and 1 pitch a 2-link chain in the sagittal plane,
/// extending the effector forward (joint angle 0 = horizontal reach).
pub fn effector_position(pose: &Pose2, arm: &[f64; 6], params: &RobotParams) -> Vector3<f64> {
    let q0 = arm[0];
    let q01 = arm[0] + arm[1];
    let forward = params.shoulder_offset + params.link1 * q0.cos() + params.link2 * q01.cos();
    let up = params.link1 * q0.sin() + params.link2 * q01.sin();
    let (s, c) = pose.yaw.sin_cos();
    Vector3::new(
        pose.x + forward * c,
        pose.y + forward * s,
        params.shoulder_height + up,
    )
}

/// Semi-implicit Euler step of the robot alone. Contact never reacts back
/// on the robot (kinematic base), so this is shared by both worlds.
pub fn step_robot(
    state: &RobotState,
    controls: &JointControls,
    params: &RobotParams,
    dt: f64,
) -> RobotState {
    let mut next = *state;

    // Base: double integrator on body-frame velocity with light damping.
    for i in 0..3 {
        let inertia = if i == 2 {
            params.base_inertia
        } else {
            params.base_mass
        };
        next.base_vel[i] += dt * (controls.base_force[i] / inertia
            - params.base_damping * state.base_vel[i]);
    }
    let (s, c) = state.pose.yaw.sin_cos();
    next.pose.x += dt * (next.base_vel[0] * c - next.base_vel[1] * s);
    next.pose.y += dt * (next.base_vel[0] * s + next.base_vel[1] * c);
    next.pose.yaw += dt * next.base_vel[2];

    for i in 0..6 {
        next.arm_vel[i] += dt * (controls.arm_torque[i] / params.arm_inertia
            - params.arm_damping * state.arm_vel[i]);
        next.arm_joints[i] += dt * next.arm_vel[i];
    }

    next.gripper_pos = (state.gripper_pos + dt * controls.gripper_vel)
        .clamp(params.gripper_min, params.gripper_max);

    next.effector = effector_position(&next.pose, &next.arm_joints, params);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn effector_matches_forward_map_after_steps() {
        let params = RobotParams::default();
        let mut state = RobotState::at_rest(Pose2::new(0.1, -0.2, 0.3), &params);
        let controls = JointControls {
            base_force: [2.0, -1.0, 0.5],
            arm_torque: [0.4, -0.2, 0.0, 0.0, 0.0, 0.0],
            gripper_vel: 0.1,
        };
        for _ in 0..50 {
            state = step_robot(&state, &controls, &params, 0.02);
        }
        let expect = effector_position(&state.pose, &state.arm_joints, &params);
        assert_relative_eq!((state.effector - expect).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn at_rest_with_zero_controls_stays_put() {
        let params = RobotParams::default();
        let state = RobotState::at_rest(Pose2::new(0.0, 0.0, 0.0), &params);
        let next = step_robot(&state, &JointControls::zeros(), &params, 0.02);
        assert_eq!(state, next);
    }

    #[test]
    fn straight_arm_reach() {
        let params = RobotParams::default();
        let eff = effector_position(&Pose2::new(0.0, 0.0, 0.0), &[0.0; 6], &params);
        assert_relative_eq!(
            eff.x,
            params.shoulder_offset + params.link1 + params.link2,
            epsilon = 1e-12
        );
        assert_relative_eq!(eff.z, params.shoulder_height, epsilon = 1e-12);
    }

    #[test]
    fn base_damping_decays_velocity() {
        let params = RobotParams::default();
        let mut state = RobotState::at_rest(Pose2::new(0.0, 0.0, 0.0), &params);
        state.base_vel = [1.0, 0.0, 0.0];
        let mut ke = state.kinetic_energy(&params);
        for _ in 0..100 {
            state = step_robot(&state, &JointControls::zeros(), &params, 0.02);
            let next_ke = state.kinetic_energy(&params);
            assert!(next_ke <= ke + 1e-12);
            ke = next_ke;
        }
    }
}

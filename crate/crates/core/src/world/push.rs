//! Planar push world: the effector pushes a disk-shaped object across the
//! ground. Contact is a penalty spring-damper normal force with a Coulomb
//! cap tangentially; the object decelerates under Coulomb ground friction.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::robot::{step_robot, JointControls, RobotParams};
use super::{ObjectKind, ObjectState, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PushWorld {
    pub robot: RobotParams,
    /// Object disk radius (m).
    pub object_radius: f64,
    pub object_height: f64,
    /// Contact penalty stiffness (N/m) and damping (N·s/m).
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    /// Effector-object Coulomb coefficient.
    pub contact_friction: f64,
    /// Smoothing speed for the tangential friction direction (m/s).
    pub slip_smoothing: f64,
    /// Object yaw Coulomb deceleration (rad/s^2).
    pub spin_decel: f64,
    pub object_inertia: f64,
    pub gravity: f64,
}

impl Default for PushWorld {
    fn default() -> Self {
        Self {
            robot: RobotParams::default(),
            object_radius: 0.15,
            object_height: 0.3,
            contact_stiffness: 600.0,
            contact_damping: 50.0,
            contact_friction: 0.5,
            slip_smoothing: 0.05,
            spin_decel: 3.0,
            object_inertia: 0.03,
            gravity: 9.81,
        }
    }
}

impl PushWorld {
    pub fn step(&self, state: &WorldState, controls: &JointControls, dt: f64) -> WorldState {
        debug_assert!(dt > 0.0 && dt <= 0.02 + 1e-12);
        let robot = step_robot(&state.robot, controls, &self.robot, dt);

        let ObjectKind::Planar {
            pose,
            vel,
            yaw_rate,
        } = state.object.kind
        else {
            return WorldState {
                robot,
                object: state.object,
            };
        };

        let obj_xy = Vector2::new(pose.x, pose.y);
        let mut v = Vector2::new(vel[0], vel[1]);
        let mut omega = yaw_rate;

        // Effector velocity from the robot substep; consistent with the
        // effector trajectory by construction.
        let eff_xy = Vector2::new(robot.effector.x, robot.effector.y);
        let eff_vel = (robot.effector - state.robot.effector).xy() / dt;

        let mut force = Vector2::zeros();
        let mut torque = 0.0;
        let delta = obj_xy - eff_xy;
        let dist = delta.norm();
        let pen = (self.object_radius + self.robot.effector_radius) - dist;
        if pen > 0.0 && dist > 1e-9 {
            let n = delta / dist;
            // Positive when the gap is still closing.
            let approach = (eff_vel - v).dot(&n);
            let normal = (self.contact_stiffness * pen + self.contact_damping * approach)
                .max(0.0);
            force += normal * n;

            let rel_t = {
                let rel = v - eff_vel;
                rel - rel.dot(&n) * n
            };
            let slip = rel_t.norm();
            if slip > 1e-9 {
                let cap = self.contact_friction * normal;
                let scale = (slip / self.slip_smoothing).min(1.0);
                force -= cap * scale * rel_t / slip;
            }

            let contact_point = eff_xy + n * self.robot.effector_radius;
            let r = contact_point - obj_xy;
            torque += r.x * force.y - r.y * force.x;
        }

        v += dt * force / state.object.mass;
        omega += dt * torque / self.object_inertia;

        // Coulomb ground friction: constant deceleration opposing motion,
        // clamped so the object rests instead of reversing.
        let decel = state.object.friction_coeff * self.gravity * dt;
        let speed = v.norm();
        if speed <= decel {
            v = Vector2::zeros();
        } else {
            v -= decel * v / speed;
        }
        let spin_step = self.spin_decel * dt;
        if omega.abs() <= spin_step {
            omega = 0.0;
        } else {
            omega -= spin_step * omega.signum();
        }

        let next_pose = super::Pose2::new(pose.x + dt * v.x, pose.y + dt * v.y, pose.yaw + dt * omega);

        WorldState {
            robot,
            object: ObjectState {
                kind: ObjectKind::Planar {
                    pose: next_pose,
                    vel: [v.x, v.y],
                    yaw_rate: omega,
                },
                ..state.object
            },
        }
    }

    pub fn object_kinetic_energy(&self, state: &WorldState) -> f64 {
        match state.object.kind {
            ObjectKind::Planar { vel, yaw_rate, .. } => {
                0.5 * state.object.mass * (vel[0] * vel[0] + vel[1] * vel[1])
                    + 0.5 * self.object_inertia * yaw_rate * yaw_rate
            }
            ObjectKind::Hinged { .. } => 0.0,
        }
    }
}

//! Hinged-plate world: a rigid plate pivots about a fixed ground edge and
//! carries a thick rim at its free edge. The effector pushes on the rim;
//! a balance angle partway up makes uprighting a crest-crossing problem
//! rather than a smooth slide.
//!
//! Geometry lives in the robot's x-z plane: the hinge line runs along the
//! world y axis at `pivot_x`. The plate extends from the pivot toward the
//! robot; at angle 0 it lies on the ground, at pi/2 it stands upright.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::robot::{step_robot, JointControls, RobotParams};
use super::{ObjectKind, ObjectState, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HingeWorld {
    pub robot: RobotParams,
    /// Hinge line x position (m).
    pub pivot_x: f64,
    /// Pivot-to-rim length (m).
    pub plate_length: f64,
    /// Rim contact circle radius (m).
    pub rim_radius: f64,
    /// Plate half-width along y (m); contact requires the effector inside.
    pub half_width: f64,
    /// Center of mass distance from the pivot (m).
    pub com_radius: f64,
    /// Plate inertia about the hinge (kg·m^2).
    pub inertia: f64,
    /// Crest angle: gravity pulls toward lying below it, upright above it.
    pub balance_angle: f64,
    pub hinge_damping: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub contact_friction: f64,
    pub slip_smoothing: f64,
    pub gravity: f64,
}

impl Default for HingeWorld {
    fn default() -> Self {
        Self {
            robot: RobotParams::default(),
            pivot_x: 1.4,
            plate_length: 0.5,
            rim_radius: 0.12,
            half_width: 0.6,
            com_radius: 0.25,
            inertia: 0.125,
            balance_angle: std::f64::consts::FRAC_PI_3,
            hinge_damping: 0.4,
            contact_stiffness: 600.0,
            contact_damping: 50.0,
            contact_friction: 0.5,
            slip_smoothing: 0.05,
            gravity: 9.81,
        }
    }
}

impl HingeWorld {
    /// Rim circle center in the x-z plane at plate angle `theta`:
    /// plate direction d = (-cos, sin) from the pivot, face normal
    /// n = (sin, cos); the rim rides the free edge offset by its radius.
    pub fn rim_center(&self, theta: f64) -> Vector2<f64> {
        let (s, c) = theta.sin_cos();
        Vector2::new(
            self.pivot_x - self.plate_length * c + self.rim_radius * s,
            self.plate_length * s + self.rim_radius * c,
        )
    }

    /// d(rim_center)/d(theta); also the rim velocity per unit rate.
    pub fn rim_tangent(&self, theta: f64) -> Vector2<f64> {
        let (s, c) = theta.sin_cos();
        Vector2::new(
            self.plate_length * s + self.rim_radius * c,
            self.plate_length * c - self.rim_radius * s,
        )
    }

    /// Gravity torque about the hinge: negative (toward lying) below the
    /// balance angle, positive (toward upright) above it.
    pub fn gravity_torque(&self, theta: f64, mass: f64) -> f64 {
        mass * self.gravity * self.com_radius * (theta - self.balance_angle).sin()
    }

    pub fn step(&self, state: &WorldState, controls: &JointControls, dt: f64) -> WorldState {
        debug_assert!(dt > 0.0);
        let robot = step_robot(&state.robot, controls, &self.robot, dt);

        let ObjectKind::Hinged { angle, rate } = state.object.kind else {
            return WorldState {
                robot,
                object: state.object,
            };
        };

        let mut torque = self.gravity_torque(angle, state.object.mass) - self.hinge_damping * rate;

        // Effector-rim contact in the x-z plane, gated by the y window.
        if robot.effector.y.abs() <= self.half_width {
            let eff = Vector2::new(robot.effector.x, robot.effector.z);
            let eff_vel = {
                let d = robot.effector - state.robot.effector;
                Vector2::new(d.x, d.z) / dt
            };
            let center = self.rim_center(angle);
            let tangent = self.rim_tangent(angle);
            let rim_vel = rate * tangent;

            let delta = eff - center;
            let dist = delta.norm();
            let pen = (self.rim_radius + self.robot.effector_radius) - dist;
            if pen > 0.0 && dist > 1e-9 {
                let m = delta / dist; // rim center -> effector
                let approach = (eff_vel - rim_vel).dot(&m);
                let normal =
                    (self.contact_stiffness * pen + self.contact_damping * approach).max(0.0);
                // Force on the plate points away from the effector.
                let mut force = -normal * m;

                let rel_t = {
                    let rel = rim_vel - eff_vel;
                    rel - rel.dot(&m) * m
                };
                let slip = rel_t.norm();
                if slip > 1e-9 {
                    let cap = self.contact_friction * normal;
                    let scale = (slip / self.slip_smoothing).min(1.0);
                    force -= cap * scale * rel_t / slip;
                }

                torque += force.dot(&tangent);
            }
        }

        let mut next_rate = rate + dt * torque / self.inertia;
        let mut next_angle = angle + dt * next_rate;
        // Inelastic stops at lying and upright.
        if next_angle <= 0.0 {
            next_angle = 0.0;
            next_rate = 0.0;
        } else if next_angle >= std::f64::consts::FRAC_PI_2 {
            next_angle = std::f64::consts::FRAC_PI_2;
            next_rate = 0.0;
        }

        WorldState {
            robot,
            object: ObjectState {
                kind: ObjectKind::Hinged {
                    angle: next_angle,
                    rate: next_rate,
                },
                ..state.object
            },
        }
    }
}

//! Deterministic desk-scale dynamics: a planar push world for Move tasks
//! and a hinged-plate world for Upright tasks, plus task success detection.

pub mod hinge;
pub mod push;
pub mod robot;

use nalgebra::{UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

pub use hinge::HingeWorld;
pub use push::PushWorld;
pub use robot::{
    effector_position, step_robot, JointControls, Pose2, RobotParams, RobotState, CONTROL_DIM,
};

/// Object configuration, one variant per world family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ObjectKind {
    /// Planar rigid body sliding on the ground.
    Planar {
        pose: Pose2,
        /// World-frame linear velocity.
        vel: [f64; 2],
        yaw_rate: f64,
    },
    /// Rigid plate pivoting about a fixed horizontal ground edge.
    /// `angle` runs from 0 (lying) to pi/2 (upright).
    Hinged { angle: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub kind: ObjectKind,
    pub mass: f64,
    pub friction_coeff: f64,
}

impl ObjectState {
    pub fn is_finite(&self) -> bool {
        match self.kind {
            ObjectKind::Planar {
                pose,
                vel,
                yaw_rate,
            } => {
                pose.x.is_finite()
                    && pose.y.is_finite()
                    && pose.yaw.is_finite()
                    && vel.iter().all(|v| v.is_finite())
                    && yaw_rate.is_finite()
            }
            ObjectKind::Hinged { angle, rate } => angle.is_finite() && rate.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub robot: RobotState,
    pub object: ObjectState,
}

impl WorldState {
    pub fn is_finite(&self) -> bool {
        self.robot.is_finite() && self.object.is_finite()
    }
}

/// The two desk worlds behind one stepping interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum World {
    Push(PushWorld),
    Hinge(HingeWorld),
}

impl World {
    pub fn step(&self, state: &WorldState, controls: &JointControls, dt: f64) -> WorldState {
        match self {
            World::Push(w) => w.step(state, controls, dt),
            World::Hinge(w) => w.step(state, controls, dt),
        }
    }

    pub fn robot_params(&self) -> &RobotParams {
        match self {
            World::Push(w) => &w.robot,
            World::Hinge(w) => &w.robot,
        }
    }

    /// Manipulation-relevant object position (planar: body center at half
    /// height; hinged: the rim the robot pushes on).
    pub fn object_position(&self, state: &WorldState) -> Vector3<f64> {
        match (self, &state.object.kind) {
            (World::Push(w), ObjectKind::Planar { pose, .. }) => {
                Vector3::new(pose.x, pose.y, w.object_height * 0.5)
            }
            (World::Hinge(w), ObjectKind::Hinged { angle, .. }) => {
                let c = w.rim_center(*angle);
                Vector3::new(c[0], 0.0, c[1])
            }
            _ => Vector3::zeros(),
        }
    }

    pub fn object_linear_velocity(&self, state: &WorldState) -> Vector3<f64> {
        match (self, &state.object.kind) {
            (World::Push(_), ObjectKind::Planar { vel, .. }) => {
                Vector3::new(vel[0], vel[1], 0.0)
            }
            (World::Hinge(w), ObjectKind::Hinged { angle, rate }) => {
                let d = w.rim_tangent(*angle);
                Vector3::new(rate * d[0], 0.0, rate * d[1])
            }
            _ => Vector3::zeros(),
        }
    }

    /// Object orientation: yaw rotation for the planar body, rotation by
    /// the tilt angle about the hinge (world y) axis for the plate.
    pub fn object_orientation(&self, state: &WorldState) -> UnitQuaternion<f64> {
        match &state.object.kind {
            ObjectKind::Planar { pose, .. } => {
                UnitQuaternion::from_axis_angle(&Vector3::z_axis(), pose.yaw)
            }
            ObjectKind::Hinged { angle, .. } => {
                UnitQuaternion::from_axis_angle(&Vector3::y_axis(), *angle)
            }
        }
    }

    pub fn object_angular_rate(&self, state: &WorldState) -> f64 {
        match &state.object.kind {
            ObjectKind::Planar { yaw_rate, .. } => *yaw_rate,
            ObjectKind::Hinged { rate, .. } => *rate,
        }
    }
}

/// Success definition and thresholds for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub criterion: SuccessCriterion,
    /// Move: goal distance tolerance (m).
    pub pos_tol: f64,
    /// Move: object speed tolerance (m/s).
    pub vel_tol: f64,
    /// Upright: orientation distance tolerance (rad).
    pub orient_tol: f64,
    /// Upright: angular rate tolerance (rad/s).
    pub angvel_tol: f64,
    pub time_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SuccessCriterion {
    Move { goal: [f64; 2] },
    Upright { upright_angle: f64 },
}

impl TaskSpec {
    pub fn move_to(goal: [f64; 2], time_limit: f64) -> Self {
        Self {
            criterion: SuccessCriterion::Move { goal },
            pos_tol: 0.1,
            vel_tol: 0.05,
            orient_tol: 0.1,
            angvel_tol: 0.05,
            time_limit,
        }
    }

    pub fn upright(time_limit: f64) -> Self {
        Self {
            criterion: SuccessCriterion::Upright {
                upright_angle: std::f64::consts::FRAC_PI_2,
            },
            pos_tol: 0.1,
            vel_tol: 0.05,
            orient_tol: 0.1,
            angvel_tol: 0.05,
            time_limit,
        }
    }

    pub fn upright_quat(&self) -> UnitQuaternion<f64> {
        match self.criterion {
            SuccessCriterion::Upright { upright_angle } => {
                UnitQuaternion::from_axis_angle(&Vector3::y_axis(), upright_angle)
            }
            SuccessCriterion::Move { .. } => UnitQuaternion::identity(),
        }
    }

    pub fn goal_position(&self) -> Vector3<f64> {
        match self.criterion {
            SuccessCriterion::Move { goal } => Vector3::new(goal[0], goal[1], 0.0),
            SuccessCriterion::Upright { .. } => Vector3::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuccessState {
    Success,
    Running,
    Timeout,
}

/// Geodesic rotation distance, invariant to the quaternion double cover.
pub fn orientation_angle(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let dot = a.coords.dot(&b.coords).abs().clamp(0.0, 1.0);
    2.0 * dot.acos()
}

/// Task success: Move needs the object within `pos_tol` of the goal and
/// slower than `vel_tol`; Upright needs the orientation within
/// `orient_tol` radians of upright and the angular rate below
/// `angvel_tol`. Timeout applies only while not successful.
pub fn check_success(
    world: &World,
    state: &WorldState,
    spec: &TaskSpec,
    elapsed: f64,
) -> SuccessState {
    let success = match &spec.criterion {
        SuccessCriterion::Move { goal } => {
            let p = world.object_position(state);
            let dist = (Vector2::new(p.x, p.y) - Vector2::new(goal[0], goal[1])).norm();
            let speed = world.object_linear_velocity(state).norm();
            dist < spec.pos_tol && speed < spec.vel_tol
        }
        SuccessCriterion::Upright { .. } => {
            let q = world.object_orientation(state);
            let angle = orientation_angle(&q, &spec.upright_quat());
            angle < spec.orient_tol && world.object_angular_rate(state).abs() < spec.angvel_tol
        }
    };
    if success {
        SuccessState::Success
    } else if elapsed > spec.time_limit {
        SuccessState::Timeout
    } else {
        SuccessState::Running
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn push_state(obj_x: f64, obj_y: f64, vel: [f64; 2]) -> (World, WorldState) {
        let world = World::Push(PushWorld::default());
        let robot = RobotState::at_rest(Pose2::new(-1.0, 0.0, 0.0), world.robot_params());
        let state = WorldState {
            robot,
            object: ObjectState {
                kind: ObjectKind::Planar {
                    pose: Pose2::new(obj_x, obj_y, 0.0),
                    vel,
                    yaw_rate: 0.0,
                },
                mass: 1.5,
                friction_coeff: 0.5,
            },
        };
        (world, state)
    }

    #[test]
    fn success_within_tolerances() {
        let (world, state) = push_state(0.05, 0.0, [0.01, 0.0]);
        let spec = TaskSpec::move_to([0.0, 0.0], 30.0);
        assert_eq!(
            check_success(&world, &state, &spec, 10.0),
            SuccessState::Success
        );
    }

    #[test]
    fn running_outside_tolerance() {
        let (world, state) = push_state(0.15, 0.0, [0.0, 0.0]);
        let spec = TaskSpec::move_to([0.0, 0.0], 30.0);
        assert_eq!(
            check_success(&world, &state, &spec, 10.0),
            SuccessState::Running
        );
    }

    #[test]
    fn timeout_after_limit() {
        let (world, state) = push_state(0.15, 0.0, [0.0, 0.0]);
        let spec = TaskSpec::move_to([0.0, 0.0], 30.0);
        assert_eq!(
            check_success(&world, &state, &spec, 31.0),
            SuccessState::Timeout
        );
    }

    #[test]
    fn success_wins_over_timeout() {
        let (world, state) = push_state(0.05, 0.0, [0.0, 0.0]);
        let spec = TaskSpec::move_to([0.0, 0.0], 30.0);
        assert_eq!(
            check_success(&world, &state, &spec, 31.0),
            SuccessState::Success
        );
    }

    #[test]
    fn orientation_angle_double_cover() {
        let a = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.3);
        let b = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 1.2);
        let minus_b = UnitQuaternion::new_unchecked(-b.into_inner());
        assert!((orientation_angle(&a, &b) - 0.9).abs() < 1e-12);
        assert!((orientation_angle(&a, &minus_b) - 0.9).abs() < 1e-12);
    }
}

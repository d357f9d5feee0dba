//! World-state to site-frame adapters.
//!
//! The adapter is total: it publishes the full site vocabulary on every
//! call, deriving synthetic sites (grasp points, approach points, desired
//! gripper/torso placements) from the live object pose each step.
//! Conventions for the desk worlds:
//!   - push world object axes come straight from its yaw rotation;
//!   - hinge world: `object_z` is the plate's long axis (vertical when
//!     upright), `object_y` is the face normal (the tire-axle analog:
//!     its z-component vanishes at upright), `object_x` is the hinge axis.

use nalgebra::{UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::world::{ObjectKind, World, WorldState};

use super::{GripSignal, SiteFrame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameSynth {
    pub goal: [f64; 2],
    /// Upright target angle about the hinge axis.
    pub upright_angle: f64,
    /// Arm pose whose deviation feeds the posture regularizer.
    pub arm_default: [f64; 6],
    /// Lateral spacing of paired synthetic sites (grasp_L/R, feet).
    pub lateral_offset: f64,
    /// Stand-off for approach sites, toward the robot.
    pub approach_distance: f64,
    /// Stand-off of the desired torso site, opposite the goal direction.
    pub behind_distance: f64,
    /// Target z for the stacking site.
    pub stack_height: f64,
}

impl Default for FrameSynth {
    fn default() -> Self {
        Self {
            goal: [0.0, 0.0],
            upright_angle: std::f64::consts::FRAC_PI_2,
            arm_default: [0.0; 6],
            lateral_offset: 0.3,
            approach_distance: 0.6,
            behind_distance: 0.5,
            stack_height: 0.3,
        }
    }
}

impl FrameSynth {
    pub fn build(&self, world: &World, state: &WorldState, grip: Option<GripSignal>) -> SiteFrame {
        let mut f = SiteFrame::new();
        let params = world.robot_params();
        let robot = &state.robot;

        let p_obj = world.object_position(state);
        let goal = Vector3::new(self.goal[0], self.goal[1], p_obj.z);
        let torso = robot.torso_position(params);
        let gripper = robot.effector;

        f.set_position("object", p_obj);
        f.set_position("goal", goal);
        f.set_position("gripper", gripper);
        f.set_position("torso", torso);
        f.set_position("pelvis", torso);

        // Heading frame of the robot.
        let (sy, cy) = robot.pose.yaw.sin_cos();
        let heading = Vector3::new(cy, sy, 0.0);
        let left = Vector3::new(-sy, cy, 0.0);
        f.set_axis("robot_x", heading);
        f.set_axis("robot_z", Vector3::z());

        // Feet and palms hang off the base/effector laterally.
        let base = Vector3::new(robot.pose.x, robot.pose.y, 0.0);
        let fwd_ground = heading * params.shoulder_offset;
        f.set_position("fl_foot", base + fwd_ground + left * self.lateral_offset * 0.5);
        f.set_position("fr_foot", base + fwd_ground - left * self.lateral_offset * 0.5);
        f.set_position("left_palm", gripper + left * 0.08);
        f.set_position("right_palm", gripper - left * 0.08);

        // Gripper axes follow the distal arm link.
        let pitch = robot.arm_joints[0] + robot.arm_joints[1];
        let (sp, cp) = pitch.sin_cos();
        let grip_x = Vector3::new(cp * cy, cp * sy, sp);
        f.set_axis("gripper_x", grip_x);
        f.set_axis("gripper_y", left);
        f.set_axis("gripper_z", grip_x.cross(&left));

        // Object orientation and derived axes.
        let q_obj = world.object_orientation(state);
        f.set_quat("object", q_obj);
        f.set_quat(
            "upright",
            UnitQuaternion::from_axis_angle(&Vector3::y_axis(), self.upright_angle),
        );
        match &state.object.kind {
            ObjectKind::Planar { .. } => {
                f.set_axis("object_x", q_obj * Vector3::x());
                f.set_axis("object_y", q_obj * Vector3::y());
                f.set_axis("object_z", q_obj * Vector3::z());
            }
            ObjectKind::Hinged { .. } => {
                f.set_axis("object_x", q_obj * Vector3::y());
                f.set_axis("object_y", q_obj * Vector3::z());
                f.set_axis("object_z", q_obj * -Vector3::x());
            }
        }

        // Velocities.
        f.set_velocity("object", world.object_linear_velocity(state));
        let ang = world.object_angular_rate(state);
        let ang_axis = match &state.object.kind {
            ObjectKind::Planar { .. } => Vector3::z(),
            ObjectKind::Hinged { .. } => Vector3::y(),
        };
        f.set_velocity("object_ang", ang * ang_axis);
        f.set_velocity("bottom", Vector3::zeros());
        f.set_velocity("bottom_ang", Vector3::zeros());
        let vw = robot.base_vel_world();
        f.set_velocity("base", Vector3::new(vw[0], vw[1], 0.0));

        // Synthetic manipulation sites recomputed from the live pose.
        let to_robot = {
            let d = Vector2::new(torso.x - p_obj.x, torso.y - p_obj.y);
            let n = d.norm();
            if n > 1e-9 {
                Vector3::new(d.x / n, d.y / n, 0.0)
            } else {
                -heading
            }
        };
        let obj_left = Vector3::new(-to_robot.y, to_robot.x, 0.0);

        f.set_position("gripper_des", p_obj);
        f.set_position("grasp", p_obj);
        f.set_position("grasp_L", p_obj + obj_left * self.lateral_offset);
        f.set_position("grasp_R", p_obj - obj_left * self.lateral_offset);
        f.set_position("handle", p_obj);
        f.set_position("door", p_obj);
        let approach_mid = p_obj + to_robot * self.approach_distance;
        f.set_position("approach_mid", Vector3::new(approach_mid.x, approach_mid.y, torso.z));
        f.set_position(
            "approach_L",
            Vector3::new(
                approach_mid.x + obj_left.x * self.lateral_offset,
                approach_mid.y + obj_left.y * self.lateral_offset,
                torso.z,
            ),
        );
        f.set_position(
            "approach_R",
            Vector3::new(
                approach_mid.x - obj_left.x * self.lateral_offset,
                approach_mid.y - obj_left.y * self.lateral_offset,
                torso.z,
            ),
        );
        f.set_position(
            "fl_foot_des",
            Vector3::new(p_obj.x + obj_left.x * 0.2, p_obj.y + obj_left.y * 0.2, 0.0),
        );
        f.set_position(
            "fr_foot_des",
            Vector3::new(p_obj.x - obj_left.x * 0.2, p_obj.y - obj_left.y * 0.2, 0.0),
        );

        // Desired torso: opposite the goal direction from the object,
        // positioning the robot behind the object for pushing.
        let away_from_goal = {
            let d = Vector2::new(p_obj.x - goal.x, p_obj.y - goal.y);
            let n = d.norm();
            if n > 1e-9 {
                Vector3::new(d.x / n, d.y / n, 0.0)
            } else {
                to_robot
            }
        };
        let torso_des = p_obj + away_from_goal * self.behind_distance;
        f.set_position("torso_des", Vector3::new(torso_des.x, torso_des.y, torso.z));
        f.set_position("torso_ref", Vector3::new(torso.x, torso.y, params.torso_height));

        // Stacking sites: the goal marks the bottom object.
        f.set_position("stack_bottom", Vector3::new(goal.x, goal.y, p_obj.z));
        f.set_position("stack_target", Vector3::new(goal.x, goal.y, self.stack_height));
        let stack_dir = {
            let d = Vector3::new(goal.x - p_obj.x, goal.y - p_obj.y, 0.0);
            if d.norm() > 1e-9 {
                d
            } else {
                Vector3::z()
            }
        };
        f.set_axis("stack_dir", stack_dir);

        f.set_scalar("torso_roll", 0.0);
        let posture_err: f64 = robot
            .arm_joints
            .iter()
            .zip(&self.arm_default)
            .map(|(q, d)| (q - d) * (q - d))
            .sum::<f64>()
            .sqrt();
        f.set_scalar("arm_posture_err", posture_err);

        f.grip = grip;
        f
    }
}

/// Synthetic frame carrying the full site vocabulary with generic,
/// all-finite values. Coverage tests evaluate every task assembly on it.
pub fn canonical_fixture() -> SiteFrame {
    let mut f = SiteFrame::new();
    let sites = [
        ("object", [0.8, 0.1, 0.15]),
        ("goal", [2.0, 0.0, 0.15]),
        ("gripper", [0.5, 0.0, 0.3]),
        ("torso", [0.0, 0.0, 0.35]),
        ("pelvis", [0.0, 0.0, 0.35]),
        ("fl_foot", [0.2, 0.15, 0.0]),
        ("fr_foot", [0.2, -0.15, 0.0]),
        ("left_palm", [0.5, 0.08, 0.3]),
        ("right_palm", [0.5, -0.08, 0.3]),
        ("handle", [0.8, 0.1, 0.5]),
        ("door", [0.9, 0.1, 0.5]),
        ("grasp", [0.8, 0.1, 0.2]),
        ("grasp_L", [0.8, 0.4, 0.2]),
        ("grasp_R", [0.8, -0.2, 0.2]),
        ("approach_L", [0.3, 0.4, 0.35]),
        ("approach_mid", [0.3, 0.1, 0.35]),
        ("approach_R", [0.3, -0.2, 0.35]),
        ("gripper_des", [0.8, 0.1, 0.15]),
        ("torso_des", [0.2, 0.1, 0.35]),
        ("fl_foot_des", [0.7, 0.3, 0.0]),
        ("fr_foot_des", [0.7, -0.1, 0.0]),
        ("torso_ref", [0.0, 0.0, 0.35]),
        ("stack_bottom", [2.0, 0.0, 0.15]),
        ("stack_target", [2.0, 0.0, 0.3]),
    ];
    for (name, p) in sites {
        f.set_position(name, Vector3::new(p[0], p[1], p[2]));
    }

    let tilt = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.4);
    f.set_quat("object", tilt);
    f.set_quat(
        "upright",
        UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2),
    );
    f.set_axis("object_x", tilt * Vector3::x());
    f.set_axis("object_y", tilt * Vector3::y());
    f.set_axis("object_z", tilt * Vector3::z());
    f.set_axis("gripper_x", Vector3::new(0.9, 0.0, 0.1));
    f.set_axis("gripper_y", Vector3::y());
    f.set_axis("gripper_z", Vector3::new(-0.1, 0.0, 0.9));
    f.set_axis("robot_x", Vector3::x());
    f.set_axis("robot_z", Vector3::z());
    f.set_axis("stack_dir", Vector3::new(1.0, 0.0, -0.2));

    f.set_velocity("object", Vector3::new(0.1, 0.0, 0.0));
    f.set_velocity("object_ang", Vector3::new(0.0, 0.05, 0.0));
    f.set_velocity("bottom", Vector3::new(0.02, 0.0, 0.0));
    f.set_velocity("bottom_ang", Vector3::zeros());
    f.set_velocity("base", Vector3::new(0.2, 0.0, 0.0));

    f.set_scalar("torso_roll", 0.05);
    f.set_scalar("arm_posture_err", 0.3);
    f.grip = Some(GripSignal {
        commanded_close: true,
        position_error: 0.02,
    });
    f
}

//! Per-task cost assemblies over the shared term vocabulary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{ControlSource, CostTerm, DistMask, DotMode, TaskCost, TermKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    TireUpright,
    BarrierUpright,
    ConeUpright,
    ChairUpright,
    TireStack,
    BarrierDrag,
    RackDrag,
    RuggedBoxPush,
    G1BoxPush,
    G1ChairPush,
    G1DoorOpen,
    G1TablePush,
    MoveGeneric,
    UprightGeneric,
    E2eMpcMove,
}

impl TaskId {
    pub const ALL: [TaskId; 15] = [
        TaskId::TireUpright,
        TaskId::BarrierUpright,
        TaskId::ConeUpright,
        TaskId::ChairUpright,
        TaskId::TireStack,
        TaskId::BarrierDrag,
        TaskId::RackDrag,
        TaskId::RuggedBoxPush,
        TaskId::G1BoxPush,
        TaskId::G1ChairPush,
        TaskId::G1DoorOpen,
        TaskId::G1TablePush,
        TaskId::MoveGeneric,
        TaskId::UprightGeneric,
        TaskId::E2eMpcMove,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskId::TireUpright => "tire_upright",
            TaskId::BarrierUpright => "barrier_upright",
            TaskId::ConeUpright => "cone_upright",
            TaskId::ChairUpright => "chair_upright",
            TaskId::TireStack => "tire_stack",
            TaskId::BarrierDrag => "barrier_drag",
            TaskId::RackDrag => "rack_drag",
            TaskId::RuggedBoxPush => "rugged_box_push",
            TaskId::G1BoxPush => "g1_box_push",
            TaskId::G1ChairPush => "g1_chair_push",
            TaskId::G1DoorOpen => "g1_door_open",
            TaskId::G1TablePush => "g1_table_push",
            TaskId::MoveGeneric => "move_generic",
            TaskId::UprightGeneric => "upright_generic",
            TaskId::E2eMpcMove => "e2e_mpc_move",
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTask {
                id: s.to_owned(),
                valid: TaskId::ALL
                    .iter()
                    .map(|t| t.as_str())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

/// Weights and shaping constants feeding a task assembly. Weight names are
/// task-local (`goal`, `gripper`, ...); missing entries fall back to the
/// task's defaults so tuners can override any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub weights: BTreeMap<String, f64>,
    /// Sparsity of the exponential axis-alignment terms.
    pub alpha: f64,
    /// Smoothing of the exponential component terms.
    pub sigma: f64,
    /// Proximity cap for the negated torso-distance terms.
    pub d_thresh: f64,
    pub grasp_bonus: f64,
    pub grasp_empty_penalty: f64,
    pub resistance_threshold: f64,
    pub safety_min_height: f64,
    pub safety_max_roll: f64,
    pub safety_penalty: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            weights: BTreeMap::new(),
            alpha: 4.0,
            sigma: 0.25,
            d_thresh: 1.0,
            grasp_bonus: 2.0,
            grasp_empty_penalty: 0.5,
            resistance_threshold: 0.05,
            safety_min_height: 0.15,
            safety_max_roll: 0.6,
            safety_penalty: 50.0,
        }
    }
}

impl CostParams {
    pub fn with_weight(mut self, name: &str, value: f64) -> Self {
        self.weights.insert(name.to_owned(), value);
        self
    }

    fn weight(&self, name: &str, default: f64) -> f64 {
        self.weights.get(name).copied().unwrap_or(default)
    }

    fn safety(&self) -> CostTerm {
        CostTerm {
            kind: TermKind::SafetyPenalty {
                min_height: self.safety_min_height,
                max_roll: self.safety_max_roll,
                penalty: self.safety_penalty,
            },
            weight: 1.0,
        }
    }

    fn grasp(&self) -> CostTerm {
        CostTerm {
            kind: TermKind::GraspBonus {
                bonus: self.grasp_bonus,
                empty_penalty: self.grasp_empty_penalty,
                resistance_threshold: self.resistance_threshold,
            },
            weight: 1.0,
        }
    }
}

fn dist(a: &str, b: &str, mask: DistMask, weight: f64) -> CostTerm {
    CostTerm {
        kind: TermKind::SiteDistance {
            a: a.into(),
            b: b.into(),
            mask,
        },
        weight,
    }
}

fn goal_dist(object: &str, goal: &str, weight: f64) -> CostTerm {
    CostTerm {
        kind: TermKind::GoalDistance {
            object: object.into(),
            goal: goal.into(),
        },
        weight,
    }
}

fn goal_dist_xy(object: &str, goal: &str, weight: f64) -> CostTerm {
    CostTerm {
        kind: TermKind::GoalDistanceXy {
            object: object.into(),
            goal: goal.into(),
        },
        weight,
    }
}

fn min_dist(pairs: &[(&str, &str)], weight: f64) -> CostTerm {
    CostTerm {
        kind: TermKind::MinSiteDistance {
            pairs: pairs
                .iter()
                .map(|(a, b)| ((*a).into(), (*b).into()))
                .collect(),
        },
        weight,
    }
}

fn axis_dot(a: &str, b: &str, mode: DotMode, weight: f64) -> CostTerm {
    CostTerm {
        kind: TermKind::AxisDotPenalty {
            a: a.into(),
            b: b.into(),
            mode,
        },
        weight,
    }
}

fn exp_align(a: &str, b: &str, alpha: f64, weight: f64) -> CostTerm {
    CostTerm {
        kind: TermKind::ExpAxisAlignment {
            a: a.into(),
            b: b.into(),
            alpha,
        },
        weight,
    }
}

fn vel(site: &str, squared: bool, weight: f64) -> CostTerm {
    CostTerm {
        kind: TermKind::VelocityPenalty {
            site: site.into(),
            squared,
        },
        weight,
    }
}

fn ctrl(source: ControlSource, weight: f64) -> CostTerm {
    CostTerm {
        kind: TermKind::ControlPenalty { source },
        weight,
    }
}

/// Build the term list for a task. Every list mirrors that task's cost
/// formula exactly; weight defaults are ours and live here.
pub fn assemble_task_cost(task: TaskId, p: &CostParams) -> TaskCost {
    let terms = match task {
        TaskId::MoveGeneric => vec![
            goal_dist("object", "goal", p.weight("goal", 2.0)),
            dist("gripper", "object", DistMask::Full, p.weight("gripper", 0.15)),
            vel("object", false, p.weight("vel", 0.2)),
        ],
        TaskId::UprightGeneric => vec![
            CostTerm {
                kind: TermKind::QuatDistance {
                    a: "object".into(),
                    b: "upright".into(),
                },
                weight: p.weight("upright", 4.0),
            },
            dist("gripper", "object", DistMask::Full, p.weight("gripper", 1.0)),
        ],
        TaskId::E2eMpcMove => vec![
            goal_dist("object", "goal", p.weight("goal", 2.0)),
            dist("gripper", "object", DistMask::Full, p.weight("gripper", 0.15)),
            vel("object", false, p.weight("vel", 0.2)),
            // Locomotion regularizers: height keeping, torso uprightness,
            // base-velocity and joint-control magnitudes, fall penalty.
            dist("torso", "torso_ref", DistMask::Z, p.weight("height", 1.0)),
            axis_dot("robot_z", "world_z", DotMode::OneMinusDot, p.weight("posture", 1.0)),
            ctrl(ControlSource::BaseVelocity, p.weight("base_vel", 0.02)),
            ctrl(ControlSource::JointControls, p.weight("ctrl", 0.002)),
            p.safety(),
        ],
        TaskId::TireUpright => vec![
            CostTerm {
                kind: TermKind::ExpAbsComponent {
                    axis: "object_y".into(),
                    component: 2,
                    sigma: p.sigma,
                },
                weight: p.weight("orient", 2.0),
            },
            dist("gripper", "gripper_des", DistMask::Full, p.weight("gripper", 1.0)),
            min_dist(
                &[("fr_foot", "fr_foot_des"), ("fl_foot", "fl_foot_des")],
                p.weight("foot", 0.5),
            ),
            dist("torso", "torso_des", DistMask::Full, p.weight("torso", 0.5)),
            ctrl(ControlSource::JointControls, p.weight("ctrl", 0.01)),
            p.safety(),
        ],
        TaskId::BarrierUpright => vec![
            exp_align("object_z", "world_z", p.alpha, p.weight("orient", 3.0)),
            min_dist(
                &[("gripper", "grasp_L"), ("gripper", "grasp_R")],
                p.weight("grasp", 1.0),
            ),
            axis_dot("gripper_x", "object_x", DotMode::OneMinusAbsDot, p.weight("grip", 0.5)),
            axis_dot("gripper_y", "object_z", DotMode::OneMinusAbsDot, p.weight("grip", 0.5)),
            min_dist(
                &[("torso", "approach_L"), ("torso", "approach_R")],
                p.weight("approach", 0.5),
            ),
            vel("object", true, p.weight("vel", 0.1)),
            ctrl(ControlSource::JointControls, p.weight("ctrl", 0.01)),
            p.grasp(),
            p.safety(),
        ],
        TaskId::ConeUpright | TaskId::ChairUpright => vec![
            exp_align("object_z", "world_z", p.alpha, p.weight("orient", 3.0)),
            dist("gripper", "object", DistMask::Full, p.weight("gripper", 1.0)),
            CostTerm {
                kind: TermKind::CappedNegatedProximity {
                    a: "torso".into(),
                    b: "object".into(),
                    d_thresh: p.d_thresh,
                },
                weight: p.weight("torso", 0.5),
            },
            vel("object", true, p.weight("vel", 0.1)),
            ctrl(ControlSource::JointControls, p.weight("ctrl", 0.01)),
            p.safety(),
        ],
        TaskId::TireStack => vec![
            dist("object", "stack_bottom", DistMask::Xy, p.weight("xy", 2.0)),
            dist("object", "stack_target", DistMask::Z, p.weight("z", 2.0)),
            axis_dot("object_y", "stack_dir", DotMode::OneMinusDot, p.weight("orient", 1.0)),
            vel("bottom", false, p.weight("bottom", 1.0)),
            CostTerm {
                kind: TermKind::AngvelPenalty {
                    site: "bottom".into(),
                    squared: false,
                },
                weight: p.weight("bottom", 1.0),
            },
            dist("gripper", "gripper_des", DistMask::Full, p.weight("gripper", 1.0)),
            dist("torso", "torso_des", DistMask::Full, p.weight("torso", 0.5)),
            ctrl(ControlSource::JointControls, p.weight("ctrl", 0.01)),
            p.safety(),
        ],
        TaskId::BarrierDrag => vec![
            goal_dist("object", "goal", p.weight("goal", 1.0)),
            exp_align("object_z", "world_z", p.alpha, p.weight("orient", 2.0)),
            min_dist(
                &[("gripper", "grasp_L"), ("gripper", "grasp_R")],
                p.weight("grasp", 1.0),
            ),
            axis_dot("gripper_x", "object_x", DotMode::OneMinusAbsDot, p.weight("grip", 0.5)),
            axis_dot("gripper_y", "object_z", DotMode::OneMinusAbsDot, p.weight("grip", 0.5)),
            vel("object", true, p.weight("vel", 0.1)),
            ctrl(ControlSource::JointControls, p.weight("ctrl", 0.01)),
            p.grasp(),
            p.safety(),
        ],
        TaskId::RackDrag => vec![
            goal_dist("object", "goal", p.weight("goal", 1.0)),
            axis_dot("object_x", "world_x", DotMode::OneMinusDot, p.weight("orient", 0.5)),
            axis_dot("object_y", "world_y", DotMode::OneMinusDot, p.weight("orient", 0.5)),
            axis_dot("object_z", "world_z", DotMode::OneMinusDot, p.weight("orient", 0.5)),
            dist("gripper", "grasp", DistMask::Full, p.weight("grasp", 1.0)),
            axis_dot("gripper_z", "object_z", DotMode::OneMinusDot, p.weight("grip", 0.5)),
            min_dist(
                &[
                    ("torso", "approach_L"),
                    ("torso", "approach_mid"),
                    ("torso", "approach_R"),
                ],
                p.weight("approach", 0.5),
            ),
            p.grasp(),
            p.safety(),
        ],
        TaskId::RuggedBoxPush => vec![
            goal_dist("object", "goal", p.weight("goal", 1.0)),
            axis_dot("object_x", "world_x", DotMode::AbsOneMinusDot, p.weight("orient", 0.3)),
            axis_dot("object_y", "world_y", DotMode::AbsOneMinusDot, p.weight("orient", 0.3)),
            axis_dot("object_z", "world_z", DotMode::AbsOneMinusDot, p.weight("orient", 0.3)),
            dist("torso", "torso_des", DistMask::Full, p.weight("torso", 0.5)),
            dist("gripper", "object", DistMask::Full, p.weight("gripper", 0.4)),
            ctrl(ControlSource::JointControls, p.weight("ctrl", 0.01)),
            p.safety(),
        ],
        TaskId::G1BoxPush => vec![
            goal_dist("object", "goal", p.weight("goal", 1.0)),
            axis_dot("object_y", "world_z", DotMode::AbsOneMinusDot, p.weight("orient", 0.5)),
            min_dist(
                &[("left_palm", "object"), ("right_palm", "object")],
                p.weight("hand", 0.5),
            ),
            dist("pelvis", "object", DistMask::Full, -p.weight("pelvis", 0.2)),
            axis_dot("robot_x", "world_x", DotMode::RawDot, -p.weight("facing", 0.2)),
            ctrl(ControlSource::BaseVelocity, p.weight("ctrl", 0.02)),
            ctrl(ControlSource::ArmPosture, p.weight("ctrl", 0.02)),
            p.safety(),
        ],
        TaskId::G1ChairPush => vec![
            goal_dist_xy("object", "goal", p.weight("goal", 1.0)),
            axis_dot("object_z", "world_z", DotMode::AbsOneMinusDot, p.weight("orient", 0.5)),
            min_dist(
                &[("left_palm", "object"), ("right_palm", "object")],
                p.weight("hand", 0.5),
            ),
            dist("pelvis", "object", DistMask::Full, -p.weight("pelvis", 0.2)),
            vel("object", true, p.weight("vel", 0.1)),
            ctrl(ControlSource::BaseVelocity, p.weight("ctrl", 0.02)),
            ctrl(ControlSource::ArmPosture, p.weight("ctrl", 0.02)),
            p.safety(),
        ],
        TaskId::G1DoorOpen => vec![
            goal_dist("pelvis", "goal", p.weight("goal", 1.0)),
            dist("right_palm", "handle", DistMask::Full, p.weight("hand", 0.5)),
            dist("pelvis", "door", DistMask::Full, -p.weight("pelvis", 0.2)),
            axis_dot("robot_x", "world_x", DotMode::RawDot, -p.weight("facing", 0.2)),
            ctrl(ControlSource::BaseVelocity, p.weight("ctrl", 0.02)),
            ctrl(ControlSource::ArmPosture, p.weight("ctrl", 0.02)),
            p.safety(),
        ],
        TaskId::G1TablePush => vec![
            goal_dist_xy("object", "goal", p.weight("goal", 1.0)),
            axis_dot("object_y", "world_z", DotMode::AbsOneMinusDot, p.weight("orient", 0.5)),
            min_dist(
                &[("left_palm", "object"), ("right_palm", "object")],
                p.weight("hand", 0.5),
            ),
            dist("pelvis", "object", DistMask::Full, -p.weight("pelvis", 0.2)),
            vel("object", true, p.weight("vel", 0.1)),
            ctrl(ControlSource::BaseVelocity, p.weight("ctrl", 0.02)),
            ctrl(ControlSource::ArmPosture, p.weight("ctrl", 0.02)),
            p.safety(),
        ],
    };
    TaskCost::new(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{canonical_fixture, eval_term, j_move};
    use crate::world::JointControls;

    #[test]
    fn move_generic_has_three_terms() {
        let cost = assemble_task_cost(TaskId::MoveGeneric, &CostParams::default());
        assert_eq!(cost.terms.len(), 3);
    }

    #[test]
    fn e2e_extends_move_with_locomotion_terms() {
        let params = CostParams::default();
        let move_cost = assemble_task_cost(TaskId::MoveGeneric, &params);
        let e2e = assemble_task_cost(TaskId::E2eMpcMove, &params);
        assert!(e2e.terms.len() > move_cost.terms.len());
        // The Move terms lead the list unchanged.
        assert_eq!(&e2e.terms[..3], &move_cost.terms[..]);
    }

    #[test]
    fn tire_upright_contains_exp_component_term() {
        let cost = assemble_task_cost(TaskId::TireUpright, &CostParams::default());
        assert!(cost
            .terms
            .iter()
            .any(|t| matches!(t.kind, TermKind::ExpAbsComponent { .. })));
        assert!(cost
            .terms
            .iter()
            .any(|t| matches!(t.kind, TermKind::ControlPenalty { .. })));
        assert!(cost
            .terms
            .iter()
            .any(|t| matches!(t.kind, TermKind::SafetyPenalty { .. })));
    }

    #[test]
    fn unknown_task_id_is_rejected() {
        let err = "frisbee_catch".parse::<TaskId>().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("frisbee_catch"));
        assert!(msg.contains("move_generic"));
    }

    #[test]
    fn every_task_evaluates_on_the_fixture() {
        let frame = canonical_fixture();
        let controls = JointControls::zeros();
        for task in TaskId::ALL {
            let cost = assemble_task_cost(task, &CostParams::default());
            let value = cost.eval(&frame, &controls);
            assert!(value.is_ok(), "{task}: {value:?}");
            assert!(value.unwrap().is_finite(), "{task}");
        }
    }

    #[test]
    fn move_assembly_matches_direct_formula() {
        // Dual route: the term list and the closed-form j_move must agree.
        let frame = canonical_fixture();
        let controls = JointControls::zeros();
        let params = CostParams::default()
            .with_weight("goal", 1.3)
            .with_weight("gripper", 0.7)
            .with_weight("vel", 0.2);
        let assembled = assemble_task_cost(TaskId::MoveGeneric, &params)
            .eval(&frame, &controls)
            .unwrap();
        let direct = j_move(&frame, 1.3, 0.7, 0.2).unwrap();
        assert!((assembled - direct).abs() < 1e-12);
    }

    #[test]
    fn weight_override_changes_single_term() {
        let frame = canonical_fixture();
        let controls = JointControls::zeros();
        let base = assemble_task_cost(TaskId::MoveGeneric, &CostParams::default());
        let bumped = assemble_task_cost(
            TaskId::MoveGeneric,
            &CostParams::default().with_weight("goal", 2.0),
        );
        let d_base = eval_term(&base.terms[0], &frame, &controls).unwrap();
        let d_bumped = eval_term(&bumped.terms[0], &frame, &controls).unwrap();
        assert!((d_bumped - 2.0 * d_base).abs() < 1e-12);
    }
}

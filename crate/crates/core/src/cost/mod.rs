//! Composable cost-term library. Costs are evaluated against a
//! [`SiteFrame`] of named positions, unit axes, velocities, and
//! orientations, so the same term vocabulary serves every task.

pub mod frame;
pub mod tasks;

use std::collections::HashMap;
use std::fmt;

use nalgebra::{UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::KahanSum;
use crate::world::JointControls;

pub use frame::{canonical_fixture, FrameSynth};
pub use tasks::{assemble_task_cost, CostParams, TaskId};

/// Gripper feedback for grasp detection: a grasp is a close command whose
/// position error exceeds the resistance threshold (something is in the
/// jaws); closing with a small error is an empty close.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripSignal {
    pub commanded_close: bool,
    pub position_error: f64,
}

/// Named geometric snapshot of one world state.
#[derive(Debug, Clone, Default)]
pub struct SiteFrame {
    positions: HashMap<String, Vector3<f64>>,
    axes: HashMap<String, Vector3<f64>>,
    velocities: HashMap<String, Vector3<f64>>,
    quats: HashMap<String, UnitQuaternion<f64>>,
    scalars: HashMap<String, f64>,
    pub grip: Option<GripSignal>,
}

impl SiteFrame {
    pub fn new() -> Self {
        let mut f = Self::default();
        f.set_axis("world_x", Vector3::x());
        f.set_axis("world_y", Vector3::y());
        f.set_axis("world_z", Vector3::z());
        f
    }

    pub fn set_position(&mut self, name: &str, p: Vector3<f64>) {
        self.positions.insert(name.to_owned(), p);
    }

    /// Stores a normalized copy; zero vectors fall back to world z.
    pub fn set_axis(&mut self, name: &str, a: Vector3<f64>) {
        let n = a.norm();
        let unit = if n > 1e-12 { a / n } else { Vector3::z() };
        self.axes.insert(name.to_owned(), unit);
    }

    pub fn set_velocity(&mut self, name: &str, v: Vector3<f64>) {
        self.velocities.insert(name.to_owned(), v);
    }

    pub fn set_quat(&mut self, name: &str, q: UnitQuaternion<f64>) {
        self.quats.insert(name.to_owned(), q);
    }

    pub fn set_scalar(&mut self, name: &str, s: f64) {
        self.scalars.insert(name.to_owned(), s);
    }

    pub fn position(&self, name: &str) -> Result<Vector3<f64>> {
        self.positions
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingSite(name.to_owned()))
    }

    pub fn axis(&self, name: &str) -> Result<Vector3<f64>> {
        self.axes
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingSite(name.to_owned()))
    }

    pub fn velocity(&self, name: &str) -> Result<Vector3<f64>> {
        self.velocities
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingSite(name.to_owned()))
    }

    pub fn quat(&self, name: &str) -> Result<UnitQuaternion<f64>> {
        self.quats
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingSite(name.to_owned()))
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        self.scalars
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingSite(name.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistMask {
    Full,
    Xy,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DotMode {
    /// 1 - a.b
    OneMinusDot,
    /// |1 - a.b|
    AbsOneMinusDot,
    /// 1 - |a.b|
    OneMinusAbsDot,
    /// a.b itself (reward terms carry a negative weight)
    RawDot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlSource {
    JointControls,
    BaseVelocity,
    ArmPosture,
}

/// One weighted term of a task cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTerm {
    pub kind: TermKind,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TermKind {
    GoalDistance {
        object: String,
        goal: String,
    },
    GoalDistanceXy {
        object: String,
        goal: String,
    },
    SiteDistance {
        a: String,
        b: String,
        mask: DistMask,
    },
    /// Minimum over pair distances; the common anchor-vs-candidates shape
    /// is the special case of a shared first element.
    MinSiteDistance {
        pairs: Vec<(String, String)>,
    },
    /// -min(d_thresh, ||a - b||): rewards proximity up to a cap.
    CappedNegatedProximity {
        a: String,
        b: String,
        d_thresh: f64,
    },
    /// Double-cover-safe quaternion difference norm.
    QuatDistance {
        a: String,
        b: String,
    },
    AxisDotPenalty {
        a: String,
        b: String,
        mode: DotMode,
    },
    /// 1 - exp(alpha * (a.b - 1)): zero when aligned, saturating when not.
    ExpAxisAlignment {
        a: String,
        b: String,
        alpha: f64,
    },
    /// exp(|axis[component]| / sigma).
    ExpAbsComponent {
        axis: String,
        component: usize,
        sigma: f64,
    },
    VelocityPenalty {
        site: String,
        squared: bool,
    },
    AngvelPenalty {
        site: String,
        squared: bool,
    },
    ControlPenalty {
        source: ControlSource,
    },
    /// Negative on a resistance-detected grasp, positive on an empty close.
    GraspBonus {
        bonus: f64,
        empty_penalty: f64,
        resistance_threshold: f64,
    },
    /// Flat penalty when the torso leaves its safe height/roll envelope.
    SafetyPenalty {
        min_height: f64,
        max_roll: f64,
        penalty: f64,
    },
}

fn masked_distance(a: &Vector3<f64>, b: &Vector3<f64>, mask: DistMask) -> f64 {
    match mask {
        DistMask::Full => (a - b).norm(),
        DistMask::Xy => (Vector2::new(a.x, a.y) - Vector2::new(b.x, b.y)).norm(),
        DistMask::Z => (a.z - b.z).abs(),
    }
}

/// Quaternion difference norm with double-cover handling:
/// min(||qa - qb||, ||qa + qb||) over the 4-vector coordinates.
pub fn quat_distance(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let d_minus = (a.coords - b.coords).norm();
    let d_plus = (a.coords + b.coords).norm();
    d_minus.min(d_plus)
}

impl TermKind {
    /// Raw (unweighted) term value.
    pub fn value(&self, frame: &SiteFrame, controls: &JointControls) -> Result<f64> {
        Ok(match self {
            TermKind::GoalDistance { object, goal } => {
                masked_distance(&frame.position(object)?, &frame.position(goal)?, DistMask::Full)
            }
            TermKind::GoalDistanceXy { object, goal } => {
                masked_distance(&frame.position(object)?, &frame.position(goal)?, DistMask::Xy)
            }
            TermKind::SiteDistance { a, b, mask } => {
                masked_distance(&frame.position(a)?, &frame.position(b)?, *mask)
            }
            TermKind::MinSiteDistance { pairs } => {
                let mut best = f64::INFINITY;
                for (a, b) in pairs {
                    let d =
                        masked_distance(&frame.position(a)?, &frame.position(b)?, DistMask::Full);
                    best = best.min(d);
                }
                best
            }
            TermKind::CappedNegatedProximity { a, b, d_thresh } => {
                -masked_distance(&frame.position(a)?, &frame.position(b)?, DistMask::Full)
                    .min(*d_thresh)
            }
            TermKind::QuatDistance { a, b } => quat_distance(&frame.quat(a)?, &frame.quat(b)?),
            TermKind::AxisDotPenalty { a, b, mode } => {
                let dot = frame.axis(a)?.dot(&frame.axis(b)?);
                match mode {
                    DotMode::OneMinusDot => 1.0 - dot,
                    DotMode::AbsOneMinusDot => (1.0 - dot).abs(),
                    DotMode::OneMinusAbsDot => 1.0 - dot.abs(),
                    DotMode::RawDot => dot,
                }
            }
            TermKind::ExpAxisAlignment { a, b, alpha } => {
                let dot = frame.axis(a)?.dot(&frame.axis(b)?);
                1.0 - (alpha * (dot - 1.0)).exp()
            }
            TermKind::ExpAbsComponent {
                axis,
                component,
                sigma,
            } => {
                let c = frame.axis(axis)?[*component];
                (c.abs() / sigma).exp()
            }
            TermKind::VelocityPenalty { site, squared } => {
                let n = frame.velocity(site)?.norm();
                if *squared {
                    n * n
                } else {
                    n
                }
            }
            TermKind::AngvelPenalty { site, squared } => {
                let n = frame.velocity(&format!("{site}_ang"))?.norm();
                if *squared {
                    n * n
                } else {
                    n
                }
            }
            TermKind::ControlPenalty { source } => match source {
                ControlSource::JointControls => controls.norm(),
                ControlSource::BaseVelocity => frame.velocity("base")?.norm(),
                ControlSource::ArmPosture => frame.scalar("arm_posture_err")?,
            },
            TermKind::GraspBonus {
                bonus,
                empty_penalty,
                resistance_threshold,
            } => match frame.grip {
                Some(g) if g.commanded_close => {
                    if g.position_error > *resistance_threshold {
                        -bonus
                    } else {
                        *empty_penalty
                    }
                }
                _ => 0.0,
            },
            TermKind::SafetyPenalty {
                min_height,
                max_roll,
                penalty,
            } => {
                let torso = frame.position("torso")?;
                let roll = frame.scalar("torso_roll").unwrap_or(0.0);
                if torso.z < *min_height || roll.abs() > *max_roll {
                    *penalty
                } else {
                    0.0
                }
            }
        })
    }
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermKind::GoalDistance { object, goal } => {
                write!(f, "goal_distance(|{object} - {goal}|)")
            }
            TermKind::GoalDistanceXy { object, goal } => {
                write!(f, "goal_distance_xy(|{object} - {goal}|_xy)")
            }
            TermKind::SiteDistance { a, b, mask } => {
                let m = match mask {
                    DistMask::Full => "",
                    DistMask::Xy => "_xy",
                    DistMask::Z => "_z",
                };
                write!(f, "site_distance(|{a} - {b}|{m})")
            }
            TermKind::MinSiteDistance { pairs } => {
                let items: Vec<String> =
                    pairs.iter().map(|(a, b)| format!("|{a} - {b}|")).collect();
                write!(f, "min_site_distance(min({}))", items.join(", "))
            }
            TermKind::CappedNegatedProximity { a, b, d_thresh } => {
                write!(f, "capped_negated_proximity(-min({d_thresh}, |{a} - {b}|))")
            }
            TermKind::QuatDistance { a, b } => write!(f, "quat_distance({a}, {b})"),
            TermKind::AxisDotPenalty { a, b, mode } => {
                let expr = match mode {
                    DotMode::OneMinusDot => format!("1 - {a}.{b}"),
                    DotMode::AbsOneMinusDot => format!("|1 - {a}.{b}|"),
                    DotMode::OneMinusAbsDot => format!("1 - |{a}.{b}|"),
                    DotMode::RawDot => format!("{a}.{b}"),
                };
                write!(f, "axis_dot_penalty({expr})")
            }
            TermKind::ExpAxisAlignment { a, b, alpha } => {
                write!(f, "exp_axis_alignment(1 - exp({alpha}*({a}.{b} - 1)))")
            }
            TermKind::ExpAbsComponent {
                axis,
                component,
                sigma,
            } => {
                let c = ["x", "y", "z"][*component];
                write!(f, "exp_abs_component(exp(|{axis}^{c}| / {sigma}))")
            }
            TermKind::VelocityPenalty { site, squared } => {
                write!(f, "velocity_penalty(|v_{site}|{})", if *squared { "^2" } else { "" })
            }
            TermKind::AngvelPenalty { site, squared } => {
                write!(f, "angvel_penalty(|w_{site}|{})", if *squared { "^2" } else { "" })
            }
            TermKind::ControlPenalty { source } => {
                let s = match source {
                    ControlSource::JointControls => "|u|",
                    ControlSource::BaseVelocity => "|v_base|",
                    ControlSource::ArmPosture => "|q_arm - q_arm_default|",
                };
                write!(f, "control_penalty({s})")
            }
            TermKind::GraspBonus {
                bonus,
                empty_penalty,
                resistance_threshold,
            } => write!(
                f,
                "grasp_bonus(-{bonus} on resistance > {resistance_threshold}, +{empty_penalty} on empty close)"
            ),
            TermKind::SafetyPenalty {
                min_height,
                max_roll,
                penalty,
            } => write!(
                f,
                "safety_penalty({penalty} if torso_z < {min_height} or |roll| > {max_roll})"
            ),
        }
    }
}

/// Evaluate one term: weight times the kind's formula value.
pub fn eval_term(term: &CostTerm, frame: &SiteFrame, controls: &JointControls) -> Result<f64> {
    Ok(term.weight * term.kind.value(frame, controls)?)
}

/// A task's weighted term list, with optional terminal-only terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskCost {
    pub terms: Vec<CostTerm>,
    pub terminal_terms: Vec<CostTerm>,
}

impl TaskCost {
    pub fn new(terms: Vec<CostTerm>) -> Self {
        Self {
            terms,
            terminal_terms: Vec::new(),
        }
    }

    /// Sum of all running terms at one step.
    pub fn eval(&self, frame: &SiteFrame, controls: &JointControls) -> Result<f64> {
        let mut acc = KahanSum::new();
        for term in &self.terms {
            acc.add(eval_term(term, frame, controls)?);
        }
        Ok(acc.total())
    }

    /// Sum of the terminal terms (applied once, at the final rollout step).
    pub fn eval_terminal(&self, frame: &SiteFrame, controls: &JointControls) -> Result<f64> {
        let mut acc = KahanSum::new();
        for term in &self.terminal_terms {
            acc.add(eval_term(term, frame, controls)?);
        }
        Ok(acc.total())
    }
}

/// Move-task cost: goal distance + gripper-to-object distance + object
/// speed, each weighted. Direct closed form; the term-list assembly for
/// `move_generic` must agree with it.
pub fn j_move(frame: &SiteFrame, w_goal: f64, w_gripper: f64, w_vel: f64) -> Result<f64> {
    let p_obj = frame.position("object")?;
    let p_goal = frame.position("goal")?;
    let p_grip = frame.position("gripper")?;
    let v_obj = frame.velocity("object")?;
    Ok(w_goal * (p_obj - p_goal).norm() + w_gripper * (p_grip - p_obj).norm()
        + w_vel * v_obj.norm())
}

/// Upright-task cost: double-cover-safe quaternion distance to the upright
/// orientation + gripper-to-object distance.
pub fn j_upright(frame: &SiteFrame, w_upright: f64, w_gripper: f64) -> Result<f64> {
    let q_obj = frame.quat("object")?;
    let q_up = frame.quat("upright")?;
    let p_obj = frame.position("object")?;
    let p_grip = frame.position("gripper")?;
    Ok(w_upright * quat_distance(&q_obj, &q_up) + w_gripper * (p_grip - p_obj).norm())
}

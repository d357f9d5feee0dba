//! File-level configuration: one TOML document per task describing the
//! world, the planner action layout, optimizer settings, cost weights,
//! and episode parameters. Built-in defaults exist for every task id so a
//! config file only has to state what it changes.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cem::{CemConfig, Weighting};
use crate::command::{ActionLayout, CommandDefaults};
use crate::cost::{CostParams, FrameSynth, TaskId};
use crate::error::{Error, Result};
use crate::policy::PdVelocityTracker;
use crate::spline::{Interpolation, NoiseSchedule};
use crate::world::{
    HingeWorld, ObjectKind, ObjectState, Pose2, PushWorld, RobotState, TaskSpec, World, WorldState,
    CONTROL_DIM,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WorldConfig {
    Push(PushWorld),
    Hinge(HingeWorld),
}

impl WorldConfig {
    pub fn build(&self) -> World {
        match self {
            WorldConfig::Push(w) => World::Push(w.clone()),
            WorldConfig::Hinge(w) => World::Hinge(w.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    pub base: bool,
    pub arm: bool,
    pub torso: bool,
    pub leg: bool,
    pub gripper: bool,
    pub base_bounds: [[f64; 2]; 3],
    pub arm_bound: [f64; 2],
    pub torso_bound: [f64; 2],
    pub leg_joint_bound: [f64; 2],
    pub selector_bound: [f64; 2],
    pub gripper_bound: [f64; 2],
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            base: true,
            arm: true,
            torso: false,
            leg: false,
            gripper: false,
            base_bounds: [[-0.6, 0.6], [-0.4, 0.4], [-1.0, 1.0]],
            arm_bound: [-1.3, 1.3],
            torso_bound: [-0.4, 0.4],
            leg_joint_bound: [-1.0, 1.0],
            selector_bound: [-1.0, 1.0],
            gripper_bound: [-1.0, 1.0],
        }
    }
}

impl LayoutConfig {
    pub fn to_layout(&self) -> ActionLayout {
        let mut bounds = Vec::new();
        if self.base {
            bounds.extend(self.base_bounds.iter().map(|b| (b[0], b[1])));
        }
        if self.arm {
            bounds.extend(std::iter::repeat((self.arm_bound[0], self.arm_bound[1])).take(6));
        }
        if self.torso {
            bounds.extend(std::iter::repeat((self.torso_bound[0], self.torso_bound[1])).take(3));
        }
        if self.leg {
            bounds.push((self.selector_bound[0], self.selector_bound[1]));
            bounds.extend(
                std::iter::repeat((self.leg_joint_bound[0], self.leg_joint_bound[1])).take(6),
            );
        }
        if self.gripper {
            bounds.push((self.gripper_bound[0], self.gripper_bound[1]));
        }
        ActionLayout {
            include_base: self.base,
            include_arm: self.arm,
            include_torso: self.torso,
            include_leg: self.leg,
            include_gripper: self.gripper,
            bounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CemSettings {
    pub samples: usize,
    pub elites: usize,
    pub include_nominal: bool,
    pub carry_best: bool,
    pub weighting: Weighting,
}

impl Default for CemSettings {
    fn default() -> Self {
        Self {
            samples: 32,
            elites: 3,
            include_nominal: true,
            carry_best: true,
            weighting: Weighting::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplineSettings {
    pub knots: usize,
    pub horizon: f64,
    pub interpolation: Interpolation,
    pub noise_lo: f64,
    pub noise_hi: f64,
    /// Noise multiplier for flat (joint-level) planning, whose action
    /// units are forces rather than velocities/angles.
    pub flat_noise_scale: f64,
}

impl Default for SplineSettings {
    fn default() -> Self {
        Self {
            knots: 4,
            horizon: 1.5,
            interpolation: Interpolation::Linear,
            noise_lo: 0.02,
            noise_hi: 0.6,
            flat_noise_scale: 30.0,
        }
    }
}

/// Randomized initial conditions, seeded per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpawnConfig {
    pub robot_start: [f64; 3],
    /// Push world: object spawns uniformly in a disk around this center.
    pub object_center: [f64; 2],
    pub object_radius: f64,
    pub object_yaw_range: f64,
    /// Hinge world: initial plate angle range.
    pub angle_range: [f64; 2],
    pub object_mass: f64,
    pub object_friction: f64,
}

impl Default for SpawnConfig {
    fn default() -> Self {
        Self {
            robot_start: [-0.9, 0.0, 0.0],
            object_center: [0.5, 0.0],
            object_radius: 0.2,
            object_yaw_range: std::f64::consts::PI,
            angle_range: [0.0, 0.12],
            object_mass: 1.5,
            object_friction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeSettings {
    pub time_limit: f64,
    pub pos_tol: f64,
    pub vel_tol: f64,
    pub orient_tol: f64,
    pub angvel_tol: f64,
    pub control_dt: f64,
    pub goal: [f64; 2],
    pub beta_fast: f64,
    pub beta_slow: f64,
    /// Slow (pose) samples arrive every N control steps.
    pub slow_every: usize,
    /// Feed ground truth to the planner instead of the fused estimate.
    pub bypass_filter: bool,
    pub log_steps: bool,
    pub log_plans: bool,
    pub spawn: SpawnConfig,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        Self {
            time_limit: 30.0,
            pos_tol: 0.1,
            vel_tol: 0.05,
            orient_tol: 0.1,
            angvel_tol: 0.05,
            control_dt: 0.02,
            goal: [1.2, 0.0],
            beta_fast: 0.65,
            beta_slow: 0.5,
            slow_every: 1,
            bypass_filter: false,
            log_steps: true,
            log_plans: false,
            spawn: SpawnConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskConfig {
    pub task: TaskId,
    pub world: WorldConfig,
    pub layout: LayoutConfig,
    pub defaults: CommandDefaults,
    pub policy: PdVelocityTracker,
    pub cem: CemSettings,
    pub spline: SplineSettings,
    pub cost: CostParams,
    pub episode: EpisodeSettings,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            task: TaskId::MoveGeneric,
            world: WorldConfig::Push(PushWorld::default()),
            layout: LayoutConfig::default(),
            defaults: CommandDefaults::default(),
            policy: PdVelocityTracker::default(),
            cem: CemSettings::default(),
            spline: SplineSettings::default(),
            cost: CostParams::default(),
            episode: EpisodeSettings::default(),
        }
    }
}

impl TaskConfig {
    /// Built-in defaults per task id: Move-family tasks run on the push
    /// world, Upright-family tasks on the hinge world. Only the cost
    /// assembly and world family change; optimizer and layout stay fixed.
    pub fn for_task(task: TaskId) -> Self {
        let mut cfg = TaskConfig {
            task,
            ..TaskConfig::default()
        };
        match task {
            TaskId::UprightGeneric
            | TaskId::TireUpright
            | TaskId::BarrierUpright
            | TaskId::ConeUpright
            | TaskId::ChairUpright => {
                let hinge = HingeWorld::default();
                cfg.episode.goal = [hinge.pivot_x, 0.0];
                cfg.episode.spawn.robot_start = [-0.5, 0.0, 0.0];
                cfg.world = WorldConfig::Hinge(hinge);
            }
            _ => {}
        }
        cfg
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn build_world(&self) -> World {
        self.world.build()
    }

    pub fn action_layout(&self) -> ActionLayout {
        self.layout.to_layout()
    }

    pub fn task_spec(&self) -> TaskSpec {
        let e = &self.episode;
        let criterion = match self.world {
            WorldConfig::Push(_) => crate::world::SuccessCriterion::Move { goal: e.goal },
            WorldConfig::Hinge(_) => crate::world::SuccessCriterion::Upright {
                upright_angle: std::f64::consts::FRAC_PI_2,
            },
        };
        TaskSpec {
            criterion,
            pos_tol: e.pos_tol,
            vel_tol: e.vel_tol,
            orient_tol: e.orient_tol,
            angvel_tol: e.angvel_tol,
            time_limit: e.time_limit,
        }
    }

    pub fn frame_synth(&self) -> FrameSynth {
        FrameSynth {
            goal: self.episode.goal,
            ..FrameSynth::default()
        }
    }

    pub fn noise_schedule(&self) -> NoiseSchedule {
        NoiseSchedule::new(self.spline.noise_lo, self.spline.noise_hi, self.spline.horizon)
    }

    pub fn cem_config(&self, seed: u64) -> CemConfig {
        CemConfig {
            num_samples: self.cem.samples,
            num_elites: self.cem.elites,
            noise: self.noise_schedule(),
            include_nominal: self.cem.include_nominal,
            carry_best: self.cem.carry_best,
            weighting: self.cem.weighting,
            seed,
        }
    }

    /// Raw joint-control bounds for flat planning, from actuator limits.
    pub fn flat_bounds(&self) -> Vec<(f64, f64)> {
        let b = &self.policy.bounds;
        let mut bounds = Vec::with_capacity(CONTROL_DIM);
        for i in 0..3 {
            bounds.push((-b.base_force_max[i], b.base_force_max[i]));
        }
        for _ in 0..6 {
            bounds.push((-b.arm_torque_max, b.arm_torque_max));
        }
        bounds.push((-b.gripper_vel_max, b.gripper_vel_max));
        bounds
    }

    /// Seeded initial world state with the object pose randomized within
    /// the spawn bounds.
    pub fn initial_state(&self, seed: u64) -> WorldState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spawn = &self.episode.spawn;
        let world = self.build_world();
        let robot = RobotState::at_rest(
            Pose2::new(spawn.robot_start[0], spawn.robot_start[1], spawn.robot_start[2]),
            world.robot_params(),
        );
        let kind = match &self.world {
            WorldConfig::Push(_) => {
                let r = spawn.object_radius * rng.gen::<f64>().sqrt();
                let a = rng.gen::<f64>() * std::f64::consts::TAU;
                let yaw = rng.gen_range(-spawn.object_yaw_range..=spawn.object_yaw_range);
                ObjectKind::Planar {
                    pose: Pose2::new(
                        spawn.object_center[0] + r * a.cos(),
                        spawn.object_center[1] + r * a.sin(),
                        yaw,
                    ),
                    vel: [0.0, 0.0],
                    yaw_rate: 0.0,
                }
            }
            WorldConfig::Hinge(_) => ObjectKind::Hinged {
                angle: rng.gen_range(spawn.angle_range[0]..=spawn.angle_range[1]),
                rate: 0.0,
            },
        };
        WorldState {
            robot,
            object: ObjectState {
                kind,
                mass: spawn.object_mass,
                friction_coeff: spawn.object_friction,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = TaskConfig::for_task(TaskId::MoveGeneric);
        let text = toml::to_string(&cfg).unwrap();
        let back: TaskConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: TaskConfig = toml::from_str(
            r#"
            task = "upright_generic"
            [world]
            kind = "hinge"
            [episode]
            time_limit = 12.5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.task, TaskId::UprightGeneric);
        assert_eq!(cfg.episode.time_limit, 12.5);
        assert_eq!(cfg.cem.samples, 32);
        assert_eq!(cfg.spline.knots, 4);
        assert_eq!(cfg.spline.noise_lo, 0.02);
        assert_eq!(cfg.spline.noise_hi, 0.6);
    }

    #[test]
    fn spawn_is_seed_deterministic_and_in_bounds() {
        let cfg = TaskConfig::for_task(TaskId::MoveGeneric);
        let a = cfg.initial_state(17);
        let b = cfg.initial_state(17);
        assert_eq!(a, b);
        let c = cfg.initial_state(18);
        assert_ne!(a, c);
        for seed in 0..50 {
            let s = cfg.initial_state(seed);
            let ObjectKind::Planar { pose, .. } = s.object.kind else {
                panic!()
            };
            let dx = pose.x - cfg.episode.spawn.object_center[0];
            let dy = pose.y - cfg.episode.spawn.object_center[1];
            assert!((dx * dx + dy * dy).sqrt() <= cfg.episode.spawn.object_radius + 1e-12);
        }
    }

    #[test]
    fn upright_task_gets_hinge_world() {
        let cfg = TaskConfig::for_task(TaskId::UprightGeneric);
        assert!(matches!(cfg.world, WorldConfig::Hinge(_)));
        assert!(matches!(
            cfg.task_spec().criterion,
            crate::world::SuccessCriterion::Upright { .. }
        ));
    }
}

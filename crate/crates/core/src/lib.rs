//! Hierarchical sampling-based model-predictive control at desk scale:
//! a cross-entropy planner steers a stabilizing low-level controller by
//! sampling spline plans in its command space, rolled out in parallel
//! through small deterministic physics worlds.
//!
//! Crate layout follows the control stack:
//! [`command`] defines the command/action vocabulary, [`spline`] the plan
//! parameterization, [`cem`] the optimizer, [`policy`] + [`rollout`] the
//! policy-in-the-loop simulation, [`world`] the dynamics, [`cost`] the
//! task objective library, [`episode`] the two-rate receding-horizon
//! executive, and [`config`] the file-level configuration surface.

pub mod cem;
pub mod command;
pub mod config;
pub mod cost;
pub mod episode;
pub mod error;
pub mod filter;
pub mod log;
pub mod policy;
pub mod rollout;
pub mod spline;
pub mod util;
pub mod world;

pub use cem::{CemConfig, CemPlanner, PlanCandidate, Weighting};
pub use command::{
    assemble_command, map_gripper, mask_leg_command, ActionLayout, CommandDefaults, CommandVector,
    COMMAND_DIM,
};
pub use config::TaskConfig;
pub use cost::{
    assemble_task_cost, canonical_fixture, eval_term, j_move, j_upright, quat_distance,
    CostParams, CostTerm, FrameSynth, GripSignal, SiteFrame, TaskCost, TaskId, TermKind,
};
pub use episode::{run_episode, run_episode_flat, EpisodeOutcome, EpisodeResult, SchedulerMode};
pub use error::{Error, Result};
pub use filter::{FilterState, Measurement};
pub use policy::{ActuatorBounds, LowLevelPolicy, PdVelocityTracker};
pub use rollout::{rollout, Pipeline, RolloutEngine, RolloutEnv, RolloutResult, TimingStats};
pub use spline::{Interpolation, NoiseSchedule, SplinePlan};
pub use world::{
    check_success, HingeWorld, JointControls, ObjectKind, ObjectState, Pose2, PushWorld,
    RobotParams, RobotState, SuccessCriterion, SuccessState, TaskSpec, World, WorldState,
    CONTROL_DIM,
};

//! Policy-in-the-loop rollouts: step the world at the control rate while
//! the low-level policy converts plan actions to joint controls, in
//! parallel across population members.
//!
//! Each rollout owns a private copy of the dynamics state and performs a
//! deterministic, order-independent reduction, so a batch is bitwise
//! identical whether it runs serially or on any number of workers.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::command::{assemble_command, ActionLayout, CommandDefaults, CommandVector};
use crate::cost::{FrameSynth, GripSignal, TaskCost};
use crate::error::{Error, Result};
use crate::policy::LowLevelPolicy;
use crate::spline::SplinePlan;
use crate::util::KahanSum;
use crate::world::{JointControls, RobotState, World, WorldState, CONTROL_DIM};

/// How plan actions become joint controls.
pub enum Pipeline {
    /// Actions are commands for the low-level policy (policy in the loop).
    Hierarchical {
        layout: ActionLayout,
        defaults: CommandDefaults,
        policy: Arc<dyn LowLevelPolicy>,
    },
    /// Actions are raw joint-level controls applied directly.
    Flat { bounds: Vec<(f64, f64)> },
}

impl Pipeline {
    pub fn action_dim(&self) -> usize {
        match self {
            Pipeline::Hierarchical { layout, .. } => layout.action_dim(),
            Pipeline::Flat { bounds } => bounds.len(),
        }
    }

    pub fn action_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Pipeline::Hierarchical { layout, .. } => layout.bounds.clone(),
            Pipeline::Flat { bounds } => bounds.clone(),
        }
    }

    /// Convert one plan action into joint controls (plus the assembled
    /// command in hierarchical mode, for logging and grasp detection).
    pub fn controls(
        &self,
        robot: &RobotState,
        action: &[f64],
    ) -> Result<(JointControls, Option<CommandVector>)> {
        match self {
            Pipeline::Hierarchical {
                layout,
                defaults,
                policy,
            } => {
                let cmd = assemble_command(action, layout, defaults)?;
                Ok((policy.policy_step(robot, &cmd), Some(cmd)))
            }
            Pipeline::Flat { bounds } => {
                if action.len() != CONTROL_DIM || bounds.len() != CONTROL_DIM {
                    return Err(Error::DimensionMismatch {
                        context: "flat pipeline action",
                        expected: CONTROL_DIM,
                        got: action.len(),
                    });
                }
                let mut clamped = [0.0; CONTROL_DIM];
                for (i, (a, &(lo, hi))) in action.iter().zip(bounds).enumerate() {
                    clamped[i] = a.clamp(lo, hi);
                }
                Ok((JointControls::from_flat(&clamped), None))
            }
        }
    }

    fn grip_signal(&self, cmd: &CommandVector, robot: &RobotState) -> Option<GripSignal> {
        match self {
            Pipeline::Hierarchical { defaults, .. } => Some(GripSignal {
                commanded_close: cmd.gripper_pos == defaults.gripper_close,
                position_error: (cmd.gripper_pos - robot.gripper_pos).abs(),
            }),
            Pipeline::Flat { .. } => None,
        }
    }
}

/// Everything a rollout needs besides the plan and the start state.
pub struct RolloutEnv {
    pub world: World,
    pub pipeline: Pipeline,
    pub cost: TaskCost,
    pub frame: FrameSynth,
    pub horizon: f64,
    pub control_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    /// States at each control step, starting with the initial state;
    /// length floor(horizon / control_dt) + 1.
    pub trajectory: Vec<WorldState>,
    /// One entry per step; the terminal term is folded into the last entry.
    pub per_step_costs: Vec<f64>,
    pub total_cost: f64,
    pub failed: bool,
}

impl RolloutResult {
    fn failure(trajectory: Vec<WorldState>, per_step_costs: Vec<f64>) -> Self {
        Self {
            trajectory,
            per_step_costs,
            total_cost: f64::INFINITY,
            failed: true,
        }
    }
}

/// Roll one plan out through the world. Deterministic in its inputs; any
/// divergence (non-finite state) or cost-evaluation failure marks the
/// result failed with infinite cost instead of aborting the batch.
pub fn rollout(env: &RolloutEnv, state: &WorldState, plan: &SplinePlan) -> RolloutResult {
    let steps = (env.horizon / env.control_dt).floor() as usize;
    let mut trajectory = Vec::with_capacity(steps + 1);
    let mut per_step_costs = Vec::with_capacity(steps);
    let mut acc = KahanSum::new();
    let mut s = *state;
    trajectory.push(s);

    for i in 0..steps {
        let t = i as f64 * env.control_dt;
        let action = plan.evaluate(t);
        let (controls, cmd) = match env.pipeline.controls(&s.robot, &action) {
            Ok(x) => x,
            Err(_) => return RolloutResult::failure(trajectory, per_step_costs),
        };
        s = env.world.step(&s, &controls, env.control_dt);
        if !s.is_finite() {
            return RolloutResult::failure(trajectory, per_step_costs);
        }
        trajectory.push(s);

        let grip = cmd.as_ref().and_then(|c| env.pipeline.grip_signal(c, &s.robot));
        let frame = env.frame.build(&env.world, &s, grip);
        let mut step_cost = match env.cost.eval(&frame, &controls) {
            Ok(c) => c,
            Err(_) => return RolloutResult::failure(trajectory, per_step_costs),
        };
        if i + 1 == steps {
            match env.cost.eval_terminal(&frame, &controls) {
                Ok(c) => step_cost += c,
                Err(_) => return RolloutResult::failure(trajectory, per_step_costs),
            }
        }
        per_step_costs.push(step_cost);
        acc.add(step_cost);
    }

    let total_cost = acc.total();
    if !total_cost.is_finite() {
        return RolloutResult::failure(trajectory, per_step_costs);
    }
    RolloutResult {
        trajectory,
        per_step_costs,
        total_cost,
        failed: false,
    }
}

/// Wall-clock statistics over rollout batches, mirroring a
/// mean-over-repetitions timing table row.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean_ms: f64,
    pub std_ms: f64,
    pub count: usize,
}

impl TimingStats {
    pub fn from_samples(samples_ms: &[f64]) -> Self {
        let count = samples_ms.len();
        if count == 0 {
            return Self::default();
        }
        let mean = samples_ms.iter().sum::<f64>() / count as f64;
        let var = samples_ms
            .iter()
            .map(|s| (s - mean) * (s - mean))
            .sum::<f64>()
            / count as f64;
        Self {
            mean_ms: mean,
            std_ms: var.sqrt(),
            count,
        }
    }
}

/// Executes rollout batches, optionally on a dedicated thread pool.
pub struct RolloutEngine {
    pool: Option<rayon::ThreadPool>,
    workers: usize,
    batch_times_ms: std::sync::Mutex<Vec<f64>>,
}

impl RolloutEngine {
    /// `workers = 1` runs serially; `workers = 0` uses the global rayon
    /// pool; anything else gets a dedicated pool of that size.
    pub fn new(workers: usize) -> Self {
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .expect("failed to build rollout pool"),
            )
        } else {
            None
        };
        Self {
            pool,
            workers,
            batch_times_ms: std::sync::Mutex::new(Vec::new()),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Roll out every plan from the same start state. Results are ordered
    /// by plan index and identical to standalone rollouts of each plan.
    pub fn rollout_batch(
        &self,
        env: &RolloutEnv,
        state: &WorldState,
        plans: &[SplinePlan],
    ) -> Vec<RolloutResult> {
        let start = Instant::now();
        let results = if self.workers == 1 {
            plans.iter().map(|p| rollout(env, state, p)).collect()
        } else {
            let run = || {
                plans
                    .par_iter()
                    .map(|p| rollout(env, state, p))
                    .collect::<Vec<_>>()
            };
            match &self.pool {
                Some(pool) => pool.install(run),
                None => run(),
            }
        };
        let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        self.batch_times_ms.lock().unwrap().push(elapsed_ms);
        results
    }

    /// Timing over all batches since the last reset.
    pub fn timing(&self) -> TimingStats {
        TimingStats::from_samples(&self.batch_times_ms.lock().unwrap())
    }

    pub fn reset_timing(&self) {
        self.batch_times_ms.lock().unwrap().clear();
    }
}

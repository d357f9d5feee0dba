//! Receding-horizon executive: a 20 Hz planner steering a 50 Hz control
//! loop, with low-pass state fusion, warm starts, and episode bookkeeping.
//!
//! Two scheduler modes exist. Synchronous mode is single-threaded and
//! deterministic: the planner runs inline between control steps on the
//! fixed 2-3-2-3 step pattern (averaging 20 Hz against the 50 Hz loop).
//! Asynchronous mode runs the planner on its own thread and the
//! controller consumes the latest published plan through an atomic slot.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::cem::CemPlanner;
use crate::config::TaskConfig;
use crate::cost::{assemble_task_cost, TaskId};
use crate::error::Result;
use crate::filter::FilterState;
use crate::log::{PlanRecord, StepRecord};
use crate::rollout::{Pipeline, RolloutEngine, RolloutEnv, TimingStats};
use crate::spline::{NoiseSchedule, SplinePlan};
use crate::world::{check_success, SuccessState, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerMode {
    Synchronous,
    Asynchronous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeOutcome {
    Success,
    Timeout,
    Failure,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub outcome: EpisodeOutcome,
    /// Elapsed sim time when the episode ended (s).
    pub completion_time: f64,
    pub steps: usize,
    pub seed: u64,
    pub log: Vec<StepRecord>,
    pub plan_history: Vec<PlanRecord>,
    /// Rollout batch timing over this episode's replans.
    pub timing: TimingStats,
}

/// A published plan with its publication timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedPlan {
    pub plan: SplinePlan,
    pub publish_time: f64,
    pub seq: u64,
}

/// Single-writer single-reader plan hand-off. Publication replaces the
/// whole plan and timestamp at once; a reader never observes a mix of two
/// publications.
pub struct PlanSlot {
    inner: Mutex<PublishedPlan>,
}

impl PlanSlot {
    pub fn new(plan: SplinePlan) -> Self {
        Self {
            inner: Mutex::new(PublishedPlan {
                plan,
                publish_time: 0.0,
                seq: 0,
            }),
        }
    }

    pub fn publish(&self, plan: SplinePlan, publish_time: f64) {
        let mut slot = self.inner.lock().unwrap();
        let seq = slot.seq + 1;
        *slot = PublishedPlan {
            plan,
            publish_time,
            seq,
        };
    }

    pub fn load(&self) -> PublishedPlan {
        self.inner.lock().unwrap().clone()
    }
}

struct EpisodeSetup {
    env: RolloutEnv,
    planner: CemPlanner,
    spec: crate::world::TaskSpec,
    initial: WorldState,
    action_dim: usize,
    knots: usize,
    horizon: f64,
    dt: f64,
    flat: bool,
}

fn prepare(cfg: &TaskConfig, seed: u64, flat: bool) -> Result<EpisodeSetup> {
    let world = cfg.build_world();
    let pipeline = if flat {
        Pipeline::Flat {
            bounds: cfg.flat_bounds(),
        }
    } else {
        let layout = cfg.action_layout();
        layout.validate()?;
        Pipeline::Hierarchical {
            layout,
            defaults: cfg.defaults.clone(),
            policy: std::sync::Arc::new(cfg.policy),
        }
    };
    // Flat planning replaces the task cost with the joint-level objective
    // that carries both locomotion and manipulation terms.
    let cost_task = if flat { TaskId::E2eMpcMove } else { cfg.task };
    let cost = assemble_task_cost(cost_task, &cfg.cost);
    let action_dim = pipeline.action_dim();
    let bounds = pipeline.action_bounds();

    let mut cem = cfg.cem_config(seed ^ 0xA076_1D64_78BD_642F);
    if flat {
        let s = cfg.spline.flat_noise_scale;
        cem.noise = NoiseSchedule::new(
            cfg.spline.noise_lo * s,
            cfg.spline.noise_hi * s,
            cfg.spline.horizon,
        );
    }
    cem.validate()?;

    let env = RolloutEnv {
        world,
        pipeline,
        cost,
        frame: cfg.frame_synth(),
        horizon: cfg.spline.horizon,
        control_dt: cfg.episode.control_dt,
    };
    Ok(EpisodeSetup {
        env,
        planner: CemPlanner::new(cem, bounds),
        spec: cfg.task_spec(),
        initial: cfg.initial_state(seed),
        action_dim,
        knots: cfg.spline.knots,
        horizon: cfg.spline.horizon,
        dt: cfg.episode.control_dt,
        flat,
    })
}

/// Steps between replans: flat mode replans at the control rate, the
/// hierarchical planner on the alternating 2-3 pattern.
fn replan_stride(flat: bool, plan_counter: u64) -> usize {
    if flat {
        1
    } else if plan_counter % 2 == 0 {
        2
    } else {
        3
    }
}

/// Run one hierarchical episode in synchronous (deterministic) mode.
pub fn run_episode(cfg: &TaskConfig, engine: &RolloutEngine, seed: u64) -> Result<EpisodeResult> {
    run_episode_mode(cfg, engine, seed, SchedulerMode::Synchronous, false)
}

/// Run one flat (joint-level planning) episode in synchronous mode.
pub fn run_episode_flat(
    cfg: &TaskConfig,
    engine: &RolloutEngine,
    seed: u64,
) -> Result<EpisodeResult> {
    run_episode_mode(cfg, engine, seed, SchedulerMode::Synchronous, true)
}

pub fn run_episode_mode(
    cfg: &TaskConfig,
    engine: &RolloutEngine,
    seed: u64,
    mode: SchedulerMode,
    flat: bool,
) -> Result<EpisodeResult> {
    match mode {
        SchedulerMode::Synchronous => run_synchronous(cfg, engine, seed, flat),
        SchedulerMode::Asynchronous => run_asynchronous(cfg, engine, seed, flat),
    }
}

fn finish(
    outcome: EpisodeOutcome,
    t: f64,
    steps: usize,
    seed: u64,
    log: Vec<StepRecord>,
    plan_history: Vec<PlanRecord>,
    engine: &RolloutEngine,
) -> EpisodeResult {
    EpisodeResult {
        outcome,
        completion_time: t,
        steps,
        seed,
        log,
        plan_history,
        timing: engine.timing(),
    }
}

fn run_synchronous(
    cfg: &TaskConfig,
    engine: &RolloutEngine,
    seed: u64,
    flat: bool,
) -> Result<EpisodeResult> {
    let mut setup = prepare(cfg, seed, flat)?;
    let params = *setup.env.world.robot_params();
    engine.reset_timing();

    let mut state = setup.initial;
    let mut filter = FilterState::new(state, cfg.episode.beta_fast, cfg.episode.beta_slow);
    let mut published = SplinePlan::zeros(setup.action_dim, setup.knots, setup.horizon);
    let mut published_t = 0.0;
    let mut next_plan_step = 0usize;
    let mut plan_counter = 0u64;

    let mut log = Vec::new();
    let mut plan_history = Vec::new();
    let mut t = 0.0;
    let mut step = 0usize;
    let hard_cap = (cfg.episode.time_limit / setup.dt).ceil() as usize + 3;

    loop {
        match check_success(&setup.env.world, &state, &setup.spec, t) {
            SuccessState::Success => {
                let outcome = if t <= setup.spec.time_limit {
                    EpisodeOutcome::Success
                } else {
                    EpisodeOutcome::Timeout
                };
                return Ok(finish(outcome, t, step, seed, log, plan_history, engine));
            }
            SuccessState::Timeout => {
                return Ok(finish(
                    EpisodeOutcome::Timeout,
                    t,
                    step,
                    seed,
                    log,
                    plan_history,
                    engine,
                ));
            }
            SuccessState::Running => {}
        }
        if step >= hard_cap {
            return Ok(finish(
                EpisodeOutcome::Timeout,
                t,
                step,
                seed,
                log,
                plan_history,
                engine,
            ));
        }

        if step == next_plan_step {
            let est = if cfg.episode.bypass_filter {
                state
            } else {
                *filter.estimate()
            };
            let shift = t - published_t;
            let warm = published.shift(shift);
            setup.planner.shift_carry(shift);
            let env = &setup.env;
            let (next, best) = setup.planner.plan_iteration(&warm, plan_counter, |plans| {
                engine
                    .rollout_batch(env, &est, plans)
                    .iter()
                    .map(|r| r.total_cost)
                    .collect()
            })?;
            published = next;
            published_t = t;
            if cfg.episode.log_plans {
                plan_history.push(PlanRecord {
                    t,
                    iteration: plan_counter,
                    best_cost: best.cost,
                    knots: published.knots.clone(),
                });
            }
            next_plan_step += replan_stride(setup.flat, plan_counter);
            plan_counter += 1;
        }

        let age = t - published_t;
        let action = published.evaluate(age);
        let (controls, cmd) = setup.env.pipeline.controls(&state.robot, &action)?;
        state = setup.env.world.step(&state, &controls, setup.dt);
        t += setup.dt;
        step += 1;
        if !state.is_finite() {
            return Ok(finish(
                EpisodeOutcome::Failure,
                t,
                step,
                seed,
                log,
                plan_history,
                engine,
            ));
        }

        let slow = if cfg.episode.slow_every <= 1 || step % cfg.episode.slow_every == 0 {
            Some(&state)
        } else {
            None
        };
        filter.fuse(&state, slow, &params);

        if cfg.episode.log_steps {
            let mut rec = StepRecord::from_state(&state, t);
            rec.action = action;
            rec.command = cmd.map(|c| c.to_array().to_vec());
            rec.plan_age = age;
            let frame = setup.env.frame.build(&setup.env.world, &state, None);
            rec.cost = setup.env.cost.eval(&frame, &controls).unwrap_or(f64::NAN);
            log.push(rec);
        }
    }
}

fn run_asynchronous(
    cfg: &TaskConfig,
    engine: &RolloutEngine,
    seed: u64,
    flat: bool,
) -> Result<EpisodeResult> {
    let mut setup = prepare(cfg, seed, flat)?;
    let params = *setup.env.world.robot_params();
    engine.reset_timing();

    let state0 = setup.initial;
    let slot = PlanSlot::new(SplinePlan::zeros(setup.action_dim, setup.knots, setup.horizon));
    let est_slot: Mutex<(WorldState, f64)> = Mutex::new((state0, 0.0));
    let stop = AtomicBool::new(false);

    let env = &setup.env;
    let spec = setup.spec.clone();
    let dt = setup.dt;
    let bypass = cfg.episode.bypass_filter;
    let planner = &mut setup.planner;

    std::thread::scope(|scope| {
        let planner_handle = scope.spawn(|| {
            let mut iteration = 0u64;
            while !stop.load(Ordering::Relaxed) {
                let (est, t_est) = *est_slot.lock().unwrap();
                let current = slot.load();
                let shift = (t_est - current.publish_time).max(0.0);
                let warm = current.plan.shift(shift);
                planner.shift_carry(shift);
                match planner.plan_iteration(&warm, iteration, |plans| {
                    engine
                        .rollout_batch(env, &est, plans)
                        .iter()
                        .map(|r| r.total_cost)
                        .collect()
                }) {
                    Ok((next, _)) => slot.publish(next, t_est),
                    Err(_) => break,
                }
                iteration += 1;
            }
        });

        let mut state = state0;
        let mut filter = FilterState::new(state, cfg.episode.beta_fast, cfg.episode.beta_slow);
        let mut t = 0.0;
        let mut step = 0usize;
        let hard_cap = (cfg.episode.time_limit / dt).ceil() as usize + 3;
        let mut log = Vec::new();

        let outcome = loop {
            match check_success(&env.world, &state, &spec, t) {
                SuccessState::Success => {
                    break if t <= spec.time_limit {
                        EpisodeOutcome::Success
                    } else {
                        EpisodeOutcome::Timeout
                    };
                }
                SuccessState::Timeout => break EpisodeOutcome::Timeout,
                SuccessState::Running => {}
            }
            if step >= hard_cap {
                break EpisodeOutcome::Timeout;
            }

            let current = slot.load();
            let age = (t - current.publish_time).max(0.0);
            let action = current.plan.evaluate(age);
            let Ok((controls, cmd)) = env.pipeline.controls(&state.robot, &action) else {
                break EpisodeOutcome::Failure;
            };
            state = env.world.step(&state, &controls, dt);
            t += dt;
            step += 1;
            if !state.is_finite() {
                break EpisodeOutcome::Failure;
            }

            filter.fuse(&state, Some(&state), &params);
            let est = if bypass { state } else { *filter.estimate() };
            *est_slot.lock().unwrap() = (est, t);

            if cfg.episode.log_steps {
                let mut rec = StepRecord::from_state(&state, t);
                rec.action = action;
                rec.command = cmd.map(|c| c.to_array().to_vec());
                rec.plan_age = age;
                log.push(rec);
            }

            // Yield so the planner thread gets scheduled between steps.
            std::thread::yield_now();
        };

        stop.store(true, Ordering::Relaxed);
        planner_handle.join().expect("planner thread panicked");

        Ok(finish(outcome, t, step, seed, log, Vec::new(), engine))
    })
}

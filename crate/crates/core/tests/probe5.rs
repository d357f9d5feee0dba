//! Timing probe. Run with:
//! `cargo test -p hsmpc --test probe5 --release -- --ignored --nocapture`

use std::sync::Arc;

use hsmpc::{
    assemble_task_cost, CostParams, FrameSynth, PdVelocityTracker, Pipeline, RolloutEngine,
    RolloutEnv, SplinePlan, TaskConfig, TaskId, World, CONTROL_DIM,
};

#[test]
#[ignore]
fn batch_timing() {
    let cfg = TaskConfig::for_task(TaskId::MoveGeneric);
    let state = cfg.initial_state(0);
    let layout = cfg.action_layout();
    let dim = layout.action_dim();

    let hier_env = RolloutEnv {
        world: cfg.build_world(),
        pipeline: Pipeline::Hierarchical {
            layout,
            defaults: cfg.defaults.clone(),
            policy: Arc::new(PdVelocityTracker::default()),
        },
        cost: assemble_task_cost(TaskId::MoveGeneric, &CostParams::default()),
        frame: FrameSynth {
            goal: cfg.episode.goal,
            ..FrameSynth::default()
        },
        horizon: 1.5,
        control_dt: 0.02,
    };
    let flat_env = RolloutEnv {
        world: cfg.build_world(),
        pipeline: Pipeline::Flat {
            bounds: cfg.flat_bounds(),
        },
        cost: assemble_task_cost(TaskId::MoveGeneric, &CostParams::default()),
        frame: FrameSynth {
            goal: cfg.episode.goal,
            ..FrameSynth::default()
        },
        horizon: 1.5,
        control_dt: 0.02,
    };

    let hier_plans: Vec<SplinePlan> = (0..32)
        .map(|i| {
            let mut p = SplinePlan::zeros(dim, 4, 1.5);
            p.knots[1][0] = 0.01 * i as f64;
            p
        })
        .collect();
    let flat_plans: Vec<SplinePlan> = (0..32)
        .map(|i| {
            let mut p = SplinePlan::zeros(CONTROL_DIM, 4, 1.5);
            p.knots[1][0] = 0.3 * i as f64;
            p
        })
        .collect();

    for workers in [1, 8] {
        let engine = RolloutEngine::new(workers);
        // Warmup.
        for _ in 0..3 {
            engine.rollout_batch(&hier_env, &state, &hier_plans);
        }
        engine.reset_timing();
        for _ in 0..20 {
            engine.rollout_batch(&hier_env, &state, &hier_plans);
        }
        let hier_t = engine.timing();

        for _ in 0..3 {
            engine.rollout_batch(&flat_env, &state, &flat_plans);
        }
        engine.reset_timing();
        for _ in 0..20 {
            engine.rollout_batch(&flat_env, &state, &flat_plans);
        }
        let flat_t = engine.timing();
        println!(
            "workers={workers}: policy-in-loop {:.3} ± {:.3} ms, passthrough {:.3} ± {:.3} ms, ratio {:.2}",
            hier_t.mean_ms,
            hier_t.std_ms,
            flat_t.mean_ms,
            flat_t.std_ms,
            hier_t.mean_ms / flat_t.mean_ms
        );
    }
    println!("cores available: {}", std::thread::available_parallelism().unwrap());
}

//! Manual tuning probes, ignored by default. Run with:
//! `cargo test -p hsmpc --test probe --release -- --ignored --nocapture`

use hsmpc::{run_episode, run_episode_flat, EpisodeOutcome, RolloutEngine, TaskConfig, TaskId};

fn summarize(name: &str, results: &[(u64, EpisodeOutcome, f64)]) {
    let n = results.len();
    let succ = results
        .iter()
        .filter(|(_, o, _)| *o == EpisodeOutcome::Success)
        .count();
    let times: Vec<f64> = results
        .iter()
        .filter(|(_, o, _)| *o == EpisodeOutcome::Success)
        .map(|(_, _, t)| *t)
        .collect();
    let mean = if times.is_empty() {
        f64::NAN
    } else {
        times.iter().sum::<f64>() / times.len() as f64
    };
    println!("{name}: {succ}/{n} success, mean completion {mean:.2}s");
    for (seed, outcome, t) in results {
        println!("  seed {seed}: {outcome:?} at {t:.2}s");
    }
}

#[test]
#[ignore]
fn probe_move_hier() {
    let cfg = TaskConfig::for_task(TaskId::MoveGeneric);
    let engine = RolloutEngine::new(8);
    let results: Vec<_> = (0..10)
        .map(|seed| {
            let r = run_episode(&cfg, &engine, 100 + seed).unwrap();
            (100 + seed, r.outcome, r.completion_time)
        })
        .collect();
    summarize("move_generic hier", &results);
}

#[test]
#[ignore]
fn probe_move_flat() {
    let cfg = TaskConfig::for_task(TaskId::MoveGeneric);
    let engine = RolloutEngine::new(8);
    let results: Vec<_> = (0..10)
        .map(|seed| {
            let r = run_episode_flat(&cfg, &engine, 100 + seed).unwrap();
            (100 + seed, r.outcome, r.completion_time)
        })
        .collect();
    summarize("move_generic flat", &results);
}

#[test]
#[ignore]
fn probe_upright_hier() {
    let cfg = TaskConfig::for_task(TaskId::UprightGeneric);
    let engine = RolloutEngine::new(8);
    let results: Vec<_> = (0..10)
        .map(|seed| {
            let r = run_episode(&cfg, &engine, 200 + seed).unwrap();
            (200 + seed, r.outcome, r.completion_time)
        })
        .collect();
    summarize("upright_generic hier", &results);
}

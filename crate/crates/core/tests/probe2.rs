//! Single-seed diagnostic probe. Run with:
//! `cargo test -p hsmpc --test probe2 --release -- --ignored --nocapture`

use hsmpc::log::ObjectRecord;
use hsmpc::{run_episode, RolloutEngine, TaskConfig, TaskId};

#[test]
#[ignore]
fn probe_seed_104() {
    let mut cfg = TaskConfig::for_task(TaskId::MoveGeneric);
    cfg.episode.log_steps = true;
    let engine = RolloutEngine::new(8);
    let r = run_episode(&cfg, &engine, 104).unwrap();
    println!("outcome {:?} at {:.2}", r.outcome, r.completion_time);
    let goal = cfg.episode.goal;
    for rec in r.log.iter().step_by(25) {
        if let ObjectRecord::Planar { pose, vel, .. } = &rec.object {
            let d = ((pose[0] - goal[0]).powi(2) + (pose[1] - goal[1]).powi(2)).sqrt();
            println!(
                "t={:5.2} obj=({:6.3},{:6.3}) d={:5.3} |v|={:5.3} robot=({:6.3},{:6.3},{:5.2}) eff=({:6.3},{:6.3})",
                rec.t, pose[0], pose[1], d,
                (vel[0] * vel[0] + vel[1] * vel[1]).sqrt(),
                rec.robot_pose[0], rec.robot_pose[1], rec.robot_pose[2],
                rec.effector[0], rec.effector[1],
            );
        }
    }
}

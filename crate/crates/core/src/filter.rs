//! First-order low-pass state fusion. Joint-space channels (base velocity,
//! arm, gripper) arrive fast and are blended on every call; pose-level
//! channels (robot pose, object pose) arrive on a slower clock and hold
//! their previous estimate between samples.

use serde::{Deserialize, Serialize};

use crate::world::{effector_position, ObjectKind, RobotParams, WorldState};

/// A measurement is a snapshot of the world; the filter decides which
/// channels of it to consume on each path.
pub type Measurement = WorldState;

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    } else if a < -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}

fn lerp(est: &mut f64, sample: f64, beta: f64) {
    *est += beta * (sample - *est);
}

fn lerp_angle(est: &mut f64, sample: f64, beta: f64) {
    *est += beta * wrap_angle(sample - *est);
}

/// Exponential smoothing coefficient for a first-order low-pass with the
/// given cutoff frequency, sampled at `dt`.
pub fn beta_from_cutoff(cutoff_hz: f64, dt: f64) -> f64 {
    1.0 - (-std::f64::consts::TAU * cutoff_hz * dt).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    /// Smoothing coefficient for joint-space channels, in (0, 1].
    pub beta_fast: f64,
    /// Smoothing coefficient for pose channels, in (0, 1].
    pub beta_slow: f64,
    estimate: WorldState,
}

impl FilterState {
    pub fn new(initial: WorldState, beta_fast: f64, beta_slow: f64) -> Self {
        assert!(beta_fast > 0.0 && beta_fast <= 1.0);
        assert!(beta_slow > 0.0 && beta_slow <= 1.0);
        Self {
            beta_fast,
            beta_slow,
            estimate: initial,
        }
    }

    pub fn estimate(&self) -> &WorldState {
        &self.estimate
    }

    /// Blend one fast sample and, when present, one slow sample into the
    /// estimate. Missing slow samples leave the pose channels held.
    pub fn fuse(
        &mut self,
        fast: &Measurement,
        slow: Option<&Measurement>,
        params: &RobotParams,
    ) -> WorldState {
        let bf = self.beta_fast;
        let est = &mut self.estimate;

        for i in 0..3 {
            lerp(&mut est.robot.base_vel[i], fast.robot.base_vel[i], bf);
        }
        for i in 0..6 {
            lerp(&mut est.robot.arm_joints[i], fast.robot.arm_joints[i], bf);
            lerp(&mut est.robot.arm_vel[i], fast.robot.arm_vel[i], bf);
        }
        lerp(&mut est.robot.gripper_pos, fast.robot.gripper_pos, bf);

        if let Some(slow) = slow {
            let bs = self.beta_slow;
            lerp(&mut est.robot.pose.x, slow.robot.pose.x, bs);
            lerp(&mut est.robot.pose.y, slow.robot.pose.y, bs);
            lerp_angle(&mut est.robot.pose.yaw, slow.robot.pose.yaw, bs);

            match (&mut est.object.kind, &slow.object.kind) {
                (
                    ObjectKind::Planar {
                        pose: ep,
                        vel: ev,
                        yaw_rate: ew,
                    },
                    ObjectKind::Planar {
                        pose: sp,
                        vel: sv,
                        yaw_rate: sw,
                    },
                ) => {
                    lerp(&mut ep.x, sp.x, bs);
                    lerp(&mut ep.y, sp.y, bs);
                    lerp_angle(&mut ep.yaw, sp.yaw, bs);
                    lerp(&mut ev[0], sv[0], bs);
                    lerp(&mut ev[1], sv[1], bs);
                    lerp(ew, *sw, bs);
                }
                (
                    ObjectKind::Hinged { angle: ea, rate: er },
                    ObjectKind::Hinged { angle: sa, rate: sr },
                ) => {
                    lerp(ea, *sa, bs);
                    lerp(er, *sr, bs);
                }
                _ => {}
            }
        }

        // Keep the derived effector site consistent with the fused pose.
        est.robot.effector = effector_position(&est.robot.pose, &est.robot.arm_joints, params);
        *est
    }
}

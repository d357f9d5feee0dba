//! Command-space types: the 25-dim low-level policy command, the
//! configurable planner action subspace, and the assembly that pads a
//! sampled action out to a full command.
//!
//! The planner samples a compact action vector laid out as
//! `[base, arm, torso, leg, gripper]` with blocks enabled per task. The
//! low-level policy always consumes the full command; blocks the planner
//! does not sample are padded with defaults (legs zero, torso defaults,
//! gripper closed). The 7-dim leg block carries a continuous selection
//! variable in slot 0 that is thresholded into a front-left / front-right /
//! no-leg choice at assembly time, so the sampler itself never sees a
//! discrete variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full command consumed by the low-level policy. Dimension 25:
/// base SE(2) velocity (3) + arm joint targets (6) + gripper (1)
/// + per-leg joint targets (12, ordered FL, FR, HL, HR) + torso pose (3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandVector {
    /// SE(2) base velocity command: vx (m/s), vy (m/s), yaw rate (rad/s).
    pub base_vel: [f64; 3],
    /// Arm joint-angle targets (rad).
    pub arm_targets: [f64; 6],
    /// Gripper position command.
    pub gripper_pos: f64,
    /// Leg joint-angle targets, 3 per leg, ordered [FL, FR, HL, HR].
    pub leg_targets: [f64; 12],
    /// Torso pose targets: pitch (rad), roll (rad), height (m).
    pub torso_pose: [f64; 3],
}

/// Total command dimension.
pub const COMMAND_DIM: usize = 25;

impl CommandVector {
    pub fn is_finite(&self) -> bool {
        self.base_vel.iter().all(|v| v.is_finite())
            && self.arm_targets.iter().all(|v| v.is_finite())
            && self.gripper_pos.is_finite()
            && self.leg_targets.iter().all(|v| v.is_finite())
            && self.torso_pose.iter().all(|v| v.is_finite())
    }

    /// Flatten to the canonical 25-vector (base, arm, gripper, leg, torso).
    pub fn to_array(&self) -> [f64; COMMAND_DIM] {
        let mut out = [0.0; COMMAND_DIM];
        out[0..3].copy_from_slice(&self.base_vel);
        out[3..9].copy_from_slice(&self.arm_targets);
        out[9] = self.gripper_pos;
        out[10..22].copy_from_slice(&self.leg_targets);
        out[22..25].copy_from_slice(&self.torso_pose);
        out
    }
}

/// Which command blocks the planner samples, with per-dimension bounds.
///
/// Block order in the flat action vector is fixed: base (3), arm (6),
/// torso (3), leg (7 = selector + six joint targets), gripper (1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionLayout {
    pub include_base: bool,
    pub include_arm: bool,
    pub include_torso: bool,
    pub include_leg: bool,
    pub include_gripper: bool,
    /// One (lower, upper) pair per action dimension, lower < upper.
    pub bounds: Vec<(f64, f64)>,
}

impl ActionLayout {
    /// Layout sampling only base velocities and arm targets — the default
    /// setup used by the Move/Upright analysis tasks.
    pub fn base_arm(base_bounds: [(f64, f64); 3], arm_bound: (f64, f64)) -> Self {
        let mut bounds = Vec::with_capacity(9);
        bounds.extend_from_slice(&base_bounds);
        bounds.extend(std::iter::repeat(arm_bound).take(6));
        Self {
            include_base: true,
            include_arm: true,
            include_torso: false,
            include_leg: false,
            include_gripper: false,
            bounds,
        }
    }

    pub fn action_dim(&self) -> usize {
        3 * usize::from(self.include_base)
            + 6 * usize::from(self.include_arm)
            + 3 * usize::from(self.include_torso)
            + 7 * usize::from(self.include_leg)
            + usize::from(self.include_gripper)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.len() != self.action_dim() {
            return Err(Error::DimensionMismatch {
                context: "ActionLayout bounds",
                expected: self.action_dim(),
                got: self.bounds.len(),
            });
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("invalid bound ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    /// Clamp an action in place to the per-dimension bounds.
    pub fn clamp(&self, action: &mut [f64]) {
        for (a, &(lo, hi)) in action.iter_mut().zip(&self.bounds) {
            *a = a.clamp(lo, hi);
        }
    }
}

/// Padding values for command blocks the planner does not sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandDefaults {
    /// Torso pitch, roll, height targets.
    pub default_torso: [f64; 3],
    /// Gripper command used when the gripper is not sampled (closed).
    pub default_gripper: f64,
    /// Leg targets when legs are not sampled. Always zero.
    pub default_leg: [f64; 12],
    /// Gripper open position (selector maps a ≤ 0 here).
    pub gripper_open: f64,
    /// Gripper close position (selector maps a > 0 here).
    pub gripper_close: f64,
}

impl Default for CommandDefaults {
    fn default() -> Self {
        Self {
            default_torso: [0.0, 0.0, 0.35],
            default_gripper: 1.0,
            default_leg: [0.0; 12],
            gripper_open: 0.0,
            gripper_close: 1.0,
        }
    }
}

/// Mask a 7-dim leg action `[s, c0..c5]` into six joint targets.
///
/// The selection variable `s` picks the front-left leg (`s < -0.5`,
/// keeps `c[0..3]`), the front-right leg (`s > 0.5`, keeps `c[3..6]`),
/// or no leg at all (everything zeroed).
pub fn mask_leg_command(a_leg: &[f64; 7]) -> Result<[f64; 6]> {
    if a_leg.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("leg action"));
    }
    let s = a_leg[0];
    let mut out = [0.0; 6];
    if s < -0.5 {
        out[..3].copy_from_slice(&a_leg[1..4]);
    } else if s > 0.5 {
        out[3..].copy_from_slice(&a_leg[4..7]);
    }
    Ok(out)
}

/// Map the continuous gripper action to the binary open/close positions:
/// `close_pos` for `a > 0`, `open_pos` for `a ≤ 0`.
pub fn map_gripper(a_gripper: f64, open_pos: f64, close_pos: f64) -> Result<f64> {
    if !a_gripper.is_finite() || !open_pos.is_finite() || !close_pos.is_finite() {
        return Err(Error::NonFinite("gripper action"));
    }
    Ok(if a_gripper > 0.0 { close_pos } else { open_pos })
}

/// Assemble a full 25-dim command from a sampled action.
///
/// Sampled blocks are copied through (leg block masked by its selector and
/// embedded into the front-leg slots); unsampled blocks take the defaults.
pub fn assemble_command(
    action: &[f64],
    layout: &ActionLayout,
    defaults: &CommandDefaults,
) -> Result<CommandVector> {
    if action.len() != layout.action_dim() {
        return Err(Error::DimensionMismatch {
            context: "assemble_command action",
            expected: layout.action_dim(),
            got: action.len(),
        });
    }
    if action.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("action"));
    }

    let mut cmd = CommandVector {
        base_vel: [0.0; 3],
        arm_targets: [0.0; 6],
        gripper_pos: defaults.default_gripper,
        leg_targets: defaults.default_leg,
        torso_pose: defaults.default_torso,
    };

    let mut i = 0;
    if layout.include_base {
        cmd.base_vel.copy_from_slice(&action[i..i + 3]);
        i += 3;
    }
    if layout.include_arm {
        cmd.arm_targets.copy_from_slice(&action[i..i + 6]);
        i += 6;
    }
    if layout.include_torso {
        cmd.torso_pose.copy_from_slice(&action[i..i + 3]);
        i += 3;
    }
    if layout.include_leg {
        let mut a_leg = [0.0; 7];
        a_leg.copy_from_slice(&action[i..i + 7]);
        let masked = mask_leg_command(&a_leg)?;
        // Front legs only: FL occupies slots 0..3, FR slots 3..6, rear zero.
        cmd.leg_targets[..6].copy_from_slice(&masked);
        i += 7;
    }
    if layout.include_gripper {
        cmd.gripper_pos = map_gripper(action[i], defaults.gripper_open, defaults.gripper_close)?;
    }

    Ok(cmd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layout_all() -> ActionLayout {
        ActionLayout {
            include_base: true,
            include_arm: true,
            include_torso: true,
            include_leg: true,
            include_gripper: true,
            bounds: vec![(-2.0, 2.0); 20],
        }
    }

    #[test]
    fn mask_selects_front_left() {
        let out = mask_leg_command(&[-0.9, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(out, [1.0, 2.0, 3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn mask_selects_front_right() {
        let out = mask_leg_command(&[0.9, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(out, [0.0, 0.0, 0.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn mask_selects_no_leg_in_deadband() {
        for s in [-0.5, 0.0, 0.5] {
            let out = mask_leg_command(&[s, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
            assert_eq!(out, [0.0; 6], "s = {s}");
        }
    }

    #[test]
    fn mask_rejects_non_finite() {
        assert!(mask_leg_command(&[f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn gripper_maps_to_binary_positions() {
        assert_eq!(map_gripper(0.7, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(map_gripper(-0.2, 0.0, 1.0).unwrap(), 0.0);
        // Boundary falls in the ≤ 0 branch.
        assert_eq!(map_gripper(0.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn assemble_pads_unsampled_blocks() {
        let layout = ActionLayout::base_arm(
            [(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            (-2.0, 2.0),
        );
        let defaults = CommandDefaults::default();
        let action = [0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let cmd = assemble_command(&action, &layout, &defaults).unwrap();
        assert_eq!(cmd.base_vel, [0.1, 0.0, 0.0]);
        assert_eq!(cmd.arm_targets, [0.0; 6]);
        assert_eq!(cmd.leg_targets, [0.0; 12]);
        assert_eq!(cmd.torso_pose, defaults.default_torso);
        assert_eq!(cmd.gripper_pos, defaults.gripper_close);
    }

    #[test]
    fn assemble_full_layout_passes_all_blocks_through() {
        let layout = layout_all();
        let defaults = CommandDefaults::default();
        let mut action = vec![0.0; 20];
        action[0..3].copy_from_slice(&[0.3, -0.1, 0.2]); // base
        action[3..9].copy_from_slice(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]); // arm
        action[9..12].copy_from_slice(&[0.05, -0.05, 0.4]); // torso
        action[12..19].copy_from_slice(&[-0.9, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]); // leg
        action[19] = -1.0; // gripper open
        let cmd = assemble_command(&action, &layout, &defaults).unwrap();
        assert_eq!(cmd.base_vel, [0.3, -0.1, 0.2]);
        assert_eq!(cmd.arm_targets, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        assert_eq!(cmd.torso_pose, [0.05, -0.05, 0.4]);
        assert_eq!(
            cmd.leg_targets,
            [1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(cmd.gripper_pos, defaults.gripper_open);
    }

    #[test]
    fn assemble_gripper_open_when_negative() {
        let layout = ActionLayout {
            include_base: true,
            include_arm: true,
            include_torso: false,
            include_leg: false,
            include_gripper: true,
            bounds: vec![(-2.0, 2.0); 10],
        };
        let defaults = CommandDefaults::default();
        let mut action = vec![0.0; 10];
        action[0] = 0.1;
        action[9] = -1.0;
        let cmd = assemble_command(&action, &layout, &defaults).unwrap();
        assert_eq!(cmd.gripper_pos, defaults.gripper_open);
        assert_eq!(cmd.base_vel, [0.1, 0.0, 0.0]);
    }

    #[test]
    fn assemble_rejects_dimension_mismatch() {
        let layout = layout_all();
        let defaults = CommandDefaults::default();
        assert!(matches!(
            assemble_command(&[0.0; 5], &layout, &defaults),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        /// At least one 3-block of the masked output is always zero, and the
        /// command assembly is total: finite, dimension 25.
        #[test]
        fn mask_always_zeroes_one_block(s in -1.0f64..=1.0, c in prop::array::uniform6(-3.0f64..3.0)) {
            let out = mask_leg_command(&[s, c[0], c[1], c[2], c[3], c[4], c[5]]).unwrap();
            let fl_zero = out[..3].iter().all(|&v| v == 0.0);
            let fr_zero = out[3..].iter().all(|&v| v == 0.0);
            prop_assert!(fl_zero || fr_zero);
            if (-0.5..=0.5).contains(&s) {
                prop_assert!(fl_zero && fr_zero);
            }
        }

        /// Values an action would have carried in unsampled blocks cannot leak
        /// into the assembled command.
        #[test]
        fn unsampled_blocks_cannot_leak(
            base in prop::array::uniform3(-1.0f64..1.0),
            arm in prop::array::uniform6(-2.0f64..2.0),
        ) {
            let layout = ActionLayout::base_arm(
                [(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
                (-2.0, 2.0),
            );
            let defaults = CommandDefaults::default();
            let mut action = Vec::new();
            action.extend_from_slice(&base);
            action.extend_from_slice(&arm);
            let cmd = assemble_command(&action, &layout, &defaults).unwrap();
            prop_assert!(cmd.is_finite());
            prop_assert_eq!(cmd.to_array().len(), COMMAND_DIM);
            prop_assert_eq!(cmd.leg_targets, defaults.default_leg);
            prop_assert_eq!(cmd.torso_pose, defaults.default_torso);
            prop_assert_eq!(cmd.gripper_pos, defaults.gripper_close);
        }

        /// The gripper image is exactly {open_pos, close_pos}.
        #[test]
        fn gripper_image_is_binary(a in -1.0f64..=1.0) {
            let g = map_gripper(a, -0.3, 0.8).unwrap();
            prop_assert!(g == -0.3 || g == 0.8);
        }
    }
}

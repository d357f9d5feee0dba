//! Spline-parameterized action plans over the prediction horizon, and the
//! linear noise schedule applied to their knots.
//!
//! A plan stores K knot actions at uniform times over `[0, horizon]` and
//! interpolates between them (linear by default, zero-order hold behind a
//! tag). Evaluation past the horizon holds the last knot, because the
//! 50 Hz executor can outrun a late 20 Hz replan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    ZeroOrderHold,
    Linear,
}

/// K knot actions over the horizon plus the interpolation rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplinePlan {
    /// Monotonically increasing knot times; first is 0, last is `horizon`.
    pub knot_times: Vec<f64>,
    /// One action vector per knot; all share the plan's action dimension.
    pub knots: Vec<Vec<f64>>,
    pub horizon: f64,
    pub interpolation: Interpolation,
}

impl SplinePlan {
    /// A plan of `num_knots` zero actions on a uniform grid.
    pub fn zeros(action_dim: usize, num_knots: usize, horizon: f64) -> Self {
        Self::from_knots(
            vec![vec![0.0; action_dim]; num_knots],
            horizon,
            Interpolation::Linear,
        )
    }

    /// Build a plan from knots on the uniform grid over `[0, horizon]`.
    pub fn from_knots(knots: Vec<Vec<f64>>, horizon: f64, interpolation: Interpolation) -> Self {
        let k = knots.len();
        assert!(k >= 2, "a plan needs at least two knots");
        let knot_times = (0..k)
            .map(|i| horizon * i as f64 / (k - 1) as f64)
            .collect();
        Self {
            knot_times,
            knots,
            horizon,
            interpolation,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.knots.first().map_or(0, Vec::len)
    }

    pub fn num_knots(&self) -> usize {
        self.knots.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.len() < 2 || self.knot_times.len() != self.knots.len() {
            return Err(Error::InvalidPlan(format!(
                "{} knots / {} times",
                self.knots.len(),
                self.knot_times.len()
            )));
        }
        if self.knot_times[0] != 0.0 || *self.knot_times.last().unwrap() != self.horizon {
            return Err(Error::InvalidPlan("knot grid must span [0, horizon]".into()));
        }
        if self.knot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPlan("knot times must increase".into()));
        }
        let dim = self.action_dim();
        if self.knots.iter().any(|k| k.len() != dim) {
            return Err(Error::InvalidPlan("knot dimensions differ".into()));
        }
        Ok(())
    }

    /// Interpolate the plan at time `t`. At a knot time the result equals
    /// that knot exactly; beyond the horizon the last knot is held.
    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        debug_assert!(t >= 0.0 && t.is_finite());
        let last = self.knots.len() - 1;
        if t >= self.horizon {
            return self.knots[last].clone();
        }
        // Find the segment containing t: knot_times[i] <= t < knot_times[i+1].
        let i = match self
            .knot_times
            .iter()
            .position(|&kt| kt > t)
        {
            Some(j) => j - 1,
            None => last - 1,
        };
        match self.interpolation {
            Interpolation::ZeroOrderHold => self.knots[i].clone(),
            Interpolation::Linear => {
                let t0 = self.knot_times[i];
                let t1 = self.knot_times[i + 1];
                let alpha = (t - t0) / (t1 - t0);
                self.knots[i]
                    .iter()
                    .zip(&self.knots[i + 1])
                    .map(|(a, b)| a + alpha * (b - a))
                    .collect()
            }
        }
    }

    /// Warm-start shift: a plan that evaluates at `t` to the old plan's
    /// value at `t + dt`, re-sampled onto the original knot grid.
    pub fn shift(&self, dt: f64) -> Self {
        debug_assert!(dt >= 0.0);
        let knots = self
            .knot_times
            .iter()
            .map(|&kt| self.evaluate(kt + dt))
            .collect();
        Self {
            knot_times: self.knot_times.clone(),
            knots,
            horizon: self.horizon,
            interpolation: self.interpolation,
        }
    }
}

/// Linear per-knot noise ramp over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub std_lo: f64,
    pub std_hi: f64,
    pub horizon: f64,
}

impl NoiseSchedule {
    pub fn new(std_lo: f64, std_hi: f64, horizon: f64) -> Self {
        assert!(
            0.0 <= std_lo && std_lo <= std_hi && horizon > 0.0,
            "schedule needs 0 <= lo <= hi and horizon > 0"
        );
        Self {
            std_lo,
            std_hi,
            horizon,
        }
    }

    /// Noise standard deviation at time `t`, clamped to `[0, horizon]`.
    /// Exact at both endpoints.
    pub fn std_at(&self, t: f64) -> f64 {
        let alpha = (t / self.horizon).clamp(0.0, 1.0);
        self.std_lo * (1.0 - alpha) + self.std_hi * alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scalar_plan(values: &[f64], horizon: f64) -> SplinePlan {
        SplinePlan::from_knots(
            values.iter().map(|&v| vec![v]).collect(),
            horizon,
            Interpolation::Linear,
        )
    }

    /// Independent oracle: dense brute-force resampling. For each query it
    /// scans a fine grid for the bracketing segment and lerps from raw knot
    /// data without going through `evaluate`.
    fn lerp_oracle(times: &[f64], knots: &[Vec<f64>], t: f64) -> Vec<f64> {
        let last = knots.len() - 1;
        if t >= times[last] {
            return knots[last].clone();
        }
        for i in 0..last {
            if t >= times[i] && t < times[i + 1] {
                let a = (t - times[i]) / (times[i + 1] - times[i]);
                return knots[i]
                    .iter()
                    .zip(&knots[i + 1])
                    .map(|(x, y)| x * (1.0 - a) + y * a)
                    .collect();
            }
        }
        unreachable!()
    }

    #[test]
    fn value_at_knot_equals_control_point() {
        let plan = scalar_plan(&[2.0, -1.0], 1.5);
        assert_eq!(plan.evaluate(0.0), vec![2.0]);
        assert_eq!(plan.evaluate(1.5), vec![-1.0]);
    }

    #[test]
    fn linear_midpoint() {
        // Frozen from the closed form (0 + 1)/2 and cross-checked against
        // the dense resampling oracle.
        let plan = scalar_plan(&[0.0, 1.0], 1.5);
        assert_relative_eq!(plan.evaluate(0.75)[0], 0.5, epsilon = 1e-15);
        let oracle = lerp_oracle(&plan.knot_times, &plan.knots, 0.75);
        assert_relative_eq!(plan.evaluate(0.75)[0], oracle[0], epsilon = 1e-15);
    }

    #[test]
    fn holds_last_knot_beyond_horizon() {
        let plan = scalar_plan(&[0.0, 1.0], 1.5);
        assert_eq!(plan.evaluate(2.0), vec![1.0]);
        assert_eq!(plan.evaluate(100.0), vec![1.0]);
    }

    #[test]
    fn zero_order_hold_takes_left_knot() {
        let mut plan = scalar_plan(&[0.0, 1.0, 4.0], 1.0);
        plan.interpolation = Interpolation::ZeroOrderHold;
        assert_eq!(plan.evaluate(0.2)[0], 0.0);
        assert_eq!(plan.evaluate(0.6)[0], 1.0);
        assert_eq!(plan.evaluate(1.0)[0], 4.0);
    }

    #[test]
    fn schedule_endpoints_and_midpoint() {
        let sched = NoiseSchedule::new(0.02, 0.6, 1.5);
        assert_relative_eq!(sched.std_at(0.0), 0.02, epsilon = 1e-15);
        assert_relative_eq!(sched.std_at(1.5), 0.6, epsilon = 1e-15);
        // Midpoint of the ramp, frozen from 0.02 + 0.58/2.
        assert_relative_eq!(sched.std_at(0.75), 0.31, epsilon = 1e-15);
    }

    #[test]
    fn schedule_clamps_out_of_range() {
        let sched = NoiseSchedule::new(0.02, 0.6, 1.5);
        assert_eq!(sched.std_at(-1.0), 0.02);
        assert_eq!(sched.std_at(10.0), 0.6);
    }

    #[test]
    fn shift_zero_is_identity() {
        let plan = scalar_plan(&[0.3, -0.7, 1.1, 0.0], 1.5);
        let shifted = plan.shift(0.0);
        for i in 0..=30 {
            let t = 1.5 * i as f64 / 30.0;
            assert_relative_eq!(plan.evaluate(t)[0], shifted.evaluate(t)[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_by_horizon_holds_last_knot() {
        let plan = scalar_plan(&[0.3, -0.7, 1.1, 0.25], 1.5);
        let shifted = plan.shift(1.5);
        for k in &shifted.knots {
            assert_eq!(k[0], 0.25);
        }
    }

    #[test]
    fn shift_by_knot_spacing_matches_old_plan() {
        // Oracle: dense-grid comparison against the unshifted plan.
        let plan = scalar_plan(&[0.3, -0.7, 1.1, 0.25], 1.5);
        let dt = 0.5; // knot spacing
        let shifted = plan.shift(dt);
        for i in 0..=60 {
            let t = 1.5 * i as f64 / 60.0;
            let expect = lerp_oracle(&plan.knot_times, &plan.knots, t + dt);
            assert_relative_eq!(shifted.evaluate(t)[0], expect[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_composes_on_grid_multiples() {
        let plan = scalar_plan(&[0.3, -0.7, 1.1, 0.25, -0.4], 2.0);
        let spacing = 0.5;
        for (d1, d2) in [(spacing, 2.0 * spacing), (2.0 * spacing, spacing)] {
            let twice = plan.shift(d1).shift(d2);
            let once = plan.shift(d1 + d2);
            for (a, b) in twice.knots.iter().zip(&once.knots) {
                assert_relative_eq!(a[0], b[0], epsilon = 1e-9);
            }
        }
    }

    proptest! {
        /// Linear interpolation is continuous: neighboring samples on a dense
        /// grid differ by at most the knot-to-knot slope times the grid step.
        #[test]
        fn evaluate_is_continuous(vals in prop::collection::vec(-5.0f64..5.0, 4)) {
            let plan = scalar_plan(&vals, 1.5);
            let n = 600;
            let step = 1.5 / n as f64;
            let max_slope = vals
                .windows(2)
                .map(|w| (w[1] - w[0]).abs() / 0.5)
                .fold(0.0, f64::max);
            for i in 0..n {
                let a = plan.evaluate(i as f64 * step)[0];
                let b = plan.evaluate((i + 1) as f64 * step)[0];
                prop_assert!((b - a).abs() <= max_slope * step + 1e-12);
            }
        }

        /// The schedule is non-decreasing and attains both endpoints.
        #[test]
        fn schedule_monotone(lo in 0.0f64..0.5, extra in 0.0f64..1.0, t1 in 0.0f64..1.5, t2 in 0.0f64..1.5) {
            let sched = NoiseSchedule::new(lo, lo + extra, 1.5);
            let (a, b) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(sched.std_at(a) <= sched.std_at(b) + 1e-15);
            prop_assert_eq!(sched.std_at(0.0), lo);
            prop_assert_eq!(sched.std_at(1.5), lo + extra);
        }

        /// Shifting re-samples the old plan exactly on the knot grid.
        #[test]
        fn shift_matches_old_plan_on_grid(vals in prop::collection::vec(-5.0f64..5.0, 5), dt in 0.0f64..2.5) {
            let plan = scalar_plan(&vals, 2.0);
            let shifted = plan.shift(dt);
            for (i, &kt) in plan.knot_times.iter().enumerate() {
                let expect = lerp_oracle(&plan.knot_times, &plan.knots, kt + dt);
                prop_assert!((shifted.knots[i][0] - expect[0]).abs() < 1e-12);
            }
        }
    }
}

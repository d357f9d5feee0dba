//! Cross-entropy method planner: perturb a nominal spline plan, roll out
//! the population, keep the lowest-cost elites, refit the nominal to their
//! mean.
//!
//! The proposal distribution is mean-only: the per-knot standard deviation
//! stays pinned to the fixed linear [`NoiseSchedule`] rather than being
//! refit from elites. The unperturbed nominal is injected as sample 0 of
//! every population, and the previous iteration's best plan is carried as
//! sample 1, which makes the best-cost sequence non-increasing on a
//! deterministic objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::{NoiseSchedule, SplinePlan};

/// How the nominal is refit from the elite set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Weighting {
    /// Unweighted knot-wise mean of the elites.
    Uniform,
    /// Exponential weighting by cost, softmax(-cost / lambda).
    Exponential { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CemConfig {
    pub num_samples: usize,
    pub num_elites: usize,
    pub noise: NoiseSchedule,
    /// Inject the unperturbed nominal as sample 0.
    pub include_nominal: bool,
    /// Re-inject the previous best plan as sample 1.
    pub carry_best: bool,
    pub weighting: Weighting,
    pub seed: u64,
}

impl CemConfig {
    /// 32 samples, 3 elites, noise ramp 0.02 -> 0.6 over a 1.5 s horizon.
    pub fn standard(seed: u64) -> Self {
        Self {
            num_samples: 32,
            num_elites: 3,
            noise: NoiseSchedule::new(0.02, 0.6, 1.5),
            include_nominal: true,
            carry_best: true,
            weighting: Weighting::Uniform,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elites == 0 || self.num_elites > self.num_samples {
            return Err(Error::Config(format!(
                "need 1 <= elites ({}) <= samples ({})",
                self.num_elites, self.num_samples
            )));
        }
        Ok(())
    }
}

/// A rolled-out population member.
#[derive(Debug, Clone)]
pub struct PlanCandidate {
    pub plan: SplinePlan,
    pub cost: f64,
    pub sample_index: usize,
}

/// splitmix64 finalizer; decorrelates nearby (seed, iteration, sample) triples.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_rng(seed: u64, iteration: u64, sample_index: u64) -> ChaCha8Rng {
    let stream = mix(seed ^ mix(iteration) ^ mix(sample_index.wrapping_mul(0x05851_F42D)));
    ChaCha8Rng::seed_from_u64(stream)
}

/// Draw a population of `num_samples` plans around `nominal`.
///
/// Each knot receives Gaussian noise with the schedule's std at that knot
/// time, then is clamped to the layout bounds. The draw at
/// (knot, dim) is a pure function of (seed, iteration, sample_index,
/// knot_index, dim_index): every sample owns a counter-seeded stream and
/// consumes it in fixed knot-major order.
pub fn sample_population(
    nominal: &SplinePlan,
    bounds: &[(f64, f64)],
    config: &CemConfig,
    iteration: u64,
) -> Vec<SplinePlan> {
    let mut population = Vec::with_capacity(config.num_samples);
    for sample_index in 0..config.num_samples {
        if sample_index == 0 && config.include_nominal {
            population.push(nominal.clone());
            continue;
        }
        let mut rng = sample_rng(config.seed, iteration, sample_index as u64);
        let mut plan = nominal.clone();
        for (k, knot) in plan.knots.iter_mut().enumerate() {
            let std = config.noise.std_at(plan.knot_times[k]);
            for (d, v) in knot.iter_mut().enumerate() {
                let eps: f64 = rng.sample(StandardNormal);
                *v += std * eps;
                if let Some(&(lo, hi)) = bounds.get(d) {
                    *v = v.clamp(lo, hi);
                }
            }
        }
        population.push(plan);
    }
    population
}

/// The `k` lowest-cost candidates, ties broken by lower sample index.
pub fn select_elites(mut candidates: Vec<PlanCandidate>, k: usize) -> Result<Vec<PlanCandidate>> {
    if candidates.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let k = k.min(candidates.len());
    candidates.sort_by(|a, b| {
        f64::total_cmp(&a.cost, &b.cost).then(a.sample_index.cmp(&b.sample_index))
    });
    candidates.truncate(k);
    Ok(candidates)
}

/// Refit the nominal from the elites: knot-wise mean (or exponential
/// cost-weighted mean).
pub fn update_nominal(elites: &[PlanCandidate], weighting: Weighting) -> Result<SplinePlan> {
    let first = elites.first().ok_or(Error::EmptyPopulation)?;
    let shape_ok = elites.iter().all(|c| {
        c.plan.num_knots() == first.plan.num_knots()
            && c.plan.action_dim() == first.plan.action_dim()
    });
    if !shape_ok {
        return Err(Error::ShapeMismatch);
    }

    let weights: Vec<f64> = match weighting {
        Weighting::Uniform => vec![1.0 / elites.len() as f64; elites.len()],
        Weighting::Exponential { lambda } => {
            let min_cost = elites.iter().map(|c| c.cost).fold(f64::INFINITY, f64::min);
            let raw: Vec<f64> = elites
                .iter()
                .map(|c| (-(c.cost - min_cost) / lambda.max(1e-12)).exp())
                .collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / sum).collect()
        }
    };

    let mut plan = first.plan.clone();
    for (k, knot) in plan.knots.iter_mut().enumerate() {
        for (d, v) in knot.iter_mut().enumerate() {
            *v = elites
                .iter()
                .zip(&weights)
                .map(|(c, w)| w * c.plan.knots[k][d])
                .sum();
        }
    }
    Ok(plan)
}

/// One replanning step: sampling, batch evaluation, elite selection, and
/// the nominal update, with the previous best plan carried across calls.
#[derive(Debug, Clone)]
pub struct CemPlanner {
    pub config: CemConfig,
    pub bounds: Vec<(f64, f64)>,
    prev_best: Option<SplinePlan>,
}

impl CemPlanner {
    pub fn new(config: CemConfig, bounds: Vec<(f64, f64)>) -> Self {
        Self {
            config,
            bounds,
            prev_best: None,
        }
    }

    /// Time-shift the carried best plan when the nominal is warm-started
    /// between replanning cycles, so both live on the same clock.
    pub fn shift_carry(&mut self, dt: f64) {
        if let Some(best) = &self.prev_best {
            self.prev_best = Some(best.shift(dt));
        }
    }

    pub fn reset_carry(&mut self) {
        self.prev_best = None;
    }

    /// Run one iteration. `evaluate` maps the population to costs indexed
    /// by sample position; failed rollouts must report `f64::INFINITY`.
    ///
    /// Returns the refit nominal and the best candidate. With
    /// `include_nominal` the best cost never exceeds the rolled-out cost
    /// of the incoming nominal.
    pub fn plan_iteration<F>(
        &mut self,
        nominal: &SplinePlan,
        iteration: u64,
        evaluate: F,
    ) -> Result<(SplinePlan, PlanCandidate)>
    where
        F: FnOnce(&[SplinePlan]) -> Vec<f64>,
    {
        self.config.validate()?;
        let mut population =
            sample_population(nominal, &self.bounds, &self.config, iteration);
        if self.config.carry_best && population.len() >= 2 {
            if let Some(best) = &self.prev_best {
                population[1] = best.clone();
            }
        }

        let costs = evaluate(&population);
        assert_eq!(costs.len(), population.len(), "evaluator must be index-aligned");
        if costs.iter().all(|c| !c.is_finite()) {
            return Err(Error::AllRolloutsFailed);
        }

        let candidates: Vec<PlanCandidate> = population
            .into_iter()
            .zip(costs)
            .enumerate()
            .map(|(sample_index, (plan, cost))| PlanCandidate {
                plan,
                cost: if cost.is_nan() { f64::INFINITY } else { cost },
                sample_index,
            })
            .collect();

        let elites = select_elites(candidates, self.config.num_elites)?;
        let best = elites[0].clone();
        let nominal = update_nominal(&elites, self.config.weighting)?;
        self.prev_best = Some(best.plan.clone());
        Ok((nominal, best))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::Interpolation;
    use proptest::prelude::*;

    fn nominal_2d() -> SplinePlan {
        SplinePlan::zeros(2, 4, 1.5)
    }

    fn config(seed: u64) -> CemConfig {
        CemConfig::standard(seed)
    }

    fn wide_bounds(dim: usize) -> Vec<(f64, f64)> {
        vec![(-5.0, 5.0); dim]
    }

    #[test]
    fn zero_noise_collapses_to_nominal() {
        let mut cfg = config(7);
        cfg.noise = NoiseSchedule::new(0.0, 0.0, 1.5);
        let nominal = nominal_2d();
        let pop = sample_population(&nominal, &wide_bounds(2), &cfg, 0);
        assert_eq!(pop.len(), 32);
        for p in &pop {
            assert_eq!(p, &nominal);
        }
    }

    #[test]
    fn population_is_deterministic() {
        let cfg = config(123);
        let nominal = nominal_2d();
        let a = sample_population(&nominal, &wide_bounds(2), &cfg, 5);
        let b = sample_population(&nominal, &wide_bounds(2), &cfg, 5);
        assert_eq!(a, b);
        let c = sample_population(&nominal, &wide_bounds(2), &cfg, 6);
        assert_ne!(a, c, "different iterations must draw different noise");
    }

    #[test]
    fn population_size_matches_config() {
        let pop = sample_population(&nominal_2d(), &wide_bounds(2), &config(0), 0);
        assert_eq!(pop.len(), 32);
    }

    #[test]
    fn population_respects_bounds() {
        let mut cfg = config(9);
        cfg.noise = NoiseSchedule::new(3.0, 3.0, 1.5);
        let bounds = vec![(-0.5, 0.5), (-0.1, 0.9)];
        let pop = sample_population(&nominal_2d(), &bounds, &cfg, 0);
        for p in &pop {
            for knot in &p.knots {
                for (d, v) in knot.iter().enumerate() {
                    assert!(*v >= bounds[d].0 && *v <= bounds[d].1);
                }
            }
        }
    }

    fn candidate(cost: f64, idx: usize) -> PlanCandidate {
        PlanCandidate {
            plan: SplinePlan::zeros(1, 2, 1.0),
            cost,
            sample_index: idx,
        }
    }

    #[test]
    fn elites_argmin() {
        let out = select_elites(vec![candidate(3.0, 0), candidate(1.0, 1), candidate(2.0, 2)], 1)
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cost, 1.0);
    }

    #[test]
    fn elites_tie_break_is_stable() {
        // Oracle: brute-force stable sort over every permutation of a
        // 3-element list with a duplicated cost.
        let base = [(1.0, 0usize), (1.0, 1), (2.0, 2)];
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for perm in perms {
            let cands: Vec<PlanCandidate> =
                perm.iter().map(|&i| candidate(base[i].0, base[i].1)).collect();
            // Independent oracle: sort (cost, index) pairs lexicographically.
            let mut pairs: Vec<(f64, usize)> = perm.iter().map(|&i| base[i]).collect();
            pairs.sort_by(|a, b| f64::total_cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));
            let out = select_elites(cands, 1).unwrap();
            assert_eq!(out[0].sample_index, pairs[0].1);
            assert_eq!(out[0].sample_index, 0, "cost-1 candidate with smaller index wins");
        }
    }

    #[test]
    fn elites_full_selection_sorted() {
        let out = select_elites(vec![candidate(3.0, 0), candidate(1.0, 1), candidate(2.0, 2)], 3)
            .unwrap();
        let costs: Vec<f64> = out.iter().map(|c| c.cost).collect();
        assert_eq!(costs, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn elites_empty_population_errors() {
        assert!(select_elites(Vec::new(), 1).is_err());
    }

    #[test]
    fn nominal_update_single_elite_is_identity() {
        let mut c = candidate(1.0, 0);
        c.plan.knots[0] = vec![0.7];
        let out = update_nominal(&[c.clone()], Weighting::Uniform).unwrap();
        assert_eq!(out, c.plan);
    }

    #[test]
    fn nominal_update_is_knotwise_mean() {
        // Hand-computed mean, verified against an independent summation.
        let mut a = candidate(1.0, 0);
        a.plan = SplinePlan::from_knots(vec![vec![0.0], vec![0.0]], 1.0, Interpolation::Linear);
        let mut b = candidate(2.0, 1);
        b.plan = SplinePlan::from_knots(vec![vec![2.0], vec![4.0]], 1.0, Interpolation::Linear);
        let out = update_nominal(&[a.clone(), b.clone()], Weighting::Uniform).unwrap();
        assert_eq!(out.knots, vec![vec![1.0], vec![2.0]]);
        // Oracle: accumulate sums independently.
        for k in 0..2 {
            let oracle = (a.plan.knots[k][0] + b.plan.knots[k][0]) / 2.0;
            assert_eq!(out.knots[k][0], oracle);
        }
    }

    #[test]
    fn nominal_update_identical_elites_unchanged() {
        let mut c = candidate(1.0, 0);
        c.plan.knots[1] = vec![-0.4];
        let out =
            update_nominal(&[c.clone(), c.clone(), c.clone()], Weighting::Uniform).unwrap();
        assert_eq!(out, c.plan);
    }

    #[test]
    fn nominal_update_shape_mismatch_errors() {
        let a = candidate(1.0, 0);
        let mut b = candidate(2.0, 1);
        b.plan = SplinePlan::zeros(2, 2, 1.0);
        assert!(matches!(
            update_nominal(&[a, b], Weighting::Uniform),
            Err(Error::ShapeMismatch)
        ));
    }

    /// Integrate the plan at the control rate and return the squared
    /// distance of the integrated action from the origin, starting offset.
    fn quadratic_surrogate(plans: &[SplinePlan]) -> Vec<f64> {
        plans
            .iter()
            .map(|p| {
                let mut pos = [1.0, -0.5];
                let dt = 0.02;
                let steps = (p.horizon / dt).round() as usize;
                for i in 0..steps {
                    let a = p.evaluate(i as f64 * dt);
                    pos[0] += a[0] * dt;
                    pos[1] += a[1] * dt;
                }
                pos[0] * pos[0] + pos[1] * pos[1]
            })
            .collect()
    }

    #[test]
    fn converges_on_quadratic_surrogate() {
        for seed in 0..3 {
            let mut planner = CemPlanner::new(config(seed), wide_bounds(2));
            let mut nominal = nominal_2d();
            let mut best = f64::INFINITY;
            for it in 0..50 {
                let (next, cand) = planner
                    .plan_iteration(&nominal, it, quadratic_surrogate)
                    .unwrap();
                nominal = next;
                best = best.min(cand.cost);
                if best < 1e-2 {
                    break;
                }
            }
            assert!(best < 1e-2, "seed {seed}: best {best}");
        }
    }

    #[test]
    fn best_cost_sequence_is_monotone() {
        let mut planner = CemPlanner::new(config(42), wide_bounds(2));
        let mut nominal = nominal_2d();
        let mut prev = f64::INFINITY;
        for it in 0..30 {
            let (next, cand) = planner
                .plan_iteration(&nominal, it, quadratic_surrogate)
                .unwrap();
            nominal = next;
            assert!(
                cand.cost <= prev + 1e-12,
                "iteration {it}: {} > {}",
                cand.cost,
                prev
            );
            prev = cand.cost;
        }
    }

    #[test]
    fn best_beats_incoming_nominal() {
        let mut planner = CemPlanner::new(config(11), wide_bounds(2));
        let nominal = nominal_2d();
        let nominal_cost = quadratic_surrogate(std::slice::from_ref(&nominal))[0];
        let (_, best) = planner
            .plan_iteration(&nominal, 0, quadratic_surrogate)
            .unwrap();
        assert!(best.cost <= nominal_cost);
    }

    #[test]
    fn zero_noise_best_is_nominal() {
        let mut cfg = config(3);
        cfg.noise = NoiseSchedule::new(0.0, 0.0, 1.5);
        let mut planner = CemPlanner::new(cfg, wide_bounds(2));
        let nominal = nominal_2d();
        let (updated, best) = planner
            .plan_iteration(&nominal, 0, quadratic_surrogate)
            .unwrap();
        assert_eq!(best.plan, nominal);
        assert_eq!(best.sample_index, 0);
        assert_eq!(updated, nominal);
    }

    #[test]
    fn static_zero_cost_nominal_is_fixed_point() {
        // A cost that is already zero for the nominal stays zero: the
        // nominal is preserved as a population member and wins ties.
        let mut planner = CemPlanner::new(config(5), wide_bounds(2));
        let nominal = nominal_2d();
        let zero_at_nominal = |plans: &[SplinePlan]| {
            plans
                .iter()
                .map(|p| {
                    p.knots
                        .iter()
                        .flat_map(|k| k.iter())
                        .map(|v| v * v)
                        .sum::<f64>()
                })
                .collect::<Vec<f64>>()
        };
        let (_, best) = planner.plan_iteration(&nominal, 0, zero_at_nominal).unwrap();
        assert_eq!(best.cost, 0.0);
        assert_eq!(best.sample_index, 0);
    }

    #[test]
    fn all_failed_rollouts_error() {
        let mut planner = CemPlanner::new(config(1), wide_bounds(2));
        let nominal = nominal_2d();
        let res = planner.plan_iteration(&nominal, 0, |plans| {
            vec![f64::INFINITY; plans.len()]
        });
        assert!(matches!(res, Err(Error::AllRolloutsFailed)));
    }

    #[test]
    fn exponential_weighting_prefers_cheaper_elite() {
        let mut a = candidate(0.0, 0);
        a.plan = SplinePlan::from_knots(vec![vec![0.0], vec![0.0]], 1.0, Interpolation::Linear);
        let mut b = candidate(10.0, 1);
        b.plan = SplinePlan::from_knots(vec![vec![2.0], vec![2.0]], 1.0, Interpolation::Linear);
        let out = update_nominal(&[a, b], Weighting::Exponential { lambda: 1.0 }).unwrap();
        // Weight of b is e^-10 relative to a.
        assert!(out.knots[0][0] < 1e-3);
    }

    proptest! {
        /// Elite costs come back sorted non-decreasing for any input.
        #[test]
        fn elites_sorted(costs in prop::collection::vec(0.0f64..10.0, 1..20), k in 1usize..20) {
            let cands: Vec<PlanCandidate> = costs
                .iter()
                .enumerate()
                .map(|(i, &c)| candidate(c, i))
                .collect();
            let out = select_elites(cands, k).unwrap();
            prop_assert!(out.windows(2).all(|w| w[0].cost <= w[1].cost));
        }
    }
}

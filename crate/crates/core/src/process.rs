//! Load vectors and the dynamic processes that act on them.
//!
//! All three processes pick one uniform edge `(u, v)` per step and inject a
//! weight `w` drawn from a [`WeightDistribution`]:
//!
//! * averaging: `x_u = x_v = (x_u + x_v + w) / 2`;
//! * two-choice: `w` goes to the lesser loaded endpoint, ties by a fair coin;
//! * β-hybrid: a two-choice increment, then with probability β the two
//!   endpoints are replaced by their mean.
//!
//! Random draws per step, in order: edge (one draw), weight (zero for unit
//! weights), tie coin (only on exact ties), averaging coin (only when
//! `0 < β < 1`).

use rand::RngCore;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WeightDistribution {
    /// `W ≡ 1`.
    Unit,
    /// Uniform on `[0, √3]`, so `E[W²] = 1`.
    UniformSecondMomentOne,
    /// Exponential with rate `√2`, so `E[W²] = 2 / rate² = 1`.
    ExponentialSecondMomentOne,
    /// Non-negative law with the given first and second moments: a point mass
    /// when the variance is zero, a Gamma law otherwise.
    Custom { mean: f64, second_moment: f64 },
}

impl WeightDistribution {
    /// `E[W²]` of the law.
    pub fn second_moment(&self) -> f64 {
        match *self {
            WeightDistribution::Unit
            | WeightDistribution::UniformSecondMomentOne
            | WeightDistribution::ExponentialSecondMomentOne => 1.0,
            WeightDistribution::Custom { second_moment, .. } => second_moment,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            WeightDistribution::Unit => 1.0,
            WeightDistribution::UniformSecondMomentOne => 3f64.sqrt() / 2.0,
            WeightDistribution::ExponentialSecondMomentOne => std::f64::consts::FRAC_1_SQRT_2,
            WeightDistribution::Custom { mean, .. } => mean,
        }
    }

    /// Validates the law and returns a sampler for it.
    pub fn sampler(&self) -> Result<WeightSampler> {
        Ok(match *self {
            WeightDistribution::Unit => WeightSampler::Constant(1.0),
            WeightDistribution::UniformSecondMomentOne => WeightSampler::Uniform(3f64.sqrt()),
            WeightDistribution::ExponentialSecondMomentOne => WeightSampler::Exponential(
                Exp::new(std::f64::consts::SQRT_2).expect("positive rate"),
            ),
            WeightDistribution::Custom {
                mean,
                second_moment,
            } => {
                if !(mean.is_finite() && second_moment.is_finite()) {
                    return Err(invalid("custom weight moments must be finite"));
                }
                if mean < 0.0 {
                    return Err(invalid(format!("custom weight mean {mean} is negative")));
                }
                if second_moment > 1.0 {
                    return Err(invalid(format!(
                        "custom weight second moment {second_moment} exceeds 1"
                    )));
                }
                let variance = second_moment - mean * mean;
                if variance < -1e-12 {
                    return Err(invalid(format!(
                        "second moment {second_moment} is below mean² = {}",
                        mean * mean
                    )));
                }
                if variance <= 0.0 || mean == 0.0 {
                    WeightSampler::Constant(mean)
                } else {
                    let shape = mean * mean / variance;
                    let scale = variance / mean;
                    WeightSampler::Gamma(
                        Gamma::new(shape, scale).map_err(|e| invalid(format!("gamma law: {e}")))?,
                    )
                }
            }
        })
    }
}

/// A validated weight law ready for sampling.
#[derive(Debug, Clone, Copy)]
pub enum WeightSampler {
    Constant(f64),
    Uniform(f64),
    Exponential(Exp<f64>),
    Gamma(Gamma<f64>),
}

impl WeightSampler {
    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            WeightSampler::Constant(c) => *c,
            WeightSampler::Uniform(upper) => rng::unit_f64(rng) * upper,
            WeightSampler::Exponential(exp) => exp.sample(rng),
            WeightSampler::Gamma(gamma) => gamma.sample(rng),
        }
    }
}

/// Draws one weight, validating the law first.
pub fn sample_weight<R: RngCore + ?Sized>(dist: &WeightDistribution, rng: &mut R) -> Result<f64> {
    Ok(dist.sampler()?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProcessKind {
    Averaging,
    TwoChoice,
    Hybrid { beta: f64 },
}

impl ProcessKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessKind::Hybrid { beta } if !(0.0..=1.0).contains(&beta) => {
                Err(invalid(format!("beta must lie in [0, 1], got {beta}")))
            }
            _ => Ok(()),
        }
    }
}

/// What a single step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub edge: (usize, usize),
    pub weight: f64,
    /// Whether the endpoints were averaged (always for the averaging process).
    pub averaged: bool,
}

/// Loads `x_i(t)` plus the bookkeeping needed for conservation checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessState {
    loads: Vec<f64>,
    t: u64,
    injected: f64,
    initial_sum: f64,
}

pub fn init_state(topology: &Topology) -> ProcessState {
    ProcessState::new(topology)
}

/// `max(loads) - min(loads)`; zero for an empty slice.
pub fn gap(loads: &[f64]) -> f64 {
    if loads.is_empty() {
        return 0.0;
    }
    let (lo, hi) = loads
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    hi - lo
}

impl ProcessState {
    /// All-zero loads on `topology`.
    pub fn new(topology: &Topology) -> Self {
        Self::from_loads(vec![0.0; topology.n()])
    }

    /// Starts from arbitrary loads; `t` and the injected total start at zero.
    pub fn from_loads(loads: Vec<f64>) -> Self {
        let initial_sum = loads.iter().sum();
        Self {
            loads,
            t: 0,
            injected: 0.0,
            initial_sum,
        }
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn n(&self) -> usize {
        self.loads.len()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn injected(&self) -> f64 {
        self.injected
    }

    pub fn initial_sum(&self) -> f64 {
        self.initial_sum
    }

    pub fn gap(&self) -> f64 {
        gap(&self.loads)
    }

    /// `sum(loads) - initial_sum - injected`, zero in exact arithmetic.
    pub fn conservation_residual(&self) -> f64 {
        self.loads.iter().sum::<f64>() - self.initial_sum - self.injected
    }

    /// Rounding budget for [`Self::conservation_residual`]: `n·(t+1)·ε·scale`.
    pub fn conservation_budget(&self) -> f64 {
        let scale = self
            .loads
            .iter()
            .fold(1.0f64, |m, x| m.max(x.abs()))
            .max(self.injected.abs());
        self.n() as f64 * (self.t + 1) as f64 * f64::EPSILON * scale
    }

    #[inline]
    fn finish_step(&mut self, w: f64) {
        self.t += 1;
        self.injected += w;
    }

    /// Averaging update on a given edge with a given weight.
    #[inline]
    pub fn apply_averaging(&mut self, (u, v): (usize, usize), w: f64) {
        let m = (self.loads[u] + self.loads[v] + w) / 2.0;
        self.loads[u] = m;
        self.loads[v] = m;
        self.finish_step(w);
    }

    /// Two-choice update: `w` lands on the smaller endpoint; on a tie it lands
    /// on `u` when `tie_to_first` is set.
    #[inline]
    pub fn apply_two_choice(&mut self, (u, v): (usize, usize), w: f64, tie_to_first: bool) {
        self.increment_smaller(u, v, w, tie_to_first);
        self.finish_step(w);
    }

    /// Two-choice increment followed, if `average`, by averaging the endpoints.
    #[inline]
    pub fn apply_hybrid(
        &mut self,
        (u, v): (usize, usize),
        w: f64,
        tie_to_first: bool,
        average: bool,
    ) {
        self.increment_smaller(u, v, w, tie_to_first);
        if average {
            let m = (self.loads[u] + self.loads[v]) / 2.0;
            self.loads[u] = m;
            self.loads[v] = m;
        }
        self.finish_step(w);
    }

    #[inline]
    fn increment_smaller(&mut self, u: usize, v: usize, w: f64, tie_to_first: bool) {
        let (xu, xv) = (self.loads[u], self.loads[v]);
        let target = if xu < xv || (xu == xv && tie_to_first) {
            u
        } else {
            v
        };
        self.loads[target] += w;
    }

    #[inline]
    pub fn step_averaging<R: RngCore + ?Sized>(
        &mut self,
        topology: &Topology,
        weights: &WeightSampler,
        rng: &mut R,
    ) -> StepOutcome {
        let edge = topology.sample_edge(rng);
        let weight = weights.sample(rng);
        self.apply_averaging(edge, weight);
        StepOutcome {
            edge,
            weight,
            averaged: true,
        }
    }

    #[inline]
    pub fn step_two_choice<R: RngCore + ?Sized>(
        &mut self,
        topology: &Topology,
        weights: &WeightSampler,
        rng: &mut R,
    ) -> StepOutcome {
        let edge = topology.sample_edge(rng);
        let weight = weights.sample(rng);
        let tie = self.tie_coin(edge, rng);
        self.apply_two_choice(edge, weight, tie);
        StepOutcome {
            edge,
            weight,
            averaged: false,
        }
    }

    pub fn step_hybrid<R: RngCore + ?Sized>(
        &mut self,
        topology: &Topology,
        weights: &WeightSampler,
        rng: &mut R,
        beta: f64,
    ) -> Result<StepOutcome> {
        ProcessKind::Hybrid { beta }.validate()?;
        Ok(self.step_hybrid_unchecked(topology, weights, rng, beta))
    }

    #[inline]
    fn step_hybrid_unchecked<R: RngCore + ?Sized>(
        &mut self,
        topology: &Topology,
        weights: &WeightSampler,
        rng: &mut R,
        beta: f64,
    ) -> StepOutcome {
        let edge = topology.sample_edge(rng);
        let weight = weights.sample(rng);
        let tie = self.tie_coin(edge, rng);
        let averaged = if beta <= 0.0 {
            false
        } else if beta >= 1.0 {
            true
        } else {
            rng::unit_f64(rng) < beta
        };
        self.apply_hybrid(edge, weight, tie, averaged);
        StepOutcome {
            edge,
            weight,
            averaged,
        }
    }

    #[inline]
    fn tie_coin<R: RngCore + ?Sized>(&self, (u, v): (usize, usize), rng: &mut R) -> bool {
        if self.loads[u] == self.loads[v] {
            rng.next_u64() >> 63 == 0
        } else {
            false
        }
    }

    /// One step of `kind`. `kind` must already be validated.
    #[inline]
    pub fn step<R: RngCore + ?Sized>(
        &mut self,
        kind: ProcessKind,
        topology: &Topology,
        weights: &WeightSampler,
        rng: &mut R,
    ) -> StepOutcome {
        match kind {
            ProcessKind::Averaging => self.step_averaging(topology, weights, rng),
            ProcessKind::TwoChoice => self.step_two_choice(topology, weights, rng),
            ProcessKind::Hybrid { beta } => {
                self.step_hybrid_unchecked(topology, weights, rng, beta)
            }
        }
    }
}

/// A process bundled with everything it needs to advance on its own.
#[derive(Debug, Clone)]
pub struct Simulation {
    topology: Topology,
    kind: ProcessKind,
    weights: WeightSampler,
    state: ProcessState,
    rng: rng::SimRng,
}

impl Simulation {
    pub fn new(
        topology: Topology,
        kind: ProcessKind,
        weights: &WeightDistribution,
        rng: rng::SimRng,
    ) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            topology,
            kind,
            weights: weights.sampler()?,
            state: ProcessState::new(&topology),
            rng,
        })
    }

    pub fn with_state(mut self, state: ProcessState) -> Result<Self> {
        if state.n() != self.topology.n() {
            return Err(invalid(format!(
                "state has {} loads but the topology has {} nodes",
                state.n(),
                self.topology.n()
            )));
        }
        self.state = state;
        Ok(self)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn state(&self) -> &ProcessState {
        &self.state
    }

    #[inline]
    pub fn step(&mut self) -> StepOutcome {
        self.state
            .step(self.kind, &self.topology, &self.weights, &mut self.rng)
    }

    pub fn advance(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{cycle_topology, harary_topology};

    fn state(loads: &[f64]) -> ProcessState {
        ProcessState::from_loads(loads.to_vec())
    }

    #[test]
    fn initial_state_is_flat() {
        let t = cycle_topology(8).unwrap();
        let s = init_state(&t);
        assert_eq!(s.loads(), &[0.0; 8]);
        assert_eq!(s.gap(), 0.0);
        assert_eq!(s.t(), 0);
        assert_eq!(s.injected(), 0.0);
    }

    #[test]
    fn averaging_examples() {
        let mut s = state(&[0.0, 0.0, 0.0, 0.0]);
        s.apply_averaging((0, 1), 1.0);
        assert_eq!(s.loads(), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(s.t(), 1);
        assert_eq!(s.injected(), 1.0);

        let mut s = state(&[1.5, -2.0, 4.0, 7.25]);
        s.apply_averaging((2, 3), 0.0);
        assert_eq!(s.loads(), &[1.5, -2.0, 5.625, 5.625]);
        assert_eq!(s.loads().iter().sum::<f64>(), 1.5 - 2.0 + 4.0 + 7.25);

        let mut s = state(&[1.0, 3.0, 5.0, 7.0]);
        s.apply_averaging((1, 2), 2.0);
        assert_eq!(s.loads(), &[1.0, 5.0, 5.0, 7.0]);
    }

    #[test]
    fn two_choice_examples() {
        let mut s = state(&[0.0; 4]);
        s.apply_two_choice((0, 1), 1.0, true);
        assert_eq!(s.loads(), &[1.0, 0.0, 0.0, 0.0]);

        let mut s = state(&[0.0; 4]);
        s.apply_two_choice((0, 1), 1.0, false);
        assert_eq!(s.loads(), &[0.0, 1.0, 0.0, 0.0]);

        let mut s = state(&[2.0, 5.0, 1.0, 1.0]);
        s.apply_two_choice((0, 1), 1.0, false);
        assert_eq!(s.loads()[0], 3.0);
        assert_eq!(s.loads().iter().sum::<f64>(), 10.0);
    }

    #[test]
    fn hybrid_with_full_averaging_matches_averaging() {
        let mut s = state(&[2.0, 4.0, 0.0]);
        s.apply_hybrid((0, 1), 1.0, false, true);
        assert_eq!(&s.loads()[..2], &[3.5, 3.5]);
        assert_eq!(s.loads()[0], (2.0 + 4.0 + 1.0) / 2.0);
    }

    #[test]
    fn hybrid_rejects_bad_beta() {
        let t = cycle_topology(5).unwrap();
        let w = WeightDistribution::Unit.sampler().unwrap();
        let mut s = init_state(&t);
        let mut r = rng::seeded(0);
        assert!(s.step_hybrid(&t, &w, &mut r, -0.1).is_err());
        assert!(s.step_hybrid(&t, &w, &mut r, 1.5).is_err());
        assert!(s.step_hybrid(&t, &w, &mut r, f64::NAN).is_err());
        assert!(s.step_hybrid(&t, &w, &mut r, 0.3).is_ok());
    }

    #[test]
    fn hybrid_beta_zero_is_two_choice() {
        let t = cycle_topology(16).unwrap();
        let w = WeightDistribution::ExponentialSecondMomentOne
            .sampler()
            .unwrap();
        let mut a = init_state(&t);
        let mut b = init_state(&t);
        let mut ra = rng::seeded(3);
        let mut rb = rng::seeded(3);
        for _ in 0..10_000 {
            a.step_two_choice(&t, &w, &mut ra);
            b.step_hybrid(&t, &w, &mut rb, 0.0).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn hybrid_half_averages_half_the_time() {
        let t = cycle_topology(32).unwrap();
        let w = WeightDistribution::Unit.sampler().unwrap();
        let mut s = init_state(&t);
        let mut r = rng::seeded(8);
        let steps = 100_000;
        let averaged = (0..steps)
            .filter(|_| s.step_hybrid(&t, &w, &mut r, 0.5).unwrap().averaged)
            .count();
        let frac = averaged as f64 / steps as f64;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap(&[3.0; 5]), 0.0);
        assert_eq!(gap(&[1.0, 3.0, 5.0, 7.0]), 6.0);
        let shifted: Vec<f64> = [1.0, 3.0, 5.0, 7.0].iter().map(|x| x + 1e6).collect();
        assert_eq!(gap(&shifted), 6.0);
    }

    #[test]
    fn unit_weights_are_one() {
        let mut r = rng::seeded(1);
        for _ in 0..100 {
            assert_eq!(
                sample_weight(&WeightDistribution::Unit, &mut r).unwrap(),
                1.0
            );
        }
    }

    fn empirical_second_moment(dist: WeightDistribution, draws: usize) -> f64 {
        let s = dist.sampler().unwrap();
        let mut r = rng::seeded(2024);
        (0..draws).map(|_| s.sample(&mut r).powi(2)).sum::<f64>() / draws as f64
    }

    #[test]
    fn built_in_laws_have_unit_second_moment() {
        let uni = empirical_second_moment(WeightDistribution::UniformSecondMomentOne, 1_000_000);
        assert!((uni - 1.0).abs() < 0.01, "uniform {uni}");
        let exp =
            empirical_second_moment(WeightDistribution::ExponentialSecondMomentOne, 1_000_000);
        assert!((exp - 1.0).abs() < 0.01, "exponential {exp}");
    }

    #[test]
    fn custom_law_moments() {
        let d = WeightDistribution::Custom {
            mean: 0.5,
            second_moment: 0.5,
        };
        let m2 = empirical_second_moment(d, 1_000_000);
        assert!((m2 - 0.5).abs() < 0.01, "{m2}");
        let point = WeightDistribution::Custom {
            mean: 0.8,
            second_moment: 0.64,
        };
        assert!((empirical_second_moment(point, 10) - 0.64).abs() < 1e-12);
    }

    #[test]
    fn custom_law_is_normalized() {
        let mut r = rng::seeded(0);
        let too_big = WeightDistribution::Custom {
            mean: 1.0,
            second_moment: 1.5,
        };
        assert!(sample_weight(&too_big, &mut r).is_err());
        let impossible = WeightDistribution::Custom {
            mean: 0.9,
            second_moment: 0.5,
        };
        assert!(impossible.sampler().is_err());
        let negative = WeightDistribution::Custom {
            mean: -0.1,
            second_moment: 0.5,
        };
        assert!(negative.sampler().is_err());
    }

    #[test]
    fn steps_conserve_mass_and_touch_two_loads() {
        let w = WeightDistribution::UniformSecondMomentOne
            .sampler()
            .unwrap();
        for topo in [cycle_topology(12).unwrap(), harary_topology(12).unwrap()] {
            for kind in [
                ProcessKind::Averaging,
                ProcessKind::TwoChoice,
                ProcessKind::Hybrid { beta: 0.3 },
            ] {
                let mut s = init_state(&topo);
                let mut r = rng::seeded(99);
                for _ in 0..5_000 {
                    let before = s.loads().to_vec();
                    s.step(kind, &topo, &w, &mut r);
                    let changed = before.iter().zip(s.loads()).filter(|(a, b)| a != b).count();
                    assert!(changed <= 2);
                }
                assert!(s.conservation_residual().abs() <= s.conservation_budget());
                assert_eq!(s.t(), 5_000);
            }
        }
    }

    #[test]
    fn simulation_rejects_mismatched_state() {
        let t = cycle_topology(6).unwrap();
        let sim = Simulation::new(
            t,
            ProcessKind::Averaging,
            &WeightDistribution::Unit,
            rng::seeded(1),
        )
        .unwrap();
        assert!(sim
            .with_state(ProcessState::from_loads(vec![0.0; 5]))
            .is_err());
    }
}

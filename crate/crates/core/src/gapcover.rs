//! Covering sets that bound the global gap by hop potentials.
//!
//! Two families of node sets are supported and never mixed in one chain:
//!
//! * [`Convention::PowerOfTwo`] (`n = 2^m`): `A_k^i = {i, i+2^k, i+2·2^k, …}`,
//!   `n / 2^k` members, `k = 0..=m`. Level `k−1` splits into the level-`k` sets
//!   anchored at `i` and `i + 2^{k−1}`.
//! * [`Convention::General`] (any `n`): `A_k^i` has `2^k` members whose
//!   consecutive distances are the entries of `Δ_k`, `k = 0..=⌊log₂ n⌋`.
//!   Level `k` splits into the level-`k−1` sets anchored at `i` and `i + α_k`.
//!
//! Each inequality of the covering argument is available as a deterministic
//! check on a concrete load vector. They hold for every vector, so a negative
//! residual beyond rounding is a bug.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::potentials::hop_potential_unchecked;
use crate::process::gap;
use crate::rng;

/// Residuals above `-RESIDUAL_TOLERANCE · scale` count as satisfied.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    PowerOfTwo,
    General,
}

impl Convention {
    /// The power-of-two family when `n` allows it, the general one otherwise.
    pub fn natural(n: usize) -> Self {
        if n.is_power_of_two() {
            Convention::PowerOfTwo
        } else {
            Convention::General
        }
    }
}

pub fn floor_log2(n: usize) -> usize {
    debug_assert!(n > 0);
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Split length used to refine level `k−1` into level `k`.
pub fn alpha_k(n: usize, k: usize) -> Result<usize> {
    if n < 2 || k == 0 || k > floor_log2(n) {
        return Err(invalid(format!(
            "alpha_k needs 1 ≤ k ≤ ⌊log₂ n⌋, got n = {n}, k = {k}"
        )));
    }
    let floor = n >> (k - 1);
    let ceil = n.div_ceil(1 << (k - 1));
    Ok(if floor % 2 == 0 { floor / 2 } else { ceil / 2 })
}

/// `Δ_k = (δ_k^1, …, δ_k^{2^k})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaVector {
    pub n: usize,
    pub level: usize,
    pub deltas: Vec<usize>,
    /// The `α_k` that produced this level from the previous one.
    pub alpha: Option<usize>,
}

impl DeltaVector {
    fn root(n: usize) -> Self {
        Self {
            n,
            level: 0,
            deltas: vec![n],
            alpha: None,
        }
    }

    fn refine(&self) -> Result<Self> {
        let level = self.level + 1;
        let alpha = alpha_k(self.n, level)?;
        let deltas = self
            .deltas
            .iter()
            .flat_map(|&d| [alpha, d - alpha])
            .collect();
        Ok(Self {
            n: self.n,
            level,
            deltas,
            alpha: Some(alpha),
        })
    }

    /// Offsets of the set members from the anchor: `0, δ^1, δ^1+δ^2, …`.
    pub fn offsets(&self) -> Vec<usize> {
        self.deltas
            .iter()
            .scan(0usize, |acc, &d| {
                let here = *acc;
                *acc += d;
                Some(here)
            })
            .collect()
    }
}

/// `Δ_0, …, Δ_{⌊log₂ n⌋}`.
pub fn delta_levels(n: usize) -> Result<Vec<DeltaVector>> {
    if n < 2 {
        return Err(invalid(format!("delta vectors need n ≥ 2, got {n}")));
    }
    let top = floor_log2(n);
    let mut levels = Vec::with_capacity(top + 1);
    levels.push(DeltaVector::root(n));
    for _ in 0..top {
        let next = levels.last().expect("non-empty").refine()?;
        levels.push(next);
    }
    Ok(levels)
}

pub fn delta_vector(n: usize, k: usize) -> Result<DeltaVector> {
    if n < 2 || k > floor_log2(n) {
        return Err(invalid(format!(
            "delta_vector needs 0 ≤ k ≤ ⌊log₂ n⌋, got n = {n}, k = {k}"
        )));
    }
    let mut levels = delta_levels(n)?;
    levels.truncate(k + 1);
    Ok(levels.pop().expect("level exists"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSet {
    pub n: usize,
    pub level: usize,
    pub anchor: usize,
    pub convention: Convention,
    /// In cover order starting at the anchor, reduced mod `n`.
    pub members: Vec<usize>,
}

pub fn cover_set(n: usize, convention: Convention, k: usize, i: usize) -> Result<CoverSet> {
    CoverFamily::new(n, convention)?.set(k, i)
}

/// Max minus min over the members of `set`.
pub fn gap_over_set(loads: &[f64], set: &CoverSet) -> Result<f64> {
    if set.members.is_empty() {
        return Err(invalid("gap over an empty set"));
    }
    if let Some(&bad) = set.members.iter().find(|&&m| m >= loads.len()) {
        return Err(invalid(format!("member {bad} outside 0..{}", loads.len())));
    }
    let (lo, hi) = set
        .members
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| {
            (lo.min(loads[m]), hi.max(loads[m]))
        });
    Ok(hi - lo)
}

/// All cover sets of one convention for one ring size, as member offsets.
#[derive(Debug, Clone)]
pub struct CoverFamily {
    n: usize,
    convention: Convention,
    offsets: Vec<Vec<usize>>,
    /// General convention only: `alphas[k] = α_k` (`alphas[0]` unused).
    alphas: Vec<usize>,
}

impl CoverFamily {
    pub fn new(n: usize, convention: Convention) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("cover sets need n ≥ 3, got {n}")));
        }
        match convention {
            Convention::PowerOfTwo => {
                if !n.is_power_of_two() {
                    return Err(invalid(format!(
                        "power-of-two covers need n = 2^m, got {n}"
                    )));
                }
                let m = floor_log2(n);
                let offsets = (0..=m)
                    .map(|k| (0..n >> k).map(|j| j << k).collect())
                    .collect();
                Ok(Self {
                    n,
                    convention,
                    offsets,
                    alphas: Vec::new(),
                })
            }
            Convention::General => {
                let levels = delta_levels(n)?;
                let alphas = levels.iter().map(|d| d.alpha.unwrap_or(0)).collect();
                let offsets = levels.iter().map(DeltaVector::offsets).collect();
                Ok(Self {
                    n,
                    convention,
                    offsets,
                    alphas,
                })
            }
        }
    }

    /// The natural family for `n`.
    pub fn for_n(n: usize) -> Result<Self> {
        Self::new(n, Convention::natural(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Highest level index.
    pub fn top_level(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn offsets(&self, k: usize) -> &[usize] {
        &self.offsets[k]
    }

    /// `α_k` (general convention).
    pub fn alpha(&self, k: usize) -> Option<usize> {
        match self.convention {
            Convention::General if k >= 1 && k < self.alphas.len() => Some(self.alphas[k]),
            _ => None,
        }
    }

    pub fn set(&self, k: usize, i: usize) -> Result<CoverSet> {
        if k > self.top_level() {
            return Err(invalid(format!(
                "level {k} above the top level {} for n = {}",
                self.top_level(),
                self.n
            )));
        }
        Ok(CoverSet {
            n: self.n,
            level: k,
            anchor: i % self.n,
            convention: self.convention,
            members: self.members(k, i).collect(),
        })
    }

    fn members(&self, k: usize, i: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        self.offsets[k].iter().map(move |&o| (i + o) % n)
    }

    /// `Gap_{A_k^i}` without materializing the set.
    pub fn set_gap(&self, loads: &[f64], k: usize, i: usize) -> f64 {
        let (lo, hi) = self
            .members(k, i)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
                (lo.min(loads[m]), hi.max(loads[m]))
            });
        hi - lo
    }

    /// `max_{j ∈ A_k^i} |x_j − x_{j+step}|`.
    fn max_shift_diff(&self, loads: &[f64], k: usize, i: usize, step: usize) -> f64 {
        let n = self.n;
        self.members(k, i)
            .map(|j| (loads[j] - loads[(j + step) % n]).abs())
            .fold(0.0, f64::max)
    }

    /// `(parent level, child level, split step)` for the union inequality at `k`.
    fn split(&self, k: usize) -> Result<(usize, usize, usize)> {
        if k == 0 || k > self.top_level() {
            return Err(invalid(format!(
                "split level must be in 1..={}, got {k}",
                self.top_level()
            )));
        }
        Ok(match self.convention {
            Convention::PowerOfTwo => (k - 1, k, 1 << (k - 1)),
            Convention::General => (k, k - 1, self.alphas[k]),
        })
    }

    /// Valid `k` for [`Self::check_union`].
    pub fn union_levels(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.top_level()
    }

    /// Valid `k` for [`Self::check_sum_of_edges`].
    pub fn edge_sum_levels(&self) -> std::ops::RangeInclusive<usize> {
        match self.convention {
            Convention::PowerOfTwo => 0..=self.top_level() - 1,
            Convention::General => 1..=self.top_level(),
        }
    }

    /// The set-merge inequality
    /// `2·Gap(parent) ≤ 2·max_{j∈parent}|x_j − x_{j+step}| + Gap(child_i) + Gap(child_{i+step})`.
    pub fn check_union(&self, loads: &[f64], k: usize, i: usize) -> Result<LemmaCheck> {
        let (parent, child, step) = self.split(k)?;
        let lhs = 2.0 * self.set_gap(loads, parent, i);
        let rhs = 2.0 * self.max_shift_diff(loads, parent, i, step)
            + self.set_gap(loads, child, i)
            + self.set_gap(loads, child, i + step);
        Ok(LemmaCheck { lhs, rhs })
    }

    /// Edge step and potential prefactor of the edge-sum inequality at level `k`.
    fn edge_sum_terms(&self, k: usize) -> Result<(usize, f64)> {
        if !self.edge_sum_levels().contains(&k) {
            return Err(invalid(format!(
                "edge-sum level must be in {:?}, got {k}",
                self.edge_sum_levels()
            )));
        }
        let n = self.n as f64;
        Ok(match self.convention {
            Convention::PowerOfTwo => {
                let step = 1usize << k;
                (step, n / (step as f64).sqrt())
            }
            Convention::General => {
                let groups = self.n.div_ceil(self.n >> k) as f64;
                let width = (self.n >> k) as f64;
                (self.alphas[k], groups * width.sqrt())
            }
        })
    }

    /// `Σ_i max_{j∈A_k^i}|x_j − x_{j+step}| ≤ factor · √φ_step`.
    pub fn check_sum_of_edges(&self, loads: &[f64], k: usize) -> Result<LemmaCheck> {
        let (step, factor) = self.edge_sum_terms(k)?;
        let lhs = (0..self.n)
            .map(|i| self.max_shift_diff(loads, k, i, step))
            .sum();
        let rhs = factor * hop_potential_unchecked(loads, step).sqrt();
        Ok(LemmaCheck { lhs, rhs })
    }

    /// `Σ_i Gap(A_k^i)` for every level.
    pub fn level_gap_sums(&self, loads: &[f64]) -> Vec<f64> {
        (0..=self.top_level())
            .map(|k| (0..self.n).map(|i| self.set_gap(loads, k, i)).sum())
            .collect()
    }

    /// `n·Gap ≤` the full chain of edge-sum bounds on this state's potentials.
    pub fn chained_bound(&self, loads: &[f64]) -> ChainBound {
        let n = self.n;
        let lhs = n as f64 * gap(loads);
        let phi = |h: usize| hop_potential_unchecked(loads, h).sqrt();
        let rhs = match self.convention {
            Convention::PowerOfTwo => {
                let m = self.top_level();
                let chain: f64 = (1..m)
                    .map(|k| {
                        let step = 1usize << (k - 1);
                        n as f64 / (step as f64).sqrt() * phi(step)
                    })
                    .sum();
                (n as f64).sqrt() * phi(n / 2) + chain
            }
            Convention::General => {
                let chain: f64 = self
                    .edge_sum_levels()
                    .map(|k| {
                        let (step, factor) = self.edge_sum_terms(k).expect("level in range");
                        factor * phi(step)
                    })
                    .sum();
                chain + n as f64 * phi(1)
            }
        };
        ChainBound { lhs, rhs }
    }

    /// The step that closes the chain.
    ///
    /// Power of two: `Σ_i Gap(A_{m−1}^i) ≤ √n·√φ_{n/2}`.
    /// General: `Gap ≤ min_i Gap(A_top^i) + √φ_1`; top-level members are one
    /// or two hops apart, so every node is in the set or between two members.
    pub fn check_closing_step(&self, loads: &[f64]) -> LemmaCheck {
        let n = self.n;
        match self.convention {
            Convention::PowerOfTwo => {
                let k = self.top_level() - 1;
                let lhs = (0..n).map(|i| self.set_gap(loads, k, i)).sum();
                let rhs = (n as f64).sqrt() * hop_potential_unchecked(loads, n / 2).sqrt();
                LemmaCheck { lhs, rhs }
            }
            Convention::General => {
                let top = self.top_level();
                let best = (0..n)
                    .map(|i| self.set_gap(loads, top, i))
                    .fold(f64::INFINITY, f64::min);
                LemmaCheck {
                    lhs: gap(loads),
                    rhs: best + hop_potential_unchecked(loads, 1).sqrt(),
                }
            }
        }
    }

    /// The parent set at a split level equals the disjoint union of its two
    /// children.
    pub fn check_split(&self, k: usize, i: usize) -> Result<bool> {
        let (parent, child, step) = self.split(k)?;
        let mut joined: Vec<usize> = self
            .members(child, i)
            .chain(self.members(child, i + step))
            .collect();
        let total = joined.len();
        joined.sort_unstable();
        joined.dedup();
        let mut whole: Vec<usize> = self.members(parent, i).collect();
        whole.sort_unstable();
        Ok(joined.len() == total && joined == whole)
    }

    /// General convention: every member of `A_{k−1}^i` sits exactly `α_k` away
    /// from some member of `A_{k−1}^{i+α_k}`, and vice versa.
    pub fn check_sibling_pairing(&self, k: usize, i: usize) -> Result<bool> {
        if self.convention != Convention::General {
            return Err(invalid("sibling pairing is a general-convention property"));
        }
        let (_, child, alpha) = self.split(k)?;
        let n = self.n;
        let left: Vec<usize> = self.members(child, i).collect();
        let right: Vec<usize> = self.members(child, i + alpha).collect();
        let paired = |u: usize, other: &[usize]| {
            other
                .iter()
                .any(|&v| (u + alpha) % n == v || (v + alpha) % n == u)
        };
        Ok(left.iter().all(|&u| paired(u, &right)) && right.iter().all(|&u| paired(u, &left)))
    }

    /// General convention: the sets anchored at `u, u+1, …, u+⌊n/2^k⌋−1` are
    /// pairwise disjoint, for every `u`.
    pub fn check_consecutive_disjoint(&self, k: usize) -> Result<bool> {
        if self.convention != Convention::General || k > self.top_level() {
            return Err(invalid(
                "consecutive disjointness needs a general-convention level",
            ));
        }
        let width = self.n >> k;
        let mut seen = vec![usize::MAX; self.n];
        for u in 0..self.n {
            for a in u..u + width {
                for m in self.members(k, a) {
                    if seen[m] == u {
                        return Ok(false);
                    }
                    seen[m] = u;
                }
            }
        }
        Ok(true)
    }
}

/// Both sides of an inequality `lhs ≤ rhs` evaluated on one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl LemmaCheck {
    pub fn residual(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn scale(&self) -> f64 {
        self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }

    /// Residual relative to [`Self::scale`].
    pub fn scaled_residual(&self) -> f64 {
        self.residual() / self.scale()
    }

    pub fn holds(&self) -> bool {
        self.scaled_residual() >= -RESIDUAL_TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl ChainBound {
    pub fn holds(&self) -> bool {
        LemmaCheck {
            lhs: self.lhs,
            rhs: self.rhs,
        }
        .holds()
    }
}

pub fn check_union_lemma(
    loads: &[f64],
    family: &CoverFamily,
    k: usize,
    i: usize,
) -> Result<LemmaCheck> {
    check_len(loads, family)?;
    family.check_union(loads, k, i)
}

pub fn check_sum_of_edges_lemma(
    loads: &[f64],
    family: &CoverFamily,
    k: usize,
) -> Result<LemmaCheck> {
    check_len(loads, family)?;
    family.check_sum_of_edges(loads, k)
}

/// `(n·Gap, chained upper bound)` using the natural convention for `n`.
pub fn chained_gap_bound(loads: &[f64]) -> Result<ChainBound> {
    Ok(CoverFamily::for_n(loads.len())?.chained_bound(loads))
}

fn check_len(loads: &[f64], family: &CoverFamily) -> Result<()> {
    if loads.len() != family.n() {
        return Err(invalid(format!(
            "{} loads for a cover family on {} nodes",
            loads.len(),
            family.n()
        )));
    }
    Ok(())
}

/// Number of distinct load-vector shapes produced by [`test_state`].
pub const STATE_SHAPES: usize = 8;

/// A load vector of the given shape: smooth noise, spikes, ramps, alternating
/// patterns, random walks, heavy ties and large offsets.
pub fn test_state<R: RngCore + ?Sized>(n: usize, shape: usize, rng: &mut R) -> Vec<f64> {
    let mut u = || rng::unit_f64(rng) * 2.0 - 1.0;
    match shape % STATE_SHAPES {
        0 => (0..n).map(|_| u()).collect(),
        1 => {
            let mut x = vec![0.0; n];
            let at = ((u() + 1.0) / 2.0 * n as f64) as usize % n;
            x[at] = 10.0 * u();
            x
        }
        2 => {
            let mut x: Vec<f64> = (0..n).map(|_| 0.01 * u()).collect();
            let a = ((u() + 1.0) / 2.0 * n as f64) as usize % n;
            x[a] += 5.0;
            x[(a + n / 2) % n] -= 5.0;
            x
        }
        3 => {
            let slope = u();
            (0..n).map(|i| slope * i as f64 + 0.1 * u()).collect()
        }
        4 => (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + 0.5 * u()))
            .collect(),
        5 => {
            let mut acc = 0.0;
            (0..n)
                .map(|_| {
                    acc += u();
                    acc
                })
                .collect()
        }
        6 => (0..n).map(|_| (u() * 3.0).round()).collect(),
        _ => (0..n).map(|_| 1e3 + u() * 1e-3).collect(),
    }
}

/// Outcome of running every covering inequality over many states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSweepReport {
    pub n: usize,
    pub convention: Convention,
    pub states: usize,
    pub checks_run: u64,
    /// Smallest residual relative to its scale; `≥ −1e−12` means every check held.
    pub min_residual: f64,
    /// Which inequality produced `min_residual`.
    pub worst_check: String,
    /// SHA-256 prefix of the load vector that produced `min_residual`.
    pub worst_case_state_digest: String,
    pub chain_violations: u64,
    pub passed: bool,
}

type Worst = (f64, String, String);

fn record(check: LemmaCheck, label: &dyn Fn() -> String, loads: &[f64], worst: &mut Worst) {
    let r = check.scaled_residual();
    if r < worst.0 {
        *worst = (r, label(), digest(loads));
    }
}

fn digest(loads: &[f64]) -> String {
    let mut h = Sha256::new();
    for x in loads {
        h.update(x.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Runs the union, edge-sum, closing-step and chained inequalities on
/// `states` generated load vectors.
pub fn verify_cover(
    n: usize,
    convention: Convention,
    states: usize,
    seed: u64,
) -> Result<CoverSweepReport> {
    let family = CoverFamily::new(n, convention)?;
    let mut rng = rng::child_stream(seed, n as u64);
    let mut checks = 0u64;
    let mut chain_violations = 0u64;
    let mut worst: Worst = (f64::INFINITY, String::new(), String::new());

    for s in 0..states {
        let loads = test_state(n, s, &mut rng);
        for k in family.union_levels() {
            for i in 0..n {
                let c = family.check_union(&loads, k, i)?;
                record(c, &|| format!("union k={k} i={i}"), &loads, &mut worst);
                checks += 1;
            }
        }
        for k in family.edge_sum_levels() {
            let c = family.check_sum_of_edges(&loads, k)?;
            record(c, &|| format!("edge-sum k={k}"), &loads, &mut worst);
            checks += 1;
        }
        let c = family.check_closing_step(&loads);
        record(c, &|| "closing-step".to_string(), &loads, &mut worst);
        let chain = family.chained_bound(&loads);
        if !chain.holds() {
            chain_violations += 1;
        }
        record(
            LemmaCheck {
                lhs: chain.lhs,
                rhs: chain.rhs,
            },
            &|| "chain".to_string(),
            &loads,
            &mut worst,
        );
        checks += 2;
    }

    let min_residual = if checks == 0 { 0.0 } else { worst.0 };
    Ok(CoverSweepReport {
        n,
        convention,
        states,
        checks_run: checks,
        min_residual,
        worst_check: worst.1,
        worst_case_state_digest: worst.2,
        chain_violations,
        passed: min_residual >= -RESIDUAL_TOLERANCE && chain_violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_k(6, 1).unwrap(), 3);
        assert_eq!(alpha_k(6, 2).unwrap(), 1);
        assert_eq!(alpha_k(7, 1).unwrap(), 3);
        for m in 2..12 {
            let n = 1usize << m;
            for k in 1..=m {
                assert_eq!(alpha_k(n, k).unwrap(), n >> k);
            }
        }
        assert!(alpha_k(6, 0).is_err());
        assert!(alpha_k(6, 3).is_err());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_vector(6, 1).unwrap().deltas, vec![3, 3]);
        assert_eq!(delta_vector(6, 2).unwrap().deltas, vec![1, 2, 1, 2]);
        assert_eq!(delta_vector(8, 2).unwrap().deltas, vec![2, 2, 2, 2]);
        let d = delta_vector(7, 1).unwrap();
        assert_eq!(d.deltas, vec![3, 4]);
        assert_eq!(d.alpha, Some(3));
        assert_eq!(delta_vector(9, 0).unwrap().deltas, vec![9]);
        assert!(delta_vector(6, 3).is_err());
    }

    #[test]
    fn delta_properties_for_small_rings() {
        for n in 3..=300 {
            for d in delta_levels(n).unwrap() {
                let k = d.level;
                assert_eq!(d.deltas.len(), 1 << k);
                assert_eq!(d.deltas.iter().sum::<usize>(), n);
                let lo = n >> k;
                let hi = n.div_ceil(1 << k);
                assert!(d.deltas.iter().all(|&x| x == lo || x == hi), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn cover_set_examples() {
        let s = cover_set(8, Convention::PowerOfTwo, 2, 1).unwrap();
        assert_eq!(s.members, vec![1, 5]);
        let s = cover_set(6, Convention::General, 2, 0).unwrap();
        assert_eq!(s.members, vec![0, 1, 3, 4]);
        assert!(cover_set(6, Convention::PowerOfTwo, 1, 0).is_err());
        assert!(cover_set(8, Convention::PowerOfTwo, 4, 0).is_err());
    }

    #[test]
    fn general_sets_have_wide_spacing() {
        for n in [6, 7, 12, 19, 100] {
            let f = CoverFamily::new(n, Convention::General).unwrap();
            for k in 0..=f.top_level() {
                for i in 0..n {
                    let s = f.set(k, i).unwrap();
                    assert_eq!(s.members.len(), 1 << k);
                    let mut m = s.members.clone();
                    m.sort_unstable();
                    for w in 0..m.len() {
                        let next = if w + 1 < m.len() { m[w + 1] } else { m[0] + n };
                        assert!(next - m[w] >= n >> k);
                    }
                }
            }
        }
    }

    #[test]
    fn splits_and_pairings() {
        for n in [5, 6, 7, 12, 16, 33] {
            let f = CoverFamily::new(n, Convention::General).unwrap();
            for k in f.union_levels() {
                for i in 0..n {
                    assert!(f.check_split(k, i).unwrap(), "n={n} k={k} i={i}");
                    assert!(f.check_sibling_pairing(k, i).unwrap());
                }
                assert!(f.check_consecutive_disjoint(k).unwrap());
            }
        }
        let f = CoverFamily::new(16, Convention::PowerOfTwo).unwrap();
        for k in f.union_levels() {
            for i in 0..16 {
                assert!(f.check_split(k, i).unwrap());
            }
        }
    }

    #[test]
    fn general_reduces_to_power_of_two() {
        for m in 2..9 {
            let n = 1 << m;
            let g = CoverFamily::new(n, Convention::General).unwrap();
            let p = CoverFamily::new(n, Convention::PowerOfTwo).unwrap();
            for k in 0..=m {
                let mut a = g.offsets(k).to_vec();
                a.sort_unstable();
                assert_eq!(a, p.offsets(m - k));
            }
        }
    }

    #[test]
    fn gap_over_set_examples() {
        let loads = [1.0, 3.0, 5.0, 7.0];
        let single = cover_set(4, Convention::PowerOfTwo, 2, 3).unwrap();
        assert_eq!(single.members, vec![3]);
        assert_eq!(gap_over_set(&loads, &single).unwrap(), 0.0);
        let all = cover_set(4, Convention::PowerOfTwo, 0, 0).unwrap();
        assert_eq!(gap_over_set(&loads, &all).unwrap(), gap(&loads));
        let evens = cover_set(4, Convention::PowerOfTwo, 1, 0).unwrap();
        assert_eq!(gap_over_set(&loads, &evens).unwrap(), 4.0);
        let empty = CoverSet {
            n: 4,
            level: 0,
            anchor: 0,
            convention: Convention::General,
            members: vec![],
        };
        assert!(gap_over_set(&loads, &empty).is_err());
    }

    #[test]
    fn flat_loads_give_zero_on_both_sides() {
        let loads = vec![2.5; 12];
        let f = CoverFamily::for_n(12).unwrap();
        for k in f.union_levels() {
            let c = check_union_lemma(&loads, &f, k, 3).unwrap();
            assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        }
        for k in f.edge_sum_levels() {
            let c = check_sum_of_edges_lemma(&loads, &f, k).unwrap();
            assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        }
        let b = chained_gap_bound(&loads).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
    }

    #[test]
    fn closing_step_counterexample_needs_sqrt_phi() {
        // Max and min both sit outside the top-level set; the one-edge
        // correction alone is too small but √φ_1 suffices.
        let f = CoverFamily::new(7, Convention::General).unwrap();
        let top = f.set(f.top_level(), 0).unwrap();
        assert_eq!(top.members, vec![0, 2, 3, 5]);
        let mut loads = vec![0.0f64; 7];
        loads[1] = 1.0;
        loads[4] = -1.0;
        let max_edge = (0..7)
            .map(|i| (loads[i] - loads[(i + 1) % 7]).abs())
            .fold(0.0, f64::max);
        assert!(gap(&loads) > f.set_gap(&loads, 2, 0) + max_edge);
        assert!(f.check_closing_step(&loads).holds());
    }

    #[test]
    fn sweeps_pass() {
        for n in [6, 8, 12, 16] {
            let r = verify_cover(n, Convention::natural(n), 300, 1).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.checks_run > 0);
        }
        let r = verify_cover(16, Convention::General, 300, 2).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let f = CoverFamily::for_n(8).unwrap();
        assert!(check_union_lemma(&[0.0; 7], &f, 1, 0).is_err());
        assert!(check_sum_of_edges_lemma(&[0.0; 9], &f, 0).is_err());
        assert!(f.check_sum_of_edges(&[0.0; 8], 3).is_err());
        assert!(f.check_union(&[0.0; 8], 0, 0).is_err());
    }
}

//! Hop potentials and their exact one-step expectations.
//!
//! `φ_k = Σ_i (x_i − x_{i+k})²` over all `n` cyclic pairs, for `k = 1..n−1`.
//! Averaging over a uniformly chosen edge turns the vector `Φ` into an affine
//! image `M·Φ + E[W²]·c`, with `M` and `c` depending only on `n` and on the
//! hop lengths of the edge classes (1 for the cycle, 1 and 2 for Harary2).
//!
//! For a class of edges `(a, a+s)` chosen uniformly over `a`, row `k` is
//!
//! ```text
//! k ∉ {s, n−s}:  (n−2)/n·φ_k + (φ_{k−s} + φ_{k+s})/n − φ_s/n + w²
//! k = s:         (n−2)/n·φ_k + ½(w² − φ_s/n) + φ_{2s}/n
//! k = n−s:       (n−2)/n·φ_k + ½(w² − φ_s/n) + φ_{k−s}/n
//! ```
//!
//! Terms linear in `w` cancel exactly after summing over all anchors `a`, so
//! no normalization of the loads is needed. Hops outside `1..n−1` are
//! reflected (`φ_{−h} = φ_h`, `φ_{n+h} = φ_{n−h}`). The brute-force
//! [`brute_force_expected_map`] enumerates every edge and is the oracle these
//! rows are tested against.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::process::ProcessState;
use crate::topology::{Topology, TopologyKind};

/// `φ_k` for a single hop distance.
pub fn hop_potential(loads: &[f64], k: usize) -> Result<f64> {
    let n = loads.len();
    if k == 0 || k >= n {
        return Err(invalid(format!(
            "hop {k} outside 1..{}",
            n.saturating_sub(1)
        )));
    }
    Ok(hop_potential_unchecked(loads, k))
}

#[inline]
pub(crate) fn hop_potential_unchecked(loads: &[f64], k: usize) -> f64 {
    let n = loads.len();
    let (head, tail) = loads.split_at(n - k);
    // pairs (i, i+k) for i < n−k, then the wrapped pairs (i, i+k−n)
    let inner: f64 = head
        .iter()
        .zip(&loads[k..])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let wrapped: f64 = tail
        .iter()
        .zip(&loads[..k])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    inner + wrapped
}

/// The vector `(φ_1, …, φ_{n−1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialVector {
    n: usize,
    values: Vec<f64>,
}

impl PotentialVector {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 || values.len() != n - 1 {
            return Err(invalid(format!(
                "potential vector for n = {n} needs {} entries, got {}",
                n.saturating_sub(1),
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `φ_k`, `1 ≤ k ≤ n−1`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Largest `|φ_k − φ_{n−k}|`.
    pub fn asymmetry(&self) -> f64 {
        (1..self.n)
            .map(|k| (self.get(k) - self.get(self.n - k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn all_hop_potentials(loads: &[f64]) -> PotentialVector {
    let n = loads.len();
    let values = (1..n).map(|k| hop_potential_unchecked(loads, k)).collect();
    PotentialVector { n, values }
}

impl ProcessState {
    pub fn hop_potential(&self, k: usize) -> Result<f64> {
        hop_potential(self.loads(), k)
    }

    pub fn hop_potentials(&self) -> PotentialVector {
        all_hop_potentials(self.loads())
    }
}

/// The affine map `Φ ↦ M·Φ + E[W²]·c` giving `E[Φ(t+1) | X(t)]`.
#[derive(Debug, Clone)]
pub struct ExpectedMap {
    kind: TopologyKind,
    n: usize,
    matrix: DMatrix<f64>,
    drive: DVector<f64>,
}

impl ExpectedMap {
    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(TopologyKind::Cycle, n)
    }

    pub fn harary(n: usize) -> Result<Self> {
        Self::new(TopologyKind::Harary2, n)
    }

    pub fn for_topology(topology: &Topology) -> Self {
        Self::new(topology.kind(), topology.n()).expect("topology is already validated")
    }

    pub fn new(kind: TopologyKind, n: usize) -> Result<Self> {
        if n < kind.min_nodes() {
            return Err(invalid(format!(
                "{kind:?} expected map needs n ≥ {}, got {n}",
                kind.min_nodes()
            )));
        }
        let dim = n - 1;
        let mut matrix = DMatrix::zeros(dim, dim);
        let mut drive = DVector::zeros(dim);
        let classes = kind.hop_classes();
        let share = 1.0 / classes.len() as f64;
        let nf = n as f64;
        let ni = n as isize;

        let mut add = |row: usize, hop: isize, coef: f64| {
            let h = reflect_hop(hop, ni);
            matrix[(row - 1, h - 1)] += coef;
        };

        for &s in classes {
            let si = s as isize;
            for k in 1..n {
                let ki = k as isize;
                add(k, ki, share * (nf - 2.0) / nf);
                if k == s || k == n - s {
                    drive[k - 1] += share * 0.5;
                    add(k, si, -share * 0.5 / nf);
                    let other = if k == s { 2 * si } else { ki - si };
                    add(k, other, share / nf);
                } else {
                    drive[k - 1] += share;
                    add(k, si, -share / nf);
                    add(k, ki - si, share / nf);
                    add(k, ki + si, share / nf);
                }
            }
        }

        Ok(Self {
            kind,
            n,
            matrix,
            drive,
        })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The linear part `M`, indexed `[(k−1, j−1)]`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The constant part per unit `E[W²]`.
    pub fn drive(&self) -> &DVector<f64> {
        &self.drive
    }

    /// Coefficient of `φ_j` in row `k`.
    pub fn coefficient(&self, k: usize, j: usize) -> f64 {
        self.matrix[(k - 1, j - 1)]
    }

    pub fn apply(&self, phi: &PotentialVector, ew2: f64) -> Result<PotentialVector> {
        self.check_len(phi.values.len())?;
        let x = DVector::from_column_slice(&phi.values);
        let y = &self.matrix * x + &self.drive * ew2;
        Ok(PotentialVector {
            n: self.n,
            values: y.as_slice().to_vec(),
        })
    }

    /// `M·z`, the map without its constant part (used for `Z = Y − Φ`).
    pub fn apply_linear(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z.len())?;
        let y = &self.matrix * DVector::from_column_slice(z);
        Ok(y.as_slice().to_vec())
    }

    /// Solves `(I − M)·Φ = E[W²]·c`.
    pub fn fixed_point(&self, ew2: f64) -> Result<PotentialVector> {
        let dim = self.n - 1;
        let system = DMatrix::identity(dim, dim) - &self.matrix;
        let rhs = &self.drive * ew2;
        let solution = system
            .lu()
            .solve(&rhs)
            .ok_or_else(|| invalid("expected map has no unique fixed point"))?;
        Ok(PotentialVector {
            n: self.n,
            values: solution.as_slice().to_vec(),
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n - 1 {
            return Err(invalid(format!(
                "expected {} potentials for n = {}, got {len}",
                self.n - 1,
                self.n
            )));
        }
        Ok(())
    }
}

fn reflect_hop(hop: isize, n: isize) -> usize {
    let h = if hop < 0 {
        -hop
    } else if hop > n {
        2 * n - hop
    } else {
        hop
    };
    debug_assert!(h > 0 && h < n, "hop {hop} reflects to {h} for n = {n}");
    h as usize
}

/// One application of the cycle map.
pub fn expected_map_cycle(phi: &PotentialVector, ew2: f64) -> Result<PotentialVector> {
    ExpectedMap::cycle(phi.n())?.apply(phi, ew2)
}

/// One application of the Harary2 map.
pub fn expected_map_harary(phi: &PotentialVector, ew2: f64) -> Result<PotentialVector> {
    ExpectedMap::harary(phi.n())?.apply(phi, ew2)
}

/// `y_k = (k(n−k) − 1)·E[W²]`, the stationary upper bounds on `E[φ_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundVector {
    pub n: usize,
    pub ew2: f64,
    pub y: Vec<f64>,
}

impl BoundVector {
    pub fn get(&self, k: usize) -> f64 {
        self.y[k - 1]
    }

    pub fn to_potentials(&self) -> PotentialVector {
        PotentialVector {
            n: self.n,
            values: self.y.clone(),
        }
    }
}

pub fn stationary_bounds(n: usize, ew2: f64) -> Result<BoundVector> {
    if n < 3 {
        return Err(invalid(format!("stationary bounds need n ≥ 3, got {n}")));
    }
    if ew2.is_nan() || ew2 < 0.0 {
        return Err(invalid(format!("E[W²] must be non-negative, got {ew2}")));
    }
    let y = (1..n).map(|k| ((k * (n - k)) as f64 - 1.0) * ew2).collect();
    Ok(BoundVector { n, ew2, y })
}

/// Harary2 stationary bound `(2/5)k(n−k) + 2n`, scaled by `E[W²]`.
pub fn harary_bound(n: usize, k: usize, ew2: f64) -> f64 {
    (0.4 * (k * (n - k)) as f64 + 2.0 * n as f64) * ew2
}

/// Exact `E[Φ(t+1) | X(t), w(t) = w]` by enumerating every edge.
pub fn brute_force_expected_map(loads: &[f64], topology: &Topology, w: f64) -> PotentialVector {
    let n = topology.n();
    assert_eq!(loads.len(), n, "load vector does not match the topology");
    let mut acc = vec![0.0; n - 1];
    let mut scratch = loads.to_vec();
    for (u, v) in topology.edges() {
        scratch.copy_from_slice(loads);
        let m = (loads[u] + loads[v] + w) / 2.0;
        scratch[u] = m;
        scratch[v] = m;
        for (k, slot) in (1..n).zip(acc.iter_mut()) {
            // direct sum, independent of hop_potential's split loop
            let mut phi = 0.0;
            for i in 0..n {
                let d = scratch[i] - scratch[(i + k) % n];
                phi += d * d;
            }
            *slot += phi;
        }
    }
    let edges = topology.edge_count() as f64;
    PotentialVector {
        n,
        values: acc.into_iter().map(|s| s / edges).collect(),
    }
}

/// One step of the folded Z-system on `(z_1, …, z_{⌊n/2⌋})`:
///
/// ```text
/// n·z_1' = (n − 5/2)·z_1 + z_2
/// n·z_i' = −z_1 + z_{i−1} + (n − 2)·z_i + z_{i+1}      2 ≤ i ≤ ⌊n/2⌋
/// ```
///
/// with `z_j = z_{n−j}` supplying the entries past `⌊n/2⌋`.
pub fn z_step(z: &[f64], n: usize) -> Vec<f64> {
    let half = n / 2;
    debug_assert_eq!(z.len(), half);
    let at = |j: usize| if j <= half { z[j - 1] } else { z[n - j - 1] };
    let nf = n as f64;
    (1..=half)
        .map(|i| {
            if i == 1 {
                ((nf - 2.5) * at(1) + at(2)) / nf
            } else {
                (-at(1) + at(i - 1) + (nf - 2.0) * at(i) + at(i + 1)) / nf
            }
        })
        .collect()
}

/// Outcome of iterating the Z-system from `Z(0) = Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZChainReport {
    pub n: usize,
    pub ew2: f64,
    pub iterations: usize,
    /// `0 ≤ z_1 ≤ … ≤ z_{⌊n/2⌋}` at every iterate.
    pub chain_ok: bool,
    /// `z_{⌊n/2⌋}(t+1) ≤ z_{⌊n/2⌋}(t) − z_1(t)/n` at every iterate.
    pub decay_ok: bool,
    /// `z_i(t+1) ≥ z_{i+1}(t)/n` for `i < ⌊n/2⌋` at every iterate.
    pub lower_link_ok: bool,
    /// Largest amount by which any checked inequality failed; 0 when none did.
    pub max_violation: f64,
    pub z_half_initial: f64,
    pub z_half_final: f64,
    /// `z_{⌊n/2⌋}` at the last iterate over `y_{⌊n/2⌋}`.
    pub final_ratio: f64,
    pub trace_stride: usize,
    pub z_half_trace: Vec<f64>,
}

impl ZChainReport {
    pub fn passed(&self) -> bool {
        self.chain_ok && self.decay_ok && self.lower_link_ok
    }
}

/// Iterates the folded Z-system and checks the monotone chain, the decay of
/// `z_{⌊n/2⌋}` and the lower links at every iterate.
pub fn z_chain_certify(n: usize, ew2: f64, iterations: usize) -> Result<ZChainReport> {
    if n < 4 {
        return Err(invalid(format!(
            "z-chain certification needs n ≥ 4, got {n}"
        )));
    }
    let bounds = stationary_bounds(n, ew2)?;
    let half = n / 2;
    let nf = n as f64;
    let mut z: Vec<f64> = bounds.y[..half].to_vec();
    let scale = z[half - 1].abs();
    let tol = 1e-12 * scale;

    let trace_stride = iterations.div_ceil(10_000).max(1);
    let mut trace = vec![z[half - 1]];
    let mut worst = f64::NEG_INFINITY;
    let (mut chain_ok, mut decay_ok, mut lower_ok) = (true, true, true);

    let chain_violation = |z: &[f64]| {
        let mut v = -z[0];
        for w in z.windows(2) {
            v = v.max(w[0] - w[1]);
        }
        v
    };

    for it in 0..iterations {
        let v = chain_violation(&z);
        worst = worst.max(v);
        chain_ok &= v <= tol;

        let next = z_step(&z, n);

        let decay = next[half - 1] - (z[half - 1] - z[0] / nf);
        worst = worst.max(decay);
        decay_ok &= decay <= tol;

        for i in 0..half - 1 {
            let gap = z[i + 1] / nf - next[i];
            worst = worst.max(gap);
            lower_ok &= gap <= tol;
        }

        z = next;
        if (it + 1) % trace_stride == 0 || it + 1 == iterations {
            trace.push(z[half - 1]);
        }
    }
    let v = chain_violation(&z);
    worst = worst.max(v);
    chain_ok &= v <= tol;

    let y_half = bounds.get(half);
    Ok(ZChainReport {
        n,
        ew2,
        iterations,
        chain_ok,
        decay_ok,
        lower_link_ok: lower_ok,
        max_violation: worst.max(0.0),
        z_half_initial: y_half,
        z_half_final: z[half - 1],
        final_ratio: if y_half == 0.0 {
            0.0
        } else {
            z[half - 1] / y_half
        },
        trace_stride,
        z_half_trace: trace,
    })
}

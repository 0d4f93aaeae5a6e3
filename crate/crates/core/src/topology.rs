//! Ring topologies and uniform edge sampling.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    /// Edges `(i, i+1 mod n)`.
    Cycle,
    /// Cycle edges plus the 2-hop chords `(i, i+2 mod n)`.
    Harary2,
}

impl TopologyKind {
    /// Hop lengths of the edge classes, in enumeration order.
    pub fn hop_classes(self) -> &'static [usize] {
        match self {
            TopologyKind::Cycle => &[1],
            TopologyKind::Harary2 => &[1, 2],
        }
    }

    pub fn min_nodes(self) -> usize {
        match self {
            TopologyKind::Cycle => 3,
            TopologyKind::Harary2 => 5,
        }
    }
}

/// An immutable ring graph on nodes `0..n`.
///
/// Edges are enumerated class by class: edge `e` with `e = c·n + i` joins
/// `i` and `i + s_c (mod n)` where `s_c` is the hop length of class `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    n: usize,
    kind: TopologyKind,
}

pub fn cycle_topology(n: usize) -> Result<Topology> {
    Topology::new(TopologyKind::Cycle, n)
}

pub fn harary_topology(n: usize) -> Result<Topology> {
    Topology::new(TopologyKind::Harary2, n)
}

impl Topology {
    pub fn new(kind: TopologyKind, n: usize) -> Result<Self> {
        if n < kind.min_nodes() {
            return Err(invalid(format!(
                "{kind:?} topology needs at least {} nodes, got {n}",
                kind.min_nodes()
            )));
        }
        Ok(Self { n, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.kind.hop_classes().len()
    }

    /// The `index`-th edge of the fixed enumeration.
    #[inline]
    pub fn edge(&self, index: usize) -> (usize, usize) {
        debug_assert!(index < self.edge_count());
        let class = index / self.n;
        let u = index % self.n;
        let hop = self.kind.hop_classes()[class];
        (u, (u + hop) % self.n)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.edge_count()).map(move |e| self.edge(e))
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges()
            .filter(|&(u, v)| u == node || v == node)
            .count()
    }

    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        self.edges()
            .filter_map(|(u, v)| {
                if u == node {
                    Some(v)
                } else if v == node {
                    Some(u)
                } else {
                    None
                }
            })
            .collect()
    }

    /// One uniform edge from a single 64-bit draw.
    #[inline]
    pub fn sample_edge<R: RngCore + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let index = rng::below(rng, self.edge_count() as u64) as usize;
        self.edge(index)
    }
}

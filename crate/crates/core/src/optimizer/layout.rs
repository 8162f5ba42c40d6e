//! Flattening of genotypes into search vectors.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::reservoir::MscrGenotype;
use crate::topology::BitMatrix;

/// Binarization of a continuous coordinate: positive ↦ 1, everything else
/// (including 0 and NaN) ↦ 0.
#[inline]
pub fn binarize(v: f64) -> bool {
    v > 0.0
}

/// Off-diagonal `(from, to)` pairs of a k×k matrix in row-major order.
pub fn off_diagonal(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |from| (0..k).filter(move |&to| to != from).map(move |to| (from, to)))
}

/// Layout of the full search vector of length `2k²`:
/// `s` (k) ‖ off-diagonal `H` (k²−k) ‖ `d` (k) ‖ off-diagonal `A` (k²−k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenotypeLayout {
    k: usize,
}

impl GenotypeLayout {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "order must be at least 1");
        GenotypeLayout { k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        2 * self.k * self.k
    }

    pub fn s_range(&self) -> Range<usize> {
        0..self.k
    }

    pub fn h_range(&self) -> Range<usize> {
        let s = self.s_range().end;
        s..s + self.k * self.k - self.k
    }

    pub fn d_range(&self) -> Range<usize> {
        let s = self.h_range().end;
        s..s + self.k
    }

    pub fn a_range(&self) -> Range<usize> {
        let s = self.d_range().end;
        s..s + self.k * self.k - self.k
    }

    pub fn decode(&self, x: &[f64]) -> MscrGenotype {
        assert_eq!(x.len(), self.dim(), "position length");
        let k = self.k;
        let mut g = MscrGenotype::new(k);
        g.s.copy_from_slice(&x[self.s_range()]);
        for ((from, to), &v) in off_diagonal(k).zip(&x[self.h_range()]) {
            g.set_h(from, to, v);
        }
        for (d, &v) in g.d.iter_mut().zip(&x[self.d_range()]) {
            *d = binarize(v);
        }
        for ((from, to), &v) in off_diagonal(k).zip(&x[self.a_range()]) {
            g.a.set(from, to, binarize(v));
        }
        g
    }

    /// Inverse of [`decode`](Self::decode) on its image; bits become ±1.
    pub fn encode(&self, g: &MscrGenotype) -> Vec<f64> {
        assert_eq!(g.k, self.k, "genotype order");
        let k = self.k;
        let bit = |b: bool| if b { 1.0 } else { -1.0 };
        let mut x = Vec::with_capacity(self.dim());
        x.extend_from_slice(&g.s);
        x.extend(off_diagonal(k).map(|(f, t)| g.h(f, t)));
        x.extend(g.d.iter().map(|&b| bit(b)));
        x.extend(off_diagonal(k).map(|(f, t)| bit(g.a.get(f, t))));
        x
    }
}

/// What a search vector controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SearchLayout {
    /// Every field of the genotype.
    Full(GenotypeLayout),
    /// `s` ‖ off-diagonal `H` (k² coordinates); `d` and `A` are frozen.
    Scalings { d: Vec<bool>, a: BitMatrix },
}

impl SearchLayout {
    pub fn full(k: usize) -> Self {
        SearchLayout::Full(GenotypeLayout::new(k))
    }

    pub fn scalings(d: Vec<bool>, a: BitMatrix) -> Self {
        assert_eq!(d.len(), a.k(), "d and A disagree on the order");
        SearchLayout::Scalings { d, a }
    }

    pub fn k(&self) -> usize {
        match self {
            SearchLayout::Full(l) => l.k(),
            SearchLayout::Scalings { d, .. } => d.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SearchLayout::Full(l) => l.dim(),
            SearchLayout::Scalings { d, .. } => d.len() * d.len(),
        }
    }

    pub fn decode(&self, x: &[f64]) -> MscrGenotype {
        match self {
            SearchLayout::Full(l) => l.decode(x),
            SearchLayout::Scalings { d, a } => {
                assert_eq!(x.len(), self.dim(), "position length");
                let k = d.len();
                let mut g = MscrGenotype::new(k);
                g.s.copy_from_slice(&x[..k]);
                for ((from, to), &v) in off_diagonal(k).zip(&x[k..]) {
                    g.set_h(from, to, v);
                }
                g.d = d.clone();
                g.a = a.clone();
                g.a.clear_diagonal();
                g
            }
        }
    }

    pub fn encode(&self, g: &MscrGenotype) -> Vec<f64> {
        match self {
            SearchLayout::Full(l) => l.encode(g),
            SearchLayout::Scalings { .. } => {
                let mut x = g.s.clone();
                x.extend(off_diagonal(g.k).map(|(f, t)| g.h(f, t)));
                x
            }
        }
    }
}

//! Flat real layouts of the observed state and the actor output, and the
//! UAV-index permutations that act on them.
//!
//! Complex blocks are stored as all real parts followed by all imaginary
//! parts. Inside each part, matrices are column-major, so UAV `m`'s channel
//! (or beam) occupies one contiguous run of `N` values.

use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("not a permutation of 0..{len}: {perm:?}")]
    InvalidPermutation { perm: Vec<usize>, len: usize },
    #[error("vector length {got} does not match layout length {want}")]
    Length { got: usize, want: usize },
}

/// Bijection on UAV indices: slot `i` of the result takes old index `map[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, LayoutError> {
        let mut seen = vec![false; map.len()];
        for &i in &map {
            if i >= map.len() || std::mem::replace(&mut seen[i], true) {
                return Err(LayoutError::InvalidPermutation { len: map.len(), perm: map });
            }
        }
        Ok(Self(map))
    }

    pub fn identity(m: usize) -> Self {
        Self((0..m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }

    /// Reorders a per-UAV list.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.0.iter().map(|&j| items[j].clone()).collect()
    }

    /// Every permutation of `0..m` in lexicographic order; the identity comes first.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..m).collect();
        loop {
            out.push(Self(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot successor");
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }

    /// Permutes `m` contiguous blocks of `width` values starting at `base`.
    fn permute_blocks(&self, v: &mut [f64], base: usize, width: usize) {
        let src: Vec<f64> = v[base..base + width * self.0.len()].to_vec();
        for (i, &j) in self.0.iter().enumerate() {
            v[base + i * width..base + (i + 1) * width].copy_from_slice(&src[j * width..(j + 1) * width]);
        }
    }
}

/// `[Re Hc, Im Hc, Re Hs, Im Hs, (x, y) per UAV]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateLayout {
    pub antennas: usize,
    pub uavs: usize,
}

impl StateLayout {
    pub fn new(antennas: usize, uavs: usize) -> Self {
        Self { antennas, uavs }
    }

    fn nm(&self) -> usize {
        self.antennas * self.uavs
    }

    fn nn(&self) -> usize {
        self.antennas * self.antennas
    }

    pub fn dim(&self) -> usize {
        2 * self.nm() + 2 * self.nn() + 2 * self.uavs
    }

    pub fn hc_re(&self) -> Range<usize> {
        0..self.nm()
    }

    pub fn hc_im(&self) -> Range<usize> {
        self.nm()..2 * self.nm()
    }

    pub fn hs_re(&self) -> Range<usize> {
        let s = 2 * self.nm();
        s..s + self.nn()
    }

    pub fn hs_im(&self) -> Range<usize> {
        let s = 2 * self.nm() + self.nn();
        s..s + self.nn()
    }

    pub fn positions(&self) -> Range<usize> {
        let s = 2 * self.nm() + 2 * self.nn();
        s..s + 2 * self.uavs
    }

    /// Relabels UAVs in a state vector. Sensing blocks carry no UAV index and stay put.
    pub fn permute(&self, v: &[f64], perm: &Permutation) -> Result<Vec<f64>, LayoutError> {
        self.check(v, perm)?;
        let mut out = v.to_vec();
        perm.permute_blocks(&mut out, self.hc_re().start, self.antennas);
        perm.permute_blocks(&mut out, self.hc_im().start, self.antennas);
        perm.permute_blocks(&mut out, self.positions().start, 2);
        Ok(out)
    }

    fn check(&self, v: &[f64], perm: &Permutation) -> Result<(), LayoutError> {
        if v.len() != self.dim() {
            return Err(LayoutError::Length { got: v.len(), want: self.dim() });
        }
        if perm.len() != self.uavs {
            return Err(LayoutError::InvalidPermutation { perm: perm.0.clone(), len: self.uavs });
        }
        Ok(())
    }
}

/// Actor output: `[Re Wc, Im Wc, Re Ws, Im Ws, heading per UAV]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionLayout {
    pub antennas: usize,
    pub uavs: usize,
}

impl ActionLayout {
    pub fn new(antennas: usize, uavs: usize) -> Self {
        Self { antennas, uavs }
    }

    fn nm(&self) -> usize {
        self.antennas * self.uavs
    }

    fn nn(&self) -> usize {
        self.antennas * self.antennas
    }

    pub fn dim(&self) -> usize {
        2 * self.nm() + 2 * self.nn() + self.uavs
    }

    /// Communication beam head, `2NM` values.
    pub fn comm(&self) -> Range<usize> {
        0..2 * self.nm()
    }

    /// Sensing beam head, `2N²` values.
    pub fn sensing(&self) -> Range<usize> {
        let s = 2 * self.nm();
        s..s + 2 * self.nn()
    }

    /// Movement head, `M` angles.
    pub fn moves(&self) -> Range<usize> {
        let s = 2 * self.nm() + 2 * self.nn();
        s..s + self.uavs
    }

    pub fn permute(&self, v: &[f64], perm: &Permutation) -> Result<Vec<f64>, LayoutError> {
        if v.len() != self.dim() {
            return Err(LayoutError::Length { got: v.len(), want: self.dim() });
        }
        if perm.len() != self.uavs {
            return Err(LayoutError::InvalidPermutation { perm: perm.0.clone(), len: self.uavs });
        }
        let mut out = v.to_vec();
        perm.permute_blocks(&mut out, 0, self.antennas);
        perm.permute_blocks(&mut out, self.nm(), self.antennas);
        perm.permute_blocks(&mut out, self.moves().start, 1);
        Ok(out)
    }
}

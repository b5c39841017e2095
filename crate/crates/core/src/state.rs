//! State types and their flat-vector layouts.
//!
//! Micro states are laid out as `[S, E, I, R, S1, E1, I1, R1, ..., Sn, En, In, Rn]`:
//! the macroscopic totals first, then one block of four per reinfection index.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// One (S, E, I, R) quadruple: either population totals or a single reinfection block.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Compartments {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
}

/// Macroscopic state (S, E, I, R); N is derived.
pub type MacroState = Compartments;

impl Compartments {
    pub const fn new(s: f64, e: f64, i: f64, r: f64) -> Self {
        Compartments { s, e, i, r }
    }

    /// Total population N = S + E + I + R.
    pub fn total(&self) -> f64 {
        self.s + self.e + self.i + self.r
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.e, self.i, self.r]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Compartments { s: x[0], e: x[1], i: x[2], r: x[3] }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|&v| v >= 0.0)
    }
}

impl Add for Compartments {
    type Output = Compartments;

    fn add(self, o: Compartments) -> Compartments {
        Compartments::new(self.s + o.s, self.e + o.e, self.i + o.i, self.r + o.r)
    }
}

impl Mul<f64> for Compartments {
    type Output = Compartments;

    fn mul(self, k: f64) -> Compartments {
        Compartments::new(self.s * k, self.e * k, self.i * k, self.r * k)
    }
}

/// Truncated microscopic state: blocks for reinfection indices 1..=n, carried together
/// with the macroscopic totals that drive them.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    pub totals: MacroState,
    pub blocks: Vec<Compartments>,
}

impl MicroState {
    pub fn new(totals: MacroState, blocks: Vec<Compartments>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Domain("truncation depth must be >= 1".into()));
        }
        Ok(MicroState { totals, blocks })
    }

    /// All mass placed in the first block, with totals equal to that block.
    pub fn primo(block1: Compartments, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("truncation depth must be >= 1".into()));
        }
        let mut blocks = vec![Compartments::default(); n];
        blocks[0] = block1;
        Ok(MicroState { totals: block1, blocks })
    }

    /// Truncation depth n.
    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    /// Component-wise sum of the n stored blocks.
    pub fn block_sum(&self) -> Compartments {
        self.blocks.iter().fold(Compartments::default(), |acc, &b| acc + b)
    }

    /// Mass carried by the totals but absent from the stored blocks, per compartment.
    pub fn tail(&self) -> Compartments {
        let sum = self.block_sum();
        Compartments::new(
            self.totals.s - sum.s,
            self.totals.e - sum.e,
            self.totals.i - sum.i,
            self.totals.r - sum.r,
        )
    }

    pub fn flat_len(n: usize) -> usize {
        4 * (n + 1)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::flat_len(self.depth()));
        v.extend_from_slice(&self.totals.to_array());
        for b in &self.blocks {
            v.extend_from_slice(&b.to_array());
        }
        v
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.len() < 8 || x.len() % 4 != 0 {
            return Err(Error::Domain(format!(
                "flat micro state length {} is not 4*(n+1) with n >= 1",
                x.len()
            )));
        }
        let totals = Compartments::from_slice(&x[..4]);
        let blocks = x[4..].chunks_exact(4).map(Compartments::from_slice).collect();
        Ok(MicroState { totals, blocks })
    }
}

/// State of the SIS subsystem with a unit population: totals (S, I) and primo-infection
/// compartments (S1, I1).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SisState {
    pub s: f64,
    pub i: f64,
    pub s1: f64,
    pub i1: f64,
}

impl SisState {
    pub const fn new(s: f64, i: f64, s1: f64, i1: f64) -> Self {
        SisState { s, i, s1, i1 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.i, self.s1, self.i1]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        SisState { s: x[0], i: x[1], s1: x[2], i1: x[3] }
    }
}

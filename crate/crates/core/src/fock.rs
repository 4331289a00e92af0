//! Truncated two-mode Fock basis.
//!
//! States |n_A, n_B> are kept when n_A + n_B <= n_total_max and ordered by
//! ascending total photon number, then ascending n_A within a sector. Because
//! the model Hamiltonian commutes with the total number operator, this
//! ordering makes every operator of interest block-structured: each total-N
//! sector is a contiguous run of N + 1 states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A two-mode occupation-number state |n_A, n_B>.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockState {
    pub n_a: u32,
    pub n_b: u32,
}

impl FockState {
    pub fn new(n_a: u32, n_b: u32) -> Self {
        FockState { n_a, n_b }
    }

    /// Total photon number n_A + n_B.
    pub fn total(&self) -> u32 {
        self.n_a + self.n_b
    }
}

/// A contiguous run of basis states sharing one total photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorView {
    /// Total photon number N of every state in the sector.
    pub n_total: u32,
    /// Index of the sector's first state in the full basis ordering.
    pub offset: usize,
    /// Number of states in the sector (always N + 1).
    pub dim: usize,
}

/// The truncated basis {|n_A, n_B> : n_A + n_B <= n_total_max}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_total_max: u32,
    states: Vec<FockState>,
}

impl FockBasis {
    /// Build the basis in canonical order (ascending N, then ascending n_A).
    pub fn new(n_total_max: u32) -> Self {
        let mut states = Vec::with_capacity(Self::dimension_for(n_total_max));
        for n_total in 0..=n_total_max {
            for n_a in 0..=n_total {
                states.push(FockState::new(n_a, n_total - n_a));
            }
        }
        FockBasis {
            n_total_max,
            states,
        }
    }

    /// Basis dimension for a given cutoff: (M + 1)(M + 2) / 2.
    pub fn dimension_for(n_total_max: u32) -> usize {
        let m = n_total_max as usize;
        (m + 1) * (m + 2) / 2
    }

    pub fn n_total_max(&self) -> u32 {
        self.n_total_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn contains(&self, state: FockState) -> bool {
        state.total() <= self.n_total_max
    }

    /// Position of a state in the canonical ordering, if it is inside the
    /// truncation. The ordering is triangular, so the index has a closed
    /// form: N(N + 1)/2 + n_A.
    pub fn index_of(&self, state: FockState) -> Option<usize> {
        if !self.contains(state) {
            return None;
        }
        let n = state.total() as usize;
        Some(n * (n + 1) / 2 + state.n_a as usize)
    }

    /// Like [`index_of`](Self::index_of) but returns a typed error, for
    /// callers that must report which state fell outside the basis.
    pub fn require_index(&self, state: FockState) -> Result<usize> {
        self.index_of(state).ok_or(Error::StateOutsideBasis {
            n_a: state.n_a,
            n_b: state.n_b,
            max: self.n_total_max,
        })
    }

    /// State at a given position (panics if out of bounds, like slice
    /// indexing).
    pub fn state_at(&self, index: usize) -> FockState {
        self.states[index]
    }

    /// View of the total-photon-number-N sector.
    pub fn sector(&self, n_total: u32) -> Result<SectorView> {
        if n_total > self.n_total_max {
            return Err(Error::SectorOutOfRange {
                n: n_total,
                max: self.n_total_max,
            });
        }
        let n = n_total as usize;
        Ok(SectorView {
            n_total,
            offset: n * (n + 1) / 2,
            dim: n + 1,
        })
    }

    /// All sectors in ascending N order; together they partition the basis.
    pub fn sectors(&self) -> impl Iterator<Item = SectorView> + '_ {
        (0..=self.n_total_max).map(|n| self.sector(n).expect("sector within cutoff"))
    }

    /// True when the state is far enough from the truncation edge that
    /// operator products of total ladder-order `margin` are exact on it.
    /// Commutator identities hold only on these interior states.
    pub fn is_interior(&self, state: FockState, margin: u32) -> bool {
        self.contains(state) && state.total() + margin <= self.n_total_max
    }
}

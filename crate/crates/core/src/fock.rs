//! Composite many-body basis: a bosonic-symmetrized pair of species-A atoms
//! tensored with one species-B atom, truncated by total quanta.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_quanta(q: usize) -> Self {
        if q.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Symmetrized two-boson state |S(n1, n2)⟩ with n1 ≤ n2.
///
/// For n1 ≠ n2 the state is (|n1 n2⟩ + |n2 n1⟩)/√2; for n1 = n2 it is the
/// bare product |n1 n1⟩. `norm()` is the coefficient each ordered product
/// term carries in that expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairState {
    pub n1: usize,
    pub n2: usize,
}

impl PairState {
    pub fn new(n1: usize, n2: usize) -> Self {
        debug_assert!(n1 <= n2);
        Self { n1, n2 }
    }

    /// Coefficient of each ordered product term: 1/√2 if n1 ≠ n2 else 1.
    pub fn norm(&self) -> f64 {
        if self.n1 == self.n2 {
            1.0
        } else {
            1.0 / std::f64::consts::SQRT_2
        }
    }

    /// The prefactor N_ab = 1/√(2(1+δ_ab)) used in matrix-element rules that
    /// run over all 2×2 ordered expansions.
    pub fn symm_factor(&self) -> f64 {
        if self.n1 == self.n2 {
            0.5
        } else {
            std::f64::consts::FRAC_1_SQRT_2
        }
    }

    pub fn quanta(&self) -> usize {
        self.n1 + self.n2
    }
}

/// One composite basis state: A pair ⊗ B orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompositeState {
    pub pair: PairState,
    /// HO index of the B atom.
    pub m: usize,
}

impl CompositeState {
    pub fn new(n1: usize, n2: usize, m: usize) -> Self {
        Self { pair: PairState::new(n1, n2), m }
    }

    pub fn quanta(&self) -> usize {
        self.pair.quanta() + self.m
    }

    pub fn parity(&self) -> Parity {
        Parity::of_quanta(self.quanta())
    }
}

/// The full enumerated basis with deterministic ordering and parity blocks.
#[derive(Debug, Clone)]
pub struct ManyBodyBasis {
    states: Vec<CompositeState>,
    index: HashMap<CompositeState, usize>,
    pub cutoff: usize,
    pub n_max: usize,
    even: Vec<usize>,
    odd: Vec<usize>,
}

impl ManyBodyBasis {
    /// All composite states with n1 ≤ n2, n1 + n2 + m ≤ `cutoff`, and every
    /// single index ≤ `n_max`. Ordering is lexicographic in
    /// (quanta, n1, n2, m).
    pub fn enumerate(n_max: usize, cutoff: usize) -> Result<Self> {
        if cutoff > 3 * n_max {
            return Err(Error::InvalidParameter(format!(
                "cutoff {cutoff} unreachable with n_max = {n_max}"
            )));
        }
        let mut states = Vec::new();
        for q in 0..=cutoff {
            for n1 in 0..=q.min(n_max) {
                for n2 in n1..=(q - n1).min(n_max) {
                    let m = q - n1 - n2;
                    if m <= n_max {
                        states.push(CompositeState::new(n1, n2, m));
                    }
                }
            }
        }
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let (mut even, mut odd) = (Vec::new(), Vec::new());
        for (i, s) in states.iter().enumerate() {
            match s.parity() {
                Parity::Even => even.push(i),
                Parity::Odd => odd.push(i),
            }
        }
        Ok(Self { states, index, cutoff, n_max, even, odd })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[CompositeState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> CompositeState {
        self.states[i]
    }

    pub fn position(&self, s: &CompositeState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Global indices belonging to one parity block, in basis order.
    pub fn block(&self, parity: Parity) -> &[usize] {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    pub fn block_dim(&self, parity: Parity) -> usize {
        self.block(parity).len()
    }

    /// Debug manifest: one line per state.
    pub fn manifest(&self) -> String {
        let mut out = String::from("# index n1 n2 m quanta parity\n");
        for (i, s) in self.states.iter().enumerate() {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                i,
                s.pair.n1,
                s.pair.n2,
                s.m,
                s.quanta(),
                s.parity().label()
            )
            .unwrap();
        }
        out
    }
}

//! Local-level-2 moment matrices for two parties with two binary observables
//! each.
//!
//! Rows and columns are indexed by the 25 products `u ⊗ v` with
//! `u ∈ {1, A0, A1, A0A1, A1A0}` and `v ∈ {1, B0, B1, B0B1, B1B0}`. Entry
//! `(k, l)` holds the moment of `u_k† u_l ⊗ v_k† v_l`. Observables square to
//! the identity, operators of different parties commute, and a word is
//! identified with its adjoint because the moment matrices are taken real.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::bell::outcome_sign;
use crate::error::{Error, Result};
use crate::quantum::QuantumModel;

/// Side length of a moment matrix.
pub const DIM: usize = 25;

/// Local words indexing the rows, per party.
pub const LOCAL_WORDS: [&[u8]; 5] = [&[], &[0], &[1], &[0, 1], &[1, 0]];

/// Removes adjacent repeated letters (`X² = 1`).
pub fn reduce_word(word: &[u8]) -> Vec<u8> {
    let mut out: Vec<u8> = Vec::with_capacity(word.len());
    for &l in word {
        if out.last() == Some(&l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Product of operators, one word per party.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
}

impl Monomial {
    pub fn new(alice: &[u8], bob: &[u8]) -> Self {
        Monomial {
            alice: alice.to_vec(),
            bob: bob.to_vec(),
        }
    }

    pub fn identity() -> Self {
        Monomial::new(&[], &[])
    }

    pub fn adjoint(&self) -> Self {
        Monomial {
            alice: self.alice.iter().rev().copied().collect(),
            bob: self.bob.iter().rev().copied().collect(),
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.alice.windows(2).all(|w| w[0] != w[1]) && self.bob.windows(2).all(|w| w[0] != w[1])
    }

    fn key(&self) -> (usize, &[u8], usize, &[u8]) {
        (self.alice.len(), &self.alice, self.bob.len(), &self.bob)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alice.is_empty() && self.bob.is_empty() {
            return f.write_str("1");
        }
        for l in &self.alice {
            write!(f, "A{l}")?;
        }
        for l in &self.bob {
            write!(f, "B{l}")?;
        }
        Ok(())
    }
}

/// Reduces a monomial and picks the smaller of it and its adjoint.
///
/// The flag is `true` when the adjoint was taken.
pub fn canonicalize(m: &Monomial) -> (Monomial, bool) {
    let r = Monomial {
        alice: reduce_word(&m.alice),
        bob: reduce_word(&m.bob),
    };
    let adj = r.adjoint();
    if adj < r {
        (adj, true)
    } else {
        (r, false)
    }
}

/// `(u_k ⊗ v_k)† (u_l ⊗ v_l)` before reduction.
pub fn raw_product(k: usize, l: usize) -> Monomial {
    let (uk, vk) = (LOCAL_WORDS[k / 5], LOCAL_WORDS[k % 5]);
    let (ul, vl) = (LOCAL_WORDS[l / 5], LOCAL_WORDS[l % 5]);
    let mut alice: Vec<u8> = uk.iter().rev().copied().collect();
    alice.extend_from_slice(ul);
    let mut bob: Vec<u8> = vk.iter().rev().copied().collect();
    bob.extend_from_slice(vl);
    Monomial { alice, bob }
}

/// Observable quantities of a two-party binary behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Identity,
    AliceMean(usize),
    BobMean(usize),
    Correlator(usize, usize),
}

impl Quantity {
    /// The nine quantities: `1, ⟨A0⟩, ⟨A1⟩, ⟨B0⟩, ⟨B1⟩, ⟨A0B0⟩, ⟨A0B1⟩, ⟨A1B0⟩, ⟨A1B1⟩`.
    pub const ALL: [Quantity; 9] = [
        Quantity::Identity,
        Quantity::AliceMean(0),
        Quantity::AliceMean(1),
        Quantity::BobMean(0),
        Quantity::BobMean(1),
        Quantity::Correlator(0, 0),
        Quantity::Correlator(0, 1),
        Quantity::Correlator(1, 0),
        Quantity::Correlator(1, 1),
    ];

    pub fn monomial(&self) -> Monomial {
        match *self {
            Quantity::Identity => Monomial::identity(),
            Quantity::AliceMean(x) => Monomial::new(&[x as u8], &[]),
            Quantity::BobMean(y) => Monomial::new(&[], &[y as u8]),
            Quantity::Correlator(x, y) => Monomial::new(&[x as u8], &[y as u8]),
        }
    }

    /// Value of the quantity on a behavior.
    pub fn value(&self, b: &crate::bell::Behavior) -> f64 {
        match *self {
            Quantity::Identity => 1.0,
            Quantity::AliceMean(x) => b.alice_mean(x),
            Quantity::BobMean(y) => b.bob_mean(y),
            Quantity::Correlator(x, y) => b.correlator(x, y),
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .iter()
            .copied()
            .find(|q| q.monomial().to_string() == s)
            .ok_or_else(|| Error::UnknownQuantity(s.to_string()))
    }
}

/// Sparse linear functional over canonical monomial ids.
pub type SparseRow = Vec<(usize, f64)>;

/// Applies a sparse row to a moment vector.
pub fn apply_row(row: &SparseRow, moments: &[f64]) -> f64 {
    row.iter().map(|&(m, c)| c * moments[m]).sum()
}

/// Index set, canonical monomials and their position patterns.
#[derive(Debug, Clone)]
pub struct MomentStructure {
    index: Vec<Monomial>,
    monomials: Vec<Monomial>,
    labels: Vec<usize>,
    positions: Vec<Vec<(usize, usize)>>,
    quantities: [usize; 9],
}

impl MomentStructure {
    pub fn build() -> Self {
        let index: Vec<Monomial> = (0..DIM)
            .map(|k| Monomial::new(LOCAL_WORDS[k / 5], LOCAL_WORDS[k % 5]))
            .collect();
        let mut raw_labels = Vec::with_capacity(DIM * DIM);
        let mut set = BTreeMap::new();
        for k in 0..DIM {
            for l in 0..DIM {
                let (m, _) = canonicalize(&raw_product(k, l));
                set.insert(m.clone(), ());
                raw_labels.push(m);
            }
        }
        let monomials: Vec<Monomial> = set.into_keys().collect();
        let id: BTreeMap<&Monomial, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let labels: Vec<usize> = raw_labels.iter().map(|m| id[m]).collect();
        let mut positions = vec![Vec::new(); monomials.len()];
        for k in 0..DIM {
            for l in k..DIM {
                positions[labels[k * DIM + l]].push((k, l));
            }
        }
        let quantities = Quantity::ALL.map(|q| id[&canonicalize(&q.monomial()).0]);
        MomentStructure {
            index,
            monomials,
            labels,
            positions,
            quantities,
        }
    }

    pub fn index_list(&self) -> &[Monomial] {
        &self.index
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn num_monomials(&self) -> usize {
        self.monomials.len()
    }

    /// Canonical monomial id at matrix position `(k, l)`.
    pub fn label(&self, k: usize, l: usize) -> usize {
        self.labels[k * DIM + l]
    }

    /// Upper-triangle positions `(k, l)`, `k ≤ l`, holding monomial `m`.
    pub fn positions(&self, m: usize) -> &[(usize, usize)] {
        &self.positions[m]
    }

    /// Symmetric 0/1 matrix marking the entries equal to monomial `m`.
    pub fn basis_matrix(&self, m: usize) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(DIM, DIM);
        for &(k, l) in &self.positions[m] {
            e[(k, l)] = 1.0;
            e[(l, k)] = 1.0;
        }
        e
    }

    pub fn quantity_monomial(&self, q: Quantity) -> usize {
        let pos = Quantity::ALL
            .iter()
            .position(|p| *p == q)
            .expect("quantity in ALL");
        self.quantities[pos]
    }

    /// Row extracting a physical quantity from a moment vector.
    pub fn behavior_constraint_row(&self, q: Quantity) -> Result<SparseRow> {
        match q {
            Quantity::AliceMean(s) | Quantity::BobMean(s) if s > 1 => {
                Err(Error::UnknownQuantity(format!("{q:?}")))
            }
            Quantity::Correlator(x, y) if x > 1 || y > 1 => {
                Err(Error::UnknownQuantity(format!("{q:?}")))
            }
            _ => Ok(vec![(self.quantity_monomial(q), 1.0)]),
        }
    }

    /// Row for `P(ab|xy) = (1 + a⟨A_x⟩ + b⟨B_y⟩ + ab⟨A_xB_y⟩)/4` with
    /// `a, b` read as signs.
    pub fn probability_row(&self, a: usize, b: usize, x: usize, y: usize) -> SparseRow {
        let (sa, sb) = (outcome_sign(a), outcome_sign(b));
        vec![
            (self.quantity_monomial(Quantity::Identity), 0.25),
            (self.quantity_monomial(Quantity::AliceMean(x)), 0.25 * sa),
            (self.quantity_monomial(Quantity::BobMean(y)), 0.25 * sb),
            (
                self.quantity_monomial(Quantity::Correlator(x, y)),
                0.25 * sa * sb,
            ),
        ]
    }

    /// Moment vector of a quantum model, one entry per canonical monomial.
    pub fn moments_from_model(&self, m: &QuantumModel) -> Vec<f64> {
        self.monomials
            .iter()
            .map(|w| m.moment(&w.alice, &w.bob))
            .collect()
    }

    /// `Γ = Σ_m moments[m] E_m`.
    pub fn gamma(&self, moments: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(DIM, DIM, |k, l| moments[self.label(k, l)])
    }

    /// Reads each monomial from its first position in `Γ`.
    pub fn read_moments(&self, gamma: &DMatrix<f64>) -> Vec<f64> {
        self.positions.iter().map(|p| gamma[p[0]]).collect()
    }
}

//! Block-diagonal linear matrix inequality problems.
//!
//! A [`BlockProblem`] reads
//!
//! ```text
//! maximize    cᵀy
//! subject to  M_b(y) = Σ_v y_v F_{b,v} − F_{b,0} ⪰ 0   for every block b
//!             a_kᵀy = b_k                              for every equality k
//! ```
//!
//! and is solved by a primal-dual interior-point method ([`solve`]). The
//! Lagrange dual is
//!
//! ```text
//! minimize    Σ_k λ_k b_k − Σ_b F_{b,0}•X_b
//! subject to  Σ_b F_{b,v}•X_b = (Aᵀλ)_v − c_v,   X_b ⪰ 0
//! ```
//!
//! so every dual-feasible `(λ, X)` gives an upper bound on the maximum.

mod ipm;
pub mod sdpa;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use ipm::{solve, solve_with, SolverOptions};

/// Entry of a symmetric matrix stored by its upper triangle (`row ≤ col`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl SymEntry {
    pub fn new(row: usize, col: usize, value: f64) -> Self {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        SymEntry { row, col, value }
    }
}

/// One diagonal block `M(y) = Σ_v y_v F_v − F_0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LmiBlock {
    pub size: usize,
    /// `F_0`.
    pub constant: Vec<SymEntry>,
    /// `(v, F_v)` with distinct `v`, sorted by variable.
    pub terms: Vec<(usize, Vec<SymEntry>)>,
}

impl LmiBlock {
    pub fn new(size: usize) -> Self {
        LmiBlock {
            size,
            ..Default::default()
        }
    }

    /// Adds `value` to `F_v[row, col]` (and its mirror).
    pub fn add(&mut self, var: usize, row: usize, col: usize, value: f64) {
        let e = SymEntry::new(row, col, value);
        match self.terms.binary_search_by_key(&var, |t| t.0) {
            Ok(k) => push_merged(&mut self.terms[k].1, e),
            Err(k) => self.terms.insert(k, (var, vec![e])),
        }
    }

    /// Adds `value` to `F_0[row, col]` (and its mirror).
    pub fn add_constant(&mut self, row: usize, col: usize, value: f64) {
        push_merged(&mut self.constant, SymEntry::new(row, col, value));
    }

    /// Evaluates `M(y)` densely.
    pub fn evaluate(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (v, f) in &self.terms {
            accumulate(&mut m, f, y[*v]);
        }
        accumulate(&mut m, &self.constant, -1.0);
        m
    }

    /// `F_v • X` for every term, in term order.
    pub fn adjoint(&self, x: &DMatrix<f64>) -> Vec<f64> {
        self.terms.iter().map(|(_, f)| inner(f, x)).collect()
    }
}

fn push_merged(list: &mut Vec<SymEntry>, e: SymEntry) {
    if let Some(old) = list.iter_mut().find(|o| o.row == e.row && o.col == e.col) {
        old.value += e.value;
    } else {
        list.push(e);
    }
}

/// `m += s F` for a symmetric sparse `F`.
pub(crate) fn accumulate(m: &mut DMatrix<f64>, f: &[SymEntry], s: f64) {
    for e in f {
        m[(e.row, e.col)] += s * e.value;
        if e.row != e.col {
            m[(e.col, e.row)] += s * e.value;
        }
    }
}

/// `F • X` for a symmetric sparse `F`.
pub(crate) fn inner(f: &[SymEntry], x: &DMatrix<f64>) -> f64 {
    f.iter()
        .map(|e| {
            if e.row == e.col {
                e.value * x[(e.row, e.col)]
            } else {
                e.value * (x[(e.row, e.col)] + x[(e.col, e.row)])
            }
        })
        .sum()
}

/// Sparse linear equality `Σ entries = rhs`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EqualityRow {
    pub entries: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl EqualityRow {
    pub fn dot(&self, y: &[f64]) -> f64 {
        self.entries.iter().map(|&(v, a)| a * y[v]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockProblem {
    pub num_vars: usize,
    /// Dense objective `c`, maximized.
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub equalities: Vec<EqualityRow>,
}

impl BlockProblem {
    pub fn new(num_vars: usize) -> Self {
        BlockProblem {
            num_vars,
            objective: vec![0.0; num_vars],
            ..Default::default()
        }
    }

    /// Checks dimensions, symmetry storage, finiteness, and that every
    /// variable enters at least one block.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        if self.objective.len() != self.num_vars {
            return bad(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.num_vars
            ));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return bad("non-finite objective coefficient".into());
        }
        let mut used = vec![false; self.num_vars];
        for (k, b) in self.blocks.iter().enumerate() {
            if b.size == 0 {
                return bad(format!("block {k} has size 0"));
            }
            let check = |f: &[SymEntry]| {
                f.iter()
                    .all(|e| e.row <= e.col && e.col < b.size && e.value.is_finite())
            };
            if !check(&b.constant) {
                return bad(format!(
                    "block {k}: constant term has an entry out of range or below the diagonal"
                ));
            }
            for w in b.terms.windows(2) {
                if w[0].0 >= w[1].0 {
                    return bad(format!(
                        "block {k}: terms must have distinct sorted variables"
                    ));
                }
            }
            for (v, f) in &b.terms {
                if *v >= self.num_vars {
                    return bad(format!("block {k}: variable {v} out of range"));
                }
                if !check(f) {
                    return bad(format!(
                        "block {k}: term for variable {v} has an invalid entry"
                    ));
                }
                if f.iter().any(|e| e.value != 0.0) {
                    used[*v] = true;
                }
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return bad(format!("variable {v} does not enter any block"));
        }
        for (k, r) in self.equalities.iter().enumerate() {
            if !r.rhs.is_finite()
                || r.entries
                    .iter()
                    .any(|&(v, a)| v >= self.num_vars || !a.is_finite())
            {
                return bad(format!("equality {k} is malformed"));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().zip(y).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    NumericalTrouble,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalTrouble => "numerical_trouble",
        }
    }

    /// Optimal or near optimal.
    pub fn converged(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// `cᵀy` at the returned iterate.
    pub primal_objective: f64,
    /// `Σ λ_k b_k − Σ F_0•X`, an upper bound when the dual iterate is feasible.
    pub dual_objective: f64,
    /// `dual_objective − primal_objective`.
    pub gap: f64,
    pub relative_gap: f64,
    /// Max of the LMI-slack and equality residuals.
    pub primal_infeasibility: f64,
    /// Residual of the dual equality constraints.
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub variables: Vec<f64>,
    /// `λ`, one per equality row (zero for rows dropped as redundant).
    pub multipliers: Vec<f64>,
    /// `X_b`, one per block.
    pub dual_matrices: Vec<DMatrix<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_builder_merges_and_sorts() {
        let mut b = LmiBlock::new(2);
        b.add(3, 1, 0, 1.0);
        b.add(1, 0, 0, 2.0);
        b.add(3, 0, 1, 0.5);
        assert_eq!(b.terms.len(), 2);
        assert_eq!(b.terms[0].0, 1);
        assert_eq!(b.terms[1].1, vec![SymEntry::new(0, 1, 1.5)]);
        let m = b.evaluate(&[0.0, 1.0, 0.0, 2.0]);
        assert_eq!(m[(0, 1)], 3.0);
        assert_eq!(m[(1, 0)], 3.0);
        assert_eq!(m[(0, 0)], 2.0);
    }

    #[test]
    fn validation_catches_unused_variables() {
        let mut p = BlockProblem::new(2);
        let mut b = LmiBlock::new(1);
        b.add(0, 0, 0, 1.0);
        p.blocks.push(b);
        assert!(p.validate().is_err());
        p.blocks[0].add(1, 0, 0, 1.0);
        assert!(p.validate().is_ok());
        p.objective.pop();
        assert!(p.validate().is_err());
    }
}

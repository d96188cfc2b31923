//! Guessing-probability programs and their dual certificates.
//!
//! The adversary holds a decomposition of the observed behavior into
//! quantum behaviors, refined so that each component carries one
//! deterministic guess `(a, b)` per setting pair in the support of `p(x,y)`.
//! Each refined component becomes one moment-matrix block holding
//! subnormalized moments; the block weight is its identity moment. The
//! program maximizes `Σ_e Σ_xy p(xy) P_e(g_e(xy)|xy)` subject to the blocks
//! summing to the observed data (all nine moments, or only the
//! normalization and the CHSH value).

use nalgebra::DMatrix;

use crate::bell::{chsh_expression, Behavior, BellExpression, SettingsDistribution};
use crate::error::{Error, Result};
use crate::moments::{MomentStructure, Quantity, SparseRow, DIM, LOCAL_WORDS};
use crate::sdp::{self, BlockProblem, EqualityRow, LmiBlock, SolveReport, SolveStatus};

/// Solver tolerance used for certification.
pub const SOLVER_TOL: f64 = 1e-8;
/// Gap above which a solve is reported as not accurate enough.
pub const ACCURACY_GAP: f64 = 1e-6;
/// Smallest eigenvalue accepted when verifying a certificate.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Settings pairs whose rates differ by less than this count as tied.
pub const TIE_TOL: f64 = 1e-7;

/// Which data certify the randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Fixed settings, constrained only by the observed CHSH value.
    ChshOnly,
    /// Fixed settings, constrained by the full behavior.
    FixedFull,
    /// All settings used uniformly, constrained by the full behavior.
    AllFull,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::ChshOnly, Mode::FixedFull, Mode::AllFull];

    pub fn case_id(&self) -> u8 {
        match self {
            Mode::ChshOnly => 1,
            Mode::FixedFull => 2,
            Mode::AllFull => 3,
        }
    }

    pub fn from_case_id(id: u8) -> Option<Mode> {
        match id {
            1 => Some(Mode::ChshOnly),
            2 => Some(Mode::FixedFull),
            3 => Some(Mode::AllFull),
            _ => None,
        }
    }

    pub fn fixed_settings(&self) -> bool {
        !matches!(self, Mode::AllFull)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramSpec {
    mode: Mode,
    distribution: SettingsDistribution,
    observed: Behavior,
    fixed_settings: Option<(usize, usize)>,
}

impl ProgramSpec {
    /// Point mass at `fixed_settings` for cases 1 and 2, uniform for case 3.
    pub fn new(
        mode: Mode,
        observed: Behavior,
        fixed_settings: Option<(usize, usize)>,
    ) -> Result<Self> {
        let distribution = match (mode, fixed_settings) {
            (Mode::AllFull, _) => SettingsDistribution::uniform(),
            (_, Some((x, y))) if x < 2 && y < 2 => SettingsDistribution::point_mass(x, y),
            (_, Some((x, y))) => {
                return Err(Error::InvalidProblem(format!(
                    "settings ({x}, {y}) out of range"
                )))
            }
            (_, None) => return Err(Error::MissingFixedSettings),
        };
        if let crate::bell::ValidationReport::Violations(v) = observed.validate() {
            return Err(Error::InvalidBehavior(
                v.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            ));
        }
        Ok(ProgramSpec {
            mode,
            distribution,
            observed,
            fixed_settings: if mode == Mode::AllFull {
                None
            } else {
                fixed_settings
            },
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn distribution(&self) -> &SettingsDistribution {
        &self.distribution
    }

    pub fn observed(&self) -> &Behavior {
        &self.observed
    }

    pub fn fixed_settings(&self) -> Option<(usize, usize)> {
        self.fixed_settings
    }
}

/// Deterministic guess `(a, b)` for each setting pair in the support.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GuessingStrategy {
    pub guess: Vec<((usize, usize), (usize, usize))>,
}

/// All guessing strategies over the support of the settings distribution,
/// lexicographic with the first support pair most significant.
pub fn enumerate_strategies(spec: &ProgramSpec) -> Vec<GuessingStrategy> {
    let support = spec.distribution.support();
    let k = support.len() as u32;
    (0..4usize.pow(k))
        .map(|t| GuessingStrategy {
            guess: support
                .iter()
                .enumerate()
                .map(|(i, &xy)| {
                    let o = (t / 4usize.pow(k - 1 - i as u32)) % 4;
                    (xy, (o / 2, o % 2))
                })
                .collect(),
        })
        .collect()
}

/// What an equality row of the assembled problem pins down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Normalization,
    Quantity(Quantity),
    Chsh,
}

/// Assembled program together with the bookkeeping needed to read it back.
#[derive(Debug, Clone)]
pub struct GuessingProgram {
    pub spec: ProgramSpec,
    pub structure: MomentStructure,
    pub strategies: Vec<GuessingStrategy>,
    pub constraints: Vec<Constraint>,
    pub problem: BlockProblem,
}

impl GuessingProgram {
    pub fn num_blocks(&self) -> usize {
        self.strategies.len()
    }

    /// Variable holding monomial `m` of block `e`.
    pub fn var(&self, e: usize, m: usize) -> usize {
        e * self.structure.num_monomials() + m
    }

    /// Objective restricted to block `e`, over monomials.
    pub fn block_objective(&self, e: usize) -> Vec<f64> {
        strategy_objective(
            &self.structure,
            &self.spec.distribution,
            &self.strategies[e],
        )
    }
}

fn strategy_objective(
    s: &MomentStructure,
    dist: &SettingsDistribution,
    g: &GuessingStrategy,
) -> Vec<f64> {
    let mut c = vec![0.0; s.num_monomials()];
    for &((x, y), (a, b)) in &g.guess {
        let w = dist.weight(x, y);
        for (m, v) in s.probability_row(a, b, x, y) {
            c[m] += w * v;
        }
    }
    c
}

fn chsh_row(s: &MomentStructure) -> SparseRow {
    let mut row: SparseRow = (0..2)
        .flat_map(|x| (0..2).map(move |y| (x, y)))
        .map(|(x, y)| {
            let sign = if x == 1 && y == 1 { -1.0 } else { 1.0 };
            (s.quantity_monomial(Quantity::Correlator(x, y)), sign)
        })
        .collect();
    row.sort_by_key(|e| e.0);
    row
}

/// Builds the block problem for a spec.
pub fn assemble(spec: &ProgramSpec) -> Result<GuessingProgram> {
    if spec.mode.fixed_settings() && spec.fixed_settings.is_none() {
        return Err(Error::MissingFixedSettings);
    }
    let structure = MomentStructure::build();
    let strategies = enumerate_strategies(spec);
    let nm = structure.num_monomials();
    let mut problem = BlockProblem::new(strategies.len() * nm);

    for (e, g) in strategies.iter().enumerate() {
        let mut block = LmiBlock::new(DIM);
        for m in 0..nm {
            for &(k, l) in structure.positions(m) {
                block.add(e * nm + m, k, l, 1.0);
            }
        }
        problem.blocks.push(block);
        for (m, c) in strategy_objective(&structure, &spec.distribution, g)
            .into_iter()
            .enumerate()
        {
            problem.objective[e * nm + m] = c;
        }
    }

    let mut constraints = vec![Constraint::Normalization];
    let mut rows: Vec<(SparseRow, f64)> = vec![(
        vec![(structure.quantity_monomial(Quantity::Identity), 1.0)],
        1.0,
    )];
    match spec.mode {
        Mode::ChshOnly => {
            constraints.push(Constraint::Chsh);
            rows.push((
                chsh_row(&structure),
                chsh_expression().evaluate(&spec.observed)?,
            ));
        }
        Mode::FixedFull | Mode::AllFull => {
            for q in &Quantity::ALL[1..] {
                constraints.push(Constraint::Quantity(*q));
                rows.push((
                    structure.behavior_constraint_row(*q)?,
                    q.value(&spec.observed),
                ));
            }
        }
    }
    for (row, rhs) in rows {
        let entries = (0..strategies.len())
            .flat_map(|e| row.iter().map(move |&(m, c)| (e * nm + m, c)))
            .collect();
        problem.equalities.push(EqualityRow { entries, rhs });
    }

    Ok(GuessingProgram {
        spec: spec.clone(),
        structure,
        strategies,
        constraints,
        problem,
    })
}

/// Bell-expression bound `G ≤ Σ c·P_obs + offset`, together with one
/// positive semidefinite Gram matrix per guessing strategy witnessing it.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub alice: [f64; 2],
    pub bob: [f64; 2],
    pub corr: [[f64; 2]; 2],
    pub offset: f64,
    pub grams: Vec<DMatrix<f64>>,
}

impl DualCertificate {
    /// The expression as a table of coefficients on `P(ab|xy)`.
    pub fn bell_expression(&self) -> BellExpression {
        BellExpression::from_correlators(self.alice, self.bob, self.corr)
    }

    /// `Σ c·P + offset` on a behavior.
    pub fn bound(&self, b: &Behavior) -> f64 {
        let mut s = self.offset;
        for k in 0..2 {
            s += self.alice[k] * b.alice_mean(k) + self.bob[k] * b.bob_mean(k);
        }
        for x in 0..2 {
            for y in 0..2 {
                s += self.corr[x][y] * b.correlator(x, y);
            }
        }
        s
    }

    /// `[⟨A0⟩, ⟨A1⟩, ⟨B0⟩, ⟨B1⟩, ⟨A0B0⟩, ⟨A0B1⟩, ⟨A1B0⟩, ⟨A1B1⟩]` coefficients.
    pub fn coefficient_vector(&self) -> [f64; 8] {
        [
            self.alice[0],
            self.alice[1],
            self.bob[0],
            self.bob[1],
            self.corr[0][0],
            self.corr[0][1],
            self.corr[1][0],
            self.corr[1][1],
        ]
    }

    /// Certificate `G ≤ 1`, valid for any behavior: `1 − Σ p(xy) Π_{g(xy)}`
    /// is a sum of squares of `1 − Π_a^x Π_b^y`.
    pub fn trivial(spec: &ProgramSpec) -> Self {
        let grams = enumerate_strategies(spec)
            .iter()
            .map(|g| {
                let mut gram = DMatrix::zeros(DIM, DIM);
                for &((x, y), (a, b)) in &g.guess {
                    let (sa, sb) = (crate::bell::outcome_sign(a), crate::bell::outcome_sign(b));
                    let mut v = nalgebra::DVector::zeros(DIM);
                    v[0] = 0.75;
                    v[(1 + x) * 5] = -sa / 4.0;
                    v[1 + y] = -sb / 4.0;
                    v[(1 + x) * 5 + 1 + y] = -sa * sb / 4.0;
                    gram += &v * v.transpose() * spec.distribution.weight(x, y);
                }
                gram
            })
            .collect();
        DualCertificate {
            alice: [0.0; 2],
            bob: [0.0; 2],
            corr: [[0.0; 2]; 2],
            offset: 1.0,
            grams,
        }
    }
}

/// Reads the Bell coefficients from the equality multipliers and keeps the
/// dual block matrices as Gram matrices.
pub fn extract_dual_bell(
    program: &GuessingProgram,
    report: &SolveReport,
) -> Result<DualCertificate> {
    if report.multipliers.len() != program.constraints.len()
        || report.dual_matrices.len() != program.num_blocks()
        || report.multipliers.iter().any(|v| !v.is_finite())
    {
        return Err(Error::Solver {
            status: report.status,
            gap: report.relative_gap,
        });
    }
    let mut cert = DualCertificate {
        alice: [0.0; 2],
        bob: [0.0; 2],
        corr: [[0.0; 2]; 2],
        offset: 0.0,
        grams: report.dual_matrices.clone(),
    };
    for (c, &l) in program.constraints.iter().zip(&report.multipliers) {
        match *c {
            Constraint::Normalization => cert.offset = l,
            Constraint::Quantity(Quantity::AliceMean(x)) => cert.alice[x] = l,
            Constraint::Quantity(Quantity::BobMean(y)) => cert.bob[y] = l,
            Constraint::Quantity(Quantity::Correlator(x, y)) => cert.corr[x][y] = l,
            Constraint::Quantity(Quantity::Identity) => cert.offset += l,
            Constraint::Chsh => {
                cert.corr = [[l, l], [l, -l]];
            }
        }
    }
    Ok(cert)
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCheck {
    pub valid: bool,
    /// Smallest eigenvalue over all corrected Gram matrices.
    pub worst_eigenvalue: f64,
    /// `Σ c·P_obs + offset`, increased by `25·max(0, −worst_eigenvalue)` so
    /// that it stays a rigorous bound even for slightly infeasible duals.
    pub certified_bound: f64,
}

/// Checks a certificate without trusting the solver.
///
/// For every strategy `e` the functional `offset·1 + Σ c_q q − objective_e`
/// must be a positive semidefinite combination of the moment-matrix
/// entries. The supplied Gram matrix is shifted along each monomial's
/// indicator so that it represents exactly this functional, and its
/// smallest eigenvalue is then checked. Because every diagonal entry of a
/// moment block equals the block weight, a negative eigenvalue `−δ` costs
/// at most `25 δ` in the bound.
pub fn verify_certificate(cert: &DualCertificate, spec: &ProgramSpec) -> CertificateCheck {
    let structure = MomentStructure::build();
    let strategies = enumerate_strategies(spec);
    let nm = structure.num_monomials();
    let mut functional_base = vec![0.0; nm];
    functional_base[structure.quantity_monomial(Quantity::Identity)] += cert.offset;
    for k in 0..2 {
        functional_base[structure.quantity_monomial(Quantity::AliceMean(k))] += cert.alice[k];
        functional_base[structure.quantity_monomial(Quantity::BobMean(k))] += cert.bob[k];
    }
    for x in 0..2 {
        for y in 0..2 {
            functional_base[structure.quantity_monomial(Quantity::Correlator(x, y))] +=
                cert.corr[x][y];
        }
    }
    let weight: Vec<f64> = (0..nm)
        .map(|m| {
            structure
                .positions(m)
                .iter()
                .map(|&(k, l)| if k == l { 1.0 } else { 2.0 })
                .sum()
        })
        .collect();

    let mut worst = f64::INFINITY;
    for (e, g) in strategies.iter().enumerate() {
        let obj = strategy_objective(&structure, &spec.distribution, g);
        let mut gram = cert
            .grams
            .get(e)
            .filter(|m| m.nrows() == DIM && m.ncols() == DIM)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(DIM, DIM));
        gram = (&gram + gram.transpose()) * 0.5;
        let current = structure.read_inner(&gram);
        for m in 0..nm {
            let target = functional_base[m] - obj[m];
            let shift = (target - current[m]) / weight[m];
            if shift != 0.0 {
                for &(k, l) in structure.positions(m) {
                    gram[(k, l)] += shift;
                    if k != l {
                        gram[(l, k)] += shift;
                    }
                }
            }
        }
        let min = gram
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let min = if min.is_finite() {
            min
        } else {
            f64::NEG_INFINITY
        };
        worst = worst.min(min);
    }
    if strategies.is_empty() {
        worst = 0.0;
    }
    let bound = cert.bound(&spec.observed) + DIM as f64 * (-worst).max(0.0);
    CertificateCheck {
        valid: worst >= -CERTIFICATE_TOL,
        worst_eigenvalue: worst,
        certified_bound: bound,
    }
}

impl MomentStructure {
    /// `E_m • M` for every monomial.
    pub fn read_inner(&self, m: &DMatrix<f64>) -> Vec<f64> {
        (0..self.num_monomials())
            .map(|id| {
                self.positions(id)
                    .iter()
                    .map(|&(k, l)| {
                        if k == l {
                            m[(k, k)]
                        } else {
                            m[(k, l)] + m[(l, k)]
                        }
                    })
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CertifiedResult {
    pub mode: Mode,
    pub fixed_settings: Option<(usize, usize)>,
    /// Upper bound on the guessing probability, at most 1.
    pub guessing_upper: f64,
    /// `−log₂ guessing_upper`.
    pub hmin_bits: f64,
    pub primal_objective: f64,
    /// Dual minus primal objective, as reported by the solver.
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub certificate: DualCertificate,
}

impl CertifiedResult {
    /// Converged with a relative gap of at most [`ACCURACY_GAP`].
    pub fn accurate(&self) -> bool {
        self.status.converged()
    }

    pub fn dual_bell(&self) -> BellExpression {
        self.certificate.bell_expression()
    }
}

/// Solves the program of a spec and reads off the certified rate.
pub fn certify(spec: &ProgramSpec) -> Result<CertifiedResult> {
    let program = assemble(spec)?;
    let report = sdp::solve(&program.problem, SOLVER_TOL)?;
    certify_from_report(&program, &report)
}

/// Turns a solver report for `program` into a certified result.
///
/// The bound comes from the verified dual certificate, never from the
/// primal iterate. If the certificate is slightly infeasible its offset is
/// raised until it verifies. Solves that stop short of the gap target keep
/// their status, so callers can tell accurate rates from merely valid ones.
pub fn certify_from_report(
    program: &GuessingProgram,
    report: &SolveReport,
) -> Result<CertifiedResult> {
    let fail = || Error::Solver {
        status: report.status,
        gap: report.relative_gap,
    };
    if report.status == SolveStatus::Infeasible || !report.dual_objective.is_finite() {
        return Err(fail());
    }
    let mut certificate = extract_dual_bell(program, report)?;
    let mut check = verify_certificate(&certificate, &program.spec);
    if !check.worst_eigenvalue.is_finite() {
        return Err(fail());
    }
    if check.worst_eigenvalue < 0.0 {
        certificate.offset += DIM as f64 * -check.worst_eigenvalue * (1.0 + 1e-6) + 1e-13;
        check = verify_certificate(&certificate, &program.spec);
        if !check.valid {
            return Err(fail());
        }
    }
    let upper = certificate.bound(&program.spec.observed).min(1.0);
    let mut status = report.status;
    if status.converged() && report.relative_gap > ACCURACY_GAP {
        status = SolveStatus::NumericalTrouble;
    }
    Ok(CertifiedResult {
        mode: program.spec.mode,
        fixed_settings: program.spec.fixed_settings,
        guessing_upper: upper,
        hmin_bits: -upper.log2(),
        primal_objective: report.primal_objective,
        gap: report.gap,
        status,
        iterations: report.iterations,
        certificate,
    })
}

/// Certifies all four fixed settings pairs and keeps the best rate.
///
/// Rates within [`TIE_TOL`] of the maximum count as tied; the first such
/// pair in lexicographic order wins.
pub fn best_fixed_settings(
    mode: Mode,
    observed: &Behavior,
) -> Result<((usize, usize), CertifiedResult)> {
    if !mode.fixed_settings() {
        return Err(Error::InvalidProblem(
            "best_fixed_settings applies to cases 1 and 2".into(),
        ));
    }
    let mut results = Vec::with_capacity(4);
    for x in 0..2 {
        for y in 0..2 {
            let spec = ProgramSpec::new(mode, observed.clone(), Some((x, y)))?;
            results.push(((x, y), certify(&spec)?));
        }
    }
    let max = results
        .iter()
        .map(|r| r.1.hmin_bits)
        .fold(f64::NEG_INFINITY, f64::max);
    let pos = results
        .iter()
        .position(|r| r.1.hmin_bits >= max - TIE_TOL)
        .expect("non-empty");
    Ok(results.swap_remove(pos))
}

/// Index of the row `u ⊗ v` in the moment matrix.
pub fn index_of(alice: &[u8], bob: &[u8]) -> Option<usize> {
    let a = LOCAL_WORDS.iter().position(|w| *w == alice)?;
    let b = LOCAL_WORDS.iter().position(|w| *w == bob)?;
    Some(a * 5 + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::apply_row;
    use crate::quantum::NoiseKind;

    fn white(v: f64) -> Behavior {
        NoiseKind::White.behavior(v).unwrap()
    }

    #[test]
    fn strategy_counts() {
        let s2 = ProgramSpec::new(Mode::FixedFull, white(0.9), Some((0, 0))).unwrap();
        assert_eq!(enumerate_strategies(&s2).len(), 4);
        let s3 = ProgramSpec::new(Mode::AllFull, white(0.9), None).unwrap();
        let all = enumerate_strategies(&s3);
        assert_eq!(all.len(), 256);
        assert_eq!(
            all[0].guess,
            vec![
                ((0, 0), (0, 0)),
                ((0, 1), (0, 0)),
                ((1, 0), (0, 0)),
                ((1, 1), (0, 0))
            ]
        );
        assert_eq!(all[1].guess[3], ((1, 1), (0, 1)));
        assert_eq!(all[255].guess[0], ((0, 0), (1, 1)));
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 256);
    }

    #[test]
    fn missing_settings_rejected() {
        assert!(matches!(
            ProgramSpec::new(Mode::ChshOnly, white(0.9), None),
            Err(Error::MissingFixedSettings)
        ));
    }

    #[test]
    fn block_and_constraint_counts() {
        let p2 = assemble(&ProgramSpec::new(Mode::FixedFull, white(0.9), Some((0, 0))).unwrap())
            .unwrap();
        assert_eq!(p2.problem.blocks.len(), 4);
        assert_eq!(p2.problem.equalities.len(), 9);
        let p1 =
            assemble(&ProgramSpec::new(Mode::ChshOnly, white(0.9), Some((0, 0))).unwrap()).unwrap();
        assert_eq!(p1.problem.blocks.len(), 4);
        assert_eq!(p1.problem.equalities.len(), 2);
        assert!(p1.problem.validate().is_ok());
    }

    #[test]
    fn quantum_point_split_evenly_is_feasible() {
        for mode in Mode::ALL {
            let model = NoiseKind::Dephasing.model(0.6).unwrap();
            let observed = crate::quantum::behavior_from_model(&model).unwrap();
            let program =
                assemble(&ProgramSpec::new(mode, observed, Some((1, 0))).unwrap()).unwrap();
            let mv = program.structure.moments_from_model(&model);
            let k = program.num_blocks() as f64;
            let y: Vec<f64> = (0..program.num_blocks())
                .flat_map(|_| mv.iter().map(|v| v / k))
                .collect();
            for r in &program.problem.equalities {
                assert!((r.dot(&y) - r.rhs).abs() < 1e-12);
            }
            for b in &program.problem.blocks {
                let ev = b.evaluate(&y).symmetric_eigenvalues();
                assert!(ev.iter().all(|&e| e > -1e-12));
            }
            // The objective at this point is the trivial-decomposition value.
            let obj = program.problem.objective_value(&y);
            let mut want = 0.0;
            for (x, yy) in program.spec.distribution().support() {
                want += program.spec.distribution().weight(x, yy)
                    * program.spec.observed().max_entry(x, yy);
            }
            assert!(obj <= want + 1e-12);
            let sum_rows: f64 = program
                .strategies
                .iter()
                .map(|_| apply_row(&program.structure.probability_row(0, 0, 0, 0), &mv) / k)
                .sum();
            assert!((sum_rows - program.spec.observed().p(0, 0, 0, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_certificate_verifies() {
        for mode in Mode::ALL {
            let spec = ProgramSpec::new(mode, white(0.8), Some((0, 1))).unwrap();
            let check = verify_certificate(&DualCertificate::trivial(&spec), &spec);
            assert!(check.valid, "{check:?}");
            assert!((check.certified_bound - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn extremal_point_case2() {
        let spec = ProgramSpec::new(Mode::FixedFull, white(1.0), Some((0, 0))).unwrap();
        let r = certify(&spec).unwrap();
        let want = (2.0 + 2f64.sqrt()) / 8.0;
        assert!(
            (r.guessing_upper - want).abs() < 1e-4,
            "{}",
            r.guessing_upper
        );
        assert!((r.hmin_bits - 1.2284).abs() < 1e-3);
        assert!((r.hmin_bits + r.guessing_upper.log2()).abs() < 1e-12);
    }

    #[test]
    fn certificate_checks() {
        let spec = ProgramSpec::new(Mode::FixedFull, white(0.8), Some((0, 0))).unwrap();
        let r = certify(&spec).unwrap();
        let check = verify_certificate(&r.certificate, &spec);
        assert!(check.valid, "{check:?}");
        assert!(check.certified_bound >= r.primal_objective - 1e-6);
        assert!((r.certificate.bound(spec.observed()) - r.guessing_upper).abs() < 1e-6);
        let mut weak = r.certificate.clone();
        weak.offset -= 0.05;
        assert!(!verify_certificate(&weak, &spec).valid);
    }

    #[test]
    fn index_lookup() {
        assert_eq!(index_of(&[], &[]), Some(0));
        assert_eq!(index_of(&[1], &[0]), Some(11));
        assert_eq!(index_of(&[1, 1], &[]), None);
    }
}

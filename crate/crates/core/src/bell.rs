//! Two-party Bell scenarios with two settings and two outcomes per party.
//!
//! Outcomes are stored as indices `0` and `1`. Whenever a behavior is turned
//! into correlators the convention `0 ↦ +1`, `1 ↦ −1` is used.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Tolerance on `Σ_ab P(ab|xy) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance on equality of marginals across the other party's setting.
pub const NO_SIGNALING_TOL: f64 = 1e-10;
/// Slack allowed above the local bound of a CHSH facet.
pub const FACET_TOL: f64 = 1e-10;

/// Sign attached to an outcome index.
#[inline]
pub fn outcome_sign(a: usize) -> f64 {
    if a == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Numbers of settings and outcomes per party.
///
/// The field layout is general but only the 2-setting, 2-outcome case can be
/// constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    inputs_a: usize,
    inputs_b: usize,
    outputs_a: usize,
    outputs_b: usize,
}

impl Scenario {
    pub const CHSH: Scenario = Scenario {
        inputs_a: 2,
        inputs_b: 2,
        outputs_a: 2,
        outputs_b: 2,
    };

    pub fn new(
        inputs_a: usize,
        inputs_b: usize,
        outputs_a: usize,
        outputs_b: usize,
    ) -> Result<Self> {
        let s = Scenario {
            inputs_a,
            inputs_b,
            outputs_a,
            outputs_b,
        };
        if s == Self::CHSH {
            Ok(s)
        } else {
            Err(Error::UnsupportedScenario(
                inputs_a, inputs_b, outputs_a, outputs_b,
            ))
        }
    }

    pub fn inputs_a(&self) -> usize {
        self.inputs_a
    }

    pub fn inputs_b(&self) -> usize {
        self.inputs_b
    }

    pub fn outputs_a(&self) -> usize {
        self.outputs_a
    }

    pub fn outputs_b(&self) -> usize {
        self.outputs_b
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Self::CHSH
    }
}

#[inline]
fn idx(a: usize, b: usize, x: usize, y: usize) -> usize {
    debug_assert!(a < 2 && b < 2 && x < 2 && y < 2);
    ((x * 2 + y) * 2 + a) * 2 + b
}

/// Iterates `(a, b, x, y)` in table order.
pub fn entries() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..2).flat_map(|x| {
        (0..2).flat_map(move |y| (0..2).flat_map(move |a| (0..2).map(move |b| (a, b, x, y))))
    })
}

/// Conditional probability table `P(ab|xy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    table: [f64; 16],
}

impl Behavior {
    /// Builds a behavior without checking normalization or no-signaling.
    /// Use [`Behavior::validate`] to inspect it.
    pub fn from_fn(mut p: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut table = [0.0; 16];
        for (a, b, x, y) in entries() {
            table[idx(a, b, x, y)] = p(a, b, x, y);
        }
        Behavior {
            scenario: Scenario::CHSH,
            table,
        }
    }

    /// Builds a behavior and rejects it unless it passes [`Behavior::validate`].
    pub fn checked(p: impl FnMut(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let b = Self::from_fn(p);
        match b.validate() {
            ValidationReport::Ok => Ok(b),
            ValidationReport::Violations(v) => Err(Error::InvalidBehavior(
                v.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            )),
        }
    }

    pub fn uniform() -> Self {
        Self::from_fn(|_, _, _, _| 0.25)
    }

    /// Behavior with the given marginals and correlators, with `±1` outcomes.
    pub fn from_correlators(alice: [f64; 2], bob: [f64; 2], corr: [[f64; 2]; 2]) -> Self {
        Self::from_fn(|a, b, x, y| {
            let (sa, sb) = (outcome_sign(a), outcome_sign(b));
            (1.0 + sa * alice[x] + sb * bob[y] + sa * sb * corr[x][y]) / 4.0
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    #[inline]
    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.table[idx(a, b, x, y)]
    }

    pub fn table(&self) -> &[f64; 16] {
        &self.table
    }

    /// `⟨A_x B_y⟩`.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| outcome_sign(a) * outcome_sign(b) * self.p(a, b, x, y))
            .sum()
    }

    /// `⟨A_x⟩`, averaged over Bob's setting.
    pub fn alice_mean(&self, x: usize) -> f64 {
        let mut s = 0.0;
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    s += outcome_sign(a) * self.p(a, b, x, y);
                }
            }
        }
        s / 2.0
    }

    /// `⟨B_y⟩`, averaged over Alice's setting.
    pub fn bob_mean(&self, y: usize) -> f64 {
        let mut s = 0.0;
        for x in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    s += outcome_sign(b) * self.p(a, b, x, y);
                }
            }
        }
        s / 2.0
    }

    /// Largest outcome-pair probability for settings `(x, y)`.
    pub fn max_entry(&self, x: usize, y: usize) -> f64 {
        let base = idx(0, 0, x, y);
        self.table[base..base + 4]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks normalization, positivity and no-signaling.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        for (a, b, x, y) in entries() {
            let v = self.p(a, b, x, y);
            if !v.is_finite() {
                out.push(Violation::NonFinite { a, b, x, y });
            } else if !(-NORMALIZATION_TOL..=1.0 + NORMALIZATION_TOL).contains(&v) {
                out.push(Violation::OutOfRange {
                    a,
                    b,
                    x,
                    y,
                    value: v,
                });
            }
        }
        for x in 0..2 {
            for y in 0..2 {
                let s: f64 = (0..4).map(|k| self.table[idx(0, 0, x, y) + k]).sum();
                if (s - 1.0).abs() > NORMALIZATION_TOL || !s.is_finite() {
                    out.push(Violation::Normalization { x, y, sum: s });
                }
            }
        }
        // Alice's marginal must not depend on y, Bob's must not depend on x.
        for x in 0..2 {
            for a in 0..2 {
                let m: Vec<f64> = (0..2)
                    .map(|y| self.p(a, 0, x, y) + self.p(a, 1, x, y))
                    .collect();
                let d = (m[0] - m[1]).abs();
                if d > NO_SIGNALING_TOL || !d.is_finite() {
                    out.push(Violation::Signaling {
                        party: Party::Alice,
                        setting: x,
                        outcome: a,
                        deviation: d,
                    });
                }
            }
        }
        for y in 0..2 {
            for b in 0..2 {
                let m: Vec<f64> = (0..2)
                    .map(|x| self.p(0, b, x, y) + self.p(1, b, x, y))
                    .collect();
                let d = (m[0] - m[1]).abs();
                if d > NO_SIGNALING_TOL || !d.is_finite() {
                    out.push(Violation::Signaling {
                        party: Party::Bob,
                        setting: y,
                        outcome: b,
                        deviation: d,
                    });
                }
            }
        }
        if out.is_empty() {
            ValidationReport::Ok
        } else {
            ValidationReport::Violations(out)
        }
    }

    /// Plain-text table: a `# behavior 2 2 2 2` header and one `x y a b value`
    /// line per entry, values with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# behavior 2 2 2 2\n");
        for (a, b, x, y) in entries() {
            writeln!(s, "{x} {y} {a} {b} {:.16e}", self.p(a, b, x, y)).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "# behavior 2 2 2 2")) => {}
            Some((line, _)) => {
                return Err(Error::Parse {
                    line,
                    msg: "expected header `# behavior 2 2 2 2`".into(),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty behavior file".into(),
                })
            }
        }
        let mut table = [f64::NAN; 16];
        let mut seen = [false; 16];
        for (line, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let mut ix = [0usize; 4];
            for (k, f) in fields[..4].iter().enumerate() {
                ix[k] = match f.parse::<usize>() {
                    Ok(v) if v < 2 => v,
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("bad index `{f}`"),
                        })
                    }
                };
            }
            let value: f64 = fields[4].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad value `{}`", fields[4]),
            })?;
            let [x, y, a, b] = ix;
            let k = idx(a, b, x, y);
            if seen[k] {
                return Err(Error::Parse {
                    line,
                    msg: "duplicate entry".into(),
                });
            }
            seen[k] = true;
            table[k] = value;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: "missing entries".into(),
            });
        }
        Ok(Behavior {
            scenario: Scenario::CHSH,
            table,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// A constraint violated by a behavior table.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite {
        a: usize,
        b: usize,
        x: usize,
        y: usize,
    },
    OutOfRange {
        a: usize,
        b: usize,
        x: usize,
        y: usize,
        value: f64,
    },
    Normalization {
        x: usize,
        y: usize,
        sum: f64,
    },
    Signaling {
        party: Party,
        setting: usize,
        outcome: usize,
        deviation: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonFinite { a, b, x, y } => write!(f, "P({a}{b}|{x}{y}) is not finite"),
            Violation::OutOfRange { a, b, x, y, value } => {
                write!(f, "P({a}{b}|{x}{y}) = {value} outside [0, 1]")
            }
            Violation::Normalization { x, y, sum } => {
                write!(f, "sum over outcomes for settings {x}{y} is {sum} (off by {:.3e})", sum - 1.0)
            }
            Violation::Signaling {
                party,
                setting,
                outcome,
                deviation,
            } => write!(
                f,
                "{party:?} marginal for setting {setting}, outcome {outcome} depends on the remote setting ({deviation:.3e})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationReport {
    Ok,
    Violations(Vec<Violation>),
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationReport::Ok)
    }
}

/// Free-function form of [`Behavior::validate`].
pub fn validate_behavior(b: &Behavior) -> ValidationReport {
    b.validate()
}

/// Linear functional `Σ c(ab|xy) P(ab|xy)` on behaviors.
#[derive(Debug, Clone, PartialEq)]
pub struct BellExpression {
    scenario: Scenario,
    coefficients: [f64; 16],
    classical_bound: Option<f64>,
}

impl BellExpression {
    pub fn from_fn(
        mut c: impl FnMut(usize, usize, usize, usize) -> f64,
        classical_bound: Option<f64>,
    ) -> Self {
        let mut coefficients = [0.0; 16];
        for (a, b, x, y) in entries() {
            coefficients[idx(a, b, x, y)] = c(a, b, x, y);
        }
        BellExpression {
            scenario: Scenario::CHSH,
            coefficients,
            classical_bound,
        }
    }

    /// Expression `Σ_x alice[x]⟨A_x⟩ + Σ_y bob[y]⟨B_y⟩ + Σ_xy corr[x][y]⟨A_xB_y⟩`.
    ///
    /// Marginal terms are spread evenly over the remote party's settings.
    pub fn from_correlators(alice: [f64; 2], bob: [f64; 2], corr: [[f64; 2]; 2]) -> Self {
        Self::from_fn(
            |a, b, x, y| {
                let (sa, sb) = (outcome_sign(a), outcome_sign(b));
                sa * sb * corr[x][y] + sa * alice[x] / 2.0 + sb * bob[y] / 2.0
            },
            None,
        )
    }

    pub fn with_classical_bound(mut self, bound: f64) -> Self {
        self.classical_bound = Some(bound);
        self
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coefficient(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.coefficients[idx(a, b, x, y)]
    }

    pub fn coefficients(&self) -> &[f64; 16] {
        &self.coefficients
    }

    pub fn classical_bound(&self) -> Option<f64> {
        self.classical_bound
    }

    /// Evaluates on a behavior, rejecting mismatched scenarios.
    pub fn evaluate(&self, b: &Behavior) -> Result<f64> {
        if self.scenario != b.scenario {
            return Err(Error::ScenarioMismatch);
        }
        Ok(self
            .coefficients
            .iter()
            .zip(b.table.iter())
            .map(|(c, p)| c * p)
            .sum())
    }

    /// Correlator-form coefficients `(alice, bob, corr)` of the expression
    /// restricted to no-signaling behaviors, i.e. the unique representation
    /// up to a constant offset, which is returned last.
    pub fn correlator_form(&self) -> ([f64; 2], [f64; 2], [[f64; 2]; 2], f64) {
        // Evaluate against the basis of no-signaling behaviors.
        let e0 = Behavior::from_correlators([0.0; 2], [0.0; 2], [[0.0; 2]; 2]);
        let base = self.evaluate(&e0).unwrap();
        let mut alice = [0.0; 2];
        let mut bob = [0.0; 2];
        let mut corr = [[0.0; 2]; 2];
        for x in 0..2 {
            let mut m = [0.0; 2];
            m[x] = 1.0;
            alice[x] = self
                .evaluate(&Behavior::from_correlators(m, [0.0; 2], [[0.0; 2]; 2]))
                .unwrap()
                - base;
            bob[x] = self
                .evaluate(&Behavior::from_correlators([0.0; 2], m, [[0.0; 2]; 2]))
                .unwrap()
                - base;
        }
        for x in 0..2 {
            for y in 0..2 {
                let mut c = [[0.0; 2]; 2];
                c[x][y] = 1.0;
                corr[x][y] = self
                    .evaluate(&Behavior::from_correlators([0.0; 2], [0.0; 2], c))
                    .unwrap()
                    - base;
            }
        }
        (alice, bob, corr, base)
    }
}

/// Free-function form of [`BellExpression::evaluate`].
pub fn evaluate_bell(expr: &BellExpression, b: &Behavior) -> Result<f64> {
    expr.evaluate(b)
}

/// `⟨A0B0⟩ + ⟨A0B1⟩ + ⟨A1B0⟩ − ⟨A1B1⟩` with local bound 2.
pub fn chsh_expression() -> BellExpression {
    BellExpression::from_correlators([0.0; 2], [0.0; 2], [[1.0, 1.0], [1.0, -1.0]])
        .with_classical_bound(2.0)
}

/// Probability distribution over setting pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingsDistribution {
    weights: [[f64; 2]; 2],
}

impl SettingsDistribution {
    pub fn new(weights: [[f64; 2]; 2]) -> Result<Self> {
        let sum: f64 = weights.iter().flatten().sum();
        if weights.iter().flatten().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidWeights { sum });
        }
        Ok(SettingsDistribution { weights })
    }

    pub fn point_mass(x: usize, y: usize) -> Self {
        let mut weights = [[0.0; 2]; 2];
        weights[x][y] = 1.0;
        SettingsDistribution { weights }
    }

    pub fn uniform() -> Self {
        SettingsDistribution {
            weights: [[0.25; 2]; 2],
        }
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.weights[x][y]
    }

    /// Setting pairs with nonzero weight, in lexicographic order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        (0..2)
            .flat_map(|x| (0..2).map(move |y| (x, y)))
            .filter(|&(x, y)| self.weights[x][y] > 0.0)
            .collect()
    }
}

/// Deterministic behavior with `a = fa[x]` and `b = fb[y]`.
pub fn deterministic_behavior(fa: [usize; 2], fb: [usize; 2]) -> Behavior {
    Behavior::from_fn(|a, b, x, y| if a == fa[x] && b == fb[y] { 1.0 } else { 0.0 })
}

/// The 16 local deterministic strategies, ordered lexicographically by
/// `(fa[0], fa[1], fb[0], fb[1])`.
pub fn deterministic_strategies() -> Vec<([usize; 2], [usize; 2])> {
    let mut out = Vec::with_capacity(16);
    for k in 0..16usize {
        out.push(([(k >> 3) & 1, (k >> 2) & 1], [(k >> 1) & 1, k & 1]));
    }
    out
}

/// Convex combination of behaviors.
pub fn mix(terms: &[(f64, &Behavior)]) -> Result<Behavior> {
    let sum: f64 = terms.iter().map(|(w, _)| w).sum();
    if terms.iter().any(|(w, _)| !(*w >= 0.0)) || (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidWeights { sum });
    }
    let mut table = [0.0; 16];
    for (w, b) in terms {
        if b.scenario != Scenario::CHSH {
            return Err(Error::ScenarioMismatch);
        }
        for (t, p) in table.iter_mut().zip(b.table.iter()) {
            *t += w * p;
        }
    }
    Ok(Behavior {
        scenario: Scenario::CHSH,
        table,
    })
}

/// One of the eight relabelings of CHSH:
/// `Σ_xy (−1)^(xy ⊕ αx ⊕ βy ⊕ γ) ⟨A_xB_y⟩ ≤ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChshFacet {
    pub alpha: u8,
    pub beta: u8,
    pub gamma: u8,
}

impl ChshFacet {
    pub fn all() -> [ChshFacet; 8] {
        let mut out = [ChshFacet {
            alpha: 0,
            beta: 0,
            gamma: 0,
        }; 8];
        for (k, f) in out.iter_mut().enumerate() {
            *f = ChshFacet {
                alpha: ((k >> 2) & 1) as u8,
                beta: ((k >> 1) & 1) as u8,
                gamma: (k & 1) as u8,
            };
        }
        out
    }

    pub fn sign(&self, x: usize, y: usize) -> f64 {
        let parity =
            (x & y) ^ (self.alpha as usize & x) ^ (self.beta as usize & y) ^ self.gamma as usize;
        if parity == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Facet value on a behavior's correlators. Linear in the table.
    pub fn value(&self, b: &Behavior) -> f64 {
        let mut s = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                s += self.sign(x, y) * b.correlator(x, y);
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalityReport {
    pub local: bool,
    pub max_facet_value: f64,
    pub facet: ChshFacet,
}

/// Exact locality test for 2222 behaviors through the eight CHSH facets.
///
/// Positivity and no-signaling are assumed (the input is a valid behavior);
/// together with these facets they describe the local polytope completely.
pub fn is_local_2222(b: &Behavior) -> LocalityReport {
    let mut best = (f64::NEG_INFINITY, ChshFacet::all()[0]);
    for f in ChshFacet::all() {
        let v = f.value(b);
        if v > best.0 {
            best = (v, f);
        }
    }
    LocalityReport {
        local: best.0 <= 2.0 + FACET_TOL,
        max_facet_value: best.0,
        facet: best.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_2222_scenarios_construct() {
        assert!(Scenario::new(2, 2, 2, 2).is_ok());
        assert!(matches!(
            Scenario::new(3, 2, 2, 2),
            Err(Error::UnsupportedScenario(..))
        ));
        assert!(Scenario::new(2, 2, 2, 3).is_err());
    }

    #[test]
    fn uniform_is_valid() {
        assert!(validate_behavior(&Behavior::uniform()).is_ok());
    }

    #[test]
    fn overfull_row_reports_normalization() {
        let b = Behavior::from_fn(|a, b, x, y| match (a, b, x, y) {
            (0, 0, 0, 0) => 0.6,
            (0, 1, 0, 0) => 0.5,
            _ => 0.25,
        });
        let ValidationReport::Violations(v) = b.validate() else {
            panic!("expected violations")
        };
        assert!(v
            .iter()
            .any(|v| matches!(v, Violation::Normalization { x: 0, y: 0, sum } if (sum - 1.6).abs() < 1e-12)));
    }

    #[test]
    fn signaling_is_detected() {
        // Alice's outcome copies Bob's setting.
        let b = Behavior::from_fn(|a, _b, _x, y| if a == y { 0.5 } else { 0.0 });
        let ValidationReport::Violations(v) = b.validate() else {
            panic!("expected violations")
        };
        assert!(v.iter().all(|v| matches!(
            v,
            Violation::Signaling {
                party: Party::Alice,
                ..
            }
        )));
    }

    #[test]
    fn chsh_on_deterministic_points() {
        let chsh = chsh_expression();
        assert_eq!(chsh.classical_bound(), Some(2.0));
        let all_plus = deterministic_behavior([0, 0], [0, 0]);
        assert!((chsh.evaluate(&all_plus).unwrap() - 2.0).abs() < 1e-15);
        let anti = Behavior::from_correlators([0.0; 2], [0.0; 2], [[-1.0; 2]; 2]);
        assert!((chsh.evaluate(&anti).unwrap() + 2.0).abs() < 1e-15);
        let mut max = f64::NEG_INFINITY;
        for (fa, fb) in deterministic_strategies() {
            let s = chsh.evaluate(&deterministic_behavior(fa, fb)).unwrap();
            assert!(s.abs() <= 2.0 + 1e-15);
            max = max.max(s);
        }
        assert_eq!(max, 2.0);
    }

    #[test]
    fn sixteen_distinct_deterministic_points() {
        let all: Vec<_> = deterministic_strategies()
            .into_iter()
            .map(|(fa, fb)| deterministic_behavior(fa, fb))
            .collect();
        for (i, b) in all.iter().enumerate() {
            assert!(b.validate().is_ok());
            for c in &all[i + 1..] {
                assert_ne!(b, c);
            }
        }
        assert_eq!(all.len(), 16);
        let d = deterministic_behavior([0, 0], [0, 0]);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(d.p(0, 0, x, y), 1.0);
            }
        }
    }

    #[test]
    fn equal_mix_of_deterministic_points_is_uniform() {
        let all: Vec<_> = deterministic_strategies()
            .into_iter()
            .map(|(fa, fb)| deterministic_behavior(fa, fb))
            .collect();
        let terms: Vec<_> = all.iter().map(|b| (1.0 / 16.0, b)).collect();
        let m = mix(&terms).unwrap();
        for (p, q) in m.table().iter().zip(Behavior::uniform().table()) {
            assert!((p - q).abs() < 1e-15);
        }
        let single = mix(&[(1.0, &all[3])]).unwrap();
        assert_eq!(&single, &all[3]);
    }

    #[test]
    fn mix_rejects_bad_weights() {
        let u = Behavior::uniform();
        assert!(mix(&[(0.5, &u), (0.6, &u)]).is_err());
        assert!(mix(&[(1.5, &u), (-0.5, &u)]).is_err());
    }

    #[test]
    fn facets_cover_the_relabelings() {
        // Each facet is maximized (value 2) by some deterministic point and no
        // deterministic point exceeds it.
        for f in ChshFacet::all() {
            let best = deterministic_strategies()
                .into_iter()
                .map(|(fa, fb)| f.value(&deterministic_behavior(fa, fb)))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(best, 2.0);
        }
        let signs: std::collections::HashSet<_> = ChshFacet::all()
            .iter()
            .map(|f| [f.sign(0, 0), f.sign(0, 1), f.sign(1, 0), f.sign(1, 1)].map(|s| s as i8))
            .collect();
        assert_eq!(signs.len(), 8);
    }

    #[test]
    fn deterministic_points_are_local() {
        for (fa, fb) in deterministic_strategies() {
            assert!(is_local_2222(&deterministic_behavior(fa, fb)).local);
        }
    }

    #[test]
    fn text_round_trip() {
        let b =
            Behavior::from_correlators([0.1, -0.2], [0.0, 0.3], [[0.5, 0.1], [-0.3, 1.0 / 3.0]]);
        let text = b.to_text();
        assert!(text.starts_with("# behavior 2 2 2 2\n"));
        assert_eq!(text.lines().count(), 17);
        assert_eq!(Behavior::from_text(&text).unwrap(), b);
    }

    #[test]
    fn text_parse_errors() {
        assert!(Behavior::from_text("").is_err());
        assert!(Behavior::from_text("# behavior 3 2 2 2\n").is_err());
        let mut text = Behavior::uniform().to_text();
        text.push_str("0 0 0 0 0.25\n");
        assert!(matches!(
            Behavior::from_text(&text),
            Err(Error::Parse { line: 18, .. })
        ));
    }

    #[test]
    fn settings_distributions() {
        assert_eq!(SettingsDistribution::uniform().support().len(), 4);
        assert_eq!(
            SettingsDistribution::point_mass(1, 0).support(),
            vec![(1, 0)]
        );
        assert!(SettingsDistribution::new([[0.5, 0.5], [0.1, 0.0]]).is_err());
        assert!(SettingsDistribution::new([[0.5, 0.6], [-0.1, 0.0]]).is_err());
    }

    #[test]
    fn correlator_form_inverts_from_correlators() {
        let e =
            BellExpression::from_correlators([0.3, -0.1], [0.2, 0.7], [[1.0, -2.0], [0.5, 0.25]]);
        let (a, b, c, k) = e.correlator_form();
        assert!((a[0] - 0.3).abs() < 1e-15 && (a[1] + 0.1).abs() < 1e-15);
        assert!((b[0] - 0.2).abs() < 1e-15 && (b[1] - 0.7).abs() < 1e-15);
        assert!((c[0][1] + 2.0).abs() < 1e-15 && (c[1][1] - 0.25).abs() < 1e-15);
        assert!(k.abs() < 1e-15);
    }
}

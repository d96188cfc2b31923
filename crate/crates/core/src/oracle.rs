//! Lower bounds on the guessing probability from explicit decompositions.
//!
//! Any convex decomposition of the observed behavior into valid behaviors is
//! a strategy the adversary could use, so its guess value bounds the
//! guessing probability from below. Together with the certified upper bound
//! this brackets the true value.

use crate::bell::{
    deterministic_behavior, deterministic_strategies, entries, mix, Behavior, ChshFacet,
    SettingsDistribution, ValidationReport, FACET_TOL,
};
use crate::error::{Error, Result};
use crate::guessing::{CertifiedResult, ProgramSpec};

/// Weight tolerance for decompositions.
pub const WEIGHT_TOL: f64 = 1e-10;
/// Entry-wise tolerance between a decomposition's mix and its target.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Remainder mass below which the greedy extraction counts as complete.
pub const REMAINDER_TOL: f64 = 1e-9;
/// Slack allowed between the lower and the upper bound.
pub const SANDWICH_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ExplicitDecomposition {
    terms: Vec<(f64, Behavior)>,
    target: Behavior,
}

impl ExplicitDecomposition {
    /// Checks weights and that the terms mix back to `target`.
    pub fn new(terms: Vec<(f64, Behavior)>, target: Behavior) -> Result<Self> {
        let sum: f64 = terms.iter().map(|t| t.0).sum();
        if terms.iter().any(|t| !(t.0 >= 0.0)) || (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidWeights { sum });
        }
        for (_, b) in &terms {
            if let ValidationReport::Violations(v) = b.validate() {
                return Err(Error::InvalidBehavior(v[0].to_string()));
            }
        }
        let mut table = [0.0; 16];
        for (w, b) in &terms {
            for (t, p) in table.iter_mut().zip(b.table()) {
                *t += w * p;
            }
        }
        let err = table
            .iter()
            .zip(target.table())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if err > RECONSTRUCTION_TOL {
            return Err(Error::InvalidBehavior(format!(
                "decomposition misses its target by {err:.3e}"
            )));
        }
        Ok(ExplicitDecomposition { terms, target })
    }

    /// The single-term decomposition.
    pub fn trivial(target: &Behavior) -> Self {
        ExplicitDecomposition {
            terms: vec![(1.0, target.clone())],
            target: target.clone(),
        }
    }

    pub fn terms(&self) -> &[(f64, Behavior)] {
        &self.terms
    }

    pub fn target(&self) -> &Behavior {
        &self.target
    }

    /// Total weight of deterministic terms.
    pub fn deterministic_weight(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| is_deterministic(&t.1))
            .fold(0.0, |s, t| s + t.0)
    }

    pub fn is_fully_deterministic(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.0 <= REMAINDER_TOL || is_deterministic(&t.1))
    }

    pub fn guess_value(&self, dist: &SettingsDistribution) -> f64 {
        decomposition_guess_value(self, dist)
    }
}

fn is_deterministic(b: &Behavior) -> bool {
    b.table().iter().all(|&p| p == 0.0 || p == 1.0)
}

/// `Σ_terms w Σ_xy p(xy) max_ab P_term(ab|xy)`.
pub fn decomposition_guess_value(d: &ExplicitDecomposition, dist: &SettingsDistribution) -> f64 {
    d.terms
        .iter()
        .map(|(w, b)| {
            w * dist
                .support()
                .into_iter()
                .map(|(x, y)| dist.weight(x, y) * b.max_entry(x, y))
                .sum::<f64>()
        })
        .sum()
}

/// Largest `w` such that `r − w D` stays a nonnegative, local, unnormalized
/// behavior of mass `mass − w`.
fn max_local_weight(r: &[f64; 16], mass: f64, d: &Behavior) -> f64 {
    let mut w = mass;
    for ((a, b, x, y), &p) in entries().zip(r.iter()) {
        if d.p(a, b, x, y) == 1.0 {
            w = w.min(p);
        }
    }
    let residue = Behavior::from_fn(|a, b, x, y| r[((x * 2 + y) * 2 + a) * 2 + b]);
    // A nonlocal residue would have to stay quantum, which is not checked
    // here, so nothing is extracted from it.
    if ChshFacet::all()
        .iter()
        .any(|f| f.value(&residue) > 2.0 * mass + FACET_TOL)
    {
        return 0.0;
    }
    for f in ChshFacet::all() {
        // f(r) − w f(D) ≤ 2 (mass − w); deterministic points give f(D) = ±2.
        let slope = 2.0 - f.value(d);
        if slope > 0.0 {
            w = w.min((2.0 * mass - f.value(&residue)) / slope);
        }
    }
    w.max(0.0)
}

/// Extracts deterministic points from `b` in lexicographic order.
///
/// Each point takes the largest weight that keeps the residue entry-wise
/// nonnegative and local, so a local behavior is exhausted while a nonlocal
/// one stays whole in the remainder and the decomposition remains valid. Passes repeat until no point
/// gains weight.
pub fn greedy_local_extraction(b: &Behavior) -> ExplicitDecomposition {
    let points: Vec<Behavior> = deterministic_strategies()
        .into_iter()
        .map(|(fa, fb)| deterministic_behavior(fa, fb))
        .collect();
    let mut weights = vec![0.0; points.len()];
    let mut r = *b.table();
    let mut mass = 1.0;
    for _ in 0..4 {
        let mut gained = false;
        for (k, d) in points.iter().enumerate() {
            let w = max_local_weight(&r, mass, d);
            if w > REMAINDER_TOL * 1e-3 {
                weights[k] += w;
                mass -= w;
                for (t, p) in r.iter_mut().zip(d.table()) {
                    *t -= w * p;
                }
                gained = true;
            }
        }
        if !gained || mass <= REMAINDER_TOL {
            break;
        }
    }

    let mut terms: Vec<(f64, Behavior)> = points
        .into_iter()
        .zip(weights)
        .filter(|(_, w)| *w > 0.0)
        .map(|(d, w)| (w, d))
        .collect();
    if mass > REMAINDER_TOL {
        let remainder =
            Behavior::from_fn(|a, b, x, y| (r[((x * 2 + y) * 2 + a) * 2 + b] / mass).max(0.0));
        terms.push((mass, remainder));
    } else if let Some(last) = terms.last_mut() {
        // Absorb the rounding leftover so the weights sum to one.
        last.0 += mass;
    }
    ExplicitDecomposition {
        terms,
        target: b.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub lower: f64,
    pub upper: f64,
    /// `upper − lower`.
    pub gap: f64,
}

/// Brackets a certified result between explicit lower bounds and its upper
/// bound; fails if the lower bound exceeds the upper one.
pub fn sandwich_check(spec: &ProgramSpec, result: &CertifiedResult) -> Result<SandwichReport> {
    let dist = spec.distribution();
    let trivial = ExplicitDecomposition::trivial(spec.observed()).guess_value(dist);
    let greedy = greedy_local_extraction(spec.observed()).guess_value(dist);
    let lower = trivial.max(greedy);
    let upper = result.guessing_upper;
    if lower > upper + SANDWICH_TOL {
        return Err(Error::SandwichViolation { lower, upper });
    }
    Ok(SandwichReport {
        lower,
        upper,
        gap: upper - lower,
    })
}

/// Mixes the terms back together.
pub fn reconstruct(d: &ExplicitDecomposition) -> Result<Behavior> {
    let refs: Vec<(f64, &Behavior)> = d.terms.iter().map(|(w, b)| (*w, b)).collect();
    mix(&refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::is_local_2222;
    use crate::quantum::NoiseKind;

    fn white(v: f64) -> Behavior {
        NoiseKind::White.behavior(v).unwrap()
    }

    #[test]
    fn trivial_value_is_max_entry() {
        let d = ExplicitDecomposition::trivial(&white(1.0));
        let g = d.guess_value(&SettingsDistribution::point_mass(0, 0));
        assert!((g - (2.0 + 2f64.sqrt()) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_into_deterministic_points() {
        let terms: Vec<(f64, Behavior)> = deterministic_strategies()
            .into_iter()
            .map(|(fa, fb)| (1.0 / 16.0, deterministic_behavior(fa, fb)))
            .collect();
        let d = ExplicitDecomposition::new(terms, Behavior::uniform()).unwrap();
        assert!((d.guess_value(&SettingsDistribution::uniform()) - 1.0).abs() < 1e-12);
        assert!(d.is_fully_deterministic());
    }

    #[test]
    fn construction_rejects_bad_decompositions() {
        let u = Behavior::uniform();
        assert!(ExplicitDecomposition::new(vec![(0.5, u.clone())], u.clone()).is_err());
        let d = deterministic_behavior([0, 0], [0, 0]);
        assert!(ExplicitDecomposition::new(vec![(1.0, d)], u).is_err());
    }

    #[test]
    fn value_between_target_max_and_one() {
        let target = white(0.8);
        let dist = SettingsDistribution::uniform();
        let floor = ExplicitDecomposition::trivial(&target).guess_value(&dist);
        let d = greedy_local_extraction(&target);
        let g = d.guess_value(&dist);
        assert!(g >= floor - 1e-12 && g <= 1.0 + 1e-12);
    }

    #[test]
    fn local_point_fully_extracted() {
        let d = greedy_local_extraction(&white(0.5));
        assert!(d.is_fully_deterministic(), "{:?}", d.terms());
        assert!((d.guess_value(&SettingsDistribution::uniform()) - 1.0).abs() < 1e-9);
        let back = reconstruct(&d).unwrap();
        for (p, q) in back.table().iter().zip(white(0.5).table()) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn extremal_point_keeps_remainder() {
        let d = greedy_local_extraction(&white(1.0));
        assert!(!d.is_fully_deterministic());
        assert!(d.deterministic_weight() < 1e-12);
    }

    #[test]
    fn deterministic_point_single_term() {
        let b = deterministic_behavior([1, 0], [0, 1]);
        let d = greedy_local_extraction(&b);
        assert_eq!(d.terms().len(), 1);
        assert!((d.terms()[0].0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonlocal_behaviors_never_exhausted() {
        for v in [0.72, 0.8, 0.9] {
            assert!(!is_local_2222(&white(v)).local);
            assert!(!greedy_local_extraction(&white(v)).is_fully_deterministic());
        }
    }
}

//! Lower bounds from explicit decompositions and the resulting bracket on
//! the guessing probability.

use randcert::bell::SettingsDistribution;
use randcert::guessing::{certify, Mode, ProgramSpec};
use randcert::oracle::{greedy_local_extraction, sandwich_check};
use randcert::quantum::NoiseKind;

fn main() -> randcert::Result<()> {
    for v in [0.5, 0.7, 0.75, 0.9, 1.0] {
        let b = NoiseKind::White.behavior(v)?;
        let d = greedy_local_extraction(&b);
        println!(
            "V = {v:.2}: {} terms, deterministic weight {:.6}, value {:.6}",
            d.terms().len(),
            d.deterministic_weight(),
            d.guess_value(&SettingsDistribution::point_mass(0, 0))
        );

        let spec = ProgramSpec::new(Mode::FixedFull, b, Some((0, 0)))?;
        let s = sandwich_check(&spec, &certify(&spec)?)?;
        println!(
            "          {:.6} <= G <= {:.6}  (gap {:.2e})",
            s.lower, s.upper, s.gap
        );
    }
    Ok(())
}

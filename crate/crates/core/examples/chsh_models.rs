//! CHSH values of the two noisy singlet families and where they stop being
//! nonlocal.
//!
//! Run with `cargo run --example chsh_models`.

use randcert::bell::{chsh_expression, evaluate_bell, is_local_2222};
use randcert::quantum::NoiseKind;

fn main() -> randcert::Result<()> {
    let chsh = chsh_expression();
    for noise in [NoiseKind::White, NoiseKind::Dephasing] {
        println!("{noise}");
        println!("{:>6} {:>10} {:>10} {:>6}", "param", "S", "closed", "local");
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let b = noise.behavior(t)?;
            let s = evaluate_bell(&chsh, &b)?;
            let closed = match noise {
                NoiseKind::White => 2.0 * 2f64.sqrt() * t,
                NoiseKind::Dephasing => 2.0 * (1.0 + t * t).sqrt(),
            };
            println!(
                "{t:>6.2} {s:>10.6} {closed:>10.6} {:>6}",
                is_local_2222(&b).local
            );
        }
    }
    Ok(())
}

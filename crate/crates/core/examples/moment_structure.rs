//! The 25x25 local-level-2 moment matrix: its labels, and its value on a
//! concrete quantum model.

use randcert::moments::MomentStructure;
use randcert::quantum::NoiseKind;

fn main() -> randcert::Result<()> {
    let s = MomentStructure::build();
    println!("index words: {}", s.index_list().len());
    println!("distinct monomials: {}", s.num_monomials());

    // Upper-left corner of the label table.
    for k in 0..6 {
        let row: Vec<String> = (0..6).map(|l| format!("{:>3}", s.label(k, l))).collect();
        println!("{}", row.join(" "));
    }

    let model = NoiseKind::White.model(0.9)?;
    let gamma = s.gamma(&s.moments_from_model(&model));
    let eig = gamma.symmetric_eigen().eigenvalues;
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("min eigenvalue of the model's moment matrix: {min:.3e}");
    Ok(())
}

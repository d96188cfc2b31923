//! Two-qubit states, binary-outcome qubit observables and the Born rule.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::bell::Behavior;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-14;
const INVOLUTION_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Hermitian 2×2 matrix, used for single-qubit observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianMatrix2(Matrix2<Complex64>);

impl HermitianMatrix2 {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        let dev = (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidProblem(format!(
                "matrix is not Hermitian (deviation {dev:.3e})"
            )));
        }
        Ok(HermitianMatrix2(m))
    }

    pub fn identity() -> Self {
        HermitianMatrix2(Matrix2::identity())
    }

    pub fn sigma_x() -> Self {
        HermitianMatrix2(Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0)))
    }

    pub fn sigma_y() -> Self {
        let i = Complex64::i();
        HermitianMatrix2(Matrix2::new(c(0.0), -i, i, c(0.0)))
    }

    pub fn sigma_z() -> Self {
        HermitianMatrix2(Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0)))
    }

    /// `n·σ` for a unit Bloch vector (the vector is normalized here).
    pub fn from_bloch(n: [f64; 3]) -> Self {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let [x, y, z] = n.map(|v| v / norm);
        Self::sigma_x().scale(x) + Self::sigma_y().scale(y) + Self::sigma_z().scale(z)
    }

    pub fn scale(self, s: f64) -> Self {
        HermitianMatrix2(self.0 * c(s))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    /// Largest entry-wise deviation of `M²` from the identity.
    pub fn involution_defect(&self) -> f64 {
        (self.0 * self.0 - Matrix2::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Projector onto the eigenspace with eigenvalue `+1` (`outcome = 0`) or
    /// `−1` (`outcome = 1`) of an involutive observable: `(I ± M)/2`.
    pub fn eigenprojector(&self, outcome: usize) -> Result<Matrix2<Complex64>> {
        let d = self.involution_defect();
        if d > INVOLUTION_TOL {
            return Err(Error::NotInvolutive(d));
        }
        let s = if outcome == 0 { 0.5 } else { -0.5 };
        Ok(Matrix2::identity() * c(0.5) + self.0 * c(s))
    }
}

impl std::ops::Add for HermitianMatrix2 {
    type Output = HermitianMatrix2;
    fn add(self, rhs: Self) -> Self {
        HermitianMatrix2(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HermitianMatrix2 {
    type Output = HermitianMatrix2;
    fn sub(self, rhs: Self) -> Self {
        HermitianMatrix2(self.0 - rhs.0)
    }
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Two-qubit density matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4(Matrix4<Complex64>);

impl DensityMatrix4 {
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let herm = (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidProblem(format!(
                "state is not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidProblem(format!("state has trace {tr}")));
        }
        let rho = DensityMatrix4(m);
        let min = rho.min_eigenvalue();
        if min < -EIGEN_TOL {
            return Err(Error::InvalidProblem(format!(
                "state has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(rho)
    }

    /// Normalized `M M†`, a valid state for any nonzero `M`.
    pub fn from_gram(m: Matrix4<Complex64>) -> Result<Self> {
        let g = m * m.adjoint();
        let g = (g + g.adjoint()) * c(0.5);
        let tr = g.trace().re;
        Self::new(g / c(tr))
    }

    /// `|φ+⟩⟨φ+|` with `|φ+⟩ = (|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Self {
        let mut m = Matrix4::zeros();
        for &i in &[0, 3] {
            for &j in &[0, 3] {
                m[(i, j)] = c(0.5);
            }
        }
        DensityMatrix4(m)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// `Tr[ρ (A ⊗ B)]`, real part.
    pub fn expectation(&self, a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
        (self.0 * kron(a, b)).trace().re
    }

    /// Convex combination `Σ w_k ρ_k`.
    pub fn mixture(terms: &[(f64, &DensityMatrix4)]) -> Result<Self> {
        let mut m = Matrix4::zeros();
        for (w, r) in terms {
            m += r.0 * c(*w);
        }
        Self::new(m)
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value })
    }
}

/// `V |φ+⟩⟨φ+| + (1 − V) I/4`.
pub fn white_noise_state(visibility: f64) -> Result<DensityMatrix4> {
    check_unit("V", visibility)?;
    let m = DensityMatrix4::phi_plus().0 * c(visibility)
        + Matrix4::identity() * c((1.0 - visibility) / 4.0);
    DensityMatrix4::new(m)
}

/// `p |φ+⟩⟨φ+| + (1 − p)(|00⟩⟨00| + |11⟩⟨11|)/2`.
pub fn dephasing_state(p: f64) -> Result<DensityMatrix4> {
    check_unit("p", p)?;
    let mut m = DensityMatrix4::phi_plus().0 * c(p);
    m[(0, 0)] += c((1.0 - p) / 2.0);
    m[(3, 3)] += c((1.0 - p) / 2.0);
    DensityMatrix4::new(m)
}

/// Observables `[A0, A1]` and `[B0, B1]`.
pub type Settings = ([HermitianMatrix2; 2], [HermitianMatrix2; 2]);

/// Settings reaching `S = 2√2 V` on the white-noise state:
/// `A0 = σz`, `A1 = σx`, `B_y = (σz ± σx)/√2`.
pub fn chsh_settings_white() -> Settings {
    let (z, x) = (HermitianMatrix2::sigma_z(), HermitianMatrix2::sigma_x());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ([z, x], [(z + x).scale(r), (z - x).scale(r)])
}

/// Settings reaching `S = 2√(1 + p²)` on the dephased state:
/// `B_y = cos χ σz ± sin χ σx` with `χ = arctan p`.
pub fn chsh_settings_dephasing(p: f64) -> Result<Settings> {
    check_unit("p", p)?;
    let (z, x) = (HermitianMatrix2::sigma_z(), HermitianMatrix2::sigma_x());
    let chi = p.atan();
    let (s, co) = chi.sin_cos();
    Ok(([z, x], [z.scale(co) + x.scale(s), z.scale(co) - x.scale(s)]))
}

/// State plus two binary observables per party.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModel {
    state: DensityMatrix4,
    alice: [HermitianMatrix2; 2],
    bob: [HermitianMatrix2; 2],
}

impl QuantumModel {
    pub fn new(state: DensityMatrix4, (alice, bob): Settings) -> Result<Self> {
        for o in alice.iter().chain(bob.iter()) {
            let d = o.involution_defect();
            if d > INVOLUTION_TOL {
                return Err(Error::NotInvolutive(d));
            }
        }
        Ok(QuantumModel { state, alice, bob })
    }

    pub fn state(&self) -> &DensityMatrix4 {
        &self.state
    }

    pub fn alice(&self) -> &[HermitianMatrix2; 2] {
        &self.alice
    }

    pub fn bob(&self) -> &[HermitianMatrix2; 2] {
        &self.bob
    }

    /// Product of Alice's observables along `word` (settings indices).
    pub fn alice_word(&self, word: &[u8]) -> Matrix2<Complex64> {
        word.iter().fold(Matrix2::identity(), |acc, &x| {
            acc * self.alice[x as usize].0
        })
    }

    pub fn bob_word(&self, word: &[u8]) -> Matrix2<Complex64> {
        word.iter()
            .fold(Matrix2::identity(), |acc, &y| acc * self.bob[y as usize].0)
    }

    /// `Re Tr[ρ (a-word ⊗ b-word)]`.
    pub fn moment(&self, alice_word: &[u8], bob_word: &[u8]) -> f64 {
        self.state
            .expectation(&self.alice_word(alice_word), &self.bob_word(bob_word))
    }
}

/// Born-rule behavior `P(ab|xy) = Tr[ρ Π_a^x ⊗ Π_b^y]`.
pub fn behavior_from_model(m: &QuantumModel) -> Result<Behavior> {
    let mut proj_a = [[Matrix2::zeros(); 2]; 2];
    let mut proj_b = [[Matrix2::zeros(); 2]; 2];
    for s in 0..2 {
        for o in 0..2 {
            proj_a[s][o] = m.alice[s].eigenprojector(o)?;
            proj_b[s][o] = m.bob[s].eigenprojector(o)?;
        }
    }
    Ok(Behavior::from_fn(|a, b, x, y| {
        m.state.expectation(&proj_a[x][a], &proj_b[y][b])
    }))
}

/// Noise family applied to `|φ+⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseKind {
    White,
    Dephasing,
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::White => "white",
            NoiseKind::Dephasing => "dephasing",
        }
    }

    /// State together with the CHSH-optimal settings for that noise level.
    pub fn model(&self, param: f64) -> Result<QuantumModel> {
        match self {
            NoiseKind::White => {
                QuantumModel::new(white_noise_state(param)?, chsh_settings_white())
            }
            NoiseKind::Dephasing => {
                QuantumModel::new(dephasing_state(param)?, chsh_settings_dephasing(param)?)
            }
        }
    }

    pub fn behavior(&self, param: f64) -> Result<Behavior> {
        behavior_from_model(&self.model(param)?)
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "white" => Ok(NoiseKind::White),
            "dephasing" => Ok(NoiseKind::Dephasing),
            other => Err(format!(
                "unknown noise kind `{other}` (expected white or dephasing)"
            )),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::chsh_expression;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn white_noise_limits() {
        let r0 = white_noise_state(0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.25 } else { 0.0 };
                assert!(close(r0.matrix()[(i, j)].re, expect, 1e-15));
            }
        }
        let ev = white_noise_state(1.0).unwrap().eigenvalues();
        assert!(close(ev[0], 1.0, 1e-12));
        assert!(ev[1..].iter().all(|e| e.abs() < 1e-12));
        let ev = white_noise_state(0.5).unwrap().eigenvalues();
        for (e, want) in ev.iter().zip([0.625, 0.125, 0.125, 0.125]) {
            assert!(close(*e, want, 1e-12), "{ev:?}");
        }
        assert!(matches!(
            white_noise_state(1.1),
            Err(Error::ParameterOutOfRange { .. })
        ));
        assert!(white_noise_state(-0.1).is_err());
    }

    #[test]
    fn dephasing_limits() {
        assert_eq!(dephasing_state(1.0).unwrap(), DensityMatrix4::phi_plus());
        let r = dephasing_state(0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j && (i == 0 || i == 3) {
                    0.5
                } else {
                    0.0
                };
                assert!(close(r.matrix()[(i, j)].re, expect, 1e-15));
            }
        }
        let r = dephasing_state(0.6).unwrap();
        let (x, z) = (HermitianMatrix2::sigma_x(), HermitianMatrix2::sigma_z());
        assert!(close(r.expectation(x.matrix(), x.matrix()), 0.6, 1e-14));
        assert!(close(r.expectation(z.matrix(), z.matrix()), 1.0, 1e-14));
        assert!(dephasing_state(2.0).is_err());
    }

    #[test]
    fn settings_are_involutive() {
        let (a, b) = chsh_settings_white();
        for o in a.iter().chain(b.iter()) {
            assert!(o.involution_defect() < 1e-15);
        }
        let (a, b) = chsh_settings_dephasing(0.37).unwrap();
        for o in a.iter().chain(b.iter()) {
            assert!(o.involution_defect() < 1e-15);
        }
    }

    #[test]
    fn dephasing_settings_limits() {
        let (_, b) = chsh_settings_dephasing(0.0).unwrap();
        assert_eq!(b[0], HermitianMatrix2::sigma_z());
        assert_eq!(b[1], HermitianMatrix2::sigma_z());
        let (aw, bw) = chsh_settings_white();
        let (ad, bd) = chsh_settings_dephasing(1.0).unwrap();
        assert_eq!(aw, ad);
        for (u, v) in bw.iter().zip(bd.iter()) {
            for (p, q) in u.matrix().iter().zip(v.matrix().iter()) {
                assert!((p - q).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn chsh_values_match_closed_forms() {
        let chsh = chsh_expression();
        for v in [0.3, 0.7, 1.0] {
            let s = chsh
                .evaluate(&NoiseKind::White.behavior(v).unwrap())
                .unwrap();
            assert!(close(s, 2.0 * 2f64.sqrt() * v, 1e-9));
        }
        for p in [0.2, 0.6, 1.0] {
            let s = chsh
                .evaluate(&NoiseKind::Dephasing.behavior(p).unwrap())
                .unwrap();
            assert!(close(s, 2.0 * (1.0 + p * p).sqrt(), 1e-9));
        }
    }

    #[test]
    fn born_rule_hand_values() {
        let b = NoiseKind::White.behavior(1.0).unwrap();
        assert!(close(b.p(0, 0, 0, 0), (2.0 + 2f64.sqrt()) / 8.0, 1e-12));
        let u = NoiseKind::White.behavior(0.0).unwrap();
        assert!(u.table().iter().all(|p| close(*p, 0.25, 1e-15)));
        let d = NoiseKind::Dephasing.behavior(0.6).unwrap();
        assert!(close(d.correlator(0, 0), 0.6f64.atan().cos(), 1e-12));
        assert!(close(d.correlator(0, 0), 0.857_492_925_712_544, 1e-12));
    }

    #[test]
    fn marginals_vanish() {
        for kind in [NoiseKind::White, NoiseKind::Dephasing] {
            for k in 0..=20 {
                let b = kind.behavior(k as f64 / 20.0).unwrap();
                for s in 0..2 {
                    assert!(b.alice_mean(s).abs() < 1e-12);
                    assert!(b.bob_mean(s).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_involutive_observable_rejected() {
        let (mut a, b) = chsh_settings_white();
        a[0] = a[0].scale(0.9);
        let r = QuantumModel::new(white_noise_state(0.5).unwrap(), (a, b));
        assert!(matches!(r, Err(Error::NotInvolutive(_))));
        assert!(a[0].eigenprojector(0).is_err());
    }

    #[test]
    fn invalid_state_rejected() {
        let mut m = DensityMatrix4::phi_plus().matrix().clone_owned();
        m[(0, 0)] += c(0.1);
        assert!(DensityMatrix4::new(m).is_err());
        let mut m = Matrix4::identity() * c(0.5);
        m[(0, 0)] = c(-0.5);
        assert!(DensityMatrix4::new(m).is_err());
    }
}

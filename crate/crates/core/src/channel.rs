//! Parametrized quantum channel, input states and POVMs.
//!
//! The channel is a unitary rotation `U(theta) = exp(-i theta H0)` followed by
//! a fixed Kraus noise map, so the effective operator-sum elements are
//! `Q_k(theta) = A_k U(theta)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkernel::{herm_eig, propagator_from_eig, CMatrix, HermEig, HERMITIAN_TOL};

/// Tolerance for Kraus completeness.
pub const TRACE_PRESERVING_TOL: f64 = 1e-10;
/// Tolerance for POVM completeness.
pub const POVM_COMPLETENESS_TOL: f64 = 1e-10;
/// Imaginary residue in `Tr(M sigma)` above this is a modeling error.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// `theta`-dependent channel: unitary in `theta` followed by fixed Kraus noise.
#[derive(Clone, Debug)]
pub struct ParamChannel {
    hamiltonian: CMatrix,
    kraus: Vec<CMatrix>,
    eig: HermEig,
}

impl ParamChannel {
    pub fn new(hamiltonian: CMatrix, kraus: Vec<CMatrix>) -> Result<Self> {
        let eig = herm_eig(&hamiltonian)?;
        let d = hamiltonian.dim();
        if kraus.is_empty() {
            return Err(Error::NotTracePreserving(1.0));
        }
        let mut completeness = CMatrix::zeros(d);
        for a in &kraus {
            if a.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: a.dim() });
            }
            completeness = &completeness + &(&a.adjoint() * a);
        }
        let defect = completeness.max_abs_diff(&CMatrix::identity(d));
        if defect > TRACE_PRESERVING_TOL {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(Self { hamiltonian, kraus, eig })
    }

    /// Noiseless channel: the unitary alone.
    pub fn unitary(hamiltonian: CMatrix) -> Result<Self> {
        let d = hamiltonian.dim();
        Self::new(hamiltonian, vec![CMatrix::identity(d)])
    }

    /// Unitary followed by qubit amplitude damping with probability `gamma`.
    pub fn amplitude_damped(hamiltonian: CMatrix, gamma: f64) -> Result<Self> {
        Self::new(hamiltonian, amplitude_damping(gamma)?)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn unitary_at(&self, theta: f64) -> CMatrix {
        propagator_from_eig(&self.eig, theta)
    }

    /// Effective Kraus elements `A_k U(theta)`.
    pub fn effective_kraus(&self, theta: f64) -> Vec<CMatrix> {
        let u = self.unitary_at(theta);
        self.kraus.iter().map(|a| a * &u).collect()
    }

    fn check_dim(&self, rho: &CMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: rho.dim() });
        }
        Ok(())
    }

    fn apply_noise(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim());
        for a in &self.kraus {
            out = &out + &a.sandwich(x);
        }
        out.hermitian_part()
    }

    /// Output state `sigma(theta) = sum_k Q_k rho Q_k^H`.
    pub fn evolve(&self, rho: &CMatrix, theta: f64) -> Result<CMatrix> {
        self.check_dim(rho)?;
        let rotated = self.unitary_at(theta).sandwich(rho);
        Ok(self.apply_noise(&rotated))
    }

    /// Analytic derivative `d sigma / d theta = sum_k A_k (-i [H0, U rho U^H]) A_k^H`.
    pub fn evolve_derivative(&self, rho: &CMatrix, theta: f64) -> Result<CMatrix> {
        self.check_dim(rho)?;
        let rotated = self.unitary_at(theta).sandwich(rho);
        let generator = self.hamiltonian.commutator(&rotated).scale(Complex64::new(0.0, -1.0));
        Ok(self.apply_noise(&generator))
    }

    /// `(sigma, dsigma)` sharing one propagator evaluation.
    pub fn evolve_with_derivative(&self, rho: &CMatrix, theta: f64) -> Result<(CMatrix, CMatrix)> {
        self.check_dim(rho)?;
        let rotated = self.unitary_at(theta).sandwich(rho);
        let generator = self.hamiltonian.commutator(&rotated).scale(Complex64::new(0.0, -1.0));
        Ok((self.apply_noise(&rotated), self.apply_noise(&generator)))
    }
}

/// Qubit amplitude damping Kraus pair `{diag(1, sqrt(1-g)), sqrt(g)|0><1|}`.
pub fn amplitude_damping(gamma: f64) -> Result<Vec<CMatrix>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidGamma(gamma));
    }
    let a1 = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, (1.0 - gamma).sqrt()]])?;
    let a2 = CMatrix::from_real_rows(&[vec![0.0, gamma.sqrt()], vec![0.0, 0.0]])?;
    Ok(vec![a1, a2])
}

fn real_unit_vector(angle: f64) -> [Complex64; 2] {
    [Complex64::new(angle.cos(), 0.0), Complex64::new(angle.sin(), 0.0)]
}

/// Pure qubit state `cos(beta)|0> + sin(beta)|1>` as a density matrix.
pub fn qubit_input(beta: f64) -> CMatrix {
    CMatrix::outer(&real_unit_vector(beta))
}

/// Two-outcome projective measurement `{|z><z|, I - |z><z|}` with
/// `|z> = cos(phi)|0> + sin(phi)|1>`.
pub fn qubit_povm(phi: f64) -> Vec<CMatrix> {
    let m1 = CMatrix::outer(&real_unit_vector(phi));
    let m2 = &CMatrix::identity(2) - &m1;
    vec![m1, m2]
}

fn povm_defect(povm: &[CMatrix], dim: usize) -> Result<f64> {
    let mut sum = CMatrix::zeros(dim);
    for m in povm {
        if m.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
        }
        sum = &sum + m;
    }
    Ok(sum.max_abs_diff(&CMatrix::identity(dim)))
}

fn trace_product_real(m: &CMatrix, x: &CMatrix) -> Result<f64> {
    let n = m.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += m.get(i, k) * x.get(k, i);
        }
    }
    if acc.im.abs() > IMAG_RESIDUE_TOL {
        return Err(Error::ComplexProbability(acc.im));
    }
    Ok(acc.re)
}

/// Outcome probabilities `p_i = Tr(M_i sigma)`, clamped to `[0, 1]`.
pub fn outcome_probs(sigma: &CMatrix, povm: &[CMatrix]) -> Result<Vec<f64>> {
    let defect = povm_defect(povm, sigma.dim())?;
    if defect > POVM_COMPLETENESS_TOL {
        return Err(Error::IncompletePovm(defect));
    }
    povm.iter().map(|m| trace_product_real(m, sigma).map(|p| p.clamp(0.0, 1.0))).collect()
}

/// Derivatives `d p_i / d theta = Tr(M_i dsigma)`.
pub fn outcome_prob_gradient(dsigma: &CMatrix, povm: &[CMatrix]) -> Result<Vec<f64>> {
    let defect = povm_defect(povm, dsigma.dim())?;
    if defect > POVM_COMPLETENESS_TOL {
        return Err(Error::IncompletePovm(defect));
    }
    povm.iter().map(|m| trace_product_real(m, dsigma)).collect()
}

/// Gradient of the outcome probabilities with respect to `theta`.
pub fn prob_gradient(ch: &ParamChannel, rho: &CMatrix, povm: &[CMatrix], theta: f64) -> Result<Vec<f64>> {
    let dsigma = ch.evolve_derivative(rho, theta)?;
    outcome_prob_gradient(&dsigma, povm)
}

/// A family of input states labelled by `beta`.
#[derive(Clone, Debug)]
pub struct InputFamily {
    betas: Vec<f64>,
    states: Vec<CMatrix>,
}

impl InputFamily {
    pub fn new(betas: Vec<f64>, states: Vec<CMatrix>) -> Result<Self> {
        if betas.len() != states.len() || betas.is_empty() {
            return Err(Error::InvalidGrid(format!("{} input labels for {} states", betas.len(), states.len())));
        }
        for rho in &states {
            crate::matkernel::check_density(rho, 1e-12)?;
        }
        Ok(Self { betas, states })
    }

    /// Pure qubit inputs at the given angles.
    pub fn qubit(betas: &[f64]) -> Result<Self> {
        Self::new(betas.to_vec(), betas.iter().map(|&b| qubit_input(b)).collect())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }
}

/// A family of POVMs labelled by `phi`.
#[derive(Clone, Debug)]
pub struct PovmFamily {
    phis: Vec<f64>,
    povms: Vec<Vec<CMatrix>>,
}

impl PovmFamily {
    pub fn new(phis: Vec<f64>, povms: Vec<Vec<CMatrix>>) -> Result<Self> {
        if phis.len() != povms.len() || phis.is_empty() {
            return Err(Error::InvalidGrid(format!("{} POVM labels for {} POVMs", phis.len(), povms.len())));
        }
        for povm in &povms {
            let dim = povm.first().map(CMatrix::dim).ok_or(Error::IncompletePovm(1.0))?;
            for (index, m) in povm.iter().enumerate() {
                if !m.is_hermitian(HERMITIAN_TOL) {
                    return Err(Error::NotHermitian(m.hermiticity_defect()));
                }
                let min_eig = herm_eig(m)?.min();
                if min_eig < -1e-12 {
                    return Err(Error::PovmNotPsd { index, min_eig });
                }
            }
            let defect = povm_defect(povm, dim)?;
            if defect > 1e-12 {
                return Err(Error::IncompletePovm(defect));
            }
        }
        Ok(Self { phis, povms })
    }

    pub fn qubit(phis: &[f64]) -> Result<Self> {
        Self::new(phis.to_vec(), phis.iter().map(|&p| qubit_povm(p)).collect())
    }

    pub fn len(&self) -> usize {
        self.povms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.povms.is_empty()
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn povms(&self) -> &[Vec<CMatrix>] {
        &self.povms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn h0() -> CMatrix {
        CMatrix::from_real_rows(&[vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], vec![FRAC_1_SQRT_2, -FRAC_1_SQRT_2]]).unwrap()
    }

    fn real(rows: &[Vec<f64>]) -> CMatrix {
        CMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn inputs() {
        assert_eq!(qubit_input(0.0), real(&[vec![1.0, 0.0], vec![0.0, 0.0]]));
        assert!(qubit_input(FRAC_PI_2).max_abs_diff(&CMatrix::diag_real(&[0.0, 1.0])) < 1e-16);
        assert!(qubit_input(FRAC_PI_4).max_abs_diff(&real(&[vec![0.5, 0.5], vec![0.5, 0.5]])) < 1e-15);
        for &b in &[0.1, 1.3, 2.9] {
            let rho = qubit_input(b);
            assert!((&rho * &rho).max_abs_diff(&rho) < 1e-12);
        }
    }

    #[test]
    fn povms() {
        let p0 = qubit_povm(0.0);
        assert_eq!(p0[0], CMatrix::diag_real(&[1.0, 0.0]));
        assert_eq!(p0[1], CMatrix::diag_real(&[0.0, 1.0]));
        let p = qubit_povm(FRAC_PI_4);
        assert!(p[0].max_abs_diff(&real(&[vec![0.5, 0.5], vec![0.5, 0.5]])) < 1e-15);
        for &phi in &[0.2, 1.7, 3.1] {
            let p = qubit_povm(phi);
            assert!((&p[0] + &p[1]).max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn damping_operators() {
        let k0 = amplitude_damping(0.0).unwrap();
        assert_eq!(k0[0], CMatrix::identity(2));
        assert_eq!(k0[1], CMatrix::zeros(2));
        let k1 = amplitude_damping(1.0).unwrap();
        assert_eq!(k1[0], CMatrix::diag_real(&[1.0, 0.0]));
        assert_eq!(k1[1], real(&[vec![0.0, 1.0], vec![0.0, 0.0]]));
        let k = amplitude_damping(0.25).unwrap();
        assert_eq!(k[0], CMatrix::diag_real(&[1.0, 0.75f64.sqrt()]));
        assert_eq!(k[1], real(&[vec![0.0, 0.5], vec![0.0, 0.0]]));
        assert_eq!(amplitude_damping(-0.1).unwrap_err(), Error::InvalidGamma(-0.1));
        assert!(amplitude_damping(1.5).is_err());
    }

    #[test]
    fn channel_rejects_non_trace_preserving() {
        let bad = vec![CMatrix::diag_real(&[1.0, 0.5])];
        assert!(matches!(ParamChannel::new(h0(), bad), Err(Error::NotTracePreserving(_))));
        assert!(matches!(ParamChannel::new(h0(), vec![CMatrix::identity(3)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn evolve_examples() {
        let rho = qubit_input(0.7);
        let ch0 = ParamChannel::amplitude_damped(h0(), 0.0).unwrap();
        assert!(ch0.evolve(&rho, 0.0).unwrap().max_abs_diff(&rho) < 1e-15);

        let ch1 = ParamChannel::amplitude_damped(h0(), 1.0).unwrap();
        for &theta in &[0.0, 0.4, 2.2] {
            let sigma = ch1.evolve(&rho, theta).unwrap();
            assert!(sigma.max_abs_diff(&CMatrix::diag_real(&[1.0, 0.0])) < 1e-15);
        }

        let ch = ParamChannel::amplitude_damped(h0(), 0.25).unwrap();
        let sigma = ch.evolve(&CMatrix::diag_real(&[0.0, 1.0]), 0.0).unwrap();
        assert!(sigma.max_abs_diff(&CMatrix::diag_real(&[0.25, 0.75])) < 1e-15);

        assert!(ch.evolve(&CMatrix::identity(3), 0.0).is_err());
    }

    #[test]
    fn derivative_commutator_example() {
        let ch = ParamChannel::amplitude_damped(h0(), 0.0).unwrap();
        let d = ch.evolve_derivative(&qubit_input(0.0), 0.0).unwrap();
        // [H0, |0><0|] = (1/sqrt2) [[0, -1], [1, 0]], times -i.
        let s = FRAC_1_SQRT_2;
        let expect = CMatrix::from_rows(&[
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, s)],
            vec![Complex64::new(0.0, -s), Complex64::new(0.0, 0.0)],
        ])
        .unwrap();
        assert!(d.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn derivative_is_traceless_and_matches_finite_difference() {
        let ch = ParamChannel::amplitude_damped(h0(), 0.25).unwrap();
        let rho = qubit_input(1.1);
        let h = 1e-5;
        for &theta in &[0.35, 0.9, 1.2] {
            let d = ch.evolve_derivative(&rho, theta).unwrap();
            assert!(d.trace().norm() < 1e-12);
            let fd = (&ch.evolve(&rho, theta + h).unwrap() - &ch.evolve(&rho, theta - h).unwrap()).scale_real(0.5 / h);
            assert!(d.max_abs_diff(&fd) < 1e-8);
        }
    }

    #[test]
    fn probability_examples() {
        let ch = ParamChannel::amplitude_damped(h0(), 0.0).unwrap();
        let rho = qubit_input(0.0);
        let povm = qubit_povm(0.0);
        let p = outcome_probs(&ch.evolve(&rho, 0.0).unwrap(), &povm).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        for &theta in &[0.3, 0.8, 1.4] {
            let p = outcome_probs(&ch.evolve(&rho, theta).unwrap(), &povm).unwrap();
            assert!((p[0] - (1.0 - theta.sin().powi(2) / 2.0)).abs() < 1e-14);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let g = prob_gradient(&ch, &rho, &povm, theta).unwrap();
            assert!((g[0] + theta.sin() * theta.cos()).abs() < 1e-14);
            assert!(g.iter().sum::<f64>().abs() < 1e-12);
        }
        let mixed = CMatrix::identity(2).scale_real(0.5);
        let p = outcome_probs(&mixed, &qubit_povm(0.77)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn incomplete_povm_is_rejected() {
        let sigma = CMatrix::identity(2).scale_real(0.5);
        let povm = vec![CMatrix::diag_real(&[1.0, 0.0])];
        assert!(matches!(outcome_probs(&sigma, &povm), Err(Error::IncompletePovm(_))));
    }

    #[test]
    fn families_validate() {
        assert!(InputFamily::qubit(&[0.0, 1.0]).is_ok());
        assert!(InputFamily::new(vec![0.0], vec![CMatrix::diag_real(&[0.6, 0.6])]).is_err());
        assert!(PovmFamily::qubit(&[0.0, 0.5]).is_ok());
        let not_psd = vec![CMatrix::diag_real(&[1.5, 0.0]), CMatrix::diag_real(&[-0.5, 1.0])];
        assert!(matches!(PovmFamily::new(vec![0.0], vec![not_psd]), Err(Error::PovmNotPsd { index: 1, .. })));
        assert!(InputFamily::qubit(&[]).is_err());
    }
}

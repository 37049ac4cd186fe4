use crate::channel::{dilation_to_kraus, UnitaryDilation};
use crate::code::{build_decoder, QuantumZeroErrorCode};
use crate::prelude::*;
use crate::tensor::{max_abs, schmidt, Bipartition, StateVector};

/// Eigenvalues closer than this are one degenerate block.
const DEGENERACY: f64 = 1e-8;

/// How far the dilated output of a code state is from the Schmidt form
/// `Σ_j √λ_j (V_j a) ⊗ ζ_j` predicted by the decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtStructureReport {
    /// Largest gap between sorted Schmidt coefficients and `√λ_j`.
    pub coefficient_error: f64,
    /// Largest gap between system-side projectors, per degenerate group.
    pub projector_error: f64,
    /// Deviation of the environment vectors' Gram matrix from `diag(λ)`.
    pub environment_error: f64,
    pub reconstruction_error: f64,
}

impl SchmidtStructureReport {
    pub fn residual(&self) -> f64 {
        self.coefficient_error.max(self.projector_error).max(self.environment_error).max(self.reconstruction_error)
    }
}

/// Compares the Schmidt decomposition of `U(ψ ⊗ ω)` across system |
/// environment with the decoder's blocks. Degenerate `λ` groups are
/// compared through their projectors only.
pub fn schmidt_structure_check(
    qc: &QuantumZeroErrorCode,
    dilation: &UnitaryDilation,
    psi: &StateVector,
) -> Result<SchmidtStructureReport> {
    let ch = dilation_to_kraus(dilation)?;
    let ch = ch.with_spaces(qc.basis[0].space().clone(), qc.basis[0].space().clone())?;
    let dec = build_decoder(qc, &ch)?;
    let q = qc.isometry();
    let a = q.ad_mul(psi.amplitudes());
    let outside = (&q * &a - psi.amplitudes()).norm();
    if outside > 1e-8 {
        return Err(Error::OutsideMessageSpace { outside });
    }
    let state = dilation.evolve(psi)?;
    let data = schmidt(&state, &Bipartition::split_at(1, 2))?;

    let expected: Vec<f64> = dec.eigenvalues.iter().map(|l| l.sqrt()).collect();
    let len = expected.len().max(data.coefficients.len());
    let coefficient_error = (0..len)
        .map(|k| {
            let x = data.coefficients.get(k).copied().unwrap_or(0.0);
            let y = expected.get(k).copied().unwrap_or(0.0);
            (x - y).abs()
        })
        .fold(0.0, f64::max);

    let (ds, dy) = (dilation.system_dim(), dilation.env_dim());
    let s = CMatrix::from_fn(ds, dy, |o, e| state.amplitudes()[o * dy + e]);
    let systems: Vec<CVector> = dec.isometries.iter().map(|v| v * &a).collect();
    let envs: Vec<CVector> = systems.iter().map(|u| s.transpose() * u.conjugate()).collect();

    let mut environment_error: f64 = 0.0;
    for (i, zi) in envs.iter().enumerate() {
        for (j, zj) in envs.iter().enumerate() {
            let target = if i == j { dec.eigenvalues[i] } else { 0.0 };
            environment_error = environment_error.max((zi.dotc(zj) - Complex64::new(target, 0.0)).norm());
        }
    }

    let mut rebuilt = CVector::zeros(ds * dy);
    for (u, z) in systems.iter().zip(&envs) {
        rebuilt += u.kronecker(z);
    }
    let reconstruction_error = (rebuilt - state.amplitudes()).norm();

    let mut projector_error: f64 = 0.0;
    let mut start = 0;
    while start < expected.len() {
        let mut end = start + 1;
        while end < expected.len() && (dec.eigenvalues[start] - dec.eigenvalues[end]).abs() < DEGENERACY {
            end += 1;
        }
        let mut from_svd = CMatrix::zeros(ds, ds);
        let mut from_blocks = CMatrix::zeros(ds, ds);
        for (k, z) in systems.iter().enumerate().take(end).skip(start) {
            if let Some(l) = data.left.get(k) {
                from_svd.gerc(ONE, l.amplitudes(), l.amplitudes(), ONE);
            }
            from_blocks.gerc(ONE, z, z, ONE);
        }
        projector_error = projector_error.max(max_abs(&(from_svd - from_blocks)));
        start = end;
    }

    Ok(SchmidtStructureReport { coefficient_error, projector_error, environment_error, reconstruction_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{kraus_to_dilation, KrausChannel};
    use crate::tensor::{random_state, seeded_rng, HilbertFactorization};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn setup(p: f64) -> (KrausChannel, QuantumZeroErrorCode) {
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let z1 = z.kronecker(&CMatrix::identity(2, 2));
        let space = HilbertFactorization::uniform(2, 2);
        let ch = KrausChannel::new(vec![CMatrix::identity(4, 4).scale(p.sqrt()), z1.scale((1.0 - p).sqrt())])
            .unwrap()
            .with_spaces(space.clone(), space.clone())
            .unwrap();
        let h = 0.5f64.sqrt();
        let q0 = StateVector::new(CVector::from_vec(vec![c(h), ZERO, c(h), ZERO]), space.clone()).unwrap();
        let q1 = StateVector::new(CVector::from_vec(vec![ZERO, c(h), ZERO, c(h)]), space).unwrap();
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(p), c(1.0 - p)]));
        (ch, QuantumZeroErrorCode { basis: vec![q0, q1], shared_matrix: m, rate: 0.5, uses: 2, groups: vec![] })
    }

    #[test]
    fn unitary_channel_single_term() {
        let mut rng = seeded_rng(1);
        let v = crate::tensor::random_unitary(4, &mut rng);
        let space = HilbertFactorization::uniform(2, 2);
        let ch = KrausChannel::unitary(v).with_spaces(space.clone(), space.clone()).unwrap();
        let code = crate::code::greedy_classical_code(&ch, None).unwrap();
        let qc = crate::code::build_quantum_code(&code, &ch, 2).unwrap();
        let dil = kraus_to_dilation(&ch).unwrap();
        let psi = qc.encode(&CVector::from_vec(vec![c(0.8), c(0.6)])).unwrap();
        let state = dil.evolve(&psi).unwrap();
        let data = schmidt(&state, &Bipartition::split_at(1, 2)).unwrap();
        assert_eq!(data.coefficients.len(), 1);
        assert!(schmidt_structure_check(&qc, &dil, &psi).unwrap().residual() < 1e-10);
    }

    #[test]
    fn dephasing_coefficients() {
        let p = 0.3;
        let (ch, qc) = setup(p);
        let dil = kraus_to_dilation(&ch).unwrap();
        let mut rng = seeded_rng(2);
        let a = random_state(&HilbertFactorization::flat(2), &mut rng);
        let psi = qc.encode(a.amplitudes()).unwrap();
        let data = schmidt(&dil.evolve(&psi).unwrap(), &Bipartition::split_at(1, 2)).unwrap();
        assert!((data.coefficients[0] - 0.7f64.sqrt()).abs() < 1e-12);
        assert!((data.coefficients[1] - 0.3f64.sqrt()).abs() < 1e-12);
        assert!(schmidt_structure_check(&qc, &dil, &psi).unwrap().residual() < 1e-10);
    }

    #[test]
    fn degenerate_blocks_match_as_projectors() {
        let (ch, qc) = setup(0.5);
        let dil = kraus_to_dilation(&ch).unwrap();
        let psi = qc.encode(&CVector::from_vec(vec![c(0.6), Complex64::new(0.0, 0.8)])).unwrap();
        let report = schmidt_structure_check(&qc, &dil, &psi).unwrap();
        assert!(report.coefficient_error < 1e-12);
        assert!(report.residual() < 1e-10);
    }

    #[test]
    fn state_outside_code_rejected() {
        let (ch, qc) = setup(0.3);
        let dil = kraus_to_dilation(&ch).unwrap();
        let outside =
            StateVector::new(CVector::from_vec(vec![ZERO, ZERO, ONE, ZERO]), HilbertFactorization::uniform(2, 2))
                .unwrap();
        assert!(schmidt_structure_check(&qc, &dil, &outside).is_err());
    }
}

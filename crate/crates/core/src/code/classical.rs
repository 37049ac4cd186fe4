use crate::channel::KrausChannel;
use crate::code::{columns_of, uses_of, GramBlocks, KlReport};
use crate::prelude::*;
use crate::tensor::StateVector;

/// Orthonormal codewords whose channel outputs have orthogonal supports.
#[derive(Debug, Clone)]
pub struct ClassicalZeroErrorCode {
    pub codewords: Vec<StateVector>,
    /// `M(k)_ij = ⟨c_k|K_i†K_j|c_k⟩`, one `d_Y×d_Y` matrix per codeword.
    pub kl_matrices: Vec<CMatrix>,
    /// Bits per channel use, `(1/n) log₂ ℓ`.
    pub rate: f64,
    pub uses: usize,
    /// Dimension of `span{K_i†K_j|c_k⟩}` when construction stopped.
    pub span_dim: usize,
}

impl ClassicalZeroErrorCode {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }
}

/// Orthonormal basis grown one vector at a time.
struct Span {
    basis: CMatrix,
    rank: usize,
    /// `1 − Σ_q |q_i|²`: squared distance of `e_i` from the span.
    residual: Vec<f64>,
}

impl Span {
    fn new(dim: usize) -> Self {
        Self { basis: CMatrix::zeros(dim, dim), rank: 0, residual: vec![1.0; dim] }
    }

    fn project_out(&self, v: &mut CVector) {
        if self.rank == 0 {
            return;
        }
        let q = self.basis.columns(0, self.rank);
        for _ in 0..2 {
            let coeffs = q.ad_mul(v);
            v.gemv(-ONE, &q, &coeffs, ONE);
        }
    }

    /// Adds the component of `v` outside the span; returns whether it grew.
    fn absorb(&mut self, mut v: CVector) -> bool {
        let scale = v.norm();
        if scale == 0.0 || self.rank == self.basis.ncols() {
            return false;
        }
        self.project_out(&mut v);
        let n = v.norm();
        if n <= 1e-9 * scale {
            return false;
        }
        v.unscale_mut(n);
        for (r, z) in self.residual.iter_mut().zip(v.iter()) {
            *r -= z.norm_sqr();
        }
        self.basis.set_column(self.rank, &v);
        self.rank += 1;
        true
    }

    /// Basis vector farthest from the span, if the complement is nonempty.
    fn farthest_basis_vector(&self) -> Option<usize> {
        let dim = self.residual.len();
        let (best, &value) = self.residual.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        // A nonempty complement of dimension c forces max residual ≥ c/dim.
        (self.rank < dim && value > 0.5 / dim as f64).then_some(best)
    }
}

/// Greedy zero-error classical code.
///
/// Starting from `|0⟩`, each new codeword is the computational basis vector
/// farthest from `span{K_i†K_j|c_k⟩}`, orthogonalized against that span.
/// Construction stops when the span fills the input space or `max_size`
/// codewords exist. Every codeword adds at most `d_Y²` dimensions, so the
/// code has at least `⌈d/d_Y²⌉` codewords.
pub fn greedy_classical_code(ch: &KrausChannel, max_size: Option<usize>) -> Result<ClassicalZeroErrorCode> {
    if ch.completeness_residual() > crate::STRUCTURAL_TOL {
        return Err(Error::NotTracePreserving { residual: ch.completeness_residual() });
    }
    let dim = ch.input_dim();
    let limit = max_size.unwrap_or(usize::MAX).max(1);
    let products: Vec<CMatrix> = ch.error_products().into_iter().flatten().collect();
    let mut span = Span::new(dim);
    let mut codewords = Vec::new();
    let mut next = {
        let mut v = CVector::zeros(dim);
        v[0] = ONE;
        v
    };
    loop {
        for e in &products {
            span.absorb(e * &next);
        }
        codewords.push(StateVector::new(next, ch.input_space().clone())?);
        if codewords.len() >= limit {
            break;
        }
        let Some(pivot) = span.farthest_basis_vector() else { break };
        let mut v = CVector::zeros(dim);
        v[pivot] = ONE;
        span.project_out(&mut v);
        let n = v.norm();
        next = v.unscale(n);
    }
    let gram = GramBlocks::new(ch.operators(), &columns_of(&codewords))?;
    let kl_matrices = (0..codewords.len()).map(|k| gram.diagonal_matrix(k)).collect();
    let uses = uses_of(ch);
    Ok(ClassicalZeroErrorCode {
        rate: (codewords.len() as f64).log2() / uses as f64,
        codewords,
        kl_matrices,
        uses,
        span_dim: span.rank,
    })
}

/// `max_{k≠k', i, j} |⟨c_k|K_i†K_j|c_k'⟩|`.
pub fn verify_classical(code: &ClassicalZeroErrorCode, ch: &KrausChannel, tol: f64) -> Result<KlReport> {
    if code.codewords.len() < 2 {
        return Ok(KlReport::new(0.0, tol));
    }
    let gram = GramBlocks::new(ch.operators(), &columns_of(&code.codewords))?;
    Ok(KlReport::new(gram.off_diagonal_residual(), tol))
}

/// `max_{k≠k'} Tr[Λ(c_k) Λ(c_k')]`, zero exactly when distinct codewords
/// have orthogonal output supports.
pub fn distinguishability_residual(code: &ClassicalZeroErrorCode, ch: &KrausChannel) -> Result<f64> {
    let basis = columns_of(&code.codewords);
    // Output vectors K_j|c_k⟩ grouped by codeword.
    let images: Vec<CMatrix> = ch.operators().iter().map(|k| k * &basis).collect();
    let l = code.codewords.len();
    let mut worst: f64 = 0.0;
    for a in 0..l {
        for b in (a + 1)..l {
            let mut overlap = 0.0;
            for ki in &images {
                for kj in &images {
                    overlap += ki.column(a).dotc(&kj.column(b)).norm_sqr();
                }
            }
            worst = worst.max(overlap);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{FiniteMemoryChannel, MultiUseFamily};
    use crate::tensor::HilbertFactorization;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn noiseless_code_is_full_basis() {
        let mut rng = crate::tensor::seeded_rng(1);
        let u = crate::tensor::random_unitary(8, &mut rng);
        let space = HilbertFactorization::uniform(2, 3);
        let ch = KrausChannel::unitary(u).with_spaces(space.clone(), space).unwrap();
        let code = greedy_classical_code(&ch, None).unwrap();
        assert_eq!(code.len(), 8);
        assert!((code.rate - 1.0).abs() < 1e-15);
        assert!(verify_classical(&code, &ch, 1e-9).unwrap().passes);
    }

    #[test]
    fn dephasing_keeps_both_basis_states() {
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let ch = KrausChannel::new(vec![CMatrix::identity(2, 2).scale(0.5f64.sqrt()), z.scale(0.5f64.sqrt())]).unwrap();
        let code = greedy_classical_code(&ch, None).unwrap();
        assert_eq!(code.len(), 2);
        // Hand oracle: Z is diagonal, so ⟨0|K_i†K_j|1⟩ = 0 for all i, j.
        assert_eq!(code.codewords[0].amplitudes()[0], ONE);
        assert!((code.codewords[1].amplitudes()[1].norm() - 1.0).abs() < 1e-15);
        assert_eq!(verify_classical(&code, &ch, 1e-12).unwrap().residual, 0.0);
        // M(0) = diag-free: ⟨0|K_i†K_j|0⟩ = ½ for all i, j.
        for z in code.kl_matrices[0].iter() {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn reset_admits_one_codeword() {
        let ch = KrausChannel::new(vec![
            CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]),
            CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]),
        ])
        .unwrap();
        let code = greedy_classical_code(&ch, None).unwrap();
        assert_eq!(code.len(), 1);
        // Exhaustive pair check: K_0†K_1 = |0⟩⟨1| links the only two basis states.
        let prods = ch.error_products();
        assert_eq!(prods[0][1][(0, 1)], ONE);
        assert_eq!(verify_classical(&code, &ch, 0.0).unwrap().residual, 0.0);
    }

    #[test]
    fn plus_minus_under_dephasing_fails() {
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let ch = KrausChannel::new(vec![CMatrix::identity(2, 2).scale(0.5f64.sqrt()), z.scale(0.5f64.sqrt())]).unwrap();
        let h = 0.5f64.sqrt();
        let code = ClassicalZeroErrorCode {
            codewords: vec![
                StateVector::from_amplitudes(vec![c(h), c(h)]),
                StateVector::from_amplitudes(vec![c(h), c(-h)]),
            ],
            kl_matrices: Vec::new(),
            rate: 1.0,
            uses: 1,
            span_dim: 0,
        };
        let report = verify_classical(&code, &ch, 1e-9).unwrap();
        assert!((report.residual - 0.5).abs() < 1e-15);
        assert!(!report.passes);
    }

    #[test]
    fn memory_channel_meets_bound_and_fills_span() {
        let fam = FiniteMemoryChannel::random(2, 2, 3);
        let ch = fam.channel(6).unwrap();
        let code = greedy_classical_code(&ch, None).unwrap();
        assert!(code.len() >= 64 / 4);
        assert_eq!(code.span_dim, 64);
        assert!(verify_classical(&code, &ch, 1e-9).unwrap().passes);
        assert!(distinguishability_residual(&code, &ch).unwrap() < 1e-9);
        for m in &code.kl_matrices {
            assert!((m.trace() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn max_size_stops_early() {
        let fam = FiniteMemoryChannel::random(2, 2, 4);
        let ch = fam.channel(4).unwrap();
        assert_eq!(greedy_classical_code(&ch, Some(2)).unwrap().len(), 2);
    }
}

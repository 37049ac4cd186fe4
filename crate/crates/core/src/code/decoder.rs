use crate::channel::KrausChannel;
use crate::code::quantum::min_eigenvalue;
use crate::code::QuantumZeroErrorCode;
use crate::prelude::*;
use crate::tensor::{hermitian_eigen, polar_decompose, DensityOperator, HilbertFactorization};
use rand::Rng;

/// Eigenvalues at or below this are treated as absent blocks.
const BLOCK_CUTOFF: f64 = 1e-12;

/// Recovery data for a quantum zero-error code.
///
/// With `M = O diag(λ) O†`, the rotated operators `F_j = Σ_i O_ij K_i` map
/// the code space to mutually orthogonal copies `√λ_j V_j`, where each
/// `V_j` (output × ℓ) is an isometry from logical coordinates. The block
/// unitaries `U_j` act on the code space as `V_j = U_j Q`.
#[derive(Debug, Clone)]
pub struct BlockDecoder {
    pub rotation: CMatrix,
    /// Descending, one per retained block.
    pub eigenvalues: Vec<f64>,
    /// Kraus-rotation column index behind each retained block.
    pub block_index: Vec<usize>,
    pub isometries: Vec<CMatrix>,
    pub rotated_kraus: Vec<CMatrix>,
    /// Code isometry `Q` (input × ℓ).
    pub code: CMatrix,
    pub input_space: HilbertFactorization,
}

/// One measurement outcome of the decoder.
#[derive(Debug, Clone)]
pub struct DecodeBranch {
    pub outcome: usize,
    pub probability: f64,
    /// Recovered state in logical coordinates (ℓ×ℓ).
    pub logical: DensityOperator,
}

impl DecodeBranch {
    /// Recovered state embedded back into the channel input space.
    pub fn embedded(&self, dec: &BlockDecoder) -> DensityOperator {
        let m = &dec.code * self.logical.matrix() * dec.code.adjoint();
        DensityOperator::new_unchecked(m, dec.input_space.clone())
    }
}

/// Builds the block decoder of `qc` for `ch`.
pub fn build_decoder(qc: &QuantumZeroErrorCode, ch: &KrausChannel) -> Result<BlockDecoder> {
    let m = &qc.shared_matrix;
    let dy = ch.env_dim();
    if m.shape() != (dy, dy) {
        return Err(Error::DimensionMismatch { expected: dy, found: m.nrows() });
    }
    let min = min_eigenvalue(m);
    if min < -1e-9 {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let (values, rotation) = hermitian_eigen(m);
    let q = qc.isometry();
    let rotated_kraus: Vec<CMatrix> = (0..dy)
        .map(|j| {
            let mut f = CMatrix::zeros(ch.output_dim(), ch.input_dim());
            for (i, k) in ch.operators().iter().enumerate() {
                f += k * rotation[(i, j)];
            }
            f
        })
        .collect();
    let mut eigenvalues = Vec::new();
    let mut block_index = Vec::new();
    let mut isometries = Vec::new();
    for (j, &lambda) in values.iter().enumerate() {
        if lambda <= BLOCK_CUTOFF {
            continue;
        }
        let image = &rotated_kraus[j] * &q;
        isometries.push(polar_decompose(&image, None).unitary);
        eigenvalues.push(lambda);
        block_index.push(j);
    }
    Ok(BlockDecoder {
        rotation,
        eigenvalues,
        block_index,
        isometries,
        rotated_kraus,
        code: q,
        input_space: qc.basis[0].space().clone(),
    })
}

impl BlockDecoder {
    pub fn logical_dim(&self) -> usize {
        self.code.ncols()
    }

    /// Block projector `P_j = V_j V_j†` (output-dimension squared; avoid on
    /// large outputs).
    pub fn projector(&self, j: usize) -> CMatrix {
        &self.isometries[j] * self.isometries[j].adjoint()
    }

    /// `max |V_i† V_j − δ_ij I|`, equivalently `P_i P_j = δ_ij P_j`.
    pub fn block_orthogonality(&self) -> f64 {
        let l = self.logical_dim();
        let mut worst: f64 = 0.0;
        for (i, vi) in self.isometries.iter().enumerate() {
            for (j, vj) in self.isometries.iter().enumerate() {
                let mut g = vi.adjoint() * vj;
                if i == j {
                    g -= CMatrix::identity(l, l);
                }
                worst = worst.max(crate::tensor::max_abs(&g));
            }
        }
        worst
    }

    /// `max |⟨q_a|F_i†F_j|q_b⟩ − δ_ab δ_ij λ_j|` over all rotated operators.
    pub fn orthogonality_residual(&self) -> f64 {
        let images: Vec<CMatrix> = self.rotated_kraus.iter().map(|f| f * &self.code).collect();
        let l = self.logical_dim();
        let mut worst: f64 = 0.0;
        for (i, fi) in images.iter().enumerate() {
            for (j, fj) in images.iter().enumerate() {
                let mut g = fi.adjoint() * fj;
                if i == j {
                    let lambda = self.block_index.iter().position(|&b| b == i).map_or(0.0, |p| self.eigenvalues[p]);
                    g -= CMatrix::identity(l, l).scale(lambda);
                }
                worst = worst.max(crate::tensor::max_abs(&g));
            }
        }
        worst
    }

    /// `|1 − Σ λ_j|`.
    pub fn eigenvalue_sum_error(&self) -> f64 {
        (1.0 - self.eigenvalues.iter().sum::<f64>()).abs()
    }

    /// `Σ_j λ_j V_j r V_j†` for a logical density matrix `r`, the block
    /// form of the channel output.
    pub fn block_output(&self, logical: &CMatrix) -> CMatrix {
        let dout = self.isometries.first().map_or(0, |v| v.nrows());
        let mut out = CMatrix::zeros(dout, dout);
        for (v, &lambda) in self.isometries.iter().zip(&self.eigenvalues) {
            out += (v * logical * v.adjoint()).scale(lambda);
        }
        out
    }

    /// Every outcome of the block measurement on `rho_out`.
    pub fn branches(&self, rho_out: &DensityOperator, tol: f64) -> Result<Vec<DecodeBranch>> {
        let m = rho_out.matrix();
        self.branches_from(|v| v.adjoint() * m * v, tol)
    }

    /// Like [`Self::branches`] for `ρ = Σ_k |w_k⟩⟨w_k|`, never forming `ρ`.
    pub fn branches_low_rank(&self, vectors: &[CVector], tol: f64) -> Result<Vec<DecodeBranch>> {
        self.branches_from(
            |v| {
                let mut acc = CMatrix::zeros(v.ncols(), v.ncols());
                for w in vectors {
                    let x = v.ad_mul(w);
                    acc.gerc(ONE, &x, &x, ONE);
                }
                acc
            },
            tol,
        )
    }

    fn branches_from(&self, sandwich: impl Fn(&CMatrix) -> CMatrix, tol: f64) -> Result<Vec<DecodeBranch>> {
        let space = HilbertFactorization::flat(self.logical_dim());
        let mut captured = 0.0;
        let mut out = Vec::new();
        for (outcome, v) in self.isometries.iter().enumerate() {
            if v.nrows() == 0 {
                continue;
            }
            let block = sandwich(v);
            let p = block.trace().re;
            captured += p;
            if p > BLOCK_CUTOFF {
                out.push(DecodeBranch {
                    outcome,
                    probability: p,
                    logical: DensityOperator::new_unchecked(block.unscale(p), space.clone()),
                });
            }
        }
        if captured < 1.0 - tol {
            return Err(Error::Leakage { captured });
        }
        Ok(out)
    }

    /// Samples one outcome with the Born rule.
    pub fn decode<R: Rng + ?Sized>(&self, rho_out: &DensityOperator, tol: f64, rng: &mut R) -> Result<DecodeBranch> {
        let branches = self.branches(rho_out, tol)?;
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        let mut x = rng.random::<f64>() * total;
        for b in &branches {
            if x < b.probability {
                return Ok(b.clone());
            }
            x -= b.probability;
        }
        branches.into_iter().last().ok_or(Error::NoOutcome)
    }
}

//! Zero-error codes for channels with a small environment.
//!
//! The classical code is grown greedily one codeword at a time, each new
//! codeword orthogonal to every `K_i†K_j|c_k⟩` seen so far. A Radon
//! partition of the resulting Knill–Laflamme matrices then yields a
//! two-dimensional quantum code, and the block decoder recovers it.

use crate::prelude::*;

mod classical;
mod decoder;
mod quantum;
mod radon;
mod structure;

pub use classical::{distinguishability_residual, greedy_classical_code, verify_classical, ClassicalZeroErrorCode};
pub use decoder::{build_decoder, BlockDecoder, DecodeBranch};
pub use quantum::{build_quantum_code, verify_quantum, QuantumZeroErrorCode};
pub use radon::{radon_partition, RadonPartition};
pub use structure::{schmidt_structure_check, SchmidtStructureReport};

/// Residual of a Knill–Laflamme style check together with its verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlReport {
    pub residual: f64,
    pub tolerance: f64,
    pub passes: bool,
}

impl KlReport {
    pub(crate) fn new(residual: f64, tolerance: f64) -> Self {
        Self { residual, tolerance, passes: residual <= tolerance }
    }
}

/// All `⟨q_a|K_i†K_j|q_b⟩` for the columns `q` of `basis`, stored as one
/// `ℓ×ℓ` block per Kraus pair `(i, j)`.
#[derive(Debug, Clone)]
pub struct GramBlocks {
    env_dim: usize,
    blocks: Vec<CMatrix>,
}

impl GramBlocks {
    pub fn new(kraus: &[CMatrix], basis: &CMatrix) -> Result<Self> {
        let images: Vec<CMatrix> = kraus
            .iter()
            .map(|k| {
                if k.ncols() != basis.nrows() {
                    Err(Error::DimensionMismatch { expected: k.ncols(), found: basis.nrows() })
                } else {
                    Ok(k * basis)
                }
            })
            .collect::<Result<_>>()?;
        let adjoints: Vec<CMatrix> = images.iter().map(|a| a.adjoint()).collect();
        let mut blocks = Vec::with_capacity(kraus.len() * kraus.len());
        for ai in &adjoints {
            for aj in &images {
                blocks.push(ai * aj);
            }
        }
        Ok(Self { env_dim: kraus.len(), blocks })
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn block(&self, i: usize, j: usize) -> &CMatrix {
        &self.blocks[i * self.env_dim + j]
    }

    /// `M(a)_ij = ⟨q_a|K_i†K_j|q_a⟩`.
    pub fn diagonal_matrix(&self, a: usize) -> CMatrix {
        CMatrix::from_fn(self.env_dim, self.env_dim, |i, j| self.block(i, j)[(a, a)])
    }

    /// Largest `|⟨q_a|K_i†K_j|q_b⟩|` with `a ≠ b`.
    pub fn off_diagonal_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    if r != c {
                        worst = worst.max(b[(r, c)].norm());
                    }
                }
            }
        }
        worst
    }

    /// Mean of the diagonal matrices, the candidate shared `M`.
    pub fn mean_matrix(&self) -> CMatrix {
        let n = self.blocks.first().map_or(0, |b| b.nrows());
        let mut m = CMatrix::zeros(self.env_dim, self.env_dim);
        for a in 0..n {
            m += self.diagonal_matrix(a);
        }
        if n > 0 {
            m.unscale_mut(n as f64);
        }
        m
    }

    /// Full Knill–Laflamme residual: off-diagonal entries plus the spread of
    /// the diagonal matrices around `shared`.
    pub fn kl_residual(&self, shared: &CMatrix) -> f64 {
        let n = self.blocks.first().map_or(0, |b| b.nrows());
        let mut worst = self.off_diagonal_residual();
        for a in 0..n {
            worst = worst.max(crate::tensor::max_abs(&(self.diagonal_matrix(a) - shared)));
        }
        worst
    }
}

/// Stacks state amplitudes as matrix columns.
pub(crate) fn columns_of(states: &[crate::tensor::StateVector]) -> CMatrix {
    let cols: Vec<CVector> = states.iter().map(|s| s.amplitudes().clone()).collect();
    CMatrix::from_columns(&cols)
}

/// Number of channel uses implied by a factorized input space.
pub(crate) fn uses_of(ch: &crate::channel::KrausChannel) -> usize {
    ch.input_space().len().max(1)
}

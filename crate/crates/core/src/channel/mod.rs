//! Quantum channels in operator-sum and dilated form.
//!
//! Two channels are equal when their Choi matrices agree in operator norm;
//! Kraus sets themselves are never compared entrywise.

use crate::prelude::*;
use crate::tensor::{max_abs, operator_norm, DensityOperator, HilbertFactorization};

mod dilation;
mod family;

pub use dilation::{dilation_to_kraus, kraus_to_dilation, UnitaryDilation};
pub use family::{
    marginal_consistency, marginal_residual, pm_rate, FiniteMemoryChannel, Memoryless, MultiUseFamily, OutputLayout,
};

/// Kraus operators below this Frobenius norm are dropped.
pub const PRUNE_NORM: f64 = 1e-14;

/// A linear map `ρ ↦ Σ K ρ K†` with its completeness residual cached.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    input: HilbertFactorization,
    output: HilbertFactorization,
    residual: f64,
}

/// How two channels are combined by [`compose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// `a ∘ b`: apply `b`, then `a`.
    Sequential,
    /// `a ⊗ b` on the joint input, `a` in the leftmost slot.
    Parallel,
}

/// Outcome of [`verify_cptp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub residual: f64,
    pub tolerance: f64,
    pub passes: bool,
}

impl KrausChannel {
    /// Builds a channel and requires completeness within the structural
    /// tolerance.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::unchecked(operators)?;
        if ch.residual > crate::STRUCTURAL_TOL {
            return Err(Error::NotTracePreserving { residual: ch.residual });
        }
        Ok(ch)
    }

    /// Builds a possibly non-trace-preserving operator-sum map; only the
    /// shapes are validated.
    pub fn unchecked(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators.first().ok_or(Error::InvalidKrausSet)?;
        let (rows, cols) = first.shape();
        if operators.iter().any(|k| k.shape() != (rows, cols)) {
            return Err(Error::InvalidKrausSet);
        }
        let mut kept: Vec<CMatrix> = operators.into_iter().filter(|k| k.norm() >= PRUNE_NORM).collect();
        if kept.is_empty() {
            // The zero map still needs one operator to carry its shape.
            kept.push(CMatrix::zeros(rows, cols));
        }
        let residual = completeness_residual(&kept);
        Ok(Self {
            operators: kept,
            input: HilbertFactorization::flat(cols),
            output: HilbertFactorization::flat(rows),
            residual,
        })
    }

    /// Attaches tensor structure to the input and output spaces.
    pub fn with_spaces(mut self, input: HilbertFactorization, output: HilbertFactorization) -> Result<Self> {
        if input.total() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: input.total() });
        }
        if output.total() != self.output_dim() {
            return Err(Error::DimensionMismatch { expected: self.output_dim(), found: output.total() });
        }
        self.input = input;
        self.output = output;
        Ok(self)
    }

    /// The identity channel on `dim` dimensions.
    pub fn identity(dim: usize) -> Self {
        Self::unitary(CMatrix::identity(dim, dim))
    }

    /// Conjugation by a single operator (no unitarity check beyond the
    /// cached residual).
    pub fn unitary(u: CMatrix) -> Self {
        let residual = completeness_residual(core::slice::from_ref(&u));
        Self {
            input: HilbertFactorization::flat(u.ncols()),
            output: HilbertFactorization::flat(u.nrows()),
            operators: vec![u],
            residual,
        }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn into_operators(self) -> Vec<CMatrix> {
        self.operators
    }

    /// Number of Kraus operators, the environment dimension of this
    /// representation.
    pub fn env_dim(&self) -> usize {
        self.operators.len()
    }

    pub fn input_dim(&self) -> usize {
        self.operators[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn input_space(&self) -> &HilbertFactorization {
        &self.input
    }

    pub fn output_space(&self) -> &HilbertFactorization {
        &self.output
    }

    /// Entrywise `max |Σ K†K − I|`.
    pub fn completeness_residual(&self) -> f64 {
        self.residual
    }

    /// `Σ K m K†` for an arbitrary operator `m`.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.input_dim() || m.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: m.nrows() });
        }
        let mut out = CMatrix::zeros(self.output_dim(), self.output_dim());
        for k in &self.operators {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    /// Applies the channel to a state; refuses maps that are not trace
    /// preserving within the structural tolerance.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if self.residual > crate::STRUCTURAL_TOL {
            return Err(Error::NotTracePreserving { residual: self.residual });
        }
        let out = self.apply_matrix(rho.matrix())?;
        Ok(DensityOperator::new_unchecked(out, self.output.clone()))
    }

    /// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`, input slot first.
    pub fn choi(&self) -> CMatrix {
        let (din, dout) = (self.input_dim(), self.output_dim());
        let mut j = CMatrix::zeros(din * dout, din * dout);
        for k in &self.operators {
            // |K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩
            let v = CVector::from_fn(din * dout, |idx, _| k[(idx % dout, idx / dout)]);
            j.gerc(ONE, &v, &v, ONE);
        }
        j
    }

    /// Operator-norm distance between Choi matrices.
    pub fn choi_distance(&self, other: &Self) -> Result<f64> {
        if self.input_dim() != other.input_dim() || self.output_dim() != other.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim() * self.output_dim(),
                found: other.input_dim() * other.output_dim(),
            });
        }
        Ok(operator_norm(&(self.choi() - other.choi())))
    }

    /// Products `K_i† K_j`, indexed `[i][j]`.
    pub fn error_products(&self) -> Vec<Vec<CMatrix>> {
        let daggers: Vec<CMatrix> = self.operators.iter().map(|k| k.adjoint()).collect();
        daggers.iter().map(|kd| self.operators.iter().map(|k| kd * k).collect()).collect()
    }
}

fn completeness_residual(ops: &[CMatrix]) -> f64 {
    let d = ops[0].ncols();
    let mut sum = CMatrix::identity(d, d).scale(-1.0);
    for k in ops {
        sum.gemm(ONE, &k.adjoint(), k, ONE);
    }
    max_abs(&sum)
}

/// Applies `ch` to `rho`.
pub fn apply(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    ch.apply(rho)
}

/// Completeness residual and pass flag at `tol`.
pub fn verify_cptp(ch: &KrausChannel, tol: f64) -> CptpReport {
    let residual = ch.completeness_residual();
    CptpReport { residual, tolerance: tol, passes: residual <= tol }
}

/// Sequential (`a ∘ b`) or parallel (`a ⊗ b`) composition.
pub fn compose(a: &KrausChannel, b: &KrausChannel, mode: Composition) -> Result<KrausChannel> {
    match mode {
        Composition::Sequential => {
            if a.input_dim() != b.output_dim() {
                return Err(Error::DimensionMismatch { expected: a.input_dim(), found: b.output_dim() });
            }
            let ops = a.operators.iter().flat_map(|ka| b.operators.iter().map(move |kb| ka * kb)).collect();
            let ch = KrausChannel::unchecked(ops)?;
            ch.with_spaces(b.input.clone(), a.output.clone())
        }
        Composition::Parallel => {
            let ops = a.operators.iter().flat_map(|ka| b.operators.iter().map(move |kb| ka.kronecker(kb))).collect();
            let ch = KrausChannel::unchecked(ops)?;
            ch.with_spaces(a.input.join(&b.input), a.output.join(&b.output))
        }
    }
}

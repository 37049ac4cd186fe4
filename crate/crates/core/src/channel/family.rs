//! Multi-use channel families and the memory diagnostics built on them.

use crate::channel::{compose, Composition, KrausChannel};
use crate::prelude::*;
use crate::tensor::{
    apply_local, partial_trace_matrix, random_density, random_unitary, seeded_rng, HilbertFactorization,
};

/// Output tensor structure of an `n`-use channel together with the use
/// (0-based) that each output factor belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputLayout {
    pub factors: HilbertFactorization,
    pub owners: Vec<usize>,
}

/// A sequence of channels `Λ^(n)` on `n` carriers of dimension `d`.
///
/// Implementations must be deterministic functions of `uses`.
pub trait MultiUseFamily {
    fn carrier_dim(&self) -> usize;

    /// Kraus form of the `uses`-fold channel, input on `carrier_dim^uses`.
    fn channel(&self, uses: usize) -> Result<KrausChannel>;

    fn output_layout(&self, uses: usize) -> Result<OutputLayout>;

    /// Environment dimension `d_Y^(n)` of the family's representation.
    fn env_dim(&self, uses: usize) -> Result<usize>;
}

/// `Λ^⊗n` for a fixed single-use channel.
#[derive(Debug, Clone)]
pub struct Memoryless {
    base: KrausChannel,
}

impl Memoryless {
    pub fn new(base: KrausChannel) -> Result<Self> {
        if base.input_dim() != base.output_dim() {
            return Err(Error::DimensionMismatch { expected: base.input_dim(), found: base.output_dim() });
        }
        Ok(Self { base })
    }
}

impl MultiUseFamily for Memoryless {
    fn carrier_dim(&self) -> usize {
        self.base.input_dim()
    }

    fn channel(&self, uses: usize) -> Result<KrausChannel> {
        let mut acc = KrausChannel::identity(1);
        for _ in 0..uses {
            acc = compose(&acc, &self.base, Composition::Parallel)?;
        }
        let space = HilbertFactorization::uniform(self.carrier_dim(), uses);
        acc.with_spaces(space.clone(), space)
    }

    fn output_layout(&self, uses: usize) -> Result<OutputLayout> {
        Ok(OutputLayout {
            factors: HilbertFactorization::uniform(self.carrier_dim(), uses),
            owners: (0..uses).collect(),
        })
    }

    fn env_dim(&self, uses: usize) -> Result<usize> {
        Ok(self.base.env_dim().pow(uses as u32))
    }
}

/// A carrier stream passing one at a time through a unitary interaction
/// with a `d_Y`-dimensional memory that starts in `|0⟩` and is never reset.
///
/// The `n`-use channel has exactly `d_Y` Kraus operators for every `n`,
/// so the family is a Perfect Memory channel.
#[derive(Debug, Clone)]
pub struct FiniteMemoryChannel {
    carrier_dim: usize,
    memory_dim: usize,
    /// Acts on carrier ⊗ memory, memory in the right slot.
    coupling: CMatrix,
}

impl FiniteMemoryChannel {
    pub fn new(carrier_dim: usize, memory_dim: usize, coupling: CMatrix) -> Result<Self> {
        let d = carrier_dim * memory_dim;
        if coupling.shape() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, found: coupling.nrows() });
        }
        let deviation = crate::tensor::unitarity_deviation(&coupling);
        if deviation > crate::STRUCTURAL_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { carrier_dim, memory_dim, coupling })
    }

    /// Haar-random coupling drawn from `seed`.
    pub fn random(carrier_dim: usize, memory_dim: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let coupling = random_unitary(carrier_dim * memory_dim, &mut rng);
        Self { carrier_dim, memory_dim, coupling }
    }

    pub fn memory_dim(&self) -> usize {
        self.memory_dim
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }
}

impl MultiUseFamily for FiniteMemoryChannel {
    fn carrier_dim(&self) -> usize {
        self.carrier_dim
    }

    fn channel(&self, uses: usize) -> Result<KrausChannel> {
        let (d, dy) = (self.carrier_dim, self.memory_dim);
        let carriers = HilbertFactorization::uniform(d, uses);
        let joint = carriers.join(&HilbertFactorization::flat(dy));
        let dim_in = carriers.total();
        let mut ops = vec![CMatrix::zeros(dim_in, dim_in); dy];
        for x in 0..dim_in {
            let mut v = CVector::zeros(joint.total());
            v[x * dy] = ONE;
            for k in 0..uses {
                v = apply_local(&v, &joint, &[k, uses], &self.coupling)?;
            }
            for (j, op) in ops.iter_mut().enumerate() {
                for o in 0..dim_in {
                    op[(o, x)] = v[o * dy + j];
                }
            }
        }
        KrausChannel::new(ops)?.with_spaces(carriers.clone(), carriers)
    }

    fn output_layout(&self, uses: usize) -> Result<OutputLayout> {
        Ok(OutputLayout { factors: HilbertFactorization::uniform(self.carrier_dim, uses), owners: (0..uses).collect() })
    }

    fn env_dim(&self, _uses: usize) -> Result<usize> {
        Ok(self.memory_dim)
    }
}

/// Number of random product inputs in the marginal-consistency panel.
pub const MARGINAL_PANEL: usize = 4;
const MARGINAL_SEED: u64 = 0x4D41_5247;

/// Largest entrywise gap between `Tr_n[Λ^(n)(ρ⊗σ)]` and `Λ^(n−1)(ρ)` over a
/// fixed panel of random `ρ` and `σ`.
pub fn marginal_residual<F: MultiUseFamily + ?Sized>(family: &F, uses: usize) -> Result<f64> {
    if uses < 2 {
        return Err(Error::InvalidArgument("marginal consistency needs at least two uses".into()));
    }
    let d = family.carrier_dim();
    let full = family.channel(uses)?;
    let prefix = family.channel(uses - 1)?;
    let layout = family.output_layout(uses)?;
    let keep: Vec<usize> = layout.owners.iter().enumerate().filter(|(_, &o)| o + 1 < uses).map(|(i, _)| i).collect();
    let mut rng = seeded_rng(MARGINAL_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..MARGINAL_PANEL {
        let rho = random_density(&HilbertFactorization::uniform(d, uses - 1), &mut rng);
        let sigma = random_density(&HilbertFactorization::flat(d), &mut rng);
        let joint = rho.tensor(&sigma);
        let out = full.apply_matrix(joint.matrix())?;
        let reduced = partial_trace_matrix(&out, &layout.factors, &keep)?;
        let direct = prefix.apply_matrix(rho.matrix())?;
        if reduced.shape() != direct.shape() {
            return Err(Error::DimensionMismatch { expected: direct.nrows(), found: reduced.nrows() });
        }
        worst = worst.max(crate::tensor::max_abs(&(reduced - direct)));
    }
    Ok(worst)
}

/// Whether the family passes the marginal check at `tol`.
pub fn marginal_consistency<F: MultiUseFamily + ?Sized>(family: &F, uses: usize, tol: f64) -> Result<bool> {
    Ok(marginal_residual(family, uses)? <= tol)
}

/// `(1/n) log₂ d_Y^(n)` for `n = 1..=n_max`.
pub fn pm_rate<F: MultiUseFamily + ?Sized>(family: &F, n_max: usize) -> Result<Vec<f64>> {
    (1..=n_max).map(|n| Ok((family.env_dim(n)? as f64).log2() / n as f64)).collect()
}

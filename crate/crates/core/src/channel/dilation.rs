use crate::channel::KrausChannel;
use crate::prelude::*;
use crate::tensor::{
    complete_orthonormal, gaussian_complex, orthonormality_deviation, seeded_rng, unitarity_deviation,
    HilbertFactorization, StateVector,
};

/// Fixed seed for the orthonormal completion, so dilations are reproducible.
const COMPLETION_SEED: u64 = 0x5EED_D11A;

/// Stinespring form `ρ ↦ Tr_Y[U(ρ ⊗ ω)U†]`, system in the left slot.
#[derive(Debug, Clone)]
pub struct UnitaryDilation {
    pub u: CMatrix,
    pub env_state: StateVector,
    pub env_basis: Vec<StateVector>,
}

impl UnitaryDilation {
    pub fn new(u: CMatrix, env_state: StateVector, env_basis: Vec<StateVector>) -> Result<Self> {
        let dy = env_state.dim();
        if env_basis.len() != dy || env_basis.iter().any(|b| b.dim() != dy) {
            return Err(Error::DimensionMismatch { expected: dy, found: env_basis.len() });
        }
        if !u.is_square() || !u.nrows().is_multiple_of(dy) {
            return Err(Error::DimensionMismatch { expected: dy, found: u.nrows() });
        }
        let deviation = unitarity_deviation(&u);
        if deviation > crate::STRUCTURAL_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        let cols: Vec<CVector> = env_basis.iter().map(|b| b.amplitudes().clone()).collect();
        let deviation = orthonormality_deviation(&CMatrix::from_columns(&cols));
        if deviation > crate::STRUCTURAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { u, env_state, env_basis })
    }

    /// Dilation with environment in `|0⟩` and computational readout basis.
    pub fn with_ground_environment(u: CMatrix, env_dim: usize) -> Result<Self> {
        let space = HilbertFactorization::flat(env_dim);
        let basis = (0..env_dim).map(|j| StateVector::basis(space.clone(), j)).collect();
        Self::new(u, StateVector::basis(space, 0), basis)
    }

    pub fn env_dim(&self) -> usize {
        self.env_state.dim()
    }

    pub fn system_dim(&self) -> usize {
        self.u.nrows() / self.env_dim()
    }

    /// `U(|ψ⟩ ⊗ |ω⟩)` on system ⊗ environment.
    pub fn evolve(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.system_dim() {
            return Err(Error::DimensionMismatch { expected: self.system_dim(), found: psi.dim() });
        }
        let joint = psi.tensor(&self.env_state);
        let space = HilbertFactorization::new(vec![self.system_dim(), self.env_dim()])?;
        StateVector::new(&self.u * joint.amplitudes(), space)
    }
}

/// `K_j = ⟨ξ_j| U |ω⟩`.
pub fn dilation_to_kraus(d: &UnitaryDilation) -> Result<KrausChannel> {
    let deviation = unitarity_deviation(&d.u);
    if deviation > crate::STRUCTURAL_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let (ds, dy) = (d.system_dim(), d.env_dim());
    let omega = d.env_state.amplitudes();
    // U|ω⟩ as a (ds·dy) × ds isometry.
    let iso = CMatrix::from_fn(ds * dy, ds, |row, i| (0..dy).map(|e| d.u[(row, i * dy + e)] * omega[e]).sum());
    let ops = d
        .env_basis
        .iter()
        .map(|xi| {
            let xi = xi.amplitudes();
            CMatrix::from_fn(ds, ds, |o, i| (0..dy).map(|e| xi[e].conj() * iso[(o * dy + e, i)]).sum())
        })
        .collect();
    KrausChannel::new(ops)
}

/// Stinespring dilation of a square channel with environment dimension
/// equal to its Kraus count; the isometry is completed to a unitary with a
/// fixed-seed random orthonormal extension.
pub fn kraus_to_dilation(ch: &KrausChannel) -> Result<UnitaryDilation> {
    if ch.completeness_residual() > crate::STRUCTURAL_TOL {
        return Err(Error::NotTracePreserving { residual: ch.completeness_residual() });
    }
    if ch.input_dim() != ch.output_dim() {
        return Err(Error::DimensionMismatch { expected: ch.input_dim(), found: ch.output_dim() });
    }
    let (ds, dy) = (ch.input_dim(), ch.env_dim());
    let total = ds * dy;
    let columns: Vec<CVector> = (0..ds)
        .map(|i| {
            CVector::from_fn(total, |row, _| {
                let (o, j) = (row / dy, row % dy);
                ch.operators()[j][(o, i)]
            })
        })
        .collect();
    // Completeness only guarantees orthonormality up to the tolerance;
    // re-orthonormalize before completing.
    let columns = orthonormalize(columns);
    let mut rng = seeded_rng(COMPLETION_SEED);
    let candidates = core::iter::repeat_with(move || CVector::from_fn(total, |_, _| gaussian_complex(&mut rng)));
    let basis = complete_orthonormal(&columns, total, candidates.take(4 * total + 16))?;
    // Place the isometry columns at the |i⟩|0⟩ slots, the completion elsewhere.
    let mut u = CMatrix::zeros(total, total);
    let mut extra = ds;
    for i in 0..ds {
        for e in 0..dy {
            let src = if e == 0 {
                i
            } else {
                extra += 1;
                extra - 1
            };
            u.set_column(i * dy + e, &basis.column(src));
        }
    }
    UnitaryDilation::with_ground_environment(u, dy)
}

fn orthonormalize(mut cols: Vec<CVector>) -> Vec<CVector> {
    for k in 0..cols.len() {
        for _ in 0..2 {
            for j in 0..k {
                let overlap = cols[j].dotc(&cols[k]);
                let prev = cols[j].clone();
                cols[k].axpy(-overlap, &prev, ONE);
            }
        }
        let n = cols[k].norm();
        cols[k].unscale_mut(n);
    }
    cols
}

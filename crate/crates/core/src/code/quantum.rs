use crate::channel::KrausChannel;
use crate::code::radon::{hermitian_coordinates, nnls, weighted_sum};
use crate::code::{columns_of, radon_partition, ClassicalZeroErrorCode, GramBlocks, KlReport};
use crate::prelude::*;
use crate::tensor::{hermitian_eigen, StateVector};
use nalgebra::{DMatrix, DVector};

/// A code space whose Knill–Laflamme matrix `M` is the same for every
/// basis state, so the channel acts on it as a correctable error set.
#[derive(Debug, Clone)]
pub struct QuantumZeroErrorCode {
    pub basis: Vec<StateVector>,
    pub shared_matrix: CMatrix,
    /// Qubits per channel use, `(1/n) log₂ ℓ`.
    pub rate: f64,
    pub uses: usize,
    /// Classical codeword indices and convex weights behind each basis state.
    pub groups: Vec<Vec<(usize, f64)>>,
}

impl QuantumZeroErrorCode {
    pub fn logical_dim(&self) -> usize {
        self.basis.len()
    }

    /// Input-dimension × ℓ matrix whose columns are the code basis.
    pub fn isometry(&self) -> CMatrix {
        columns_of(&self.basis)
    }

    /// Orthogonal projector onto the code space.
    pub fn projector(&self) -> CMatrix {
        let q = self.isometry();
        &q * q.adjoint()
    }

    /// Embeds logical amplitudes into the channel input space.
    pub fn encode(&self, logical: &CVector) -> Result<StateVector> {
        if logical.len() != self.logical_dim() {
            return Err(Error::DimensionMismatch { expected: self.logical_dim(), found: logical.len() });
        }
        StateVector::new(self.isometry() * logical, self.basis[0].space().clone())
    }
}

/// Quantum code from a classical zero-error code.
///
/// For `logical_dim = 2` the two basis states are `√w`-weighted
/// superpositions over the two groups of a Radon partition of the first
/// `d_Y² + 2` matrices `M(k)`. Larger `logical_dim` is best effort: further
/// groups are sought among unused codewords by nonnegative least squares
/// against the same common point, and failure is reported as
/// [`Error::RadonInfeasible`].
pub fn build_quantum_code(
    code: &ClassicalZeroErrorCode,
    ch: &KrausChannel,
    logical_dim: usize,
) -> Result<QuantumZeroErrorCode> {
    if logical_dim < 2 {
        return Err(Error::InvalidArgument("a quantum code needs logical dimension at least 2".into()));
    }
    let points = &code.kl_matrices;
    let dy = ch.env_dim();
    let pool = points.len().min(dy * dy + 2);
    let partition = match radon_partition(&points[..pool]) {
        Ok(p) => p,
        Err(_) if pool < points.len() => radon_partition(points)?,
        Err(Error::InsufficientPoints { points, required }) => {
            return Err(Error::RadonInfeasible(alloc::format!(
                "{points} classical codewords, {required} needed for a guaranteed partition"
            )))
        }
        Err(e) => return Err(e),
    };
    let shared = partition.common_point(points);
    let mut used = vec![false; points.len()];
    for &(k, _) in partition.first.iter().chain(&partition.second) {
        used[k] = true;
    }
    let mut groups = vec![partition.first, partition.second];
    while groups.len() < logical_dim {
        let free: Vec<usize> = (0..points.len()).filter(|&k| !used[k]).collect();
        let group = hull_group(points, &free, &shared).ok_or_else(|| {
            Error::RadonInfeasible(alloc::format!(
                "found {} of {logical_dim} groups sharing one Knill-Laflamme matrix",
                groups.len()
            ))
        })?;
        for &(k, _) in &group {
            used[k] = true;
        }
        groups.push(group);
    }
    let basis: Vec<StateVector> = groups
        .iter()
        .map(|g| {
            let mut v = CVector::zeros(ch.input_dim());
            for &(k, w) in g {
                v.axpy(Complex64::new(w.sqrt(), 0.0), code.codewords[k].amplitudes(), ONE);
            }
            StateVector::new(v, ch.input_space().clone())
        })
        .collect::<Result<_>>()?;
    let uses = code.uses;
    Ok(QuantumZeroErrorCode {
        rate: (logical_dim as f64).log2() / uses as f64,
        basis,
        shared_matrix: shared,
        uses,
        groups,
    })
}

/// Convex combination of `points[free]` equal to `target`, if one exists.
fn hull_group(points: &[CMatrix], free: &[usize], target: &CMatrix) -> Option<Vec<(usize, f64)>> {
    if free.is_empty() {
        return None;
    }
    let coords: Vec<Vec<f64>> = free.iter().map(|&k| hermitian_coordinates(&points[k])).collect();
    let rows = coords[0].len() + 1;
    let a = DMatrix::from_fn(rows, free.len(), |r, c| if r + 1 == rows { 1.0 } else { coords[c][r] });
    let mut b: DVector<f64> = DVector::from_vec(hermitian_coordinates(target));
    b = b.push(1.0);
    let x = nnls(&a, &b);
    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let group: Vec<(usize, f64)> =
        x.iter().enumerate().filter(|(_, &w)| w > 1e-14).map(|(c, &w)| (free[c], w / total)).collect();
    let residual = crate::tensor::max_abs(&(weighted_sum(points, &group) - target));
    (residual <= 1e-10).then_some(group)
}

/// `max |⟨q_a|K_i†K_j|q_b⟩ − δ_ab M_ij|` against the code's shared matrix.
pub fn verify_quantum(qc: &QuantumZeroErrorCode, ch: &KrausChannel, tol: f64) -> Result<KlReport> {
    let gram = GramBlocks::new(ch.operators(), &qc.isometry())?;
    Ok(KlReport::new(gram.kl_residual(&qc.shared_matrix), tol))
}

/// Smallest eigenvalue of the shared matrix.
pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

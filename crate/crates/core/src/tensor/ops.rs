use crate::prelude::*;
use crate::tensor::{DensityOperator, HilbertFactorization, SchmidtData, StateVector};

/// Kronecker product; `a` occupies the slow (leftmost) slot.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Left-to-right Kronecker product of a list; the empty product is `[1]`.
pub fn kron_all<'a>(items: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    items.into_iter().fold(CMatrix::from_element(1, 1, ONE), |acc, m| acc.kronecker(m))
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// Entrywise `max |U†U − I|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    orthonormality_deviation(u)
}

/// Entrywise `max |V†V − I|`, i.e. how far the columns are from orthonormal.
pub fn orthonormality_deviation(v: &CMatrix) -> f64 {
    let gram = v.adjoint() * v;
    max_abs(&(gram - CMatrix::identity(v.ncols(), v.ncols())))
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0, |acc: f64, &s| acc.max(s))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending
/// order with matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // Symmetrize so roundoff asymmetry cannot leak into the solver.
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Principal square root of a positive semidefinite matrix; small negative
/// eigenvalues are clamped to zero.
pub fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let roots = CVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)));
    &vectors * CMatrix::from_diagonal(&roots) * vectors.adjoint()
}

/// `exp(−i h t)` for Hermitian `h`, through its eigendecomposition.
pub fn herm_exp(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let deviation = hermiticity_deviation(h);
    if deviation > crate::STRUCTURAL_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let (values, vectors) = hermitian_eigen(h);
    let phases = CVector::from_iterator(values.len(), values.iter().map(|&e| Complex64::from_polar(1.0, -e * t)));
    Ok(&vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint())
}

/// `f = unitary · positive`, with `positive = (f†f)^{1/2}`.
///
/// For a non-square `f` (rows ≥ cols) the first factor is an isometry.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub unitary: CMatrix,
    pub positive: CMatrix,
}

/// Polar decomposition of `f`, optionally restricted to the range of the
/// projector `p` (i.e. of `f·p`). Rank deficiency is absorbed by the SVD,
/// whose singular vectors already form a valid completion.
pub fn polar_decompose(f: &CMatrix, p: Option<&CMatrix>) -> PolarDecomposition {
    let target = match p {
        Some(p) => f * p,
        None => f.clone(),
    };
    let svd = target.svd(true, true);
    let w = svd.u.expect("requested left singular vectors");
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma = CMatrix::from_diagonal(&svd.singular_values.map(|s| Complex64::new(s, 0.0)));
    PolarDecomposition { unitary: &w * &v_t, positive: v_t.adjoint() * sigma * &v_t }
}

/// A split of the factors of a space into two ordered groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Bipartition {
    pub fn new(left: Vec<usize>, right: Vec<usize>) -> Self {
        Self { left, right }
    }

    /// Factors `0..k` versus `k..count`.
    pub fn split_at(k: usize, count: usize) -> Self {
        Self { left: (0..k).collect(), right: (k..count).collect() }
    }

    fn validate_partial(&self, count: usize) -> Result<()> {
        let mut seen = vec![false; count];
        for &i in self.left.iter().chain(&self.right) {
            if i >= count || seen[i] {
                return Err(Error::InvalidSubsystem { index: i, count });
            }
            seen[i] = true;
        }
        Ok(())
    }

    fn validate(&self, count: usize) -> Result<()> {
        let mut seen = vec![false; count];
        for &i in self.left.iter().chain(&self.right) {
            if i >= count || seen[i] {
                return Err(Error::InvalidBipartition);
            }
            seen[i] = true;
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::InvalidBipartition)
        }
    }
}

/// Reorders the tensor factors of `v` so that new factor `k` is old factor
/// `order[k]`.
pub fn permute_subsystems(
    v: &CVector,
    space: &HilbertFactorization,
    order: &[usize],
) -> Result<(CVector, HilbertFactorization)> {
    Bipartition::new(order.to_vec(), Vec::new()).validate(space.len())?;
    let target = space.select(order)?;
    let mut out = CVector::zeros(space.total());
    let mut permuted = vec![0; order.len()];
    for (index, &amp) in v.iter().enumerate() {
        let digits = space.digits(index);
        for (k, &o) in order.iter().enumerate() {
            permuted[k] = digits[o];
        }
        out[target.index_of(&permuted)] = amp;
    }
    Ok((out, target))
}

/// Schmidt decomposition of a pure state across `split`.
pub fn schmidt(psi: &StateVector, split: &Bipartition) -> Result<SchmidtData> {
    let space = psi.space();
    split.validate(space.len())?;
    let order: Vec<usize> = split.left.iter().chain(&split.right).copied().collect();
    let (amps, _) = permute_subsystems(psi.amplitudes(), space, &order)?;
    let left_space = space.select(&split.left)?;
    let right_space = space.select(&split.right)?;
    let (dl, dr) = (left_space.total(), right_space.total());
    // Row-major reshape: row = left index, column = right index.
    let block = CMatrix::from_fn(dl, dr, |i, j| amps[i * dr + j]);
    let svd = block.svd(true, true);
    let u = svd.u.expect("left vectors");
    let v_t = svd.v_t.expect("right vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut coefficients = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for k in order {
        let c = svd.singular_values[k];
        if c <= crate::ARITHMETIC_TOL {
            continue;
        }
        coefficients.push(c);
        left.push(StateVector::new_unchecked(u.column(k).into_owned(), left_space.clone()));
        let r = v_t.row(k).transpose();
        right.push(StateVector::new_unchecked(r, right_space.clone()));
    }
    Ok(SchmidtData { coefficients, left, right })
}

/// Reduced operator on the factors in `keep`, returned in ascending order.
pub fn partial_trace_matrix(m: &CMatrix, space: &HilbertFactorization, keep: &[usize]) -> Result<CMatrix> {
    if m.nrows() != space.total() || m.ncols() != space.total() {
        return Err(Error::DimensionMismatch { expected: space.total(), found: m.nrows() });
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    for (pos, &k) in kept.iter().enumerate() {
        if k >= space.len() || (pos > 0 && kept[pos - 1] == k) {
            return Err(Error::InvalidSubsystem { index: k, count: space.len() });
        }
    }
    let traced: Vec<usize> = (0..space.len()).filter(|i| !kept.contains(i)).collect();
    let order: Vec<usize> = kept.iter().chain(&traced).copied().collect();
    let dk = space.select(&kept)?.total();
    let dt = space.select(&traced)?.total();
    // Map each (kept, traced) pair to the original flat index once.
    let strides = space.strides();
    let mut original = vec![0usize; dk * dt];
    let permuted = space.select(&order)?;
    for (flat, slot) in original.iter_mut().enumerate() {
        let digits = permuted.digits(flat);
        *slot = digits.iter().zip(&order).map(|(&d, &o)| d * strides[o]).sum();
    }
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(original[a * dt + t], original[b * dt + t])];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on the factors in `keep`, in their original relative order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let reduced = partial_trace_matrix(rho.matrix(), rho.space(), keep)?;
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    let space = rho.space().select(&kept)?;
    Ok(DensityOperator::new_unchecked(reduced, space))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let root = hermitian_sqrt(rho.matrix());
    let inner = &root * sigma.matrix() * &root;
    let (values, _) = hermitian_eigen(&inner);
    let s: f64 = values.iter().map(|&v| v.max(0.0).sqrt()).sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// Extends orthonormal `columns` to a full orthonormal basis of `dim`
/// dimensions by Gram–Schmidt over `candidates`, taken in order.
///
/// Candidates whose residual after two orthogonalization passes is below
/// `1e-6` are skipped. Returns the square matrix of basis columns, with the
/// given columns first.
pub fn complete_orthonormal(
    columns: &[CVector],
    dim: usize,
    candidates: impl IntoIterator<Item = CVector>,
) -> Result<CMatrix> {
    let mut basis: Vec<CVector> = Vec::with_capacity(dim);
    for c in columns {
        if c.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: c.len() });
        }
        basis.push(c.clone());
    }
    let seed_matrix = CMatrix::from_columns(&basis);
    let deviation = if basis.is_empty() { 0.0 } else { orthonormality_deviation(&seed_matrix) };
    if deviation > crate::STRUCTURAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    for mut v in candidates {
        if basis.len() == dim {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v.axpy(-overlap, b, ONE);
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v.unscale(norm));
        }
    }
    if basis.len() < dim {
        return Err(Error::InvalidArgument("candidate vectors do not span the space".into()));
    }
    Ok(CMatrix::from_columns(&basis))
}

/// Applies `op` to the factors `sites` (in that order) of a state vector,
/// acting as the identity on every other factor.
pub fn apply_local(v: &CVector, space: &HilbertFactorization, sites: &[usize], op: &CMatrix) -> Result<CVector> {
    let local = space.select(sites)?;
    if op.nrows() != local.total() || op.ncols() != local.total() {
        return Err(Error::DimensionMismatch { expected: local.total(), found: op.nrows() });
    }
    if v.len() != space.total() {
        return Err(Error::DimensionMismatch { expected: space.total(), found: v.len() });
    }
    Bipartition::new(sites.to_vec(), Vec::new()).validate_partial(space.len())?;
    let strides = space.strides();
    let offsets: Vec<usize> =
        (0..local.total()).map(|l| local.digits(l).iter().zip(sites).map(|(&d, &s)| d * strides[s]).sum()).collect();
    let rest: Vec<usize> = (0..space.len()).filter(|i| !sites.contains(i)).collect();
    let rest_space = space.select(&rest)?;
    let mut out = CVector::zeros(v.len());
    let mut buf = CVector::zeros(local.total());
    for r in 0..rest_space.total() {
        let base: usize = rest_space.digits(r).iter().zip(&rest).map(|(&d, &s)| d * strides[s]).sum();
        for (l, &off) in offsets.iter().enumerate() {
            buf[l] = v[base + off];
        }
        let mapped = op * &buf;
        for (l, &off) in offsets.iter().enumerate() {
            out[base + off] = mapped[l];
        }
    }
    Ok(out)
}

/// Computational basis vectors of a `dim`-dimensional space.
pub(crate) fn computational_basis(dim: usize) -> impl Iterator<Item = CVector> {
    (0..dim).map(move |i| {
        let mut v = CVector::zeros(dim);
        v[i] = ONE;
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{random_density, random_hermitian, random_state, seeded_rng};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    fn taylor_exp(h: &CMatrix, t: f64) -> CMatrix {
        let a = h.scale(t) * c(0.0, -1.0);
        let mut term = CMatrix::identity(h.nrows(), h.ncols());
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / c(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn kronecker_identity_and_basis() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(tensor_product(&i2, &i2), CMatrix::identity(4, 4));
        let zero = CMatrix::from_column_slice(2, 1, &[ONE, ZERO]);
        let one = CMatrix::from_column_slice(2, 1, &[ZERO, ONE]);
        let v = tensor_product(&zero, &one);
        assert_eq!(v[(1, 0)], ONE);
        assert_eq!(v.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn x_tensor_z_on_00() {
        let xz = tensor_product(&pauli_x(), &pauli_z());
        // Hand-built X⊗Z in the |00>,|01>,|10>,|11> basis.
        #[rustfmt::skip]
        let oracle = CMatrix::from_row_slice(4, 4, &[
            ZERO, ZERO, ONE, ZERO,
            ZERO, ZERO, ZERO, -ONE,
            ONE, ZERO, ZERO, ZERO,
            ZERO, -ONE, ZERO, ZERO,
        ]);
        assert_eq!(xz, oracle);
        let mut v00 = CVector::zeros(4);
        v00[0] = ONE;
        let out = xz * v00;
        assert_eq!(out[2], ONE);
    }

    #[test]
    fn herm_exp_matches_series() {
        let zero = herm_exp(&CMatrix::zeros(3, 3), 1.7).unwrap();
        assert!(max_abs(&(zero - CMatrix::identity(3, 3))) < 1e-15);
        let ex = herm_exp(&pauli_x(), PI / 2.0).unwrap();
        assert!(max_abs(&(&ex - taylor_exp(&pauli_x(), PI / 2.0))) < 1e-12);
        assert!(max_abs(&(ex - pauli_x() * c(0.0, -1.0))) < 1e-12);
        let ez = herm_exp(&pauli_z(), PI).unwrap();
        assert!(max_abs(&(&ez - taylor_exp(&pauli_z(), PI))) < 1e-12);
        assert!(max_abs(&(ez + CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn herm_exp_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(herm_exp(&m, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn polar_cases() {
        let f = CMatrix::identity(2, 2).scale(2.0);
        let p = polar_decompose(&f, None);
        assert!(max_abs(&(p.unitary - CMatrix::identity(2, 2))) < 1e-14);
        assert!(max_abs(&(p.positive - &f)) < 1e-14);

        let mut rng = seeded_rng(4);
        let v = crate::tensor::random_unitary(3, &mut rng);
        let p = polar_decompose(&v, None);
        assert!(max_abs(&(p.unitary - &v)) < 1e-12);

        // f = R · diag(1, 0.5) with R a rotation: the positive part has
        // eigenvalues {1, 0.5} by construction.
        let (s, co) = (0.3f64.sin(), 0.3f64.cos());
        let r = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]);
        let f = &r * CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.5, 0.0)]));
        let p = polar_decompose(&f, None);
        let (vals, _) = hermitian_eigen(&p.positive);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 0.5).abs() < 1e-12);
        assert!(max_abs(&(&p.unitary * &p.positive - f)) < 1e-12);
    }

    #[test]
    fn polar_with_projector_is_rank_deficient() {
        let mut rng = seeded_rng(9);
        let f = crate::tensor::random_unitary(4, &mut rng);
        let mut p = CMatrix::zeros(4, 4);
        p[(0, 0)] = ONE;
        p[(2, 2)] = ONE;
        let dec = polar_decompose(&f, Some(&p));
        assert!(unitarity_deviation(&dec.unitary) < 1e-10);
        assert!(max_abs(&(&dec.unitary * &dec.positive - &f * &p)) < 1e-12);
    }

    #[test]
    fn bell_marginal_and_product() {
        let h = 1.0 / 2f64.sqrt();
        let space = HilbertFactorization::uniform(2, 2);
        let bell = StateVector::new(CVector::from_vec(vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]), space).unwrap();
        let reduced = partial_trace(&bell.to_density(), &[0]).unwrap();
        assert!(max_abs(&(reduced.matrix() - CMatrix::identity(2, 2).scale(0.5))) < 1e-15);

        let mut rng = seeded_rng(1);
        let a = random_density(&HilbertFactorization::flat(2), &mut rng);
        let b = random_density(&HilbertFactorization::flat(3), &mut rng);
        let joint = a.tensor(&b);
        let back = partial_trace(&joint, &[0]).unwrap();
        assert!(max_abs(&(back.matrix() - a.matrix())) < 1e-14);
        let back = partial_trace(&joint, &[1]).unwrap();
        assert!(max_abs(&(back.matrix() - b.matrix())) < 1e-14);
    }

    #[test]
    fn three_qubit_trace_matches_index_loop() {
        let space = HilbertFactorization::uniform(2, 3);
        let mut rng = seeded_rng(2);
        let psi = random_state(&space, &mut rng);
        let rho = psi.to_density();
        let reduced = partial_trace(&rho, &[2, 0]).unwrap();
        // Keep qubits 0 and 2, trace qubit 1, by explicit index summation.
        let mut oracle = CMatrix::zeros(4, 4);
        for a0 in 0..2 {
            for a2 in 0..2 {
                for b0 in 0..2 {
                    for b2 in 0..2 {
                        let mut acc = ZERO;
                        for t in 0..2 {
                            let row = a0 * 4 + t * 2 + a2;
                            let col = b0 * 4 + t * 2 + b2;
                            acc += rho.matrix()[(row, col)];
                        }
                        oracle[(a0 * 2 + a2, b0 * 2 + b2)] = acc;
                    }
                }
            }
        }
        assert!(max_abs(&(reduced.matrix() - oracle)) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = DensityOperator::maximally_mixed(HilbertFactorization::uniform(2, 2));
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::InvalidSubsystem { .. })));
        assert!(partial_trace(&rho, &[1, 1]).is_err());
    }

    #[test]
    fn schmidt_examples() {
        let h = 1.0 / 2f64.sqrt();
        let space = HilbertFactorization::uniform(2, 2);
        let bell = StateVector::new(CVector::from_vec(vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]), space.clone()).unwrap();
        let data = schmidt(&bell, &Bipartition::split_at(1, 2)).unwrap();
        assert_eq!(data.coefficients.len(), 2);
        assert!(data.coefficients.iter().all(|&x| (x - h).abs() < 1e-12));

        let product = StateVector::basis(space, 3);
        let data = schmidt(&product, &Bipartition::split_at(1, 2)).unwrap();
        assert_eq!(data.coefficients.len(), 1);
        assert!((data.coefficients[0] - 1.0).abs() < 1e-14);

        let mut rng = seeded_rng(3);
        let space = HilbertFactorization::new(vec![2, 3]).unwrap();
        let psi = random_state(&space, &mut rng);
        let data = schmidt(&psi, &Bipartition::split_at(1, 2)).unwrap();
        let reshaped = CMatrix::from_fn(2, 3, |i, j| psi.amplitudes()[i * 3 + j]);
        let mut sv: Vec<f64> = reshaped.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in data.coefficients.iter().zip(&sv) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_rejects_incomplete_split() {
        let psi = StateVector::basis(HilbertFactorization::uniform(2, 3), 0);
        assert!(matches!(schmidt(&psi, &Bipartition::new(vec![0], vec![1])), Err(Error::InvalidBipartition)));
    }

    #[test]
    fn fidelity_examples() {
        let q = HilbertFactorization::flat(2);
        let zero = StateVector::basis(q.clone(), 0).to_density();
        let one = StateVector::basis(q.clone(), 1).to_density();
        let h = 1.0 / 2f64.sqrt();
        let plus = StateVector::new(CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]), q).unwrap().to_density();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
        let big = DensityOperator::maximally_mixed(HilbertFactorization::flat(3));
        assert!(matches!(fidelity(&zero, &big), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn associativity_is_exact() {
        // Small-integer entries keep every product exact in f64, so layout
        // differences cannot hide behind rounding.
        let int = |rows: usize, cols: usize, k: i32| {
            CMatrix::from_fn(rows, cols, |i, j| {
                c(((i as i32 * 3 + j as i32 + k) % 7 - 3) as f64, ((i + 2 * j) % 3) as f64)
            })
        };
        let (a, b, d) = (int(2, 3, 1), int(3, 2, 2), int(2, 2, 5));
        let left = tensor_product(&tensor_product(&a, &b), &d);
        let right = tensor_product(&a, &tensor_product(&b, &d));
        assert_eq!(left, right);
    }

    #[test]
    fn local_operator_matches_kronecker() {
        let mut rng = seeded_rng(6);
        let space = HilbertFactorization::new(vec![2, 3, 2]).unwrap();
        let psi = random_state(&space, &mut rng);
        let op = crate::tensor::random_unitary(4, &mut rng);
        // Acting on factors (2, 0): permute to (2, 0, 1), apply op ⊗ I, permute back.
        let local = apply_local(psi.amplitudes(), &space, &[2, 0], &op).unwrap();
        let (perm, pspace) = permute_subsystems(psi.amplitudes(), &space, &[2, 0, 1]).unwrap();
        let full = tensor_product(&op, &CMatrix::identity(3, 3)) * perm;
        let (back, _) = permute_subsystems(&full, &pspace, &[1, 2, 0]).unwrap();
        assert!((local - back).norm() < 1e-12);
    }

    #[test]
    fn completion_extends_to_unitary() {
        let h = 1.0 / 2f64.sqrt();
        let first = CVector::from_vec(vec![c(h, 0.0), c(0.0, h), ZERO]);
        let u = complete_orthonormal(core::slice::from_ref(&first), 3, computational_basis(3)).unwrap();
        assert!(unitarity_deviation(&u) < 1e-12);
        assert_eq!(u.column(0).into_owned(), first);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn exp_forward_backward(seed in any::<u64>(), dim in 1usize..=16) {
            let mut rng = seeded_rng(seed);
            let h = random_hermitian(dim, &mut rng);
            let fwd = herm_exp(&h, 0.8).unwrap();
            let back = herm_exp(&h, -0.8).unwrap();
            prop_assert!(max_abs(&(fwd * back - CMatrix::identity(dim, dim))) < 1e-10);
        }

        #[test]
        fn full_trace_is_one(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
            let mut rng = seeded_rng(seed);
            let space = HilbertFactorization::new(vec![a, b]).unwrap();
            let rho = random_density(&space, &mut rng);
            let scalar = partial_trace(&rho, &[]).unwrap();
            prop_assert!((scalar.matrix()[(0, 0)] - ONE).norm() < 1e-12);
        }

        #[test]
        fn schmidt_reconstructs(seed in any::<u64>(), a in 1usize..5, b in 1usize..5, c in 1usize..3) {
            let mut rng = seeded_rng(seed);
            let space = HilbertFactorization::new(vec![a, b, c]).unwrap();
            let psi = random_state(&space, &mut rng);
            let split = Bipartition::new(vec![2, 0], vec![1]);
            let data = schmidt(&psi, &split).unwrap();
            let rebuilt = data.reconstruct();
            let (expected, _) = permute_subsystems(psi.amplitudes(), &space, &[2, 0, 1]).unwrap();
            prop_assert!((rebuilt.amplitudes() - expected).norm() < 1e-10);
            let total: f64 = data.coefficients.iter().map(|x| x * x).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}

use crate::channel::KrausChannel;
use crate::mixing::{DRAINING_TOL, PERIPHERAL_TOL};
use crate::prelude::*;
use crate::tensor::{DensityOperator, HilbertFactorization};

/// Singular values of `S − I` below this count towards the fixed space.
const NULL_TOL: f64 = 1e-9;

/// Matrix of a channel acting on column-stacked density matrices:
/// `vec(Σ K ρ K†) = (Σ conj(K) ⊗ K) vec(ρ)`.
#[derive(Debug, Clone)]
pub struct Superoperator {
    matrix: CMatrix,
    source: KrausChannel,
}

impl Superoperator {
    pub fn new(source: KrausChannel) -> Self {
        let (d_out, d_in) = (source.output_dim(), source.input_dim());
        let mut matrix = CMatrix::zeros(d_out * d_out, d_in * d_in);
        for k in source.operators() {
            matrix += k.map(|z| z.conj()).kronecker(k);
        }
        Self { matrix, source }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn source(&self) -> &KrausChannel {
        &self.source
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.source.output_dim();
        let v = &self.matrix * CVector::from_column_slice(rho.as_slice());
        CMatrix::from_column_slice(d, d, v.as_slice())
    }
}

/// Spectrum, fixed points and mixing certificate of a superoperator.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    /// Unit-trace fixed points, one per basis vector of the eigenvalue-1
    /// space with non-zero trace.
    pub fixed_points: Vec<DensityOperator>,
    /// Dimension of the eigenvalue-1 eigenspace.
    pub fixed_space_dim: usize,
    /// `1 − |λ₂|`.
    pub gap: f64,
    /// `Tr[(ω*)²]` when the fixed point is unique.
    pub fixed_point_purity: Option<f64>,
    pub is_mixing: bool,
}

impl SpectralReport {
    /// `|λ₂|`, zero for a one-dimensional space.
    pub fn second_modulus(&self) -> f64 {
        self.eigenvalues.get(1).map_or(0.0, |z| z.norm())
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |z| z.norm())
    }

    /// Whether the unique fixed point is pure, so repeated coupling drains
    /// everything out of the mediator.
    pub fn is_draining(&self) -> bool {
        self.fixed_point_purity.is_some_and(|p| p >= 1.0 - DRAINING_TOL)
    }
}

pub fn to_spectrum(sup: &Superoperator) -> SpectralReport {
    let s = sup.matrix();
    let d = sup.source().output_dim();
    let (_, t) = s.clone().schur().unpack();
    let mut eigenvalues: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()));

    let shifted = s - CMatrix::identity(s.nrows(), s.ncols());
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let null: Vec<CVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv <= NULL_TOL)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    let space = HilbertFactorization::flat(d);
    let fixed_points: Vec<DensityOperator> = null
        .iter()
        .filter_map(|v| {
            let x = CMatrix::from_column_slice(d, d, v.as_slice());
            let tr = x.trace();
            if tr.norm() <= 1e-8 {
                return None;
            }
            let x = x.map(|z| z / tr);
            let h = (&x + x.adjoint()).scale(0.5);
            Some(DensityOperator::new_unchecked(h, space.clone()))
        })
        .collect();
    let peripheral = eigenvalues.iter().filter(|z| z.norm() > 1.0 - PERIPHERAL_TOL).count();
    let is_mixing = null.len() == 1 && peripheral == 1;
    let gap = 1.0 - eigenvalues.get(1).map_or(0.0, |z| z.norm());
    let fixed_point_purity = (null.len() == 1 && fixed_points.len() == 1).then(|| fixed_points[0].purity());
    SpectralReport { eigenvalues, fixed_points, fixed_space_dim: null.len(), gap, fixed_point_purity, is_mixing }
}

/// `Tr[(ω*)²]` of the unique fixed point.
pub fn fixed_point_purity(report: &SpectralReport) -> Result<f64> {
    report.fixed_point_purity.ok_or(Error::MultipleFixedPoints { count: report.fixed_space_dim })
}

/// Trace distances `‖𝒩^t(ω₀) − ω*‖₁/2` for `t = 0..=steps`.
pub fn iterate_convergence(ch: &KrausChannel, omega0: &DensityOperator, steps: usize) -> Result<Vec<f64>> {
    let report = to_spectrum(&Superoperator::new(ch.clone()));
    if !report.is_mixing {
        return Err(Error::NotMixing(alloc::format!(
            "{} fixed directions, spectral radius {}",
            report.fixed_space_dim,
            report.spectral_radius()
        )));
    }
    let target = &report.fixed_points[0];
    let mut rho = omega0.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(rho.trace_distance(target)?);
    for _ in 0..steps {
        rho = ch.apply(&rho)?;
        out.push(rho.trace_distance(target)?);
    }
    Ok(out)
}

/// Geometric-mean step ratio over the last `window` steps whose distances
/// stay at or above `floor`. Needs at least two such points.
pub fn decay_ratio(distances: &[f64], window: usize, floor: f64) -> Option<f64> {
    let usable = distances.iter().position(|&d| d < floor).unwrap_or(distances.len());
    let tail = &distances[usable.saturating_sub(window + 1)..usable];
    if tail.len() < 2 {
        return None;
    }
    let steps = (tail.len() - 1) as f64;
    Some((tail[tail.len() - 1] / tail[0]).powf(1.0 / steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkModel;
    use crate::mixing::{ground_state, receiver_map};
    use crate::tensor::{random_density, seeded_rng};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn reset(d: usize) -> KrausChannel {
        KrausChannel::new(
            (0..d)
                .map(|j| {
                    let mut k = CMatrix::zeros(d, d);
                    k[(0, j)] = ONE;
                    k
                })
                .collect(),
        )
        .unwrap()
    }

    /// Keeps the state with probability ½, otherwise resets it.
    fn half_reset() -> KrausChannel {
        let h = 0.5f64.sqrt();
        KrausChannel::new(vec![
            CMatrix::identity(2, 2).scale(h),
            CMatrix::from_row_slice(2, 2, &[c(h), ZERO, ZERO, ZERO]),
            CMatrix::from_row_slice(2, 2, &[ZERO, c(h), ZERO, ZERO]),
        ])
        .unwrap()
    }

    #[test]
    fn action_matches_kraus_form() {
        let model = LinkModel::dual_rail(3, 1.0, 0.9).unwrap();
        let n = receiver_map(&model).unwrap();
        let sup = Superoperator::new(n.clone());
        let mut rng = seeded_rng(8);
        let rho = random_density(&HilbertFactorization::flat(7), &mut rng);
        let direct = n.apply_matrix(rho.matrix()).unwrap();
        assert!(crate::tensor::max_abs(&(sup.apply(rho.matrix()) - direct)) < 1e-12);
    }

    #[test]
    fn reset_spectrum() {
        let report = to_spectrum(&Superoperator::new(reset(3)));
        assert!((report.eigenvalues[0] - ONE).norm() < 1e-12);
        assert!(report.eigenvalues[1..].iter().all(|z| z.norm() < 1e-12));
        assert!((report.gap - 1.0).abs() < 1e-12);
        assert!(report.is_mixing && report.is_draining());
        assert!(report.fixed_points[0].max_deviation(&ground_state(3)) < 1e-12);
    }

    #[test]
    fn unitary_conjugation_is_not_mixing() {
        let u = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, Complex64::from_polar(1.0, 0.7), -ONE]));
        let report = to_spectrum(&Superoperator::new(KrausChannel::unitary(u.clone())));
        assert!(!report.is_mixing);
        assert_eq!(report.fixed_space_dim, 3);
        assert!(matches!(fixed_point_purity(&report), Err(Error::MultipleFixedPoints { count: 3 })));
        let rho = ground_state(3);
        assert!(iterate_convergence(&KrausChannel::unitary(u), &rho, 3).is_err());
    }

    #[test]
    fn replacement_by_maximally_mixed() {
        let d = 3;
        let ops = (0..d * d)
            .map(|k| {
                let mut m = CMatrix::zeros(d, d);
                m[(k / d, k % d)] = c(1.0 / (d as f64).sqrt());
                m
            })
            .collect();
        let report = to_spectrum(&Superoperator::new(KrausChannel::new(ops).unwrap()));
        assert!((fixed_point_purity(&report).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(!report.is_draining());
    }

    #[test]
    fn reset_converges_in_one_step() {
        let mut rng = seeded_rng(1);
        let rho = random_density(&HilbertFactorization::flat(3), &mut rng);
        let d = iterate_convergence(&reset(3), &rho, 3).unwrap();
        assert!(d[0] > 0.0 && d[1..].iter().all(|&x| x < 1e-14));
    }

    #[test]
    fn half_reset_halves_distance() {
        let report = to_spectrum(&Superoperator::new(half_reset()));
        assert!((report.second_modulus() - 0.5).abs() < 1e-12);
        let mut rng = seeded_rng(4);
        let rho = random_density(&HilbertFactorization::flat(2), &mut rng);
        let d = iterate_convergence(&half_reset(), &rho, 15).unwrap();
        for w in d.windows(2).skip(5) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-6);
        }
        assert!((decay_ratio(&d, 10, 1e-14).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn two_site_gap_is_cosine() {
        // With one spin per chain between the ends, the excitation sits at
        // Bob's site with amplitude −i sin(Jτ) after one step and stays
        // behind with amplitude cos(Jτ) up to phase.
        for tau in [0.4, 1.1, 2.5] {
            let model = LinkModel::dual_rail(2, 1.0, tau).unwrap();
            let report = to_spectrum(&Superoperator::new(receiver_map(&model).unwrap()));
            assert!((report.second_modulus() - f64::cos(tau).abs()).abs() < 1e-9, "tau {tau}");
            assert!(report.is_mixing);
            assert!((fixed_point_purity(&report).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn decay_ratio_respects_floor() {
        let d = [1.0, 0.1, 0.01, 1e-3, 1e-12, 0.0];
        assert!((decay_ratio(&d, 10, 1e-10).unwrap() - 0.1).abs() < 1e-12);
        assert!(decay_ratio(&[1.0, 1e-12], 10, 1e-10).is_none());
    }
}

use crate::prelude::*;
use nalgebra::{DMatrix, DVector};

/// Two disjoint index groups with convex weights whose weighted means of
/// the input points coincide.
#[derive(Debug, Clone)]
pub struct RadonPartition {
    /// `(point index, weight)`; the smaller group.
    pub first: Vec<(usize, f64)>,
    pub second: Vec<(usize, f64)>,
    /// Largest entry of the difference between the two weighted means.
    pub residual: f64,
}

impl RadonPartition {
    /// The common point `Σ_{S₁} w M = Σ_{S₂} w M`, evaluated on `first`.
    pub fn common_point(&self, points: &[CMatrix]) -> CMatrix {
        weighted_sum(points, &self.first)
    }
}

pub(crate) fn weighted_sum(points: &[CMatrix], group: &[(usize, f64)]) -> CMatrix {
    let (r, c) = points[group[0].0].shape();
    let mut acc = CMatrix::zeros(r, c);
    for &(k, w) in group {
        acc += points[k].scale(w);
    }
    acc
}

/// Real coordinates of a Hermitian matrix: the diagonal, then real and
/// imaginary parts of the strict upper triangle.
pub(crate) fn hermitian_coordinates(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    out.extend((0..d).map(|i| m[(i, i)].re));
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

/// Radon partition of Hermitian points from an affine dependence
/// `Σ α_k M(k) = 0`, `Σ α_k = 0`, split by the sign of `α`.
///
/// The dependence is the right singular vector of the smallest singular
/// value of the coordinate system. It always exists once there are at
/// least `d² + 2` points; with fewer it may still exist.
pub fn radon_partition(points: &[CMatrix]) -> Result<RadonPartition> {
    let p = points.len();
    let d = points.first().map_or(0, |m| m.nrows());
    if points.iter().any(|m| m.shape() != (d, d)) {
        return Err(Error::InvalidArgument("Radon points must share one square shape".into()));
    }
    let required = d * d + 2;
    if p < 2 {
        return Err(Error::InsufficientPoints { points: p, required });
    }
    let rows = d * d + 1;
    // Pad to at least p rows so the SVD exposes every right singular vector.
    let mut a = DMatrix::<f64>::zeros(rows.max(p), p);
    let mut scale: f64 = 1.0;
    for (k, m) in points.iter().enumerate() {
        for (r, x) in hermitian_coordinates(m).into_iter().enumerate() {
            a[(r, k)] = x;
            scale = scale.max(x.abs());
        }
        a[(rows - 1, k)] = 1.0;
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smallest = (0..svd.singular_values.len())
        .min_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]))
        .expect("at least two points");
    let alpha: DVector<f64> = v_t.row(smallest).transpose();
    let dependence = (&a * &alpha).amax();
    if dependence > 1e-10 * scale {
        return Err(if p < required {
            Error::InsufficientPoints { points: p, required }
        } else {
            Error::RadonInfeasible(alloc::format!("affine system residual {dependence:.3e}"))
        });
    }
    let cutoff = 1e-12 * alpha.amax();
    let positive: Vec<(usize, f64)> =
        alpha.iter().enumerate().filter(|(_, &x)| x > cutoff).map(|(k, &x)| (k, x)).collect();
    let negative: Vec<(usize, f64)> =
        alpha.iter().enumerate().filter(|(_, &x)| x < -cutoff).map(|(k, &x)| (k, -x)).collect();
    if positive.is_empty() || negative.is_empty() {
        return Err(Error::RadonInfeasible("dependence has a single sign".into()));
    }
    let normalize = |g: Vec<(usize, f64)>| {
        let total: f64 = g.iter().map(|x| x.1).sum();
        g.into_iter().map(|(k, w)| (k, w / total)).collect::<Vec<_>>()
    };
    let (mut first, mut second) = (normalize(positive), normalize(negative));
    if second.len() < first.len() {
        core::mem::swap(&mut first, &mut second);
    }
    let residual = crate::tensor::max_abs(&(weighted_sum(points, &first) - weighted_sum(points, &second)));
    Ok(RadonPartition { first, second, residual })
}

/// Nonnegative least squares `min ‖Ax − b‖, x ≥ 0` (Lawson–Hanson).
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.amax().max(1.0) * (n as f64);
    let solve = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        let sub = a.select_columns(&idx);
        let sol = sub.svd(true, true).solve(b, 1e-14).expect("SVD vectors requested");
        let mut full = DVector::zeros(n);
        for (k, &i) in idx.iter().enumerate() {
            full[i] = sol[k];
        }
        full
    };
    for _ in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&i| !passive[i]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match candidate {
            Some(j) if w[j] > tol => passive[j] = true,
            _ => break,
        }
        loop {
            let s = solve(&passive);
            let blocked: Vec<usize> = (0..n).filter(|&i| passive[i] && s[i] <= 0.0).collect();
            if blocked.is_empty() {
                x = s;
                break;
            }
            let step = blocked.iter().map(|&i| x[i] / (x[i] - s[i])).fold(f64::INFINITY, f64::min);
            x += (&s - &x) * step;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    x
}

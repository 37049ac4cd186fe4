use alloc::collections::BTreeMap;

use crate::link::{final_states, LinkModel, LinkSimulator, Schedule};
use crate::prelude::*;
use crate::protocol::parity::{ab_index, MAX_DENSE_AB};
use crate::protocol::{filtered, is_yes, ProtocolRun, EMPTY_NORM};
use crate::tensor::{DensityOperator, HilbertFactorization};

/// Knill–Laflamme check of the map `ψ ↦ σ_AB(ψ)` conditioned on NO, with
/// the mediator as environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoBranchReport {
    /// `max |⟨ψ_i|𝒦_a†𝒦_b|ψ_j⟩ − δ_ij M_ab|`, normalized by the NO
    /// probability.
    pub residual: f64,
    /// Average NO probability over the checked basis.
    pub no_probability: f64,
    pub logical_dim: usize,
}

/// Normalized `A ⊗ B` state of the NO branch, mediator traced out.
pub fn sigma_no(run: &ProtocolRun) -> Result<DensityOperator> {
    let sim = run.simulator();
    let registers = sim.basis().alice() + sim.basis().bob();
    let dim = 3usize.pow(registers as u32);
    if dim > MAX_DENSE_AB {
        return Err(Error::UnsupportedLink(alloc::format!("A⊗B dimension {dim} is too large for a dense state")));
    }
    let no = filtered(sim, &run.final_state, |c| !is_yes(sim, c));
    let weight = no.norm_squared();
    if weight <= EMPTY_NORM * EMPTY_NORM {
        return Err(Error::NoOutcome);
    }
    // Group amplitudes by mediator mask, then sum the outer products.
    let mut by_mask: BTreeMap<u64, CVector> = BTreeMap::new();
    for (i, c) in sim.basis().configs().iter().enumerate() {
        if no[i] != ZERO {
            by_mask.entry(c.mask).or_insert_with(|| CVector::zeros(dim))[ab_index(sim, c.registers)] += no[i];
        }
    }
    let mut rho = CMatrix::zeros(dim, dim);
    for v in by_mask.values() {
        rho.gerc(ONE, v, v, ONE);
    }
    DensityOperator::new(rho.unscale(weight), HilbertFactorization::uniform(3, registers))
}

/// Checks the NO branch on the full logical space (`code = None`) or on
/// the span of the columns of `code`.
pub fn verify_no_branch(model: &LinkModel, schedule: &Schedule, code: Option<&CMatrix>) -> Result<NoBranchReport> {
    let sim = LinkSimulator::new(model, schedule)?;
    no_branch_on(&sim, code)
}

pub(crate) fn no_branch_on(sim: &LinkSimulator, code: Option<&CMatrix>) -> Result<NoBranchReport> {
    let d = 1usize << sim.uses();
    let q = code.cloned().unwrap_or_else(|| CMatrix::identity(d, d));
    if q.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: q.nrows() });
    }
    let l = q.ncols();
    let finals = final_states(sim)?;
    let mut rows: BTreeMap<u128, usize> = BTreeMap::new();
    let mut cols: BTreeMap<u64, usize> = BTreeMap::new();
    for (i, c) in sim.basis().configs().iter().enumerate() {
        if !is_yes(sim, c) && finals.iter().any(|f| f[i] != ZERO) {
            let r = rows.len();
            rows.entry(c.registers).or_insert(r);
            let m = cols.len();
            cols.entry(c.mask).or_insert(m);
        }
    }
    if rows.is_empty() {
        return Ok(NoBranchReport { residual: 0.0, no_probability: 0.0, logical_dim: l });
    }
    // F[y, (μ, x)] = ⟨y, μ|Π_NO|f_x⟩, then the code basis is applied per μ.
    let envs = cols.len();
    let mut f = CMatrix::zeros(rows.len(), envs * d);
    for (x, fx) in finals.iter().enumerate() {
        for (i, c) in sim.basis().configs().iter().enumerate() {
            if fx[i] != ZERO && !is_yes(sim, c) {
                f[(rows[&c.registers], cols[&c.mask] * d + x)] += fx[i];
            }
        }
    }
    let mut fq = CMatrix::zeros(rows.len(), envs * l);
    for mu in 0..envs {
        let block = f.columns(mu * d, d) * &q;
        fq.columns_mut(mu * l, l).copy_from(&block);
    }
    let gram = fq.adjoint() * &fq;
    let no_probability = gram.trace().re / l as f64;
    if no_probability <= EMPTY_NORM {
        return Ok(NoBranchReport { residual: 0.0, no_probability, logical_dim: l });
    }
    let mut residual: f64 = 0.0;
    for mu in 0..envs {
        for nu in 0..envs {
            let block = gram.view((mu * l, nu * l), (l, l));
            let mean = block.trace() / l as f64;
            for a in 0..l {
                for b in 0..l {
                    let target = if a == b { mean } else { ZERO };
                    residual = residual.max((block[(a, b)] - target).norm());
                }
            }
        }
    }
    Ok(NoBranchReport { residual: residual / no_probability, no_probability, logical_dim: l })
}

//! The receiver-side map `𝒩(ω) = Tr_b[(S_b e^{−iHτ})(ω ⊗ |E⟩⟨E|)(⋯)†]`
//! that Bob's swaps induce on the mediator, and its spectral analysis.
//!
//! Everything here runs on a mediator sector with a bounded number of up
//! spins, which both `e^{−iHτ}` and Bob's absorptions leave invariant.

use crate::channel::{compose, Composition, KrausChannel};
use crate::link::{
    excitation_block, final_states, gate, kraus_on, masks_with_popcount, Configuration, LinkModel, LinkSimulator,
    Output, DEFAULT_SECTOR_BUDGET, FIDUCIARY,
};
use crate::prelude::*;
use crate::tensor::{herm_exp, hermitian_eigen, DensityOperator, HilbertFactorization};

mod spectrum;

pub use spectrum::{decay_ratio, fixed_point_purity, iterate_convergence, to_spectrum, SpectralReport, Superoperator};

/// Moduli above `1 − PERIPHERAL_TOL` count as peripheral.
pub const PERIPHERAL_TOL: f64 = 1e-10;

/// Purity at or above `1 − DRAINING_TOL` marks an information-draining
/// fixed point.
pub const DRAINING_TOL: f64 = 1e-9;

/// Mediator masks with at most `max_excitations` up spins, ordered by
/// popcount and then by value.
pub fn sector_masks(model: &LinkModel, max_excitations: usize) -> Vec<u64> {
    (0..=max_excitations.min(model.spins())).flat_map(|s| masks_with_popcount(model.spins(), s)).collect()
}

/// `𝒩` on the mediator states with at most one up spin.
pub fn receiver_map(model: &LinkModel) -> Result<KrausChannel> {
    receiver_map_sector(model, 1)
}

/// `𝒩` on the mediator states with at most `max_excitations` up spins.
/// The three Kraus operators are labelled by the symbol Bob's fresh memory
/// ends up holding.
pub fn receiver_map_sector(model: &LinkModel, max_excitations: usize) -> Result<KrausChannel> {
    model.require_dual_rail()?;
    let masks = sector_masks(model, max_excitations);
    let d = masks.len();
    let position = |m: u64| masks.binary_search_by_key(&(m.count_ones(), m), |x| (x.count_ones(), *x)).ok();
    // Block-diagonal free evolution over the popcount blocks.
    let mut u = CMatrix::zeros(d, d);
    let mut offset = 0;
    for s in 0..=max_excitations.min(model.spins()) {
        let block = herm_exp(&excitation_block(model, s), model.tau())?;
        u.view_mut((offset, offset), block.shape()).copy_from(&block);
        offset += block.nrows();
    }
    let bob = model.bob_spins();
    let spins = [bob[0], bob[1]];
    let mut kraus = vec![CMatrix::zeros(d, d); 3];
    let fresh = Configuration { registers: FIDUCIARY as u128, mask: 0 };
    for (j, &mask) in masks.iter().enumerate() {
        let after = gate(Configuration { mask, ..fresh }, 0, spins);
        let row = position(after.mask).expect("absorption lowers the popcount");
        let symbol = after.symbol(0) as usize;
        for col in 0..d {
            kraus[symbol][(row, col)] += u[(j, col)];
        }
    }
    let space = HilbertFactorization::flat(d);
    KrausChannel::new(kraus)?.with_spaces(space.clone(), space)
}

/// `Λ̃(ρ) = Tr_M[S_A(ρ ⊗ ω*)S_A†]` from a logical qubit to Alice's qutrit,
/// with `ω*` the fixed point of the first-excitation receiver map.
pub fn effective_memoryless(model: &LinkModel) -> Result<KrausChannel> {
    let masks = sector_masks(model, 1);
    let report = to_spectrum(&Superoperator::new(receiver_map(model)?));
    if !report.is_mixing {
        return Err(Error::NotMixing("receiver map has no unique attracting fixed point".into()));
    }
    let omega = report.fixed_points[0].matrix();
    let (weights, vectors) = hermitian_eigen(omega);
    let alice = model.alice_spins();
    let spins = [alice[0], alice[1]];
    let mut ops: alloc::collections::BTreeMap<(usize, u64), CMatrix> = Default::default();
    for (j, &p) in weights.iter().enumerate() {
        if p <= 1e-14 {
            continue;
        }
        for x in 0..2u8 {
            for (i, &mask) in masks.iter().enumerate() {
                let after = gate(Configuration { registers: x as u128, mask }, 0, spins);
                let amp = vectors[(i, j)] * p.sqrt();
                ops.entry((j, after.mask)).or_insert_with(|| CMatrix::zeros(3, 2))
                    [(after.symbol(0) as usize, x as usize)] += amp;
            }
        }
    }
    KrausChannel::new(ops.into_values().collect())?
        .with_spaces(HilbertFactorization::flat(2), HilbertFactorization::flat(3))
}

/// Choi distance between `Λ_{A→A}^(n)` for the given Bob budgets and
/// `Λ̃^⊗n`. Zero budgets are allowed and model uses without any Bob
/// interaction.
pub fn memoryless_deviation(model: &LinkModel, budgets: &[usize]) -> Result<f64> {
    let single = effective_memoryless(model)?;
    let sim = LinkSimulator::from_budgets(model, budgets, DEFAULT_SECTOR_BUDGET)?;
    let link = kraus_on(&sim, &final_states(&sim)?, Output::Alice)?;
    let mut product = KrausChannel::identity(1);
    for _ in 0..budgets.len() {
        product = compose(&product, &single, Composition::Parallel)?;
    }
    link.choi_distance(&product)
}

/// The mediator ground state as a density operator on a receiver sector.
pub fn ground_state(dim: usize) -> DensityOperator {
    let mut m = CMatrix::zeros(dim, dim);
    m[(0, 0)] = ONE;
    DensityOperator::new(m, HilbertFactorization::flat(dim)).expect("projector is a state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::verify_cptp;
    use crate::tensor::{random_density, seeded_rng};

    #[test]
    fn single_site_receiver_map_resets() {
        let model = LinkModel::dual_rail(1, 1.0, 0.8).unwrap();
        let n = receiver_map(&model).unwrap();
        assert_eq!(n.input_dim(), 3);
        let mut rng = seeded_rng(2);
        let rho = random_density(&HilbertFactorization::flat(3), &mut rng);
        let out = n.apply(&rho).unwrap();
        assert!(out.max_deviation(&ground_state(3)) < 1e-14);
    }

    #[test]
    fn frozen_mediator_keeps_ground() {
        let model = LinkModel::dual_rail(3, 1.0, 0.0).unwrap();
        let n = receiver_map(&model).unwrap();
        let out = n.apply(&ground_state(7)).unwrap();
        assert!(out.max_deviation(&ground_state(7)) < 1e-14);
    }

    #[test]
    fn larger_sectors_are_cptp() {
        let model = LinkModel::dual_rail(3, 1.0, 1.1).unwrap();
        for k in 0..=3 {
            let n = receiver_map_sector(&model, k).unwrap();
            assert!(verify_cptp(&n, 1e-12).passes, "sector {k}");
        }
    }

    #[test]
    fn receiver_map_matches_link_simulation() {
        // After Alice's swap, m Bob couplings in the full simulator leave the
        // mediator in 𝒩^m of the freshly injected excitation.
        let model = LinkModel::dual_rail(3, 1.0, 1.3).unwrap();
        let n = receiver_map(&model).unwrap();
        let masks = sector_masks(&model, 1);
        for m in [1usize, 2, 5] {
            let sim = LinkSimulator::from_budgets(&model, &[m], DEFAULT_SECTOR_BUDGET).unwrap();
            let mut e = CVector::zeros(2);
            e[0] = ONE;
            let out = sim.run(&sim.initial_state(&e).unwrap());
            let mut reduced = CMatrix::zeros(masks.len(), masks.len());
            let configs = sim.basis().configs();
            for (i, a) in configs.iter().enumerate() {
                for (j, b) in configs.iter().enumerate() {
                    if a.registers == b.registers {
                        let r = masks.iter().position(|&x| x == a.mask).unwrap();
                        let c = masks.iter().position(|&x| x == b.mask).unwrap();
                        reduced[(r, c)] += out[i] * out[j].conj();
                    }
                }
            }
            let mut iterated = CMatrix::zeros(masks.len(), masks.len());
            iterated[(1, 1)] = ONE; // chain 0, first site
            let mut composed = n.clone();
            for _ in 1..m {
                composed = compose(&n, &composed, Composition::Sequential).unwrap();
            }
            iterated = composed.apply_matrix(&iterated).unwrap();
            assert!(crate::tensor::max_abs(&(reduced - iterated)) < 1e-10, "m = {m}");
        }
    }

    #[test]
    fn single_site_link_is_memoryless() {
        let model = LinkModel::dual_rail(1, 1.0, 0.6).unwrap();
        assert!(memoryless_deviation(&model, &[1, 1]).unwrap() < 1e-10);
    }

    #[test]
    fn skipping_bob_leaves_memory() {
        let model = LinkModel::dual_rail(2, 1.0, 1.2).unwrap();
        assert!(memoryless_deviation(&model, &[0, 0]).unwrap() > 0.1);
    }
}

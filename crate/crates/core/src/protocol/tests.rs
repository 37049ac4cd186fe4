use core::f64::consts::PI;

use super::*;

use crate::tensor::{max_abs, unitarity_deviation};

fn logical(n: usize, x: usize) -> StateVector {
    StateVector::basis(HilbertFactorization::uniform(2, n), x)
}

fn model(sites: usize, tau: f64) -> LinkModel {
    LinkModel::dual_rail(sites, 1.0, tau).unwrap()
}

#[test]
fn single_site_link_is_perfect() {
    let r = run(&model(1, 0.5), &Schedule::uniform(1, 1).unwrap(), &logical(1, 1)).unwrap();
    assert!((r.eta0 - 1.0).abs() < 1e-12);
    assert!((r.pi_n - 1.0).abs() < 1e-12);
    assert_eq!(r.chi_component.norm(), 0.0);
    let p = success_probabilities(&model(1, 0.5), &Schedule::new(vec![1, 2]).unwrap()).unwrap();
    assert!(p.iter().all(|&x| (x - 1.0).abs() < 1e-12));
}

#[test]
fn two_site_transfer_follows_sine() {
    // One excitation hops between the two sites of a chain with amplitude
    // −i sin(Jτ).
    let s = Schedule::uniform(1, 1).unwrap();
    let full = run(&model(2, PI / 2.0), &s, &logical(1, 0)).unwrap();
    assert!((full.pi_n - 1.0).abs() < 1e-9);
    let half = run(&model(2, PI / 4.0), &s, &logical(1, 0)).unwrap();
    assert!((half.pi_n - 0.5).abs() < 1e-9);
    let (yes, no) = parity_probabilities(&half);
    assert!((yes - 0.5).abs() < 1e-9 && (no - 0.5).abs() < 1e-9);
}

#[test]
fn success_grows_with_budget() {
    let mut last = 0.0;
    for m in [1, 2, 4, 8] {
        let p = success_probabilities(&model(2, 0.7), &Schedule::uniform(1, m).unwrap()).unwrap()[0];
        // Each failed swap leaves amplitude cos(Jτ) behind.
        assert!((p - (1.0 - 0.7f64.cos().powi(2 * m as i32))).abs() < 1e-12);
        assert!(p >= last);
        last = p;
    }
}

#[test]
fn decomposition_is_complete_and_orthogonal() {
    let schedule = Schedule::new(vec![2, 1]).unwrap();
    for sites in [2, 3] {
        let panel = standard_panel(2, 17);
        let r = run(&model(sites, 1.1), &schedule, &panel[3]).unwrap();
        let pi = r.pi_n;
        let eta = r.eta0;
        assert!(eta >= pi - 1e-10);
        let rebuilt = r.phi_component.scale(eta.sqrt()) + r.chi_component.scale((1.0 - eta).sqrt());
        assert!((&rebuilt - &r.final_state).norm() < 1e-10);
        let phi = r.yes_component.scale((pi / eta).sqrt()) + r.delta_component.scale((1.0 - pi / eta).sqrt());
        assert!((&phi - &r.phi_component).norm() < 1e-10);
        assert!(r.phi_component.dotc(&r.chi_component).norm() < 1e-10);
        assert!(r.yes_component.dotc(&r.delta_component).norm() < 1e-10);
        // χ has no ground-mediator support.
        let sim = r.simulator();
        for (i, c) in sim.basis().configs().iter().enumerate() {
            if c.mask == 0 {
                assert_eq!(r.chi_component[i], ZERO);
            }
        }
    }
}

#[test]
fn delta_is_orthogonal_to_every_bob_yes_state() {
    // Δ never has one excitation in each sub-register, so its overlap with
    // any |E…E⟩⊗|Φ_B⟩ vanishes on B alone.
    let schedule = Schedule::new(vec![1, 2]).unwrap();
    let r = run(&model(3, 0.9), &schedule, &standard_panel(2, 3)[3]).unwrap();
    let sim = r.simulator();
    for (i, c) in sim.basis().configs().iter().enumerate() {
        if r.delta_component[i] != ZERO {
            assert!(!is_yes(sim, c));
        }
    }
}

#[test]
fn leading_schmidt_vector_is_ground() {
    let r = run(&model(2, 1.3), &Schedule::uniform(2, 3).unwrap(), &standard_panel(2, 5)[2]).unwrap();
    assert!(r.pi_n > 0.5);
    assert!((r.schmidt.coefficients[0].powi(2) - r.eta0).abs() < 1e-9);
    assert!((r.schmidt.ground_overlap() - 1.0).abs() < 1e-9);
    let total: f64 = r.schmidt.coefficients.iter().map(|c| c * c).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn probabilities_do_not_depend_on_the_message() {
    let schedule = Schedule::new(vec![2, 1]).unwrap();
    let panel = standard_panel(2, 11);
    let sym = verify_input_independence(&model(3, 1.2), &schedule, &panel).unwrap();
    assert!(sym.max_spread() < 1e-10);
    let one =
        verify_input_independence(&model(2, 0.8), &Schedule::uniform(1, 1).unwrap(), &[logical(1, 0), logical(1, 1)])
            .unwrap();
    assert!(one.p_spread < 1e-12);
    let broken = LinkModel::asymmetric_dual_rail(3, 1.0, 0.55, 1.2).unwrap();
    assert!(verify_input_independence(&broken, &schedule, &panel).unwrap().max_spread() > 1e-3);
}

#[test]
fn rail_exchange_leaves_probabilities_invariant() {
    let schedule = Schedule::new(vec![1, 2]).unwrap();
    let m = model(3, 0.95);
    let psi = &standard_panel(2, 23)[3];
    let flipped: Vec<Complex64> = (0..4).map(|x| psi.amplitudes()[3 - x]).collect();
    let a = run(&m, &schedule, psi).unwrap();
    let b = run(&m, &schedule, &StateVector::from_amplitudes(flipped)).unwrap();
    for (p, q) in a.p_list.iter().zip(&b.p_list) {
        assert!((p - q).abs() < 1e-12);
    }
    assert!((a.eta0 - b.eta0).abs() < 1e-12);
    // The final states are related by the rail swap itself.
    let swapped = a.simulator().rail_swap(&a.final_state);
    assert!((swapped - &b.final_state).norm() < 1e-12);
}

#[test]
fn yes_probability_is_the_product() {
    let schedule = Schedule::new(vec![2, 2]).unwrap();
    let r = run(&model(3, 1.0), &schedule, &standard_panel(2, 2)[3]).unwrap();
    let (yes, _) = parity_probabilities(&r);
    assert!((yes - r.pi_n).abs() < 1e-10);
    let shots = 100_000;
    let hits = sample_parity(&r, shots, 99) as f64;
    let sigma = (shots as f64 * yes * (1.0 - yes)).sqrt();
    assert!((hits - shots as f64 * yes).abs() < 3.0 * sigma);
    let branch = project_parity(&r, Parity::Yes).unwrap();
    let sim = r.simulator();
    for (i, c) in sim.basis().configs().iter().enumerate() {
        if branch.state[i] != ZERO {
            assert!(is_yes(sim, c) && c.mask == 0);
            assert_eq!(c.excited_in(0..sim.uses()), 0);
        }
    }
}

#[test]
fn certain_yes_when_transfer_is_perfect() {
    let r = run(&model(1, 0.3), &Schedule::uniform(2, 1).unwrap(), &standard_panel(2, 1)[3]).unwrap();
    let mut rng = seeded_rng(0);
    assert_eq!(parity_measurement(&r, &mut rng).unwrap().outcome, Parity::Yes);
    assert!(matches!(project_parity(&r, Parity::No), Err(Error::NoOutcome)));
}

#[test]
fn bob_recovers_the_message() {
    for (sites, budgets) in [(2usize, vec![1usize]), (3, vec![2, 1])] {
        let schedule = Schedule::new(budgets).unwrap();
        let n = schedule.uses();
        let psi = standard_panel(n, 31)[3].clone();
        let r = run(&model(sites, 1.05), &schedule, &psi).unwrap();
        let yes = project_parity(&r, Parity::Yes).unwrap();
        let rec = recover_yes(&r, &yes).unwrap();
        assert!(rec.fidelity > 1.0 - 1e-9, "fidelity {}", rec.fidelity);
        assert!(rec.decoder_residual < 1e-10);
        if r.pi_n < 1.0 - 1e-9 {
            let no = project_parity(&r, Parity::No).unwrap();
            assert!(matches!(recover_yes(&r, &no), Err(Error::RequiresYes)));
        }
    }
}

#[test]
fn reconstruction_unitaries_match_the_branches() {
    let schedule = Schedule::new(vec![1, 1]).unwrap();
    let m = model(2, 1.1);
    let sim = Arc::new(LinkSimulator::new(&m, &schedule).unwrap());
    let reference = run_on(sim.clone(), &logical(2, 0)).unwrap();
    let rec = reconstruction_unitaries(&sim, reference.pi_n, reference.eta0).unwrap().unwrap();
    assert!(unitarity_deviation(&rec.u_prime) < 1e-10);
    let u2 = rec.u_double_prime.as_ref().unwrap();
    assert!(unitarity_deviation(u2) < 1e-10);
    let dim = rec.u_prime.nrows();
    for psi in standard_panel(2, 41) {
        let r = run_on(sim.clone(), &psi).unwrap();
        let input = embed_logical(&sim, psi.amplitudes());
        let yes = dense_ab(&sim, &r.yes_component, dim);
        assert!((&rec.u_prime * &input - yes).norm() < 1e-9);
        let delta = dense_ab(&sim, &r.delta_component, dim);
        assert!((u2 * &input - delta).norm() < 1e-9);
    }
}

#[test]
fn no_branch_state_matches_decomposition() {
    let schedule = Schedule::new(vec![1, 1]).unwrap();
    let r = run(&model(2, 1.1), &schedule, &standard_panel(2, 8)[3]).unwrap();
    let sigma = sigma_no(&r).unwrap();
    assert!((sigma.trace() - 1.0).abs() < 1e-10);
    sigma.validate(1e-10).unwrap();
    // [(η₀ − Π)|Δ⟩⟨Δ| + (1 − η₀) Tr_M |χ⟩⟨χ|] / (1 − Π)
    let sim = r.simulator();
    let dim = sigma.dim();
    let delta = dense_ab(sim, &r.delta_component, dim);
    let mut expected = (&delta * delta.adjoint()).scale(r.eta0 - r.pi_n);
    let mut by_mask: alloc::collections::BTreeMap<u64, CVector> = Default::default();
    for (i, c) in sim.basis().configs().iter().enumerate() {
        if c.mask != 0 {
            by_mask.entry(c.mask).or_insert_with(|| CVector::zeros(dim))
                [crate::protocol::parity::ab_index(sim, c.registers)] += r.chi_component[i];
        }
    }
    for v in by_mask.values() {
        expected += (v * v.adjoint()).scale(1.0 - r.eta0);
    }
    expected.unscale_mut(1.0 - r.pi_n);
    assert!(max_abs(&(sigma.matrix() - expected)) < 1e-10);
}

#[test]
fn no_branch_single_use_loses_the_rail() {
    // One use at τ = π/4: the NO branch is the excitation still in the
    // mediator, on the rail that encodes the message, while A and B both
    // read |E⟩. The Knill–Laflamme residual is exactly 1.
    let report = verify_no_branch(&model(2, PI / 4.0), &Schedule::uniform(1, 1).unwrap(), None).unwrap();
    assert!((report.no_probability - 0.5).abs() < 1e-9);
    assert!((report.residual - 1.0).abs() < 1e-9);
}

#[test]
fn no_branch_edge_cases() {
    let vacuous = verify_no_branch(&model(1, 0.4), &Schedule::uniform(2, 1).unwrap(), None).unwrap();
    assert_eq!(vacuous.residual, 0.0);
    let line = CMatrix::from_column_slice(4, 1, &[ONE, ZERO, ZERO, ZERO]);
    let one_dim = verify_no_branch(&model(2, 0.9), &Schedule::uniform(2, 1).unwrap(), Some(&line)).unwrap();
    assert!(one_dim.residual < 1e-12);
    assert!(
        verify_no_branch(&model(2, 0.9), &Schedule::uniform(2, 1).unwrap(), Some(&CMatrix::identity(3, 3))).is_err()
    );
}

//! The dual-rail transfer protocol: run `W`, split the final state by
//! mediator occupation and by Bob's parity check, and account for the cost
//! of the failure branch.

use alloc::sync::Arc;

use crate::link::{masks_with_popcount, Configuration, LinkModel, LinkSimulator, Schedule};
use crate::prelude::*;
use crate::tensor::{hermitian_eigen, random_state, seeded_rng, HilbertFactorization, StateVector};

mod no_branch;
mod parity;
mod rates;

pub use no_branch::{sigma_no, verify_no_branch, NoBranchReport};
pub use parity::{
    dense_ab, embed_logical, parity_measurement, parity_probabilities, project_parity, reconstruction_unitaries,
    recover_yes, sample_parity, BobDecoder, Parity, ParityOutcome, Reconstruction, Recovery,
};
pub use rates::{resource_accounting, RateMode, RateReport};

/// Amplitudes below this norm make a component empty.
const EMPTY_NORM: f64 = 1e-14;

/// Schmidt data of the final state across `AB | M`, kept on the mediator
/// side only.
#[derive(Debug, Clone)]
pub struct MediatorSchmidt {
    /// Decreasing Schmidt coefficients.
    pub coefficients: Vec<f64>,
    /// Mediator masks indexing the vectors, ground first.
    pub masks: Vec<u64>,
    /// Mediator Schmidt vectors over `masks`.
    pub vectors: Vec<CVector>,
}

impl MediatorSchmidt {
    /// `|⟨↓…↓|v₀⟩|`, the overlap of the leading mediator vector with ground.
    pub fn ground_overlap(&self) -> f64 {
        self.vectors.first().map_or(0.0, |v| v[0].norm())
    }
}

/// One protocol execution. Every vector lives on the simulator's sector
/// basis; `phi`, `yes` and `delta` are supported on the ground mediator.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    sim: Arc<LinkSimulator>,
    pub input_psi: StateVector,
    pub final_state: CVector,
    /// Probability of finding the mediator in its ground state.
    pub eta0: f64,
    pub pi_n: f64,
    pub p_list: Vec<f64>,
    /// Normalized ground-mediator part `|Φ_ψ⟩ ⊗ |ω⟩`.
    pub phi_component: CVector,
    /// Normalized excited-mediator part `|χ_ψ⟩`.
    pub chi_component: CVector,
    /// Normalized parity-YES part `|E⟩^⊗n ⊗ |Φ_ψ⟩_B ⊗ |ω⟩`.
    pub yes_component: CVector,
    /// Normalized ground-mediator, parity-NO part `|Δ_ψ⟩ ⊗ |ω⟩`.
    pub delta_component: CVector,
    pub schmidt: MediatorSchmidt,
}

impl ProtocolRun {
    pub fn simulator(&self) -> &LinkSimulator {
        &self.sim
    }

    pub fn uses(&self) -> usize {
        self.sim.uses()
    }
}

/// Whether every sub-register `B^(k)` holds exactly one excitation.
pub(crate) fn is_yes(sim: &LinkSimulator, c: &Configuration) -> bool {
    (0..sim.uses()).all(|k| c.excited_in(sim.subregister(k)) == 1)
}

fn filtered(sim: &LinkSimulator, v: &CVector, keep: impl Fn(&Configuration) -> bool) -> CVector {
    let mut out = v.clone();
    for (i, c) in sim.basis().configs().iter().enumerate() {
        if !keep(c) {
            out[i] = ZERO;
        }
    }
    out
}

fn normalized_or_zero(v: CVector) -> CVector {
    let n = v.norm();
    if n <= EMPTY_NORM {
        CVector::zeros(v.len())
    } else {
        v.unscale(n)
    }
}

/// `p_k` along the trajectory in which every earlier transfer succeeded:
/// after `V_k S_{a_k}` the state is projected on "`B^(k)` holds one
/// excitation", which also forces the mediator back to ground.
pub fn trajectory_probabilities(sim: &LinkSimulator, initial: &CVector) -> Vec<f64> {
    let mut state = initial.clone();
    let mut out = Vec::with_capacity(sim.uses());
    for k in 0..sim.uses() {
        state = sim.apply_use(k, &state);
        let range = sim.subregister(k);
        let kept = filtered(sim, &state, |c| c.excited_in(range.clone()) == 1);
        let p = kept.norm_squared();
        out.push(p);
        if p <= EMPTY_NORM * EMPTY_NORM {
            out.resize(sim.uses(), 0.0);
            break;
        }
        state = kept.unscale(p.sqrt());
    }
    out
}

/// Per-use success probabilities for the input `|0…0⟩`.
pub fn success_probabilities(model: &LinkModel, schedule: &Schedule) -> Result<Vec<f64>> {
    let sim = LinkSimulator::new(model, schedule)?;
    let mut e = CVector::zeros(1 << sim.uses());
    e[0] = ONE;
    Ok(trajectory_probabilities(&sim, &sim.initial_state(&e)?))
}

fn mediator_schmidt(sim: &LinkSimulator, v: &CVector) -> MediatorSchmidt {
    let spins = sim.model().spins();
    let n = sim.uses();
    let mut offsets = Vec::new();
    let mut masks = Vec::new();
    for s in 0..=n.min(spins) {
        offsets.push(masks.len());
        masks.extend(masks_with_popcount(spins, s));
    }
    let mut rho = CMatrix::zeros(masks.len(), masks.len());
    for (range, s) in sim.basis().groups() {
        let block = v.rows(range.start, range.len());
        if block.norm() == 0.0 {
            continue;
        }
        let o = offsets[*s];
        let mut view = rho.view_mut((o, o), (range.len(), range.len()));
        view += block * block.adjoint();
    }
    let (weights, vectors) = hermitian_eigen(&rho);
    let kept: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > 1e-24).collect();
    MediatorSchmidt {
        coefficients: kept.iter().map(|&j| weights[j].sqrt()).collect(),
        masks,
        vectors: kept.iter().map(|&j| vectors.column(j).into_owned()).collect(),
    }
}

/// Runs the protocol on a simulator that may be shared between runs.
pub fn run_on(sim: Arc<LinkSimulator>, psi: &StateVector) -> Result<ProtocolRun> {
    let n = sim.uses();
    if psi.dim() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: psi.dim() });
    }
    if !psi.is_normalized(crate::STRUCTURAL_TOL) {
        return Err(Error::InvalidState(alloc::format!("input norm {}", psi.norm())));
    }
    let initial = sim.initial_state(psi.amplitudes())?;
    let final_state = sim.run(&initial);
    let p_list = trajectory_probabilities(&sim, &initial);
    let pi_n = p_list.iter().product();
    let ground = filtered(&sim, &final_state, |c| c.mask == 0);
    let excited = &final_state - &ground;
    let yes = filtered(&sim, &final_state, |c| is_yes(&sim, c));
    let delta = &ground - &yes;
    let eta0 = ground.norm_squared();
    let schmidt = mediator_schmidt(&sim, &final_state);
    Ok(ProtocolRun {
        input_psi: psi.clone(),
        eta0,
        pi_n,
        p_list,
        phi_component: normalized_or_zero(ground),
        chi_component: normalized_or_zero(excited),
        yes_component: normalized_or_zero(yes),
        delta_component: normalized_or_zero(delta),
        schmidt,
        final_state,
        sim,
    })
}

/// Runs the protocol for a logical input `psi` on `2^n` amplitudes.
pub fn run(model: &LinkModel, schedule: &Schedule, psi: &StateVector) -> Result<ProtocolRun> {
    run_on(Arc::new(LinkSimulator::new(model, schedule)?), psi)
}

/// `|0…0⟩`, `|1…1⟩`, `|+⟩^⊗n` and one seeded random state.
pub fn standard_panel(uses: usize, seed: u64) -> Vec<StateVector> {
    let space = HilbertFactorization::uniform(2, uses);
    let d = space.total();
    let plus = StateVector::new_unchecked(
        CVector::from_element(d, Complex64::new(1.0 / (d as f64).sqrt(), 0.0)),
        space.clone(),
    );
    let mut rng = seeded_rng(seed);
    vec![
        StateVector::basis(space.clone(), 0),
        StateVector::basis(space.clone(), d - 1),
        plus,
        random_state(&space, &mut rng),
    ]
}

/// Largest spread of the `p_k` and of `η₀` across a panel of inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceReport {
    pub p_spread: f64,
    pub eta_spread: f64,
}

impl IndependenceReport {
    pub fn max_spread(&self) -> f64 {
        self.p_spread.max(self.eta_spread)
    }
}

pub fn verify_input_independence(
    model: &LinkModel,
    schedule: &Schedule,
    panel: &[StateVector],
) -> Result<IndependenceReport> {
    let sim = Arc::new(LinkSimulator::new(model, schedule)?);
    let runs = panel.iter().map(|psi| run_on(sim.clone(), psi)).collect::<Result<Vec<_>>>()?;
    let first = runs.first().ok_or_else(|| Error::InvalidArgument("empty input panel".into()))?;
    let mut report = IndependenceReport { p_spread: 0.0, eta_spread: 0.0 };
    for r in &runs[1..] {
        for (a, b) in r.p_list.iter().zip(&first.p_list) {
            report.p_spread = report.p_spread.max((a - b).abs());
        }
        report.eta_spread = report.eta_spread.max((r.eta0 - first.eta0).abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests;

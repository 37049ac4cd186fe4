use rand::Rng;

use crate::link::{final_states, LinkSimulator};
use crate::prelude::*;
use crate::protocol::{filtered, is_yes, ProtocolRun, EMPTY_NORM};
use crate::tensor::{complete_orthonormal, computational_basis, orthonormality_deviation, seeded_rng, StateVector};

/// Largest `A ⊗ B` dimension for which `U'` and `U''` are materialized.
pub(crate) const MAX_DENSE_AB: usize = 729;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Yes,
    No,
}

/// One branch of Bob's parity check.
#[derive(Debug, Clone)]
pub struct ParityOutcome {
    pub outcome: Parity,
    pub probability: f64,
    /// Normalized post-measurement state on the sector basis.
    pub state: CVector,
}

/// `(P(YES), P(NO))` of the final state.
pub fn parity_probabilities(run: &ProtocolRun) -> (f64, f64) {
    let sim = run.simulator();
    let yes = filtered(sim, &run.final_state, |c| is_yes(sim, c)).norm_squared();
    (yes, run.final_state.norm_squared() - yes)
}

/// The post-measurement branch for a given outcome.
pub fn project_parity(run: &ProtocolRun, outcome: Parity) -> Result<ParityOutcome> {
    let sim = run.simulator();
    let want = outcome == Parity::Yes;
    let branch = filtered(sim, &run.final_state, |c| is_yes(sim, c) == want);
    let probability = branch.norm_squared();
    if probability <= EMPTY_NORM * EMPTY_NORM {
        return Err(Error::NoOutcome);
    }
    Ok(ParityOutcome { outcome, probability, state: branch.unscale(probability.sqrt()) })
}

/// Samples the parity check once.
pub fn parity_measurement<R: Rng + ?Sized>(run: &ProtocolRun, rng: &mut R) -> Result<ParityOutcome> {
    let (yes, no) = parity_probabilities(run);
    let outcome = if rng.random::<f64>() * (yes + no) < yes { Parity::Yes } else { Parity::No };
    project_parity(run, outcome)
}

/// Number of YES outcomes in `shots` projective measurements of the
/// sector configuration, drawn from a generator seeded with `seed`.
pub fn sample_parity(run: &ProtocolRun, shots: usize, seed: u64) -> usize {
    let sim = run.simulator();
    let mut cumulative = Vec::with_capacity(run.final_state.len());
    let mut total = 0.0;
    for a in run.final_state.iter() {
        total += a.norm_sqr();
        cumulative.push(total);
    }
    let mut rng = seeded_rng(seed);
    (0..shots)
        .filter(|_| {
            let u = rng.random::<f64>() * total;
            let i = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
            is_yes(sim, &sim.basis().config(i))
        })
        .count()
}

/// Bob's decoder: the YES images of the logical basis, normalized by a
/// common `√Π`, used as an isometry on `B` (Alice and the mediator are
/// fixed to `|E…E⟩` and ground on the YES branch).
#[derive(Debug, Clone)]
pub struct BobDecoder {
    columns: Vec<CVector>,
}

impl BobDecoder {
    pub fn new(sim: &LinkSimulator, pi_n: f64) -> Result<Self> {
        if pi_n <= EMPTY_NORM {
            return Err(Error::NoOutcome);
        }
        let columns = final_states(sim)?
            .into_iter()
            .map(|f| filtered(sim, &f, |c| is_yes(sim, c)).unscale(pi_n.sqrt()))
            .collect();
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[CVector] {
        &self.columns
    }

    /// Deviation of the columns from an orthonormal set.
    pub fn isometry_residual(&self) -> f64 {
        orthonormality_deviation(&CMatrix::from_columns(&self.columns))
    }

    /// Logical amplitudes `⟨Φ_x|state⟩`.
    pub fn decode(&self, state: &CVector) -> CVector {
        CVector::from_iterator(self.columns.len(), self.columns.iter().map(|c| c.dotc(state)))
    }
}

/// Result of decoding the YES branch.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub bob_state: StateVector,
    /// `|⟨ψ|decoded⟩|²`.
    pub fidelity: f64,
    pub decoder_residual: f64,
}

pub fn recover_yes(run: &ProtocolRun, branch: &ParityOutcome) -> Result<Recovery> {
    if branch.outcome != Parity::Yes {
        return Err(Error::RequiresYes);
    }
    let decoder = BobDecoder::new(run.simulator(), run.pi_n)?;
    let decoded = decoder.decode(&branch.state);
    let fidelity = run.input_psi.amplitudes().dotc(&decoded).norm_sqr();
    Ok(Recovery {
        bob_state: StateVector::new(decoded, run.input_psi.space().clone())?,
        fidelity,
        decoder_residual: decoder.isometry_residual(),
    })
}

/// Concrete unitaries on `A ⊗ B` with `U'(|ψ⟩|E…E⟩) = |E…E⟩|Φ_ψ⟩` and, when
/// the ground-mediator NO part is non-empty, `U''(|ψ⟩|E…E⟩) = |Δ_ψ⟩`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub u_prime: CMatrix,
    pub u_double_prime: Option<CMatrix>,
}

/// Dense `A ⊗ B` index of a sector configuration (Alice's qutrits first).
pub(crate) fn ab_index(sim: &LinkSimulator, registers: u128) -> usize {
    let count = sim.basis().alice() + sim.basis().bob();
    (0..count).fold(0, |acc, r| acc * 3 + ((registers >> (2 * r)) & 0b11) as usize)
}

/// Dense `A ⊗ B` vector of a sector vector supported on the ground mediator.
pub fn dense_ab(sim: &LinkSimulator, v: &CVector, dim: usize) -> CVector {
    let mut out = CVector::zeros(dim);
    for (i, c) in sim.basis().configs().iter().enumerate() {
        if c.mask == 0 {
            out[ab_index(sim, c.registers)] += v[i];
        }
    }
    out
}

fn unitary_from_images(inputs: &[usize], images: &[CVector], dim: usize) -> Result<CMatrix> {
    let out = complete_orthonormal(images, dim, computational_basis(dim))?;
    let seeds: Vec<CVector> = inputs
        .iter()
        .map(|&i| {
            let mut e = CVector::zeros(dim);
            e[i] = ONE;
            e
        })
        .collect();
    let input = complete_orthonormal(&seeds, dim, computational_basis(dim))?;
    Ok(out * input.adjoint())
}

/// Builds `U'` (and `U''` when possible) by completing the logical-basis
/// correspondence; returns `None` when `A ⊗ B` is too large to hold densely.
pub fn reconstruction_unitaries(sim: &LinkSimulator, pi_n: f64, eta0: f64) -> Result<Option<Reconstruction>> {
    let registers = sim.basis().alice() + sim.basis().bob();
    let dim = 3usize.pow(registers as u32);
    if dim > MAX_DENSE_AB || pi_n <= EMPTY_NORM {
        return Ok(None);
    }
    let n = sim.uses();
    let finals = final_states(sim)?;
    let inputs: Vec<usize> = (0..1usize << n).map(|x| ab_index(sim, sim.logical_config(x).registers)).collect();
    let yes: Vec<CVector> =
        finals.iter().map(|f| dense_ab(sim, &filtered(sim, f, |c| is_yes(sim, c)), dim).unscale(pi_n.sqrt())).collect();
    let u_prime = unitary_from_images(&inputs, &yes, dim)?;
    let rest = eta0 - pi_n;
    let u_double_prime = if rest > 1e-9 {
        let delta: Vec<CVector> = finals
            .iter()
            .map(|f| dense_ab(sim, &filtered(sim, f, |c| c.mask == 0 && !is_yes(sim, c)), dim).unscale(rest.sqrt()))
            .collect();
        unitary_from_images(&inputs, &delta, dim).ok()
    } else {
        None
    };
    Ok(Some(Reconstruction { u_prime, u_double_prime }))
}

/// `|x⟩_A|E…E⟩_B` as a dense `A ⊗ B` vector for a logical state.
pub fn embed_logical(sim: &LinkSimulator, logical: &CVector) -> CVector {
    let registers = sim.basis().alice() + sim.basis().bob();
    let mut out = CVector::zeros(3usize.pow(registers as u32));
    for (x, a) in logical.iter().enumerate() {
        out[ab_index(sim, sim.logical_config(x).registers)] += *a;
    }
    out
}

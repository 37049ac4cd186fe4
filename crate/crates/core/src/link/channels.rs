use alloc::collections::BTreeMap;

use crate::channel::{KrausChannel, MultiUseFamily, OutputLayout};
use crate::link::{LinkModel, LinkSimulator, Schedule};
use crate::prelude::*;
use crate::tensor::HilbertFactorization;

/// Largest number of qutrit output registers handled as a dense channel.
const MAX_OUTPUT_REGISTERS: usize = 8;

/// Which memories form the output of a link channel; everything else,
/// including the mediator, is environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Alice,
    Bob,
    AliceBob,
}

/// `W|x⟩_A|E…E⟩_B|↓…↓⟩_M` for every logical string `x`.
pub fn final_states(sim: &LinkSimulator) -> Result<Vec<CVector>> {
    let inputs = 1usize << sim.uses();
    (0..inputs)
        .map(|x| {
            let mut e = CVector::zeros(inputs);
            e[x] = ONE;
            Ok(sim.run(&sim.initial_state(&e)?))
        })
        .collect()
}

/// Kraus operators `K_μ[y, x] = ⟨y, μ|f_x⟩` with `y` ranging over the
/// output registers and `μ` over the remaining registers and the mediator.
pub fn kraus_on(sim: &LinkSimulator, finals: &[CVector], output: Output) -> Result<KrausChannel> {
    let basis = sim.basis();
    let (alice, bob) = (basis.alice(), basis.bob());
    let registers: Vec<usize> = match output {
        Output::Alice => (0..alice).collect(),
        Output::Bob => (alice..alice + bob).collect(),
        Output::AliceBob => (0..alice + bob).collect(),
    };
    if registers.len() > MAX_OUTPUT_REGISTERS {
        return Err(Error::UnsupportedLink(alloc::format!(
            "{} output qutrits exceed the dense limit of {MAX_OUTPUT_REGISTERS}",
            registers.len()
        )));
    }
    let out_dim = 3usize.pow(registers.len() as u32);
    let output_bits = registers.iter().fold(0u128, |m, &r| m | 0b11u128 << (2 * r));
    let mut ops: BTreeMap<(u128, u64), CMatrix> = BTreeMap::new();
    for (x, f) in finals.iter().enumerate() {
        for (i, c) in basis.configs().iter().enumerate() {
            if f[i] == ZERO {
                continue;
            }
            let y = registers.iter().fold(0usize, |acc, &r| acc * 3 + c.symbol(r) as usize);
            let key = (c.registers & !output_bits, c.mask);
            ops.entry(key).or_insert_with(|| CMatrix::zeros(out_dim, finals.len()))[(y, x)] += f[i];
        }
    }
    KrausChannel::new(ops.into_values().collect())?
        .with_spaces(HilbertFactorization::uniform(2, sim.uses()), HilbertFactorization::uniform(3, registers.len()))
}

fn channel(model: &LinkModel, schedule: &Schedule, output: Output) -> Result<KrausChannel> {
    let sim = LinkSimulator::new(model, schedule)?;
    kraus_on(&sim, &final_states(&sim)?, output)
}

/// `Λ_{A→B}`: Alice's logical qubits to Bob's memories.
pub fn channel_a_to_b(model: &LinkModel, schedule: &Schedule) -> Result<KrausChannel> {
    channel(model, schedule, Output::Bob)
}

/// `Λ_{A→AB}`: the mediator is the only environment.
pub fn channel_a_to_ab(model: &LinkModel, schedule: &Schedule) -> Result<KrausChannel> {
    channel(model, schedule, Output::AliceBob)
}

/// `Λ_{A→A}`: what stays in Alice's memories.
pub fn channel_a_to_a(model: &LinkModel, schedule: &Schedule) -> Result<KrausChannel> {
    channel(model, schedule, Output::Alice)
}

/// The link viewed as a multi-use family `Λ_{A→AB}^(n)`, using the first
/// `n` budgets of a schedule.
#[derive(Debug, Clone)]
pub struct LinkFamily {
    model: LinkModel,
    schedule: Schedule,
}

impl LinkFamily {
    pub fn new(model: LinkModel, schedule: Schedule) -> Result<Self> {
        model.require_dual_rail()?;
        Ok(Self { model, schedule })
    }

    fn prefix(&self, uses: usize) -> Result<Schedule> {
        if uses > self.schedule.uses() {
            return Err(Error::InvalidArgument(alloc::format!(
                "schedule has {} uses, {uses} requested",
                self.schedule.uses()
            )));
        }
        Ok(self.schedule.prefix(uses))
    }
}

impl MultiUseFamily for LinkFamily {
    fn carrier_dim(&self) -> usize {
        2
    }

    fn channel(&self, uses: usize) -> Result<KrausChannel> {
        channel_a_to_ab(&self.model, &self.prefix(uses)?)
    }

    fn output_layout(&self, uses: usize) -> Result<OutputLayout> {
        let schedule = self.prefix(uses)?;
        let mut owners: Vec<usize> = (0..uses).collect();
        for (k, &m) in schedule.budgets().iter().enumerate() {
            owners.extend(core::iter::repeat_n(k, m));
        }
        Ok(OutputLayout { factors: HilbertFactorization::uniform(3, owners.len()), owners })
    }

    fn env_dim(&self, _uses: usize) -> Result<usize> {
        Ok(self.model.mediator_dim())
    }
}

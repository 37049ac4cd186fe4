//! Dual-rail spin-chain mediator.
//!
//! The mediator `M` is `L` parallel chains of `N` spins-½. Spin `site` of
//! chain `c` is mediator spin `c·N + site`, bit `c·N + site` of a
//! configuration mask (set = spin up). Alice's gates touch the first spin
//! of every chain, Bob's the last. Memories are qutrits with message
//! symbols `0`, `1` and the fiduciary symbol `E`.
//!
//! Every operation conserves the total excitation number (message symbols
//! in memories plus up spins), so evolution runs in a fixed sector.

use crate::prelude::*;

mod channels;
mod hamiltonian;
mod sector;
mod simulator;

pub use channels::{channel_a_to_a, channel_a_to_ab, channel_a_to_b, final_states, kraus_on, LinkFamily, Output};
pub use hamiltonian::{build_hamiltonian, excitation_block, mask_to_index, masks_with_popcount};
pub use sector::{sector_basis, sector_dimension, Configuration, SectorBasis, DEFAULT_SECTOR_BUDGET};
pub(crate) use simulator::gate;
pub use simulator::LinkSimulator;

/// Qutrit symbol of the fiduciary state `|E⟩`.
pub const FIDUCIARY: u8 = 2;

/// One exchange bond `(J/2)(XX + YY + ZZ)` between two sites of a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub strength: f64,
}

/// Mediator geometry, couplings and the free-evolution time step.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    chains: usize,
    sites: usize,
    /// Bonds of each chain, indexed by chain.
    couplings: Vec<Vec<Bond>>,
    tau: f64,
}

impl LinkModel {
    /// `chains` chains with their own bond tables.
    pub fn new(chains: usize, sites: usize, couplings: Vec<Vec<Bond>>, tau: f64) -> Result<Self> {
        if chains == 0 || sites == 0 {
            return Err(Error::UnsupportedLink("chains and sites must be positive".into()));
        }
        if chains * sites > 40 {
            return Err(Error::UnsupportedLink(alloc::format!(
                "{} mediator spins exceed the supported 40",
                chains * sites
            )));
        }
        if couplings.len() != chains {
            return Err(Error::UnsupportedLink("one bond table per chain is required".into()));
        }
        for bond in couplings.iter().flatten() {
            if bond.a >= sites || bond.b >= sites || bond.a == bond.b || !bond.strength.is_finite() {
                return Err(Error::UnsupportedLink(alloc::format!("invalid bond {bond:?}")));
            }
        }
        if !tau.is_finite() {
            return Err(Error::UnsupportedLink("tau must be finite".into()));
        }
        Ok(Self { chains, sites, couplings, tau })
    }

    /// Two identical nearest-neighbour chains with uniform coupling `j`.
    pub fn dual_rail(sites: usize, j: f64, tau: f64) -> Result<Self> {
        let chain = nearest_neighbour(sites, j);
        Self::new(2, sites, vec![chain.clone(), chain], tau)
    }

    /// Two nearest-neighbour chains with different uniform couplings; breaks
    /// the rail symmetry.
    pub fn asymmetric_dual_rail(sites: usize, j0: f64, j1: f64, tau: f64) -> Result<Self> {
        Self::new(2, sites, vec![nearest_neighbour(sites, j0), nearest_neighbour(sites, j1)], tau)
    }

    pub fn chains(&self) -> usize {
        self.chains
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spins(&self) -> usize {
        self.chains * self.sites
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn couplings(&self) -> &[Vec<Bond>] {
        &self.couplings
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..self.clone() }
    }

    /// Mediator dimension `2^{LN}`.
    pub fn mediator_dim(&self) -> usize {
        1usize << self.spins()
    }

    pub fn spin_index(&self, chain: usize, site: usize) -> usize {
        chain * self.sites + site
    }

    /// Spins of `M_A`, one per chain.
    pub fn alice_spins(&self) -> Vec<usize> {
        (0..self.chains).map(|c| self.spin_index(c, 0)).collect()
    }

    /// Spins of `M_B`, one per chain.
    pub fn bob_spins(&self) -> Vec<usize> {
        (0..self.chains).map(|c| self.spin_index(c, self.sites - 1)).collect()
    }

    /// The qutrit gates are defined for two rails only.
    pub(crate) fn require_dual_rail(&self) -> Result<()> {
        if self.chains == 2 {
            Ok(())
        } else {
            Err(Error::UnsupportedLink(alloc::format!("dual-rail gates need 2 chains, model has {}", self.chains)))
        }
    }
}

fn nearest_neighbour(sites: usize, j: f64) -> Vec<Bond> {
    (1..sites).map(|s| Bond { a: s - 1, b: s, strength: j }).collect()
}

/// Number of Bob memories used after each of Alice's uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    budgets: Vec<usize>,
}

impl Schedule {
    pub fn new(budgets: Vec<usize>) -> Result<Self> {
        if let Some(k) = budgets.iter().position(|&m| m == 0) {
            return Err(Error::InvalidArgument(alloc::format!("schedule.m_k[{k}] must be at least 1")));
        }
        Ok(Self { budgets })
    }

    /// `uses` uses with `m_k` Bob memories each.
    pub fn uniform(uses: usize, m_k: usize) -> Result<Self> {
        Self::new(vec![m_k; uses])
    }

    pub fn uses(&self) -> usize {
        self.budgets.len()
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    /// Total Bob memories `m = Σ m_k`.
    pub fn total(&self) -> usize {
        self.budgets.iter().sum()
    }

    /// The first `uses` uses.
    pub fn prefix(&self, uses: usize) -> Self {
        Self { budgets: self.budgets[..uses.min(self.budgets.len())].to_vec() }
    }
}

/// Bob's register indices (within `B`) of sub-register `k`.
pub(crate) fn subregister_range(budgets: &[usize], k: usize) -> core::ops::Range<usize> {
    let start: usize = budgets[..k].iter().sum();
    start..start + budgets[k]
}

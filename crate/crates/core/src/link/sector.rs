use alloc::collections::BTreeMap;
use core::ops::Range;

use crate::link::{masks_with_popcount, FIDUCIARY};
use crate::prelude::*;

/// Largest sector the simulator builds unless told otherwise.
pub const DEFAULT_SECTOR_BUDGET: u128 = 100_000;

/// One basis configuration: memory symbols packed two bits per register
/// (Alice's registers first, then Bob's) and the mediator mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub registers: u128,
    pub mask: u64,
}

impl Configuration {
    pub fn symbol(&self, register: usize) -> u8 {
        ((self.registers >> (2 * register)) & 0b11) as u8
    }

    pub fn with_symbol(mut self, register: usize, symbol: u8) -> Self {
        self.registers &= !(0b11u128 << (2 * register));
        self.registers |= (symbol as u128) << (2 * register);
        self
    }

    pub fn spin_up(&self, spin: usize) -> bool {
        (self.mask >> spin) & 1 == 1
    }

    pub fn flip(mut self, spin: usize) -> Self {
        self.mask ^= 1 << spin;
        self
    }

    /// Message symbols in `registers`.
    pub fn excited_in(&self, registers: Range<usize>) -> usize {
        registers.filter(|&r| self.symbol(r) != FIDUCIARY).count()
    }
}

/// Fixed-excitation basis of `A ⊗ B ⊗ M`, ordered by memory symbols and
/// then by mask so that each memory configuration owns a contiguous block
/// of same-popcount masks.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    alice: usize,
    bob: usize,
    spins: usize,
    excitations: usize,
    configs: Vec<Configuration>,
    index: BTreeMap<Configuration, usize>,
    groups: Vec<(Range<usize>, usize)>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Dimension of the sector with `excitations` quanta spread over `alice`
/// and `bob` qutrits and `spins` mediator spins.
pub fn sector_dimension(alice: usize, bob: usize, spins: usize, excitations: usize) -> u128 {
    let mut total = 0u128;
    for i in 0..=excitations.min(alice) {
        for j in 0..=(excitations - i).min(bob) {
            let s = excitations - i - j;
            total += binomial(alice, i) * (1u128 << i) * binomial(bob, j) * (1u128 << j) * binomial(spins, s);
        }
    }
    total
}

/// All register keys with at most `max_excited` message symbols, each
/// paired with its excitation count.
fn register_keys(count: usize, max_excited: usize) -> Vec<(u128, usize)> {
    let all_fiduciary = (0..count).fold(0u128, |k, r| k | (FIDUCIARY as u128) << (2 * r));
    let mut out = Vec::new();
    fn walk(pos: usize, count: usize, left: usize, key: u128, excited: usize, out: &mut Vec<(u128, usize)>) {
        if pos == count {
            out.push((key, excited));
            return;
        }
        walk(pos + 1, count, left, key, excited, out);
        if left > 0 {
            for symbol in 0..2u128 {
                let k = (key & !(0b11u128 << (2 * pos))) | symbol << (2 * pos);
                walk(pos + 1, count, left - 1, k, excited + 1, out);
            }
        }
    }
    walk(0, count, max_excited, all_fiduciary, 0, &mut out);
    out
}

/// Builds the sector, refusing anything larger than `budget`.
pub fn sector_basis(alice: usize, bob: usize, spins: usize, excitations: usize, budget: u128) -> Result<SectorBasis> {
    if alice + bob > 64 {
        return Err(Error::UnsupportedLink(alloc::format!("{} memories exceed the supported 64", alice + bob)));
    }
    let dimension = sector_dimension(alice, bob, spins, excitations);
    if dimension > budget {
        return Err(Error::SectorOverflow { dimension, budget });
    }
    let mut keys = register_keys(alice + bob, excitations);
    keys.retain(|&(_, e)| excitations - e <= spins);
    keys.sort_unstable();
    let mask_sets: Vec<Vec<u64>> = (0..=excitations).map(|s| masks_with_popcount(spins, s)).collect();
    let mut configs = Vec::with_capacity(dimension as usize);
    let mut groups = Vec::with_capacity(keys.len());
    for (registers, excited) in keys {
        let s = excitations - excited;
        let start = configs.len();
        configs.extend(mask_sets[s].iter().map(|&mask| Configuration { registers, mask }));
        groups.push((start..configs.len(), s));
    }
    let index = configs.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    Ok(SectorBasis { alice, bob, spins, excitations, configs, index, groups })
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn alice(&self) -> usize {
        self.alice
    }

    pub fn bob(&self) -> usize {
        self.bob
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn excitations(&self) -> usize {
        self.excitations
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn config(&self, i: usize) -> Configuration {
        self.configs[i]
    }

    pub fn index_of(&self, c: &Configuration) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Contiguous blocks sharing memory symbols, with their mask popcount.
    pub fn groups(&self) -> &[(Range<usize>, usize)] {
        &self.groups
    }

    /// Total excitation number of a configuration.
    pub fn excitation_number(&self, c: &Configuration) -> usize {
        c.excited_in(0..self.alice + self.bob) + c.mask.count_ones() as usize
    }

    /// Alice's register `k` as a global register index.
    pub fn alice_register(&self, k: usize) -> usize {
        k
    }

    /// Bob's register `r` as a global register index.
    pub fn bob_register(&self, r: usize) -> usize {
        self.alice + r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over the full product space.
    fn brute_force(alice: usize, bob: usize, spins: usize, excitations: usize) -> Vec<Configuration> {
        let registers = alice + bob;
        let mut out = Vec::new();
        for digits in 0..3usize.pow(registers as u32) {
            let mut key = 0u128;
            let mut excited = 0;
            let mut d = digits;
            for r in 0..registers {
                let s = (d % 3) as u128;
                d /= 3;
                excited += usize::from(s != 2);
                key |= s << (2 * r);
            }
            for mask in 0..(1u64 << spins) {
                if excited + mask.count_ones() as usize == excitations {
                    out.push(Configuration { registers: key, mask });
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn matches_brute_force() {
        for &(a, b, s, n) in &[(1, 1, 2, 1), (2, 2, 4, 2), (2, 3, 4, 2), (1, 2, 6, 1), (0, 0, 3, 2)] {
            let basis = sector_basis(a, b, s, n, DEFAULT_SECTOR_BUDGET).unwrap();
            let oracle = brute_force(a, b, s, n);
            assert_eq!(basis.configs(), &oracle[..], "{a} {b} {s} {n}");
            assert_eq!(sector_dimension(a, b, s, n), oracle.len() as u128);
            for c in basis.configs() {
                assert_eq!(basis.excitation_number(c), n);
            }
        }
    }

    #[test]
    fn groups_are_contiguous_and_complete() {
        let basis = sector_basis(2, 2, 4, 2, DEFAULT_SECTOR_BUDGET).unwrap();
        let mut covered = 0;
        for (range, s) in basis.groups() {
            assert_eq!(range.start, covered);
            covered = range.end;
            let first = basis.config(range.start);
            for i in range.clone() {
                assert_eq!(basis.config(i).registers, first.registers);
                assert_eq!(basis.config(i).mask.count_ones() as usize, *s);
            }
            assert_eq!(range.len() as u128, binomial(4, *s));
        }
        assert_eq!(covered, basis.dim());
    }

    #[test]
    fn overflow_reports_dimension() {
        let dim = sector_dimension(4, 40, 16, 4);
        match sector_basis(4, 40, 16, 4, 1000) {
            Err(Error::SectorOverflow { dimension, budget }) => {
                assert_eq!(dimension, dim);
                assert_eq!(budget, 1000);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn symbol_packing() {
        let c = Configuration { registers: 0, mask: 0 }.with_symbol(3, 2).with_symbol(1, 1);
        assert_eq!(c.symbol(3), 2);
        assert_eq!(c.symbol(1), 1);
        assert_eq!(c.symbol(0), 0);
        assert!(c.flip(5).spin_up(5));
    }
}

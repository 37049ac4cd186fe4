use crate::link::{
    excitation_block, sector_basis, subregister_range, Configuration, LinkModel, Schedule, SectorBasis,
    DEFAULT_SECTOR_BUDGET, FIDUCIARY,
};
use crate::prelude::*;
use crate::tensor::herm_exp;

/// Largest same-popcount mediator block exponentiated densely.
const MAX_BLOCK: usize = 4096;

/// Sector-restricted simulator of the full protocol unitary
/// `W = V_n S_{a_n} ⋯ V_1 S_{a_1}` with `V_k = S_{b_{m_k}} e^{−iHτ} ⋯ S_{b_1} e^{−iHτ}`.
#[derive(Debug, Clone)]
pub struct LinkSimulator {
    model: LinkModel,
    budgets: Vec<usize>,
    basis: SectorBasis,
    /// `e^{−iH_s τ}` on masks with `s` up spins.
    propagators: Vec<CMatrix>,
}

/// Swap gate between a memory and the two mediator spins it touches:
/// `|x⟩|↓↓⟩ ↔ |E⟩|x-th spin up⟩`, identity elsewhere.
pub(crate) fn gate(c: Configuration, register: usize, spins: [usize; 2]) -> Configuration {
    let symbol = c.symbol(register);
    let (up0, up1) = (c.spin_up(spins[0]), c.spin_up(spins[1]));
    if symbol != FIDUCIARY && !up0 && !up1 {
        c.with_symbol(register, FIDUCIARY).flip(spins[symbol as usize])
    } else if symbol == FIDUCIARY && up0 != up1 {
        let rail = usize::from(up1);
        c.with_symbol(register, rail as u8).flip(spins[rail])
    } else {
        c
    }
}

impl LinkSimulator {
    pub fn new(model: &LinkModel, schedule: &Schedule) -> Result<Self> {
        Self::from_budgets(model, schedule.budgets(), DEFAULT_SECTOR_BUDGET)
    }

    /// Budgets may contain zeros here, which models a use followed by no
    /// Bob interaction at all.
    pub fn from_budgets(model: &LinkModel, budgets: &[usize], sector_budget: u128) -> Result<Self> {
        model.require_dual_rail()?;
        let n = budgets.len();
        let basis = sector_basis(n, budgets.iter().sum(), model.spins(), n, sector_budget)?;
        let mut propagators = Vec::new();
        for s in 0..=n.min(model.spins()) {
            let h = excitation_block(model, s);
            if h.nrows() > MAX_BLOCK {
                return Err(Error::UnsupportedLink(alloc::format!(
                    "mediator block with {s} excitations has dimension {}",
                    h.nrows()
                )));
            }
            propagators.push(herm_exp(&h, model.tau())?);
        }
        Ok(Self { model: model.clone(), budgets: budgets.to_vec(), basis, propagators })
    }

    pub fn model(&self) -> &LinkModel {
        &self.model
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    pub fn uses(&self) -> usize {
        self.budgets.len()
    }

    pub fn bob_memories(&self) -> usize {
        self.basis.bob()
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Global register indices of Bob's sub-register `k`.
    pub fn subregister(&self, k: usize) -> core::ops::Range<usize> {
        let r = subregister_range(&self.budgets, k);
        self.basis.bob_register(r.start)..self.basis.bob_register(r.end)
    }

    fn side_spins(&self, alice: bool) -> [usize; 2] {
        let s = if alice { self.model.alice_spins() } else { self.model.bob_spins() };
        [s[0], s[1]]
    }

    fn permute(&self, v: &CVector, map: impl Fn(Configuration) -> Configuration) -> CVector {
        let mut out = CVector::zeros(v.len());
        for (i, c) in self.basis.configs().iter().enumerate() {
            let j = self.basis.index_of(&map(*c)).expect("gates stay inside the sector");
            out[j] += v[i];
        }
        out
    }

    /// `S_{a_k}`.
    pub fn apply_alice(&self, k: usize, v: &CVector) -> CVector {
        let spins = self.side_spins(true);
        let r = self.basis.alice_register(k);
        self.permute(v, |c| gate(c, r, spins))
    }

    /// `S_b` on Bob's register `r` (counted from 0 across all of `B`).
    pub fn apply_bob(&self, r: usize, v: &CVector) -> CVector {
        let spins = self.side_spins(false);
        let r = self.basis.bob_register(r);
        self.permute(v, |c| gate(c, r, spins))
    }

    /// Free evolution `e^{−iHτ}` of the mediator.
    pub fn evolve(&self, v: &CVector) -> CVector {
        let mut out = v.clone();
        for (range, s) in self.basis.groups() {
            let u = &self.propagators[*s];
            let block = u * v.rows(range.start, range.len());
            out.rows_mut(range.start, range.len()).copy_from(&block);
        }
        out
    }

    /// `V_k`: Bob's interleaved evolution and swaps for use `k`.
    pub fn apply_v(&self, k: usize, v: &CVector) -> CVector {
        let mut state = v.clone();
        for r in subregister_range(&self.budgets, k) {
            state = self.evolve(&state);
            state = self.apply_bob(r, &state);
        }
        state
    }

    /// `V_k S_{a_k}`.
    pub fn apply_use(&self, k: usize, v: &CVector) -> CVector {
        self.apply_v(k, &self.apply_alice(k, v))
    }

    /// The full protocol unitary `W`.
    pub fn run(&self, v: &CVector) -> CVector {
        (0..self.uses()).fold(v.clone(), |state, k| self.apply_use(k, &state))
    }

    /// Sector configuration holding logical string `x` in Alice's memories
    /// (first memory is the most significant bit), `B` fiduciary and `M`
    /// in its ground state.
    pub fn logical_config(&self, x: usize) -> Configuration {
        let n = self.uses();
        let all_e = (0..n + self.bob_memories()).fold(0u128, |k, r| k | (FIDUCIARY as u128) << (2 * r));
        (0..n)
            .fold(Configuration { registers: all_e, mask: 0 }, |c, k| c.with_symbol(k, ((x >> (n - 1 - k)) & 1) as u8))
    }

    /// Embeds a logical `2^n` amplitude vector into the sector.
    pub fn initial_state(&self, logical: &CVector) -> Result<CVector> {
        let n = self.uses();
        if logical.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: logical.len() });
        }
        let mut v = CVector::zeros(self.dim());
        for x in 0..logical.len() {
            let i = self.basis.index_of(&self.logical_config(x)).expect("logical inputs lie in the sector");
            v[i] = logical[x];
        }
        Ok(v)
    }

    /// Exchange of the two rails: message symbols `0 ↔ 1` and chain 0 ↔ 1.
    pub fn rail_swap(&self, v: &CVector) -> CVector {
        let sites = self.model.sites();
        let registers = self.basis.alice() + self.basis.bob();
        self.permute(v, |c| {
            let mut out = c;
            for r in 0..registers {
                let s = c.symbol(r);
                if s != FIDUCIARY {
                    out = out.with_symbol(r, 1 - s);
                }
            }
            let low = c.mask & ((1u64 << sites) - 1);
            let high = (c.mask >> sites) & ((1u64 << sites) - 1);
            out.mask = (low << sites) | high;
            out
        })
    }

    /// Dense matrix of a sector map, for small sectors only.
    pub fn dense(&self, op: impl Fn(&CVector) -> CVector) -> Result<CMatrix> {
        let d = self.dim();
        if d > 2048 {
            return Err(Error::UnsupportedLink(alloc::format!("sector dimension {d} is too large for a dense matrix")));
        }
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            let mut e = CVector::zeros(d);
            e[i] = ONE;
            m.set_column(i, &op(&e));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{max_abs, random_state, seeded_rng, unitarity_deviation, HilbertFactorization};

    fn sim(sites: usize, budgets: &[usize], tau: f64) -> LinkSimulator {
        let model = LinkModel::dual_rail(sites, 1.0, tau).unwrap();
        LinkSimulator::from_budgets(&model, budgets, DEFAULT_SECTOR_BUDGET).unwrap()
    }

    #[test]
    fn gates_are_involutions() {
        let s = sim(2, &[1, 2], 0.9);
        let a = s.dense(|v| s.apply_alice(1, v)).unwrap();
        let b = s.dense(|v| s.apply_bob(2, v)).unwrap();
        let id = CMatrix::identity(s.dim(), s.dim());
        assert_eq!(&a * &a, id);
        assert_eq!(&b * &b, id);
    }

    #[test]
    fn gate_truth_table() {
        let s = sim(2, &[1], 0.5);
        // |0⟩_A |E⟩_B, ground mediator → |E⟩_A, chain-0 first spin up.
        let c0 = s.logical_config(0);
        let moved = gate(c0, 0, [0, 2]);
        assert_eq!(moved.symbol(0), FIDUCIARY);
        assert_eq!(moved.mask, 0b0001);
        let c1 = s.logical_config(1);
        assert_eq!(gate(c1, 0, [0, 2]).mask, 0b0100);
        // Blocked when the mediator site is occupied.
        let blocked = c0.flip(0);
        assert_eq!(gate(blocked, 0, [0, 2]), blocked);
        // |E⟩|↑↑⟩ is left alone.
        let both = c0.with_symbol(0, FIDUCIARY).flip(0).flip(2);
        assert_eq!(gate(both, 0, [0, 2]), both);
    }

    #[test]
    fn protocol_unitary_is_unitary() {
        let s = sim(3, &[2, 1], 1.1);
        let w = s.dense(|v| s.run(v)).unwrap();
        assert!(unitarity_deviation(&w) < 1e-12);
    }

    #[test]
    fn norm_and_excitations_conserved() {
        let s = sim(3, &[2, 2], 0.8);
        let mut rng = seeded_rng(3);
        let psi = random_state(&HilbertFactorization::uniform(2, 2), &mut rng);
        let v = s.initial_state(psi.amplitudes()).unwrap();
        let out = s.run(&v);
        let z: f64 = s
            .basis()
            .configs()
            .iter()
            .zip(out.iter())
            .map(|(c, a)| a.norm_sqr() * s.basis().excitation_number(c) as f64)
            .sum();
        assert!((out.norm() - 1.0).abs() < 1e-12);
        assert!((z - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_site_link_transfers_perfectly() {
        // With N = 1 both parties address the same spins, so the first Bob
        // swap takes the excitation straight from Alice.
        let s = sim(1, &[1, 1], 0.4);
        for x in 0..4 {
            let mut e = CVector::zeros(4);
            e[x] = ONE;
            let out = s.run(&s.initial_state(&e).unwrap());
            let (i, amp) = out.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
            assert!((amp.norm() - 1.0).abs() < 1e-12);
            let c = s.basis().config(i);
            assert_eq!(c.mask, 0);
            assert_eq!((c.symbol(2), c.symbol(3)), (((x >> 1) & 1) as u8, (x & 1) as u8));
        }
    }

    #[test]
    fn rail_swap_commutes_with_symmetric_link() {
        let s = sim(3, &[2, 1], 1.3);
        let w = s.dense(|v| s.run(v)).unwrap();
        let p = s.dense(|v| s.rail_swap(v)).unwrap();
        assert!(max_abs(&(&p * &w - &w * &p)) < 1e-12);
        let model = LinkModel::asymmetric_dual_rail(3, 1.0, 0.6, 1.3).unwrap();
        let t = LinkSimulator::from_budgets(&model, &[2, 1], DEFAULT_SECTOR_BUDGET).unwrap();
        let w = t.dense(|v| t.run(v)).unwrap();
        assert!(max_abs(&(&p * &w - &w * &p)) > 1e-3);
    }
}

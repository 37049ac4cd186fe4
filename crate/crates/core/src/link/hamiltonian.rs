use crate::link::LinkModel;
use crate::prelude::*;

/// Position of a mask in the dense mediator space, spin 0 leftmost.
pub fn mask_to_index(mask: u64, spins: usize) -> usize {
    (0..spins).fold(0, |acc, s| (acc << 1) | ((mask >> s) & 1) as usize)
}

/// All masks on `spins` spins with `count` bits set, ascending.
pub fn masks_with_popcount(spins: usize, count: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if count > spins {
        return out;
    }
    if count == 0 {
        out.push(0);
        return out;
    }
    // Gosper's hack walks same-popcount integers in increasing order.
    let mut x: u64 = (1u64 << count) - 1;
    let limit: u64 = 1u64 << spins;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Applies every bond to `mask`: returns the diagonal energy and the
/// off-diagonal flips `(new mask, amplitude)`.
fn bond_action(model: &LinkModel, mask: u64) -> (f64, Vec<(u64, f64)>) {
    let mut diagonal = 0.0;
    let mut flips = Vec::new();
    for (chain, bonds) in model.couplings().iter().enumerate() {
        for bond in bonds {
            let p = model.spin_index(chain, bond.a);
            let q = model.spin_index(chain, bond.b);
            let (up_p, up_q) = ((mask >> p) & 1, (mask >> q) & 1);
            if up_p == up_q {
                diagonal += bond.strength / 2.0;
            } else {
                diagonal -= bond.strength / 2.0;
                // (XX + YY)/2 · J flips an anti-aligned pair with amplitude J.
                flips.push((mask ^ (1 << p) ^ (1 << q), bond.strength));
            }
        }
    }
    (diagonal, flips)
}

/// Hamiltonian restricted to mediator masks with `count` up spins, in the
/// ascending mask order of [`masks_with_popcount`].
pub fn excitation_block(model: &LinkModel, count: usize) -> CMatrix {
    let masks = masks_with_popcount(model.spins(), count);
    let position = |m: u64| masks.binary_search(&m).expect("flips conserve the popcount");
    let mut h = CMatrix::zeros(masks.len(), masks.len());
    for (i, &mask) in masks.iter().enumerate() {
        let (diagonal, flips) = bond_action(model, mask);
        h[(i, i)] += Complex64::new(diagonal, 0.0);
        for (target, amp) in flips {
            h[(position(target), i)] += Complex64::new(amp, 0.0);
        }
    }
    h
}

/// Full `2^{LN}`-dimensional mediator Hamiltonian.
pub fn build_hamiltonian(model: &LinkModel) -> Result<CMatrix> {
    let spins = model.spins();
    if spins > 12 {
        return Err(Error::UnsupportedLink(alloc::format!(
            "dense Hamiltonian on {spins} spins is too large; use excitation blocks"
        )));
    }
    let dim = 1usize << spins;
    let mut h = CMatrix::zeros(dim, dim);
    for mask in 0..dim as u64 {
        let col = mask_to_index(mask, spins);
        let (diagonal, flips) = bond_action(model, mask);
        h[(col, col)] += Complex64::new(diagonal, 0.0);
        for (target, amp) in flips {
            h[(mask_to_index(target, spins), col)] += Complex64::new(amp, 0.0);
        }
    }
    Ok(h)
}

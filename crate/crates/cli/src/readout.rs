//! Basis-state readout of a DMRG ground state.

use nalgebra::DVector;
use qkp_tn::mps::{canonicalize, mps_to_dense, Form, Mps, DENSE_CAP};
use qkp_tn::{Result, C64};

/// Qubits of the largest-amplitude basis state: exact below the dense cap,
/// per-site greedy above it.
pub fn dominant_basis_state(psi: &Mps) -> Result<Vec<u8>> {
    if psi.len() <= DENSE_CAP {
        dense_argmax(psi)
    } else {
        greedy(psi)
    }
}

fn dense_argmax(psi: &Mps) -> Result<Vec<u8>> {
    let v = mps_to_dense(psi)?;
    let mut best = 0;
    for (i, a) in v.iter().enumerate() {
        if a.norm() > v[best].norm() {
            best = i;
        }
    }
    let n = psi.len();
    Ok((0..n).map(|k| ((best >> (n - 1 - k)) & 1) as u8).collect())
}

/// Right-orthogonal sweep picking, site by site, the physical index with the
/// largest prefix weight.
pub fn greedy(psi: &Mps) -> Result<Vec<u8>> {
    let rc = canonicalize(psi, Form::RightOrthogonal, psi.max_bond().max(1), 0.0)?;
    let mut left = DVector::from_element(1, C64::new(1.0, 0.0));
    let mut bits = Vec::with_capacity(rc.len());
    for site in rc.sites() {
        let (l, d, r) = (site.dims()[0], site.dims()[1], site.dims()[2]);
        let mut best: Option<(f64, u8, DVector<C64>)> = None;
        for p in 0..d {
            let cand = DVector::from_fn(r, |j, _| (0..l).map(|i| left[i] * site.get(&[i, p, j])).sum::<C64>());
            let w = cand.norm();
            if best.as_ref().map_or(true, |b| w > b.0) {
                best = Some((w, p as u8, cand));
            }
        }
        let (_, p, cand) = best.expect("physical dimension is at least 1");
        bits.push(p);
        left = cand;
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qkp_tn::automata::annealing_mpo;
    use qkp_tn::dmrg::{dmrg_ground, DmrgParams};
    use qkp_tn::encoding::{all_bitstrings, IsingModel};
    use qkp_tn::mps::product_mps;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    #[test]
    fn product_states_read_back() {
        for bits in all_bitstrings(5) {
            let psi = product_mps(&bits).unwrap();
            assert_eq!(dense_argmax(&psi).unwrap(), bits);
            assert_eq!(greedy(&psi).unwrap(), bits);
        }
    }

    #[test]
    fn greedy_matches_dense_on_classical_ground_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=8 {
            let h: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut j = BTreeMap::new();
            for a in 0..n {
                for b in a + 1..n {
                    j.insert((a, b), rng.random_range(-1.0..1.0));
                }
            }
            let ising = IsingModel::new(h, j, 0.0).unwrap();
            let mpo = annealing_mpo(&ising, 1.0).unwrap();
            let ground = dmrg_ground(&mpo, &DmrgParams { chi_max: 8, ..Default::default() }, None).unwrap();
            let exact = all_bitstrings(n)
                .min_by(|a, b| ising.basis_energy(a).total_cmp(&ising.basis_energy(b)))
                .unwrap();
            assert_eq!(dense_argmax(&ground.state).unwrap(), exact, "N={n}");
            assert_eq!(greedy(&ground.state).unwrap(), exact, "N={n}");
        }
    }
}

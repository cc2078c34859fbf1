//! Quantum convolutional network circuit for Model C.
//!
//! `log₂ d` layers; layer ℓ applies 10-parameter convolution blocks on every
//! adjacent pair of the ring of active qubits (a single block once only two
//! remain) followed by 2-parameter pooling blocks that halve the active set.
//! Parameters are shared within each convolution and each pooling layer, so
//! the model has `12 log₂ d` parameters, while the gradient circuit count
//! follows the per-block shift accounting (24 per convolution block, 8 per
//! pooling block). The convolution block is
//!
//! ```text
//!     RY(a) RZ(a) RY(b) RZ(b) CRX(a→b) RY(a) RZ(a) RY(b) RZ(b) CRX(b→a)
//! ```
//!
//! (8 single-qubit rotations and 2 controlled rotations), and the pooling
//! block on (discarded, kept) applies CRZ on control value 1 and CRX on
//! control value 0. The observable is Z on the last surviving qubit.

use crate::error::Result;
use crate::pauli::{Letter, PauliString, PauliSum};
use crate::sim::param::ParamCircuit;

pub(crate) fn build_qcnn(d: usize) -> Result<(ParamCircuit, PauliSum)> {
    let layers = d.trailing_zeros() as usize;
    let mut pc = ParamCircuit::new(d, 12 * layers);
    let mut active: Vec<usize> = (0..d).collect();
    for layer in 0..layers {
        let conv_base = 12 * layer;
        let pool_base = 12 * layer + 10;
        let k = active.len();
        let pairs: Vec<(usize, usize)> = if k > 2 {
            (0..k).map(|i| (active[i], active[(i + 1) % k])).collect()
        } else {
            vec![(active[0], active[1])]
        };
        for (a, b) in pairs {
            conv_block(&mut pc, d, a, b, conv_base)?;
        }
        let mut next = Vec::with_capacity(k / 2);
        for pair in active.chunks(2) {
            let (discard, keep) = (pair[0], pair[1]);
            pc.controlled_rot(discard, true, PauliString::single(d, keep, Letter::Z), pool_base)?;
            pc.controlled_rot(discard, false, PauliString::single(d, keep, Letter::X), pool_base + 1)?;
            next.push(keep);
        }
        active = next;
    }
    debug_assert_eq!(active, vec![d - 1]);
    let observable = PauliSum::from_string(PauliString::single(d, d - 1, Letter::Z))?;
    Ok((pc, observable))
}

fn conv_block(pc: &mut ParamCircuit, d: usize, a: usize, b: usize, base: usize) -> Result<()> {
    pc.rot(PauliString::single(d, a, Letter::Y), base)?;
    pc.rot(PauliString::single(d, a, Letter::Z), base + 1)?;
    pc.rot(PauliString::single(d, b, Letter::Y), base + 2)?;
    pc.rot(PauliString::single(d, b, Letter::Z), base + 3)?;
    pc.controlled_rot(a, true, PauliString::single(d, b, Letter::X), base + 4)?;
    pc.rot(PauliString::single(d, a, Letter::Y), base + 5)?;
    pc.rot(PauliString::single(d, a, Letter::Z), base + 6)?;
    pc.rot(PauliString::single(d, b, Letter::Y), base + 7)?;
    pc.rot(PauliString::single(d, b, Letter::Z), base + 8)?;
    pc.controlled_rot(b, true, PauliString::single(d, a, Letter::X), base + 9)?;
    Ok(())
}

//! Line-oriented circuit text format with bit-exact round trips.
//!
//! One gate per line:
//!
//! ```text
//! circuit 3
//! rot 0.7853981633974483 XZY
//! clif h 0
//! clif cz 0 1
//! phase 2
//! ctrl 2 1 1
//! rot 0.5 XII
//! end
//! ```
//!
//! `ctrl <qubit> <value> <k>` introduces a controlled subcircuit whose body is
//! the next `k` gate lines. Angles print in the shortest representation that
//! parses back to the same `f64`.

use super::{Circuit, CliffordKind, Gate};
use crate::error::{Error, Result};

pub fn write_circuit(circuit: &Circuit) -> String {
    let mut out = format!("circuit {}\n", circuit.n_qubits());
    for gate in circuit.gates() {
        write_gate(gate, &mut out);
    }
    out.push_str("end\n");
    out
}

fn write_gate(gate: &Gate, out: &mut String) {
    match gate {
        Gate::Rotation { angle, word } => out.push_str(&format!("rot {angle:?} {word}\n")),
        Gate::Clifford { kind, targets } => {
            out.push_str(&format!("clif {}", kind.name()));
            for t in targets {
                out.push_str(&format!(" {t}"));
            }
            out.push('\n');
        }
        Gate::Controlled { control, value, body } => {
            out.push_str(&format!("ctrl {control} {} {}\n", *value as u8, body.len()));
            for g in body {
                write_gate(g, out);
            }
        }
        Gate::GlobalPhase { i_exp } => out.push_str(&format!("phase {i_exp}\n")),
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty circuit text".into()))?;
    let n: usize = header
        .strip_prefix("circuit ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad circuit header '{header}'")))?;
    let mut circuit = Circuit::new(n);
    while let Some(line) = lines.next() {
        if line == "end" {
            return Ok(circuit);
        }
        let gate = parse_gate(line, &mut lines)?;
        circuit.push(gate)?;
    }
    Err(Error::Parse("missing 'end' line".into()))
}

fn parse_gate<'a>(line: &str, rest: &mut impl Iterator<Item = &'a str>) -> Result<Gate> {
    let mut parts = line.split_whitespace();
    let kind = parts.next().unwrap_or_default();
    let bad = || Error::Parse(format!("bad gate line '{line}'"));
    match kind {
        "rot" => {
            let angle: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let word = parts.next().ok_or_else(bad)?.parse()?;
            Ok(Gate::Rotation { angle, word })
        }
        "clif" => {
            let name = parts.next().ok_or_else(bad)?;
            let kind = match name {
                "h" => CliffordKind::H,
                "hxy" => CliffordKind::Hxy,
                "hzy" => CliffordKind::Hzy,
                "s" => CliffordKind::S,
                "cz" => CliffordKind::Cz,
                "cnot" => CliffordKind::Cnot,
                other => return Err(Error::Parse(format!("unknown clifford '{other}'"))),
            };
            let targets: Vec<usize> =
                parts.map(|t| t.parse().map_err(|_| bad())).collect::<Result<_>>()?;
            Ok(Gate::Clifford { kind, targets })
        }
        "ctrl" => {
            let control: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let value: u8 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let count: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let mut body = Vec::with_capacity(count);
            for _ in 0..count {
                let inner = rest.next().ok_or_else(|| Error::Parse("truncated ctrl body".into()))?;
                body.push(parse_gate(inner, rest)?);
            }
            Ok(Gate::Controlled { control, value: value != 0, body })
        }
        "phase" => {
            let i_exp: u8 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            Ok(Gate::GlobalPhase { i_exp: i_exp % 4 })
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use proptest::prelude::*;

    #[test]
    fn round_trip_with_control_and_phase() {
        let mut body = Circuit::new(3);
        body.rotation(0.5, "IXI".parse().unwrap()).unwrap();
        body.global_phase(1).unwrap();
        let mut c = Circuit::new(3);
        c.rotation(std::f64::consts::FRAC_PI_4, "XZY".parse().unwrap()).unwrap();
        c.h(0).unwrap();
        c.cz(0, 1).unwrap();
        c.controlled(2, true, body).unwrap();
        let text = write_circuit(&c);
        let parsed = parse_circuit(&text).unwrap();
        assert_eq!(parsed, c);
        assert_eq!(write_circuit(&parsed), text);
    }

    proptest! {
        #[test]
        fn rotation_angles_round_trip_bit_exact(bits in any::<u32>(), angle in -10.0f64..10.0) {
            let n = 3usize;
            let x = (bits & 7) as u64;
            let z = ((bits >> 3) & 7) as u64;
            let phase = if (x & z).count_ones() % 2 == 1 { 2 } else { 0 };
            let word = PauliString::from_bits(n, x, z, phase);
            let word = if word.is_hermitian() { word } else { word.mul_phase(1) };
            let mut c = Circuit::new(n);
            c.rotation(angle, word).unwrap();
            let parsed = parse_circuit(&write_circuit(&c)).unwrap();
            prop_assert_eq!(parsed, c);
        }
    }
}

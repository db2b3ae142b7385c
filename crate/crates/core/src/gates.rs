//! Gate primitives and the layered rotation/CNOT pattern used by every block.

use alloc::vec::Vec;

use crate::linalg::{C64, ZERO};

pub type Gate2 = [[C64; 2]; 2];

/// Three-parameter single-qubit rotation
/// `U3(θ, φ, λ) = [[cos θ/2, -e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.
pub fn u3(theta: f64, phi: f64, lambda: f64) -> Gate2 {
    let (s, c) = libm::sincos(theta / 2.0);
    [
        [C64::new(c, 0.0), -C64::from_polar(s, lambda)],
        [C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)],
    ]
}

/// Partial derivative of [`u3`] with respect to angle `component`
/// (0 = θ, 1 = φ, 2 = λ).
pub fn u3_derivative(theta: f64, phi: f64, lambda: f64, component: usize) -> Gate2 {
    let (s, c) = libm::sincos(theta / 2.0);
    let i = C64::new(0.0, 1.0);
    match component {
        0 => [
            [C64::new(-s / 2.0, 0.0), -C64::from_polar(c / 2.0, lambda)],
            [C64::from_polar(c / 2.0, phi), -C64::from_polar(s / 2.0, phi + lambda)],
        ],
        1 => [
            [ZERO, ZERO],
            [i * C64::from_polar(s, phi), i * C64::from_polar(c, phi + lambda)],
        ],
        2 => [
            [ZERO, -i * C64::from_polar(s, lambda)],
            [ZERO, i * C64::from_polar(c, phi + lambda)],
        ],
        _ => panic!("U3 has three angles"),
    }
}

pub fn hadamard() -> Gate2 {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]]
}

pub fn s_dagger() -> Gate2 {
    [[C64::new(1.0, 0.0), ZERO], [ZERO, C64::new(0.0, -1.0)]]
}

/// One gate of a layered pattern, addressed by local wire index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternGate {
    /// Rotation whose three angles start at `param` in the block's vector.
    U3 { wire: usize, param: usize },
    Cx { control: usize, target: usize },
}

/// Gates of `layers` repetitions of "one U3 per wire, then a cyclic CNOT
/// chain" on `wires` wires. A single wire gets no CNOTs; two wires get
/// CX(0,1) followed by CX(1,0).
pub fn layered_pattern(wires: usize, layers: usize) -> Vec<PatternGate> {
    let mut gates = Vec::with_capacity(layers * gates_per_layer(wires));
    for layer in 0..layers {
        for wire in 0..wires {
            gates.push(PatternGate::U3 { wire, param: 3 * (layer * wires + wire) });
        }
        if wires >= 2 {
            for control in 0..wires {
                gates.push(PatternGate::Cx { control, target: (control + 1) % wires });
            }
        }
    }
    gates
}

pub fn gates_per_layer(wires: usize) -> usize {
    if wires >= 2 {
        2 * wires
    } else {
        wires
    }
}

pub fn params_per_layer(wires: usize) -> usize {
    3 * wires
}

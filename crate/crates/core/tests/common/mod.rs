#![allow(dead_code)]

use corrmatch_core::{build_layout, ideal_syndrome, Basis, CodeLayout, Coord, Pauli, PauliFrame, SyndromeInstance};

/// A hand-placed data error on a perfect-measurement code.
pub struct Scenario {
    pub layout: CodeLayout,
    pub error: PauliFrame,
    pub syndrome: SyndromeInstance,
}

pub fn scenario(d: usize, errors: &[(usize, usize, Pauli)]) -> Scenario {
    let layout = build_layout(d).unwrap();
    let mut error = PauliFrame::identity(layout.num_data_qubits());
    for &(row, col, p) in errors {
        error.apply(layout.qubit_at(Coord::new(row, col)).unwrap(), p);
    }
    let syndrome = SyndromeInstance::from(&ideal_syndrome(&error, &layout).unwrap());
    Scenario {
        layout,
        error,
        syndrome,
    }
}

/// Data qubits touched by a frame in one basis, as grid coordinates.
pub fn support(layout: &CodeLayout, frame: &PauliFrame, basis: Basis) -> Vec<Coord> {
    (0..layout.num_data_qubits())
        .filter(|&q| frame.bit(basis, q))
        .map(|q| layout.data_qubits()[q])
        .collect()
}

use std::fmt;
use std::str::FromStr;

use crate::error::{QpcpError, Result};

use super::matrix::{kron_all, ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => ComplexMatrix::from_rows(&[vec![l, o], vec![o, l]]),
            Pauli::X => ComplexMatrix::from_rows(&[vec![o, l], vec![l, o]]),
            Pauli::Y => ComplexMatrix::from_rows(&[vec![o, -i], vec![i, o]]),
            Pauli::Z => ComplexMatrix::from_rows(&[vec![l, o], vec![o, -l]]),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor string over {I, X, Y, Z}; letter 0 acts on qubit 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliWord {
    letters: Vec<Pauli>,
}

impl PauliWord {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self { letters: vec![Pauli::I; num_qubits] }
    }

    /// Word number `index` in base-4 order (I, X, Y, Z), first letter most significant.
    pub fn from_index(index: usize, num_qubits: usize) -> Self {
        let letters = (0..num_qubits).map(|k| Pauli::ALL[(index >> (2 * (num_qubits - 1 - k))) & 3]).collect();
        Self { letters }
    }

    /// All 4^n words in base-4 order.
    pub fn all(num_qubits: usize) -> impl Iterator<Item = PauliWord> {
        (0..1usize << (2 * num_qubits)).map(move |i| Self::from_index(i, num_qubits))
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.letters.len()).filter(|&k| self.letters[k] != Pauli::I).collect()
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.letters.iter().try_for_each(|p| write!(f, "{}", p.letter()))
    }
}

impl FromStr for PauliWord {
    type Err = QpcpError;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(QpcpError::InvalidParameter(format!("unknown Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliWord::new)
    }
}

pub fn pauli_matrix(w: &PauliWord) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = w.letters.iter().map(|p| p.matrix()).collect();
    kron_all(&factors)
}

//! From a verifier to the local Hamiltonian whose energy is its rejection probability.

mod decompose;
mod exact;
mod hadamard;
mod learn;
mod local;

pub use decompose::{projector_decomposition, unitary_decomposition, SignedCircuit, UnitaryDecomposition};
pub use exact::{contract_fixed_state, exact_hamiltonian};
pub use hadamard::{hadamard_probabilities, hadamard_shots, hadamard_test};
pub use learn::{
    derived_rounding_eps, gamma_prime, learn_hamiltonian, learn_hamiltonian_rounded, protocol_eta, quantize,
    LearnParams, Learned,
};
pub use local::{LocalHamiltonian, Term, TERM_TOL};

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All orderings of `items` in lexicographic order of positions.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let rest: Vec<usize> = items.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Basis index on the slot register for the support-ordered value `alpha`,
/// when slot `s` holds proof qubit `path[s]`.
pub(crate) fn slot_value(alpha: usize, support: &[usize], path: &[usize]) -> usize {
    let q = support.len();
    path.iter().fold(0, |acc, i| {
        let r = support.iter().position(|s| s == i).expect("path lies in the support");
        (acc << 1) | ((alpha >> (q - 1 - r)) & 1)
    })
}

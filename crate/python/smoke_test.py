"""Smoke test for the qpcp_py extension: python python/smoke_test.py"""

import json

import qpcp_py as q


def trivial_verifier(accept: bool) -> str:
    # One query; the final circuit flips the output qubit to accept.
    last = [{"gate": "X", "targets": [1]}] if accept else []
    return json.dumps({
        "n": 0, "p1": 2, "k": 1, "p2": 2, "q": 1,
        "index_register": [0],
        "output_qubit": 1,
        "circuits": [[], last],
    })


def matrix(rows):
    return {
        "rows": len(rows),
        "cols": len(rows[0]),
        "entries": [[float(x), 0.0] for row in rows for x in row],
    }


def main() -> None:
    mixed = q.State.maximally_mixed(2)
    zero = q.State.basis(2, 0)
    assert abs(zero.trace_distance(mixed) - 0.75) < 1e-12
    assert q.State.from_json(zero.to_json()).trace_distance(zero) == 0.0
    assert zero.partial_trace([1]).num_qubits == 1

    for accept in (False, True):
        v = q.Verifier.from_json(trivial_verifier(accept))
        assert (v.q, v.proof_qubits) == (1, 2)
        assert v.accept_probability(mixed) == float(accept)
        assert v.sample(mixed, 100, seed=3) == 100 * accept
        assert q.Verifier.from_json(v.to_json()).to_json() == v.to_json()
        exact = v.exact_hamiltonian()
        assert abs(exact.energy(mixed) - (1.0 - accept)) < 1e-12
        learned = v.learn_hamiltonian(eps=0.2, delta=0.2, seed=1)
        assert learned.num_qubits == exact.num_qubits

    h = q.Hamiltonian.from_json(json.dumps({
        "num_qubits": 1,
        "locality": 1,
        "terms": [{"support": [0], "matrix": matrix([[0, 0], [0, 1]])}],
        "weights": [1.0],
    }))
    assert h.ground_energy() == 0.0
    one = q.State.basis(1, 1)
    assert abs(h.energy(one) - 1.0) < 1e-12
    smoothed, scale = h.smooth()
    assert scale > 1 and abs(smoothed.ground_energy()) < 1e-12
    kv = h.kitaev_verifier()
    assert abs(kv.accept_probability(one)) < 1e-12

    assert q.repetition_count(2 / 3, 1 / 3) == 13
    passed, detail = q.run_criterion(4, 0)
    assert passed, detail
    print("qpcp_py smoke test ok")


if __name__ == "__main__":
    main()

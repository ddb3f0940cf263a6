import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qlearnlab.batch import measure_then_erm
from qlearnlab.core import Distribution, HypothesisClass, full_class
from qlearnlab.errors import CircuitFaultError, PreconditionError, SizeLimitError
from qlearnlab.quantum import (
    RegisterLayout,
    StateVector,
    TruthTable,
    ancilla_residual,
    apply_cnot,
    apply_toffoli,
    apply_x,
    apply_xor_oracle,
    binary_to_multiclass_transform,
    bits_for,
    build_h_truth_table,
    decode_example,
    drop_ancillas,
    embed,
    measure_computational,
    prepare_agnostic_example,
    prepare_realizable_example,
    reduction_circuit,
    reduction_wrap_learner,
    sample_outcomes,
)

R2 = 1 / math.sqrt(2)


def bits_layout(n_qubits):
    return RegisterLayout(tuple((f"q{i}", 1) for i in range(n_qubits)), 2, 2)


def test_bits_for():
    assert [bits_for(c) for c in (1, 2, 3, 4, 5, 8, 9)] == [1, 1, 2, 2, 3, 3, 4]


def test_layout_index_round_trip():
    lay = RegisterLayout.reduction(3, 3)
    assert lay.num_qubits == 2 + 1 + 1 + 2 + 2 + 2
    i = lay.index(x=2, y=1, f1=3, fy=2)
    d = lay.decode(i)
    assert (d["x"], d["y"], d["notY"], d["f0"], d["f1"], d["fy"]) == (2, 1, 0, 0, 3, 2)
    with pytest.raises(SizeLimitError):
        RegisterLayout((("big", 23),), 2, 2)


def test_single_gates():
    lay = bits_layout(3)
    s = StateVector.basis(lay)
    assert apply_x(s, 0).amplitudes[lay.index(q0=1)] == 1
    s10 = StateVector.basis(lay, q0=1)
    assert apply_cnot(s10, 0, 1).amplitudes[lay.index(q0=1, q1=1)] == 1
    s110 = StateVector.basis(lay, q0=1, q1=1)
    once = apply_toffoli(s110, 0, 1, 2)
    assert once.amplitudes[lay.index(q0=1, q1=1, q2=1)] == 1
    assert np.array_equal(apply_toffoli(once, 0, 1, 2).amplitudes, s110.amplitudes)
    with pytest.raises(PreconditionError):
        apply_cnot(s, 1, 1)


def _dense_controlled_flip(nq, controls, target):
    """Independent oracle: the gate as an explicit permutation matrix."""
    dim = 1 << nq
    U = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (nq - 1 - q)) & 1 for q in range(nq)]
        if all(bits[c] for c in controls):
            bits[target] ^= 1
        j = int("".join(map(str, bits)), 2)
        U[j, i] = 1
    return U


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31))
def test_gates_match_dense_matrices(seed):
    rng = np.random.default_rng(seed)
    nq = 4
    lay = bits_layout(nq)
    v = rng.normal(size=1 << nq) + 1j * rng.normal(size=1 << nq)
    v /= np.linalg.norm(v)
    s = StateVector(v, lay)
    q = rng.permutation(nq)
    assert np.allclose(apply_x(s, q[0]).amplitudes, _dense_controlled_flip(nq, [], q[0]) @ v, atol=1e-14)
    assert np.allclose(apply_cnot(s, q[0], q[1]).amplitudes, _dense_controlled_flip(nq, [q[0]], q[1]) @ v, atol=1e-14)
    assert np.allclose(apply_toffoli(s, q[0], q[1], q[2]).amplitudes,
                       _dense_controlled_flip(nq, [q[0], q[1]], q[2]) @ v, atol=1e-14)


def test_xor_oracle_examples():
    lay = bits_layout(2)
    f = TruthTable(1, 1, (0, 1))
    s = apply_xor_oracle(StateVector.basis(lay, q0=1), f, [0], [1])
    assert s.amplitudes[lay.index(q0=1, q1=1)] == 1
    assert np.array_equal(apply_xor_oracle(s, f, [0], [1]).amplitudes, StateVector.basis(lay, q0=1).amplitudes)
    with pytest.raises(PreconditionError):
        apply_xor_oracle(s, f, [0, 1], [1])


def test_xor_oracle_builds_realizable_example():
    # sum sqrt(D(x)) |x, 0> with f = target gives the realizable example state
    D = Distribution([0.1, 0.2, 0.3, 0.4])
    target = (2, 0, 1, 2)
    lay = RegisterLayout.example(4, 3)
    amps = np.zeros(lay.dim, dtype=complex)
    for x in range(4):
        amps[lay.index(x=x)] = math.sqrt(D.probs[x])
    f = TruthTable.from_labels(target, lay.width("x"), lay.width("y"))
    out = apply_xor_oracle(StateVector(amps, lay), f, lay.qubits("x"), lay.qubits("y"))
    assert np.allclose(out.amplitudes, prepare_realizable_example(D, target, lay).amplitudes, atol=1e-15)


def test_prepare_examples():
    lay = RegisterLayout.example(2, 2)
    s = prepare_realizable_example(Distribution.point_mass(2, 0), (1, 0), lay)
    assert s.amplitudes[lay.index(x=0, y=1)] == 1
    s = prepare_realizable_example(Distribution.uniform(2), (0, 1), lay)
    assert s.amplitudes[lay.index(x=0, y=0)] == pytest.approx(R2)
    assert s.amplitudes[lay.index(x=1, y=1)] == pytest.approx(R2)
    s = prepare_realizable_example(Distribution([0.25, 0.75]), (1, 0), lay)
    assert s.amplitudes[lay.index(x=0, y=1)] == pytest.approx(0.5)
    assert s.amplitudes[lay.index(x=1, y=0)] == pytest.approx(math.sqrt(0.75))


def test_prepare_agnostic_examples():
    lay = RegisterLayout.example(2, 2)
    s = prepare_agnostic_example(Distribution.point_mass(4, 3), lay)
    assert s.amplitudes[lay.index(x=1, y=1)] == 1
    s = prepare_agnostic_example(Distribution([0.5, 0.5, 0, 0]), lay)
    assert s.amplitudes[lay.index(x=0, y=0)] == pytest.approx(R2)
    assert s.amplitudes[lay.index(x=0, y=1)] == pytest.approx(R2)
    with pytest.raises(PreconditionError):
        prepare_agnostic_example(Distribution.uniform(3), lay)


def test_measurement_of_basis_state_is_deterministic():
    lay = RegisterLayout.example(3, 3)
    s = StateVector.basis(lay, x=2, y=1)
    rng = np.random.default_rng(0)
    for _ in range(20):
        m, post = measure_computational(s, rng)
        assert decode_example(lay, m) == (2, 1)
        assert np.array_equal(post.amplitudes, s.amplitudes)


def test_born_rule_frequencies():
    D = Distribution([0.1, 0.6, 0.3])
    lay = RegisterLayout.example(3, 2)
    s = prepare_realizable_example(D, (0, 1, 1), lay)
    out = sample_outcomes(s, np.random.default_rng(1), 20000)
    xs = np.array([decode_example(lay, int(m))[0] for m in out])
    freq = np.bincount(xs, minlength=3) / len(xs)
    # 5 sigma binomial tolerance
    assert np.all(np.abs(freq - D.probs) <= 5 * np.sqrt(D.probs * (1 - D.probs) / len(xs)))


def test_decode_rejects_invalid_patterns():
    lay = RegisterLayout.example(3, 3)
    with pytest.raises(CircuitFaultError):
        decode_example(lay, lay.index(x=3, y=0))
    with pytest.raises(CircuitFaultError):
        decode_example(lay, lay.index(x=0, y=3))


def test_h_truth_table():
    f0, f1 = (0, 0), (1, 1)
    h = build_h_truth_table(f0, f1, 2)
    w = 1
    assert h((0 << 2 * w) | (1 << w) | 1) == 1
    assert h((0 << 2 * w) | (1 << w) | 0) == 0
    with pytest.raises(PreconditionError):
        build_h_truth_table((0, 1), (0, 2), 3)


def test_transform_point_mass():
    n, k, f0, f1 = 2, 3, (0, 2), (1, 0)
    lay = RegisterLayout.reduction(n, k)
    s = prepare_realizable_example(Distribution.point_mass(2, 1), (0, 0), lay)
    out = binary_to_multiclass_transform(s, f0, f1)
    assert ancilla_residual(out) == 0
    assert out.amplitudes[lay.index(x=1, fy=f0[1])] == pytest.approx(1)


def test_transform_worked_example():
    n, k, f0, f1, c = 2, 3, (0, 2), (1, 0), (0, 1)
    lay = RegisterLayout.reduction(n, k)
    out = binary_to_multiclass_transform(prepare_realizable_example(Distribution.uniform(2), c, lay), f0, f1)
    nz = np.flatnonzero(np.abs(out.amplitudes) > 1e-15)
    assert nz.tolist() == [lay.index(x=0, fy=0), lay.index(x=1, fy=0)]
    assert np.allclose(out.amplitudes[nz], R2, atol=1e-15)
    small = drop_ancillas(out)
    ex = RegisterLayout.example(n, k)
    assert np.flatnonzero(np.abs(small.amplitudes) > 1e-15).tolist() == [0, 4]
    assert small.amplitudes[ex.index(x=0, y=0)] == pytest.approx(R2)
    assert small.amplitudes[ex.index(x=1, y=0)] == pytest.approx(R2)


def test_circuit_matches_classical_reference():
    for n, k in [(1, 3), (2, 3), (2, 4)]:
        lay = RegisterLayout.reduction(n, k)
        pairs = [(a, b) for a in range(k) for b in range(k) if a != b]
        for choice in itertools.islice(itertools.product(pairs, repeat=n), 20):
            f0 = tuple(a for a, _ in choice)
            f1 = tuple(b for _, b in choice)
            ref = oracles.reduction_matrix_reference(n, k, f0, f1)
            tags = np.arange(1, lay.dim + 1, dtype=complex)
            out = reduction_circuit(StateVector(tags, lay, check=False), f0, f1).amplitudes
            for i, j in ref.items():
                assert out[j] == i + 1


def test_transform_preconditions():
    lay = RegisterLayout.reduction(2, 3)
    s = prepare_realizable_example(Distribution.uniform(2), (0, 1), lay)
    with pytest.raises(PreconditionError):
        binary_to_multiclass_transform(s, (0, 1), (0, 2))
    with pytest.raises(PreconditionError):
        binary_to_multiclass_transform(s, (0, 1), (1, 5))
    dirty = apply_x(s, lay.qubits("f0")[0])
    with pytest.raises(PreconditionError):
        binary_to_multiclass_transform(dirty, (0, 1), (1, 0))
    with pytest.raises(PreconditionError):
        binary_to_multiclass_transform(prepare_realizable_example(Distribution.uniform(2), (0, 1),
                                                                  RegisterLayout.example(2, 3)), (0, 1), (1, 0))


def test_embed_appends_zero_registers():
    lay = RegisterLayout.example(2, 2)
    big = RegisterLayout((("x", 1), ("y", 1), ("anc", 2)), 2, 2)
    s = prepare_realizable_example(Distribution.uniform(2), (1, 0), lay)
    e = embed(s, big)
    assert e.amplitudes[big.index(x=0, y=1)] == pytest.approx(R2)
    assert e.amplitudes[big.index(x=1, y=0)] == pytest.approx(R2)


def test_reduction_wrap_learner_recovers_binary_target():
    # multiclass learner: measure-then-ERM over the full class on 3 points, k=3
    H = full_class(3, 3)
    S = (2, 0)
    f0, f1 = (0, 1), (2, 0)

    def A(states, rng):
        return measure_then_erm(states, H, rng)

    wrapped = reduction_wrap_learner(A, f0, f1, S, 3, 3)
    D = Distribution([0.5, 0.5])
    for c in itertools.product((0, 1), repeat=2):
        lay = RegisterLayout.example(2, 2)
        states = [prepare_realizable_example(D, c, lay)] * 40
        assert wrapped(states, np.random.default_rng(3)) == c
        converted = wrapped.convert(states[0])
        ex = RegisterLayout.example(3, 3)
        for i, s in enumerate(S):
            lab = f1[i] if c[i] else f0[i]
            assert converted.amplitudes[ex.index(x=s, y=lab)] == pytest.approx(R2)


def test_statevector_rejects_bad_norm():
    with pytest.raises(PreconditionError):
        StateVector(np.ones(4), RegisterLayout.example(2, 2))

"""Tests for the binary-symplectic Pauli engine and graph canonicalization."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import same_up_to_phase
from qre import _sim
from qre.stabilizer import (
    PauliRows,
    StabilizerError,
    graph_form,
    stabilizer_after,
)

GATE_MATS = {
    "h": (_sim.H_MAT, 1),
    "s": (_sim.S_MAT, 1),
    "sdg": (_sim.SDG_MAT, 1),
    "x": (_sim.X_MAT, 1),
    "y": (_sim.Y_MAT, 1),
    "z": (_sim.Z_MAT, 1),
    "cx": (_sim.CX_MAT, 2),
    "cz": (_sim.CZ_MAT, 2),
    "swap": (_sim.SWAP_MAT, 2),
}


def make_rows(x_bits, z_bits, r_bit):
    return PauliRows(
        np.array([x_bits], dtype=bool),
        np.array([z_bits], dtype=bool),
        np.array([r_bit], dtype=bool),
    )


def unitary_on(name: str, qubits: tuple[int, ...], n: int) -> np.ndarray:
    mat = GATE_MATS[name][0]
    return _sim.circuit_unitary(
        lambda s: _sim.apply_matrix(s, mat, qubits), n)


def all_paulis(n: int):
    for x_bits in itertools.product([0, 1], repeat=n):
        for z_bits in itertools.product([0, 1], repeat=n):
            for r_bit in (0, 1):
                yield x_bits, z_bits, r_bit


class TestDenseConvention:
    def test_single_axes(self):
        assert np.allclose(make_rows([1], [0], 0).dense(), _sim.X_MAT)
        assert np.allclose(make_rows([0], [1], 0).dense(), _sim.Z_MAT)
        assert np.allclose(make_rows([1], [1], 0).dense(), _sim.Y_MAT)
        assert np.allclose(make_rows([1], [0], 1).dense(), -_sim.X_MAT)

    def test_constructors(self):
        rows = PauliRows.identity_x(3)
        for i in range(3):
            expected = unitary_on("x", (i,), 3) @ np.eye(8)
            assert np.allclose(rows.dense(i), expected)
        z1 = PauliRows.single_z(1, 2)
        assert np.allclose(z1.dense(0), np.kron(np.eye(2), _sim.Z_MAT))

    def test_dense_is_hermitian(self):
        for x_bits, z_bits, r_bit in all_paulis(2):
            mat = make_rows(x_bits, z_bits, r_bit).dense()
            assert np.allclose(mat, mat.conj().T)


class TestGateConjugation:
    @pytest.mark.parametrize("name", sorted(GATE_MATS))
    def test_matches_dense_conjugation(self, name):
        arity = GATE_MATS[name][1]
        n = arity
        for qubits in itertools.permutations(range(n), arity):
            u = unitary_on(name, qubits, n)
            for x_bits, z_bits, r_bit in all_paulis(n):
                rows = make_rows(x_bits, z_bits, r_bit)
                before = rows.dense()
                rows.apply(name, qubits)
                after = rows.dense()
                assert np.allclose(after, u @ before @ u.conj().T, atol=1e-12), (
                    name, qubits, x_bits, z_bits, r_bit)


class TestMultiplyInto:
    def test_commuting_product(self):
        rows = PauliRows(
            np.array([[1, 1], [0, 0]], dtype=bool),
            np.array([[0, 0], [1, 1]], dtype=bool),
            np.array([0, 0], dtype=bool),
        )  # XX and ZZ
        expected = rows.dense(0) @ rows.dense(1)
        rows.multiply_into(0, 1)
        assert np.allclose(rows.dense(0), expected)

    def test_disjoint_product(self):
        rows = PauliRows(
            np.array([[1, 0], [0, 0]], dtype=bool),
            np.array([[0, 0], [0, 1]], dtype=bool),
            np.array([1, 0], dtype=bool),
        )  # -XI and IZ
        expected = rows.dense(0) @ rows.dense(1)
        rows.multiply_into(0, 1)
        assert np.allclose(rows.dense(0), expected)

    def test_anticommuting_raises(self):
        rows = PauliRows(
            np.array([[1], [0]], dtype=bool),
            np.array([[0], [1]], dtype=bool),
            np.array([0, 0], dtype=bool),
        )  # X and Z on the same qubit
        with pytest.raises(StabilizerError):
            rows.multiply_into(0, 1)


@st.composite
def clifford_ops(draw, max_qubits=6, max_ops=30):
    n = draw(st.integers(1, max_qubits))
    k = draw(st.integers(0, max_ops))
    ops = []
    for _ in range(k):
        name = draw(st.sampled_from(sorted(GATE_MATS)))
        if GATE_MATS[name][1] == 2 and n >= 2:
            a = draw(st.integers(0, n - 1))
            b = draw(st.integers(0, n - 2))
            if b >= a:
                b += 1
            ops.append((name, (a, b)))
        elif GATE_MATS[name][1] == 1:
            ops.append((name, (draw(st.integers(0, n - 1)),)))
    return n, ops


def dense_after(ops, n):
    state = _sim.plus_state(n)
    for name, qubits in ops:
        state = _sim.apply_matrix(state, GATE_MATS[name][0], qubits)
    return state


class TestStabilizerAfter:
    @settings(max_examples=60, deadline=None)
    @given(clifford_ops())
    def test_rows_stabilize_the_state(self, case):
        n, ops = case
        rows = stabilizer_after(ops, n)
        psi = dense_after(ops, n).reshape(-1)
        for i in range(n):
            assert np.allclose(rows.dense(i) @ psi, psi, atol=1e-10)

    def test_bell_pair(self):
        # h(1) sends |++> to |+0>, then cx makes (|00>+|11>)/sqrt(2)
        ops = [("h", (1,)), ("cx", (0, 1))]
        rows = stabilizer_after(ops, 2)
        bell = dense_after(ops, 2).reshape(-1)
        assert np.allclose(bell, np.array([1, 0, 0, 1]) / np.sqrt(2))
        for m in (np.kron(_sim.X_MAT, _sim.X_MAT),
                  np.kron(_sim.Z_MAT, _sim.Z_MAT)):
            assert np.allclose(m @ bell, bell)
        for i in range(2):
            assert np.allclose(rows.dense(i) @ bell, bell)


class TestGraphForm:
    def test_plus_states_give_empty_graph(self):
        gf = graph_form(PauliRows.identity_x(4))
        assert not gf.edges()
        assert gf.adjacency.shape == (4, 4)

    def test_bell_pair_graph(self):
        gf = graph_form(stabilizer_after([("h", (1,)), ("cx", (0, 1))], 2))
        assert gf.edges() == [(0, 1)]

    def test_product_state_has_no_edges(self):
        gf = graph_form(stabilizer_after([("h", (0,)), ("cx", (0, 1))], 2))
        assert gf.edges() == []

    def test_adjacency_shape_and_symmetry(self):
        ops = [("h", (0,)), ("cx", (0, 1)), ("s", (1,)), ("cz", (1, 2))]
        gf = graph_form(stabilizer_after(ops, 3))
        adj = gf.adjacency
        assert np.array_equal(adj, adj.T)
        assert not adj.diagonal().any()

    def test_only_h_s_z_locals(self):
        ops = [("h", (0,)), ("cx", (0, 1)), ("sdg", (1,)), ("y", (0,))]
        gf = graph_form(stabilizer_after(ops, 2))
        for per_qubit in gf.applied:
            assert set(per_qubit) <= {"h", "s", "z"}

    def test_determinism(self):
        ops = [("h", (0,)), ("cx", (0, 1)), ("cz", (1, 2)), ("s", (2,))]
        a = graph_form(stabilizer_after(ops, 3))
        b = graph_form(stabilizer_after(ops, 3))
        assert np.array_equal(a.adjacency, b.adjacency)
        assert a.applied == b.applied

    @settings(max_examples=60, deadline=None)
    @given(clifford_ops())
    def test_state_level_equivalence(self, case):
        n, ops = case
        gf = graph_form(stabilizer_after(ops, n))
        state = _sim.plus_state(n)
        for u, v in gf.edges():
            state = _sim.apply_matrix(state, _sim.CZ_MAT, (u, v))
        for v in range(n):
            state = _sim.apply_matrix(state, gf.local_matrix(v), (v,))
        assert same_up_to_phase(state.reshape(-1),
                                dense_after(ops, n).reshape(-1))

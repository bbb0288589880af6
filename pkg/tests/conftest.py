"""Shared test helpers: random inputs and an independent dense-matrix oracle.

The dense oracle builds every gate as an explicit 2^n x 2^n matrix from index
arithmetic over basis states, deliberately sharing no code with the stride
simulator it checks.
"""
import cmath
import math

import numpy as np
import pytest

from fsl.circuit import Circuit, Gate, GateKind


def rand_state(rng, q):
    v = rng.standard_normal(2**q) + 1j * rng.standard_normal(2**q)
    return v / np.linalg.norm(v)


def rand_unitary(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(rng, n, num_gates, include_opaque=False, random_perm=False):
    kinds = [GateKind.H, GateKind.X, GateKind.RY, GateKind.RZ, GateKind.PHASE,
             GateKind.CNOT, GateKind.CPHASE, GateKind.SWAP]
    if include_opaque:
        kinds.append(GateKind.OPAQUE_UNITARY)
    gates = []
    for _ in range(num_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind is GateKind.OPAQUE_UNITARY:
            k = int(rng.integers(1, min(3, n) + 1))
            qubits = tuple(int(v) for v in rng.choice(n, size=k, replace=False))
            gates.append(Gate(kind, qubits, matrix=rand_unitary(rng, 2**k)))
            continue
        arity = 2 if kind in (GateKind.CNOT, GateKind.CPHASE, GateKind.SWAP) else 1
        qubits = tuple(int(v) for v in rng.choice(n, size=arity, replace=False))
        angle = None
        if kind in (GateKind.RY, GateKind.RZ, GateKind.PHASE, GateKind.CPHASE):
            angle = float(rng.uniform(-2 * math.pi, 2 * math.pi))
        gates.append(Gate(kind, qubits, angle))
    perm = None
    if random_perm:
        perm = tuple(int(v) for v in rng.permutation(n))
    return Circuit(n, tuple(gates), perm)


def _bit(index, qubit, n):
    return (index >> (n - 1 - qubit)) & 1


def _flip(index, qubit, n):
    return index ^ (1 << (n - 1 - qubit))


def dense_gate_matrix(g: Gate, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of a gate, from basis-state index arithmetic."""
    dim = 2**n
    mat = np.zeros((dim, dim), dtype=complex)
    one_q = {
        GateKind.H: np.array([[1, 1], [1, -1]]) / math.sqrt(2),
        GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    }
    if g.kind is GateKind.RY:
        c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
        one_q[GateKind.RY] = np.array([[c, -s], [s, c]])
    if g.kind is GateKind.RZ:
        one_q[GateKind.RZ] = np.diag([cmath.exp(-0.5j * g.angle), cmath.exp(0.5j * g.angle)])
    if g.kind is GateKind.PHASE:
        one_q[GateKind.PHASE] = np.diag([1.0, cmath.exp(1j * g.angle)])

    if g.kind in one_q:
        u = one_q[g.kind]
        q = g.qubits[0]
        for col in range(dim):
            b = _bit(col, q, n)
            mat[col if b == 0 else _flip(col, q, n), col] += u[0, b]
            mat[col if b == 1 else _flip(col, q, n), col] += u[1, b]
        return mat
    for col in range(dim):
        if g.kind is GateKind.CNOT:
            ctrl, tgt = g.qubits
            row = _flip(col, tgt, n) if _bit(col, ctrl, n) else col
            mat[row, col] = 1.0
        elif g.kind is GateKind.CPHASE:
            a, b = g.qubits
            on = _bit(col, a, n) and _bit(col, b, n)
            mat[col, col] = cmath.exp(1j * g.angle) if on else 1.0
        elif g.kind is GateKind.SWAP:
            a, b = g.qubits
            row = col
            if _bit(col, a, n) != _bit(col, b, n):
                row = _flip(_flip(col, a, n), b, n)
            mat[row, col] = 1.0
        elif g.kind is GateKind.OPAQUE_UNITARY:
            bits = [_bit(col, q, n) for q in g.qubits]
            sub_col = int("".join(map(str, bits)), 2)
            for sub_row in range(2 ** len(g.qubits)):
                row = col
                for pos, q in enumerate(g.qubits):
                    want = (sub_row >> (len(g.qubits) - 1 - pos)) & 1
                    if _bit(row, q, n) != want:
                        row = _flip(row, q, n)
                mat[row, col] = g.matrix[sub_row, sub_col]
        else:
            raise AssertionError(f"oracle has no rule for {g.kind}")
    return mat


def dense_circuit_matrix(c: Circuit) -> np.ndarray:
    """Oracle unitary: plain matrix product, then the output permutation."""
    dim = 2**c.num_qubits
    u = np.eye(dim, dtype=complex)
    for g in c.gates:
        u = dense_gate_matrix(g, c.num_qubits) @ u
    if not c.is_identity_permutation:
        perm_mat = np.zeros((dim, dim))
        n = c.num_qubits
        for col in range(dim):
            row = 0
            for i in range(n):
                row |= _bit(col, c.output_permutation[i], n) << (n - 1 - i)
            perm_mat[row, col] = 1.0
        u = perm_mat @ u
    return u


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)

"""Dense statevector simulation, fidelity metrics, and measurement sampling.

Amplitude vectors are big-endian: qubit 0 is the most significant index bit,
matching the circuit convention.  Gate application works on reshaped views of
the amplitude array so single-qubit and diagonal gates stay cheap even at
20+ qubits.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, GateKind
from .errors import CapacityExceeded, DimensionMismatch, NotADistribution

DEFAULT_MAX_QUBITS = 24
MAX_OPAQUE_QUBITS = 12

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class Statevector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise DimensionMismatch(
                f"expected {2**self.num_qubits} amplitudes, got shape {amps.shape}")
        if abs(np.sum(np.abs(amps) ** 2) - 1.0) > _NORM_TOL:
            raise ValueError("statevector is not normalized")
        amps = np.ascontiguousarray(amps)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, num_qubits: int) -> Statevector:
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amps) -> Statevector:
        amps = np.asarray(amps, dtype=complex)
        n = int(round(math.log2(len(amps))))
        if 2**n != len(amps):
            raise DimensionMismatch(f"amplitude count {len(amps)} is not a power of two")
        return cls(n, amps / np.linalg.norm(amps))


@dataclass(frozen=True)
class ShotHistogram:
    counts: dict
    shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("histogram counts do not sum to shots")

    def probabilities(self, dim: int) -> np.ndarray:
        p = np.zeros(dim)
        for k, c in self.counts.items():
            p[k] = c / self.shots
        return p


def _apply_1q_dense(psi: np.ndarray, mat: np.ndarray, q: int, n: int) -> None:
    view = psi.reshape(2**q, 2, -1)
    a, b = view[:, 0, :], view[:, 1, :]
    new0 = mat[0, 0] * a + mat[0, 1] * b
    new1 = mat[1, 0] * a + mat[1, 1] * b
    view[:, 0, :] = new0
    view[:, 1, :] = new1


def _apply_1q_diag(psi: np.ndarray, d0: complex, d1: complex, q: int, n: int) -> None:
    view = psi.reshape(2**q, 2, -1)
    if d0 != 1.0:
        view[:, 0, :] *= d0
    if d1 != 1.0:
        view[:, 1, :] *= d1


def _pair_view(psi: np.ndarray, q1: int, q2: int, n: int):
    """View of shape (A,2,B,2,C) with q1 on axis 1 and q2 on axis 3 (q1 < q2)."""
    return psi.reshape(2**q1, 2, 2 ** (q2 - q1 - 1), 2, -1)


def _apply_gate(psi: np.ndarray, g: Gate, n: int) -> None:
    kind = g.kind
    if kind is GateKind.H:
        _apply_1q_dense(psi, _H_MAT, g.qubits[0], n)
    elif kind is GateKind.X:
        view = psi.reshape(2 ** g.qubits[0], 2, -1)
        tmp = view[:, 0, :].copy()
        view[:, 0, :] = view[:, 1, :]
        view[:, 1, :] = tmp
    elif kind is GateKind.RY:
        c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
        _apply_1q_dense(psi, np.array([[c, -s], [s, c]]), g.qubits[0], n)
    elif kind is GateKind.RZ:
        ph = cmath.exp(0.5j * g.angle)
        _apply_1q_diag(psi, ph.conjugate(), ph, g.qubits[0], n)
    elif kind is GateKind.PHASE:
        _apply_1q_diag(psi, 1.0, cmath.exp(1j * g.angle), g.qubits[0], n)
    elif kind is GateKind.CNOT:
        ctrl, tgt = g.qubits
        qa, qb = min(ctrl, tgt), max(ctrl, tgt)
        view = _pair_view(psi, qa, qb, n)
        if ctrl < tgt:
            on, off = view[:, 1, :, 1, :], view[:, 1, :, 0, :]
        else:
            on, off = view[:, 1, :, 1, :], view[:, 0, :, 1, :]
        tmp = off.copy()
        off[...] = on
        on[...] = tmp
    elif kind is GateKind.CPHASE:
        qa, qb = sorted(g.qubits)
        view = _pair_view(psi, qa, qb, n)
        view[:, 1, :, 1, :] *= cmath.exp(1j * g.angle)
    elif kind is GateKind.SWAP:
        qa, qb = sorted(g.qubits)
        view = _pair_view(psi, qa, qb, n)
        tmp = view[:, 0, :, 1, :].copy()
        view[:, 0, :, 1, :] = view[:, 1, :, 0, :]
        view[:, 1, :, 0, :] = tmp
    elif kind is GateKind.OPAQUE_UNITARY:
        k = len(g.qubits)
        if k > MAX_OPAQUE_QUBITS:
            raise CapacityExceeded(f"opaque gate on {k} qubits exceeds cap {MAX_OPAQUE_QUBITS}")
        tensor = psi.reshape([2] * n)
        moved = np.moveaxis(tensor, g.qubits, range(k))
        block = g.matrix @ moved.reshape(2**k, -1)
        moved[...] = block.reshape(moved.shape)
    else:  # pragma: no cover
        raise ValueError(f"unknown gate kind {kind}")


_H_MAT = np.array([[1, 1], [1, -1]], dtype=float) / math.sqrt(2)


def apply_output_permutation(amps: np.ndarray, perm) -> np.ndarray:
    """Relabel wires so logical qubit ``i`` reads from wire ``perm[i]``."""
    n = len(perm)
    if tuple(perm) == tuple(range(n)):
        return amps
    return np.transpose(amps.reshape([2] * n), perm).reshape(-1)


def run(c: Circuit, initial: Statevector | None = None, max_qubits: int | None = None) -> Statevector:
    """Apply every gate of ``c`` in order, then its output permutation."""
    cap = DEFAULT_MAX_QUBITS if max_qubits is None else max_qubits
    if c.num_qubits > cap:
        raise CapacityExceeded(f"{c.num_qubits} qubits exceeds simulator capacity {cap}")
    if initial is None:
        initial = Statevector.zero(c.num_qubits)
    if initial.num_qubits != c.num_qubits:
        raise DimensionMismatch(
            f"initial state has {initial.num_qubits} qubits, circuit {c.num_qubits}")
    psi = initial.amplitudes.copy()
    n = c.num_qubits
    for g in c.gates:
        _apply_gate(psi, g, n)
    psi = apply_output_permutation(psi, c.output_permutation)
    norm = np.sum(np.abs(psi) ** 2)
    if abs(norm - 1.0) > _NORM_TOL:
        raise RuntimeError(f"norm drifted to {norm}")
    return Statevector(n, np.ascontiguousarray(psi))


def fidelity(a: Statevector, b: Statevector) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatch("statevector dimensions differ")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def classical_fidelity(p, q) -> float:
    """Squared Bhattacharyya coefficient between two outcome distributions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatch("distribution dimensions differ")
    for name, v in (("p", p), ("q", q)):
        if np.any(v < 0):
            raise NotADistribution(f"{name} has negative entries")
        if abs(v.sum() - 1.0) > 1e-9:
            raise NotADistribution(f"{name} sums to {v.sum()}, not 1")
    return float(np.sum(np.sqrt(p) * np.sqrt(q)) ** 2)


def sample(s: Statevector, shots: int, seed: int) -> ShotHistogram:
    """Seeded i.i.d. computational-basis samples.

    The generator is numpy's PCG64 seeded with ``seed``; identical inputs give
    bit-identical histograms.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probs = np.abs(s.amplitudes) ** 2
    probs = probs / probs.sum()
    outcomes = rng.choice(len(probs), size=shots, p=probs)
    values, counts = np.unique(outcomes, return_counts=True)
    return ShotHistogram({int(v): int(c) for v, c in zip(values, counts)}, shots)


def reduced_population(s: Statevector, qubit: int, value: int) -> float:
    """Probability that measuring ``qubit`` yields ``value``."""
    tensor = np.abs(s.amplitudes.reshape([2] * s.num_qubits)) ** 2
    axes = tuple(i for i in range(s.num_qubits) if i != qubit)
    return float(tensor.sum(axis=axes)[value])


def reduced_density_matrix(s: Statevector, qubits: tuple[int, ...]) -> np.ndarray:
    """Reduced density matrix of the listed qubits (kept in the given order)."""
    n = s.num_qubits
    keep = list(qubits)
    rest = [q for q in range(n) if q not in keep]
    tensor = s.amplitudes.reshape([2] * n)
    moved = np.transpose(tensor, keep + rest).reshape(2 ** len(keep), -1)
    return moved @ moved.conj().T


# ---------------------------------------------------------------------------
# On-disk formats

def histogram_to_csv(h: ShotHistogram) -> str:
    lines = ["index,count"]
    for k in sorted(h.counts):
        lines.append(f"{k},{h.counts[k]}")
    return "\n".join(lines) + "\n"


def dump_statevector(s: Statevector, path) -> None:
    """Raw little-endian complex128 amplitudes in index order, no header."""
    s.amplitudes.astype("<c16").tofile(path)


def load_statevector(path) -> Statevector:
    amps = np.fromfile(path, dtype="<c16")
    return Statevector.from_amplitudes(amps)

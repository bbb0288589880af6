"""Gate-level circuit representation.

Conventions used throughout the package:

* Qubit 0 is the most significant bit of a computational-basis index, so the
  basis state |b0 b1 ... b_{q-1}> has index sum(b_t * 2**(q-1-t)).
* Circuits are immutable values: a gate list plus an output permutation.
  ``output_permutation[i] = w`` means logical qubit ``i`` of the circuit's
  output lives on wire ``w`` (used to elide the terminal SWAP network of the
  QFT).  The identity permutation is the common case.
* Angles are stored as given, without mod-2*pi reduction.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NotUnitary, OpaqueGatePresent


class GateKind(str, Enum):
    H = "H"
    X = "X"
    RY = "RY"
    RZ = "RZ"
    PHASE = "PHASE"
    CNOT = "CNOT"
    CPHASE = "CPHASE"
    SWAP = "SWAP"
    OPAQUE_UNITARY = "OPAQUE_UNITARY"


_ARITY = {
    GateKind.H: 1,
    GateKind.X: 1,
    GateKind.RY: 1,
    GateKind.RZ: 1,
    GateKind.PHASE: 1,
    GateKind.CNOT: 2,
    GateKind.CPHASE: 2,
    GateKind.SWAP: 2,
}

_ANGLED = {GateKind.RY, GateKind.RZ, GateKind.PHASE, GateKind.CPHASE}

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class Gate:
    """A single gate: kind, qubit tuple (controls first), optional angle/matrix."""

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None
    matrix: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubit in gate {self.kind}: {self.qubits}")
        if self.kind is GateKind.OPAQUE_UNITARY:
            if self.matrix is None:
                raise ValueError("OPAQUE_UNITARY requires a matrix")
            dim = 2 ** len(self.qubits)
            mat = np.asarray(self.matrix, dtype=complex)
            if mat.shape != (dim, dim):
                raise ValueError(f"matrix shape {mat.shape} does not match {len(self.qubits)} qubits")
            if np.max(np.abs(mat.conj().T @ mat - np.eye(dim))) >= UNITARITY_TOL:
                raise NotUnitary(f"opaque gate '{self.label}' is not unitary")
            mat = np.ascontiguousarray(mat)
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)
        else:
            if len(self.qubits) != _ARITY[self.kind]:
                raise ValueError(f"{self.kind} expects {_ARITY[self.kind]} qubits, got {self.qubits}")
            if self.kind in _ANGLED:
                if self.angle is None or not math.isfinite(self.angle):
                    raise ValueError(f"{self.kind} requires a finite angle, got {self.angle}")
                object.__setattr__(self, "angle", float(self.angle))
            elif self.angle is not None:
                raise ValueError(f"{self.kind} takes no angle")

    def inverse(self) -> Gate:
        if self.kind in _ANGLED:
            return Gate(self.kind, self.qubits, -self.angle)
        if self.kind is GateKind.OPAQUE_UNITARY:
            return Gate(self.kind, self.qubits, matrix=self.matrix.conj().T, label=self.label + "+")
        return self  # H, X, CNOT, SWAP are self-inverse

    def remap(self, mapping) -> Gate:
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.angle, self.matrix, self.label)


# Short constructors; these keep circuit builders readable.
def h(q: int) -> Gate:
    return Gate(GateKind.H, (q,))


def x(q: int) -> Gate:
    return Gate(GateKind.X, (q,))


def ry(angle: float, q: int) -> Gate:
    return Gate(GateKind.RY, (q,), angle)


def rz(angle: float, q: int) -> Gate:
    return Gate(GateKind.RZ, (q,), angle)


def phase(angle: float, q: int) -> Gate:
    return Gate(GateKind.PHASE, (q,), angle)


def cnot(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (control, target))


def cphase(angle: float, a: int, b: int) -> Gate:
    return Gate(GateKind.CPHASE, (a, b), angle)


def swap(a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b))


def unitary(matrix: np.ndarray, qubits, label: str = "U") -> Gate:
    return Gate(GateKind.OPAQUE_UNITARY, tuple(qubits), matrix=np.asarray(matrix, dtype=complex), label=label)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over ``num_qubits`` wires plus an output permutation."""

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    output_permutation: tuple[int, ...] = None  # identity when omitted

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        perm = self.output_permutation
        if perm is None:
            perm = tuple(range(self.num_qubits))
        else:
            perm = tuple(int(p) for p in perm)
        if sorted(perm) != list(range(self.num_qubits)):
            raise ValueError(f"invalid output permutation {perm}")
        object.__setattr__(self, "output_permutation", perm)
        for g in self.gates:
            if any(q < 0 or q >= self.num_qubits for q in g.qubits):
                raise ValueError(f"gate {g.kind} on {g.qubits} outside {self.num_qubits} qubits")

    @property
    def is_identity_permutation(self) -> bool:
        return self.output_permutation == tuple(range(self.num_qubits))

    def has_opaque(self) -> bool:
        return any(g.kind is GateKind.OPAQUE_UNITARY for g in self.gates)

    def then(self, other: Circuit) -> Circuit:
        return compose(self, other)


@dataclass(frozen=True)
class GateCounts:
    single_qubit: int
    two_qubit: int
    opaque: int
    by_kind: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.single_qubit + self.two_qubit + self.opaque


def depth(c: Circuit) -> int:
    """ASAP-layered depth: each gate enters the earliest layer after every
    earlier gate sharing one of its qubits.  Opaque gates count as depth 1."""
    busy_until = [0] * c.num_qubits
    d = 0
    for g in c.gates:
        layer = 1 + max(busy_until[q] for q in g.qubits)
        for q in g.qubits:
            busy_until[q] = layer
        d = max(d, layer)
    return d


def gate_counts(c: Circuit) -> GateCounts:
    by_kind = Counter(g.kind.value for g in c.gates)
    single = sum(1 for g in c.gates if g.kind is not GateKind.OPAQUE_UNITARY and len(g.qubits) == 1)
    two = sum(1 for g in c.gates if g.kind is not GateKind.OPAQUE_UNITARY and len(g.qubits) == 2)
    opaque = by_kind.get(GateKind.OPAQUE_UNITARY.value, 0)
    return GateCounts(single, two, opaque, dict(by_kind))


def _inverse_permutation(perm) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def invert(c: Circuit) -> Circuit:
    """Exact inverse circuit: reversed gate list with inverted gates.

    A circuit means P_perm composed after its gate product, so the inverse
    carries the inverse permutation and its gates are conjugated onto the
    permuted wires.
    """
    iperm = _inverse_permutation(c.output_permutation)
    gates = tuple(g.inverse().remap(iperm) for g in reversed(c.gates))
    return Circuit(c.num_qubits, gates, iperm)


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Circuit equal to running ``a`` then ``b`` (b's qubits are logical wrt a's output)."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("qubit count mismatch in compose")
    if a.is_identity_permutation:
        gates = a.gates + b.gates
    else:
        gates = a.gates + tuple(g.remap(a.output_permutation) for g in b.gates)
    perm = tuple(a.output_permutation[b.output_permutation[j]] for j in range(a.num_qubits))
    return Circuit(a.num_qubits, gates, perm)


def peephole_cancel_cnots(c: Circuit) -> Circuit:
    """Drop adjacent identical CNOT pairs (same control and target, nothing in
    between on either qubit).  Iterates to a fixed point."""
    gates = list(c.gates)
    changed = True
    while changed:
        changed = False
        kept: list[Gate] = []
        last_on: dict[int, int] = {}  # qubit -> index into kept
        for g in gates:
            if g.kind is GateKind.CNOT:
                i = last_on.get(g.qubits[0], -1)
                j = last_on.get(g.qubits[1], -1)
                if i >= 0 and i == j and kept[i] is not None \
                        and kept[i].kind is GateKind.CNOT and kept[i].qubits == g.qubits:
                    kept[i] = None
                    for q in g.qubits:
                        del last_on[q]
                    changed = True
                    continue
            kept.append(g)
            for q in g.qubits:
                last_on[q] = len(kept) - 1
        gates = [g for g in kept if g is not None]
    return Circuit(c.num_qubits, tuple(gates), c.output_permutation)


# ---------------------------------------------------------------------------
# Serialization

_QASM_NAMES = {
    GateKind.H: "h",
    GateKind.X: "x",
    GateKind.RY: "ry",
    GateKind.RZ: "rz",
    GateKind.PHASE: "u1",
    GateKind.CNOT: "cx",
    GateKind.CPHASE: "cp",
    GateKind.SWAP: "swap",
}


def _fmt(angle: float) -> str:
    return format(angle, ".17g")


def permutation_to_swaps(perm) -> list[tuple[int, int]]:
    """SWAP gate sequence (in application order) whose net effect equals
    applying ``perm`` at the end of the circuit."""
    r = list(perm)
    swaps = []
    for i in range(len(r)):
        if r[i] != i:
            j = r[i]
            swaps.append((i, j))
            for t in range(len(r)):  # left-compose the transposition (i j)
                if r[t] == i:
                    r[t] = j
                elif r[t] == j:
                    r[t] = i
    return swaps


def export_qasm(c: Circuit) -> str:
    """Deterministic OpenQASM 2.0 text.

    Requires a fully decomposed circuit (no opaque gates).  A non-identity
    output permutation is materialized with explicit terminal SWAPs so the
    program needs no external bookkeeping.  ``cp`` follows the modern qelib1
    naming; ``u1`` is the plain phase gate.
    """
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";', f"qreg q[{c.num_qubits}];"]
    for g in c.gates:
        if g.kind is GateKind.OPAQUE_UNITARY:
            raise OpaqueGatePresent(f"cannot export opaque gate '{g.label}'; decompose first")
        name = _QASM_NAMES[g.kind]
        args = ",".join(f"q[{q}]" for q in g.qubits)
        if g.kind in _ANGLED:
            lines.append(f"{name}({_fmt(g.angle)}) {args};")
        else:
            lines.append(f"{name} {args};")
    if not c.is_identity_permutation:
        for a, b in permutation_to_swaps(c.output_permutation):
            lines.append(f"swap q[{a}],q[{b}];")
    return "\n".join(lines) + "\n"


def to_json_dict(c: Circuit) -> dict:
    """Circuit as the documented JSON schema (opaque gates are not representable)."""
    gates = []
    for g in c.gates:
        if g.kind is GateKind.OPAQUE_UNITARY:
            raise OpaqueGatePresent(f"cannot serialize opaque gate '{g.label}'; decompose first")
        entry = {"kind": g.kind.value, "qubits": list(g.qubits)}
        if g.angle is not None:
            entry["angle"] = g.angle
        gates.append(entry)
    return {
        "num_qubits": c.num_qubits,
        "gates": gates,
        "output_permutation": list(c.output_permutation),
    }


def from_json_dict(d: dict) -> Circuit:
    gates = tuple(
        Gate(GateKind(e["kind"]), tuple(e["qubits"]), e.get("angle"))
        for e in d["gates"]
    )
    return Circuit(int(d["num_qubits"]), gates, tuple(d["output_permutation"]))


def to_json(c: Circuit) -> str:
    return json.dumps(to_json_dict(c), indent=2, sort_keys=True)


def from_json(text: str) -> Circuit:
    return from_json_dict(json.loads(text))

"""End-to-end compilation: windowed Fourier coefficients in, circuit out.

The circuit family (per dimension d of D, each on n wires):

  1. a loader U_c prepares the wrapped coefficient state on the low m+1
     wires of every dimension's register (one joint loader across all
     dimensions' coefficient wires);
  2. a CNOT fan-out from each dimension's sign wire (position n-m-1 within
     the register) pads the negative frequencies up to the full register;
  3. an inverse QFT per register converts frequencies to samples.

``target_state`` evaluates the same truncated series directly and is the
oracle every compiled circuit is checked against.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import fourier
from .circuit import (Circuit, Gate, GateCounts, cnot, compose, depth, gate_counts, h,
                      peephole_cancel_cnots, phase)
from .errors import CapacityExceeded, DimensionMismatch
from .fourier import FourierSpec, GridFunction
from .simulator import Statevector
from .synth import build_inverse_qft, build_schmidt_circuit, build_ucr_circuit


class Loader(str, Enum):
    UCR = "ucr"
    SCHMIDT = "schmidt"


class NonperiodicVariant(str, Enum):
    DISENTANGLE = "disentangle"
    MEASURE = "measure"


DEFAULT_CAPACITY = 24


@dataclass(frozen=True)
class FSLPlan:
    n: int
    m: int
    dims: int = 1
    loader: Loader = Loader.UCR
    filter_a: float | None = None
    nonperiodic: NonperiodicVariant | None = None
    fanout: str = "tree"  # "tree" (balanced, log depth) or "sequential" (figure-faithful)
    elide_swaps: bool = True
    max_qubits: int = DEFAULT_CAPACITY

    def __post_init__(self):
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        if not 0 <= self.m < self.n:
            raise ValueError(f"need 0 <= m < n, got m={self.m}, n={self.n}")
        if self.fanout not in ("tree", "sequential"):
            raise ValueError(f"unknown fanout mode {self.fanout!r}")

    @property
    def total_qubits(self) -> int:
        return self.dims * self.n + (1 if self.nonperiodic else 0)

    def check_capacity(self):
        if self.total_qubits > self.max_qubits:
            raise CapacityExceeded(
                f"{self.total_qubits} qubits exceeds capacity {self.max_qubits} "
                f"(raise max_qubits or FSL_MAX_QUBITS)")


@dataclass(frozen=True)
class CompileReport:
    depth: int
    gate_counts: GateCounts
    exact_infidelity: float
    analytic_bound: float | None
    compile_wall_time: float
    contains_opaque: bool
    post_processing: dict | None = None

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "depth": self.depth,
            "gate_counts": {
                "single_qubit": self.gate_counts.single_qubit,
                "two_qubit": self.gate_counts.two_qubit,
                "opaque": self.gate_counts.opaque,
                "by_kind": dict(sorted(self.gate_counts.by_kind.items())),
            },
            "exact_infidelity": self.exact_infidelity,
            "analytic_bound": self.analytic_bound,
            "contains_opaque": self.contains_opaque,
        }
        if self.post_processing is not None:
            d["post_processing"] = self.post_processing
        if include_timing:
            d["compile_wall_time_s"] = self.compile_wall_time
        return d


def target_state(spec: FourierSpec, n: int) -> Statevector:
    """Direct evaluation of the truncated series on every grid point.

    This is the reference oracle: embed the windowed coefficients at their
    signed frequencies in the full 2^n spectrum and reconstruct.
    """
    if spec.m >= n:
        raise ValueError(f"need m < n, got m={spec.m}, n={n}")
    M = spec.max_frequency
    size = 2**n
    full = np.zeros((size,) * spec.dims, dtype=complex)
    pos = np.arange(-M, M + 1) % size
    full[np.ix_(*([pos] * spec.dims))] = spec.coeffs
    samples = fourier.reconstruct(full)
    flat = samples.reshape(-1)
    return Statevector(spec.dims * n, flat / np.linalg.norm(flat))


def _fanout_gates(source: int, targets: list[int], mode: str) -> list[Gate]:
    if mode == "sequential":
        return [cnot(source, t) for t in targets]
    holders = [source]
    queue = list(targets)
    gates = []
    while queue:
        for hold in list(holders):
            if not queue:
                break
            t = queue.pop(0)
            gates.append(cnot(hold, t))
            holders.append(t)
    return gates


def _loader_circuit(spec: FourierSpec, plan: FSLPlan, loader_qubits: list[int], total: int) -> Circuit:
    vec = spec.wrapped_vector()
    if plan.loader is Loader.SCHMIDT:
        if len(loader_qubits) < 2:
            raise ValueError("the Schmidt loader needs at least 2 coefficient qubits")
        return build_schmidt_circuit(vec, qubits=loader_qubits, num_qubits=total)
    return build_ucr_circuit(vec, qubits=loader_qubits, num_qubits=total)


def _compile(spec: FourierSpec, plan: FSLPlan, source: GridFunction | None,
             extra_qubits: int = 0, offset: int = 0) -> tuple[Circuit, CompileReport]:
    """Shared FSL assembly.  ``offset``/``extra_qubits`` make room for the
    non-periodic ancilla wire above the function registers."""
    if spec.dims != plan.dims:
        raise DimensionMismatch(f"spec has D={spec.dims}, plan has D={plan.dims}")
    if spec.m != plan.m:
        raise ValueError(f"spec was truncated at m={spec.m}, plan says m={plan.m}")
    plan.check_capacity()
    n, m, D = plan.n, plan.m, plan.dims
    total = D * n + extra_qubits

    t0 = time.perf_counter()
    regs = [list(range(offset + d * n, offset + (d + 1) * n)) for d in range(D)]
    loader_qubits = [q for reg in regs for q in reg[n - m - 1:]]
    circ = _loader_circuit(spec, plan, loader_qubits, total)

    gates = list(circ.gates)
    for reg in regs:
        gates.extend(_fanout_gates(reg[n - m - 1], reg[: n - m - 1][::-1], plan.fanout))
    circ = Circuit(total, tuple(gates))
    for reg in regs:
        circ = compose(circ, build_inverse_qft(n, elide_swaps=plan.elide_swaps,
                                               num_qubits=total, qubits=reg))
    circ = peephole_cancel_cnots(circ)
    wall = time.perf_counter() - t0

    bound = None
    if source is not None and source.dims == 1 and 2**m != 2 ** (source.n - 1):
        bound = fourier.infidelity_bound(source, m)
    report = CompileReport(
        depth=depth(circ),
        gate_counts=gate_counts(circ),
        exact_infidelity=max(0.0, 1.0 - spec.norm_constant),
        analytic_bound=bound,
        compile_wall_time=wall,
        contains_opaque=circ.has_opaque(),
    )
    return circ, report


def compile_1d(spec: FourierSpec, plan: FSLPlan,
               source: GridFunction | None = None) -> tuple[Circuit, CompileReport]:
    """Compile a one-dimensional coefficient window (Fig-1a layout)."""
    if spec.dims != 1:
        raise DimensionMismatch("compile_1d expects a 1D spec")
    return _compile(spec, plan, source)


def compile_nd(spec: FourierSpec, plan: FSLPlan,
               source: GridFunction | None = None) -> tuple[Circuit, CompileReport]:
    """Compile a D-dimensional coefficient window (per-dimension registers)."""
    if spec.dims < 2:
        raise DimensionMismatch("compile_nd expects D >= 2")
    return _compile(spec, plan, source)


def compile_spec(spec: FourierSpec, plan: FSLPlan,
                 source: GridFunction | None = None) -> tuple[Circuit, CompileReport]:
    return _compile(spec, plan, source)


def prepare_spec(g: GridFunction, m: int, filter_a: float | None = None) -> FourierSpec:
    """Analysis pipeline: full DFT, truncation window, optional Lanczos filter."""
    spec = fourier.truncate(fourier.dft_coefficients(g), m)
    if filter_a is not None:
        spec = fourier.lanczos_filter(spec, filter_a)
    return spec


def compile_nonperiodic(g: GridFunction, m: int, variant: NonperiodicVariant,
                        plan: FSLPlan | None = None) -> tuple[Circuit, CompileReport]:
    """Load a non-periodic 1D function through its mirror extension.

    The extension lives on n+1 qubits; wire 0 is the ancilla and wires 1..n
    the data register.  DISENTANGLE appends CNOTs from the ancilla onto every
    data wire plus an H on the ancilla, leaving the ancilla in |0> exactly.
    MEASURE instead attaches a classical post-processing rule to the report:
    on ancilla outcome 1, complement the data register (apply X everywhere).
    """
    if g.dims != 1:
        raise DimensionMismatch("non-periodic loading is one-dimensional")
    variant = NonperiodicVariant(variant)
    if plan is None:
        plan = FSLPlan(n=g.n, m=m, nonperiodic=variant)
    else:
        plan = replace(plan, n=g.n, m=m, dims=1, nonperiodic=variant)
    plan.check_capacity()

    extended = fourier.mirror_extend(g)
    spec = prepare_spec(extended, m, plan.filter_a)
    ext_plan = replace(plan, n=g.n + 1, nonperiodic=None,
                       max_qubits=max(plan.max_qubits, g.n + 1))
    circ, report = _compile(spec, ext_plan, extended)

    n = g.n
    if variant is NonperiodicVariant.DISENTANGLE:
        tail = Circuit(n + 1, tuple([cnot(0, t) for t in range(1, n + 1)] + [h(0)]))
        circ = compose(circ, tail)
        report = replace(report, depth=depth(circ), gate_counts=gate_counts(circ))
    else:
        rule = {
            "measure_qubit": 0,
            "data_qubits": list(range(1, n + 1)),
            "on_outcome_1": "apply X to every data qubit (complement the register)",
        }
        report = replace(report, post_processing=rule)
    return circ, report

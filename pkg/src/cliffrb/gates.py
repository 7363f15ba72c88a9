"""Named standard gates (tableau + dense matrix) and named gate sets.

Dense matrices use the convention that bit k of the basis index is the k-th
listed qubit (so the first index a two-qubit gate is applied at is the
low-order bit).  Every registered gate is checked at import time: conjugating
each generator Pauli by the dense matrix must reproduce the tableau image
including its sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .clifford import (
    CliffordTableau,
    GateSequence,
    clifford_apply,
    clifford_compose,
    embed_tableau,
)
from .clifford import group_order
from .pauli import PauliOperator

_SQ2 = 1.0 / np.sqrt(2.0)

# the 4x4 basis permutation taking "first listed qubit = high bit" matrices
# (the conventional textbook layout) to our low-bit-first convention
_SWAP44 = np.eye(4)[[0, 2, 1, 3]]


def _hi(mat: np.ndarray) -> np.ndarray:
    """Convert a two-qubit matrix written control-as-high-bit to our layout."""
    return _SWAP44 @ np.asarray(mat, dtype=complex) @ _SWAP44


@dataclass(frozen=True)
class GateDefinition:
    name: str
    arity: int
    tableau: CliffordTableau
    dense: np.ndarray

    def __post_init__(self):
        if self.tableau.n_qubits != self.arity:
            raise ValueError("tableau arity mismatch")
        if self.dense.shape != (2 ** self.arity, 2 ** self.arity):
            raise ValueError("dense matrix shape mismatch")
        _check_consistency(self)


def _dense_pauli(p: PauliOperator) -> np.ndarray:
    mats = {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    out = np.eye(1, dtype=complex)
    for j in range(p.n_qubits):
        out = np.kron(mats[p.factor(j)], out)
    return (1j ** p.phase) * out


def _check_consistency(g: GateDefinition) -> None:
    u = g.dense
    if not np.allclose(u @ u.conj().T, np.eye(2 ** g.arity), atol=1e-12):
        raise ValueError(f"gate {g.name}: dense matrix is not unitary")
    for i in range(g.arity):
        for p in (PauliOperator.single(g.arity, i, "X"),
                  PauliOperator.single(g.arity, i, "Z")):
            want = _dense_pauli(clifford_apply(g.tableau, p))
            got = u @ _dense_pauli(p) @ u.conj().T
            if not np.allclose(got, want, atol=1e-12):
                raise ValueError(
                    f"gate {g.name}: tableau and dense action disagree on {p}")


def _gate(name: str, image_x: List[str], image_z: List[str], dense) -> GateDefinition:
    return GateDefinition(
        name=name,
        arity=len(image_x),
        tableau=CliffordTableau.from_image_strings(image_x, image_z),
        dense=np.asarray(dense, dtype=complex),
    )


def _build_registry() -> Dict[str, GateDefinition]:
    # the unitary realizing the conjugation action X -> Y, Z -> X
    t_dense = _SQ2 * np.array([[1, -1j], [1, 1j]])
    gates = [
        _gate("I", ["X"], ["Z"], np.eye(2)),
        _gate("X", ["X"], ["-Z"], [[0, 1], [1, 0]]),
        _gate("Z", ["-X"], ["Z"], [[1, 0], [0, -1]]),
        _gate("Y", ["-X"], ["-Z"], [[0, -1j], [1j, 0]]),
        _gate("X90", ["X"], ["-Y"], _SQ2 * np.array([[1, -1j], [-1j, 1]])),
        _gate("S", ["Y"], ["Z"], [[1, 0], [0, 1j]]),
        _gate("T", ["Y"], ["X"], t_dense),
        _gate("H", ["Z"], ["X"], _SQ2 * np.array([[1, 1], [1, -1]])),
        _gate("CX", ["XX", "IX"], ["ZI", "ZZ"],
              _hi([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])),
        _gate("CZ", ["XZ", "ZX"], ["ZI", "IZ"], np.diag([1, 1, 1, -1])),
        # MS and G are normalized to unitarity; the MS phase convention is the
        # one consistent with its conjugation action (exp(-i pi/4 X⊗X))
        _gate("MS", ["XI", "IX"], ["-YX", "-XY"],
              _SQ2 * np.array([[1, 0, 0, -1j], [0, 1, -1j, 0],
                               [0, -1j, 1, 0], [-1j, 0, 0, 1]])),
        _gate("G", ["YZ", "ZY"], ["ZI", "IZ"], 1j * np.diag([1, 1j, 1j, 1])),
        # rotation-angle variants and inverses (distinct names on purpose)
        _gate("X90m", ["X"], ["Y"], _SQ2 * np.array([[1, 1j], [1j, 1]])),
        _gate("Y90", ["-Z"], ["X"], _SQ2 * np.array([[1, -1], [1, 1]])),
        _gate("Y90m", ["Z"], ["-X"], _SQ2 * np.array([[1, 1], [-1, 1]])),
        _gate("Sdg", ["-Y"], ["Z"], [[1, 0], [0, -1j]]),
        _gate("T2", ["Z"], ["Y"], t_dense @ t_dense),
    ]
    return {g.name: g for g in gates}


_REGISTRY = _build_registry()

# aliases from common notation
_ALIASES = {"Z90": "S", "P": "S", "Z90m": "Sdg", "CNOT": "CX", "Tdg": "T2"}

INVERSE_NAMES = {
    "I": "I", "X": "X", "Y": "Y", "Z": "Z", "H": "H",
    "S": "Sdg", "Sdg": "S", "X90": "X90m", "X90m": "X90",
    "Y90": "Y90m", "Y90m": "Y90", "T": "T2", "T2": "T",
    "CX": "CX", "CZ": "CZ", "MS": None, "G": None,
}


def builtin_gates() -> Dict[str, GateDefinition]:
    """Registry of named standard gates (read-only by convention)."""
    return dict(_REGISTRY)


def get_gate(name: str) -> GateDefinition:
    return _REGISTRY[_ALIASES.get(name, name)]


@dataclass(frozen=True)
class GateSet:
    """A named gate vocabulary with qubit-index patterns and search weights.

    A pattern is "each" (every single qubit), "all-pairs" (every ordered
    pair), or an explicit tuple of index tuples.
    """

    name: str
    gates: Tuple[Tuple[str, Union[str, Tuple[Tuple[int, ...], ...]], float], ...]

    def __post_init__(self):
        for gname, pattern, weight in self.gates:
            get_gate(gname)
            if weight < 0:
                raise ValueError("weights must be non-negative")
            if isinstance(pattern, str) and pattern not in ("each", "all-pairs"):
                raise ValueError(f"unknown pattern {pattern!r}")

    def moves(self, n: int) -> List[Tuple[str, Tuple[int, ...], float]]:
        out = []
        for gname, pattern, weight in self.gates:
            gate = get_gate(gname)
            if pattern == "each":
                idx_sets = [(i,) for i in range(n)]
            elif pattern == "all-pairs":
                idx_sets = [(i, j) for i in range(n) for j in range(n) if i != j]
            else:
                idx_sets = list(pattern)
            for idxs in idx_sets:
                if len(idxs) != gate.arity:
                    raise ValueError(f"{gname} takes {gate.arity} indices")
                if all(i < n for i in idxs):
                    out.append((gname, tuple(idxs), weight))
        return out

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "gates": [
                {"gate": g,
                 "qubits": p if isinstance(p, str) else [list(q) for q in p],
                 "weight": w}
                for g, p, w in self.gates
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GateSet":
        gates = []
        for entry in obj["gates"]:
            pattern = entry["qubits"]
            if not isinstance(pattern, str):
                pattern = tuple(tuple(q) for q in pattern)
            gates.append((entry["gate"], pattern, float(entry.get("weight", 1.0))))
        return cls(obj["name"], tuple(gates))


def standard_gate_set() -> GateSet:
    """One-qubit Cliffords (H/S generators plus rotations) and CX/CZ."""
    return GateSet("standard", (
        ("H", "each", 1.0),
        ("S", "each", 1.0),
        ("Sdg", "each", 1.0),
        ("X90", "each", 1.0),
        ("X90m", "each", 1.0),
        ("CX", "all-pairs", 1.0),
        ("CZ", "all-pairs", 1.0),
    ))


def sequence_tableau(seq: GateSequence) -> CliffordTableau:
    """Compose a gate sequence against the builtin registry."""
    acc = CliffordTableau.identity(seq.n_qubits)
    for name, idxs in seq.gates:
        acc = clifford_compose(
            embed_tableau(get_gate(name).tableau, idxs, seq.n_qubits), acc)
    return acc


def invert_sequence(seq: GateSequence) -> GateSequence:
    """Reverse the sequence, replacing each gate by its named inverse."""
    gates = []
    for name, idxs in reversed(seq.gates):
        inv = INVERSE_NAMES.get(_ALIASES.get(name, name))
        if inv is None:
            raise ValueError(f"gate {name} has no registered named inverse")
        if inv != "I":
            gates.append((inv, idxs))
    return GateSequence(seq.n_qubits, tuple(gates))


def generates_clifford_group(gs: GateSet, n: int, quotient: bool = False) -> bool:
    """True iff the closure of the gate set under composition is all of C_n
    (or its Pauli quotient)."""
    if n > 2:
        raise ValueError("generation check enumerates the group; n <= 2 only")
    target = group_order(n, quotient)
    move_tabs = [embed_tableau(get_gate(g).tableau, idxs, n)
                 for g, idxs, _ in gs.moves(n)]

    def key(t: CliffordTableau) -> int:
        return (t.strip_signs() if quotient else t).encode()

    start = CliffordTableau.identity(n)
    seen = {key(start)}
    frontier = [start]
    while frontier:
        nxt = []
        for t in frontier:
            for m in move_tabs:
                u = clifford_compose(m, t)
                k = key(u)
                if k not in seen:
                    seen.add(k)
                    nxt.append(u)
        if len(seen) == target:
            return True
        frontier = nxt
    return len(seen) == target

"""Clifford decomposition into elementary gates.

Two routes:

* `cayley_search` -- exhaustive Dijkstra over the group's Cayley graph with a
  lexicographic (two-qubit gates, total gates) weight; optimal but only
  feasible for n <= 2 (n = 3 quotient behind an opt-in flag).
* `block_decompose` -- O(n^2)-gate algorithmic decomposition for any n,
  reducing the Bell-pair (Choi) stabilizer matrix of the operator to the
  identity with blocks of one-qubit gates, CZ gates and CX gates.

The Choi matrix has 2n rows over 2n qubits: row i is X_i (x) C(X_i), row
n+i is Z_i (x) C(Z_i); elementary gates act on the right-hand n qubits only.
Quadrants are numbered clockwise from the top-left (1 = top-left block,
2 = top-right, 3 = bottom-right, 4 = bottom-left).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .clifford import (
    CliffordTableau,
    GateSequence,
    clifford_apply,
    clifford_compose,
    embed_tableau,
    group_order,
)
from .gates import INVERSE_NAMES, GateSet, get_gate, sequence_tableau
from .pauli import PauliOperator, pauli_multiply

# one-qubit palette covering the six quotient cosets, all with named inverses
_PALETTE = ("I", "S", "H", "X90", "T", "T2")


def _pair_gate_table() -> Dict[Tuple[str, str], str]:
    """(A, B) -> palette gate g with g(A) = +-X and g(B) = +-Z."""
    table = {}
    letters = {"X": PauliOperator.from_string("X"),
               "Y": PauliOperator.from_string("Y"),
               "Z": PauliOperator.from_string("Z")}
    for name in _PALETTE:
        tab = get_gate(name).tableau
        images = {k: clifford_apply(tab, p).representative()
                  for k, p in letters.items()}
        a = next(k for k, img in images.items() if img == letters["X"])
        b = next(k for k, img in images.items() if img == letters["Z"])
        table[(a, b)] = name
    assert len(table) == 6
    return table


_PAIR_GATE = _pair_gate_table()


class CoverageError(RuntimeError):
    """Gate set failed to generate the whole group."""


@dataclass(frozen=True)
class DecompositionTable:
    gate_set_name: str
    n_qubits: int
    quotient: bool
    entries: Dict[int, Tuple[GateSequence, Tuple[int, int]]]

    def lookup(self, c: CliffordTableau) -> Tuple[GateSequence, Tuple[int, int]]:
        key = (c.strip_signs() if self.quotient else c).encode()
        return self.entries[key]

    def cost_histogram(self) -> Dict[int, int]:
        """Primary-gate count -> number of group elements."""
        hist: Dict[int, int] = {}
        for _, (prim, _tot) in self.entries.values():
            hist[prim] = hist.get(prim, 0) + 1
        return hist


def cayley_search(gs: GateSet, n: int, quotient: bool = False,
                  primary_gates: Tuple[str, ...] = ("CX",)) -> DecompositionTable:
    """Dijkstra over the Cayley graph; first settlement is optimal under the
    lexicographic (primary-gate count, total gates) weight."""
    moves = []
    for name, idxs, _w in gs.moves(n):
        tab = embed_tableau(get_gate(name).tableau, idxs, n)
        if quotient:
            tab = tab.strip_signs()
        moves.append((name, idxs, tab, 1 if name in primary_gates else 0))
    if quotient:
        entries = _quotient_cayley_search(moves, n)
    else:
        start = CliffordTableau.identity(n)
        start_key = start.encode()
        best: Dict[int, Tuple[int, int]] = {start_key: (0, 0)}
        entries = {}
        counter = 0
        heap = [(0, 0, counter, start, ())]
        while heap:
            prim, tot, _, tab, seq = heapq.heappop(heap)
            key = tab.encode()
            if key in entries:
                continue
            entries[key] = (GateSequence(n, seq), (prim, tot))
            for name, idxs, gtab, gprim in moves:
                new = clifford_compose(gtab, tab)
                nkey = new.encode()
                cost = (prim + gprim, tot + 1)
                if nkey not in entries and cost < best.get(nkey, (1 << 60, 0)):
                    best[nkey] = cost
                    counter += 1
                    heapq.heappush(
                        heap, (*cost, counter, new, seq + ((name, idxs),)))
    expected = group_order(n) // (4 ** n if quotient else 1)
    if len(entries) != expected:
        raise CoverageError(
            f"gate set {gs.name!r} reached {len(entries)} of {expected} elements")
    return DecompositionTable(gs.name, n, quotient, entries)


def _quotient_cayley_search(moves, n: int):
    """Sign-free Dijkstra: composing a fixed gate on the left is GF(2)-linear,
    so each move reduces to a per-row XOR table lookup on the packed vecs."""
    two_n = 2 * n
    size = 1 << two_n
    fast = []
    for name, idxs, gtab, gprim in moves:
        # xt[mask] = XOR of gtab rows selected by the bits of mask, i.e. the
        # image row of any tableau whose corresponding row equals mask
        xt = [0] * size
        for m in range(1, size):
            low = m & -m
            xt[m] = xt[m ^ low] ^ gtab.vecs[low.bit_length() - 1]
        fast.append((name, idxs, xt, gprim))
    start = tuple(1 << i for i in range(two_n))
    best: Dict[Tuple[int, ...], Tuple[int, int]] = {start: (0, 0)}
    settled: Dict[Tuple[int, ...], Tuple[Tuple, Tuple[int, int]]] = {}
    counter = 0
    heap = [(0, 0, counter, start, ())]
    while heap:
        prim, tot, _, vecs, seq = heapq.heappop(heap)
        if vecs in settled:
            continue
        settled[vecs] = (seq, (prim, tot))
        for name, idxs, xt, gprim in fast:
            new = tuple(xt[v] for v in vecs)
            cost = (prim + gprim, tot + 1)
            if new not in settled and cost < best.get(new, (1 << 60, 0)):
                best[new] = cost
                counter += 1
                heapq.heappush(heap, (*cost, counter, new,
                                      seq + ((name, idxs),)))
    entries: Dict[int, Tuple[GateSequence, Tuple[int, int]]] = {}
    for vecs, (seq, cost) in settled.items():
        key = 0
        shift = two_n
        for v in vecs:
            key |= v << shift
            shift += two_n
        entries[key] = (GateSequence(n, seq), cost)
    return entries


# -- algorithmic block decomposition -------------------------------------------


class _ChoiMatrix:
    """Mutable 2n-row stabilizer matrix of the Choi state of a Clifford."""

    def __init__(self, c: CliffordTableau):
        n = c.n_qubits
        self.n = n
        self.rows: List[PauliOperator] = []
        imgs = c.images()
        for i in range(2 * n):
            left = PauliOperator.single(n, i % n, "X" if i < n else "Z")
            right = imgs[i].with_phase(0)
            self.rows.append(PauliOperator(
                2 * n,
                left.x_mask | (right.x_mask << n),
                left.z_mask | (right.z_mask << n),
                2 * ((c.signs >> i) & 1)))

    def entry(self, r: int, col: int) -> str:
        """Factor of row r at right-half column col (0-based)."""
        return self.rows[r].factor(self.n + col)

    def mul_rows(self, dst: int, src: int) -> None:
        self.rows[dst] = pauli_multiply(self.rows[dst], self.rows[src])

    def swap_rows(self, a: int, b: int) -> None:
        self.rows[a], self.rows[b] = self.rows[b], self.rows[a]

    def apply(self, name: str, idxs: Tuple[int, ...]) -> None:
        tab = embed_tableau(get_gate(name).tableau,
                            tuple(self.n + i for i in idxs), 2 * self.n)
        self.rows = [clifford_apply(tab, r) for r in self.rows]


_ANTI = {"X": ("Y", "Z"), "Y": ("X", "Z"), "Z": ("X", "Y")}


def block_decompose(c: CliffordTableau, fix_signs: bool = True) -> GateSequence:
    """Decompose into blocks of 1q / CZ / CX / 1q / CZ / (1q) gates.

    The returned sequence composes exactly to c when fix_signs is true, and
    to a Pauli-equivalent operator otherwise.
    """
    n = c.n_qubits
    m = _ChoiMatrix(c)
    gates: List[Tuple[str, Tuple[int, ...]]] = []

    def emit(name: str, *idxs: int) -> None:
        gates.append((name, idxs))
        m.apply(name, idxs)

    def bell_form() -> bool:
        return all(m.entry(r, col) == ("I" if col != r % n else
                                       ("X" if r < n else "Z"))
                   for r in range(2 * n) for col in range(n))

    if not bell_form():  # identity coset needs at most the sign fix
        _reduce_to_bell(m, n, emit)
    # 8. optional Pauli sign fix
    if fix_signs:
        for k in range(n):
            if m.rows[k].sign_bit:
                emit("Z", k)
            if m.rows[n + k].sign_bit:
                emit("X", k)

    # the collected gates reduce C to the identity; C is their inverse chain
    out = []
    for name, idxs in reversed(gates):
        inv = INVERSE_NAMES[name]
        if inv != "I":
            out.append((inv, idxs))
    return GateSequence(n, tuple(out))


def _reduce_to_bell(m: "_ChoiMatrix", n: int, emit) -> None:
    # 1. GSSF on quadrant 3 by row operations among the bottom rows
    _sub_gssf(m, row0=n)

    # 2. one-qubit gates: quadrant-3 diagonal -> X, neighbor -> Z
    for k in range(n):
        diag = m.entry(n + k, k)
        nb = next((m.entry(n + r, k) for r in range(n)
                   if r != k and m.entry(n + r, k) != "I"), None)
        if nb is None:
            nb = next(x for x in ("Z", "X", "Y") if x in _ANTI[diag])
        name = _PAIR_GATE[(diag, nb)]
        if name != "I":
            emit(name, k)

    # 3. CZ gates clear quadrant-3 off-diagonal Z entries
    for k in range(n):
        for l in range(k + 1, n):
            if m.entry(n + k, l) == "Z":
                emit("CZ", k, l)

    # 4. row operations diagonalize quadrant 4 (left halves, I/Z entries)
    for k in range(n):
        pivot = next(r for r in range(k, n)
                     if (m.rows[n + r].z_mask >> k) & 1)
        m.swap_rows(n + k, n + pivot)
        for r in range(n):
            if r != k and (m.rows[n + r].z_mask >> k) & 1:
                m.mul_rows(n + r, n + k)

    # 5. CX gates diagonalize quadrant 3 (I/X entries, full rank)
    for k in range(n):
        if m.entry(n + k, k) != "X":
            l = next(j for j in range(k + 1, n) if m.entry(n + k, j) == "X")
            for pair in ((k, l), (l, k), (k, l)):  # SWAP as three CX
                emit("CX", *pair)
        for l in range(n):
            if l != k and m.entry(n + k, l) == "X":
                emit("CX", k, l)

    # 6. one-qubit gates: quadrant-3 diagonal X -> Z, quadrant-2 diagonal -> X
    for k in range(n):
        top = m.entry(k, k)  # anticommutes with the X below it
        name = _PAIR_GATE[(top, "X")]
        if name != "I":
            emit(name, k)

    # 7. CZ gates clear quadrant-2 off-diagonal Z entries
    for k in range(n):
        for l in range(k + 1, n):
            if m.entry(k, l) == "Z":
                emit("CZ", k, l)


def _sub_gssf(m: _ChoiMatrix, row0: int) -> None:
    """GSSF reduction of the right-half block of rows row0..row0+n-1 using
    row swaps and row products only."""
    n = m.n
    fixed: Set[int] = set()
    while len(fixed) < n:
        r = next(i for i in range(n) if i not in fixed)
        d = next((col for col in range(n)
                  if col not in fixed and m.entry(row0 + r, col) != "I"), None)
        if d is None:
            raise ValueError("rows are not independent")
        m.swap_rows(row0 + r, row0 + d)
        diag = m.entry(row0 + d, d)
        nb = next((m.entry(row0 + a, d) for a in range(n)
                   if a != d and m.entry(row0 + a, d) != "I"
                   and m.entry(row0 + a, d) in _ANTI[diag]), None)
        if nb is None:
            nb = next(x for x in ("Z", "X", "Y") if x in _ANTI[diag])
        for a in range(n):
            if a != d:
                e = m.entry(row0 + a, d)
                if e != "I" and e != nb:
                    m.mul_rows(row0 + a, row0 + d)
        fixed.add(d)


# -- gate-set translation --------------------------------------------------------

# alternative expansions, applied first-gate-first; index patterns refer to
# the source gate's operands
_REWRITE_RULES: Dict[str, List[Tuple[Tuple[str, Tuple[int, ...]], ...]]] = {
    "CZ": [(("H", (1,)), ("CX", (0, 1)), ("H", (1,)))],
    "CX": [
        (("H", (1,)), ("CZ", (0, 1)), ("H", (1,))),
        (("H", (1,)), ("G", (0, 1)), ("Sdg", (0,)), ("Sdg", (1,)), ("H", (1,))),
    ],
    "SWAP": [(("CX", (0, 1)), ("CX", (1, 0)), ("CX", (0, 1)))],
}


class UnsupportedGateError(ValueError):
    pass


def translate_sequence(seq: GateSequence, target: GateSet) -> GateSequence:
    """Rewrite a sequence over the target set's gates using registered rules."""
    allowed = {name for name, _, _ in target.gates}
    out: List[Tuple[str, Tuple[int, ...]]] = []
    for name, idxs in seq.gates:
        out.extend(_translate_gate(name, idxs, allowed, frozenset()))
    return GateSequence(seq.n_qubits, tuple(out))


def _translate_gate(name: str, idxs: Tuple[int, ...], allowed: Set[str],
                    seen: frozenset) -> List[Tuple[str, Tuple[int, ...]]]:
    if name in allowed:
        return [(name, idxs)]
    if name in seen:
        raise UnsupportedGateError(f"no rewrite path for gate {name!r}")
    for rule in _REWRITE_RULES.get(name, []):
        try:
            out = []
            for gname, pattern in rule:
                mapped = tuple(idxs[i] for i in pattern)
                out.extend(_translate_gate(gname, mapped, allowed, seen | {name}))
            return out
        except UnsupportedGateError:
            continue
    raise UnsupportedGateError(f"no rewrite path for gate {name!r}")

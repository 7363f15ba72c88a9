"""Clifford operators as symplectic tableaux.

A tableau stores the conjugation images C(X_i) and C(Z_i) as sign-bit Paulis
(the signed right half of the Choi-state stabilizer matrix).  Images are kept
as packed 2n-bit GF(2) vectors ``x_mask | (z_mask << n)`` plus one sign bit
each; phases beyond the sign never survive because tableaux act on the Pauli
group modulo scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .pauli import (
    PauliDimensionError,
    PauliOperator,
    pauli_commutes,
    pauli_multiply,
    pauli_support,
)


# ---------------------------------------------------------------------------
# packed symplectic vectors


def _pack(p: PauliOperator) -> int:
    return p.x_mask | (p.z_mask << p.n_qubits)


def _unpack(vec: int, n: int, sign: int = 0) -> PauliOperator:
    mask = (1 << n) - 1
    return PauliOperator(n, vec & mask, (vec >> n) & mask, 2 * (sign & 1))


def _symplectic(u: int, v: int, n: int) -> int:
    """Symplectic product of two packed vectors: 0 commute, 1 anticommute."""
    mask = (1 << n) - 1
    w = ((v & mask) << n) | ((v >> n) & mask)
    return (u & w).bit_count() & 1


@dataclass(frozen=True)
class CliffordTableau:
    """Images of X_0..X_{n-1}, Z_0..Z_{n-1} under conjugation.

    `vecs[i]` (i < n) is the packed image of X_i, `vecs[n+i]` of Z_i; bit i of
    `signs` is 1 when the image carries a minus sign.
    """

    n_qubits: int
    vecs: Tuple[int, ...]
    signs: int = 0

    def __post_init__(self):
        if len(self.vecs) != 2 * self.n_qubits:
            raise ValueError("tableau needs 2n images")

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(n, tuple(1 << i for i in range(2 * n)), 0)

    @classmethod
    def from_images(
        cls,
        image_x: Sequence[PauliOperator],
        image_z: Sequence[PauliOperator],
        validate: bool = True,
    ) -> "CliffordTableau":
        n = image_x[0].n_qubits
        if len(image_x) != n or len(image_z) != n:
            raise ValueError("need n X-images and n Z-images")
        vecs = []
        signs = 0
        for i, p in enumerate(list(image_x) + list(image_z)):
            if p.n_qubits != n:
                raise PauliDimensionError("image size mismatch")
            vecs.append(_pack(p))
            signs |= p.sign_bit << i
        t = cls(n, tuple(vecs), signs)
        if validate:
            t.validate()
        return t

    @classmethod
    def from_image_strings(cls, image_x: Sequence[str], image_z: Sequence[str]) -> "CliffordTableau":
        return cls.from_images(
            [PauliOperator.from_string(s) for s in image_x],
            [PauliOperator.from_string(s) for s in image_z],
        )

    # -- accessors ---------------------------------------------------------

    def image_x(self, i: int) -> PauliOperator:
        return _unpack(self.vecs[i], self.n_qubits, (self.signs >> i) & 1)

    def image_z(self, i: int) -> PauliOperator:
        j = self.n_qubits + i
        return _unpack(self.vecs[j], self.n_qubits, (self.signs >> j) & 1)

    def images(self) -> List[PauliOperator]:
        return [
            _unpack(v, self.n_qubits, (self.signs >> i) & 1)
            for i, v in enumerate(self.vecs)
        ]

    def validate(self) -> None:
        """Check the symplectic commutation pattern (which implies full rank)."""
        n = self.n_qubits
        for i in range(2 * n):
            for j in range(i + 1, 2 * n):
                want = 1 if j == i + n else 0
                if _symplectic(self.vecs[i], self.vecs[j], n) != want:
                    raise ValueError(
                        f"images {i} and {j} violate the commutation pattern")

    def encode(self) -> int:
        """Canonical 4n²+2n-bit encoding (images then sign list)."""
        n = self.n_qubits
        out = self.signs
        shift = 2 * n
        for v in self.vecs:
            out |= v << shift
            shift += 2 * n
        return out

    def strip_signs(self) -> "CliffordTableau":
        """Pauli-coset representative (all signs +)."""
        return CliffordTableau(self.n_qubits, self.vecs, 0) if self.signs else self

    def is_identity(self) -> bool:
        return self.signs == 0 and all(
            v == 1 << i for i, v in enumerate(self.vecs))

    def __str__(self) -> str:
        n = self.n_qubits
        lines = [f"X_{i} -> {self.image_x(i)}" for i in range(n)]
        lines += [f"Z_{i} -> {self.image_z(i)}" for i in range(n)]
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "image_x": [str(self.image_x(i)) for i in range(self.n_qubits)],
            "image_z": [str(self.image_z(i)) for i in range(self.n_qubits)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CliffordTableau":
        return cls.from_image_strings(obj["image_x"], obj["image_z"])


@dataclass(frozen=True)
class GateSequence:
    """An ordered list of (gate name, qubit indices) on n_qubits qubits."""

    n_qubits: int
    gates: Tuple[Tuple[str, Tuple[int, ...]], ...]

    def __post_init__(self):
        for name, idxs in self.gates:
            if len(set(idxs)) != len(idxs):
                raise ValueError(f"repeated index in gate {name}{idxs}")
            if any(i < 0 or i >= self.n_qubits for i in idxs):
                raise ValueError(f"index out of range in gate {name}{idxs}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "gates": [[name, list(idxs)] for name, idxs in self.gates],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GateSequence":
        return cls(obj["n_qubits"],
                   tuple((g, tuple(q)) for g, q in obj["gates"]))


# ---------------------------------------------------------------------------
# group operations


def clifford_apply(c: CliffordTableau, p: PauliOperator) -> PauliOperator:
    """Conjugation image ±P' of p under c (exact sign, global phase fixed by
    the Y = i·X·Z convention)."""
    if c.n_qubits != p.n_qubits:
        raise PauliDimensionError("tableau / operator size mismatch")
    n = c.n_qubits
    # p = i^{phase + #Y} * prod_j X_j^{x_j} Z_j^{z_j}; substitute the images.
    acc = PauliOperator(n, 0, 0,
                        (p.phase + (p.x_mask & p.z_mask).bit_count()) % 4)
    xm, zm = p.x_mask, p.z_mask
    j = 0
    while xm or zm:
        if xm & 1:
            acc = pauli_multiply(acc, c.image_x(j))
        if zm & 1:
            acc = pauli_multiply(acc, c.image_z(j))
        xm >>= 1
        zm >>= 1
        j += 1
    if acc.phase % 2:
        raise ValueError("invalid tableau: image has imaginary phase")
    return acc


def clifford_compose(c: CliffordTableau, d: CliffordTableau) -> CliffordTableau:
    """Tableau of C∘D (apply d first)."""
    if c.n_qubits != d.n_qubits:
        raise PauliDimensionError("tableau size mismatch")
    n = c.n_qubits
    vecs = []
    signs = 0
    for i in range(2 * n):
        sign = (d.signs >> i) & 1
        img = clifford_apply(c, _unpack(d.vecs[i], n, sign))
        vecs.append(_pack(img))
        signs |= img.sign_bit << i
    return CliffordTableau(n, tuple(vecs), signs)


def _gf2_invert(rows: List[int], nbits: int) -> List[int]:
    """Invert an nbits×nbits GF(2) matrix given as row bit-vectors."""
    a = list(rows)
    inv = [1 << i for i in range(nbits)]
    for col in range(nbits):
        piv = next(r for r in range(col, nbits) if (a[r] >> col) & 1)
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        for r in range(nbits):
            if r != col and (a[r] >> col) & 1:
                a[r] ^= a[col]
                inv[r] ^= inv[col]
    return inv


def clifford_inverse(c: CliffordTableau) -> CliffordTableau:
    """Inverse tableau via GF(2) symplectic inversion plus sign fix, O(n³)."""
    n = c.n_qubits
    inv_rows = _gf2_invert(list(c.vecs), 2 * n)
    vecs = []
    signs = 0
    for i in range(2 * n):
        q = _unpack(inv_rows[i], n)
        # c(q) = ±(X_i or Z_i); absorbing that sign makes c(image_i) exact.
        signs |= clifford_apply(c, q).sign_bit << i
        vecs.append(inv_rows[i])
    return CliffordTableau(n, tuple(vecs), signs)


def pauli_tableau(p: PauliOperator) -> CliffordTableau:
    """Clifford tableau of conjugation by the Pauli p (a pure sign pattern)."""
    n = p.n_qubits
    xs, zs = [], []
    for j in range(n):
        for kind, store in (("X", xs), ("Z", zs)):
            gen = PauliOperator.single(n, j, kind)
            store.append(gen if pauli_commutes(p, gen) else gen.with_phase(2))
    return CliffordTableau.from_images(xs, zs)


def group_order(n: int, quotient: bool = False) -> int:
    """|C_n| = 2^{n²+2n} ∏_{k=1..n} (4^{n−k+1} − 1); quotient divides by 4ⁿ."""
    if n < 1:
        raise ValueError("n must be positive")
    order = 2 ** (n * n + 2 * n)
    for k in range(1, n + 1):
        order *= 4 ** (n - k + 1) - 1
    return order // 4 ** n if quotient else order


def sample_choice_counts(n: int) -> List[Tuple[int, int]]:
    """Per-step (X-image, Z-image) choice-set sizes of the uniform sampler;
    their product is exactly group_order(n)."""
    return [(2 * (4 ** (n - k + 1) - 1), 4 * 4 ** (n - k)) for k in range(1, n + 1)]


# ---------------------------------------------------------------------------
# GF(2) linear solving for sampling / enumeration


def _solve_affine(constraints: List[Tuple[int, int]], nbits: int) -> Tuple[int, List[int]]:
    """Solve parity(w & v) = b for all (w, b); return (particular, null basis)."""
    pivots: List[Tuple[int, int, int]] = []  # (col, w, b)
    for w, b in constraints:
        for col, pw, pb in pivots:
            if (w >> col) & 1:
                w ^= pw
                b ^= pb
        if w == 0:
            if b:
                raise ValueError("inconsistent linear system")
            continue
        col = w.bit_length() - 1
        pivots = [(c, pw ^ (w if (pw >> col) & 1 else 0),
                   pb ^ (b if (pw >> col) & 1 else 0)) for c, pw, pb in pivots]
        pivots.append((col, w, b))
    pivot_cols = {c for c, _, _ in pivots}
    particular = 0
    for c, _, b in pivots:
        if b:
            particular |= 1 << c
    basis = []
    for f in range(nbits):
        if f in pivot_cols:
            continue
        v = 1 << f
        for c, w, _ in pivots:
            if (w >> f) & 1:
                v |= 1 << c
        basis.append(v)
    return particular, basis


def _flip(v: int, n: int) -> int:
    """Swap the x/z halves of a packed vector (constraint form of ⟨v,·⟩)."""
    mask = (1 << n) - 1
    return ((v & mask) << n) | ((v >> n) & mask)


def _rand_bits(rng, nbits: int) -> int:
    """Uniform nbits-bit integer from the generator (any width)."""
    out = 0
    shift = 0
    while shift < nbits:
        take = min(32, nbits - shift)
        out |= (int(rng.integers(0, 1 << take)) << shift)
        shift += take
    return out


def _xor_combo(basis: List[int], index: int) -> int:
    v = 0
    b = 0
    while index:
        if index & 1:
            v ^= basis[b]
        index >>= 1
        b += 1
    return v


def sample_uniform(n: int, rng) -> CliffordTableau:
    """Exactly uniform Clifford tableau, O(n³).

    Step k picks C(X_k) uniformly from the 2(4^{n−k}−1) signed Paulis
    commuting with all earlier images (k counted from 0), then C(Z_k)
    uniformly from the 4·4^{n−k−1} signed Paulis that additionally
    anticommute with C(X_k); the per-step choice-set sizes multiply to the
    exact group order, so the result is uniform.
    """
    xi: List[int] = []
    zi: List[int] = []
    for k in range(n):
        constraints = [(_flip(v, n), 0) for pair in zip(xi, zi) for v in pair]
        _, basis = _solve_affine(constraints, 2 * n)
        while True:
            vx = _xor_combo(basis, _rand_bits(rng, len(basis)))
            if vx:
                break
        part, basis_z = _solve_affine(constraints + [(_flip(vx, n), 1)], 2 * n)
        vz = part ^ _xor_combo(basis_z, _rand_bits(rng, len(basis_z)))
        xi.append(vx)
        zi.append(vz)
    signs = _rand_bits(rng, 2 * n)
    return CliffordTableau(n, tuple(xi + zi), signs)


def enumerate_group(n: int, quotient: bool = False) -> List[CliffordTableau]:
    """Complete deduplicated list of C_n (or its Pauli quotient).

    Enumerates the per-step symplectic image choices directly (the same
    choice sets the uniform sampler draws from), which is far faster than
    generator closure at the largest supported size.
    """
    if (quotient and n > 3) or (not quotient and n > 2):
        raise ValueError(f"group too large to enumerate (n={n}, quotient={quotient})")
    out: List[CliffordTableau] = []
    sign_patterns = [0] if quotient else list(range(1 << (2 * n)))
    xi: List[int] = []
    zi: List[int] = []

    def rec(k: int) -> None:
        if k == n:
            vecs = tuple(xi + zi)
            for s in sign_patterns:
                out.append(CliffordTableau(n, vecs, s))
            return
        constraints = [(_flip(v, n), 0) for pair in zip(xi, zi) for v in pair]
        _, basis = _solve_affine(constraints, 2 * n)
        vx = 0
        for i in range(1, 1 << len(basis)):
            vx ^= basis[(i & -i).bit_length() - 1]  # Gray-code walk
            part, basis_z = _solve_affine(constraints + [(_flip(vx, n), 1)], 2 * n)
            vz = part
            xi.append(vx)
            zi.append(vz)
            rec(k + 1)
            for j in range(1, 1 << len(basis_z)):
                vz ^= basis_z[(j & -j).bit_length() - 1]
                zi[-1] = vz
                rec(k + 1)
            xi.pop()
            zi.pop()

    rec(0)
    assert len(out) == group_order(n, quotient)
    return out


# ---------------------------------------------------------------------------
# primitive gates for the mapping construction (the full library lives in
# gates.py; these are the few tableaux the algorithms below need directly)


def _prim(image_x: List[str], image_z: List[str]) -> CliffordTableau:
    return CliffordTableau.from_image_strings(image_x, image_z)


PRIMITIVE_TABLEAUX = {
    "I": _prim(["X"], ["Z"]),
    "X": _prim(["X"], ["-Z"]),
    "Y": _prim(["-X"], ["-Z"]),
    "Z": _prim(["-X"], ["Z"]),
    "H": _prim(["Z"], ["X"]),
    "S": _prim(["Y"], ["Z"]),
    "Sdg": _prim(["-Y"], ["Z"]),
    "X90": _prim(["X"], ["-Y"]),
    "X90m": _prim(["X"], ["Y"]),
    "CX": _prim(["XX", "IX"], ["ZI", "ZZ"]),
    "CZ": _prim(["XZ", "ZX"], ["ZI", "IZ"]),
}


def embed_tableau(t: CliffordTableau, positions: Sequence[int], n: int) -> CliffordTableau:
    """Embed a small tableau at the given qubit positions of an n-qubit system."""
    ident = CliffordTableau.identity(n)
    vecs = list(ident.vecs)
    signs = 0
    m = t.n_qubits
    for i in range(2 * m):
        v = t.vecs[i]
        big = 0
        for j, pos in enumerate(positions):
            big |= ((v >> j) & 1) << pos
            big |= ((v >> (m + j)) & 1) << (n + pos)
        slot = positions[i % m] + (0 if i < m else n)
        vecs[slot] = big
        signs |= ((t.signs >> i) & 1) << slot
    return CliffordTableau(n, tuple(vecs), signs)


def apply_named_gate(p: PauliOperator, name: str, positions: Sequence[int]) -> PauliOperator:
    return clifford_apply(
        embed_tableau(PRIMITIVE_TABLEAUX[name], positions, p.n_qubits), p)


def sequence_to_tableau(seq: GateSequence, registry=None) -> CliffordTableau:
    """Compose a gate sequence (later gates applied after earlier ones)."""
    registry = registry or PRIMITIVE_TABLEAUX
    acc = CliffordTableau.identity(seq.n_qubits)
    for name, idxs in seq.gates:
        gate = registry[name]
        t = gate if isinstance(gate, CliffordTableau) else gate.tableau
        acc = clifford_compose(embed_tableau(t, idxs, seq.n_qubits), acc)
    return acc


# single-qubit gate mapping factor σ to ±τ (unsigned coset choices)
_ONE_QUBIT_MAP = {
    ("X", "X"): "I", ("Y", "Y"): "I", ("Z", "Z"): "I",
    ("X", "Y"): "S", ("Y", "X"): "Sdg",
    ("X", "Z"): "H", ("Z", "X"): "H",
    ("Y", "Z"): "X90", ("Z", "Y"): "X90",
}


def find_mapping(p: PauliOperator, q: PauliOperator) -> GateSequence:
    """O(n)-gate sequence whose composed tableau maps p to ±q.

    Construction: align first supports with a SWAP (emitted as 3 CX), rotate
    p's factors to X at the anchor and Z elsewhere, fix the support
    difference with CZ gates from the anchor, then rotate every factor to
    match q.
    """
    if p.is_identity() or q.is_identity():
        raise ValueError("mapping endpoints must be non-identity")
    if p.n_qubits != q.n_qubits:
        raise PauliDimensionError("operand size mismatch")
    n = p.n_qubits
    if p.representative() == q.representative():
        return GateSequence(n, ())
    gates: List[Tuple[str, Tuple[int, ...]]] = []
    cur = p.representative()

    def emit(name: str, idxs: Tuple[int, ...]) -> None:
        nonlocal cur
        if name == "I":
            return
        gates.append((name, idxs))
        cur = apply_named_gate(cur, name, idxs)

    l = min(pauli_support(cur))
    m = min(pauli_support(q))
    if l != m:
        emit("CX", (l, m))
        emit("CX", (m, l))
        emit("CX", (l, m))
    emit(_ONE_QUBIT_MAP[(cur.factor(m), "X")], (m,))
    for a in sorted(pauli_support(cur)):
        if a != m:
            emit(_ONE_QUBIT_MAP[(cur.factor(a), "Z")], (a,))
    for a in sorted(pauli_support(cur) ^ pauli_support(q)):
        emit("CZ", (m, a))
    for a in sorted(pauli_support(q)):
        emit(_ONE_QUBIT_MAP[(cur.factor(a), q.factor(a))], (a,))
    assert cur.representative() == q.representative(), "mapping construction failed"
    return GateSequence(n, tuple(gates))

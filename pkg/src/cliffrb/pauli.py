"""Exact n-qubit Pauli algebra over GF(2) bit masks with phase tracking.

A Pauli operator is stored as a pair of bit masks (x_mask, z_mask) plus a
phase exponent zeta, meaning ``i**zeta * (tensor of single-qubit factors)``
where the factor on qubit j is I, X, Z or Y according to the (x, z) bits
(1,1) -> Y.  The fixed convention ``Y = i * X * Z`` resolves all phases, so
products agree exactly (including phase) with dense matrix multiplication.

Masks are plain Python integers, i.e. arbitrarily many qubits packed 64 per
machine word under the hood.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Set


_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}
_PHASE_PREFIX = {0: "+", 1: "i", 2: "-", 3: "-i"}
_PREFIX_PHASE = {"+": 0, "": 0, "i": 1, "-": 2, "-i": 3}


class PauliDimensionError(ValueError):
    """Raised when operands act on different numbers of qubits."""


@dataclass(frozen=True)
class PauliOperator:
    """An n-qubit Pauli operator ``i**phase * P``."""

    n_qubits: int
    x_mask: int
    z_mask: int
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        mask = (1 << self.n_qubits) - 1
        if (self.x_mask & ~mask) or (self.z_mask & ~mask):
            raise ValueError("mask bits beyond n_qubits must be zero")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliOperator":
        return cls(n_qubits, 0, 0, 0)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, kind: str, phase: int = 0) -> "PauliOperator":
        """One non-identity factor `kind` in {X,Y,Z} at `qubit`, identity elsewhere."""
        x, z = _CHAR_TO_BITS[kind]
        return cls(n_qubits, x << qubit, z << qubit, phase)

    @classmethod
    def from_string(cls, text: str) -> "PauliOperator":
        """Parse the textual format: optional +/-/i/-i prefix, then {I,X,Y,Z}
        characters little-endian by qubit index (first char is qubit 0)."""
        s = text.strip()
        prefix = ""
        for cand in ("-i", "+", "-", "i"):
            if s.startswith(cand):
                prefix = cand
                s = s[len(cand):]
                break
        if not s or any(c not in _CHAR_TO_BITS for c in s):
            raise ValueError(f"bad pauli string: {text!r}")
        x = z = 0
        for j, c in enumerate(s):
            xb, zb = _CHAR_TO_BITS[c]
            x |= xb << j
            z |= zb << j
        return cls(len(s), x, z, _PREFIX_PHASE[prefix])

    # -- queries -----------------------------------------------------------

    def factor(self, qubit: int) -> str:
        return _BITS_TO_CHAR[((self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1)]

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def representative(self) -> "PauliOperator":
        """Phase-0 canonical group representative."""
        if self.phase == 0:
            return self
        return PauliOperator(self.n_qubits, self.x_mask, self.z_mask, 0)

    def with_phase(self, phase: int) -> "PauliOperator":
        return PauliOperator(self.n_qubits, self.x_mask, self.z_mask, phase)

    @property
    def sign_bit(self) -> int:
        """0 for +P, 1 for -P; phase must be real."""
        if self.phase % 2:
            raise ValueError("operator has imaginary phase")
        return self.phase // 2

    def __str__(self) -> str:
        body = "".join(self.factor(j) for j in range(self.n_qubits))
        return _PHASE_PREFIX[self.phase] + body

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return pauli_multiply(self, other)


def _check_dims(p: PauliOperator, q: PauliOperator) -> None:
    if p.n_qubits != q.n_qubits:
        raise PauliDimensionError(
            f"operand sizes differ: {p.n_qubits} vs {q.n_qubits}")


def _popcount(v: int) -> int:
    return v.bit_count()


def pauli_multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Exact matrix product p·q with phase mod 4."""
    _check_dims(p, q)
    x = p.x_mask ^ q.x_mask
    z = p.z_mask ^ q.z_mask
    # Convert each factor to X^x Z^z form (Y contributes i), commute q's X
    # part through p's Z part (each crossing contributes -1), convert back.
    phase = (
        p.phase
        + q.phase
        + _popcount(p.x_mask & p.z_mask)
        + _popcount(q.x_mask & q.z_mask)
        + 2 * _popcount(p.z_mask & q.x_mask)
        - _popcount(x & z)
    )
    return PauliOperator(p.n_qubits, x, z, phase % 4)


def pauli_commutes(p: PauliOperator, q: PauliOperator) -> bool:
    """True iff the symplectic form x_p·z_q + z_p·x_q vanishes mod 2."""
    _check_dims(p, q)
    return (_popcount(p.x_mask & q.z_mask) + _popcount(p.z_mask & q.x_mask)) % 2 == 0


def pauli_support(p: PauliOperator) -> Set[int]:
    """Indices of non-identity tensor factors."""
    m = p.x_mask | p.z_mask
    out = set()
    j = 0
    while m:
        if m & 1:
            out.add(j)
        m >>= 1
        j += 1
    return out


def enumerate_paulis(n_qubits: int, include_identity: bool = True) -> Iterable[PauliOperator]:
    """All 4**n phase-0 representatives in (x, z) lexicographic order."""
    for x in range(1 << n_qubits):
        for z in range(1 << n_qubits):
            if not include_identity and x == 0 and z == 0:
                continue
            yield PauliOperator(n_qubits, x, z, 0)


@dataclass(frozen=True)
class PauliChannel:
    """Stochastic Pauli channel: probability weights over phase-0 Paulis."""

    n_qubits: int
    weights: Mapping[PauliOperator, float] = field(default_factory=dict)

    def __post_init__(self):
        total = 0.0
        for op, w in self.weights.items():
            if op.phase != 0:
                raise ValueError("channel keys must be phase-0 representatives")
            if op.n_qubits != self.n_qubits:
                raise PauliDimensionError("channel key size mismatch")
            if not (0.0 <= w <= 1.0 + 1e-12):
                raise ValueError(f"weight out of range: {w}")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "weights", dict(self.weights))

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliChannel":
        return cls(n_qubits, {PauliOperator.identity(n_qubits): 1.0})

    @classmethod
    def depolarizing(cls, n_qubits: int, p: float) -> "PauliChannel":
        """Depolarizing channel of strength p as a uniform Pauli channel:
        identity weight 1 - p(4^n - 1)/4^n, each non-identity weight p/4^n."""
        d4 = 4 ** n_qubits
        w: Dict[PauliOperator, float] = {}
        for op in enumerate_paulis(n_qubits):
            w[op] = 1.0 - p * (d4 - 1) / d4 if op.is_identity() else p / d4
        return cls(n_qubits, w)

    @classmethod
    def pauli_error(cls, op: PauliOperator, p: float) -> "PauliChannel":
        """Apply `op` with probability p, identity otherwise."""
        rep = op.representative()
        ident = PauliOperator.identity(op.n_qubits)
        if rep.is_identity():
            return cls(op.n_qubits, {ident: 1.0})
        return cls(op.n_qubits, {ident: 1.0 - p, rep: p})

    def scaled(self, factor: float) -> "PauliChannel":
        """Multiply every non-identity weight by `factor` (time ramping)."""
        w: Dict[PauliOperator, float] = {}
        ident = PauliOperator.identity(self.n_qubits)
        non_ident = 0.0
        for op, p in self.weights.items():
            if not op.is_identity():
                w[op] = p * factor
                non_ident += p * factor
        w[ident] = 1.0 - non_ident
        return PauliChannel(self.n_qubits, w)

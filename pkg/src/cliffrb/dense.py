"""Brute-force dense superoperator engine (n <= 3).

This is the reference implementation the fast paths are checked against:
channels are held as 4^n x 4^n process matrices chi in the (unnormalized)
Pauli basis, Lambda(rho) = sum_mn chi[m,n] P_m rho P_n.  With that
normalization chi[0,0] is the entanglement fidelity with the identity, which
keeps the depolarization and fidelity formulas short.

Basis ordering: Pauli index m = x_mask | (z_mask << n), so m = 0 is the
identity; state index bit j is qubit j (qubit 0 = low-order bit).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Union

import numpy as np

from .clifford import CliffordTableau, clifford_apply, clifford_inverse, pauli_tableau
from .pauli import PauliChannel, PauliOperator

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

MAX_QUBITS = 3


def dense_pauli(p: PauliOperator) -> np.ndarray:
    """Dense matrix of a Pauli operator (qubit 0 on the low tensor slot)."""
    out = np.eye(1, dtype=complex)
    for j in range(p.n_qubits):
        out = np.kron(_MATS[p.factor(j)], out)
    return (1j) ** p.phase * out


def _basis(n: int) -> List[PauliOperator]:
    return [PauliOperator(n, m & ((1 << n) - 1), m >> n, 0)
            for m in range(4 ** n)]


def _basis_mats(n: int) -> List[np.ndarray]:
    return [dense_pauli(p) for p in _basis(n)]


@dataclass(frozen=True)
class DenseSuperoperator:
    n_qubits: int
    chi: np.ndarray

    def __post_init__(self):
        if self.n_qubits > MAX_QUBITS:
            raise ValueError("dense engine is limited to small systems")
        d2 = 4 ** self.n_qubits
        if self.chi.shape != (d2, d2):
            raise ValueError("process matrix has wrong shape")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_kraus(cls, n_qubits: int, kraus: Iterable[np.ndarray],
                   require_tp: bool = True) -> "DenseSuperoperator":
        d = 2 ** n_qubits
        mats = _basis_mats(n_qubits)
        coeffs = []
        total = np.zeros((d, d), dtype=complex)
        for a in kraus:
            a = np.asarray(a, dtype=complex)
            if a.shape != (d, d):
                raise ValueError("Kraus operator has wrong shape")
            total += a.conj().T @ a
            coeffs.append(np.array([np.trace(pm.conj().T @ a) / d for pm in mats]))
        if require_tp and not np.allclose(total, np.eye(d), atol=1e-10):
            raise ValueError("Kraus set is not trace-preserving")
        c = np.array(coeffs)
        return cls(n_qubits, c.T @ c.conj())

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "DenseSuperoperator":
        u = np.asarray(u, dtype=complex)
        n = int(round(np.log2(u.shape[0])))
        return cls.from_kraus(n, [u])

    @classmethod
    def identity(cls, n_qubits: int) -> "DenseSuperoperator":
        return cls.from_unitary(np.eye(2 ** n_qubits))

    @classmethod
    def depolarizing(cls, n_qubits: int, p: float) -> "DenseSuperoperator":
        return cls.from_pauli_channel(PauliChannel.depolarizing(n_qubits, p))

    @classmethod
    def from_pauli_channel(cls, ch: PauliChannel) -> "DenseSuperoperator":
        n = ch.n_qubits
        chi = np.zeros((4 ** n, 4 ** n), dtype=complex)
        for op, w in ch.weights.items():
            m = op.x_mask | (op.z_mask << n)
            chi[m, m] += w
        return cls(n, chi)

    @classmethod
    def from_tableau(cls, tab: CliffordTableau) -> "DenseSuperoperator":
        """Channel rho -> C rho C+ of a Clifford, built from its signed
        Pauli permutation (no dense unitary needed)."""
        n = tab.n_qubits
        d2 = 4 ** n
        phases = np.zeros(d2, dtype=complex)
        idx = np.zeros(d2, dtype=int)
        for m, p in enumerate(_basis(n)):
            img = clifford_apply(tab, p)
            idx[m] = img.x_mask | (img.z_mask << n)
            phases[m] = (1j) ** img.phase
        return cls.from_natural(n, _signed_perm_natural(n, idx, phases))

    @classmethod
    def from_natural(cls, n_qubits: int, nat: np.ndarray) -> "DenseSuperoperator":
        d = 2 ** n_qubits
        mats = _basis_mats(n_qubits)
        chi = np.zeros((4 ** n_qubits, 4 ** n_qubits), dtype=complex)
        for m, pm in enumerate(mats):
            for k, pk in enumerate(mats):
                basis_elt = np.kron(pk.T, pm)
                chi[m, k] = np.trace(basis_elt.conj().T @ nat) / (d * d)
        return cls(n_qubits, chi)

    # -- representations ------------------------------------------------------

    def natural(self) -> np.ndarray:
        """Matrix acting on column-stacked vec(rho)."""
        d = 2 ** self.n_qubits
        mats = _basis_mats(self.n_qubits)
        nat = np.zeros((d * d, d * d), dtype=complex)
        for m, pm in enumerate(mats):
            for k, pk in enumerate(mats):
                if self.chi[m, k] != 0:
                    nat += self.chi[m, k] * np.kron(pk.T, pm)
        return nat

    def kraus(self, tol: float = 1e-12) -> List[np.ndarray]:
        vals, vecs = np.linalg.eigh((self.chi + self.chi.conj().T) / 2)
        mats = _basis_mats(self.n_qubits)
        out = []
        for lam, v in zip(vals, vecs.T):
            if lam < -1e-9:
                raise ValueError("process matrix is not completely positive")
            if lam > tol:
                out.append(np.sqrt(lam) *
                           sum(v[m] * mats[m] for m in range(len(mats))))
        return out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        mats = _basis_mats(self.n_qubits)
        out = np.zeros_like(np.asarray(rho, dtype=complex))
        for m, pm in enumerate(mats):
            for k, pk in enumerate(mats):
                if self.chi[m, k] != 0:
                    out += self.chi[m, k] * (pm @ rho @ pk)
        return out

    def compose(self, other: "DenseSuperoperator") -> "DenseSuperoperator":
        """self after other."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("size mismatch")
        return DenseSuperoperator.from_natural(
            self.n_qubits, self.natural() @ other.natural())

    def is_trace_preserving(self, tol: float = 1e-10) -> bool:
        d = 2 ** self.n_qubits
        mats = _basis_mats(self.n_qubits)
        total = np.zeros((d, d), dtype=complex)
        for m, pm in enumerate(mats):
            for k, pk in enumerate(mats):
                if self.chi[m, k] != 0:
                    total += self.chi[m, k] * (pk @ pm)
        return bool(np.allclose(total, np.eye(d), atol=tol))

    def distance(self, other: "DenseSuperoperator") -> float:
        return float(np.max(np.abs(self.chi - other.chi)))


def _signed_perm_natural(n: int, idx: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Natural representation of P_m -> phases[m] * P_idx[m] acting by
    conjugation, assembled in the Pauli basis."""
    d = 2 ** n
    mats = _basis_mats(n)
    nat = np.zeros((d * d, d * d), dtype=complex)
    for m in range(4 ** n):
        src = mats[m].reshape(-1, order="F")  # vec(P_m), column stacking
        dst = phases[m] * mats[idx[m]].reshape(-1, order="F")
        nat += np.outer(dst, src.conj()) / d
    return nat


def superoperator_trace(s: DenseSuperoperator) -> float:
    """Trace of the natural representation; equals sum_i |tr A_i|^2."""
    return float(np.real(s.chi[0, 0]) * 4 ** s.n_qubits)


def depolarization_strength(s: DenseSuperoperator) -> float:
    """Strength of the depolarizing channel the full Clifford twirl maps s to."""
    if not s.is_trace_preserving():
        raise ValueError("channel is not trace-preserving")
    d2 = 4 ** s.n_qubits
    return (d2 - superoperator_trace(s)) / (d2 - 1)


def conjugate_by_tableau(s: DenseSuperoperator, tab: CliffordTableau) -> DenseSuperoperator:
    """Process matrix of C+ . s . C (twirl summand for Clifford C)."""
    n = s.n_qubits
    inv = clifford_inverse(tab)
    d2 = 4 ** n
    idx = np.zeros(d2, dtype=int)
    sign = np.zeros(d2, dtype=complex)
    for m, p in enumerate(_basis(n)):
        img = clifford_apply(inv, p)
        idx[m] = img.x_mask | (img.z_mask << n)
        sign[m] = (1j) ** img.phase
    chi = np.zeros_like(s.chi)
    chi[np.ix_(idx, idx)] = np.outer(sign, sign.conj()) * s.chi
    return DenseSuperoperator(n, chi)


def group_twirl(s: DenseSuperoperator,
                group: Union[str, Sequence[CliffordTableau]]) -> DenseSuperoperator:
    """Average of C+ . s . C over a set of Cliffords, or over all Paulis when
    group == "pauli"."""
    if isinstance(group, str):
        if group != "pauli":
            raise ValueError(f"unknown twirl group {group!r}")
        n = s.n_qubits
        acc = np.zeros_like(s.chi)
        for p in _basis(n):
            acc += conjugate_by_tableau(s, pauli_tableau(p)).chi
        return DenseSuperoperator(n, acc / 4 ** n)
    group = list(group)
    if not group:
        raise ValueError("empty twirl set")
    acc = np.zeros_like(s.chi)
    for tab in group:
        acc += conjugate_by_tableau(s, tab).chi
    return DenseSuperoperator(s.n_qubits, acc / len(group))


def gate_fidelity(s: DenseSuperoperator, u: np.ndarray) -> float:
    """Average gate fidelity of the channel s against a target unitary u."""
    err = s.compose(DenseSuperoperator.from_unitary(np.asarray(u).conj().T))
    d = 2 ** s.n_qubits
    return float((1 + d * np.real(err.chi[0, 0])) / (1 + d))


def random_tp_channel(n_qubits: int, rng, kraus_rank: int = 4) -> DenseSuperoperator:
    """Random trace-preserving channel from a Haar-ish random isometry."""
    d = 2 ** n_qubits
    g = rng.normal(size=(d * kraus_rank, d)) + 1j * rng.normal(size=(d * kraus_rank, d))
    q, _ = np.linalg.qr(g)
    kraus = [q[i * d:(i + 1) * d, :] for i in range(kraus_rank)]
    return DenseSuperoperator.from_kraus(n_qubits, kraus)

"""Twirl-quality diagnostics for approximately randomized benchmarks.

Three related tools: (1) Markov-chain convolution of a step distribution over
the sign-free Clifford group with its total-variation distance from uniform,
(2) a linear-program bound on how far an error-per-step estimate taken with a
non-uniform step distribution can sit from the uniform-twirl value, and (3)
first-order bounds on the mis-estimation of a Pauli channel's depolarizing
strength when the steps separating the error from the measurement do not twirl
it completely.

Everything here works on the quotient group (Cliffords modulo Pauli factors),
which is enumerable for n <= 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .clifford import (
    CliffordTableau,
    clifford_apply,
    clifford_compose,
    enumerate_group,
)
from .pauli import PauliOperator, pauli_commutes

MAX_QUBITS = 2


class EnumerationUnavailableError(ValueError):
    pass


class InfeasibleBoundError(ValueError):
    pass


@lru_cache(maxsize=4)
def _group(n: int) -> Tuple[Tuple[CliffordTableau, ...], Dict[int, int]]:
    if n > MAX_QUBITS:
        raise EnumerationUnavailableError(
            f"quotient-group enumeration is limited to n <= {MAX_QUBITS}")
    elements = tuple(enumerate_group(n, quotient=True))
    index = {tab.strip_signs().encode(): i for i, tab in enumerate(elements)}
    return elements, index


@lru_cache(maxsize=4)
def _compose_table_cache(n: int) -> Dict[Tuple[int, int], int]:
    return {}


def _compose_index(n: int, i: int, j: int) -> int:
    """Index of element i composed after element j, memoized per group."""
    table = _compose_table_cache(n)
    key = (i, j)
    if key not in table:
        elements, index = _group(n)
        prod = clifford_compose(elements[i], elements[j])
        table[key] = index[prod.strip_signs().encode()]
    return table[key]


@dataclass(frozen=True)
class GroupDistribution:
    """Probability distribution over the sign-free Clifford group."""
    n_qubits: int
    probs: np.ndarray

    def __post_init__(self):
        elements, _ = _group(self.n_qubits)
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(elements),):
            raise ValueError("probability vector has wrong length")
        if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
            raise ValueError("not a probability distribution")
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, n_qubits: int) -> "GroupDistribution":
        elements, _ = _group(n_qubits)
        return cls(n_qubits, np.full(len(elements), 1 / len(elements)))

    @classmethod
    def delta(cls, tab: CliffordTableau) -> "GroupDistribution":
        return cls.from_weights(tab.n_qubits, [(tab, 1.0)])

    @classmethod
    def from_weights(cls, n_qubits: int,
                     weights: Sequence[Tuple[CliffordTableau, float]]
                     ) -> "GroupDistribution":
        elements, index = _group(n_qubits)
        p = np.zeros(len(elements))
        for tab, w in weights:
            p[index[tab.strip_signs().encode()]] += w
        return cls(n_qubits, p)

    def support(self) -> np.ndarray:
        return np.nonzero(self.probs > 0)[0]

    def prob_of(self, tab: CliffordTableau) -> float:
        _, index = _group(self.n_qubits)
        return float(self.probs[index[tab.strip_signs().encode()]])


def convolve(a: GroupDistribution, b: GroupDistribution) -> GroupDistribution:
    """Distribution of the composition (a-element applied after b-element)."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("size mismatch")
    n = a.n_qubits
    out = np.zeros_like(a.probs)
    for i in a.support():
        for j in b.support():
            out[_compose_index(n, int(i), int(j))] += a.probs[i] * b.probs[j]
    return GroupDistribution(n, out)


def convolve_steps(d: GroupDistribution, j: int) -> GroupDistribution:
    """Distribution of the aggregate of j consecutive i.i.d. steps."""
    if j < 1:
        raise ValueError("need at least one step")
    acc = d
    for _ in range(j - 1):
        acc = convolve(d, acc)
    return acc


def total_variation(d: GroupDistribution) -> float:
    return float(0.5 * np.abs(d.probs - 1 / len(d.probs)).sum())


def tv_series(d: GroupDistribution, j_max: int) -> List[float]:
    """Total variation from uniform of the aggregate after 1..j_max steps."""
    out = []
    acc = d
    for j in range(1, j_max + 1):
        out.append(total_variation(acc))
        if j < j_max:
            acc = convolve(d, acc)
    return out


def tv_series_csv(d: GroupDistribution, j_max: int) -> str:
    lines = ["steps,total_variation"]
    for j, v in enumerate(tv_series(d, j_max), start=1):
        lines.append(f"{j},{v!r}")
    return "\n".join(lines) + "\n"


# -- LP bound on the error-per-step comparison --------------------------------


def _knapsack_max(c: np.ndarray, a: np.ndarray, budget: float,
                  upper: float) -> float:
    """Maximize c·s subject to a·s = budget, 0 <= s <= upper, a >= 0.

    Single equality plus box constraints: the optimum sits at a vertex found
    by allocating budget greedily in decreasing order of c/a, with the
    zero-coefficient variables set directly from the sign of c.
    """
    total = 0.0
    free = a <= 0
    total += upper * np.clip(c[free], 0.0, None).sum()
    idx = np.nonzero(~free)[0]
    if budget < -1e-12 or budget > a[idx].sum() * upper + 1e-12:
        raise InfeasibleBoundError("error rate is outside the feasible range "
                                   "of the step-distribution constraint")
    order = idx[np.argsort(-(c[idx] / a[idx]))]
    remaining = budget
    for g in order:
        s = min(upper, remaining / a[g])
        total += c[g] * s
        remaining -= a[g] * s
        if remaining <= 1e-15 * max(budget, 1.0):
            break
    return total


def step_comparison_bound(p_a: GroupDistribution, eps_a: float, alpha: float,
                          k: int = 1) -> Tuple[float, float]:
    """Bounds on the estimate shift between a p_a-stepped experiment and a
    uniform-twirl one.

    Per-element depolarizing strengths s_g are constrained by the observed
    error per step and by 0 <= s_g <= D^2/(D^2-1); the returned pair
    (delta_max, delta_min) brackets the weighted-mean difference between the
    uniform and the k-step-aggregate distributions.
    """
    n = p_a.n_qubits
    d2 = 4 ** n
    upper = d2 / (d2 - 1)
    p_k = convolve_steps(p_a, k).probs
    budget = (1 - (1 - alpha * eps_a) ** k) / alpha ** 2
    coeff = alpha * (1 / len(p_k) - p_k)
    delta_max = _knapsack_max(coeff, p_k, budget, upper)
    delta_min = -_knapsack_max(-coeff, p_k, budget, upper)
    return float(delta_max), float(delta_min)


# -- imperfect-depolarization bounds ------------------------------------------


def default_measurement(n: int) -> PauliOperator:
    """Single-qubit Z on the first qubit, the usual binary readout."""
    return PauliOperator(n, 0, 1, 0)


def undetected_probability(p_prime: GroupDistribution, r: PauliOperator,
                           measured: Optional[PauliOperator] = None) -> float:
    """Probability that Pauli error r, pushed through an aggregate Clifford
    drawn from p_prime, commutes with the measured operator (goes unseen)."""
    n = p_prime.n_qubits
    m = default_measurement(n) if measured is None else measured
    elements, _ = _group(n)
    q = 0.0
    for i in p_prime.support():
        img = clifford_apply(elements[i], r)
        if pauli_commutes(img, m):
            q += float(p_prime.probs[i])
    return q


def _nonidentity_paulis(n: int) -> List[PauliOperator]:
    return [PauliOperator(n, m & ((1 << n) - 1), m >> n, 0)
            for m in range(1, 4 ** n)]


@dataclass(frozen=True)
class KappaReport:
    kappa_max: float
    kappa_min: float
    q_max: Tuple[float, ...]          # per step index k, extremal over Paulis
    q_min: Tuple[float, ...]
    r_max: Tuple[PauliOperator, ...]
    r_min: Tuple[PauliOperator, ...]
    first_order_warning: bool

    def to_json(self) -> str:
        return json.dumps({
            "kappa_max": self.kappa_max,
            "kappa_min": self.kappa_min,
            "q_max": list(self.q_max),
            "q_min": list(self.q_min),
            "r_max": [str(r) for r in self.r_max],
            "r_min": [str(r) for r in self.r_min],
            "first_order_warning": self.first_order_warning,
        }, indent=2)


def kappa_bounds(p_prime_k: Sequence[GroupDistribution], error: float,
                 measured: Optional[PauliOperator] = None,
                 warn_threshold: float = 0.2) -> KappaReport:
    """First-order bounds on depolarizing-strength mis-estimation.

    p_prime_k[k-1] is the distribution of the aggregate Clifford separating an
    error in step k (counted from the measurement) from the readout; `error`
    is the observed total sequence error.  Returns the extremal difference
    between the true per-step strength of a Pauli error channel and the
    strength a standard analysis would infer (2 x observed error per step).
    """
    if not p_prime_k:
        raise ValueError("need at least one step distribution")
    n = p_prime_k[0].n_qubits
    if any(d.n_qubits != n for d in p_prime_k):
        raise ValueError("size mismatch among step distributions")
    if error < 0:
        raise ValueError("error must be nonnegative")
    l = len(p_prime_k)
    d2 = 4 ** n
    paulis = _nonidentity_paulis(n)
    q_max, q_min, r_max, r_min = [], [], [], []
    for dist in p_prime_k:
        qs = [undetected_probability(dist, r, measured) for r in paulis]
        hi, lo = int(np.argmax(qs)), int(np.argmin(qs))
        q_max.append(qs[hi])
        q_min.append(qs[lo])
        r_max.append(paulis[hi])
        r_min.append(paulis[lo])
    # sum of detection probabilities for the stealthiest / loudest Pauli:
    # these bracket the channel strength consistent with the observed error
    miss_hi = sum(1 - q for q in q_max)
    miss_lo = sum(1 - q for q in q_min)
    upper = d2 / (d2 - 1)
    gamma_hi = min(1.0, error / miss_hi) if miss_hi > 0 else 1.0
    gamma_lo = error / miss_lo if miss_lo > 0 else 0.0
    k_max = gamma_hi * upper - 2 * error / l
    k_min = gamma_lo * upper - 2 * error / l
    return KappaReport(float(k_max), float(k_min), tuple(q_max), tuple(q_min),
                       tuple(r_max), tuple(r_min),
                       first_order_warning=bool(l * error > warn_threshold))

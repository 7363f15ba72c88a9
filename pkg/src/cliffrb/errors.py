"""Exact stochastic-Pauli error propagation.

Instead of Monte-Carlo sampling of error insertions, track the full
probability distribution over stabilizer sign lists.  A Pauli error flips
the sign of exactly the rows it anticommutes with, i.e. it XORs a fixed
pattern onto the sign list; a stochastic Pauli channel is therefore a convex
combination of XOR permutations of the distribution.  The distribution is
kept *relative to the ideal run* (error pattern e = actual signs XOR ideal
signs), which makes it invariant under the ideal conjugations and lets the
structural row operations of the stabilizer engine (swap / multiply /
replace) act linearly on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .pauli import PauliChannel, PauliOperator, pauli_commutes
from .stabilizer import StabilizerState, apply_clifford, stabilizer_decomposition, zero_state

DEFAULT_QUBIT_CAP = 20


class ResourceLimitError(RuntimeError):
    pass


@dataclass
class SignListDistribution:
    """Dense probability vector over the 2ⁿ possible sign-flip patterns."""

    n_qubits: int
    probs: np.ndarray
    cap: int = DEFAULT_QUBIT_CAP

    def __post_init__(self):
        if self.n_qubits > self.cap:
            raise ResourceLimitError(
                f"sign-list tracking capped at {self.cap} qubits")
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (1 << self.n_qubits,):
            raise ValueError("probability vector has wrong length")
        if np.any(self.probs < -1e-15) or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("not a probability distribution")

    @classmethod
    def ideal(cls, n_qubits: int, cap: int = DEFAULT_QUBIT_CAP) -> "SignListDistribution":
        probs = np.zeros(1 << n_qubits)
        probs[0] = 1.0
        return cls(n_qubits, probs, cap)


def _anticommute_pattern(p: PauliOperator, rows: Sequence[PauliOperator]) -> int:
    pattern = 0
    for i, row in enumerate(rows):
        if not pauli_commutes(p, row):
            pattern |= 1 << i
    return pattern


def propagate_channel(dist: SignListDistribution, state: StabilizerState,
                      ch: PauliChannel) -> SignListDistribution:
    """Mix the distribution over the channel's XOR patterns against the
    current stabilizer rows."""
    if ch.n_qubits != state.n_qubits or dist.n_qubits != state.n_qubits:
        raise ValueError("size mismatch")
    idx = np.arange(1 << dist.n_qubits)
    out = np.zeros_like(dist.probs)
    for op, weight in ch.weights.items():
        if weight == 0.0:
            continue
        pattern = _anticommute_pattern(op, state.rows)
        out += weight * dist.probs[idx ^ pattern]
    return SignListDistribution(dist.n_qubits, out, dist.cap)


@dataclass
class ErrorModel:
    """Per-step stochastic error description.

    `default_channel` follows every step; `per_gate` overrides by step label;
    `time_ramp` multiplies non-identity weights by (1 + gamma*t) at step t
    (t = 1, 2, ... from sequence start); `spam_channel` is applied once
    before the final measurement.
    """

    default_channel: PauliChannel
    per_gate: Dict[str, PauliChannel] = field(default_factory=dict)
    time_ramp: Optional[float] = None
    spam_channel: Optional[PauliChannel] = None

    def channel_for(self, label: str, t: int) -> PauliChannel:
        ch = self.per_gate.get(label, self.default_channel)
        if self.time_ramp:
            ch = ch.scaled(1.0 + self.time_ramp * t)
        return ch

    # -- JSON ----------------------------------------------------------------

    @staticmethod
    def _channel_from_json(obj: dict, n: int) -> PauliChannel:
        if obj["type"] == "depolarizing":
            return PauliChannel.depolarizing(n, float(obj["p"]))
        if obj["type"] == "pauli":
            weights = {PauliOperator.from_string(k): float(v)
                       for k, v in obj["weights"].items()}
            ident = PauliOperator.identity(n)
            weights[ident] = 1.0 - sum(v for k, v in weights.items()
                                       if not k.is_identity())
            return PauliChannel(n, weights)
        raise ValueError(f"unknown channel type {obj['type']!r}")

    @classmethod
    def from_json(cls, obj: dict, n: int) -> "ErrorModel":
        return cls(
            default_channel=cls._channel_from_json(obj["default"], n),
            per_gate={k: cls._channel_from_json(v, n)
                      for k, v in obj.get("per_gate", {}).items()},
            time_ramp=obj.get("time_ramp"),
            spam_channel=(cls._channel_from_json(obj["spam"], n)
                          if obj.get("spam") else None),
        )


class SignTracker:
    """Listener pairing a SignListDistribution with a StabilizerState so the
    distribution co-transforms with the structural row operations."""

    def __init__(self, state: StabilizerState, cap: int = DEFAULT_QUBIT_CAP):
        self.state = state
        self.dist = SignListDistribution.ideal(state.n_qubits, cap)
        state.listeners.append(self)

    def on_row_event(self, event: str, *args) -> None:
        probs = self.dist.probs
        idx = np.arange(len(probs))
        if event == "swap":
            a, b = args
            differ = ((idx >> a) ^ (idx >> b)) & 1
            self.dist.probs = probs[idx ^ (differ << a) ^ (differ << b)]
        elif event == "mul":
            dst, src = args
            self.dist.probs = probs[idx ^ (((idx >> src) & 1) << dst)]
        elif event == "replace":
            # row j gets a fresh sign: marginalize its error bit away
            (j,) = args
            out = np.zeros_like(probs)
            np.add.at(out, idx & ~(1 << j), probs)
            self.dist.probs = out
        elif event == "prepare":
            self.dist = SignListDistribution(
                self.dist.n_qubits + 1,
                np.concatenate([probs, np.zeros_like(probs)]),
                self.dist.cap)

    def propagate(self, ch: PauliChannel) -> None:
        self.dist = propagate_channel(self.dist, self.state, ch)

    def joint_parity_probability(self, masks: Sequence[int]) -> float:
        """Probability that every masked parity of the error pattern is even
        (i.e. every listed measurement matches its ideal outcome)."""
        idx = np.arange(len(self.dist.probs))
        ok = np.ones(len(idx), dtype=bool)
        for mask in masks:
            parity = np.zeros(len(idx), dtype=np.uint8)
            m = mask
            while m:
                b = (m & -m).bit_length() - 1
                parity ^= ((idx >> b) & 1).astype(np.uint8)
                m &= m - 1
            ok &= parity == 0
        return float(self.dist.probs[ok].sum())


def expected_sequence_fidelity(sequence, model: ErrorModel) -> float:
    """Exact probability that the sequence ends in its ideal outcome.

    `sequence` provides n_qubits, steps (label, tableau) and measured_paulis;
    every step is followed by its error channel, SPAM error precedes the
    final measurement, and all measured operators must be deterministic in
    the noise-free run (which they are for the generated RB protocols).
    """
    state = zero_state(sequence.n_qubits)
    tracker = SignTracker(state)
    for t, (label, tab) in enumerate(sequence.steps, start=1):
        apply_clifford(state, tab)
        tracker.propagate(model.channel_for(label, t))
    if model.spam_channel is not None:
        tracker.propagate(model.spam_channel)
    masks = []
    for p in sequence.measured_paulis:
        dec = stabilizer_decomposition(state, p)
        if dec is None:
            raise ValueError(f"measured operator {p} is not deterministic")
        masks.append(dec[0])
    return tracker.joint_parity_probability(masks)

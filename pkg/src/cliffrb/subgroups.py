"""GF(2^n) arithmetic and the small twirl subgroups.

Paulis on n qubits are encoded as pairs of field elements (a, c): the X part
is expanded over a basis b_1..b_n (b_1 = 1) and the Z part over the dual
basis, chosen so that the first expansion coordinate of b_i * dual_j is the
Kronecker delta.  In that encoding raising a Pauli to a field-element power
and the 2^n(4^n - 1)-element twirl subgroup Q_n become one-line formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .clifford import CliffordTableau, _solve_affine, clifford_apply, clifford_compose
from .gates import get_gate
from .pauli import PauliOperator

# fixed irreducible polynomials over GF(2), bit k = coefficient of x^k
_IRREDUCIBLE = {
    1: 0b11,          # x + 1
    2: 0b111,         # x^2 + x + 1
    3: 0b1011,        # x^3 + x + 1
    4: 0b10011,       # x^4 + x + 1
    5: 0b100101,      # x^5 + x^2 + 1
    6: 0b1000011,     # x^6 + x + 1
    7: 0b10000011,    # x^7 + x + 1
    8: 0b100011011,   # x^8 + x^4 + x^3 + x + 1
}


@dataclass(frozen=True)
class FieldContext:
    n: int
    poly: int
    basis: Tuple[int, ...]
    dual: Tuple[int, ...]


def _poly_mul_mod(a: int, b: int, poly: int, n: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> n & 1:
            a ^= poly
    return out


def field_mul(ctx: FieldContext, a: int, b: int) -> int:
    return _poly_mul_mod(a, b, ctx.poly, ctx.n)


def field_inv(ctx: FieldContext, a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse")
    # a^(2^n - 2) by square-and-multiply
    out, base, e = 1, a, (1 << ctx.n) - 2
    while e:
        if e & 1:
            out = field_mul(ctx, out, base)
        base = field_mul(ctx, base, base)
        e >>= 1
    return out


def coordinates(ctx: FieldContext, y: int, basis: Optional[Sequence[int]] = None) -> int:
    """Expansion coordinates of y over the basis, as a bitmask (bit i = coefficient of basis[i])."""
    basis = ctx.basis if basis is None else basis
    constraints = []
    for t in range(ctx.n):
        w = sum(1 << i for i, b in enumerate(basis) if (b >> t) & 1)
        constraints.append((w, (y >> t) & 1))
    particular, null = _solve_affine(constraints, ctx.n)
    assert not null, "basis is not independent"
    return particular


def first_coord(ctx: FieldContext, y: int) -> int:
    """Coefficient of b_1 in the basis expansion of y."""
    return coordinates(ctx, y) & 1


def dual_basis(n: int, poly: int, basis: Sequence[int]) -> Tuple[int, ...]:
    """The basis dual to the given one under (a, b) -> first coordinate of a*b."""
    ctx = FieldContext(n, poly, tuple(basis), tuple(basis))  # dual unused below
    # first_coord(b_i * e) is linear in e; solve for each dual vector
    dual = []
    for j in range(n):
        constraints = []
        for i in range(n):
            w = 0
            for t in range(n):
                if first_coord(ctx, field_mul(ctx, basis[i], 1 << t)):
                    w |= 1 << t
            constraints.append((w, 1 if i == j else 0))
        particular, null = _solve_affine(constraints, n)
        assert not null, "dual system is singular"
        dual.append(particular)
    return tuple(dual)


def field_context(n: int, basis: Optional[Sequence[int]] = None) -> FieldContext:
    if n not in _IRREDUCIBLE:
        raise ValueError(f"no built-in irreducible polynomial for n={n}")
    poly = _IRREDUCIBLE[n]
    if basis is None:
        basis = tuple(1 << i for i in range(n))
    basis = tuple(basis)
    if basis[0] != 1:
        raise ValueError("first basis element must be 1")
    return FieldContext(n, poly, basis, dual_basis(n, poly, basis))


# -- Pauli <-> field-pair encoding ---------------------------------------------


def pauli_to_field(ctx: FieldContext, p: PauliOperator) -> Tuple[int, int]:
    a = c = 0
    for i in range(ctx.n):
        if (p.x_mask >> i) & 1:
            a ^= ctx.basis[i]
        if (p.z_mask >> i) & 1:
            c ^= ctx.dual[i]
    return a, c


def field_to_pauli(ctx: FieldContext, a: int, c: int) -> PauliOperator:
    x = z = 0
    for i in range(ctx.n):
        if first_coord(ctx, field_mul(ctx, a, ctx.dual[i])):
            x |= 1 << i
        if first_coord(ctx, field_mul(ctx, c, ctx.basis[i])):
            z |= 1 << i
    return PauliOperator(ctx.n, x, z, 0)


def vectorial_power(ctx: FieldContext, p: PauliOperator, k: int) -> PauliOperator:
    """Raise a (phase-0) Pauli to a field-element power: (a, c) -> (k*a, k*c)."""
    if p.phase != 0:
        raise ValueError("vectorial powers are defined on phase-0 operators")
    a, c = pauli_to_field(ctx, p)
    return field_to_pauli(ctx, field_mul(ctx, k, a), field_mul(ctx, k, c))


# -- twirl subgroups -------------------------------------------------------------


def t_subgroup() -> List[CliffordTableau]:
    """{I, T, T^2} with T the XYZ 3-cycle taking X to Y and Z to X."""
    t = get_gate("T").tableau
    return [CliffordTableau.identity(1), t, clifford_compose(t, t)]


def q_subgroup(ctx_or_n) -> List[CliffordTableau]:
    """The 2^n(4^n-1) sign-free coset representatives whose images satisfy
    [C](X_1) = X^a Z^c, [C](Z_1) = X^d Z^e with c*d + a*e = 1, extended to the
    other qubits by vectorial powers."""
    ctx = field_context(ctx_or_n) if isinstance(ctx_or_n, int) else ctx_or_n
    n = ctx.n
    if n > 4:
        raise ValueError("subgroup enumeration limited to n <= 4")
    out = []
    for ac in range(1, 1 << (2 * n)):
        a, c = ac & ((1 << n) - 1), ac >> n
        # all (d, e) with c*d + a*e = 1
        if a != 0:
            a_inv = field_inv(ctx, a)
            solutions = [(d, field_mul(ctx, 1 ^ field_mul(ctx, c, d), a_inv))
                         for d in range(1 << n)]
        else:
            c_inv = field_inv(ctx, c)
            solutions = [(c_inv, e) for e in range(1 << n)]
        for d, e in solutions:
            xs = [field_to_pauli(ctx, field_mul(ctx, a, ctx.basis[i]),
                                 field_mul(ctx, c, ctx.basis[i]))
                  for i in range(n)]
            zs = [field_to_pauli(ctx, field_mul(ctx, d, ctx.dual[i]),
                                 field_mul(ctx, e, ctx.dual[i]))
                  for i in range(n)]
            out.append(CliffordTableau.from_images(xs, zs))
    return out


def verify_twirl_set(k_set: Sequence[CliffordTableau]) -> bool:
    """True iff the number of set elements mapping P_i onto +-P_j is the same
    for every pair of non-identity Paulis (the sufficient condition for the
    Pauli twirl followed by a K-twirl to equal the full Clifford twirl)."""
    k_set = list(k_set)
    if not k_set:
        return False
    n = k_set[0].n_qubits
    if n > 2:
        raise ValueError("verification limited to n <= 2")
    size = (1 << (2 * n)) - 1
    counts = [[0] * size for _ in range(size)]
    for tab in k_set:
        for m in range(1, size + 1):
            p = PauliOperator(n, m & ((1 << n) - 1), m >> n, 0)
            img = clifford_apply(tab, p).representative()
            j = img.x_mask | (img.z_mask << n)
            counts[m - 1][j - 1] += 1
    want = counts[0][0]
    return all(c == want for row in counts for c in row)

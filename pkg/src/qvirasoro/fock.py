"""Truncated charged Fock space over a two-parameter Heisenberg algebra.

The oscillators h_n (n != 0) obey

    [h_n, h_m] = (1/n) (q^{n/2}-q^{-n/2})(t^{n/2}-t^{-n/2})
                        / (p^{n/2}+p^{-n/2}) * delta_{n+m,0},

and the zero modes obey [h_0, Q_h] = 1/2, so e^{alpha Q_h} shifts the
h_0 eigenvalue (the momentum) by alpha/2.

States are monomials prod_n h_{-n}^{m_n} |momentum> indexed by a
partition; the basis is truncated by total degree.  Exponential
("vertex") operators are stored as data — a mode-coefficient rule, a
charge, an h_0 power, an h_0 base and a scalar — and applied to the
truncated basis as exact finite matrices, one matrix entry per
(bra partition, ket partition) with a single monomial in the operator's
formal variable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import QVirasoroError, TruncationError
from .qspecial import QParams
from .series import Series

MOMENTUM_TOL = 1e-12
# Exponent metadata on coefficient tables is aligned to this tolerance
# when two tables are compared.
EXPONENT_TOL = 1e-9


def partitions_of(n: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """All partitions of n as descending tuples."""
    if n == 0:
        yield ()
        return
    if max_part is None or max_part > n:
        max_part = n
    for first in range(max_part, 0, -1):
        for rest in partitions_of(n - first, first):
            yield (first,) + rest


def mode_commutator(n: int, m: int, params: QParams) -> float:
    """[h_n, h_m] for nonzero modes; 0 unless n + m = 0.

    The zero-mode pairing [h_0, Q_h] = 1/2 is handled by the momentum
    bookkeeping of vertex application, not by this function.
    """
    if n == 0 or n + m != 0:
        return 0.0
    q, t, p = params.q, params.t, params.p
    hn = n / 2.0
    return (
        (q**hn - q**-hn) * (t**hn - t**-hn) / (p**hn + p**-hn) / n
    )


@dataclass(frozen=True)
class FockState:
    """A charged state: momentum (h_0 eigenvalue) and raised modes."""

    momentum: float
    partition: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        part = tuple(sorted(self.partition, reverse=True))
        object.__setattr__(self, "partition", part)
        if any(n < 1 for n in part):
            raise QVirasoroError("partition entries must be >= 1")

    @property
    def degree(self) -> int:
        return sum(self.partition)


def _multiplicities(partition: Sequence[int]) -> dict[int, int]:
    mult: dict[int, int] = {}
    for n in partition:
        mult[n] = mult.get(n, 0) + 1
    return mult


def gram_norm(partition: Sequence[int], params: QParams) -> float:
    """<lambda|lambda> = prod_n c_n^{mult_n} mult_n! with
    c_n = [h_n, h_{-n}]."""
    out = 1.0
    for n, m in _multiplicities(partition).items():
        out *= mode_commutator(n, -n, params) ** m * math.factorial(m)
    return out


def inner_product(bra: FockState, ket: FockState, params: QParams) -> float:
    """Fock pairing: diagonal in momentum (the <m|m'> = delta_{m,m'}
    convention) and in the partition."""
    if abs(bra.momentum - ket.momentum) > MOMENTUM_TOL:
        return 0.0
    if bra.partition != ket.partition:
        return 0.0
    return gram_norm(bra.partition, params)


# ---------------------------------------------------------------------------
# Vertex data


@dataclass
class NormalOrderedVertex:
    """Data of :exp( sum_{n!=0} A(n) h_n z^{-n} ): e^{charge Q_h}
    (h0_base z^{h0_power})^{h_0} * scalar.

    mode_rule(n) = A(n) for n != 0.  The h_0 factor acts on the incoming
    momentum first (it stands to the right of e^{charge Q_h}).
    """

    label: str
    params: QParams
    mode_rule: Callable[[int], float]
    charge: float = 0.0
    h0_base: float = 1.0
    h0_power: float = 0.0
    scalar: float = 1.0

    def at_scale(self, xi: float) -> "NormalOrderedVertex":
        """The same operator evaluated at argument xi*z.

        Folds xi into the data: A(n) -> A(n) xi^{-n} and
        h0_base -> h0_base * xi^{h0_power}; the formal variable stays z.
        """
        rule = self.mode_rule
        return replace(
            self,
            label=f"{self.label}@{xi:g}",
            mode_rule=lambda n, _r=rule, _x=xi: _r(n) * _x ** (-n),
            h0_base=self.h0_base * xi**self.h0_power,
        )

    def momentum_shift(self) -> float:
        return self.charge / 2.0

    def zero_mode_factor(self, momentum: float) -> float:
        return self.scalar * self.h0_base**momentum


def merge_vertices(
    factors: Sequence[NormalOrderedVertex], label: str | None = None
) -> NormalOrderedVertex:
    """Data of the normal-ordered product :X1(z) X2(z) ... : at a shared
    argument — mode rules and exponents add, bases and scalars multiply."""
    if not factors:
        raise QVirasoroError("merge needs at least one factor")
    rules = [f.mode_rule for f in factors]
    charge = sum(f.charge for f in factors)
    base = math.prod(f.h0_base for f in factors)
    power = sum(f.h0_power for f in factors)
    scal = math.prod(f.scalar for f in factors)
    name = label or ":" + " ".join(f.label for f in factors) + ":"
    return NormalOrderedVertex(
        label=name,
        params=factors[0].params,
        mode_rule=lambda n, _rs=tuple(rules): sum(r(n) for r in _rs),
        charge=charge,
        h0_base=base,
        h0_power=power,
        scalar=scal,
    )


@dataclass
class OperatorSum:
    """A formal sum of vertices sharing one formal variable (e.g. the
    current, which is a two-branch sum)."""

    label: str
    terms: list[NormalOrderedVertex]

    def momentum_shift(self) -> float:
        shifts = {round(v.momentum_shift(), 12) for v in self.terms}
        if len(shifts) != 1:
            raise QVirasoroError("sum terms carry different charges")
        return self.terms[0].momentum_shift()


def vertex_data_distance(
    a: NormalOrderedVertex, b: NormalOrderedVertex, order: int
) -> float:
    """Max relative deviation between two vertex data sets: mode rules
    compared on 0 < |n| <= order, plus the four zero-mode fields."""
    worst = 0.0
    for n in range(1, order + 1):
        for s in (n, -n):
            x, y = a.mode_rule(s), b.mode_rule(s)
            worst = max(worst, abs(x - y) / max(abs(x), abs(y), 1.0))
    for x, y in (
        (a.charge, b.charge),
        (a.h0_base, b.h0_base),
        (a.h0_power, b.h0_power),
        (a.scalar, b.scalar),
    ):
        worst = max(worst, abs(x - y) / max(abs(x), abs(y), 1.0))
    return worst


@dataclass
class OperatorProduct:
    """An ordered product of vertices at tagged formal variables,
    together with the scalar contraction data accumulated by normal
    ordering (one factor per ordered pair, see voa.normal_order)."""

    factors: list[tuple[NormalOrderedVertex, str]]
    merged: NormalOrderedVertex | None = None
    contractions: list = field(default_factory=list)

    def total_charge(self) -> float:
        return sum(v.charge for v, _ in self.factors)


# ---------------------------------------------------------------------------
# Coefficient tables (single formal variable)


@dataclass
class CoeffTable:
    """Monomial table of a matrix element: entries[k] is the coefficient
    of var^{k + offset}.  Tables are comparable only when offsets agree
    to EXPONENT_TOL."""

    entries: dict[int, float]
    offset: float = 0.0
    var: str = "z"

    def compare(self, other: "CoeffTable") -> float:
        if abs(self.offset - other.offset) > EXPONENT_TOL:
            raise QVirasoroError(
                f"tables not comparable: offsets {self.offset} vs {other.offset}"
            )
        keys = set(self.entries) | set(other.entries)
        return max(
            (abs(self.entries.get(k, 0.0) - other.entries.get(k, 0.0)) for k in keys),
            default=0.0,
        )


# ---------------------------------------------------------------------------
# Exact application of vertex operators on the truncated basis


class PartitionBasis:
    """All partitions of degree <= max_degree, ordered by (degree, parts).

    Precomputes, for every partition, its sub-multisets (what an
    annihilation exponential can remove) with their index and removal
    vector; vertex applications then become two dense matrix factors.
    """

    def __init__(self, params: QParams, max_degree: int):
        self.params = params
        self.max_degree = max_degree
        self.states: list[tuple[int, ...]] = []
        for d in range(max_degree + 1):
            self.states.extend(sorted(partitions_of(d)))
        self.index = {lam: i for i, lam in enumerate(self.states)}
        self.size = len(self.states)
        self.degrees = np.array([sum(lam) for lam in self.states], dtype=np.int64)
        self.cn = np.array(
            [0.0]
            + [mode_commutator(n, -n, params) for n in range(1, max_degree + 1)]
        )
        # subsets[i] = list of (sub_index, ((mode, count), ...)) for each
        # way of removing a sub-multiset from state i.
        self.subsets: list[list[tuple[int, tuple[tuple[int, int], ...]]]] = []
        for lam in self.states:
            mult = sorted(_multiplicities(lam).items())
            entry = []
            ranges = [range(m + 1) for _, m in mult]
            for combo in itertools.product(*ranges):
                removed = tuple(
                    (n, j) for (n, _), j in zip(mult, combo) if j > 0
                )
                sub = []
                for (n, m), j in zip(mult, combo):
                    sub.extend([n] * (m - j))
                sub_t = tuple(sorted(sub, reverse=True))
                entry.append((self.index[sub_t], removed))
            self.subsets.append(entry)
        self._stripe_cache: dict[int, np.ndarray] = {}

    def degree_mask(self, d: int) -> np.ndarray:
        """Boolean mask of entries with deg(bra) - deg(ket) = d."""
        if d not in self._stripe_cache:
            diff = self.degrees[:, None] - self.degrees[None, :]
            self._stripe_cache[d] = diff == d
        return self._stripe_cache[d]

    def corner_mask(self, cap: int) -> np.ndarray:
        keep = self.degrees <= cap
        return keep[:, None] & keep[None, :]

    def application_matrix(
        self, vertex: NormalOrderedVertex, momentum: float
    ) -> np.ndarray:
        """Matrix M with X(z)|momentum, lam> = sum_mu M[mu,lam]
        z^{(deg mu - deg lam) + h0_power*momentum}
        |momentum + charge/2, mu>.

        Exact on the truncated basis: the annihilation exponential
        cannot leave it, and creation beyond max_degree is dropped
        (callers size the basis so dropped states never matter for the
        compared corner).
        """
        D = self.max_degree
        ann_coeff = np.array([0.0] + [vertex.mode_rule(n) for n in range(1, D + 1)])
        cre_coeff = np.array([0.0] + [vertex.mode_rule(-n) for n in range(1, D + 1)])
        size = self.size
        ann = np.zeros((size, size))
        cre = np.zeros((size, size))
        for i, entry in enumerate(self.subsets):
            mult = _multiplicities(self.states[i])
            for sub_idx, removed in entry:
                w_ann = 1.0
                w_cre = 1.0
                for n, j in removed:
                    a = ann_coeff[n] * self.cn[n]
                    w_ann *= math.comb(mult[n], j) * a**j
                    w_cre *= cre_coeff[n] ** j / math.factorial(j)
                ann[sub_idx, i] = w_ann
                cre[i, sub_idx] = w_cre
        return vertex.zero_mode_factor(momentum) * (cre @ ann)


def matrix_element(
    op: NormalOrderedVertex | OperatorProduct,
    bra: FockState,
    ket: FockState,
    basis: PartitionBasis,
) -> CoeffTable:
    """<bra| op |ket> as a monomial table in the operator's variable.

    Handles a single vertex (or an empty product, the identity).  The
    pairing includes the Gram norm of the bra state.  Charge imbalance
    returns the identically-zero table.
    """
    if isinstance(op, OperatorProduct):
        if not op.factors:
            val = inner_product(bra, ket, basis.params)
            return CoeffTable(entries={0: val} if val else {})
        if len(op.factors) == 1:
            return matrix_element(op.factors[0][0], bra, ket, basis)
        raise QVirasoroError(
            "matrix_element handles single-vertex products; identity "
            "checkers assemble multi-factor tables directly"
        )
    if max(bra.degree, ket.degree) > basis.max_degree:
        raise TruncationError("state degree exceeds the basis window")
    if abs(bra.momentum - (ket.momentum + op.momentum_shift())) > MOMENTUM_TOL:
        return CoeffTable(entries={})
    mat = basis.application_matrix(op, ket.momentum)
    ib = basis.index[bra.partition]
    ik = basis.index[ket.partition]
    val = gram_norm(bra.partition, basis.params) * mat[ib, ik]
    key = bra.degree - ket.degree
    return CoeffTable(
        entries={key: val}, offset=op.h0_power * ket.momentum, var="z"
    )


def series_of_table(table: CoeffTable, order: int) -> Series:
    """Nonnegative-key part of a table as a Series (for tests)."""
    c = np.zeros(order + 1)
    for k, v in table.entries.items():
        if 0 <= k <= order:
            c[k] = v
    return Series(c)

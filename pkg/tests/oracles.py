"""Brute-force reference implementations used only by the tests.

Everything here recomputes quantities from first principles — explicit
word reordering for oscillator amplitudes and truncated multinomial
expansion of vertex exponentials — independently of the library's
matrix engine, so the results can serve as oracles.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement


def structure_constant(n: int, params) -> float:
    """[h_n, h_{-n}] for n > 0, written straight from the definition."""
    q, t, p = params.q, params.t, params.p
    return (
        (q ** (n / 2.0) - q ** (-n / 2.0))
        * (t ** (n / 2.0) - t ** (-n / 2.0))
        / ((p ** (n / 2.0) + p ** (-n / 2.0)) * n)
    )


class WordEngine:
    """Vacuum amplitudes of oscillator words by repeated commutation.

    A word is a tuple of nonzero integers, positive = annihilation
    mode h_n, negative = creation mode h_{-n}, read left to right as
    operators applied to the vacuum on the right.
    """

    def __init__(self, params):
        self.params = params
        self._c = {}
        self._memo = {}

    def c(self, n: int) -> float:
        if n not in self._c:
            self._c[n] = structure_constant(n, self.params)
        return self._c[n]

    def amplitude(self, word: tuple[int, ...]) -> float:
        memo = self._memo
        if word in memo:
            return memo[word]
        val = self._amplitude(word)
        memo[word] = val
        return val

    def _amplitude(self, word: tuple[int, ...]) -> float:
        if not word:
            return 1.0
        for i in range(len(word) - 1):
            if word[i] > 0 and word[i + 1] < 0:
                swapped = word[:i] + (word[i + 1], word[i]) + word[i + 2 :]
                out = self.amplitude(swapped)
                if word[i] + word[i + 1] == 0:
                    out += self.c(word[i]) * self.amplitude(
                        word[:i] + word[i + 2 :]
                    )
                return out
        # normal ordered: any annihilator kills |0>, any creator kills <0|
        return 0.0

    def inner_product(self, bra: tuple[int, ...], ket: tuple[int, ...]) -> float:
        word = tuple(+m for m in bra) + tuple(-m for m in ket)
        return self.amplitude(word)


def _mode_multisets(max_degree: int):
    """All multisets of positive modes with total degree <= max_degree,
    as (modes_tuple, degree, symmetry_factor 1/prod(mult!))."""
    out = [((), 0, 1.0)]
    for d in range(1, max_degree + 1):
        for parts in _partitions(d):
            mult = {}
            for p in parts:
                mult[p] = mult.get(p, 0) + 1
            sym = 1.0
            for m in mult.values():
                sym /= math.factorial(m)
            out.append((parts, d, sym))
    return out


def _partitions(n: int, max_part: int | None = None):
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def vertex_table(vertex, momentum, bra, ket, engine, max_degree):
    """Coefficient table of <bra| X(w) |ket> by expanding the two
    exponentials of the vertex as truncated multinomial sums and
    reordering the resulting words.

    ``bra``/``ket`` are partitions (tuples of positive mode labels);
    the zero-mode scalars are taken from the vertex data, which is what
    the matrix engine under test also consumes — the oscillator
    combinatorics is the independent part.
    """
    rule = vertex.mode_rule
    scalar = vertex.zero_mode_factor(momentum)  # includes the vertex scalar
    table: dict[int, float] = {}
    for neg, d_neg, sym_neg in _mode_multisets(max_degree):
        w_neg = sym_neg
        for n in neg:
            w_neg *= rule(-n)
        if w_neg == 0.0:
            continue
        for pos, d_pos, sym_pos in _mode_multisets(max_degree):
            w_pos = sym_pos
            for n in pos:
                w_pos *= rule(n)
            if w_pos == 0.0:
                continue
            word = (
                tuple(+m for m in bra)
                + tuple(-n for n in neg)
                + tuple(+n for n in pos)
                + tuple(-m for m in ket)
            )
            amp = engine.amplitude(word)
            if amp == 0.0:
                continue
            key = d_neg - d_pos
            table[key] = table.get(key, 0.0) + scalar * w_neg * w_pos * amp
    return {k: v for k, v in table.items() if v != 0.0}

"""Deformed-current vertex operators and their structure functions.

Constructors return :class:`~qvirasoro.fock.NormalOrderedVertex` data for

* the two current branches  Lambda^{+-}(z)  (the deformed stress current
  is their sum),
* the two screening currents  S^{+-}(z),
* the primary-field vertices  V_{ell+1,k+1}(z)  with one or both labels
  positive,

together with the scalar structure functions that control their
exchange relations:

* ``current`` — the kernel f(x) weighting the current-current relation,
* ``exchange`` — the kernel g(x) weighting a current-vertex exchange,
* ``exchange-dual`` — the kernel that inverts the current-vertex
  contraction (it multiplies the contraction series to exactly 1).

Structure functions are handled two ways: as truncated power series
(exact coefficient arithmetic) and as convergent infinite products
(valid beyond the series radius, with exact detection of zeros).  The
product form is what makes support evaluation at a delta-function
lattice point well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, PoleError, QVirasoroError
from .fock import NormalOrderedVertex, OperatorProduct, OperatorSum, merge_vertices
from .qspecial import QParams, ZERO_SNAP
from .series import Series, from_log_rule

__all__ = [
    "build_lambda",
    "build_current",
    "build_screening",
    "build_vertex",
    "theta_conjugate",
    "omega_conjugate",
    "ContractionFactor",
    "contract",
    "normal_order",
    "StructureFunctionSpec",
    "structure_log_rule",
    "structure_series",
    "ProductForm",
    "current_vertex_factor",
    "mirror_vertex_factor",
    "exchange_dual_product",
    "pair_correlation_log_rule",
    "pair_correlation_factor",
]


# ---------------------------------------------------------------------------
# Operator constructors


def build_lambda(sign: int, params: QParams) -> NormalOrderedVertex:
    """One branch of the deformed stress current:

    Lambda^{+}(z) = :exp( sum_{n!=0} p^{n/2} h_n z^{-n} ): q^{sqrt(b) h_0} p^{1/2}
    and Lambda^{-} its image under either involution (p -> 1/p
    throughout, base and scalar inverted, modes negated).
    """
    if sign not in (+1, -1):
        raise QVirasoroError("sign must be +1 or -1")
    p = params.p
    sb = params.sqrt_beta
    if sign == +1:
        return NormalOrderedVertex(
            label="lambda+",
            params=params,
            mode_rule=lambda n: p ** (n / 2.0),
            charge=0.0,
            h0_base=params.q**sb,
            h0_power=0.0,
            scalar=p**0.5,
        )
    return NormalOrderedVertex(
        label="lambda-",
        params=params,
        mode_rule=lambda n: -(p ** (-n / 2.0)),
        charge=0.0,
        h0_base=params.q ** (-sb),
        h0_power=0.0,
        scalar=p**-0.5,
    )


def build_current(params: QParams) -> OperatorSum:
    """The deformed stress current T(z) = Lambda^+(z) + Lambda^-(z)."""
    return OperatorSum(
        label="current", terms=[build_lambda(+1, params), build_lambda(-1, params)]
    )


def build_screening(sign: int, params: QParams) -> NormalOrderedVertex:
    """Screening currents.  S^+ commutes with the current up to a total
    q-difference; S^- is its mirror image (q <-> t)."""
    if sign not in (+1, -1):
        raise QVirasoroError("sign must be +1 or -1")
    p = params.p
    sb = params.sqrt_beta
    if sign == +1:

        def rule(n: int) -> float:
            h = n / 2.0
            return -(p**h + p**-h) / (params.q**h - params.q**-h)

        return NormalOrderedVertex(
            label="screening+",
            params=params,
            mode_rule=rule,
            charge=2.0 * sb,
            h0_base=1.0,
            h0_power=2.0 * sb,
            scalar=1.0,
        )

    def rule_m(n: int) -> float:
        h = n / 2.0
        return (p**h + p**-h) / (params.t**h - params.t**-h)

    return NormalOrderedVertex(
        label="screening-",
        params=params,
        mode_rule=rule_m,
        charge=-2.0 / sb,
        h0_base=1.0,
        h0_power=-2.0 / sb,
        scalar=1.0,
    )


def _vertex_first_kind(ell: int, params: QParams) -> NormalOrderedVertex:
    sb = params.sqrt_beta

    def rule(n: int) -> float:
        h = n / (2.0 * ell)
        return 1.0 / (params.q**h - params.q**-h)

    return NormalOrderedVertex(
        label=f"vertex[{ell + 1},1]",
        params=params,
        mode_rule=rule,
        charge=-ell * sb,
        h0_base=1.0,
        h0_power=-ell * sb,
        scalar=1.0,
    )


def _vertex_second_kind(k: int, params: QParams) -> NormalOrderedVertex:
    sb = params.sqrt_beta

    def rule(n: int) -> float:
        h = n / (2.0 * k)
        return -1.0 / (params.t**h - params.t**-h)

    return NormalOrderedVertex(
        label=f"vertex[1,{k + 1}]",
        params=params,
        mode_rule=rule,
        charge=k / sb,
        h0_base=1.0,
        h0_power=k / sb,
        scalar=1.0,
    )


def build_vertex(ell: int, k: int, params: QParams) -> NormalOrderedVertex:
    """Primary-field vertex V_{ell+1,k+1}(z).

    The two elementary families are (ell,0) and (0,k); the general label
    is the normal-ordered product of one of each, which at the data
    level is a field-wise merge.  Both labels zero is not a vertex.
    """
    if ell < 0 or k < 0 or (ell == 0 and k == 0):
        raise QVirasoroError(
            "vertex labels need ell >= 0, k >= 0 and at least one positive"
        )
    if k == 0:
        return _vertex_first_kind(ell, params)
    if ell == 0:
        return _vertex_second_kind(k, params)
    merged = merge_vertices(
        [_vertex_first_kind(ell, params), _vertex_second_kind(k, params)],
        label=f"vertex[{ell + 1},{k + 1}]",
    )
    return merged


Builder = Callable[[QParams], NormalOrderedVertex]


def theta_conjugate(build: Builder, params: QParams) -> NormalOrderedVertex:
    """Image of a constructor under the involution that inverts both
    parameters and negates the nonzero modes (zero modes fixed).

    The returned vertex acts on the original-parameter Fock space.
    """
    w = build(params.theta_image())
    return NormalOrderedVertex(
        label=f"theta({w.label})",
        params=params,
        mode_rule=lambda n, _r=w.mode_rule: -_r(n),
        charge=w.charge,
        h0_base=w.h0_base,
        h0_power=w.h0_power,
        scalar=w.scalar,
    )


def omega_conjugate(build: Builder, params: QParams) -> NormalOrderedVertex:
    """Image under the involution that swaps the two parameters and
    negates every mode including the zero modes."""
    w = build(params.omega_image())
    return NormalOrderedVertex(
        label=f"omega({w.label})",
        params=params,
        mode_rule=lambda n, _r=w.mode_rule: -_r(n),
        charge=-w.charge,
        h0_base=1.0 / w.h0_base,
        h0_power=-w.h0_power,
        scalar=w.scalar,
    )


# ---------------------------------------------------------------------------
# Contraction of two vertices


@dataclass
class ContractionFactor:
    """Scalar factor produced by normal-ordering X(var1) Y(var2):

        X(var1) Y(var2) = factor * :X(var1) Y(var2):

    factor = scalar * var1^{first_var_power} * series(var2/var1).
    """

    series: Series
    first_var_power: float
    scalar: float
    log_rule: Callable[[int], float]

    def value(self, ratio: float) -> float:
        return self.scalar * float(
            np.polyval(self.series.c[::-1], ratio)
        )


def contract(
    x: NormalOrderedVertex, y: NormalOrderedVertex, order: int
) -> ContractionFactor:
    """Normal-ordering factor for the ordered product X(var1) Y(var2).

    The oscillator part is exp(sum_{n>0} A_X(n) A_Y(-n) c_n r^n) with
    r = var2/var1; the zero modes contribute B_X^{alpha_Y/2} and
    var1^{h0power_X * alpha_Y / 2}.
    """
    params = x.params
    from .fock import mode_commutator

    def log_coeff(n: int) -> float:
        return x.mode_rule(n) * y.mode_rule(-n) * mode_commutator(n, -n, params)

    return ContractionFactor(
        series=from_log_rule(log_coeff, order),
        first_var_power=x.h0_power * y.charge / 2.0,
        scalar=x.h0_base ** (y.charge / 2.0),
        log_rule=log_coeff,
    )


def normal_order(
    factors: Sequence[NormalOrderedVertex], label: str | None = None
) -> OperatorProduct:
    """Normal-ordered product of vertices at one shared argument.

    Under the normal-product convention no contraction scalars arise;
    the result is the field-wise merge of the factor data.
    """
    merged = merge_vertices(list(factors), label=label)
    return OperatorProduct(
        factors=[(f, "z") for f in factors], merged=merged, contractions=[]
    )


# ---------------------------------------------------------------------------
# Structure functions


@dataclass(frozen=True)
class StructureFunctionSpec:
    """Names a structure function: ``current`` (the f-kernel of the
    current-current relation), ``exchange`` (the g-kernel of the
    current-vertex relation for V_{ell+1,k+1}) or ``exchange-dual``
    (the kernel inverting the current-vertex contraction)."""

    kind: str
    ell: int = 0
    k: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("current", "exchange", "exchange-dual"):
            raise QVirasoroError(f"unknown structure function kind {self.kind!r}")
        if self.kind != "current" and (
            self.ell < 0 or self.k < 0 or (self.ell == 0 and self.k == 0)
        ):
            raise QVirasoroError("exchange kernels need a valid vertex label")


def _eta(n: int, params: QParams) -> float:
    h = n / 2.0
    return (params.q**h - params.q**-h) * (params.t**h - params.t**-h)


def _current_log(n: int, params: QParams) -> float:
    h = n / 2.0
    return -_eta(n, params) / (params.p**h + params.p**-h) / n


def _exchange_log_first(n: int, ell: int, params: QParams) -> float:
    q, t, p = params.q, params.t, params.p
    h = n / 2.0
    d = q ** (n / (2.0 * ell)) - q ** (-n / (2.0 * ell))
    term1 = -(t**n - t**-n) / (d * (p**h + p**-h))
    term2 = (p**-h * q ** (n / ell) - p**h * q ** (-n / ell)) / d
    return (term1 + term2) / n


def _exchange_dual_log_first(n: int, ell: int, params: QParams) -> float:
    q, p = params.q, params.p
    h = n / 2.0
    d = q ** (n / (2.0 * ell)) - q ** (-n / (2.0 * ell))
    return -(p**-h) * _eta(n, params) / (d * (p**h + p**-h)) / n


def structure_log_rule(
    spec: StructureFunctionSpec, params: QParams
) -> Callable[[int], float]:
    """log-series coefficient rule: the function equals
    exp( sum_{n>=1} rule(n) x^n )."""
    if spec.kind == "current":
        return lambda n: _current_log(n, params)
    ell, k = spec.ell, spec.k
    if spec.kind == "exchange":
        # second-kind labels are the mirror (parameter-swap) images
        swapped = params.omega_image()
        if k == 0:
            return lambda n: _exchange_log_first(n, ell, params)
        if ell == 0:
            return lambda n: _exchange_log_first(n, k, swapped)
        return lambda n: (
            _exchange_log_first(n, ell, params)
            + _exchange_log_first(n, k, swapped)
        )
    # exchange-dual: second-kind labels are the (theta o omega)-images,
    # i.e. the first-kind rule at (1/t, 1/q).
    dual_params = QParams(1.0 / params.t, 1.0 / params.q, strict=False)
    if k == 0:
        return lambda n: _exchange_dual_log_first(n, ell, params)
    if ell == 0:
        return lambda n: _exchange_dual_log_first(n, k, dual_params)
    return lambda n: (
        _exchange_dual_log_first(n, ell, params)
        + _exchange_dual_log_first(n, k, dual_params)
    )


def structure_series(
    spec: StructureFunctionSpec, params: QParams, order: int
) -> Series:
    return from_log_rule(structure_log_rule(spec, params), order)


# ---------------------------------------------------------------------------
# Convergent product forms
#
# Each analytic kernel here has log-coefficients of the shape
#     rule(n) = (1/n) * prod_i ( sum_j w_{ij} c_{ij}^n )
# with every inner sum a finite or geometric family.  Expanding the
# product termwise turns exp(sum_n rule(n) x^n) into
#     prod_tuples (1 - (prod_i c_i) x)^(-prod_i w_i),
# an infinite product converging wherever the coefficient lattice does
# — in particular across the power-series radius, which is what lets a
# kernel be evaluated *at* a delta-support point.


@dataclass
class ProductForm:
    """A finite truncation of prod (1 - C_i x)^{W_i} (weights integer)."""

    coeffs: np.ndarray
    weights: np.ndarray

    def factor_index_at_zero(self, x: float, tol: float = 1e-9) -> int | None:
        """Index of a factor vanishing at x (None if no factor does)."""
        hits = np.nonzero(np.abs(1.0 - self.coeffs * x) < tol)[0]
        return int(hits[0]) if hits.size else None

    def drop(self, index: int) -> "ProductForm":
        keep = np.ones(len(self.coeffs), dtype=bool)
        keep[index] = False
        return ProductForm(self.coeffs[keep], self.weights[keep])

    def value(self, x: float) -> float:
        g = 1.0 - self.coeffs * x
        small = np.abs(g) < ZERO_SNAP
        if np.any(small):
            w = self.weights[small]
            if np.any(w < 0):
                raise PoleError(f"product form has a pole at x={x!r}")
            return 0.0
        log_mag = float(np.dot(self.weights, np.log(np.abs(g))))
        neg = g < 0.0
        sign = -1.0 if (int(self.weights[neg].sum()) % 2) else 1.0
        return sign * math.exp(log_mag)


def _family_eta(params: QParams) -> list[tuple[int, float]]:
    q, t = params.q, params.t
    r = math.sqrt(q * t)
    return [(1, r), (-1, r / q), (-1, r / t), (1, r / (q * t))]


def _family_inv_diff(y: float, L: int, cut: float) -> list[tuple[int, float]]:
    """1/(y^{n/2L} - y^{-n/2L}) = sign * sum_j (y^{dir(2j+1)/2L})^n."""
    if y < 1.0:
        sign, step = -1, y ** (1.0 / L)
        c = y ** (1.0 / (2.0 * L))
    else:
        sign, step = 1, y ** (-1.0 / L)
        c = y ** (-1.0 / (2.0 * L))
    out = []
    while abs(c) > cut:
        out.append((sign, c))
        c *= step
        if len(out) > 100000:
            raise ConvergenceError("geometric family failed to decay")
    return out


def _family_inv_diff_squared(y: float, L: int, cut: float) -> list[tuple[int, float]]:
    """1/(y^{n/2L} - y^{-n/2L})^2 = sum_{m>=1} m (y^{±1/L})^{nm}."""
    step = y ** (1.0 / L) if y < 1.0 else y ** (-1.0 / L)
    out = []
    c, m = step, 1
    while m * abs(c) > cut or m < 3:
        out.append((m, c))
        c *= step
        m += 1
        if m > 200000:
            raise ConvergenceError("squared geometric family failed to decay")
    return out


def _family_inv_p_sum(p: float, cut: float, extra_half_power: int) -> list[tuple[int, float]]:
    """p^{n*extra_half_power/2} / (p^{n/2} + p^{-n/2}) as an alternating
    geometric family.  extra_half_power in {-1, 0, +1}."""
    if p < 1.0:
        # p^{e/2}/(p^{1/2}+p^{-1/2}) = p^{(e+1)/2} * 1/(1+p) per mode
        c0 = p ** ((extra_half_power + 1) / 2.0)
        step = p
    else:
        c0 = p ** ((extra_half_power - 1) / 2.0)
        step = 1.0 / p
    out = []
    c, s = c0, 1
    while abs(c) > cut:
        out.append((s, c))
        c *= step
        s = -s
        if len(out) > 100000:
            raise ConvergenceError("alternating family failed to decay")
    return out


def _expand(
    families: list[list[tuple[int, float]]], overall_sign: int
) -> ProductForm:
    """Cartesian-expand families into (1-Cx)^W factors.

    The kernel is exp( overall_sign * sum_n (1/n) prod_i fam_i(n) x^n ),
    so each tuple contributes weight -overall_sign * prod w_i.
    """
    coeffs = np.array([1.0])
    weights = np.array([1], dtype=np.int64)
    for fam in families:
        w = np.array([e[0] for e in fam], dtype=np.int64)
        c = np.array([e[1] for e in fam])
        coeffs = np.multiply.outer(coeffs, c).ravel()
        weights = np.multiply.outer(weights, w).ravel()
    return ProductForm(coeffs=coeffs, weights=-overall_sign * weights)


_CUT = 1e-22


def current_vertex_factor(ell: int, params: QParams) -> ProductForm:
    """Product form of exp( - sum (1/n) eta_n x^n / (q^{n/2l}-q^{-n/2l}) ):
    the support-evaluable part of the current-vertex contraction built
    from the Lambda^- branch against a first-kind vertex.

    Carries the exact zero at x = p^{1/2} q^{-1/(2 ell)}.
    """
    fams = [_family_eta(params), _family_inv_diff(params.q, ell, _CUT)]
    return _expand(fams, overall_sign=-1)


def mirror_vertex_factor(k: int, params: QParams) -> ProductForm:
    """Mirror companion: exp( + sum (1/n) eta_n x^n / (t^{n/2k}-t^{-n/2k}) )."""
    fams = [_family_eta(params), _family_inv_diff(params.t, k, _CUT)]
    return _expand(fams, overall_sign=+1)


def exchange_dual_product(ell: int, k: int, params: QParams) -> ProductForm:
    """Product form of the exchange-dual kernel (valid past its series
    radius)."""
    forms = []
    if ell > 0:
        fams = [
            _family_eta(params),
            _family_inv_diff(params.q, ell, _CUT),
            _family_inv_p_sum(params.p, _CUT, extra_half_power=-1),
        ]
        forms.append(_expand(fams, overall_sign=-1))
    if k > 0:
        dual = QParams(1.0 / params.t, 1.0 / params.q, strict=False)
        fams = [
            _family_eta(dual),
            _family_inv_diff(dual.q, k, _CUT),
            _family_inv_p_sum(dual.p, _CUT, extra_half_power=-1),
        ]
        forms.append(_expand(fams, overall_sign=-1))
    if not forms:
        raise QVirasoroError("exchange-dual kernel needs a valid vertex label")
    if len(forms) == 1:
        return forms[0]
    return ProductForm(
        coeffs=np.concatenate([f.coeffs for f in forms]),
        weights=np.concatenate([f.weights for f in forms]),
    )


def pair_correlation_log_rule(ell: int, params: QParams) -> Callable[[int], float]:
    """log-coefficients of the oscillator part of the radial-ordering
    scalar of two first-kind vertices:  the scalar is
    z^{ell^2 beta / 2} exp( sum_{n>=1} rule(n) (w/z)^n )."""
    if ell < 1:
        raise QVirasoroError("pair correlation needs a first-kind label >= 1")
    q, p = params.q, params.p

    def rule(n: int) -> float:
        h = n / 2.0
        d = q ** (n / (2.0 * ell)) - q ** (-n / (2.0 * ell))
        return -_eta(n, params) / (d * d * (p**h + p**-h)) / n

    return rule


def pair_correlation_factor(ell: int, params: QParams) -> ProductForm:
    """Product form of the oscillator part of the two-vertex scalar,
    convergent past the power-series radius (the continuation used on
    swapped argument order)."""
    if ell < 1:
        raise QVirasoroError("pair correlation needs a first-kind label >= 1")
    fams = [
        _family_eta(params),
        _family_inv_diff_squared(params.q, ell, _CUT),
        _family_inv_p_sum(params.p, _CUT, extra_half_power=0),
    ]
    return _expand(fams, overall_sign=-1)

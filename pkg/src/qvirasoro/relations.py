"""Exact verification of operator identities on truncated Fock modules.

Every checker turns both sides of an operator identity in two formal
variables (z for the current insertion, w for the vertex) into finite
matrices on a degree-truncated partition basis, one matrix per
"key" — the w-exponent relative to the momentum-dependent offset.  For
an entry with bra degree d_mu and ket degree d_lambda the z-exponent is
determined by the key, so matching keys matches complete monomials.

Truncation is exact, not approximate: on the compared corner
(bra and ket degree <= degree_cap) every intermediate state that can
contribute has degree at most degree_cap + mode_window + |P| where P is
the monomial twist exponent of the reversed product, so sizing the
internal basis to that bound reproduces the true coefficients to
rounding.  Residuals at the floor (~1e-13) therefore mean the identity
holds exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import QVirasoroError
from .fock import (
    OperatorSum,
    PartitionBasis,
    merge_vertices,
    vertex_data_distance,
)
from .qspecial import QParams
from .report import CheckReport
from .series import check_delta_comb
from .voa import (
    StructureFunctionSpec,
    build_current,
    build_lambda,
    build_screening,
    build_vertex,
    contract,
    current_vertex_factor,
    mirror_vertex_factor,
    structure_series,
    theta_conjugate,
)

__all__ = [
    "check_defining_relation",
    "check_screening_relation",
    "check_vertex_exchange",
    "check_current_vertex_exchange",
    "check_adjoint_shift",
    "check_exchange_rewrite",
    "check_composite_exchange",
    "check_fusion",
    "check_argument_shift",
    "check_delta_identity",
    "check_qspecial",
]


# ---------------------------------------------------------------------------
# Table assembly


def _app(basis: PartitionBasis, op, momentum: float) -> np.ndarray:
    if isinstance(op, OperatorSum):
        return sum(basis.application_matrix(v, momentum) for v in op.terms)
    return basis.application_matrix(op, momentum)


def _stripe(basis: PartitionBasis, mat: np.ndarray, d: int) -> np.ndarray:
    return np.where(basis.degree_mask(d), mat, 0.0)


def _exchange_tables(
    basis: PartitionBasis,
    x_left: np.ndarray,
    x_right: np.ndarray,
    y_app: np.ndarray,
    g: np.ndarray,
    keys: range,
    twist: int,
    arg_scale: float = 1.0,
):
    """Tables of  g(w/z) X(z) Y(w)  and  Y(w) X(z) (-z/w)^twist g(z/w).

    x_left is X applied after Y (shifted momentum), x_right before.
    ``arg_scale`` is the numeric value of w baked into ``y_app``; the
    kernel arguments w/z and z/w pick up matching powers of it.
    """
    D = basis.max_degree
    left = {d: x_left @ _stripe(basis, y_app, d) for d in range(-D, D + 1)}
    right = {d: _stripe(basis, y_app, d) @ x_right for d in range(-D, D + 1)}
    sign = (-1.0) ** twist * arg_scale ** (-twist)
    t1, t2 = {}, {}
    for k in keys:
        acc1 = np.zeros_like(y_app)
        for s in range(0, k + D + 1):
            d = k - s
            if d < -D:
                break
            if s >= len(g):
                raise QVirasoroError("structure series too short for window")
            acc1 += g[s] * arg_scale**s * left[d]
        acc2 = np.zeros_like(y_app)
        for s in range(0, D - k - twist + 1):
            d = k + twist + s
            if d > D:
                break
            if -D <= d:
                if s >= len(g):
                    raise QVirasoroError("structure series too short for window")
                acc2 += g[s] * arg_scale**-s * right[d]
        t1[k] = acc1
        t2[k] = sign * acc2
    return t1, t2


def _delta_conjugate(basis: PartitionBasis, w_app: np.ndarray, c: float) -> np.ndarray:
    """Entrywise c^{-(deg bra - deg ket)} * W: the delta-function transfer
    of z-powers onto w-powers for a term K delta(c w/z) W(w)."""
    cd = c ** basis.degrees.astype(float)
    return (w_app * cd[None, :]) / cd[:, None]


def _table_residual(lhs: dict, rhs: dict, basis: PartitionBasis, cap: int):
    mask = basis.corner_mask(cap)
    worst, loc, scale = 0.0, "", 0.0
    zero = np.zeros_like(next(iter(lhs.values())))
    for k in sorted(set(lhs) | set(rhs)):
        a = lhs.get(k, zero)
        b = rhs.get(k, zero)
        scale = max(
            scale,
            float(np.max(np.abs(a) * mask)),
            float(np.max(np.abs(b) * mask)),
        )
        diff = np.abs(a - b) * mask
        m = float(diff.max())
        if m > worst:
            i, j = np.unravel_index(int(diff.argmax()), diff.shape)
            worst = m
            loc = f"key={k} bra={basis.states[i]} ket={basis.states[j]}"
    return worst, loc, scale


def _report(identity, residual, tolerance, loc, config, t0, notes=()):
    rep = CheckReport(
        identity=identity,
        residual=residual,
        tolerance=tolerance,
        worst_location=loc,
        config=config,
        runtime_ms=(time.perf_counter() - t0) * 1e3,
    )
    for n in notes:
        rep.add_note(n)
    return rep


# ---------------------------------------------------------------------------
# Current-current (defining) relation


def check_defining_relation(
    params: QParams,
    degree_cap: int = 5,
    max_mode: int = 3,
    momentum: float = 0.0,
    tolerance: float = 1e-8,
) -> CheckReport:
    """Mode form of the current-current relation: for all |n|,|m| within
    the window,

    sum_s f_s (T_{n-s} T_{m+s} - T_{m-s} T_{n+s})
        = -(q^{1/2}-q^{-1/2})(t^{1/2}-t^{-1/2})
          * (p^n - p^{-n})/(p^{1/2}-p^{-1/2}) * delta_{n+m,0} * Id,

    the central factor rewritten as the exact polynomial
    p^{1/2-n} (1 + p + ... + p^{2n-1}) so no limit is needed anywhere.
    """
    t0 = time.perf_counter()
    D = degree_cap + max_mode
    basis = PartitionBasis(params, D)
    t_tot = _app(basis, build_current(params), momentum)
    stripes = {d: _stripe(basis, t_tot, d) for d in range(-D, D + 1)}
    f = structure_series(
        StructureFunctionSpec("current"), params, 2 * D + 2
    ).c
    prod_cache: dict[tuple[int, int], np.ndarray] = {}

    def tt(a: int, b: int) -> np.ndarray:
        # T_a T_b with T_j = stripe(-j)
        key = (a, b)
        if key not in prod_cache:
            prod_cache[key] = stripes[-a] @ stripes[-b]
        return prod_cache[key]

    q, t, p = params.q, params.t, params.p
    eta1 = (q**0.5 - q**-0.5) * (t**0.5 - t**-0.5)

    def central(n: int) -> float:
        if n == 0:
            return 0.0
        if n < 0:
            return -central(-n)
        return -eta1 * p ** (0.5 - n) * sum(p**i for i in range(2 * n))

    mask = basis.corner_mask(degree_cap)
    ident = np.eye(basis.size)
    worst, loc = 0.0, ""
    for n in range(-max_mode, max_mode + 1):
        for m in range(-max_mode, max_mode + 1):
            acc = np.zeros((basis.size, basis.size))
            for s in range(0, min(D + n, D - m) + 1):
                acc += f[s] * tt(n - s, m + s)
            for s in range(0, min(D + m, D - n) + 1):
                acc -= f[s] * tt(m - s, n + s)
            rhs = central(n) * ident if n + m == 0 else 0.0 * ident
            diff = np.abs(acc - rhs) * mask
            val = float(diff.max())
            if val > worst:
                i, j = np.unravel_index(int(diff.argmax()), diff.shape)
                worst = val
                loc = f"n={n} m={m} bra={basis.states[i]} ket={basis.states[j]}"
    cfg = {
        "q": params.q,
        "t": params.t,
        "degree": degree_cap,
        "window": max_mode,
        "momentum": momentum,
    }
    return _report("defining-relation", worst, tolerance, loc, cfg, t0)


# ---------------------------------------------------------------------------
# Screening relation


def check_screening_relation(
    params: QParams,
    sign: int = +1,
    degree_cap: int = 4,
    window: int = 4,
    momentum: float = 0.0,
    tolerance: float = 1e-8,
) -> CheckReport:
    """[T(z), S(w)] equals a total q-difference of a delta-localized
    normal-ordered product; the difference operator acts per w-monomial
    as the exact multiplier (1 - base^{exponent})/(1 - base)."""
    t0 = time.perf_counter()
    D = degree_cap + window
    basis = PartitionBasis(params, D)
    scr = build_screening(sign, params)
    cur = build_current(params)
    m0 = momentum
    m1 = m0 + scr.momentum_shift()
    s_app = _app(basis, scr, m0)
    t_after = _app(basis, cur, m1)
    t_before = _app(basis, cur, m0)

    if sign == +1:
        base, other = params.q, params.t
        lam = build_lambda(-1, params)
    else:
        base, other = params.t, params.q
        lam = build_lambda(+1, params)
    c = base**-0.5
    w_vertex = merge_vertices([lam.at_scale(c), scr])
    w_conj = _delta_conjugate(basis, _app(basis, w_vertex, m0), c)
    prefactor = -(1.0 - 1.0 / other)

    lhs, rhs = {}, {}
    gamma_m = scr.h0_power * m0
    for k in range(-window, window + 1):
        sk = _stripe(basis, s_app, k)
        lhs[k] = t_after @ sk - sk @ t_before
        rhs[k] = (
            prefactor * (1.0 - base ** (1.0 + k + gamma_m)) * c**k * w_conj
        )
    worst, loc, _ = _table_residual(lhs, rhs, basis, degree_cap)
    cfg = {
        "q": params.q,
        "t": params.t,
        "sign": sign,
        "degree": degree_cap,
        "window": window,
        "momentum": momentum,
    }
    name = "screening" if sign == +1 else "screening-mirror"
    return _report(name, worst, tolerance, loc, cfg, t0)


# ---------------------------------------------------------------------------
# Current-branch / vertex exchange (single delta)


def _first_kind_constant(ell: int, params: QParams) -> float:
    q, t, p = params.q, params.t, params.p
    prod = math.prod(1.0 - t * q ** (-j / ell) for j in range(ell - 1))
    return p**0.5 * t ** (-ell / 2.0) * prod


def _exchange_setup(ell: int, params: QParams, variant: str):
    """Operators, kernel, constant, support and shift for the
    single-branch exchange relation and its two involution images."""
    q, t, p = params.q, params.t, params.p
    if variant == "plain":
        x = build_lambda(+1, params)
        y = build_vertex(ell, 0, params)
        g = StructureFunctionSpec("exchange", ell, 0), params
        K = _first_kind_constant(ell, params)
        c = p**0.5 * q ** (-1.0 / (2 * ell))
        xi = q ** (-1.0 / ell)
    elif variant == "theta":
        x = build_lambda(-1, params)
        y = theta_conjugate(lambda P: build_vertex(ell, 0, P), params)
        g = StructureFunctionSpec("exchange", ell, 0), params.theta_image()
        K = (
            p**-0.5
            * t ** (ell / 2.0)
            * math.prod(1.0 - q ** (j / ell) / t for j in range(ell - 1))
        )
        c = p**-0.5 * q ** (1.0 / (2 * ell))
        xi = q ** (1.0 / ell)
    elif variant == "mirror":
        x = build_lambda(-1, params)
        y = build_vertex(0, ell, params)
        g = StructureFunctionSpec("exchange", 0, ell), params
        K = (
            p**-0.5
            * q ** (-ell / 2.0)
            * math.prod(1.0 - q * t ** (-j / ell) for j in range(ell - 1))
        )
        c = p**-0.5 * t ** (-1.0 / (2 * ell))
        xi = t ** (-1.0 / ell)
    else:
        raise QVirasoroError(f"unknown exchange variant {variant!r}")
    return x, y, g, K, c, xi


def check_vertex_exchange(
    ell: int,
    params: QParams,
    variant: str = "plain",
    degree_cap: int = 4,
    window: int = 4,
    momentum: float = 0.0,
    tolerance: float = 1e-8,
) -> CheckReport:
    """Single current branch against a simple vertex: the weighted
    exchange combination collapses to one delta-localized shifted
    vertex."""
    t0 = time.perf_counter()
    twist = 2 - ell
    D = degree_cap + window + abs(twist)
    basis = PartitionBasis(params, D)
    x, y, (gspec, gparams), K, c, xi = _exchange_setup(ell, params, variant)
    g = structure_series(gspec, gparams, 2 * D + window + 2).c
    m0 = momentum
    y_app = _app(basis, y, m0)
    x_left = _app(basis, x, m0 + y.momentum_shift())
    x_right = _app(basis, x, m0)
    keys = range(-window, window + 1)
    t1, t2 = _exchange_tables(basis, x_left, x_right, y_app, g, keys, twist)
    shifted = _app(basis, y.at_scale(xi), m0)
    conj = _delta_conjugate(basis, shifted, c)
    lhs = {k: t1[k] - t2[k] for k in keys}
    rhs = {k: K * c**k * conj for k in keys}
    worst, loc, _ = _table_residual(lhs, rhs, basis, degree_cap)
    cfg = {
        "q": params.q,
        "t": params.t,
        "ell": ell,
        "variant": variant,
        "degree": degree_cap,
        "window": window,
        "momentum": momentum,
    }
    name = "vertex-exchange" if variant == "plain" else f"vertex-exchange-{variant}"
    return _report(name, worst, tolerance, loc, cfg, t0)


def check_current_vertex_exchange(
    ell: int,
    params: QParams,
    degree_cap: int = 4,
    window: int = 4,
    momentum: float = 0.0,
    tolerance: float = 1e-8,
) -> CheckReport:
    """Full current against a simple vertex: two delta terms, one per
    current branch, with square-root-balanced constants."""
    t0 = time.perf_counter()
    q, t, p = params.q, params.t, params.p
    twist = 2 - ell
    D = degree_cap + window + abs(twist)
    basis = PartitionBasis(params, D)
    y = build_vertex(ell, 0, params)
    cur = build_current(params)
    g = structure_series(
        StructureFunctionSpec("exchange", ell, 0), params, 2 * D + window + 2
    ).c
    m0 = momentum
    y_app = _app(basis, y, m0)
    x_left = _app(basis, cur, m0 + y.momentum_shift())
    x_right = _app(basis, cur, m0)
    keys = range(-window, window + 1)
    t1, t2 = _exchange_tables(basis, x_left, x_right, y_app, g, keys, twist)

    big_pi = math.prod(
        t**-0.5 * q ** (j / (2 * ell)) - t**0.5 * q ** (-j / (2 * ell))
        for j in range(ell - 1)
    )
    e4 = (ell - 1) * (ell - 2) / (4.0 * ell)
    coeff_down = p**0.5 * t**-0.5 * q**-e4
    coeff_up = (-1.0) ** ell * p**-0.5 * t**0.5 * q**e4
    c_down = p**0.5 * q ** (-1.0 / (2 * ell))
    c_up = p**-0.5 * q ** (1.0 / (2 * ell))
    conj_down = _delta_conjugate(
        basis, _app(basis, y.at_scale(q ** (-1.0 / ell)), m0), c_down
    )
    conj_up = _delta_conjugate(
        basis, _app(basis, y.at_scale(q ** (1.0 / ell)), m0), c_up
    )
    lhs = {k: t1[k] - t2[k] for k in keys}
    rhs = {
        k: big_pi
        * (coeff_down * c_down**k * conj_down - coeff_up * c_up**k * conj_up)
        for k in keys
    }
    worst, loc, _ = _table_residual(lhs, rhs, basis, degree_cap)
    cfg = {
        "q": params.q,
        "t": params.t,
        "ell": ell,
        "degree": degree_cap,
        "window": window,
        "momentum": momentum,
    }
    return _report("current-vertex-exchange", worst, tolerance, loc, cfg, t0)


# ---------------------------------------------------------------------------
# Adjoint mode action = shift operator


def check_adjoint_shift(
    ell: int,
    params: QParams,
    modes=(-2, -1, 0, 1, 2),
    degree_cap: int = 4,
    momentum: float = 0.0,
    tolerance: float = 1e-8,
    scale: float = 1.0,
) -> CheckReport:
    """The z^{-n}-mode of the weighted exchange combination acting on a
    simple vertex equals an explicit two-term argument-shift operator."""
    t0 = time.perf_counter()
    q, t, p = params.q, params.t, params.p
    twist = 2 - ell
    nmax = max(abs(int(n)) for n in modes)
    window = degree_cap + nmax
    D = degree_cap + window + abs(twist)
    basis = PartitionBasis(params, D)
    y = build_vertex(ell, 0, params).at_scale(scale) if scale != 1.0 else build_vertex(
        ell, 0, params
    )
    cur = build_current(params)
    g = structure_series(
        StructureFunctionSpec("exchange", ell, 0), params, 2 * D + window + 2
    ).c
    m0 = momentum
    y_app = _app(basis, y, m0)
    x_left = _app(basis, cur, m0 + y.momentum_shift())
    x_right = _app(basis, cur, m0)
    keys = range(-window, window + 1)
    t1, t2 = _exchange_tables(
        basis, x_left, x_right, y_app, g, keys, twist, arg_scale=scale
    )
    combo = {k: t1[k] - t2[k] for k in keys}

    big_pi = math.prod(
        t**-0.5 * q ** (j / (2 * ell)) - t**0.5 * q ** (-j / (2 * ell))
        for j in range(ell - 1)
    )
    v_down = _app(basis, y.at_scale(q ** (-1.0 / ell)), m0)
    v_up = _app(basis, y.at_scale(q ** (1.0 / ell)), m0)

    mask = basis.corner_mask(degree_cap)
    worst, loc = 0.0, ""
    deg_diff = basis.degrees[:, None] - basis.degrees[None, :]
    for n in modes:
        n = int(n)
        extracted = np.zeros((basis.size, basis.size))
        for k in keys:
            sel = deg_diff == (k - n)
            extracted = np.where(sel, combo[k], extracted)
        e = ((ell - 1) * (ell - 2) + 2 * n) / (4.0 * ell)
        a_n = p ** ((n + 1) / 2.0) * t**-0.5 * q**-e
        b_n = (-1.0) ** ell * p ** (-(n + 1) / 2.0) * t**0.5 * q**e
        rhs = big_pi * scale**n * (a_n * v_down - b_n * v_up)
        diff = np.abs(extracted - rhs) * mask
        val = float(diff.max())
        if val > worst:
            i, j = np.unravel_index(int(diff.argmax()), diff.shape)
            worst = val
            loc = f"mode={n} bra={basis.states[i]} ket={basis.states[j]}"
    cfg = {
        "q": params.q,
        "t": params.t,
        "ell": ell,
        "degree": degree_cap,
        "window": window,
        "momentum": momentum,
        "scale": scale,
    }
    return _report("adjoint-shift", worst, tolerance, loc, cfg, t0)


# ---------------------------------------------------------------------------
# Rewritten exchange (support-evaluated form)


def check_exchange_rewrite(
    ell: int,
    params: QParams,
    degree_cap: int = 4,
    window: int = 4,
    momentum: float = 0.0,
    tolerance: float = 1e-8,
) -> CheckReport:
    """The exchange relation rewritten through the dual kernel: the
    right-hand side is the delta-localized product of the vertex with
    the full current, weighted by the kernel that exactly inverts the
    plus-branch contraction.  Four ingredients are verified:

    (a) kernel * plus-branch contraction = 1 coefficient-wise;
    (b) the localized table equality (the delta support transfers the
        minus-branch weight to its product-form value, which vanishes);
    (c) that product-form value is exactly zero at the support;
    (d) dropping the vanishing factor leaves a finite nonzero value
        (the rewrite is well defined, not 0/0).
    """
    t0 = time.perf_counter()
    q, t, p = params.q, params.t, params.p
    order = 40
    dual = structure_series(
        StructureFunctionSpec("exchange-dual", ell, 0), params, order
    )
    y = build_vertex(ell, 0, params)
    lam_plus = build_lambda(+1, params)
    phi_plus = contract(y, lam_plus, order).series
    prod = dual * phi_plus
    unit = np.zeros(order + 1)
    unit[0] = 1.0
    res_a = float(np.max(np.abs(prod.c - unit)))

    c1 = p**0.5 * q ** (-1.0 / (2 * ell))
    pf = current_vertex_factor(ell, params)
    res_c = abs(pf.value(c1))
    idx = pf.factor_index_at_zero(c1)
    reduced = pf.drop(idx).value(c1) if idx is not None else float("nan")
    ok_d = math.isfinite(reduced) and abs(reduced) > 1e-6
    res_d = 0.0 if ok_d else float("inf")

    twist = 2 - ell
    D = degree_cap + window + abs(twist)
    basis = PartitionBasis(params, D)
    g = structure_series(
        StructureFunctionSpec("exchange", ell, 0), params, 2 * D + window + 2
    ).c
    m0 = momentum
    y_app = _app(basis, y, m0)
    x_left = _app(basis, lam_plus, m0 + y.momentum_shift())
    x_right = _app(basis, lam_plus, m0)
    keys = range(-window, window + 1)
    t1, t2 = _exchange_tables(basis, x_left, x_right, y_app, g, keys, twist)
    K2 = t ** (-ell / 2.0) * math.prod(
        1.0 - t * q ** (-j / ell) for j in range(ell - 1)
    )
    w_vertex = merge_vertices([y, lam_plus.at_scale(c1)])
    conj = _delta_conjugate(basis, _app(basis, w_vertex, m0), c1)
    lhs = {k: t1[k] - t2[k] for k in keys}
    rhs = {k: K2 * c1**k * conj for k in keys}
    res_b, loc, _ = _table_residual(lhs, rhs, basis, degree_cap)

    worst = max(res_a, res_b, res_c, res_d)
    cfg = {
        "q": params.q,
        "t": params.t,
        "ell": ell,
        "degree": degree_cap,
        "window": window,
        "momentum": momentum,
    }
    notes = [
        f"kernel-inverse residual {res_a:.3e}",
        f"support value {res_c:.3e} (exact zero expected)",
        f"reduced support value {reduced:.6g} (finite nonzero expected)",
    ]
    return _report(
        "exchange-rewrite", worst, tolerance, loc or "series", cfg, t0, notes
    )


# ---------------------------------------------------------------------------
# Composite vertex exchange (two deltas)


def check_composite_exchange(
    ell: int,
    k: int,
    params: QParams,
    degree_cap: int = 4,
    window: int = 4,
    momentum: float = 0.0,
    tolerance: float = 1e-8,
) -> CheckReport:
    """Plus branch against the composite vertex V_{ell+1,k+1}: the
    weighted exchange combination equals two delta-localized products
    of the vertex with the full current.  At each support the
    minus-branch transfer weight is the product-form value of the two
    elementary factors (computed, not assumed zero)."""
    if ell < 1 or k < 1:
        raise QVirasoroError("composite exchange needs both labels positive")
    t0 = time.perf_counter()
    q, t, p = params.q, params.t, params.p
    twist = 4 - ell - k
    D = degree_cap + window + abs(twist)
    basis = PartitionBasis(params, D)
    y = build_vertex(ell, k, params)
    lam_plus = build_lambda(+1, params)
    lam_minus = build_lambda(-1, params)
    g = structure_series(
        StructureFunctionSpec("exchange", ell, k), params, 2 * D + window + 2
    ).c
    m0 = momentum
    y_app = _app(basis, y, m0)
    x_left = _app(basis, lam_plus, m0 + y.momentum_shift())
    x_right = _app(basis, lam_plus, m0)
    keys = range(-window, window + 1)
    t1, t2 = _exchange_tables(basis, x_left, x_right, y_app, g, keys, twist)
    lhs = {kk: t1[kk] - t2[kk] for kk in keys}

    pref = q ** (k / 2.0) * t ** (-ell / 2.0)
    c1 = p**0.5 * q ** (-1.0 / (2 * ell))
    c2 = p**0.5 * t ** (1.0 / (2 * k))
    coeff1 = (
        1.0
        / (1.0 - q ** (1.0 / (2 * ell)) * t ** (1.0 / (2 * k)))
        * math.prod(1.0 - t * q ** (-i / ell) for i in range(ell - 1))
        * math.prod(
            1.0 - q ** (1.0 / (2 * ell) - 1.0) * t ** (1.0 / (2 * k) + j / k)
            for j in range(k - 1)
        )
    )
    coeff2 = (
        1.0
        / (1.0 - q ** (-1.0 / (2 * ell)) * t ** (-1.0 / (2 * k)))
        * math.prod(1.0 - t ** (j / k) / q for j in range(k - 1))
        * math.prod(
            1.0 - t ** (1.0 - 1.0 / (2 * k)) * q ** (-1.0 / (2 * ell) - i / ell)
            for i in range(ell - 1)
        )
    )
    f_ell = current_vertex_factor(ell, params)
    f_k = mirror_vertex_factor(k, params)
    rhs = {kk: np.zeros_like(y_app) for kk in keys}
    minus_weights = []
    for c_i, coeff_i in ((c1, coeff1), (c2, coeff2)):
        d_minus = f_ell.value(c_i) * f_k.value(c_i)
        minus_weights.append(d_minus)
        w_plus = _delta_conjugate(
            basis, _app(basis, merge_vertices([y, lam_plus.at_scale(c_i)]), m0), c_i
        )
        w_minus = _delta_conjugate(
            basis, _app(basis, merge_vertices([y, lam_minus.at_scale(c_i)]), m0), c_i
        )
        for kk in keys:
            rhs[kk] += pref * coeff_i * c_i**kk * (w_plus + d_minus * w_minus)
    worst, loc, _ = _table_residual(lhs, rhs, basis, degree_cap)
    cfg = {
        "q": params.q,
        "t": params.t,
        "ell": ell,
        "k": k,
        "degree": degree_cap,
        "window": window,
        "momentum": momentum,
    }
    notes = [
        f"minus-branch support weights {minus_weights[0]:.3e}, {minus_weights[1]:.3e}"
    ]
    return _report("composite-exchange", worst, tolerance, loc, cfg, t0, notes)


# ---------------------------------------------------------------------------
# Data-level identities (fusion, argument shift)


def check_fusion(
    ell: int, params: QParams, order: int = 24, tolerance: float = 1e-10
) -> CheckReport:
    """Simple vertices as normal-ordered products of the two fundamental
    ones on a geometric ladder of arguments (exact data equality)."""
    t0 = time.perf_counter()
    q, t = params.q, params.t
    worst = 0.0
    loc = ""
    for kind in ("first", "second"):
        base = q if kind == "first" else t
        elem = build_vertex(1, 0, params) if kind == "first" else build_vertex(
            0, 1, params
        )
        target = (
            build_vertex(ell, 0, params)
            if kind == "first"
            else build_vertex(0, ell, params)
        )
        factors = [
            elem.at_scale(base ** ((ell + 1 - 2 * j) / (2.0 * ell)))
            for j in range(1, ell + 1)
        ]
        fused = merge_vertices(factors)
        d = vertex_data_distance(fused, target, order)
        if d > worst:
            worst, loc = d, f"{kind}-kind ladder"
    cfg = {"q": params.q, "t": params.t, "ell": ell, "order": order}
    return _report("fusion", worst, tolerance, loc, cfg, t0)


def check_argument_shift(
    ell: int, params: QParams, order: int = 24, tolerance: float = 1e-10
) -> CheckReport:
    """V(q^{-1/ell} w) = p^{-1/2} :V(w) Lambda^+(p^{1/2} q^{-1/(2 ell)} w):
    as exact vertex-data equality."""
    t0 = time.perf_counter()
    q, p = params.q, params.p
    v = build_vertex(ell, 0, params)
    lhs = v.at_scale(q ** (-1.0 / ell))
    merged = merge_vertices([v, build_lambda(+1, params).at_scale(
        p**0.5 * q ** (-1.0 / (2 * ell))
    )])
    merged.scalar *= p**-0.5
    d = vertex_data_distance(lhs, merged, order)
    cfg = {"q": params.q, "t": params.t, "ell": ell, "order": order}
    return _report("argument-shift", d, tolerance, "vertex data", cfg, t0)


# ---------------------------------------------------------------------------
# Series delta identity and q-special self-checks


def check_delta_identity(
    rng: np.random.Generator,
    m_values=(1, 2, 3),
    window: int = 8,
    tolerance: float = 1e-10,
) -> CheckReport:
    """Bilateral comb identity behind every delta collapse: with
    F(x) = prod (1-r_i x)/(1-x), the two directional expansions differ
    by the constant prod (1-r_i) at every integer power."""
    t0 = time.perf_counter()
    worst, loc = 0.0, ""
    roots_used = []
    for m in m_values:
        rs = [float(v) for v in rng.uniform(0.05, 0.95, size=m)]
        roots_used.append([round(v, 6) for v in rs])
        res = check_delta_comb(rs, window)
        if res > worst:
            worst, loc = res, f"m={m}"
    cfg = {"window": window, "roots": repr(roots_used)}
    return _report("delta-identity", worst, tolerance, loc, cfg, t0)


def check_qspecial(tolerance: float = 1e-12) -> CheckReport:
    """Self-consistency of the q-special-function layer: binomial
    collapse of the basic hypergeometric sum, the q-gamma functional
    equation, theta quasi-periodicity and the unit Jackson integral."""
    from . import qspecial as qs

    t0 = time.perf_counter()
    worst, loc = 0.0, ""

    def track(val: float, where: str) -> None:
        nonlocal worst, loc
        if val > worst:
            worst, loc = val, where

    q = 0.6
    for a, z in ((0.3, 0.5), (0.85, -0.4), (1.7, 0.25)):
        lhs = qs.phi21(a, 0.9, 0.9, q, z)
        rhs = qs.qpoch_inf(a * z, q) / qs.qpoch_inf(z, q)
        track(abs(lhs - rhs) / abs(rhs), f"binomial a={a} z={z}")
    for q_ in (0.3, 0.6, 0.9):
        for x in (0.25, 0.5, 1.75, 2.5):
            lhs = qs.gamma_q(x + 1.0, q_)
            rhs = (1.0 - q_**x) / (1.0 - q_) * qs.gamma_q(x, q_)
            track(abs(lhs - rhs) / abs(rhs), f"gamma q={q_} x={x}")
    q_ = 0.55
    for i in range(10):
        z = 0.2 + 0.37 * i
        lhs = qs.theta_q(q_ * z, q_)
        rhs = -qs.theta_q(z, q_) / z
        track(abs(lhs - rhs) / max(abs(rhs), 1e-30), f"theta z={z:.2f}")
    val = qs.jackson_to(lambda _: 1.0, 1.0, 0.73)
    track(abs(val - 1.0), "jackson unit")
    cfg = {"tolerance": tolerance}
    return _report("qspecial", worst, tolerance, loc, cfg, t0)

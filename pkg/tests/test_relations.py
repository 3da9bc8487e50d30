"""Operator-identity checkers at generic parameter points and momenta."""

import numpy as np
import pytest

from qvirasoro.qspecial import QParams
from qvirasoro.relations import (
    check_adjoint_shift,
    check_argument_shift,
    check_composite_exchange,
    check_current_vertex_exchange,
    check_defining_relation,
    check_delta_identity,
    check_exchange_rewrite,
    check_fusion,
    check_qspecial,
    check_screening_relation,
    check_vertex_exchange,
)

P = QParams(0.7, 0.3)
P2 = QParams(0.6, 0.2)


def test_defining_relation_generic_momentum():
    rep = check_defining_relation(P, degree_cap=4, max_mode=2, momentum=0.37)
    assert rep.passed, rep.summary_line()
    assert rep.residual < 1e-10


def test_defining_relation_second_point():
    rep = check_defining_relation(P2, degree_cap=4, max_mode=2)
    assert rep.passed, rep.summary_line()


def test_defining_relation_fail_path():
    # unreachable tolerance exercises the failure branch end to end
    rep = check_defining_relation(P, degree_cap=3, max_mode=1, tolerance=1e-30)
    assert rep.status == "fail"
    assert not rep.passed


@pytest.mark.parametrize("sign", [+1, -1], ids=["S+", "S-"])
def test_screening_relation_generic_momentum(sign):
    rep = check_screening_relation(P, sign, degree_cap=3, window=3, momentum=0.4)
    assert rep.passed, rep.summary_line()


@pytest.mark.parametrize("variant", ["plain", "theta", "mirror"])
def test_vertex_exchange_variants(variant):
    rep = check_vertex_exchange(1, P, variant, degree_cap=3, window=3)
    assert rep.passed, rep.summary_line()


def test_vertex_exchange_higher_label_generic_momentum():
    rep = check_vertex_exchange(2, P, "plain", degree_cap=3, window=3, momentum=0.37)
    assert rep.passed, rep.summary_line()


def test_current_vertex_exchange():
    rep = check_current_vertex_exchange(1, P, degree_cap=3, window=3)
    assert rep.passed, rep.summary_line()


def test_adjoint_shift_with_modes_and_scale():
    rep = check_adjoint_shift(1, P, modes=(-1, 0, 1), degree_cap=3)
    assert rep.passed, rep.summary_line()
    # the identity is covariant under rescaling the vertex argument
    rep = check_adjoint_shift(1, P, modes=(-1, 0, 1), degree_cap=3, scale=1.3)
    assert rep.passed, rep.summary_line()


def test_exchange_rewrite_reports_all_ingredients():
    rep = check_exchange_rewrite(1, P, degree_cap=3, window=3)
    assert rep.passed, rep.summary_line()
    text = " ".join(rep.notes)
    assert "kernel-inverse" in text
    assert "support" in text


def test_composite_exchange_generic_momentum():
    rep = check_composite_exchange(1, 1, P, degree_cap=3, window=3, momentum=0.4)
    assert rep.passed, rep.summary_line()
    text = " ".join(rep.notes)
    # the minus-branch weights at the supports must vanish identically
    assert "0.000e+00" in text


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_fusion(ell):
    rep = check_fusion(ell, P)
    assert rep.passed, rep.summary_line()


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_argument_shift(ell):
    rep = check_argument_shift(ell, P)
    assert rep.passed, rep.summary_line()


def test_delta_identity_seeded():
    rng = np.random.default_rng(12345)
    rep = check_delta_identity(rng, m_values=(1, 2), window=6)
    assert rep.passed, rep.summary_line()


def test_qspecial_layer():
    rep = check_qspecial()
    assert rep.passed, rep.summary_line()
    assert rep.residual < 1e-12

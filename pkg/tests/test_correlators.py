"""Four-point functions, their closed forms, and the connection matrix."""

import numpy as np
import pytest

from qvirasoro.errors import ConvergenceError, PoleError, QVirasoroError, RegimeError
from qvirasoro.qspecial import QParams
from qvirasoro.correlators import (
    CorrelatorParams,
    check_connection_formula,
    check_four_point,
    check_pseudo_constant,
    check_two_point,
    connection_matrix,
    four_point_closed,
    four_point_jackson,
    screening_wave,
    sv_scalar,
    two_point,
    two_point_reference,
    two_point_series,
    vs_scalar,
)

P1 = QParams(0.49, 0.7)  # beta = 1/2, p = 0.7
P2 = QParams(0.4, 0.9)  # small beta, p < 1
P3 = QParams(0.7, 0.3)  # p > 1: reference product unavailable


class TestParams:
    def test_default_period_is_admissible(self):
        cp = CorrelatorParams(params=P1)
        assert cp.r == pytest.approx(2.0)
        cp = CorrelatorParams(params=P1, r=3.5)
        assert cp.r == 3.5

    def test_derived_exponents(self):
        cp = CorrelatorParams(params=P1, ell=2, L=0.5)
        assert cp.a == pytest.approx(1.0)
        assert cp.b == pytest.approx(0.75)
        assert cp.Q == pytest.approx(0.7)

    def test_rejects_bad_inputs(self):
        with pytest.raises(QVirasoroError):
            CorrelatorParams(params=P1, ell=0)
        with pytest.raises(QVirasoroError):
            CorrelatorParams(params=P1, r=-1.0)


class TestTwoPoint:
    @pytest.mark.parametrize("params", [P1, P2], ids=["p<1", "small-beta"])
    @pytest.mark.parametrize("ell", [1, 2])
    def test_product_vs_series_and_reference(self, params, ell):
        cp = CorrelatorParams(params=params, ell=ell)
        for x in (0.15, 0.3):
            v = two_point(1.0, x, cp)
            s = two_point_series(1.0, x, cp, order=96)
            assert v == pytest.approx(s, rel=1e-12)
            r = two_point_reference(1.0, x, cp)
            assert v == pytest.approx(r, rel=1e-12)

    def test_reference_needs_contractive_double_base(self):
        cp = CorrelatorParams(params=P3)
        with pytest.raises(RegimeError):
            two_point_reference(1.0, 0.3, cp)

    def test_swap_ratio_finite_nonzero(self):
        cp = CorrelatorParams(params=P1)
        ratio = two_point(1.0, 0.4, cp) / two_point(0.4, 1.0, cp)
        assert np.isfinite(ratio) and ratio != 0.0

    def test_pole_of_continuation(self):
        cp = CorrelatorParams(params=P1)
        with pytest.raises(PoleError):
            two_point(1.0, 1.0 / P1.q, cp)

    def test_checker(self):
        rep = check_two_point(P1)
        assert rep.passed, rep.summary_line()
        rep = check_two_point(P2, ell=2)
        assert rep.passed, rep.summary_line()


class TestScreeningWave:
    def test_structural_zero_before_pole(self):
        cp = CorrelatorParams(params=P1)
        edge = P1.q**0.5
        assert screening_wave(1.0 / (P1.t**0.5 * edge), cp) == 0.0

    def test_pole_raises(self):
        cp = CorrelatorParams(params=P1)
        with pytest.raises(PoleError):
            screening_wave(P1.t**0.5 / P1.q**0.5, cp)

    def test_ordering_scalars(self):
        cp = CorrelatorParams(params=P1)
        assert sv_scalar(2.0, 1.0, cp) == pytest.approx(
            2.0**-cp.a * screening_wave(0.5, cp)
        )
        assert vs_scalar(1.0, 0.3, cp) == pytest.approx(screening_wave(0.3, cp))


class TestFourPoint:
    def test_closed_matches_lattice_both_branches(self):
        cp = CorrelatorParams(params=P1, ell=1, L=0.5)
        for branch in ("plus", "minus"):
            c = four_point_closed(branch, 1.0, 0.4, cp)
            j = four_point_jackson(branch, 1.0, 0.4, cp)
            assert c == pytest.approx(j, rel=1e-10)

    def test_unnormalized_is_normalized_times_pair_scalar(self):
        cp = CorrelatorParams(params=P1, ell=1, L=0.5)
        pair = two_point(1.0, 0.4, cp)
        for branch in ("plus", "minus"):
            n = four_point_closed(branch, 1.0, 0.4, cp)
            u = four_point_closed(branch, 1.0, 0.4, cp, normalized=False)
            assert u == pytest.approx(n * pair, rel=1e-14)

    def test_unknown_branch(self):
        cp = CorrelatorParams(params=P1)
        with pytest.raises(QVirasoroError):
            four_point_closed("sideways", 1.0, 0.4, cp)
        with pytest.raises(QVirasoroError):
            four_point_jackson("sideways", 1.0, 0.4, cp)

    def test_lattice_guards_divergent_exponents(self):
        # L = 3 makes b = 1 - 3*beta < 0: the lattice measure diverges
        cp = CorrelatorParams(params=P1, ell=1, L=3.0)
        with pytest.raises(ConvergenceError):
            four_point_jackson("plus", 1.0, 0.4, cp)
        # the closed form is the continuation and stays finite there
        assert np.isfinite(four_point_closed("plus", 1.0, 0.4, cp))

    def test_checker_pass_and_inconclusive(self):
        rep = check_four_point(P1)
        assert rep.passed, rep.summary_line()
        rep = check_four_point(P1, L=3.0)
        assert rep.status == "inconclusive"
        assert rep.residual == float("inf")


class TestPseudoConstant:
    @pytest.mark.parametrize("ell", [1, 2])
    def test_checker(self, ell):
        rep = check_pseudo_constant(P1, ell=ell)
        assert rep.passed, rep.summary_line()


class TestConnection:
    def test_matrix_identity_at_zero(self):
        cp = CorrelatorParams(params=P1, L=0.6)
        assert np.allclose(connection_matrix(0.0, cp), np.eye(2), atol=1e-12)

    def test_matrix_two_sided_inverse(self):
        cp = CorrelatorParams(params=P1, L=0.6)
        prod = connection_matrix(0.7, cp) @ connection_matrix(-0.7, cp)
        assert np.allclose(prod, np.eye(2), atol=1e-10)

    def test_matrix_pole(self):
        # u + ell lands on a bracket zero (r Z lattice)
        cp = CorrelatorParams(params=P1, ell=1, L=0.6)
        with pytest.raises(PoleError):
            connection_matrix(1.0, cp)

    def test_default_check_uses_lattice(self):
        rep = check_connection_formula()
        assert rep.passed, rep.summary_line()
        assert rep.config["method"] == "jackson"
        assert rep.config["r"] == pytest.approx(2.0)

    def test_closed_method_agrees_inside_radius(self):
        rep = check_connection_formula(P1, method="closed", u_samples=(0.3, 0.6))
        assert rep.passed, rep.summary_line()

    def test_auto_falls_back_to_continuation(self):
        # beta = 1/5 makes the pinned period r = 5 admissible, but the
        # lattice sum diverges there (2a - b < 0), so auto picks closed
        rep = check_connection_formula(
            QParams(0.52, 0.52**0.2), ell=1, L=1.0, r=5.0
        )
        assert rep.passed, rep.summary_line()
        assert rep.config["method"] == "closed"

    def test_wrong_period_fails_honestly(self):
        rep = check_connection_formula(P1, r=3.0)
        assert rep.status == "fail"
        assert rep.residual > 0.1

    def test_degenerate_weight_is_detected(self):
        # L = 1/beta - ell makes both branches identical; the row-swapped
        # negative control then cannot fail and the check refuses to pass
        rep = check_connection_formula(P1, L=1.0 / P1.beta - 1.0)
        assert not rep.passed

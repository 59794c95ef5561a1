import numpy as np
import pytest

from qbrisk.bounds_sdp import (bh_lambda_bound, bh_thetadep_bound, bnh_bound,
                               lambda_maximality_check)
from qbrisk.closed_form import bld_bound, direct_bound
from qbrisk.errors import ProblemTooLarge, UnsupportedWeight
from qbrisk.measurement import classical_optimal_risk, classical_view_of_commuting_model
from qbrisk.models import (ConstantWeight, ModelSpec, PriorNodeSet, catalog,
                           coin_model, compute_averages, displacement_model,
                           get_scenario)
from qbrisk.sdp import get_backend

LAMBDAS = (-1.0, -0.5, 0.0, 0.5, 1.0)


@pytest.fixture(scope="module")
def backend():
    return get_backend()


def averages_of(name):
    sc = get_scenario(name)
    return sc, compute_averages(sc.model, sc.prior, sc.weight)


class TestBnh:
    def test_point_mass_is_zero(self, backend):
        model = displacement_model(0.5)
        avg = compute_averages(model, PriorNodeSet.point_mass([0.2, 0.1]),
                               ConstantWeight(np.eye(2)))
        assert bnh_bound(avg, backend).value == pytest.approx(0.0, abs=1e-7)

    def test_coin_tight_value(self, backend):
        _, avg = averages_of("coin_two_point")
        assert bnh_bound(avg, backend).value == pytest.approx(0.75, abs=1e-6)

    @pytest.mark.parametrize("name", ["coin_two_point", "qutrit_die"])
    def test_commuting_equals_classical_optimum(self, backend, name):
        sc, avg = averages_of(name)
        view = classical_view_of_commuting_model(sc.model, sc.prior)
        classical, _ = classical_optimal_risk(view, sc.prior, sc.weight)
        assert bnh_bound(avg, backend).value == pytest.approx(classical, abs=1e-6)

    def test_accepts_varying_weight(self, backend):
        _, avg = averages_of("displacement_weighted")
        value = bnh_bound(avg, backend).value
        assert np.isfinite(value) and value > 0

    def test_size_guard(self, backend):
        big = ModelSpec("big", 1, 128, lambda t: np.eye(128, dtype=complex) / 128)
        avg = compute_averages(big, PriorNodeSet.point_mass([0.0]),
                               ConstantWeight(np.eye(1)))
        with pytest.raises(ProblemTooLarge):
            bnh_bound(avg, backend)


class TestBhLambda:
    def test_point_mass_is_zero(self, backend):
        avg = compute_averages(coin_model(0.5), PriorNodeSet.point_mass([0.4]),
                               ConstantWeight(np.eye(1)))
        for lam in (-1.0, 0.0, 1.0):
            assert bh_lambda_bound(avg, lam, ConstantWeight(np.eye(1)),
                                   backend).value == pytest.approx(0.0, abs=1e-7)

    def test_commuting_equals_direct(self, backend):
        sc, avg = averages_of("qutrit_die")
        direct = direct_bound(avg).value
        for lam in LAMBDAS:
            bh = bh_lambda_bound(avg, lam, sc.weight, backend).value
            assert bh == pytest.approx(direct, abs=1e-6)

    def test_dominates_bld_everywhere(self, backend):
        for name in ("rotation_gaussian", "coin_two_point", "displacement_2param",
                     "qutrit_die"):
            sc, avg = averages_of(name)
            for lam in LAMBDAS:
                bh = bh_lambda_bound(avg, lam, sc.weight, backend).value
                bld = bld_bound(avg, lam, sc.weight).value
                assert bh >= bld - 1e-6

    def test_varying_weight_rejected(self, backend):
        sc, avg = averages_of("displacement_weighted")
        with pytest.raises(UnsupportedWeight):
            bh_lambda_bound(avg, 0.0, sc.weight, backend)


class TestBhThetaDep:
    def test_point_mass_is_zero(self, backend):
        model = coin_model(0.5)
        prior = PriorNodeSet.point_mass([0.4])
        weight = ConstantWeight(np.eye(1))
        avg = compute_averages(model, prior, weight)
        value = bh_thetadep_bound(avg, model, prior, weight, backend).value
        assert value == pytest.approx(0.0, abs=1e-7)

    def test_constant_weight_matches_endpoint_family_on_coin(self, backend):
        sc, avg = averages_of("coin_two_point")
        td = bh_thetadep_bound(avg, sc.model, sc.prior, sc.weight, backend).value
        for lam in (-1.0, 1.0):
            bh = bh_lambda_bound(avg, lam, sc.weight, backend).value
            assert td == pytest.approx(bh, abs=1e-5)

    def test_constant_weight_sandwich(self, backend):
        # pointwise objective dominance gives bh(+-1) <= thetadep <= bnh
        for name in ("rotation_gaussian", "displacement_2param"):
            sc, avg = averages_of(name)
            td = bh_thetadep_bound(avg, sc.model, sc.prior, sc.weight, backend).value
            bh1 = bh_lambda_bound(avg, 1.0, sc.weight, backend).value
            bnh = bnh_bound(avg, backend).value
            assert bh1 - 1e-5 <= td <= bnh + 1e-5

    def test_varying_weight_below_bnh(self, backend):
        sc, avg = averages_of("displacement_weighted")
        td = bh_thetadep_bound(avg, sc.model, sc.prior, sc.weight, backend).value
        bnh = bnh_bound(avg, backend).value
        assert td <= bnh + 1e-6

    def test_size_guard(self, backend):
        sc = get_scenario("rotation_gaussian").rebuild(points=41)
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        import qbrisk.bounds_sdp as mod

        original = mod.MAX_TOTAL_LMI_DIM
        mod.MAX_TOTAL_LMI_DIM = 20
        try:
            with pytest.raises(ProblemTooLarge):
                bh_thetadep_bound(avg, sc.model, sc.prior, sc.weight, backend)
        finally:
            mod.MAX_TOTAL_LMI_DIM = original


class TestLambdaMaximality:
    def test_commuting_flat(self, backend):
        sc, avg = averages_of("coin_two_point")
        report = lambda_maximality_check(avg, sc.weight, backend, grid=LAMBDAS)
        values = [v for _, v in report["values"]]
        assert max(values) - min(values) <= 1e-6
        assert all(chk["passed"] for chk in report["checks"])

    def test_noncommuting_endpoint_max(self, backend):
        sc, avg = averages_of("displacement_2param")
        report = lambda_maximality_check(avg, sc.weight, backend, grid=LAMBDAS)
        values = dict(report["values"])
        assert values[1.0] >= values[0.0] - 1e-7
        assert values[-1.0] >= values[0.0] - 1e-7
        assert all(chk["passed"] for chk in report["checks"])

    def test_failures_reported_not_raised(self, backend):
        # a report always comes back with the four named checks
        sc, avg = averages_of("rotation_gaussian")
        report = lambda_maximality_check(avg, sc.weight, backend, grid=(0.0, 1.0))
        names = {chk["name"] for chk in report["checks"]}
        assert names == {"max_at_endpoints", "symmetry_pm_lambda",
                         "re_lambda_independent", "im_scales_with_abs_lambda"}

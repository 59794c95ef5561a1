import numpy as np
import pytest

from qbrisk.closed_form import bld_bound
from qbrisk.errors import DegenerateWeight, InvalidInput, NotClassical
from qbrisk.linalg import max_abs
from qbrisk.measurement import (ClassicalModelView, Povm, classical_optimal_risk,
                                classical_view_of_commuting_model, measured_risk,
                                mse_matrix, pairwise_commuting,
                                personick_achieving_measurement, random_estimates,
                                random_povm, risk_two_forms)
from qbrisk.models import (ConstantWeight, ModelSpec, PriorNodeSet, VaryingWeight,
                           catalog, coin_model, compute_averages, get_scenario)

SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)
W1 = ConstantWeight(np.eye(1))

Z_PROJECTORS = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]


class TestPovm:
    def test_validation(self):
        povm = Povm(Z_PROJECTORS)
        assert povm.n_outcomes == 2 and povm.dim == 2

    def test_rejects_incomplete(self):
        with pytest.raises(InvalidInput):
            Povm([Z_PROJECTORS[0]])

    def test_rejects_negative_element(self):
        with pytest.raises(InvalidInput):
            Povm([np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])])

    def test_probabilities(self):
        povm = Povm(Z_PROJECTORS)
        p = povm.probabilities((I2 + 0.5 * SZ) / 2)
        assert np.allclose(p, [0.75, 0.25])

    def test_random_povm_is_valid(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            povm = random_povm(3, 4, rng)
            assert max_abs(povm.ops.sum(axis=0) - np.eye(3)) < 1e-10


class TestClassicalOptimalRisk:
    def test_noiseless_channel(self):
        view = ClassicalModelView(np.eye(3))
        prior = PriorNodeSet([[-1.0], [0.0], [1.0]], [0.2, 0.5, 0.3])
        risk, est = classical_optimal_risk(view, prior, W1)
        assert risk == pytest.approx(0.0, abs=1e-14)
        assert np.allclose(est.ravel(), [-1.0, 0.0, 1.0])

    def test_binary_symmetric_channel(self):
        eps = 0.1
        view = ClassicalModelView(np.array([[1 - eps, eps], [eps, 1 - eps]]))
        prior = PriorNodeSet([[0.0], [1.0]], [0.5, 0.5])
        risk, est = classical_optimal_risk(view, prior, W1)
        assert risk == pytest.approx(eps * (1 - eps))
        # posterior means: P(theta=1 | x)
        assert est.ravel() == pytest.approx([eps, 1 - eps])

    def test_scalar_weight_scales_risk_not_estimator(self):
        eps = 0.1
        view = ClassicalModelView(np.array([[1 - eps, eps], [eps, 1 - eps]]))
        prior = PriorNodeSet([[0.0], [1.0]], [0.5, 0.5])
        risk1, est1 = classical_optimal_risk(view, prior, W1)
        risk2, est2 = classical_optimal_risk(view, prior, ConstantWeight(2 * np.eye(1)))
        assert risk2 == pytest.approx(2 * risk1)
        assert np.allclose(est1, est2)

    def test_zero_probability_outcome_dropped(self):
        view = ClassicalModelView(np.array([[1.0, 0.0], [1.0, 0.0]]))
        prior = PriorNodeSet([[0.0], [1.0]], [0.5, 0.5])
        risk, est = classical_optimal_risk(view, prior, W1)
        assert risk == pytest.approx(0.25)  # no information: var of prior
        assert est[1, 0] == 0.0

    def test_degenerate_posterior_weight(self):
        view = ClassicalModelView(np.array([[1.0], [1.0]]))
        prior = PriorNodeSet([[0.0], [1.0]], [0.5, 0.5])
        # SPD averages stay SPD, so degeneracy is a numerical-scale guard
        near_null = VaryingWeight(lambda t: np.array([[1e-14]]), 1)
        with pytest.raises(DegenerateWeight):
            classical_optimal_risk(view, prior, near_null)


class TestMeasuredRisk:
    def test_constant_estimator_at_point_mass(self):
        model = coin_model(0.5)
        prior = PriorNodeSet.point_mass([0.4])
        povm = Povm([I2])
        assert measured_risk(model, prior, W1, povm, [[0.4]]) == pytest.approx(0.0)

    def test_coin_z_measurement_posterior_means(self):
        sc = get_scenario("coin_two_point")
        risk = measured_risk(sc.model, sc.prior, sc.weight, Povm(Z_PROJECTORS),
                             [[0.5], [-0.5]])
        assert risk == pytest.approx(0.75)

    def test_identity_povm_best_constant(self):
        sc = get_scenario("coin_two_point")
        # no information: best constant estimate is the prior mean 0, risk = M
        risk = measured_risk(sc.model, sc.prior, sc.weight, Povm([I2]), [[0.0]])
        assert risk == pytest.approx(1.0)

    def test_two_forms_agree_on_random_pairs(self):
        rng = np.random.default_rng(1)
        for sc in catalog():
            for _ in range(5):
                povm = random_povm(sc.model.dim, int(rng.integers(2, 5)), rng)
                est = random_estimates(povm.n_outcomes, sc.model.n_params, rng)
                a, b = risk_two_forms(sc.model, sc.prior, sc.weight, povm, est)
                assert abs(a - b) <= 1e-10 * max(1.0, abs(a))

    def test_estimator_shape_checked(self):
        sc = get_scenario("coin_two_point")
        with pytest.raises(InvalidInput):
            measured_risk(sc.model, sc.prior, sc.weight, Povm(Z_PROJECTORS), [[0.5]])

    def test_dominates_classical_optimum_on_classical_view(self):
        sc = get_scenario("coin_two_point")
        view = classical_view_of_commuting_model(sc.model, sc.prior)
        optimal, _ = classical_optimal_risk(view, sc.prior, sc.weight)
        rng = np.random.default_rng(2)
        for _ in range(25):
            est = random_estimates(2, 1, rng)
            risk = measured_risk(sc.model, sc.prior, sc.weight, Povm(Z_PROJECTORS), est)
            assert risk >= optimal - 1e-12

    def test_mse_matrix_trace_matches_unit_weight_risk(self):
        sc = get_scenario("displacement_2param")
        rng = np.random.default_rng(3)
        povm = random_povm(2, 3, rng)
        est = random_estimates(3, 2, rng)
        risk = measured_risk(sc.model, sc.prior, sc.weight, povm, est)
        assert np.trace(mse_matrix(sc.model, sc.prior, povm, est)) == pytest.approx(risk)


class TestPersonickMeasurement:
    def test_coin_recovers_z_basis(self):
        sc = get_scenario("coin_two_point")
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        povm, est = personick_achieving_measurement(avg)
        assert sorted(est.ravel()) == pytest.approx([-0.5, 0.5])
        risk = measured_risk(sc.model, sc.prior, sc.weight, povm, est)
        assert risk == pytest.approx(0.75, abs=1e-12)
        assert risk == pytest.approx(bld_bound(avg, 0.0, sc.weight).value, abs=1e-12)

    def test_point_mass_degenerate_merges_to_identity(self):
        model = coin_model(0.5)
        prior = PriorNodeSet.point_mass([0.4])
        avg = compute_averages(model, prior, W1)
        povm, est = personick_achieving_measurement(avg)
        assert povm.n_outcomes == 1
        assert est[0, 0] == pytest.approx(0.4)
        assert measured_risk(model, prior, W1, povm, est) == pytest.approx(0.0)

    @pytest.mark.parametrize("name", ["rotation_gaussian", "coin_two_point", "qutrit_die"])
    def test_tightness_on_single_parameter_scenarios(self, name):
        sc = get_scenario(name)
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        povm, est = personick_achieving_measurement(avg)
        risk = measured_risk(sc.model, sc.prior, sc.weight, povm, est)
        assert abs(risk - bld_bound(avg, 0.0, sc.weight).value) <= 1e-8

    def test_multiparameter_rejected(self):
        sc = get_scenario("displacement_2param")
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        with pytest.raises(InvalidInput):
            personick_achieving_measurement(avg)


class TestClassicalView:
    def test_diagonal_states_read_off(self):
        sc = get_scenario("qutrit_die")
        view = classical_view_of_commuting_model(sc.model, sc.prior)
        # rows are the die likelihoods up to a common permutation of outcomes
        expected = np.array([[0.7, 0.2, 0.1], [0.2, 0.6, 0.2], [0.1, 0.2, 0.7]])
        cols = sorted(range(3), key=lambda c: -view.probs[0, c])
        assert np.allclose(view.probs[:, cols], expected)

    def test_commuting_non_diagonal(self):
        hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        base = coin_model(0.5)
        rotated = ModelSpec("rotated_coin", 1, 2,
                            lambda t: hadamard @ base.state_fn(t) @ hadamard.conj().T)
        prior = PriorNodeSet([[-1.0], [1.0]], [0.5, 0.5])
        view = classical_view_of_commuting_model(rotated, prior)
        assert np.allclose(view.probs.sum(axis=1), 1.0)
        assert np.allclose(np.sort(view.probs[0]), [0.25, 0.75])

    def test_noncommuting_rejected(self):
        model = ModelSpec("xz", 1, 2, lambda t: (I2 + 0.5 * (SX if t[0] > 0 else SZ)) / 2)
        prior = PriorNodeSet([[-1.0], [1.0]], [0.5, 0.5])
        assert not pairwise_commuting([model.state([-1.0]), model.state([1.0])])
        with pytest.raises(NotClassical):
            classical_view_of_commuting_model(model, prior)

    def test_view_validation(self):
        with pytest.raises(InvalidInput):
            ClassicalModelView(np.array([[0.5, 0.4]]))

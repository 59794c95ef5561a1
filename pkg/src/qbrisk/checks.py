"""Invariant suite run over the built-in catalog.

Each function implements one verifiable property of the bound hierarchy at
its stated tolerance and returns CheckResult records; nothing here raises on
a violated property.  The CLI `check` subcommand and the acceptance tests
both execute these.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds_sdp import bh_lambda_bound, bnh_bound, lambda_maximality_check, z_lambda
from .closed_form import bld_bound, direct_bound, solve_lambda_ld
from .errors import NotClassical
from .lambda_maps import map_lambda
from .linalg import BlockOperator, hermitian_part, max_abs, outer_xxT1, trace_norm
from .measurement import (classical_optimal_risk, classical_view_of_commuting_model,
                          measured_risk, pairwise_commuting,
                          personick_achieving_measurement, random_estimates, random_povm,
                          risk_two_forms)
from .models import ConstantWeight, Scenario, catalog, compute_averages, get_scenario
from .sdp import SolverBackend, get_backend

LAMBDA_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)


@dataclass(frozen=True)
class CheckResult:
    criterion: str
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.criterion}: {self.name} (margin {self.margin:.3e})"


def _result(criterion: str, name: str, worst: float, tol: float,
            detail: str = "") -> CheckResult:
    return CheckResult(criterion, name, bool(worst <= tol), float(tol - worst), detail)


def _constant_weight_scenarios(scenarios) -> list[Scenario]:
    return [s for s in scenarios if isinstance(s.weight, ConstantWeight)]


def _commuting_scenarios(scenarios) -> list[Scenario]:
    out = []
    for sc in scenarios:
        states = [sc.model.state(t) for t in sc.prior.thetas]
        if pairwise_commuting(states):
            out.append(sc)
    return out


def check_ordering_chain(backend: SolverBackend, scenarios=None,
                         lambdas=LAMBDA_GRID, tol: float = 1e-5) -> list[CheckResult]:
    """Hierarchy: bnh >= bh(lambda) >= bld(lambda) and bh(lambda) >= direct."""
    scenarios = _constant_weight_scenarios(scenarios or catalog())
    results = []
    for sc in scenarios:
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        bnh = bnh_bound(avg, backend).value
        direct = direct_bound(avg).value
        worst = 0.0
        for lam in lambdas:
            bh = bh_lambda_bound(avg, lam, sc.weight, backend).value
            bld = bld_bound(avg, lam, sc.weight).value
            worst = max(worst, bh - bnh, bld - bh, direct - bh)
        results.append(_result("ordering_chain", sc.name, worst, tol,
                               f"worst violation {worst:.3e} over lambdas {list(lambdas)}"))
    return results


def check_lambda_maximality(backend: SolverBackend, scenarios=None,
                            lambdas=LAMBDA_GRID) -> list[CheckResult]:
    """Symmetry in +-lambda, endpoint maximality, and the exact Re/Im
    lambda-scaling identities for fixed X."""
    scenarios = _constant_weight_scenarios(scenarios or catalog())
    results = []
    for sc in scenarios:
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        report = lambda_maximality_check(avg, sc.weight, backend, grid=lambdas)
        for chk in report["checks"]:
            results.append(CheckResult("lambda_maximality", f"{sc.name}/{chk['name']}",
                                       chk["passed"], chk["margin"], chk["detail"]))
    return results


def check_classical_collapse(backend: SolverBackend, scenarios=None,
                             lambdas=LAMBDA_GRID, tol: float = 1e-6) -> list[CheckResult]:
    """On commuting scenarios the classical optimum, the direct bound, the
    block-operator SDP, and every lambda-LD value coincide."""
    scenarios = _commuting_scenarios(_constant_weight_scenarios(scenarios or catalog()))
    results = []
    for sc in scenarios:
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        view = classical_view_of_commuting_model(sc.model, sc.prior)
        classical, _ = classical_optimal_risk(view, sc.prior, sc.weight)
        values = [classical,
                  direct_bound(avg).value,
                  bnh_bound(avg, backend).value]
        values += [bld_bound(avg, lam, sc.weight).value for lam in lambdas]
        worst = max(values) - min(values)
        results.append(_result("classical_collapse", sc.name, worst, tol,
                               f"classical optimum {classical!r}, spread {worst:.3e}"))
    return results


def check_personick_tightness(scenarios=None, tol: float = 1e-8) -> list[CheckResult]:
    """Single-parameter scenarios: the symmetric-LD eigenbasis measurement
    achieves the lam = 0 closed-form bound."""
    scenarios = [s for s in (scenarios or catalog())
                 if s.model.n_params == 1 and isinstance(s.weight, ConstantWeight)]
    results = []
    for sc in scenarios:
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        povm, est = personick_achieving_measurement(avg)
        risk = measured_risk(sc.model, sc.prior, sc.weight, povm, est)
        bound = bld_bound(avg, 0.0, sc.weight).value
        gap = abs(risk - bound)
        results.append(_result("personick_tightness", sc.name, gap, tol,
                               f"measured {risk!r} vs bound {bound!r}"))
    return results


def check_risk_representation(scenarios=None, n_pairs: int = 100,
                              seed: int = 11, tol: float = 1e-10) -> list[CheckResult]:
    """The direct MSE average and the block-operator form of the risk agree
    on random POVM/estimator pairs."""
    results = []
    for sc in scenarios or catalog():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_pairs):
            povm = random_povm(sc.model.dim, int(rng.integers(2, 5)), rng)
            est = random_estimates(povm.n_outcomes, sc.model.n_params, rng)
            a, b = risk_two_forms(sc.model, sc.prior, sc.weight, povm, est)
            worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
        results.append(_result("risk_representation", sc.name, worst, tol,
                               f"{n_pairs} random pairs, worst relative gap {worst:.3e}"))
    return results


def check_bnh_dominance(backend: SolverBackend, scenarios=None, n_pairs: int = 100,
                        seed: int = 13, tol: float = 1e-6) -> list[CheckResult]:
    """Every explicit measurement's risk dominates the block-operator bound."""
    results = []
    for sc in scenarios or catalog():
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        bnh = bnh_bound(avg, backend).value
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_pairs):
            povm = random_povm(sc.model.dim, int(rng.integers(2, 5)), rng)
            est = random_estimates(povm.n_outcomes, sc.model.n_params, rng)
            risk = measured_risk(sc.model, sc.prior, sc.weight, povm, est)
            worst = max(worst, bnh - risk)
        results.append(_result("bnh_dominance", sc.name, worst, tol,
                               f"bound {bnh!r}, worst risk deficit {worst:.3e}"))
    return results


def random_symmetric_hermitian_block(rng, n: int, d: int) -> BlockOperator:
    """Hermitian block operator invariant under the block partial transpose."""
    blocks = np.zeros((n, n, d, d), dtype=complex)
    for j in range(n):
        for k in range(j, n):
            m = hermitian_part(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
            blocks[j, k] = blocks[k, j] = m
    return BlockOperator(blocks)


def random_psd_block(rng, n: int, d: int) -> BlockOperator:
    g = rng.standard_normal((n * d, n * d)) + 1j * rng.standard_normal((n * d, n * d))
    return BlockOperator.from_matrix(g @ g.conj().T / (n * d), n)


def check_lambda_map_properties(n_samples: int = 100, seed: int = 17,
                                lambdas=LAMBDA_GRID, tol: float = 1e-9,
                                n: int = 2, d: int = 3) -> list[CheckResult]:
    """Real-symmetry on symmetric-Hermitian inputs and positivity on PSD
    inputs of the convex map family."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    state = g @ g.conj().T
    state /= np.trace(state).real

    worst_sym, worst_pos = 0.0, 0.0
    for _ in range(n_samples):
        xsym = random_symmetric_hermitian_block(rng, n, d)
        xpsd = random_psd_block(rng, n, d)
        for lam in lambdas:
            m = map_lambda(xsym, state, lam)
            worst_sym = max(worst_sym, max_abs(m.imag), max_abs(m.real - m.real.T))
            mp = map_lambda(xpsd, state, lam)
            worst_pos = max(worst_pos, -float(np.linalg.eigvalsh(hermitian_part(mp))[0]))
    return [
        _result("lambda_map_properties", "real_symmetry", worst_sym, tol,
                f"{n_samples} symmetric-Hermitian samples"),
        _result("lambda_map_properties", "positivity", worst_pos, tol,
                f"{n_samples} PSD samples"),
    ]


def check_z_consistency(scenarios=None, seed: int = 19, tol: float = 1e-12) -> list[CheckResult]:
    """The SDP-side Gram matrix equals the map family applied to X X^T1."""
    results = []
    for sc in scenarios or catalog():
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        rng = np.random.default_rng(seed)
        n, d = avg.n_params, avg.dim
        x = np.array([hermitian_part(rng.standard_normal((d, d)) +
                                     1j * rng.standard_normal((d, d))) for _ in range(n)])
        worst = 0.0
        for lam in LAMBDA_GRID:
            worst = max(worst, max_abs(z_lambda(x, avg.s_bayes, lam)
                                       - map_lambda(outer_xxT1(x), avg.s_bayes, lam)))
        results.append(_result("z_consistency", sc.name, worst, tol))
    return results


def check_ld_residuals(scenarios=None, lambdas=LAMBDA_GRID,
                       tol: float = 1e-9, herm_tol: float = 1e-10) -> list[CheckResult]:
    """Relative residual of the LD operator equation on all scenarios and the
    Hermiticity of the lam = 0 solution."""
    results = []
    for sc in scenarios or catalog():
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        worst = 0.0
        for lam in lambdas:
            sol = solve_lambda_ld(avg, lam)
            worst = max(worst, float(sol.residuals(avg).max()))
        results.append(_result("ld_residuals", sc.name, worst, tol))
        l0 = solve_lambda_ld(avg, 0.0)
        herm = max(max_abs(lj - lj.conj().T) for lj in l0.operators)
        results.append(_result("ld_residuals", f"{sc.name}/hermitian_at_zero", herm, herm_tol))
    return results


def check_quadrature_convergence(tol: float = 1e-6) -> list[CheckResult]:
    """The lam = 0 closed-form value for the Gaussian-prior scenario is stable
    under Gauss-Legendre refinement from 31 to 41 nodes."""
    base = get_scenario("rotation_gaussian")
    values = {}
    for points in (31, 41):
        sc = base.rebuild(points=points)
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        values[points] = bld_bound(avg, 0.0, sc.weight).value
    gap = abs(values[41] - values[31])
    return [_result("quadrature_convergence", "rotation_gaussian", gap, tol,
                    f"31 nodes {values[31]!r}, 41 nodes {values[41]!r}")]


def run_all_checks(backend: SolverBackend | None = None, scenarios=None) -> list[CheckResult]:
    backend = backend or get_backend()
    scenarios = scenarios or catalog()
    results = []
    results += check_ordering_chain(backend, scenarios)
    results += check_lambda_maximality(backend, scenarios)
    results += check_classical_collapse(backend, scenarios)
    results += check_personick_tightness(scenarios)
    results += check_risk_representation(scenarios)
    results += check_bnh_dominance(backend, scenarios)
    results += check_lambda_map_properties()
    results += check_z_consistency(scenarios)
    results += check_ld_residuals(scenarios)
    results += check_quadrature_convergence()
    return results

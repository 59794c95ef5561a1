"""Ground-truth engines: classical optimal Bayes risk, exact risk evaluation
for explicit POVM/estimator pairs, and the single-parameter achieving
measurement built from the symmetric-LD eigenbasis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .closed_form import solve_lambda_ld
from .errors import DegenerateWeight, InternalInconsistency, InvalidInput, NotClassical
from .linalg import (BlockOperator, hermitian_part, max_abs, operator_vector)
from .models import AveragedQuantities, ModelSpec, PriorNodeSet, WeightSpec, compute_averages

log = logging.getLogger(__name__)

COMMUTATION_TOL = 1e-10
# Fixed seed for the random linear combination used in simultaneous
# diagonalization of commuting states.
SIMDIAG_SEED = 20240817
RISK_FORM_TOL = 1e-10


class Povm:
    """Finite-outcome POVM: PSD operators summing to the identity."""

    __slots__ = ("ops",)

    def __init__(self, ops):
        mats = operator_vector(ops, "POVM")
        d = mats.shape[1]
        for i, m in enumerate(mats):
            if max_abs(m - m.conj().T) > 1e-10 * max(max_abs(m), 1e-300):
                raise InvalidInput(f"POVM element {i} is not Hermitian")
            if np.linalg.eigvalsh(hermitian_part(m))[0] < -1e-10:
                raise InvalidInput(f"POVM element {i} is not PSD within tolerance")
        if max_abs(mats.sum(axis=0) - np.eye(d)) > 1e-10:
            raise InvalidInput("POVM elements do not sum to the identity")
        self.ops = mats

    @property
    def n_outcomes(self) -> int:
        return self.ops.shape[0]

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    def probabilities(self, state: np.ndarray) -> np.ndarray:
        p = np.einsum("xab,ba->x", self.ops, state).real
        return np.clip(p, 0.0, None)


@dataclass(frozen=True)
class ClassicalModelView:
    """Likelihood table p(x | theta_i) over a common finite outcome set."""

    probs: np.ndarray  # (n_nodes, n_outcomes)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2:
            raise InvalidInput("likelihood table must be 2-dimensional")
        if np.any(p < -1e-12):
            raise InvalidInput("likelihood table has negative entries")
        if max_abs(p.sum(axis=1) - 1.0) > 1e-12:
            raise InvalidInput("likelihood rows must sum to 1")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))


def _w_bar(prior: PriorNodeSet, weight: WeightSpec) -> float:
    return float(sum(w * th @ weight.at(th) @ th
                     for w, th in zip(prior.weights, prior.thetas)))


def classical_optimal_risk(view: ClassicalModelView, prior: PriorNodeSet,
                           weight: WeightSpec) -> tuple[float, np.ndarray]:
    """Optimal classical Bayes risk and estimator by completing the square.

    Outcomes with zero marginal probability are dropped from the posterior
    algebra (logged); their estimator rows are returned as zeros.
    """
    p = view.probs
    if p.shape[0] != prior.n_nodes:
        raise InvalidInput("likelihood table and prior have different node counts")
    n = prior.n_params
    wmats = np.array([weight.at(t) for t in prior.thetas])
    wtheta = np.einsum("ijk,ik->ij", wmats, prior.thetas)

    marginal = prior.weights @ p
    estimates = np.zeros((p.shape[1], n))
    gain = 0.0
    for x in range(p.shape[1]):
        if marginal[x] <= 0.0:
            log.info("dropping zero-probability outcome %d from posterior computation", x)
            continue
        post = prior.weights * p[:, x] / marginal[x]
        w_post = np.einsum("i,ijk->jk", post, wmats)
        d_post = post @ wtheta
        evals = np.linalg.eigvalsh(w_post)
        if evals[0] <= 1e-12 * max(abs(evals[-1]), 1.0):
            raise DegenerateWeight(f"posterior weight matrix is singular at outcome {x}")
        theta_hat = np.linalg.solve(w_post, d_post)
        estimates[x] = theta_hat
        gain += marginal[x] * float(d_post @ theta_hat)

    return _w_bar(prior, weight) - gain, estimates


def _lemma_form_risk(avg: AveragedQuantities, povm: Povm, estimates: np.ndarray) -> float:
    n = estimates.shape[1]
    lmat = BlockOperator(np.einsum("xj,xk,xab->jkab", estimates, estimates, povm.ops))
    xops = np.einsum("xj,xab->jab", estimates, povm.ops)
    big_trace = float(np.trace(avg.s_dressed.to_matrix() @ lmat.to_matrix()).real)
    cross = sum(float(np.trace(avg.d_dressed[j] @ xops[j]).real) for j in range(n))
    return big_trace - 2.0 * cross + avg.w_bar


def risk_two_forms(model: ModelSpec, prior: PriorNodeSet, weight: WeightSpec,
                   povm: Povm, estimates) -> tuple[float, float]:
    """Bayes risk of an explicit (POVM, estimator) pair, evaluated both as
    the direct weighted MSE average and through the block-operator form."""
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    if estimates.shape != (povm.n_outcomes, prior.n_params):
        raise InvalidInput(
            f"estimator table shape {estimates.shape} does not match "
            f"({povm.n_outcomes} outcomes, {prior.n_params} parameters)")
    if povm.dim != model.dim:
        raise InvalidInput("POVM and model dimensions disagree")

    direct = 0.0
    for w, th in zip(prior.weights, prior.thetas):
        p = povm.probabilities(model.state(th))
        diff = estimates - th
        direct += w * float(np.einsum("x,xj,jk,xk->", p, diff, weight.at(th), diff))

    lemma = _lemma_form_risk(compute_averages(model, prior, weight), povm, estimates)
    return direct, lemma


def measured_risk(model: ModelSpec, prior: PriorNodeSet, weight: WeightSpec,
                  povm: Povm, estimates) -> float:
    """Exact Bayes risk of an explicit (POVM, estimator) pair.

    Both evaluation routes must agree to RISK_FORM_TOL or the call fails.
    """
    direct, lemma = risk_two_forms(model, prior, weight, povm, estimates)
    if abs(direct - lemma) > RISK_FORM_TOL * max(1.0, abs(direct), abs(lemma)):
        raise InternalInconsistency(
            f"risk representations disagree: direct {direct!r} vs block form {lemma!r}")
    return direct


def mse_matrix(model: ModelSpec, prior: PriorNodeSet, povm: Povm, estimates) -> np.ndarray:
    """Prior-averaged MSE matrix of an explicit (POVM, estimator) pair."""
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    out = np.zeros((prior.n_params, prior.n_params))
    for w, th in zip(prior.weights, prior.thetas):
        p = povm.probabilities(model.state(th))
        diff = estimates - th
        out += w * np.einsum("x,xj,xk->jk", p, diff, diff)
    return out


def personick_achieving_measurement(avg: AveragedQuantities) -> tuple[Povm, np.ndarray]:
    """Projective measurement onto the eigenbasis of the symmetric-LD operator
    (lam = 0) with its eigenvalues as estimates; single parameter only.

    Degenerate eigenvalues are merged into eigenspace projectors.
    """
    if avg.n_params != 1:
        raise InvalidInput("achieving construction is defined for single-parameter models")
    sol = solve_lambda_ld(avg, 0.0)
    l0 = hermitian_part(sol.operators[0])
    vals, vecs = np.linalg.eigh(l0)

    merge_tol = 1e-8 * max(1.0, float(np.abs(vals).max()))
    ops, estimates = [], []
    start = 0
    for stop in range(1, len(vals) + 1):
        if stop == len(vals) or vals[stop] - vals[start] > merge_tol:
            block = vecs[:, start:stop]
            ops.append(block @ block.conj().T)
            estimates.append(float(vals[start:stop].mean()))
            start = stop
    return Povm(ops), np.array(estimates)[:, None]


def pairwise_commuting(states, tol: float = COMMUTATION_TOL) -> bool:
    states = operator_vector(states, "states")
    for a in range(len(states)):
        for b in range(a + 1, len(states)):
            if max_abs(states[a] @ states[b] - states[b] @ states[a]) > tol:
                return False
    return True


def commuting_eigenbasis(model: ModelSpec, prior: PriorNodeSet) -> np.ndarray:
    """Common eigenbasis (unitary columns) of a pairwise-commuting model.

    Found from one random real linear combination of the states (fixed seed);
    the off-diagonal residuals are verified rather than iterated on.
    """
    states = np.array([model.state(t) for t in prior.thetas])
    if not pairwise_commuting(states):
        raise NotClassical("model states do not commute pairwise within tolerance")

    rng = np.random.default_rng(SIMDIAG_SEED)
    combo = np.einsum("i,iab->ab", rng.standard_normal(len(states)), states)
    _, vecs = np.linalg.eigh(hermitian_part(combo))
    rotated = np.einsum("pa,iab,bq->ipq", vecs.conj().T, states, vecs)
    off = rotated - np.eye(model.dim)[None, :, :] * np.einsum("ipp->ip", rotated)[:, :, None]
    if max_abs(off) > 1e-8:
        raise InternalInconsistency(
            "simultaneous diagonalization residual exceeds 1e-8 despite commuting states")
    return vecs


def basis_povm(basis: np.ndarray) -> Povm:
    """Projective POVM onto the columns of a unitary matrix."""
    return Povm([np.outer(basis[:, k], basis[:, k].conj()) for k in range(basis.shape[1])])


def classical_view_of_commuting_model(model: ModelSpec,
                                      prior: PriorNodeSet) -> ClassicalModelView:
    """Read off the likelihood table of a pairwise-commuting model in its
    common eigenbasis."""
    vecs = commuting_eigenbasis(model, prior)
    states = np.array([model.state(t) for t in prior.thetas])
    probs = np.einsum("pa,iab,bp->ip", vecs.conj().T, states, vecs).real
    probs = np.clip(probs, 0.0, None)
    return ClassicalModelView(probs / probs.sum(axis=1, keepdims=True))


def random_povm(dim: int, n_outcomes: int, rng: np.random.Generator) -> Povm:
    """Random POVM from normalized Wishart-type elements."""
    raw = rng.standard_normal((n_outcomes, dim, dim)) + 1j * rng.standard_normal((n_outcomes, dim, dim))
    psd = np.einsum("xab,xcb->xac", raw, raw.conj())
    total = psd.sum(axis=0)
    vals, vecs = np.linalg.eigh(total)
    inv_root = (vecs / np.sqrt(vals)) @ vecs.conj().T
    return Povm(np.einsum("ab,xbc,cd->xad", inv_root, psd, inv_root))


def random_estimates(n_outcomes: int, n_params: int, rng: np.random.Generator,
                     scale: float = 1.0) -> np.ndarray:
    return scale * rng.standard_normal((n_outcomes, n_params))

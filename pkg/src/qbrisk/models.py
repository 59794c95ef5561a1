"""Quantum statistical models, priors, weight matrices, and prior averages.

Continuous priors are always reduced to a finite weighted node set before any
bound computation, so every averaged quantity is a reproducible finite sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegeneratePrior, InvalidInput
from .linalg import BlockOperator, max_abs, require_density

WEIGHT_SUM_TOL = 1e-12
# S_B (or the dressed block state) must clear this eigenvalue floor before
# inverse-type solves; scenarios below it are rejected, never silently mixed.
FULL_RANK_FLOOR = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    """Parametric family of density matrices theta -> S_theta."""

    name: str
    n_params: int
    dim: int
    state_fn: Callable[[np.ndarray], np.ndarray]

    def state(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.n_params,):
            raise InvalidInput(
                f"model {self.name!r} expects {self.n_params} parameters, got shape {theta.shape}")
        return require_density(self.state_fn(theta), f"state of {self.name!r}")


class PriorNodeSet:
    """Discrete prior: nodes theta_i in R^n with positive weights summing to 1."""

    __slots__ = ("thetas", "weights")

    def __init__(self, thetas, weights):
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        weights = np.asarray(weights, dtype=float)
        if thetas.ndim != 2 or weights.ndim != 1 or thetas.shape[0] != weights.shape[0]:
            raise InvalidInput(
                f"prior nodes {thetas.shape} and weights {weights.shape} are inconsistent")
        if not (np.all(np.isfinite(thetas)) and np.all(np.isfinite(weights))):
            raise InvalidInput("prior contains NaN or Inf")
        if np.any(weights <= 0):
            raise InvalidInput("prior weights must be strictly positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidInput(f"prior weights sum to {weights.sum()!r}, expected 1")
        if len({tuple(t) for t in thetas}) != thetas.shape[0]:
            raise InvalidInput("prior nodes must be distinct")
        self.thetas = thetas
        self.weights = weights

    @property
    def n_nodes(self) -> int:
        return self.thetas.shape[0]

    @property
    def n_params(self) -> int:
        return self.thetas.shape[1]

    @classmethod
    def point_mass(cls, theta) -> "PriorNodeSet":
        return cls([np.atleast_1d(theta)], [1.0])

    def __repr__(self) -> str:
        return f"PriorNodeSet(n_nodes={self.n_nodes}, n_params={self.n_params})"


def _require_spd(w: np.ndarray, name: str) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidInput(f"{name} must be a square matrix, got shape {w.shape}")
    if max_abs(w - w.T) > 1e-12 * max(max_abs(w), 1e-300):
        raise InvalidInput(f"{name} must be symmetric")
    w = (w + w.T) / 2
    if np.linalg.eigvalsh(w)[0] <= 0:
        raise InvalidInput(f"{name} must be positive definite")
    return w


@dataclass(frozen=True)
class ConstantWeight:
    """Parameter-independent SPD weight matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _require_spd(self.matrix, "weight matrix"))

    is_constant = True

    @property
    def n_params(self) -> int:
        return self.matrix.shape[0]

    def at(self, theta) -> np.ndarray:
        return self.matrix


@dataclass(frozen=True)
class VaryingWeight:
    """Parameter-dependent weight map theta -> W(theta), SPD at every node used."""

    matrix_fn: Callable[[np.ndarray], np.ndarray]
    n_params: int

    is_constant = False

    def at(self, theta) -> np.ndarray:
        return _require_spd(self.matrix_fn(np.atleast_1d(np.asarray(theta, float))),
                            f"weight matrix at theta={theta}")


WeightSpec = ConstantWeight | VaryingWeight


@dataclass(frozen=True)
class AveragedQuantities:
    """All prior-averaged objects the bounds consume.

    s_bayes        : averaged state S_B, sum_i w_i S_i            (d x d)
    d_bayes        : first moments, [j] = sum_i w_i theta_ij S_i  (n, d, d)
    second_moment  : M, [jk] = sum_i w_i theta_ij theta_ik        (n x n)
    w_bar          : sum_i w_i theta_i . W(theta_i) theta_i
    s_dressed      : block state, block (j,k) = sum_i w_i W_jk(theta_i) S_i
    d_dressed      : [j] = sum_i w_i (W(theta_i) theta_i)_j S_i   (n, d, d)
    """

    s_bayes: np.ndarray
    d_bayes: np.ndarray
    second_moment: np.ndarray
    w_bar: float
    s_dressed: BlockOperator
    d_dressed: np.ndarray

    @property
    def n_params(self) -> int:
        return self.d_bayes.shape[0]

    @property
    def dim(self) -> int:
        return self.s_bayes.shape[0]


def compute_averages(model: ModelSpec, prior: PriorNodeSet,
                     weight: WeightSpec) -> AveragedQuantities:
    """Evaluate every prior-averaged quantity as a finite weighted sum over nodes."""
    n, d = model.n_params, model.dim
    if prior.n_params != n:
        raise InvalidInput(f"prior has {prior.n_params} parameters, model expects {n}")
    if weight.n_params != n:
        raise InvalidInput(f"weight has {weight.n_params} parameters, model expects {n}")

    states = np.array([model.state(t) for t in prior.thetas])
    wmats = np.array([weight.at(t) for t in prior.thetas])
    w, th = prior.weights, prior.thetas

    s_bayes = np.einsum("i,iab->ab", w, states)
    d_bayes = np.einsum("i,ij,iab->jab", w, th, states)
    second_moment = np.einsum("i,ij,ik->jk", w, th, th)
    w_bar = float(np.einsum("i,ij,ijk,ik->", w, th, wmats, th))
    s_dressed = BlockOperator(np.einsum("i,ijk,iab->jkab", w, wmats, states))
    wtheta = np.einsum("ijk,ik->ij", wmats, th)
    d_dressed = np.einsum("i,ij,iab->jab", w, wtheta, states)

    return AveragedQuantities(
        s_bayes=(s_bayes + s_bayes.conj().T) / 2,
        d_bayes=d_bayes,
        second_moment=(second_moment + second_moment.T) / 2,
        w_bar=w_bar,
        s_dressed=s_dressed,
        d_dressed=d_dressed,
    )


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def _axis_rule(rule: str, lo: float, hi: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    if rule == "gauss_legendre":
        x, w = np.polynomial.legendre.leggauss(points)
        half = (hi - lo) / 2
        return lo + half * (x + 1.0), half * w
    if rule == "trapezoid":
        x = np.linspace(lo, hi, points)
        w = np.full(points, (hi - lo) / (points - 1))
        w[[0, -1]] /= 2
        return x, w
    raise InvalidInput(f"unknown quadrature rule {rule!r}")


def quadrature_discretize(density: Callable[[np.ndarray], float], box,
                          rule: str = "gauss_legendre",
                          points_per_axis: int = 21) -> PriorNodeSet:
    """Reduce a continuous prior density on a box to weighted nodes.

    Tensor-product rules are limited to n <= 3 axes; node weights are the
    rule weights times the density, renormalized to sum 1.
    """
    box = np.atleast_2d(np.asarray(box, dtype=float))
    if box.ndim != 2 or box.shape[1] != 2:
        raise InvalidInput(f"box must have shape (n, 2), got {box.shape}")
    if np.any(box[:, 1] <= box[:, 0]):
        raise InvalidInput("box upper limits must exceed lower limits")
    n = box.shape[0]
    if n > 3:
        raise InvalidInput("tensor-product quadrature is limited to n <= 3 axes; "
                           "pass an explicit node list instead")
    if points_per_axis < 2:
        raise InvalidInput("points_per_axis must be at least 2")

    axes = [_axis_rule(rule, lo, hi, points_per_axis) for lo, hi in box]
    grids = np.meshgrid(*[x for x, _ in axes], indexing="ij")
    thetas = np.stack([g.ravel() for g in grids], axis=1)
    wgrid = np.meshgrid(*[w for _, w in axes], indexing="ij")
    base = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)

    dens = np.array([float(density(t)) for t in thetas])
    if np.any(dens < 0):
        raise InvalidInput("prior density must be nonnegative on the box")
    weights = base * dens
    total = weights.sum()
    if total <= 0:
        raise DegeneratePrior("prior density is identically zero on the box")
    keep = weights > 0
    return PriorNodeSet(thetas[keep], weights[keep] / total)


# ---------------------------------------------------------------------------
# Scenario catalog
# ---------------------------------------------------------------------------

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class Scenario:
    """Named (model, prior, weight) triple, optionally rebuildable for sweeps."""

    name: str
    model: ModelSpec
    prior: PriorNodeSet
    weight: WeightSpec
    description: str = ""
    rebuild: Callable[..., "Scenario"] | None = field(default=None, compare=False)


def _zrotation_state(bloch_x: float):
    s0 = (np.eye(2, dtype=complex) + bloch_x * _SX) / 2

    def state(theta: np.ndarray) -> np.ndarray:
        t = theta[0]
        u = np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=complex)
        return u @ s0 @ u.conj().T

    return state


def zrotation_model(bloch_x: float = 0.8) -> ModelSpec:
    """Qubit phase model: S_theta = e^{-i theta sz/2} S_0 e^{+i theta sz/2}
    with mixed S_0 = (I + bloch_x * sx) / 2."""
    return ModelSpec("qubit_zrotation", 1, 2, _zrotation_state(bloch_x))


def displacement_model(bloch_z: float = 0.5) -> ModelSpec:
    """Two-parameter qubit model with noncommuting generators:
    S_theta = (I + theta_1 sx + theta_2 sy + bloch_z sz) / 2."""

    def state(theta: np.ndarray) -> np.ndarray:
        return (np.eye(2, dtype=complex) + theta[0] * _SX + theta[1] * _SY
                + bloch_z * _SZ) / 2

    return ModelSpec("qubit_xy_displacement", 2, 2, state)


def coin_model(bias: float = 0.5) -> ModelSpec:
    """Classical coin embedded in a qubit: S_theta = (I + bias*theta*sz)/2 for
    theta in [-1, 1]; all states are diagonal, hence pairwise commuting."""

    def state(theta: np.ndarray) -> np.ndarray:
        return (np.eye(2, dtype=complex) + bias * theta[0] * _SZ) / 2

    return ModelSpec("coin", 1, 2, state)


_DIE_ROWS = {
    -1.0: np.array([0.7, 0.2, 0.1]),
    0.0: np.array([0.2, 0.6, 0.2]),
    1.0: np.array([0.1, 0.2, 0.7]),
}


def qutrit_die_model() -> ModelSpec:
    """Commuting qutrit model: diagonal states given by a fixed 3-outcome
    likelihood table at theta in {-1, 0, 1}."""

    def state(theta: np.ndarray) -> np.ndarray:
        key = float(theta[0])
        if key not in _DIE_ROWS:
            raise InvalidInput(f"qutrit die model is defined at theta in {{-1,0,1}}, got {key}")
        return np.diag(_DIE_ROWS[key]).astype(complex)

    return ModelSpec("qutrit_die", 1, 3, state)


def gaussian_prior(sigma: float, points: int = 21, n_sigma: float = 3.0) -> PriorNodeSet:
    """Zero-mean Gaussian prior truncated to [-n_sigma*sigma, n_sigma*sigma],
    discretized by Gauss-Legendre quadrature."""
    def density(theta: np.ndarray) -> float:
        return float(np.exp(-theta[0] ** 2 / (2 * sigma ** 2)))

    box = [[-n_sigma * sigma, n_sigma * sigma]]
    return quadrature_discretize(density, box, "gauss_legendre", points)


def _gaussian_rotation(points: int = 21, width: float = 0.4) -> Scenario:
    return Scenario(
        name="rotation_gaussian",
        model=zrotation_model(0.8),
        prior=gaussian_prior(width, points=points),
        weight=ConstantWeight(np.eye(1)),
        description="1-parameter qubit phase rotation, truncated Gaussian prior",
        rebuild=_gaussian_rotation,
    )


def _two_point_coin() -> Scenario:
    return Scenario(
        name="coin_two_point",
        model=coin_model(0.5),
        prior=PriorNodeSet([[-1.0], [1.0]], [0.5, 0.5]),
        weight=ConstantWeight(np.eye(1)),
        description="two-node classical coin (diagonal qubit states)",
    )


def _displacement_uniform(points: int = 5, width: float = 0.3) -> Scenario:
    box = [[-width, width], [-width, width]]
    prior = quadrature_discretize(lambda t: 1.0, box, "gauss_legendre", points)
    return Scenario(
        name="displacement_2param",
        model=displacement_model(0.5),
        prior=prior,
        weight=ConstantWeight(np.eye(2)),
        description="2-parameter qubit displacement (sx, sy), uniform prior, W = I",
        rebuild=_displacement_uniform,
    )


def _displacement_varying_weight(points: int = 5, width: float = 0.3) -> Scenario:
    base = _displacement_uniform(points, width)
    weight = VaryingWeight(lambda t: np.diag([1.0, 1.0 + t[0] ** 2]), 2)
    return Scenario(
        name="displacement_weighted",
        model=base.model,
        prior=base.prior,
        weight=weight,
        description="2-parameter qubit displacement with W(theta) = diag(1, 1 + theta_1^2)",
        rebuild=_displacement_varying_weight,
    )


def _qutrit_die() -> Scenario:
    return Scenario(
        name="qutrit_die",
        model=qutrit_die_model(),
        prior=PriorNodeSet([[-1.0], [0.0], [1.0]], [0.25, 0.5, 0.25]),
        weight=ConstantWeight(np.eye(1)),
        description="commuting qutrit die, three prior nodes",
    )


def depolarize_model(model: ModelSpec, eps: float) -> ModelSpec:
    """Opt-in preprocessing S -> (1 - eps) S + eps I/d for rank-deficient
    states; never applied silently, and eps is recorded in any report produced
    from the depolarized scenario."""
    if not 0.0 < eps < 1.0:
        raise InvalidInput(f"depolarization strength must lie in (0, 1), got {eps}")
    mix = np.eye(model.dim, dtype=complex) / model.dim

    def state(theta: np.ndarray) -> np.ndarray:
        return (1.0 - eps) * model.state_fn(theta) + eps * mix

    return ModelSpec(f"{model.name}+depol({eps:g})", model.n_params, model.dim, state)


def depolarize_scenario(scenario: Scenario, eps: float) -> Scenario:
    return Scenario(
        name=scenario.name,
        model=depolarize_model(scenario.model, eps),
        prior=scenario.prior,
        weight=scenario.weight,
        description=f"{scenario.description} (depolarized, eps={eps:g})",
    )


def catalog() -> list[Scenario]:
    """Built-in desk-scale scenarios used by the invariant and acceptance suites."""
    return [
        _gaussian_rotation(),
        _two_point_coin(),
        _displacement_uniform(),
        _displacement_varying_weight(),
        _qutrit_die(),
    ]


def get_scenario(name: str) -> Scenario:
    for sc in catalog():
        if sc.name == name:
            return sc
    raise InvalidInput(f"unknown catalog scenario {name!r}; "
                       f"available: {[s.name for s in catalog()]}")

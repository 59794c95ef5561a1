"""Closed-form Bayes-risk lower bounds.

The direct bound comes from completing the square on the extended space.
The lambda-LD family solves an operator equation interpolating between the
symmetric (lam = 0) and one-sided (lam = +-1) logarithmic-derivative types,
then evaluates a Re/Im functional of the resulting Gram matrix.  Everything
here is a finite-dimensional linear-algebra computation; no SDP solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import IllConditionedLDEquation, InvalidInput, SingularAveragedState, UnsupportedWeight
from .linalg import eig_hermitian, max_abs, sqrt_psd, stack_column, stack_row, trace_norm
from .models import AveragedQuantities, ConstantWeight, FULL_RANK_FLOOR, WeightSpec

LD_DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class BoundValue:
    """A named scalar bound with optional lambda and bookkeeping metadata."""

    name: str
    value: float
    lam: float | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise InvalidInput(f"bound {self.name!r} evaluated to non-finite value {self.value}")


@dataclass(frozen=True)
class LambdaLDSolution:
    """Solution of the lambda-LD operator equation.

    operators[j] solves D_j = ((1+lam)/2) S L_j + ((1-lam)/2) L_j S; the
    operators are not Hermitian in general (they are for lam = 0).
    gram[j, k] = tr[D_k L_j].
    """

    lam: float
    operators: np.ndarray  # (n, d, d) complex
    gram: np.ndarray       # (n, n) complex

    @property
    def n_params(self) -> int:
        return self.operators.shape[0]

    def residuals(self, avg: AveragedQuantities) -> np.ndarray:
        """Relative max-norm residual of the defining equation, per parameter."""
        cp, cm = 0.5 * (1 + self.lam), 0.5 * (1 - self.lam)
        out = np.empty(self.n_params)
        for j, lj in enumerate(self.operators):
            lhs = cp * avg.s_bayes @ lj + cm * lj @ avg.s_bayes
            out[j] = max_abs(lhs - avg.d_bayes[j]) / max(max_abs(avg.d_bayes[j]), 1e-300)
        return out


def _spectral_floor(avg: AveragedQuantities) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = eig_hermitian(avg.s_bayes)
    if vals[-1] <= FULL_RANK_FLOOR:
        raise SingularAveragedState(
            f"averaged state has eigenvalue {vals[-1]:.3e} <= {FULL_RANK_FLOOR:.0e}; "
            "scenario is rejected (opt-in depolarization must be applied explicitly)")
    return vals, vecs


def solve_lambda_ld(avg: AveragedQuantities, lam: float) -> LambdaLDSolution:
    """Solve the lambda-LD equation in the eigenbasis of the averaged state.

    With S = U diag(s) U^dag, the solution is elementwise:
    (U^dag L_j U)_ab = (U^dag D_j U)_ab / ((1+lam)/2 s_a + (1-lam)/2 s_b).
    """
    if not -1.0 <= lam <= 1.0:
        raise InvalidInput(f"lambda must lie in [-1, 1], got {lam}")
    vals, vecs = _spectral_floor(avg)
    cp, cm = 0.5 * (1 + lam), 0.5 * (1 - lam)
    denom = cp * vals[:, None] + cm * vals[None, :]
    bad = np.abs(denom) < LD_DENOMINATOR_FLOOR
    if np.any(bad):
        a, b = np.argwhere(bad)[0]
        raise IllConditionedLDEquation(
            f"denominator {denom[a, b]:.3e} below {LD_DENOMINATOR_FLOOR:.0e} "
            f"at eigenvalue pair ({a}, {b})")

    ops = np.empty_like(avg.d_bayes)
    for j, dj in enumerate(avg.d_bayes):
        dtil = vecs.conj().T @ dj @ vecs
        ops[j] = vecs @ (dtil / denom) @ vecs.conj().T

    gram = np.einsum("kab,jba->jk", avg.d_bayes, ops)
    return LambdaLDSolution(lam=lam, operators=ops, gram=gram)


def direct_bound(avg: AveragedQuantities) -> BoundValue:
    """Direct generalization of the optimal classical Bayes risk.

    Solves the block-linear system S_dressed X = D_dressed on the extended
    space and evaluates w_bar minus the resulting quadratic form.
    """
    sbar = avg.s_dressed.to_matrix()
    vals, vecs = eig_hermitian(sbar)
    if vals[-1] <= FULL_RANK_FLOOR:
        raise SingularAveragedState(
            f"dressed averaged state has eigenvalue {vals[-1]:.3e} <= {FULL_RANK_FLOOR:.0e}")
    dcol = stack_column(avg.d_dressed)
    xcol = vecs @ ((vecs.conj().T @ dcol) / vals[:, None])
    quad = float(np.trace(stack_row(avg.d_dressed) @ xcol).real)
    return BoundValue("direct", avg.w_bar - quad,
                      metadata={"quadratic_form": quad, "w_bar": avg.w_bar})


def _require_constant(weight: WeightSpec) -> np.ndarray:
    if not isinstance(weight, ConstantWeight):
        raise UnsupportedWeight("this bound is defined for constant weight matrices only")
    return weight.matrix


def bld_bound(avg: AveragedQuantities, lam: float, weight: WeightSpec) -> BoundValue:
    """Closed-form lambda-LD bound
    -Tr[W Re K] + ||sqrt(W) Im K sqrt(W)||_1 + w_bar for constant W."""
    w = _require_constant(weight)
    sol = solve_lambda_ld(avg, lam)
    rootw = sqrt_psd(w).real
    re_term = float(np.trace(w @ sol.gram.real))
    im_term = trace_norm(rootw @ sol.gram.imag @ rootw)
    return BoundValue("bld", -re_term + im_term + avg.w_bar, lam=lam,
                      metadata={"re_term": re_term, "im_term": im_term})


def bld_max_over_lambda(avg: AveragedQuantities, weight: WeightSpec,
                        grid_points: int = 41) -> tuple[BoundValue, float]:
    """Maximize the lambda-LD bound over lambda in [-1, 1].

    Uniform grid scan (odd count, so lambda = 0 is present) followed by
    golden-section refinement around the best grid point down to a lambda
    resolution of 1e-4.  Grid ties within 1e-12 break toward smallest |lambda|.
    """
    if grid_points < 3 or grid_points % 2 == 0:
        raise InvalidInput("grid_points must be odd and at least 3")
    w = _require_constant(weight)

    grid = np.linspace(-1.0, 1.0, grid_points)
    values = np.array([bld_bound(avg, l, weight).value for l in grid])
    best = values.max()
    ties = np.where(values >= best - 1e-12)[0]
    idx = ties[np.argmin(np.abs(grid[ties]))]

    lo = grid[max(idx - 1, 0)]
    hi = grid[min(idx + 1, grid_points - 1)]
    lam_star, val_star = _golden_max(lambda l: bld_bound(avg, l, weight).value, lo, hi, 1e-4)
    if values[idx] >= val_star:
        lam_star, val_star = float(grid[idx]), float(values[idx])
    bound = BoundValue("bld_max", val_star, lam=lam_star,
                       metadata={"grid_points": grid_points})
    return bound, lam_star


def _golden_max(f, lo: float, hi: float, xtol: float) -> tuple[float, float]:
    invphi = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return float(x), float(f(x))


def personick_matrix_bound(avg: AveragedQuantities) -> np.ndarray:
    """Matrix bound M - Re K at lam = 0; dominates the Bayesian MSE matrix of
    any measurement/estimator pair in the sense of real quadratic forms."""
    sol = solve_lambda_ld(avg, 0.0)
    out = avg.second_moment - sol.gram.real
    return (out + out.T) / 2

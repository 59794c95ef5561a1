"""Standard-form SDP container, problem builder, and solver backends.

Problems are stored in linear-matrix-inequality form over a real scalar
vector x in R^N:

    minimize    c . x + c0
    subject to  F0^(b) + sum_k x_k Fk^(b)  PSD   for each block b
                A x = b                          (optional equalities)

with every F real symmetric.  Matrix variables (real symmetric or complex
Hermitian) are expanded into scalars by the builder; complex Hermitian
constraint blocks are assembled first and then embedded into real symmetric
matrices of doubled size via [[P, -Q], [Q, P]].

The text dump format (one problem per file) is:

    qbrisk-sdp 1
    scalars <N>
    constant <c0>
    var <name> <kind> <dim> <offset> <size>      one line per matrix variable
    obj <k> <value>                              nonzero objective entries
    block <b> <size>
    entry <b> <term> <i> <j> <value>             term = -1 for F0, else the
                                                 scalar index k; upper
                                                 triangle only (i <= j)
    eq <row> <k|-1> <value>                      equality rows, -1 = rhs

Floating-point values are printed with 17 significant digits, enough to
round-trip IEEE-754 doubles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import InvalidInput, SolverError
from .linalg import max_abs, real_embedding

DEFAULT_TOLERANCE = 1e-8
# When a solver claims optimality, the recomputed feasibility residual must
# clear this bar or the status is downgraded to near_optimal.
OPTIMAL_RESIDUAL_BAR = 1e-7


# ---------------------------------------------------------------------------
# Variables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixVariable:
    """A matrix variable expanded into real scalars.

    Hermitian (complex, dim d): d diagonal entries, then (re, im) pairs for
    each upper-triangle position, giving d*d scalars.  Symmetric (real,
    dim n): n diagonal entries then upper-triangle entries, n(n+1)/2 scalars.
    """

    name: str
    kind: str  # "hermitian" | "symmetric"
    dim: int
    offset: int

    @property
    def size(self) -> int:
        d = self.dim
        return d * d if self.kind == "hermitian" else d * (d + 1) // 2

    def basis(self) -> Iterator[tuple[int, np.ndarray]]:
        """Yield (global scalar index, basis matrix) pairs; the variable value
        is sum_k x_k B_k."""
        d, k = self.dim, self.offset
        for a in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[a, a] = 1.0
            yield k, e
            k += 1
        for a in range(d):
            for b in range(a + 1, d):
                re = np.zeros((d, d), dtype=complex)
                re[a, b] = re[b, a] = 1.0
                yield k, re
                k += 1
                if self.kind == "hermitian":
                    im = np.zeros((d, d), dtype=complex)
                    im[a, b] = 1j
                    im[b, a] = -1j
                    yield k, im
                    k += 1

    def value_from(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, b in self.basis():
            out += x[k] * b
        return out.real if self.kind == "symmetric" else out


# ---------------------------------------------------------------------------
# Problem container
# ---------------------------------------------------------------------------

@dataclass
class PsdBlock:
    """One real symmetric LMI block F0 + sum_k x_k Fk >= 0."""

    size: int
    constant: np.ndarray
    coeffs: list[tuple[int, np.ndarray]]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        out = self.constant.copy()
        for k, f in self.coeffs:
            out += x[k] * f
        return out


@dataclass
class SdpProblem:
    num_scalars: int
    objective: np.ndarray
    constant: float
    blocks: list[PsdBlock]
    variables: list[MatrixVariable]
    equalities: tuple[np.ndarray, np.ndarray] | None = None

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.objective @ x + self.constant)

    def feasibility_residual(self, x: np.ndarray) -> float:
        """Worst PSD violation (most negative block eigenvalue, clipped at 0)
        plus the max equality violation."""
        res = 0.0
        for blk in self.blocks:
            w = np.linalg.eigvalsh(blk.evaluate(x))
            res = max(res, float(-w[0]) if w[0] < 0 else 0.0)
        if self.equalities is not None:
            a, b = self.equalities
            res = max(res, max_abs(a @ x - b))
        return res


@dataclass
class SdpSolution:
    status: str  # optimal | near_optimal | infeasible | unbounded | solver_error
    value: float | None
    x: np.ndarray | None
    residual: float | None
    solver: str
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "near_optimal")


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------

class LmiBuilder:
    """Assembles one complex Hermitian LMI from blocks addressed by index.

    Off-diagonal placements are mirrored with the Hermitian adjoint so the
    assembled matrix is Hermitian for every value of x; this is verified at
    build time.
    """

    def __init__(self, block_sizes: Sequence[int]):
        self.sizes = list(block_sizes)
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)
        self.total = int(self.offsets[-1])
        self.constant = np.zeros((self.total, self.total), dtype=complex)
        self.terms: list[tuple[MatrixVariable, int, int, Callable[[np.ndarray], np.ndarray]]] = []

    def _slices(self, r: int, c: int) -> tuple[slice, slice]:
        return (slice(self.offsets[r], self.offsets[r + 1]),
                slice(self.offsets[c], self.offsets[c + 1]))

    def add_constant(self, r: int, c: int, mat: np.ndarray) -> None:
        rows, cols = self._slices(r, c)
        self.constant[rows, cols] += mat
        if r != c:
            self.constant[cols, rows] += np.asarray(mat).conj().T

    def add_term(self, var: MatrixVariable, r: int, c: int,
                 fn: Callable[[np.ndarray], np.ndarray]) -> None:
        """Block (r, c) += fn(V); for r != c the adjoint lands at (c, r).
        Diagonal placements must map Hermitian bases to Hermitian blocks."""
        self.terms.append((var, r, c, fn))


class ProblemBuilder:
    """Collects matrix variables, a linear objective, and complex LMIs, then
    emits the real embedded standard form."""

    def __init__(self):
        self.variables: list[MatrixVariable] = []
        self._n = 0
        self._obj: dict[int, float] = {}
        self._const = 0.0
        self._lmis: list[LmiBuilder] = []

    def add_hermitian(self, name: str, dim: int) -> MatrixVariable:
        return self._add(name, "hermitian", dim)

    def add_symmetric(self, name: str, dim: int) -> MatrixVariable:
        return self._add(name, "symmetric", dim)

    def _add(self, name: str, kind: str, dim: int) -> MatrixVariable:
        var = MatrixVariable(name, kind, dim, self._n)
        self.variables.append(var)
        self._n += var.size
        return var

    def add_objective_inner(self, var: MatrixVariable, coeff: np.ndarray) -> None:
        """Objective += tr[coeff @ V]; coeff must make the trace real
        (Hermitian against Hermitian variables, symmetric against symmetric)."""
        coeff = np.asarray(coeff, dtype=complex)
        for k, b in var.basis():
            val = complex(np.trace(coeff @ b))
            if abs(val.imag) > 1e-12 * max(abs(val.real), 1.0):
                raise InvalidInput(f"objective term for {var.name!r} is not real")
            if val.real != 0.0:
                self._obj[k] = self._obj.get(k, 0.0) + val.real

    def add_objective_constant(self, c: float) -> None:
        self._const += float(c)

    def new_lmi(self, block_sizes: Sequence[int]) -> LmiBuilder:
        lmi = LmiBuilder(block_sizes)
        self._lmis.append(lmi)
        return lmi

    def build(self) -> SdpProblem:
        objective = np.zeros(self._n)
        for k, v in self._obj.items():
            objective[k] = v

        blocks: list[PsdBlock] = []
        for lmi in self._lmis:
            per_scalar: dict[int, np.ndarray] = {}
            for var, r, c, fn in lmi.terms:
                rows, cols = lmi._slices(r, c)
                for k, b in var.basis():
                    g = per_scalar.setdefault(k, np.zeros_like(lmi.constant))
                    piece = np.asarray(fn(b), dtype=complex)
                    g[rows, cols] += piece
                    if r != c:
                        g[cols, rows] += piece.conj().T
            coeffs = []
            for k in sorted(per_scalar):
                g = per_scalar[k]
                if max_abs(g - g.conj().T) > 1e-12 * max(max_abs(g), 1e-300):
                    raise InvalidInput("assembled LMI coefficient is not Hermitian; "
                                       "check diagonal-block placements")
                if max_abs(g) > 0:
                    coeffs.append((k, real_embedding((g + g.conj().T) / 2)))
            g0 = lmi.constant
            if max_abs(g0 - g0.conj().T) > 1e-12 * max(max_abs(g0), 1e-300):
                raise InvalidInput("assembled LMI constant is not Hermitian")
            blocks.append(PsdBlock(2 * lmi.total, real_embedding((g0 + g0.conj().T) / 2), coeffs))

        return SdpProblem(self._n, objective, self._const, blocks, list(self.variables))


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------

class SolverBackend:
    """Interface: deterministic solve of an SdpProblem at a given tolerance."""

    name = "abstract"

    def solve(self, problem: SdpProblem, tolerance: float = DEFAULT_TOLERANCE) -> SdpSolution:
        raise NotImplementedError


class CvxpyBackend(SolverBackend):
    """Backend delegating to a cvxpy conic solver (CLARABEL by default)."""

    def __init__(self, solver: str = "CLARABEL"):
        self.solver = solver
        self.name = f"cvxpy/{solver.lower()}"

    def _solver_options(self, tolerance: float) -> dict:
        t = float(tolerance)
        if self.solver == "CLARABEL":
            return {"tol_gap_abs": t, "tol_gap_rel": t, "tol_feas": t}
        if self.solver == "CVXOPT":
            t = max(t, 1e-9)
            return {"abstol": t, "reltol": t, "feastol": t}
        if self.solver == "SCS":
            return {"eps": max(t, 1e-9)}
        return {}

    def solve(self, problem: SdpProblem, tolerance: float = DEFAULT_TOLERANCE) -> SdpSolution:
        import cvxpy as cp

        x = cp.Variable(problem.num_scalars)
        constraints = []
        for blk in problem.blocks:
            expr = cp.Constant(blk.constant)
            if blk.coeffs:
                idx = [k for k, _ in blk.coeffs]
                flat = np.stack([f for _, f in blk.coeffs]).reshape(len(idx), -1)
                expr = expr + cp.reshape(x[idx] @ flat, (blk.size, blk.size), order="C")
            constraints.append(cp.PSD((expr + expr.T) / 2))
        if problem.equalities is not None:
            a, b = problem.equalities
            constraints.append(a @ x == b)

        prob = cp.Problem(cp.Minimize(problem.objective @ x + problem.constant), constraints)
        try:
            # inaccurate solves are handled through the status and the
            # recomputed residual, so cvxpy's warning is redundant here
            import warnings

            with warnings.catch_warnings():
                warnings.filterwarnings("ignore", message="Solution may be inaccurate")
                prob.solve(solver=self.solver, **self._solver_options(tolerance))
        except cp.error.SolverError as exc:
            return SdpSolution("solver_error", None, None, None, self.name, str(exc))

        status_map = {
            cp.OPTIMAL: "optimal",
            cp.OPTIMAL_INACCURATE: "near_optimal",
            cp.INFEASIBLE: "infeasible",
            cp.INFEASIBLE_INACCURATE: "infeasible",
            cp.UNBOUNDED: "unbounded",
            cp.UNBOUNDED_INACCURATE: "unbounded",
        }
        status = status_map.get(prob.status, "solver_error")
        if x.value is None or status in ("infeasible", "unbounded", "solver_error"):
            return SdpSolution(status, None, None, None, self.name, f"cvxpy status {prob.status}")

        xval = np.asarray(x.value, dtype=float)
        residual = problem.feasibility_residual(xval)
        if status == "optimal" and residual > OPTIMAL_RESIDUAL_BAR:
            status = "near_optimal"
        return SdpSolution(status, problem.objective_value(xval), xval, residual,
                           self.name, f"cvxpy status {prob.status}")


_BACKENDS: dict[str, Callable[[], SolverBackend]] = {
    "clarabel": lambda: CvxpyBackend("CLARABEL"),
    "cvxopt": lambda: CvxpyBackend("CVXOPT"),
    "scs": lambda: CvxpyBackend("SCS"),
}


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str = "clarabel") -> SolverBackend:
    try:
        return _BACKENDS[name.lower()]()
    except KeyError:
        raise SolverError(f"unknown backend {name!r}; available: {available_backends()}") from None


def require_solved(solution: SdpSolution, what: str) -> SdpSolution:
    if not solution.ok:
        raise SolverError(f"{what}: solver returned status {solution.status!r} ({solution.detail})")
    return solution


# ---------------------------------------------------------------------------
# Text dump
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def dump_problem(problem: SdpProblem, stream) -> None:
    """Write the problem in the documented coordinate text form."""
    w = stream.write
    w("qbrisk-sdp 1\n")
    w(f"scalars {problem.num_scalars}\n")
    w(f"constant {_fmt(problem.constant)}\n")
    for var in problem.variables:
        w(f"var {var.name} {var.kind} {var.dim} {var.offset} {var.size}\n")
    for k in np.nonzero(problem.objective)[0]:
        w(f"obj {k} {_fmt(problem.objective[k])}\n")
    for bi, blk in enumerate(problem.blocks):
        w(f"block {bi} {blk.size}\n")
        for term, mat in [(-1, blk.constant)] + blk.coeffs:
            for i, j in zip(*np.nonzero(mat)):
                if i <= j:
                    w(f"entry {bi} {term} {i} {j} {_fmt(mat[i, j])}\n")
    if problem.equalities is not None:
        a, b = problem.equalities
        for row in range(a.shape[0]):
            for k in np.nonzero(a[row])[0]:
                w(f"eq {row} {k} {_fmt(a[row, k])}\n")
            w(f"eq {row} -1 {_fmt(b[row])}\n")

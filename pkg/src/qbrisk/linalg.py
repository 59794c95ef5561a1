"""Dense complex matrix kernel.

Hermitian eigendecomposition, PSD square root, trace norm, block operators
on the extended space C^n (x) H, the block-index partial transpose, and the
complex-to-real embedding handed to SDP backends.  All functions are pure;
inputs are never mutated.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidInput, NotPSD

# Construction tolerance for Hermitian inputs, relative to the max-norm.
HERMITIAN_RTOL = 1e-12
# Eigenvalues above this floor are clipped to zero in PSD operations; below
# it the matrix is rejected.  Matches double-precision quadrature noise.
PSD_EIG_FLOOR = -1e-10


def max_abs(a: np.ndarray) -> float:
    """Max-norm (largest entry magnitude); 0 for empty arrays."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return `a` as a finite 2-d complex array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise InvalidInput(f"{name} contains NaN or Inf entries")
    return arr


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    arr = as_complex_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {arr.shape}")
    return arr


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    a = np.asarray(a)
    scale = max(max_abs(a), 1e-300)
    return max_abs(a - a.conj().T) <= rtol * scale


def require_hermitian(a, name: str = "matrix", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate Hermiticity within `rtol` (relative to max-norm) and return
    the exactly Hermitian part."""
    arr = as_square_matrix(a, name)
    if not is_hermitian(arr, rtol):
        raise InvalidInput(f"{name} is not Hermitian within tolerance {rtol}")
    return hermitian_part(arr)


def require_density(a, name: str = "state", eig_floor: float = PSD_EIG_FLOOR,
                    trace_tol: float = 1e-10) -> np.ndarray:
    """Validate a density matrix: Hermitian, eigenvalues >= eig_floor, unit trace."""
    arr = require_hermitian(a, name, rtol=1e-10)
    vals = np.linalg.eigvalsh(arr)
    if vals[0] < eig_floor:
        raise NotPSD(f"{name} has eigenvalue {vals[0]:.3e} below {eig_floor:.0e}")
    tr = float(np.trace(arr).real)
    if abs(tr - 1.0) > trace_tol:
        raise InvalidInput(f"{name} has trace {tr!r}, expected 1 within {trace_tol:.0e}")
    return arr


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues descending, unitary eigenvector columns) with
    A = U diag(s) U^dag.
    """
    arr = require_hermitian(a, "matrix", rtol=1e-10)
    vals, vecs = np.linalg.eigh(arr)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def sqrt_psd(a) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix.

    Eigenvalues in [PSD_EIG_FLOOR, 0) are clipped to zero; anything lower
    raises NotPSD.
    """
    vals, vecs = eig_hermitian(a)
    if vals[-1] < PSD_EIG_FLOOR:
        raise NotPSD(f"matrix has eigenvalue {vals[-1]:.3e} below {PSD_EIG_FLOOR:.0e}")
    root = np.sqrt(np.clip(vals, 0.0, None))
    return hermitian_part((vecs * root) @ vecs.conj().T)


def trace_norm(a) -> float:
    """Trace norm Tr sqrt(A^dag A) = sum of singular values.

    Computed from the SVD of the explicit matrix; for Hermitian input this
    equals the absolute sum of the eigenvalues.
    """
    arr = as_square_matrix(a)
    if arr.shape[0] == 0:
        return 0.0
    return float(np.linalg.svd(arr, compute_uv=False).sum())


class BlockOperator:
    """n x n grid of d x d complex blocks on the extended space C^n (x) H.

    The canonical flattened form places block (j, k) at rows j*d:(j+1)*d and
    columns k*d:(k+1)*d of an (n d) x (n d) matrix, matching np.kron ordering
    for separable operators.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: np.ndarray):
        arr = np.asarray(blocks, dtype=complex)
        if arr.ndim != 4 or arr.shape[0] != arr.shape[1] or arr.shape[2] != arr.shape[3]:
            raise InvalidInput(f"blocks must have shape (n, n, d, d), got {arr.shape}")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise InvalidInput("block operator contains NaN or Inf entries")
        self.blocks = arr

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def d(self) -> int:
        return self.blocks.shape[2]

    @classmethod
    def from_blocks(cls, nested: Sequence[Sequence[np.ndarray]]) -> "BlockOperator":
        return cls(np.array([[as_square_matrix(b) for b in row] for row in nested]))

    @classmethod
    def from_matrix(cls, mat: np.ndarray, n: int) -> "BlockOperator":
        mat = as_square_matrix(mat, "flattened block operator")
        if mat.shape[0] % n:
            raise InvalidInput(f"matrix of size {mat.shape[0]} does not split into {n} blocks")
        d = mat.shape[0] // n
        return cls(mat.reshape(n, d, n, d).transpose(0, 2, 1, 3))

    def block(self, j: int, k: int) -> np.ndarray:
        return self.blocks[j, k]

    def to_matrix(self) -> np.ndarray:
        n, d = self.n, self.d
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)

    def partial_transpose_T1(self) -> "BlockOperator":
        """Block-index transpose: output block (j, k) is input block (k, j)."""
        return BlockOperator(self.blocks.transpose(1, 0, 2, 3))

    def is_hermitian(self, rtol: float = 1e-10) -> bool:
        return is_hermitian(self.to_matrix(), rtol)

    def is_t1_symmetric(self, rtol: float = 1e-10) -> bool:
        scale = max(max_abs(self.blocks), 1e-300)
        return max_abs(self.blocks - self.blocks.transpose(1, 0, 2, 3)) <= rtol * scale

    def __repr__(self) -> str:
        return f"BlockOperator(n={self.n}, d={self.d})"


def partial_transpose_T1(x: BlockOperator) -> BlockOperator:
    """Transpose over the parameter index only; an involution."""
    return x.partial_transpose_T1()


def operator_vector(ops: Sequence[np.ndarray], name: str = "operator vector") -> np.ndarray:
    """Validate a list of equal-dimension square matrices, returned as (n, d, d)."""
    mats = [as_square_matrix(op, name) for op in ops]
    if not mats:
        raise InvalidInput(f"{name} is empty")
    d = mats[0].shape[0]
    if any(m.shape[0] != d for m in mats):
        raise InvalidInput(f"{name} entries have mismatched dimensions")
    return np.array(mats)


def outer_xxT1(ops: Sequence[np.ndarray]) -> BlockOperator:
    """Outer product X X^T1 of an operator vector: block (j, k) = X_j X_k."""
    x = operator_vector(ops, "X")
    n = x.shape[0]
    return BlockOperator(np.einsum("jab,kbc->jkac", x, x).reshape(n, n, x.shape[1], x.shape[2]))


def stack_column(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Operator vector as the (n d) x d block column [X_1; ...; X_n]."""
    return np.vstack(list(ops))


def stack_row(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Operator vector transposed over the parameter index: the d x (n d)
    block row [X_1, ..., X_n] (blocks themselves untouched)."""
    return np.hstack(list(ops))


def real_embedding(a) -> np.ndarray:
    """Real embedding of a complex square matrix A = P + iQ as [[P, -Q], [Q, P]].

    A Hermitian PSD iff the embedding is symmetric PSD; eigenvalues double in
    multiplicity and the trace doubles.
    """
    arr = as_square_matrix(a)
    p, q = arr.real, arr.imag
    return np.block([[p, -q], [q, p]])

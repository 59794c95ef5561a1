"""One-parameter family of maps from block operators on C^n (x) H to n x n matrices.

For a state S, the plus-map sends a block operator to the matrix of block
traces tr[S X_jk]; the minus-map is the plus-map composed with the block
partial transpose.  Their convex combinations are real symmetric on
Hermitian, T1-symmetric inputs and positive on PSD inputs, which is what
turns the block-operator risk representation into an n x n matrix constraint.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .linalg import BlockOperator, require_density


def is_symmetric_hermitian(x: BlockOperator, rtol: float = 1e-10) -> bool:
    """True when X is Hermitian and invariant under the block partial transpose."""
    return x.is_hermitian(rtol) and x.is_t1_symmetric(rtol)


def map_plus(x: BlockOperator, state: np.ndarray) -> np.ndarray:
    """Blockwise trace against the state: output[j, k] = tr[S X_jk]."""
    state = require_density(state)
    if x.d != state.shape[0]:
        raise InvalidInput(f"block dimension {x.d} does not match state dimension {state.shape[0]}")
    return np.einsum("jkab,ba->jk", x.blocks, state)


def map_minus(x: BlockOperator, state: np.ndarray) -> np.ndarray:
    """Plus-map of the block partial transpose: output[j, k] = tr[S X_kj]."""
    return map_plus(x.partial_transpose_T1(), state)


def map_lambda(x: BlockOperator, state: np.ndarray, lam: float) -> np.ndarray:
    """Convex combination ((1+lam)/2) map_plus + ((1-lam)/2) map_minus, lam in [-1, 1]."""
    if not -1.0 <= lam <= 1.0:
        raise InvalidInput(f"lambda must lie in [-1, 1], got {lam}")
    return 0.5 * (1 + lam) * map_plus(x, state) + 0.5 * (1 - lam) * map_minus(x, state)

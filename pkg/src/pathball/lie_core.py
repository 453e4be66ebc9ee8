"""Matrix kernel for SO(d) and its algebra of skew-symmetric matrices.

Elements of the algebra are plain (d, d) skew-symmetric numpy arrays, group
elements are (d, d) rotation matrices.  The inner product on the algebra is
the Frobenius pairing tr(X^T Y), which is invariant under conjugation by
orthogonal matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

SKEW_TOL = 1e-12
GROUP_TOL = 1e-10


class DimensionMismatch(ValueError):
    pass


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def require_skew(X, tol: float = SKEW_TOL) -> np.ndarray:
    X = _as_square(X)
    dev = np.abs(X + X.T).max()
    if dev > tol:
        raise ValueError(f"matrix is not skew-symmetric (deviation {dev:.3e})")
    return X


def require_rotation(U, tol: float = GROUP_TOL) -> np.ndarray:
    U = _as_square(U)
    d = U.shape[0]
    dev = np.linalg.norm(U.T @ U - np.eye(d))
    if dev > tol:
        raise ValueError(f"matrix is not orthogonal (deviation {dev:.3e})")
    det = np.linalg.det(U)
    if abs(det - 1.0) > tol:
        raise ValueError(f"determinant is {det:.12f}, not 1")
    return U


def hs_inner(X, Y) -> float:
    """Frobenius pairing tr(X^T Y)."""
    X, Y = np.asarray(X, float), np.asarray(Y, float)
    if X.shape != Y.shape:
        raise DimensionMismatch(f"shapes {X.shape} and {Y.shape} differ")
    return float(np.sum(X * Y))


def hs_norm(X) -> float:
    return float(np.linalg.norm(X))


def uniform_norm(A) -> float:
    """Operator (spectral) norm: the largest singular value."""
    return float(np.linalg.norm(np.asarray(A, float), 2))


def exp_so3(X: np.ndarray) -> np.ndarray:
    """Rodrigues closed form of the exponential for 3x3 skew matrices."""
    theta = np.sqrt(0.5) * np.linalg.norm(X)
    if theta < 1e-154:
        return np.eye(3) + X
    K = X / theta
    return np.eye(3) + np.sin(theta) * K + (1.0 - np.cos(theta)) * (K @ K)


def exp_so3_batch(X: np.ndarray) -> np.ndarray:
    """Vectorized Rodrigues formula for a stack of (n, 3, 3) skew matrices."""
    X = np.asarray(X, float)
    theta = np.sqrt(0.5) * np.linalg.norm(X, axis=(-2, -1))
    safe = np.where(theta < 1e-154, 1.0, theta)
    K = X / safe[..., None, None]
    out = (np.eye(3)
           + np.sin(theta)[..., None, None] * K
           + (1.0 - np.cos(theta))[..., None, None] * (K @ K))
    tiny = theta < 1e-154
    if np.any(tiny):
        out[tiny] = np.eye(3) + X[tiny]
    return out


def exp_matrix(X: np.ndarray) -> np.ndarray:
    """Exponential of a skew-symmetric matrix; lands in SO(d).

    Dedicated Rodrigues path for d=3, scaling-and-squaring Pade otherwise.
    """
    X = np.asarray(X, float)
    if X.shape == (3, 3):
        return exp_so3(X)
    return expm(X)


def adjoint(u: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Conjugation action u X u^{-1} of the group on its algebra."""
    u, X = np.asarray(u, float), np.asarray(X, float)
    if u.shape != X.shape:
        raise DimensionMismatch(f"shapes {u.shape} and {X.shape} differ")
    return u @ X @ u.T


def skew_basis(dim: int) -> np.ndarray:
    """Orthonormal basis (E_ij - E_ji)/sqrt(2), i<j, stacked as (d_k, d, d)."""
    if dim < 2:
        raise ValueError("dim must be at least 2")
    pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    out = np.zeros((len(pairs), dim, dim))
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for a, (i, j) in enumerate(pairs):
        out[a, i, j] = inv_sqrt2
        out[a, j, i] = -inv_sqrt2
    return out


@dataclass(frozen=True)
class AlgebraBasis:
    """Orthonormal basis of the skew-symmetric matrices of one size."""

    dim: int
    elements: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.elements is None:
            object.__setattr__(self, "elements", skew_basis(self.dim))

    @property
    def algebra_dim(self) -> int:
        return self.dim * (self.dim - 1) // 2

    def coords(self, X: np.ndarray) -> np.ndarray:
        """Coordinates of skew matrices (..., d, d) in this basis."""
        return np.tensordot(np.asarray(X, float), self.elements, axes=([-2, -1], [1, 2]))

    def matrix(self, coords: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`coords`: (..., d_k) -> (..., d, d)."""
        return np.tensordot(np.asarray(coords, float), self.elements, axes=([-1], [0]))

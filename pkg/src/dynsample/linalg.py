"""Dense complex linear algebra on the finite-dimensional Hilbert space C^d.

Vectors are 1-D complex arrays, matrices 2-D complex arrays.  The inner
product is linear in the first slot and conjugate-linear in the second,
so ``inner(u, v) = sum(u * conj(v))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    pass


class SingularMatrixError(np.linalg.LinAlgError):
    pass


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across the package."""

    tol_ortho: float = 1e-12
    tol_residual: float = 1e-10
    tol_frame_rel: float = 1e-10
    tol_recovery: float = 1e-12

    def __post_init__(self):
        for name in ("tol_ortho", "tol_residual", "tol_frame_rel", "tol_recovery"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")


DEFAULT_TOL = Tolerances()


def as_vector(v, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {arr.shape[0]}")
    return arr


def as_matrix(M, shape: tuple[int | None, int | None] = (None, None)) -> np.ndarray:
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    for got, want in zip(arr.shape, shape):
        if want is not None and got != want:
            raise DimensionError(f"expected shape {shape}, got {arr.shape}")
    return arr


def inner(u, v) -> complex:
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    return complex(np.sum(u * np.conj(v)))


def spectral_norm(M) -> float:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(as_matrix(M), 2))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^d stored by an orthonormal basis (columns of ``basis``).

    ``basis`` has shape ``(d, m)``; ``m == 0`` encodes the zero subspace.
    """

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim != 2 or B.shape[0] < 1:
            raise DimensionError(f"basis must be d x m with d >= 1, got {B.shape}")
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def check_orthonormal(self, tol: float = DEFAULT_TOL.tol_ortho) -> float:
        """Return ``max|B^H B - I|``; raise if it exceeds ``tol`` scaled by 100."""
        gram = self.basis.conj().T @ self.basis
        err = float(np.max(np.abs(gram - np.eye(self.dim)), initial=0.0))
        if err > 100 * tol:
            raise ValueError(f"basis is not orthonormal (max deviation {err:.3e})")
        return err

    @classmethod
    def full(cls, d: int) -> "Subspace":
        return cls(np.eye(d, dtype=complex))

    @classmethod
    def zero(cls, d: int) -> "Subspace":
        return cls(np.zeros((d, 0), dtype=complex))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


def orthonormalize(V, tol: float = DEFAULT_TOL.tol_ortho) -> Subspace:
    """Orthonormal basis of the column space of ``V`` via a thin SVD.

    Columns whose singular value is at most ``tol`` times the largest are
    discarded; an all-zero ``V`` gives the zero subspace.
    """
    V = np.asarray(V, dtype=complex)
    if V.ndim == 1:
        V = V[:, None]
    V = as_matrix(V) if V.shape[1] else V
    d = V.shape[0]
    if V.shape[1] == 0:
        return Subspace.zero(d)
    U, sv, _ = np.linalg.svd(V, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return Subspace.zero(d)
    rank = int(np.sum(sv > tol * sv[0]))
    return Subspace(U[:, :rank])


def project(S: Subspace, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape[-1] != S.ambient_dim:
        raise DimensionError(f"vector dimension {v.shape[-1]} != ambient dimension {S.ambient_dim}")
    B = S.basis
    # works for a single vector or a stack of row vectors
    return (v @ B.conj()) @ B.T


def solve(M, b, tol: float = DEFAULT_TOL.tol_residual) -> np.ndarray:
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"matrix must be square, got {M.shape}")
    b = np.asarray(b, dtype=complex)
    if b.shape[0] != M.shape[0]:
        raise DimensionError(f"right-hand side has {b.shape[0]} rows, matrix has {M.shape[0]}")
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= tol * sv[0]:
        raise SingularMatrixError(
            f"matrix is numerically singular (sigma_min/sigma_max = {sv[-1] / max(sv[0], 1e-300):.3e})"
        )
    return np.linalg.solve(M, b)


def hermitian_eigenrange(M, tol: float = DEFAULT_TOL.tol_residual) -> tuple[float, float]:
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"matrix must be square, got {M.shape}")
    scale = max(float(np.max(np.abs(M))), 1.0)
    if np.max(np.abs(M - M.conj().T)) > tol * scale:
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    eig = np.linalg.eigvalsh((M + M.conj().T) / 2)
    return float(eig[0]), float(eig[-1])

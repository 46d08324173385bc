"""The driven system x(n+1) = A x(n) + w(n) with an N-periodic source in W.

Sources and periodic solutions are stored as one period, arrays of shape
``(N, d)``.  The sampling system G is an array of shape ``(J, d)`` whose
row ``j`` is ``g_j``; samples are ``y[n, j] = <x(n), g_j>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dft import dft, idft
from .linalg import DEFAULT_TOL, Subspace, Tolerances, as_matrix, as_vector, orthonormalize, project, spectral_norm
from .rng import complex_normal, stream

NEAR_UNIT_NORM = 0.99


class NotContractiveError(ValueError):
    pass


class TooFewRowsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SystemInstance:
    A: np.ndarray
    W: Subspace
    G: np.ndarray
    N: int
    seed: int = 0
    tol: Tolerances = field(default=DEFAULT_TOL)

    def __post_init__(self):
        A = as_matrix(self.A)
        d = A.shape[0]
        if A.shape != (d, d):
            raise ValueError(f"A must be square, got {A.shape}")
        G = np.asarray(self.G, dtype=complex)
        if G.ndim == 1:
            G = G[None, :]
        G = as_matrix(G, (None, d))
        if G.shape[0] < 1:
            raise ValueError("sampling system must contain at least one vector")
        if self.W.ambient_dim != d:
            raise ValueError(f"W lives in C^{self.W.ambient_dim}, A acts on C^{d}")
        if int(self.N) < 1:
            raise ValueError(f"period must be >= 1, got {self.N}")
        self.W.check_orthonormal(self.tol.tol_ortho)
        norm_A = spectral_norm(A)
        if not norm_A < 1.0:
            raise NotContractiveError(f"||A|| = {norm_A:.6g} is not < 1")
        if norm_A > NEAR_UNIT_NORM:
            warnings.warn(
                f"||A|| = {norm_A:.6g} is close to 1; transients decay slowly",
                RuntimeWarning,
                stacklevel=2,
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "_norm_A", norm_A)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def J(self) -> int:
        return self.G.shape[0]

    @property
    def norm_A(self) -> float:
        return self._norm_A


@dataclass(frozen=True)
class TailConstant:
    c: np.ndarray
    truncation_k: int
    bound: float


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray

    @property
    def n_max(self) -> int:
        return self.states.shape[0] - 1


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """Space-time samples; row ``n`` holds ``(y[n, j])_j``."""

    rows: np.ndarray
    period: int
    noise_level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=complex)
        if rows.ndim != 2 or rows.shape[1] < 1:
            raise ValueError(f"sample rows must be a 2-D array with J >= 1 columns, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("sample matrix has non-finite entries")
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")
        if rows.shape[0] < self.period:
            raise TooFewRowsError(f"{rows.shape[0]} rows is less than one period ({self.period})")
        object.__setattr__(self, "rows", rows)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def J(self) -> int:
        return self.rows.shape[1]


def check_source(inst: SystemInstance, w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if w.shape != (inst.N, inst.dim):
        raise ValueError(f"source must have shape {(inst.N, inst.dim)}, got {w.shape}")
    off = np.linalg.norm(w - project(inst.W, w))
    if off > inst.tol.tol_residual * max(1.0, float(np.linalg.norm(w))):
        raise ValueError(f"source leaves W (distance {off:.3e})")
    return w


def build_resolvents(A, N: int) -> np.ndarray:
    """T_s = (exp(2 pi i s / N) I - A)^{-1} for s = 0..N-1, shape ``(N, d, d)``."""
    A = as_matrix(A)
    norm_A = spectral_norm(A)
    if not norm_A < 1.0:
        raise NotContractiveError(f"||A|| = {norm_A:.6g} is not < 1")
    d = A.shape[0]
    eye = np.eye(d)
    return np.stack([np.linalg.inv(np.exp(2j * np.pi * s / N) * eye - A) for s in range(N)])


def inverse_resolvents(A, N: int) -> np.ndarray:
    """T_s^{-1} = exp(2 pi i s / N) I - A, i.e. the blocks of U."""
    A = as_matrix(A)
    eye = np.eye(A.shape[0])
    return np.stack([np.exp(2j * np.pi * s / N) * eye - A for s in range(N)])


def periodic_solution(inst: SystemInstance, w) -> np.ndarray:
    w = check_source(inst, w)
    T = build_resolvents(inst.A, inst.N)
    w_hat = dft(w)
    xp_hat = np.einsum("kab,kb->ka", T, w_hat)
    return idft(xp_hat)


def tail_constant(inst: SystemInstance, w, x0, tol: float) -> TailConstant:
    """c with x(n) = A^n c + x_p(n); the tail series is cut once its remainder is below ``tol``.

    c = x0 - sum_{j >= 0} A^j w(-1 - j), with w extended periodically.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    w = check_source(inst, w)
    x0 = as_vector(x0, inst.dim)
    a = inst.norm_A
    w_max = float(np.max(np.linalg.norm(w, axis=1)))
    if w_max == 0.0 or a == 0.0:
        K = 0
    else:
        # smallest K with a^{K+1} w_max / (1 - a) <= tol
        K = max(0, math.ceil(math.log(tol * (1 - a) / w_max) / math.log(a)) - 1)
    bound = a ** (K + 1) / (1 - a) * w_max
    acc = np.zeros(inst.dim, dtype=complex)
    power = np.eye(inst.dim, dtype=complex)
    for j in range(K + 1):
        acc += power @ w[(-1 - j) % inst.N]
        power = inst.A @ power
    return TailConstant(c=x0 - acc, truncation_k=K, bound=bound)


def simulate(inst: SystemInstance, w, x0, n_max: int) -> Trajectory:
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    w = check_source(inst, w)
    x = as_vector(x0, inst.dim).copy()
    states = np.empty((n_max + 1, inst.dim), dtype=complex)
    states[0] = x
    for n in range(n_max):
        x = inst.A @ x + w[n % inst.N]
        states[n + 1] = x
    return Trajectory(states)


def closed_form_state(inst: SystemInstance, w, x0, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    xp = periodic_solution(inst, w)
    tail = tail_constant(inst, w, x0, inst.tol.tol_residual)
    return np.linalg.matrix_power(inst.A, n) @ tail.c + xp[n % inst.N]


def generate_samples(inst: SystemInstance, w, x0, n_max: int, noise_level: float = 0.0, seed: int | None = None) -> SampleMatrix:
    """Rows n = 0..n_max-1 of y[n, j] = <x(n), g_j> plus optional complex Gaussian noise."""
    if n_max < inst.N:
        raise TooFewRowsError(f"n_max = {n_max} is less than one period ({inst.N})")
    if not noise_level >= 0:
        raise ValueError(f"noise_level must be >= 0, got {noise_level}")
    seed = inst.seed if seed is None else seed
    states = simulate(inst, w, x0, n_max - 1).states
    rows = states @ inst.G.conj().T
    if noise_level > 0:
        rows = rows + complex_normal(stream(seed, "noise"), rows.shape, noise_level)
    return SampleMatrix(rows=rows, period=inst.N, noise_level=float(noise_level), seed=int(seed))


def random_instance(d: int, N: int, J: int, subspace_dim: int, norm_A: float, seed: int, tol: Tolerances = DEFAULT_TOL) -> SystemInstance:
    """Complex Gaussian A rescaled to ``||A|| = norm_A``, random W and Gaussian G."""
    if not 1 <= subspace_dim <= d:
        raise ValueError(f"subspace_dim must be in [1, {d}], got {subspace_dim}")
    if not 0 < norm_A < 1:
        raise ValueError(f"norm_A must be in (0, 1), got {norm_A}")
    if N < 1 or J < 1:
        raise ValueError("period and number of sampling vectors must be >= 1")
    A = complex_normal(stream(seed, "A"), (d, d))
    A *= norm_A / spectral_norm(A)
    if subspace_dim == d:
        W = Subspace.full(d)
    else:
        W = orthonormalize(complex_normal(stream(seed, "W"), (d, subspace_dim)))
    G = complex_normal(stream(seed, "G"), (J, d))
    return SystemInstance(A=A, W=W, G=G, N=N, seed=seed, tol=tol)


def random_source(inst: SystemInstance, seed: int | None = None, label: str = "source") -> tuple[np.ndarray, np.ndarray]:
    """Planted source (Gaussian vectors projected onto W) and Gaussian initial state."""
    seed = inst.seed if seed is None else seed
    w = project(inst.W, complex_normal(stream(seed, label), (inst.N, inst.dim)))
    x0 = complex_normal(stream(seed, label + ":x0"), inst.dim)
    return w, x0

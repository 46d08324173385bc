"""Frame certification of a sampling system against the resolvent family.

Two equivalent per-frequency conditions are checked for s = 0..N-1:

* ``"condition-2"``: {P_W T_s^* g_j} is a frame of W;
* ``"condition-3"``: {P_{W_s} g_j} is a frame of W_s = T_s(W).

Frame bounds are the extreme eigenvalues of the frame operator written in
an orthonormal basis of the subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import Subspace, hermitian_eigenrange, orthonormalize, project, spectral_norm
from .system import SystemInstance, build_resolvents

VARIANTS = ("condition-2", "condition-3")


class NotAFrameError(ValueError):
    pass


class EquivalenceViolationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ProjectedSystem:
    s: int
    vectors: np.ndarray  # (J, d)
    subspace: Subspace
    variant: str


@dataclass
class FrequencyCertificate:
    s: int
    lower: float
    upper: float
    is_frame: bool
    condition_number: float
    lower_c2: float
    upper_c2: float
    is_frame_c2: bool
    norm_T: float
    norm_T_inv: float
    vacuous: bool = False


@dataclass
class FrameCertificate:
    frequencies: list[FrequencyCertificate]
    verdict: bool
    bessel_bound_G: float
    amplification: float
    tol_frame_rel: float

    @property
    def failing(self) -> list[int]:
        return [f.s for f in self.frequencies if not f.is_frame]


@dataclass(frozen=True, eq=False)
class DualFrameFamily:
    """Canonical duals per frequency, ``duals[s, j]`` is f_j^s; shape ``(N, J, d)``."""

    duals: np.ndarray
    variant: str
    subspaces: list[Subspace] = field(default_factory=list)

    @property
    def N(self) -> int:
        return self.duals.shape[0]

    def bessel_bounds(self) -> np.ndarray:
        return np.array([bessel_bound(f) if f.size else 0.0 for f in self.duals])


def projected_system(inst: SystemInstance, s: int, variant: str, T: np.ndarray | None = None) -> ProjectedSystem:
    if not 0 <= s < inst.N:
        raise ValueError(f"frequency s must be in [0, {inst.N - 1}], got {s}")
    if T is None:
        T = build_resolvents(inst.A, inst.N)[s]
    if variant == "condition-2":
        # rows of G @ conj(T) are (T^* g_j)^T
        vectors = project(inst.W, inst.G @ T.conj())
        subspace = inst.W
    elif variant == "condition-3":
        subspace = orthonormalize(T @ inst.W.basis, inst.tol.tol_ortho)
        vectors = project(subspace, inst.G)
    else:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return ProjectedSystem(s=s, vectors=vectors, subspace=subspace, variant=variant)


def _coords(ps: ProjectedSystem) -> np.ndarray:
    # coefficients of each v_j in the subspace basis, shape (J, m)
    return ps.vectors @ ps.subspace.basis.conj()


def frame_operator(ps: ProjectedSystem) -> np.ndarray:
    """Frame operator restricted to the subspace, as an m x m Hermitian matrix."""
    c = _coords(ps)
    return c.T @ c.conj()


def frame_bounds(ps: ProjectedSystem) -> tuple[float, float]:
    """Optimal frame bounds; ``(inf, inf)`` for the zero subspace (vacuous frame)."""
    if ps.subspace.dim == 0:
        return math.inf, math.inf
    lo, hi = hermitian_eigenrange(frame_operator(ps))
    return max(lo, 0.0), hi


def canonical_dual(ps: ProjectedSystem, tol_frame_rel: float = 1e-10, scale: float = 0.0) -> np.ndarray:
    """Dual vectors S^{-1} v_j, shape ``(J, d)``; zero vectors for the zero subspace.

    The frame test is ``lower > tol_frame_rel * max(upper, scale)``.
    """
    J, d = ps.vectors.shape
    if ps.subspace.dim == 0:
        return np.zeros((J, d), dtype=complex)
    lo, hi = frame_bounds(ps)
    if not _is_frame(lo, hi, tol_frame_rel, scale):
        raise NotAFrameError(f"not a frame at s={ps.s} ({ps.variant}): bounds ({lo:.3e}, {hi:.3e})")
    c = _coords(ps)
    S = c.T @ c.conj()
    # f_j = B S^{-1} c_j with S acting on coordinate columns
    dual_coords = np.linalg.solve(S, c.T).T
    return dual_coords @ ps.subspace.basis.T


def bessel_bound(G) -> float:
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or G.shape[0] < 1:
        raise ValueError(f"need at least one vector, got shape {G.shape}")
    return spectral_norm(G) ** 2


def dual_family(inst: SystemInstance, variant: str = "condition-3") -> DualFrameFamily:
    T = build_resolvents(inst.A, inst.N)
    scale = bessel_bound(inst.G)
    duals, subspaces = [], []
    for s in range(inst.N):
        ps = projected_system(inst, s, variant, T[s])
        duals.append(canonical_dual(ps, inst.tol.tol_frame_rel, scale))
        subspaces.append(ps.subspace)
    return DualFrameFamily(duals=np.stack(duals), variant=variant, subspaces=subspaces)


def _is_frame(lo: float, hi: float, tol: float, scale: float = 0.0) -> bool:
    # scale (the Bessel bound of G) keeps an all-orthogonal system, whose
    # bounds are both round-off, from passing a purely relative test
    return math.isinf(lo) or lo > tol * max(hi, scale)


def certify(inst: SystemInstance, slack: float = 1e-9) -> FrameCertificate:
    """Frame bounds for both conditions at every frequency.

    A frequency passes when lower > tol_frame_rel * max(upper, C_G), with C_G
    the Bessel bound of G.  Raises :class:`EquivalenceViolationError` if the
    two verdicts disagree at some s, or if lower_3 >= lower_2 / ||T_s||^2 or
    lower_2 >= lower_3 / ||T_s^{-1}||^2 fails by more than ``slack``
    (relative to the upper bound).
    """
    tol = inst.tol.tol_frame_rel
    T = build_resolvents(inst.A, inst.N)
    C_G = bessel_bound(inst.G)
    freqs = []
    for s in range(inst.N):
        lo2, hi2 = frame_bounds(projected_system(inst, s, "condition-2", T[s]))
        lo3, hi3 = frame_bounds(projected_system(inst, s, "condition-3", T[s]))
        norm_T = spectral_norm(T[s])
        norm_T_inv = spectral_norm(np.linalg.inv(T[s]))
        vacuous = inst.W.dim == 0
        ok2, ok3 = _is_frame(lo2, hi2, tol, C_G), _is_frame(lo3, hi3, tol, C_G)
        if ok2 != ok3:
            raise EquivalenceViolationError(
                f"s={s}: condition-2 frame={ok2} (bounds {lo2:.3e}, {hi2:.3e}) but "
                f"condition-3 frame={ok3} (bounds {lo3:.3e}, {hi3:.3e}); cond(T_s)={norm_T * norm_T_inv:.3e}"
            )
        if not vacuous:
            eps = slack * max(1.0, hi2, hi3)
            if lo3 < lo2 / norm_T**2 - eps or lo2 < lo3 / norm_T_inv**2 - eps:
                raise EquivalenceViolationError(
                    f"s={s}: frame bounds violate the transfer inequalities "
                    f"(lower_2={lo2:.6e}, lower_3={lo3:.6e}, ||T||={norm_T:.6e}, ||T^-1||={norm_T_inv:.6e})"
                )
        cond = 1.0 if vacuous else (hi3 / lo3 if lo3 > 0 else math.inf)
        freqs.append(
            FrequencyCertificate(
                s=s, lower=lo3, upper=hi3, is_frame=ok3, condition_number=cond,
                lower_c2=lo2, upper_c2=hi2, is_frame_c2=ok2,
                norm_T=norm_T, norm_T_inv=norm_T_inv, vacuous=vacuous,
            )
        )
    norm_U = max(f.norm_T_inv for f in freqs)
    amplification = norm_U * math.sqrt(max(f.condition_number for f in freqs))
    return FrameCertificate(
        frequencies=freqs,
        verdict=all(f.is_frame for f in freqs),
        bessel_bound_G=C_G,
        amplification=amplification,
        tol_frame_rel=tol,
    )

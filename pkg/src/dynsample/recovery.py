"""Source recovery from space-time samples.

The reconstruction is R = F_N^{-1} U F_N Q, where Q maps the sample matrix
to the periodic solution x_p and U = diag(T_0^{-1}, ..., T_{N-1}^{-1}).

Q works on the per-residue limit rows t_r = lim_k y[Nk + r, :].  Since
<., g_j> is linear in its first slot, the DFT of the limit rows over r gives
the samples of the spectrum, t_hat_s = (<x_p_hat(s), g_j>)_j, and
x_p_hat(s) = T_s w_hat(s) lies in W_s.  The dual frame of W_s is therefore
applied to t_hat_s, frequency by frequency, and Q returns the inverse DFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dft import dft, idft
from .frames import DualFrameFamily, FrameCertificate, certify, dual_family, frame_operator, projected_system
from .linalg import project
from .system import (
    SampleMatrix,
    SystemInstance,
    TooFewRowsError,
    build_resolvents,
    check_source,
    generate_samples,
    inverse_resolvents,
    periodic_solution,
    random_source,
)

# deltas below FLOOR_EPS * eps * scale are treated as round-off
FLOOR_EPS = 1e3
GEOMETRIC_SLACK = 1.1


class CertificateFailedError(RuntimeError):
    def __init__(self, certificate: FrameCertificate):
        self.certificate = certificate
        super().__init__(f"frame certificate fails at frequencies {certificate.failing}")


class NonIdentifiableError(RuntimeError):
    def __init__(self, result: "OracleResult"):
        self.result = result
        super().__init__(
            f"least-squares design is rank deficient (sigma_min/sigma_max = {result.sigma_ratio:.3e})"
        )


class WitnessUnavailableError(ValueError):
    pass


def _rows(Y) -> np.ndarray:
    return Y.rows if isinstance(Y, SampleMatrix) else np.asarray(Y, dtype=complex)


def op_norm_l2_linf(Y) -> float:
    rows = _rows(Y)
    if rows.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(rows, axis=1)))


@dataclass
class ResidueLimits:
    limits: np.ndarray  # (N, J)
    K_last: int  # index of the last full period block
    deltas: np.ndarray  # (K_last, N): ||r_{N(k+1)+s} - r_{Nk+s}||
    block_deltas: np.ndarray  # (K_last,)
    rates: np.ndarray  # (N,) per-residue decay ratio estimates
    convergence_rate: float
    last_delta: np.ndarray  # (N,)
    geometric: bool
    warnings: list[str] = field(default_factory=list)


def _ratio_estimate(d: np.ndarray, floor: float) -> float:
    ok = (d[:-1] > floor) & (d[1:] > floor)
    if not np.any(ok):
        return math.nan
    return float(np.median(d[1:][ok] / d[:-1][ok]))


def residue_limits(Y: SampleMatrix, average_blocks: int = 1) -> ResidueLimits:
    """Per-residue limit rows, estimated from the last full period block(s).

    ``average_blocks > 1`` averages the last few blocks, which only helps
    when noise dominates the remaining transient.
    """
    N = Y.period
    rows = Y.rows
    K_full = rows.shape[0] // N
    if K_full < 2:
        raise TooFewRowsError(f"need at least two full period blocks, got {rows.shape[0]} rows with N={N}")
    if not 1 <= average_blocks <= K_full:
        raise ValueError(f"average_blocks must be in [1, {K_full}], got {average_blocks}")
    blocks = rows[: K_full * N].reshape(K_full, N, -1)
    limits = blocks[K_full - average_blocks:].mean(axis=0)
    deltas = np.linalg.norm(np.diff(blocks, axis=0), axis=2)
    block_deltas = np.sqrt(np.sum(deltas**2, axis=1))
    floor = FLOOR_EPS * np.finfo(float).eps * max(1.0, op_norm_l2_linf(rows))

    rates = np.array([_ratio_estimate(deltas[:, s], floor) for s in range(N)])
    rate = _ratio_estimate(block_deltas, floor)

    msgs = []
    jumps = [k for k in range(len(block_deltas) - 1)
             if block_deltas[k + 1] > GEOMETRIC_SLACK * max(block_deltas[k], floor)]
    if jumps:
        msgs.append(f"block deltas grow at blocks {jumps[:10]}: noise floor, tampering, or ||A|| near 1")
    if not math.isnan(rate) and rate >= 1.0:
        msgs.append(f"estimated decay ratio {rate:.3g} per block is not < 1")
    if block_deltas.size and block_deltas[-1] > floor:
        msgs.append(f"last block delta {block_deltas[-1]:.3e} is above round-off; limits may be truncated")
    return ResidueLimits(
        limits=limits,
        K_last=K_full - 1,
        deltas=deltas,
        block_deltas=block_deltas,
        rates=rates,
        convergence_rate=rate,
        last_delta=deltas[-1].copy(),
        geometric=not jumps and not (not math.isnan(rate) and rate >= 1.0),
        warnings=msgs,
    )


def q_bound_constant(duals: DualFrameFamily) -> float:
    """max_s sqrt(Bessel bound of the dual family at s)."""
    return float(math.sqrt(max(duals.bessel_bounds())))


def apply_Q(Y: SampleMatrix, duals: DualFrameFamily, limits: ResidueLimits | None = None) -> np.ndarray:
    """Estimate of the periodic solution x_p, shape ``(N, d)``."""
    if duals.N != Y.period:
        raise ValueError(f"dual family has {duals.N} frequencies, samples have period {Y.period}")
    if Y.J != duals.duals.shape[1]:
        raise ValueError(f"samples have {Y.J} columns, dual family has {duals.duals.shape[1]} vectors")
    if limits is None:
        limits = residue_limits(Y)
    t_hat = dft(limits.limits)
    xp_hat = np.einsum("sj,sjd->sd", t_hat, duals.duals)
    return idft(xp_hat)


@dataclass
class RecoveryReport:
    w_hat: np.ndarray
    x_p_hat: np.ndarray
    truncation_bound: float
    certificate: FrameCertificate
    residuals: np.ndarray  # per-frequency sample-consistency residuals
    projection_residual: float
    limits: ResidueLimits
    q_bound: float
    oracle_gap: float | None = None


def truncation_bound(inst: SystemInstance, K_first: int, w_max: float, x0_bound: float | None = None) -> float:
    """Bound on |y[NK + r, j] - <x_p(r), g_j>| for every block K >= K_first."""
    a = inst.norm_A
    c_bound_w = w_max / (1 - a)
    if x0_bound is None:
        x0_bound = 10 * c_bound_w
    g_max = float(np.max(np.linalg.norm(inst.G, axis=1)))
    return a ** (inst.N * K_first) * (x0_bound + c_bound_w) * g_max


def apply_R(
    inst: SystemInstance,
    Y: SampleMatrix,
    x0_bound: float | None = None,
    average_blocks: int = 1,
    certificate: FrameCertificate | None = None,
) -> RecoveryReport:
    if Y.period != inst.N:
        raise ValueError(f"samples have period {Y.period}, instance has N={inst.N}")
    if Y.J != inst.J:
        raise ValueError(f"samples have {Y.J} columns, instance has J={inst.J}")
    cert = certificate if certificate is not None else certify(inst)
    if not cert.verdict:
        raise CertificateFailedError(cert)
    duals = dual_family(inst, "condition-3")
    limits = residue_limits(Y, average_blocks)
    xp_hat = apply_Q(Y, duals, limits)

    spec_xp = dft(xp_hat)
    w_spec = np.einsum("sab,sb->sa", inverse_resolvents(inst.A, inst.N), spec_xp)
    w_raw = idft(w_spec)
    w_hat = project(inst.W, w_raw)

    t_hat = dft(limits.limits)
    fitted = spec_xp @ inst.G.conj().T
    residuals = np.linalg.norm(fitted - t_hat, axis=1) / np.maximum(np.linalg.norm(t_hat, axis=1), 1e-300)

    w_max = float(np.max(np.linalg.norm(w_hat, axis=1)))
    bound = truncation_bound(inst, limits.K_last - average_blocks + 1, w_max, x0_bound)
    return RecoveryReport(
        w_hat=w_hat,
        x_p_hat=xp_hat,
        truncation_bound=bound,
        certificate=cert,
        residuals=residuals,
        projection_residual=float(np.linalg.norm(w_raw - w_hat)),
        limits=limits,
        q_bound=q_bound_constant(duals),
    )


@dataclass
class OracleResult:
    w: np.ndarray
    x0: np.ndarray
    residual: float
    sigma_min: float
    sigma_max: float
    rank_deficient: bool

    @property
    def sigma_ratio(self) -> float:
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0


def design_matrix(inst: SystemInstance, n_rows: int) -> tuple[np.ndarray, np.ndarray]:
    """Linear maps from x0 and from the W-coordinates of w(0..N-1) to the stacked samples.

    Returns ``(D_x0, D_w)`` with ``n_rows * J`` rows, ordered by (n, j).
    """
    d, N, m = inst.dim, inst.N, inst.W.dim
    P = d + N * m
    X = np.zeros((d, P), dtype=complex)
    X[:, :d] = np.eye(d)
    drive = np.zeros((N, d, P), dtype=complex)
    for r in range(N):
        drive[r, :, d + r * m: d + (r + 1) * m] = inst.W.basis
    Gc = inst.G.conj()
    D = np.empty((n_rows, inst.J, P), dtype=complex)
    for n in range(n_rows):
        D[n] = Gc @ X
        X = inst.A @ X + drive[n % N]
    D = D.reshape(n_rows * inst.J, P)
    return D[:, :d], D[:, d:]


def oracle_least_squares(inst: SystemInstance, Y: SampleMatrix, rcond: float = 1e-9, allow_rank_deficient: bool = False) -> OracleResult:
    """Least-squares fit of (x0, w) to all samples through the explicit solution formula.

    The x0 directions are projected out first, so rank deficiency is only
    reported when the source itself is not determined by the samples.
    """
    d, N, m = inst.dim, inst.N, inst.W.dim
    if Y.n_rows * Y.J < d + N * m:
        raise TooFewRowsError(f"{Y.n_rows * Y.J} equations for {d + N * m} unknowns")
    Dx, Dw = design_matrix(inst, Y.n_rows)
    y = Y.rows.reshape(-1)

    Ux, sx, _ = np.linalg.svd(Dx, full_matrices=False)
    Ux = Ux[:, sx > rcond * sx[0]] if sx.size and sx[0] > 0 else Ux[:, :0]
    def perp(M):
        return M - Ux @ (Ux.conj().T @ M)

    if m == 0:
        beta = np.zeros(0, dtype=complex)
        smin = smax = 0.0
        deficient = False
    else:
        Dw_perp = perp(Dw)
        sw = np.linalg.svd(Dw_perp, compute_uv=False)
        scale = np.linalg.svd(Dw, compute_uv=False)[0]
        smin, smax = float(sw[-1]), float(scale)
        deficient = bool(smin <= rcond * smax)
        beta = np.linalg.lstsq(Dw_perp, perp(y), rcond=None)[0]
    x0 = np.linalg.lstsq(Dx, y - Dw @ beta, rcond=rcond)[0]
    w = beta.reshape(N, m) @ inst.W.basis.T
    residual = float(np.linalg.norm(Dx @ x0 + Dw @ beta - y))
    result = OracleResult(w=w, x0=x0, residual=residual, sigma_min=smin, sigma_max=smax, rank_deficient=deficient)
    if deficient and not allow_rank_deficient:
        raise NonIdentifiableError(result)
    return result


@dataclass
class AmbiguityWitness:
    s: int
    w: np.ndarray
    w_prime: np.ndarray
    x0: np.ndarray
    x0_prime: np.ndarray
    lambda_min: float
    source_gap: float
    sample_gap: float
    gap_bound: float
    n_rows: int


def ambiguity_witness(inst: SystemInstance, s: int, w=None, n_rows: int | None = None, certificate: FrameCertificate | None = None) -> AmbiguityWitness:
    """Two sources a unit distance apart whose sample matrices nearly coincide.

    The perturbation is a pure tone at frequency ``s`` in the direction of the
    smallest eigenvector of the condition-2 frame operator; both trajectories
    start on their own periodic orbit.
    """
    cert = certificate if certificate is not None else certify(inst)
    if not 0 <= s < inst.N:
        raise ValueError(f"frequency s must be in [0, {inst.N - 1}], got {s}")
    freq = cert.frequencies[s]
    if freq.is_frame:
        raise WitnessUnavailableError(f"certificate passes at s={s}; the source is determined there")
    T = build_resolvents(inst.A, inst.N)
    ps = projected_system(inst, s, "condition-2", T[s])
    evals, evecs = np.linalg.eigh(frame_operator(ps))
    v = inst.W.basis @ evecs[:, 0]
    v /= np.linalg.norm(v)
    lam = max(float(evals[0]), 0.0)

    if w is None:
        w = random_source(inst, label="witness")[0]
    w = check_source(inst, w)
    spike = np.zeros_like(w)
    spike[s] = v
    w_prime = project(inst.W, w + idft(spike))
    x0 = periodic_solution(inst, w)[0]
    x0_prime = periodic_solution(inst, w_prime)[0]
    if n_rows is None:
        n_rows = max(4 * inst.N, 8)
    Y = generate_samples(inst, w, x0, n_rows)
    Y_prime = generate_samples(inst, w_prime, x0_prime, n_rows)
    return AmbiguityWitness(
        s=s, w=w, w_prime=w_prime, x0=x0, x0_prime=x0_prime, lambda_min=lam,
        source_gap=float(np.linalg.norm(w - w_prime)),
        sample_gap=op_norm_l2_linf(Y.rows - Y_prime.rows),
        gap_bound=math.sqrt(inst.J * lam) * freq.norm_T + inst.tol.tol_residual,
        n_rows=n_rows,
    )

"""Invariant suite behind ``dynsample verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dft import dft, idft
from .frames import EquivalenceViolationError, certify, frame_bounds, projected_system
from .linalg import DEFAULT_TOL, Subspace, Tolerances, orthonormalize, spectral_norm
from .recovery import apply_R, oracle_least_squares, residue_limits
from .report import relative_error
from .rng import complex_normal, stream
from .system import (
    NotContractiveError,
    SampleMatrix,
    SystemInstance,
    build_resolvents,
    generate_samples,
    periodic_solution,
    random_source,
)

DECAY_RATE_SLACK = 1.1


@dataclass
class Check:
    name: str
    passed: bool | None  # None means skipped
    detail: str
    value: float | None = None


def _dft_checks(N: int, d: int, trials: int, seed: int) -> list[Check]:
    worst_norm = worst_round = worst_shift = 0.0
    for t in range(trials):
        q = complex_normal(stream(seed, "verify:dft", t), (N, d))
        qh = dft(q)
        worst_norm = max(worst_norm, abs(np.linalg.norm(qh) - np.linalg.norm(q)) / np.linalg.norm(q))
        worst_round = max(worst_round, relative_error(idft(qh), q))
        shifted = dft(np.roll(q, -1, axis=0))
        phase = np.exp(2j * np.pi * np.arange(N) / N)[:, None]
        worst_shift = max(worst_shift, relative_error(shifted, qh * phase))
    return [
        Check("dft_unitarity", worst_norm <= 1e-12, f"max relative norm change {worst_norm:.3e}", worst_norm),
        Check("dft_round_trip", worst_round <= 1e-12, f"max relative round-trip error {worst_round:.3e}", worst_round),
        Check("dft_shift", worst_shift <= 1e-12, f"max shift-property error {worst_shift:.3e}", worst_shift),
    ]


def _transfer_checks(d: int, J: int, trials: int, seed: int, tol: float) -> Check:
    """Frame transfer under a random invertible T, on random subspaces."""
    bad = 0
    for t in range(trials):
        rng = stream(seed, "verify:transfer", t)
        T = complex_normal(rng, (d, d)) + 2 * np.eye(d)
        V = orthonormalize(complex_normal(rng, (d, int(rng.integers(1, d + 1)))))
        G = complex_normal(rng, (J, d))
        coords2 = (G @ T.conj()) @ V.basis.conj()  # <P_V T^* g_j, b_k>
        TV = orthonormalize(T @ V.basis)
        coords3 = G @ TV.basis.conj()
        lo2, hi2 = np.linalg.eigvalsh(coords2.T @ coords2.conj())[[0, -1]]
        lo3, hi3 = np.linalg.eigvalsh(coords3.T @ coords3.conj())[[0, -1]]
        scale = spectral_norm(G) ** 2
        if (lo2 > tol * max(hi2, scale)) != (lo3 > tol * max(hi3, scale)):
            bad += 1
            continue
        nT = spectral_norm(T)
        nTi = spectral_norm(np.linalg.inv(T))
        eps = 1e-9 * max(1.0, hi2, hi3)
        if lo3 < lo2 / nT**2 - eps or lo2 < lo3 / nTi**2 - eps:
            bad += 1
    return Check("frame_transfer", bad == 0, f"{bad} of {trials} random (T, V, G) cases violate the transfer bounds", bad)


def run_suite(raw: dict, samples: SampleMatrix | None = None, trials: int = 20, seed: int = 0,
              tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    """``raw`` holds decoded instance arrays: A, W, G, N, seed."""
    A, G, N = raw["A"], raw["G"], raw["N"]
    d, J = A.shape[0], G.shape[0]
    checks: list[Check] = []

    norm_A = spectral_norm(A)
    checks.append(Check("contractivity", norm_A < 1.0, f"||A|| = {norm_A:.12g}", norm_A))
    W = Subspace(raw["W"])
    gram_err = float(np.max(np.abs(W.basis.conj().T @ W.basis - np.eye(W.dim)), initial=0.0))
    checks.append(Check("orthonormal_W", gram_err <= 100 * tol.tol_ortho, f"max |B^H B - I| = {gram_err:.3e}", gram_err))
    checks += _dft_checks(N, d, trials, seed)
    checks.append(_transfer_checks(d, J, trials, seed, tol.tol_frame_rel))

    if not all(c.passed for c in checks[:2]):
        for name in ("resolvent_identity", "periodic_residual", "frame_equivalence", "bessel_upper",
                     "decay", "recovery", "oracle_gap"):
            checks.append(Check(name, None, "skipped: instance is invalid"))
        return checks

    inst = SystemInstance(A=A, W=W, G=G, N=N, seed=raw["seed"], tol=tol)
    T = build_resolvents(A, N)
    eye = np.eye(d)
    res = max(spectral_norm((np.exp(2j * np.pi * s / N) * eye - A) @ T[s] - eye) for s in range(N))
    checks.append(Check("resolvent_identity", res <= 1e-10, f"max ||(e_s I - A) T_s - I|| = {res:.3e}", res))

    worst = 0.0
    for t in range(trials):
        w, _ = random_source(inst, seed=seed, label=f"verify:source:{t}")
        xp = periodic_solution(inst, w)
        r = np.roll(xp, -1, axis=0) - xp @ A.T - w
        worst = max(worst, float(np.max(np.linalg.norm(r, axis=1))) / (1 + np.linalg.norm(xp)))
    checks.append(Check("periodic_residual", worst <= 1e-10, f"max relative periodic-orbit residual {worst:.3e}", worst))

    try:
        cert = certify(inst)
    except EquivalenceViolationError as exc:
        checks.append(Check("frame_equivalence", False, str(exc)))
        cert = None
    else:
        checks.append(Check("frame_equivalence", True,
                            f"condition-2 and condition-3 verdicts agree at all {N} frequencies"))
    if cert is not None:
        over = [f.s for f in cert.frequencies
                if not f.vacuous and f.upper > cert.bessel_bound_G * (1 + 1e-10)]
        checks.append(Check("bessel_upper", not over, f"upper frame bound exceeds Bessel bound at {over}" if over
                            else f"all upper bounds <= Bessel bound {cert.bessel_bound_G:.4e}"))

    # transient decay, on the given samples or on a fresh noiseless simulation
    if samples is None:
        w, x0 = random_source(inst, seed=seed, label="verify:decay")
        steps = N * max(8, math.ceil(math.log(1e-9) / (N * math.log(max(norm_A, 1e-3)))) + 2)
        samples = generate_samples(inst, w, x0, steps)
        origin = "simulated noiseless samples"
    else:
        origin = "supplied samples"
    if samples.period != N or samples.J != J:
        checks.append(Check("decay", False, f"sample file shape (period {samples.period}, J={samples.J}) "
                                            f"does not match instance (N={N}, J={J})"))
    else:
        lim = residue_limits(samples)
        rate_ok = math.isnan(lim.convergence_rate) or lim.convergence_rate <= DECAY_RATE_SLACK * norm_A**N
        ok = lim.geometric and rate_ok
        detail = (f"{origin}: block decay ratio {lim.convergence_rate:.4g} vs ||A||^N = {norm_A**N:.4g}; "
                  + ("; ".join(lim.warnings) if not lim.geometric else "geometric"))
        checks.append(Check("decay", ok, detail, lim.convergence_rate))

    if cert is None or not cert.verdict:
        checks.append(Check("recovery", None, "skipped: certificate fails"))
        checks.append(Check("oracle_gap", None, "skipped: certificate fails"))
        return checks

    worst_rec = worst_gap = 0.0
    K = math.ceil(math.log(inst.tol.tol_recovery) / (N * math.log(max(norm_A, 1e-3))))
    for t in range(trials):
        w, x0 = random_source(inst, seed=seed, label=f"verify:recover:{t}")
        Y = generate_samples(inst, w, x0, N * (K + 1))
        rep = apply_R(inst, Y, certificate=cert)
        worst_rec = max(worst_rec, relative_error(rep.w_hat, w))
        orc = oracle_least_squares(inst, Y, allow_rank_deficient=True)
        worst_gap = max(worst_gap, relative_error(rep.w_hat, orc.w))
    checks.append(Check("recovery", worst_rec <= 1e-8, f"max relative recovery error {worst_rec:.3e} over {trials} sources", worst_rec))
    checks.append(Check("oracle_gap", worst_gap <= 1e-6, f"max relative gap to least-squares oracle {worst_gap:.3e}", worst_gap))
    return checks

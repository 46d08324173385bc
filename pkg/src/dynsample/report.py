"""Report documents for certificates, recoveries, oracle fits and witnesses."""

from __future__ import annotations

import datetime as _dt
from dataclasses import asdict

import numpy as np

from . import __version__
from .frames import FrameCertificate
from .io import encode_complex
from .recovery import AmbiguityWitness, OracleResult, RecoveryReport


def envelope(kind: str, config: dict, body: dict, timestamp: bool = True) -> dict:
    doc = {"tool": "dynsample", "version": __version__, "kind": kind, "config": config}
    doc.update(body)
    # the only non-deterministic field
    doc["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat() if timestamp else None
    return doc


def certificate_doc(cert: FrameCertificate) -> dict:
    return {
        "verdict": "pass" if cert.verdict else "fail",
        "failing_frequencies": cert.failing,
        "bessel_bound_G": cert.bessel_bound_G,
        "amplification": cert.amplification,
        "tol_frame_rel": cert.tol_frame_rel,
        "frequencies": [asdict(f) for f in cert.frequencies],
    }


def recovery_doc(rep: RecoveryReport) -> dict:
    lim = rep.limits
    return {
        "w_hat": encode_complex(rep.w_hat),
        "x_p_hat": encode_complex(rep.x_p_hat),
        "truncation_bound": rep.truncation_bound,
        "projection_residual": rep.projection_residual,
        "residuals": rep.residuals.tolist(),
        "q_bound": rep.q_bound,
        "oracle_gap": rep.oracle_gap,
        "limits": {
            "K_last": lim.K_last,
            "convergence_rate": lim.convergence_rate,
            "rates": lim.rates.tolist(),
            "last_delta": lim.last_delta.tolist(),
            "block_deltas": lim.block_deltas.tolist(),
            "geometric": lim.geometric,
            "warnings": lim.warnings,
        },
        "certificate": certificate_doc(rep.certificate),
    }


def oracle_doc(res: OracleResult) -> dict:
    return {
        "w": encode_complex(res.w),
        "x0": encode_complex(res.x0),
        "residual": res.residual,
        "sigma_min": res.sigma_min,
        "sigma_max": res.sigma_max,
        "rank_deficient": res.rank_deficient,
    }


def witness_doc(wit: AmbiguityWitness, full: bool = True) -> dict:
    doc = {
        "s": wit.s,
        "lambda_min": wit.lambda_min,
        "source_gap": wit.source_gap,
        "sample_gap": wit.sample_gap,
        "gap_bound": wit.gap_bound,
        "n_rows": wit.n_rows,
    }
    if full:
        doc.update(
            w=encode_complex(wit.w),
            w_prime=encode_complex(wit.w_prime),
            x0=encode_complex(wit.x0),
            x0_prime=encode_complex(wit.x0_prime),
        )
    return doc


def summary_lines(cert: FrameCertificate) -> list[str]:
    lines = []
    for f in cert.frequencies:
        status = "pass" if f.is_frame else "FAIL"
        if f.vacuous:
            lines.append(f"s={f.s}: {status} (zero subspace, vacuous)")
        else:
            lines.append(
                f"s={f.s}: {status}  lower={f.lower:.4e} upper={f.upper:.4e} "
                f"(condition-2: {f.lower_c2:.4e}, {f.upper_c2:.4e})"
            )
    lines.append(f"verdict: {'pass' if cert.verdict else 'fail'}")
    return lines


def relative_error(a, b) -> float:
    b = np.asarray(b)
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(np.asarray(a) - b) / nb) if nb > 0 else float(np.linalg.norm(a))

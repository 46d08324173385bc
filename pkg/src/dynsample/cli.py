"""Command-line interface.

Exit codes: 0 success, 1 a mathematical condition failed (certificate,
identifiability, invariant), 2 invalid input or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, replace

import numpy as np

from .checks import run_suite
from .frames import certify
from .io import (
    InputError,
    dumps,
    instance_arrays,
    instance_to_doc,
    load_instance,
    load_samples,
    load_source,
    read_json,
    samples_to_doc,
    source_to_doc,
    write_json,
)
from .linalg import DEFAULT_TOL
from .recovery import (
    CertificateFailedError,
    NonIdentifiableError,
    WitnessUnavailableError,
    ambiguity_witness,
    apply_R,
    oracle_least_squares,
)
from .report import certificate_doc, envelope, oracle_doc, recovery_doc, summary_lines, witness_doc
from .system import generate_samples, random_instance, random_source

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(ValueError):
    pass


def _tol(args):
    if args.tol is None:
        return DEFAULT_TOL
    return replace(DEFAULT_TOL, tol_frame_rel=args.tol)


def _emit(args, doc: dict, lines: list[str]) -> None:
    if args.out:
        write_json(args.out, doc)
        for line in lines:
            print(line)
    else:
        sys.stdout.write(dumps(doc))


def cmd_gen(args) -> int:
    J = args.num_vectors if args.num_vectors is not None else args.dim + 2
    m = args.subspace_dim if args.subspace_dim is not None else args.dim
    if args.dim < 1 or args.period < 1 or J < 1:
        raise UsageError("dim, period and num-vectors must be >= 1")
    if not 1 <= m <= args.dim:
        raise UsageError(f"subspace-dim must be in [1, {args.dim}]")
    if not 0 < args.norm_a < 1:
        raise UsageError("norm-a must be in (0, 1)")
    if args.seed < 0:
        raise UsageError("seed must be non-negative")
    inst = random_instance(args.dim, args.period, J, m, args.norm_a, args.seed)
    w, x0 = random_source(inst)
    source_path = args.source or _sibling(args.out, "source")
    write_json(args.out, instance_to_doc(inst))
    write_json(source_path, source_to_doc(w, x0))
    print(f"instance: {args.out}")
    print(f"source:   {source_path}")
    return EXIT_OK


def _sibling(path: str, tag: str) -> str:
    return path[:-5] + f".{tag}.json" if path.endswith(".json") else f"{path}.{tag}.json"


def cmd_simulate(args) -> int:
    inst = load_instance(args.instance)
    w, x0 = load_source(args.source)
    if x0 is None:
        x0 = np.zeros(inst.dim, dtype=complex)
    if args.steps < 2 * inst.N:
        raise UsageError(f"--steps must be at least 2N = {2 * inst.N}")
    if args.noise < 0:
        raise UsageError("--noise must be non-negative")
    try:
        Y = generate_samples(inst, w, x0, args.steps, args.noise, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    write_json(args.out, samples_to_doc(Y))
    print(f"samples: {args.out} ({Y.n_rows} x {Y.J})")
    return EXIT_OK


def cmd_certify(args) -> int:
    inst = load_instance(args.instance, _tol(args))
    cert = certify(inst)
    doc = envelope("certificate", {"instance": args.instance, "tolerances": asdict(inst.tol)},
                   {"certificate": certificate_doc(cert)})
    _emit(args, doc, summary_lines(cert))
    return EXIT_OK if cert.verdict else EXIT_FAIL


def cmd_recover(args) -> int:
    inst = load_instance(args.instance, _tol(args))
    Y = load_samples(args.samples)
    config = {"instance": args.instance, "samples": args.samples, "x0_bound": args.x0_bound,
              "average_blocks": args.average_blocks, "tolerances": asdict(inst.tol)}
    if Y.period != inst.N or Y.J != inst.J:
        raise InputError(f"sample file (period {Y.period}, J={Y.J}) does not match instance (N={inst.N}, J={inst.J})")
    try:
        rep = apply_R(inst, Y, x0_bound=args.x0_bound, average_blocks=args.average_blocks)
    except CertificateFailedError as exc:
        cert = exc.certificate
        s = cert.failing[0]
        wit = ambiguity_witness(inst, s, certificate=cert)
        doc = envelope("recovery", config, {
            "status": "refused",
            "reason": str(exc),
            "certificate": certificate_doc(cert),
            "witness": witness_doc(wit, full=False),
        })
        _emit(args, doc, summary_lines(cert) + [
            f"recovery refused; witness at s={s}: sources {wit.source_gap:.3g} apart, "
            f"samples {wit.sample_gap:.3e} apart"])
        return EXIT_FAIL
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.with_oracle:
        orc = oracle_least_squares(inst, Y, allow_rank_deficient=True)
        nw = np.linalg.norm(orc.w)
        rep.oracle_gap = float(np.linalg.norm(rep.w_hat - orc.w) / nw) if nw > 0 else float(np.linalg.norm(rep.w_hat))
    doc = envelope("recovery", config, {"status": "recovered", **recovery_doc(rep)})
    lines = [f"recovered w (N={inst.N}, d={inst.dim}); truncation bound {rep.truncation_bound:.3e}"]
    lines += [f"warning: {m}" for m in rep.limits.warnings]
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance, _tol(args))
    Y = load_samples(args.samples)
    if Y.period != inst.N or Y.J != inst.J:
        raise InputError(f"sample file (period {Y.period}, J={Y.J}) does not match instance (N={inst.N}, J={inst.J})")
    try:
        res = oracle_least_squares(inst, Y, allow_rank_deficient=True)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    doc = envelope("oracle", {"instance": args.instance, "samples": args.samples}, oracle_doc(res))
    status = "rank deficient: source not identifiable" if res.rank_deficient else "identifiable"
    _emit(args, doc, [f"least-squares fit residual {res.residual:.3e}; {status}"])
    return EXIT_FAIL if res.rank_deficient else EXIT_OK


def cmd_witness(args) -> int:
    inst = load_instance(args.instance, _tol(args))
    cert = certify(inst)
    s = args.frequency
    if s is None:
        if cert.verdict:
            doc = envelope("witness", {"instance": args.instance},
                           {"status": "unavailable", "certificate": certificate_doc(cert)})
            _emit(args, doc, ["certificate passes at every frequency; no witness exists"])
            return EXIT_FAIL
        s = cert.failing[0]
    if not 0 <= s < inst.N:
        raise UsageError(f"--frequency must be in [0, {inst.N - 1}]")
    w = load_source(args.source)[0] if args.source else None
    try:
        wit = ambiguity_witness(inst, s, w=w, certificate=cert)
    except WitnessUnavailableError as exc:
        doc = envelope("witness", {"instance": args.instance, "frequency": s},
                       {"status": "unavailable", "reason": str(exc)})
        _emit(args, doc, [str(exc)])
        return EXIT_FAIL
    doc = envelope("witness", {"instance": args.instance, "frequency": s, "source": args.source},
                   {"status": "found", "witness": witness_doc(wit)})
    _emit(args, doc, [f"s={s}: ||w - w'|| = {wit.source_gap:.6g}, sample gap {wit.sample_gap:.3e} "
                      f"(bound {wit.gap_bound:.3e})"])
    return EXIT_OK


def cmd_verify(args) -> int:
    raw = instance_arrays(read_json(args.instance))
    Y = load_samples(args.samples) if args.samples else None
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    tol = _tol(args)
    checks = run_suite(raw, Y, trials=args.trials, seed=args.seed, tol=tol)
    ok = all(c.passed is not False for c in checks)
    doc = envelope("verify", {"instance": args.instance, "samples": args.samples, "trials": args.trials,
                              "seed": args.seed, "tolerances": asdict(tol)},
                   {"all_passed": ok, "checks": [asdict(c) for c in checks]})
    lines = [f"{'SKIP' if c.passed is None else 'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}" for c in checks]
    _emit(args, doc, lines)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynsample",
        description="Certify sampling systems and recover periodic sources from space-time samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded random instance and planted source")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--num-vectors", type=int, default=None, help="J (default dim + 2)")
    p.add_argument("--subspace-dim", type=int, default=None, help="dim W (default dim)")
    p.add_argument("--norm-a", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="instance file")
    p.add_argument("--source", default=None, help="source file (default <out>.source.json)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="write space-time samples of a trajectory")
    p.add_argument("--instance", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (
        ("certify", cmd_certify, "check the frame conditions at every frequency"),
        ("recover", cmd_recover, "recover the source from samples"),
        ("oracle", cmd_oracle, "least-squares fit of source and initial state"),
        ("witness", cmd_witness, "build two sources with nearly identical samples"),
        ("verify", cmd_verify, "run the invariant suite"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--instance", required=True)
        p.add_argument("--tol", type=float, default=None, help="relative frame threshold")
        p.add_argument("--out", default=None, help="report file (default: JSON to stdout)")
        if name in ("recover", "oracle"):
            p.add_argument("--samples", required=True)
        if name == "recover":
            p.add_argument("--x0-bound", type=float, default=None)
            p.add_argument("--average-blocks", type=int, default=1)
            p.add_argument("--with-oracle", action="store_true")
        if name == "witness":
            p.add_argument("--frequency", type=int, default=None)
            p.add_argument("--source", default=None)
        if name == "verify":
            p.add_argument("--samples", default=None)
            p.add_argument("--trials", type=int, default=20)
            p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    try:
        return args.func(args)
    except (InputError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

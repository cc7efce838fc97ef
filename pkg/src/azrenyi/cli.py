"""Command-line front end: ``az-renyi {compute,sweep,check,random}``.

stdout carries only the JSON or CSV payload; messages go to stderr.
Exit codes: 0 success, 1 property violation, 2 bad input, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import analysis as an
from .channels import RangeError, random_cptp, sufficiency_test
from .divergence import AlphaZ, _check_pair, d_from_q, q_alpha_inf, q_alpha_z, relative_entropy_d1
from .fileio import encode_channel, encode_matrix, read_channel, read_matrix
from .sampling import random_state
from .suites import SUITES, run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3


class InputError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("AZ_RENYI_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise InputError(f"AZ_RENYI_THREADS must be an integer, got {raw!r}") from None


def _num(x: float):
    return an.format_number(x) if not math.isfinite(x) else x


def _float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise InputError(f"not a number: {s!r}") from None


def _float_list(s: str) -> list[float]:
    return [_float(t) for t in s.split(",") if t.strip()]


def _load_matrix(path: str) -> np.ndarray:
    try:
        return read_matrix(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed matrix file {path}: {exc}") from exc


def _load_pair(args):
    psi, phi = _load_matrix(args.psi), _load_matrix(args.phi)
    try:
        return _check_pair(psi, phi)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_compute(args) -> int:
    psi, phi = _load_pair(args)
    alpha = _float(args.alpha)
    tr = float(np.real(np.trace(psi)))
    if args.variant == "d1" or alpha == 1:
        if args.variant != "d1":
            raise InputError("alpha = 1 needs --variant d1")
        d = relative_entropy_d1(psi, phi)
        out = {"Q": None, "D": _num(d), "region": "d1", "psi_trace": tr}
        print(json.dumps(out))
        return EXIT_OK
    if args.variant == "petz":
        z = 1.0
    elif args.variant == "sandwiched":
        z = alpha
    elif args.z is None:
        raise InputError("--z is required unless --variant fixes it")
    else:
        z = _float(args.z)
    try:
        par = AlphaZ(alpha, z)
        q = q_alpha_inf(psi, phi, alpha) if math.isinf(z) else q_alpha_z(psi, phi, par)
    except ValueError as exc:
        # includes DomainError for z = inf with unequal supports
        raise InputError(str(exc)) from exc
    d = d_from_q(q, tr, alpha)
    print(json.dumps({"Q": _num(q), "D": _num(d), "region": par.classify().value, "psi_trace": tr}))
    return EXIT_OK


def cmd_sweep(args) -> int:
    psi, phi = _load_pair(args)
    alphas = _float_list(args.alphas)
    zs_raw = [t.strip() for t in args.zs.split(",") if t.strip()]
    include_inf = "inf" in zs_raw
    zs = [_float(t) for t in zs_raw if t != "inf"]
    try:
        grid = an.SweepGrid(tuple(alphas), tuple(zs), include_inf)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = an.sweep(psi, phi, grid, threads=_threads())
    text = report.to_csv()
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _fixture_sufficiency(args) -> dict:
    gamma = read_channel(args.channel)
    psi, phi = _load_pair(args)
    par = AlphaZ(_float(args.alpha), _float(args.z))
    res = sufficiency_test(psi, phi, gamma, par)
    return {"equality": res.equality, "recovered": res.recovered, "residual": res.residual,
            "consistent": res.equality == res.recovered}


def cmd_check(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}")
    if not 1 <= args.dim <= 8:
        raise InputError("--dim must lie in [1, 8]")
    if args.trials < 1:
        raise InputError("--trials must be positive")
    names = SUITES if args.suite == "all" else (args.suite,)
    threads = _threads()
    reports = [run_suite(n, seed=args.seed, trials=args.trials, dim=args.dim, threads=threads) for n in names]
    payload = {"seed": args.seed, "trials": args.trials, "dim": args.dim,
               "suites": [r.to_dict() for r in reports]}
    ok = all(r.ok for r in reports)
    if args.channel:
        if not (args.psi and args.phi and args.alpha and args.z):
            raise InputError("--channel needs --psi, --phi, --alpha and --z")
        try:
            fixture = _fixture_sufficiency(args)
        except (RangeError, ValueError, OSError, json.JSONDecodeError) as exc:
            raise InputError(f"fixture check failed: {exc}") from exc
        payload["fixture"] = fixture
        ok = ok and fixture["consistent"]
    payload["ok"] = ok
    print(json.dumps(payload, indent=1))
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_random(args) -> int:
    if args.dim < 1:
        raise InputError("--dim must be positive")
    rng = np.random.default_rng(args.seed)
    if args.kind == "state":
        rank = args.rank if args.rank is not None else args.dim
        if not 1 <= rank <= args.dim:
            raise InputError(f"--rank must lie in [1, {args.dim}]")
        obj = encode_matrix(random_state(args.dim, rng, rank=rank))
    else:
        dim_in = args.dim_in if args.dim_in is not None else args.dim
        try:
            obj = encode_channel(random_cptp(dim_in, args.dim, seed=args.seed, rank=args.rank))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(obj, indent=1) + "\n")
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="az-renyi", description="alpha-z Renyi divergence toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="evaluate Q and D for one pair")
    c.add_argument("--psi", required=True)
    c.add_argument("--phi", required=True)
    c.add_argument("--alpha", required=True)
    c.add_argument("--z", help="positive number or 'inf'")
    c.add_argument("--variant", choices=("auto", "petz", "sandwiched", "d1"), default="auto")
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("sweep", help="grid of (alpha, z) values to CSV")
    s.add_argument("--psi", required=True)
    s.add_argument("--phi", required=True)
    s.add_argument("--alphas", required=True, help="comma-separated list")
    s.add_argument("--zs", required=True, help="comma-separated list, may include 'inf'")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    k = sub.add_parser("check", help="run randomized property suites")
    k.add_argument("--suite", required=True, help="|".join(SUITES + ("all",)))
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--trials", type=int, default=20)
    k.add_argument("--dim", type=int, default=3)
    k.add_argument("--channel", help="channel file for a fixture sufficiency check")
    k.add_argument("--psi")
    k.add_argument("--phi")
    k.add_argument("--alpha")
    k.add_argument("--z")
    k.set_defaults(func=cmd_check)

    r = sub.add_parser("random", help="seeded random state or channel")
    r.add_argument("--kind", choices=("state", "channel"), required=True)
    r.add_argument("--dim", type=int, required=True)
    r.add_argument("--dim-in", type=int, dest="dim_in")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--rank", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_random)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: scmamds design-alloc | design-codebook | simulate | eval."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .allocation import best_peg_design, from_alist, render, to_alist, to_pbm
from .codebook import (apsk_projections, codebook_to_json, cutoff_rate, expurgate, lift_code,
                       load_codebook, min_euclidean_sq, min_product_distance, mssd, papr)
from .codes import grs_generator, hamming_ternary_generator, load_generator, span_code
from .errors import ScmaError
from .gf import gf_build
from .labeling import Labeling, bsa, labeling_cost, natural_labeling
from .sim import SimConfig, benchmark_codebook, run_ber

EXIT_OK, EXIT_USAGE, EXIT_ARTIFACT, EXIT_RUNTIME = 0, 2, 3, 4
THREADS_ENV = "SCMAMDS_THREADS"


class ArtifactError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def cmd_design_alloc(args) -> int:
    F = best_peg_design(args.users, args.resources, args.degree, args.seed, args.attempts)
    out = Path(args.out)
    files = {out: to_alist(F), out.with_suffix(".pbm"): to_pbm(F),
             out.with_suffix(".txt"): render(F)}
    for p, text in files.items():
        _write_atomic(p, text)
    print(f"F: K={F.K} resources x J={F.J} users, regular column degree N={F.N}, "
          f"row degree d_f={F.df}")
    print(f"overload {100 * F.overload:.1f}%  density {100 * F.density:.1f}%  girth {F.girth}")
    return EXIT_OK


def _proposed_codebook(args):
    q, M, N = args.q, args.M, args.N
    pts = apsk_projections(q, args.rings or [q], args.radii or [1.0])
    tables = gf_build(q)
    if args.construction == "grs":
        k = max(2, math.ceil(math.log(M, q) - 1e-12))
        G = grs_generator(tables, k, N)
    elif args.construction == "hamming3":
        if q != 3 or N != 4:
            raise ScmaError("hamming3 construction needs q=3 and N=4")
        G = hamming_ternary_generator(tables)
    else:
        if not args.generator:
            raise ScmaError("explicit construction needs --generator PATH")
        G = load_generator(args.generator)
        if G.q != q or G.n != N:
            raise ScmaError(f"generator is ({G.n}, {G.k}) over GF({G.q}); flags say N={N}, q={q}")
    code = span_code(G, args.digit_order)
    if M > q ** G.k:
        raise ScmaError(f"M={M} exceeds q^k = {q ** G.k}")
    cb = lift_code(code, pts)
    if M < cb.M:
        remove = None
        if args.remove_message:
            remove = [code.index_of(_ints(m)) for m in args.remove_message]
        cb = expurgate(cb, M, args.ebn0, remove)
    return cb


def cmd_design_codebook(args) -> int:
    if args.M < 2 or args.M & (args.M - 1):
        raise ScmaError(f"M={args.M} is not a power of two")
    if args.construction == "benchmark":
        cb = benchmark_codebook(args.M, args.q, args.N, args.trials, args.seed, args.ebn0)
    else:
        cb = _proposed_codebook(args)
    lab = bsa(cb, natural_labeling(cb.M), args.bsa_iters, seed=args.seed)
    _print_metrics(cb, args.ebn0, lab)
    _write_atomic(Path(args.out), json.dumps(codebook_to_json(cb, lab.perm), indent=1))
    return EXIT_OK


def _print_metrics(cb, ebn0, lab=None) -> None:
    print(f"(M, q, N) = ({cb.M}, {cb.q}, {cb.N})")
    print(f"min d_E^2     {min_euclidean_sq(cb):.4f}")
    print(f"min d_p,L     {min_product_distance(cb):.4f}")
    print(f"L (MSSD)      {mssd(cb)}")
    print(f"Psi @ {ebn0:g} dB  {cutoff_rate(cb, ebn0):.4f}")
    print(f"PAPR          {papr(cb):.4f}")
    if lab is not None:
        print(f"label cost    {labeling_cost(cb, lab):.6g}")


def cmd_eval(args) -> int:
    cb, _ = _load_cb(args.codebook)
    _print_metrics(cb, args.ebn0)
    return EXIT_OK


def _load_cb(path):
    try:
        return load_codebook(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ArtifactError(f"cannot load codebook {path}: {exc}") from exc


def cmd_simulate(args) -> int:
    cb, labels = _load_cb(args.codebook)
    try:
        F = from_alist(Path(args.alloc).read_text())
    except (OSError, ValueError) as exc:
        raise ArtifactError(f"cannot load allocation matrix {args.alloc}: {exc}") from exc
    if F.N != cb.N:
        raise ArtifactError(f"codebook has N={cb.N} dimensions but F has column degree {F.N}")
    try:
        lab = Labeling(labels) if labels is not None else natural_labeling(cb.M)
        cfg = SimConfig(F, cb, lab, args.ebn0, args.min_frames, args.max_frames,
                        args.min_errors, args.iters, args.mode, args.seed)
    except ScmaError as exc:
        raise ArtifactError(str(exc)) from exc
    threads = args.threads or int(os.environ.get(THREADS_ENV, "1"))
    report = run_ber(cfg, threads=threads)
    out = Path(args.out)
    manifest = {
        "tool": "scmamds", "version": __version__, "command": "simulate",
        "codebook": str(args.codebook), "alloc": str(args.alloc), "seed": args.seed,
        "config": {k: v for k, v in cfg.to_json().items() if k not in ("F", "codebook")},
        "config_hash": cfg.digest(), "threads": threads,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    _write_atomic(out.with_suffix(".csv"), report.to_csv())
    _write_atomic(out.with_suffix(".json"), json.dumps(report.to_json(), indent=1))
    _write_atomic(out.with_suffix(".manifest.json"), json.dumps(manifest, indent=1))
    print(report.to_csv(), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scmamds", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design-alloc", help="design F by progressive edge growth")
    p.add_argument("--users", "-J", type=int, required=True)
    p.add_argument("--resources", "-K", type=int, required=True)
    p.add_argument("--degree", "-N", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--attempts", type=int, default=1,
                   help="PEG runs over derived seeds; the largest girth is kept")
    p.add_argument("--out", required=True, help="alist path; .pbm and .txt written alongside")
    p.set_defaults(func=cmd_design_alloc)

    p = sub.add_parser("design-codebook", help="build, expurgate and label a codebook")
    p.add_argument("--construction", choices=["grs", "hamming3", "explicit", "benchmark"],
                   required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--rings", "--projections", type=_ints, default=None,
                   help="APSK ring sizes m, e.g. '4' or '1,3'")
    p.add_argument("--radii", type=_floats, default=None, help="APSK ring radii")
    p.add_argument("--ebn0", type=float, default=8.0, help="Eb/N0 (dB) for Psi and expurgation")
    p.add_argument("--generator", help="generator JSON for --construction explicit")
    p.add_argument("--digit-order", choices=["index", "power"], default="index")
    p.add_argument("--remove-message", action="append",
                   help="expurgate the codeword of this message, e.g. '2,2' (repeatable)")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--bsa-iters", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_design_codebook)

    p = sub.add_parser("simulate", help="Monte Carlo BER over an Eb/N0 grid")
    p.add_argument("--codebook", required=True)
    p.add_argument("--alloc", required=True)
    p.add_argument("--ebn0", type=_floats, required=True, help="e.g. '0,4,8,12'")
    p.add_argument("--min-frames", type=int, default=100)
    p.add_argument("--max-frames", "--frames", type=int, default=100_000)
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--mode", choices=["exact", "maxlog"], default="exact")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output prefix for .csv/.json/.manifest.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", help="print figures of merit of a codebook file")
    p.add_argument("--codebook", required=True)
    p.add_argument("--ebn0", type=float, default=8.0)
    p.set_defaults(func=cmd_eval)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT
    except ScmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

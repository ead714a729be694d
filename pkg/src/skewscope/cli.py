"""Command-line interface: gen, fourier, heavy, enumerate, verify.

Bulk results go to stdout as text lines.  Every run also emits a JSON manifest
(command line, seeds, parameters, input digests, version): as the last stdout
line for fourier/heavy/enumerate, and on stderr (or --manifest) for gen, whose
stdout is the generated file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .cube import Subcube
from .enumeration import (
    ONE_SIDED,
    TWO_SIDED,
    ExactProvider,
    FfcProvider,
    SampledProvider,
    SkewQuery,
    brute_force_minimal,
    search,
)
from .fourier import wht
from .generators import (
    count_min_weight_codewords,
    gen_dual_bch,
    gen_noisy_parity,
    gen_random_sparse,
    gen_subcube_uniform,
    gen_tribes,
    max_explicit_n,
    sample_explicit,
)
from .heavy import BudgetExceeded, FfcParams, ffc, find_heavy_exact, goldreich_levin
from .io import digest, loads, write_measure, write_samples
from .measure import ExplicitMeasure, QueryOracle, SampleSet, inorm
from .verify import SUITES

EXIT_FAIL = 1
EXIT_ERROR = 2


class CliError(Exception):
    pass


def _coords(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _manifest(args, params: dict, inputs: dict | None = None) -> dict:
    return {
        "tool": "skewscope",
        "version": __version__,
        "argv": [a for a in sys.argv[1:]] if args.argv is None else args.argv,
        "command": args.command,
        "params": params,
        "inputs": inputs or {},
    }


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=float)


def _load_input(args, want: str | None = None):
    """Read --measure/--samples/--input, or stdin when none is given."""
    path = getattr(args, "measure", None) or getattr(args, "samples", None) or getattr(args, "input", None)
    if path and path != "-":
        text = Path(path).read_text()
        inputs = {path: digest(path)}
    else:
        text = sys.stdin.read()
        inputs = {"<stdin>": None}
    data = loads(text, renormalize=getattr(args, "renormalize", False))
    if isinstance(data, ExplicitMeasure) and data.n > max_explicit_n():
        raise CliError(f"explicit measure with n={data.n} exceeds {max_explicit_n()}; "
                       "set SKEWSCOPE_MAX_EXPLICIT_N to override")
    if want == "measure" and not isinstance(data, ExplicitMeasure):
        raise CliError("this command needs a measure file")
    if want == "samples" and not isinstance(data, SampleSet):
        raise CliError("this command needs a sample file")
    return data, inputs


# --- gen --------------------------------------------------------------------------

def cmd_gen(args, out) -> int:
    kind = args.kind
    params = {"kind": kind}
    if kind == "subcube":
        C = Subcube.from_string(args.cube)
        gen = None
        psi = gen_subcube_uniform(C.n, C)
        params["cube"] = args.cube
    elif kind == "tribes":
        gen = gen_tribes(args.k, args.t)
        params.update(k=args.k, t=args.t)
    elif kind == "parity":
        gen = gen_noisy_parity(args.n, _coords(args.s), args.eta)
        params.update(n=args.n, s=_coords(args.s), eta=args.eta, label=args.n)
    elif kind == "bch":
        gen = gen_dual_bch(args.l, args.e)
        params.update(gen.spec.metadata())
        if args.count_min_weight:
            count = count_min_weight_codewords(gen.spec)
            out.write(f"{count}\n")
            params["min_weight_count"] = count
            _emit_manifest(args, params)
            return 0
    elif kind == "sparse":
        gen = None
        psi = gen_random_sparse(args.n, args.support, args.seed)
        params.update(n=args.n, support=args.support)
    else:
        raise CliError(f"unknown generator {kind}")
    params["seed"] = args.seed
    if args.samples_count:
        params["samples"] = args.samples_count
        if gen is not None:
            s = gen.samples(args.samples_count, args.seed)
        else:
            s = sample_explicit(psi, args.samples_count, args.seed)
        write_samples(s, out)
    else:
        if gen is not None:
            psi = gen.measure()
        write_measure(psi, out, args.format)
        params["inorm"] = inorm(psi)
    _emit_manifest(args, params)
    return 0


def _emit_manifest(args, params) -> None:
    text = _dump(_manifest(args, params)) + "\n"
    if args.manifest:
        Path(args.manifest).write_text(text)
    else:
        sys.stderr.write(text)


# --- fourier / heavy ------------------------------------------------------------

def cmd_fourier(args, out) -> int:
    psi, inputs = _load_input(args, "measure")
    spec = wht(psi)
    lines = spec.dump_lines(args.min_abs)
    out.writelines(line + "\n" for line in lines)
    out.write(_dump({"summary": {"count": len(lines)},
                     "manifest": _manifest(args, {"min_abs": args.min_abs}, inputs)}) + "\n")
    return 0


def cmd_heavy(args, out) -> int:
    if args.mode == "exact":
        psi, inputs = _load_input(args, "measure")
        L = find_heavy_exact(psi, args.k, args.rho)
        params = {"k": args.k, "rho": args.rho}
    elif args.mode == "ffc":
        s, inputs = _load_input(args, "samples")
        p = FfcParams(s.n, args.k, args.rho, args.lam, args.seed)
        L = ffc(s, p, workers=args.workers, backend=args.backend)
        params = p.as_dict() | {"backend": args.backend}
    else:
        psi, inputs = _load_input(args, "measure")
        oracle = QueryOracle.from_explicit(psi)
        t = args.t if args.t is not None else inorm(psi)
        L = goldreich_levin(oracle, args.rho, t, args.delta, args.seed, max_queries=args.max_queries)
        params = {"rho": args.rho, "delta": args.delta, "t": t, "seed": args.seed,
                  "queries": oracle.queries}
    out.writelines(line + "\n" for line in L.dump_lines())
    out.write(_dump({"summary": {"count": len(L), "guarantee": L.guarantee},
                     "manifest": _manifest(args, params, inputs)}) + "\n")
    return 0


# --- enumerate ------------------------------------------------------------------

def cmd_enumerate(args, out) -> int:
    data, inputs = _load_input(args)
    rule = ONE_SIDED if args.same_sign_parents else args.parent_rule
    signs = {"fsr": ["positive"], "fsn": ["negative"]}.get(args.algorithm)
    if signs is None:
        signs = ["positive", "negative"] if args.sign == "both" else [args.sign]
    provider_kind = args.provider or ("exact" if isinstance(data, ExplicitMeasure) else "sampled")
    params = {"algorithm": args.algorithm, "k": args.k, "gamma": args.gamma, "eps": args.eps,
              "parent_rule": rule, "threshold_rule": args.threshold_rule,
              "provider": provider_kind, "seed": args.seed}
    reports = []
    stats = {}
    for sign in signs:
        q = SkewQuery(args.k, args.gamma, args.eps, sign, rule, args.threshold_rule)
        if args.algorithm == "oracle":
            if not isinstance(data, ExplicitMeasure):
                raise CliError("the brute-force oracle needs a measure file")
            reports.extend(brute_force_minimal(data, q))
            continue
        provider = _make_provider(provider_kind, data, args, params)
        res = search(provider, q)
        reports.extend(res.reports)
        stats[sign] = vars(res.stats)
    reports.sort(key=lambda r: r.subcube.key())
    out.writelines(r.line() + "\n" for r in reports)
    summary = {"count": len(reports), "positive": sum(r.sign == "positive" for r in reports),
               "negative": sum(r.sign == "negative" for r in reports), "search": stats}
    out.write(_dump({"summary": summary, "manifest": _manifest(args, params, inputs)}) + "\n")
    return 0


def _make_provider(kind: str, data, args, params: dict):
    if kind == "exact":
        if not isinstance(data, ExplicitMeasure):
            raise CliError("the exact provider needs a measure file")
        return ExactProvider(data)
    if kind == "sampled":
        if not isinstance(data, SampleSet):
            raise CliError("the sampled provider needs a sample file")
        params["delta"] = args.delta
        return SampledProvider(data, args.delta)
    if kind == "ffc":
        if isinstance(data, SampleSet):
            ffc_samples = data
        else:
            m = args.ffc_samples or 100_000
            ffc_samples = sample_explicit(data, m, args.seed, "ffc")
            params["ffc_samples"] = m
        params.update(lam=args.lam, ffc_rho=args.ffc_rho)
        return FfcProvider(ffc_samples, data, args.lam, args.ffc_rho, args.seed, args.workers)
    raise CliError(f"unknown provider {kind}")


# --- verify -----------------------------------------------------------------------

def cmd_verify(args, out) -> int:
    fn = SUITES[args.suite]
    if args.suite == "oracle-equivalence":
        checks = fn(n=args.n, k=args.k, trials=args.trials, seed=args.seed)
    elif args.suite == "ffc-stat":
        checks = fn(trials=args.trials, seed=args.seed)
    elif args.suite in ("identities", "level-k") and (args.measure or args.input):
        psi, _ = _load_input(args, "measure")
        checks = fn({"input": psi})
    else:
        checks = fn()
    out.writelines(c.line() + "\n" for c in checks)
    failed = sum(not c.passed for c in checks)
    out.write(_dump({"summary": {"checks": len(checks), "failed": failed},
                     "manifest": _manifest(args, {"suite": args.suite})}) + "\n")
    return 0 if failed == 0 else EXIT_FAIL


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skewscope", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"skewscope {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a measure or samples")
    g.add_argument("kind", choices=["subcube", "tribes", "parity", "bch", "sparse"])
    g.add_argument("--cube", default="+", help="subcube text form for 'subcube'")
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--t", type=int, default=4)
    g.add_argument("--n", type=int, default=12)
    g.add_argument("--s", default="0", help="comma-separated secret coordinates for 'parity'")
    g.add_argument("--eta", type=float, default=0.1)
    g.add_argument("--l", type=int, default=4)
    g.add_argument("--e", type=int, default=1)
    g.add_argument("--support", type=int, default=32)
    g.add_argument("--count-min-weight", action="store_true")
    g.add_argument("--samples", dest="samples_count", type=int, default=0,
                   help="emit this many samples instead of the explicit measure")
    g.add_argument("--format", choices=["dense", "sparse"], default="sparse")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--manifest", help="write the manifest here instead of stderr")

    f = sub.add_parser("fourier", help="spectrum tools")
    f.add_argument("action", choices=["dump"])
    f.add_argument("--measure")
    f.add_argument("--min-abs", type=float, default=0.0)

    h = sub.add_parser("heavy", help="heavy low-degree coefficients")
    h.add_argument("mode", choices=["exact", "ffc", "gl"])
    h.add_argument("--measure")
    h.add_argument("--samples")
    h.add_argument("--k", type=int, default=2)
    h.add_argument("--rho", type=float, default=0.5)
    h.add_argument("--lambda", dest="lam", type=float, default=0.5)
    h.add_argument("--delta", type=float, default=0.01)
    h.add_argument("--t", type=float, default=None, help="density bound for gl (default: max density)")
    h.add_argument("--max-queries", type=int, default=None)
    h.add_argument("--backend", choices=["pairwise", "blocked"], default="pairwise")
    h.add_argument("--workers", type=int, default=1)
    h.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("enumerate", help="list minimal skewed subcubes")
    e.add_argument("algorithm", choices=["fsr", "fsn", "oracle"])
    e.add_argument("--measure")
    e.add_argument("--samples")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--gamma", type=float, required=True)
    e.add_argument("--eps", type=float, required=True)
    e.add_argument("--sign", choices=["positive", "negative", "both"], default="both",
                   help="sign for 'oracle'")
    e.add_argument("--provider", choices=["exact", "sampled", "ffc"])
    e.add_argument("--parent-rule", choices=[ONE_SIDED, TWO_SIDED], default=ONE_SIDED)
    e.add_argument("--same-sign-parents", action="store_true",
                   help="bound parents only in the cube's own direction (the default rule)")
    e.add_argument("--threshold-rule", choices=["sound", "sqrt"], default="sound")
    e.add_argument("--delta", type=float, default=0.05, help="failure probability for samples")
    e.add_argument("--lambda", dest="lam", type=float, default=0.5)
    e.add_argument("--ffc-rho", type=float, default=None)
    e.add_argument("--ffc-samples", type=int, default=None)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--renormalize", action="store_true")

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--measure")
    v.add_argument("--n", type=int, default=10)
    v.add_argument("--k", type=int, default=3)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)

    for sp in (f, h, e, v):
        sp.add_argument("--input", help=argparse.SUPPRESS)
    return p


COMMANDS = {"gen": cmd_gen, "fourier": cmd_fourier, "heavy": cmd_heavy,
            "enumerate": cmd_enumerate, "verify": cmd_verify}


def main(argv: list[str] | None = None, out=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = list(argv) if argv is not None else None
    out = out or sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except (CliError, BudgetExceeded, ValueError, OSError) as exc:
        sys.stderr.write(f"skewscope: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

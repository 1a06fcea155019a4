"""Command-line front end: kernel analysis, polarization studies, codec runs.

Every run resolves its arguments into a plain spec dictionary that is embedded
verbatim in the output header, so a result file names the exact experiment
that produced it.  Outputs are byte-reproducible for a fixed (seed, workers)
pair: no wall-clock values, stable key order, repr-formatted floats.

Exit codes: 0 success, 2 argument/validation error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, channels, codec, entropy, kernelscope, polarlab
from .fqlin import FqMatrix, kron

BUILTIN_KERNELS = ("arikan", "arikan2", "hamming7")


def resolve_kernel(spec: str, q: int) -> FqMatrix:
    """Kernel from a builtin name, a JSON file path, or an inline JSON literal."""
    if spec == "arikan":
        return FqMatrix(q, [[1, 0], [1, 1]])
    if spec == "arikan2":
        m = FqMatrix(q, [[1, 0], [1, 1]])
        return kron(m, m)
    if spec == "hamming7":
        return kernelscope.build_high_distance_kernel(2, 7, 1).matrix
    if spec.strip().startswith("{"):
        return FqMatrix.from_dict(json.loads(spec))
    with open(spec) as fh:
        return FqMatrix.from_dict(json.load(fh))


def resolve_channel(spec: str, q: int) -> channels.Channel:
    """Channel from 'erasure:Z', 'qsc:EPS', or a JSON file / inline literal."""
    if spec.strip().startswith("{") or spec.endswith(".json"):
        raw = json.loads(spec) if spec.strip().startswith("{") else json.load(open(spec))
        kind = raw.get("kind", "table")
        if kind == "qsc":
            return channels.make_qsc(raw["q"], raw["param"])
        if kind == "erasure":
            return channels.make_erasure(raw["q"], raw["param"])
        return channels.make_table_channel(raw["q"], raw["w"])
    kind, _, param = spec.partition(":")
    if kind == "erasure":
        return channels.make_erasure(q, float(param))
    if kind == "qsc":
        return channels.make_qsc(q, float(param))
    raise ValueError(f"unknown channel spec {spec!r}")


def _emit_json(payload: dict, spec: dict, out: str | None):
    doc = {"version": __version__, "spec": spec, "result": payload}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(columns, rows, spec: dict, out: str | None):
    lines = [
        f"# polarkit {__version__}",
        "# spec: " + json.dumps(spec, sort_keys=True),
        ",".join(columns),
    ]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spec_dict(args, fields) -> dict:
    return {"subcommand": args.command, **{f: getattr(args, f) for f in fields}}


def cmd_analyze_kernel(args) -> int:
    m = resolve_kernel(args.kernel, args.q)
    block = args.block_cols
    if block is None and args.kernel == "hamming7":
        block = 3
    report = kernelscope.kernel_report(m, block_cols=block)
    spec = _spec_dict(args, ["kernel", "q", "block_cols"])
    _emit_json(report.to_dict(), spec, args.out)
    print(f"analyze-kernel: mixing={report.mixing} distance={report.distance} eta={report.eta} b={report.b}")
    return 0


def cmd_polarize(args) -> int:
    m = resolve_kernel(args.kernel, args.q)
    levels = polarlab.evolve_tree(m, args.z, args.t, return_all=True)
    start = min(args.t_min, args.t)
    report = polarlab.polarization_report(levels[start:], args.lam, args.gamma, args.threshold)
    spec = _spec_dict(args, ["kernel", "q", "z", "t", "t_min", "lam", "gamma", "threshold"])
    columns = ["t", "fraction_exp", "fraction_strong", "rate_at_threshold", "underflow_count"]
    _emit_csv(columns, list(report.rows()), spec, args.out)
    print(f"polarize: levels {start}..{args.t} rho_hat={report.rho_hat!r}")
    return 0


def cmd_exponents(args) -> int:
    m = resolve_kernel(args.kernel, args.q)
    deltas = [float(d) for d in args.deltas.split(",")]
    rep = entropy.polarization_exponents(m, entropy.erasure_family(m.q), deltas)
    eta, b = rep.suction_pair(args.b_min)
    payload = rep.to_dict()
    payload["profiles"] = [
        {"delta": float(d), "h": [float(x) for x in row], "sum": float(row.sum())}
        for d, row in zip(rep.deltas, rep.profiles)
    ]
    payload["suction"] = {"eta": eta, "b": b, "b_min": args.b_min}
    spec = _spec_dict(args, ["kernel", "q", "deltas", "b_min"])
    _emit_json(payload, spec, args.out)
    print(f"exponents: eta={eta} b={b}")
    return 0


def cmd_construct(args) -> int:
    m = resolve_kernel(args.kernel, args.q)
    ch = resolve_channel(args.channel, m.q)
    rng = np.random.default_rng(args.seed)
    code = codec.construct_code(
        m, ch, args.t, rate=args.rate, threshold=args.threshold,
        rng=rng, frozen_zero=args.frozen_zero, genie_trials=args.genie_trials,
    )
    spec = _spec_dict(args, ["kernel", "q", "channel", "t", "rate", "threshold", "seed", "frozen_zero", "genie_trials"])
    _emit_json(code.to_dict(), spec, args.out)
    print(f"construct: N={code.block_length} rate={code.rate:.4f} frozen={len(code.frozen)}")
    return 0


def cmd_simulate(args) -> int:
    m = resolve_kernel(args.kernel, args.q)
    ch = resolve_channel(args.channel, m.q)
    rng = np.random.default_rng(args.seed)
    code = codec.construct_code(m, ch, args.t, rate=args.rate, rng=rng, genie_trials=args.genie_trials)
    fer_rng = np.random.default_rng(args.seed + 1)
    res = codec.fer_experiment(code, ch, args.trials, fer_rng, workers=args.workers)
    cap = channels.capacity(ch)
    spec = _spec_dict(args, ["kernel", "q", "channel", "t", "rate", "trials", "seed", "workers", "genie_trials"])
    columns = ["N", "rate", "capacity", "gap", "failures", "trials", "fer", "ci_low", "ci_high"]
    row = [
        code.block_length,
        float(code.rate),
        float(cap),
        float(cap - code.rate),
        res.failures,
        res.trials,
        float(res.fer),
        float(res.ci_low),
        float(res.ci_high),
    ]
    _emit_csv(columns, [row], spec, args.out)
    print(f"simulate: N={code.block_length} fer={res.fer:.5f} [{res.ci_low:.5f}, {res.ci_high:.5f}]")
    return 0


def cmd_distance(args) -> int:
    m = resolve_kernel(args.kernel, args.q) if args.kernel else FqMatrix.from_dict(json.loads(args.matrix))
    cols = args.cols if args.cols is not None else m.cols
    block = FqMatrix(m.q, m.arr[:, :cols])
    dist = kernelscope.left_kernel_distance(block)
    payload = {"distance": "inf" if dist == float("inf") else int(dist), "cols": cols}
    if args.ml_eps is not None:
        ml = kernelscope.ml_failure_exact(block, args.ml_eps)
        payload["ml"] = {
            "failure": ml.failure,
            "lower_bound": ml.lower_bound,
            "bound_ok": ml.bound_ok,
        }
    spec = _spec_dict(args, ["kernel", "matrix", "q", "cols", "ml_eps"])
    _emit_json(payload, spec, args.out)
    print(f"distance: {payload['distance']} over first {cols} columns")
    return 0


def cmd_extract_columns(args) -> int:
    m = resolve_kernel(args.kernel, args.q)
    res = kernelscope.extract_high_distance_columns(m, args.t0, args.s)
    payload = {
        "columns": [int(c) for c in res.columns],
        "distance": "inf" if res.distance == float("inf") else int(res.distance),
        "padded_mixing": bool(res.padded_mixing),
        "exhaustive": bool(res.exhaustive),
    }
    spec = _spec_dict(args, ["kernel", "q", "t0", "s"])
    _emit_json(payload, spec, args.out)
    print(f"extract-columns: {payload['columns']} distance={payload['distance']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polarkit", description=__doc__)
    p.add_argument("--version", action="version", version=f"polarkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, channel=False, seeded=False):
        sp.add_argument("--kernel", default="arikan", help="arikan | arikan2 | hamming7 | file.json | inline JSON")
        sp.add_argument("--q", type=int, default=2, help="field modulus for builtin kernels")
        sp.add_argument("--out", default=None, help="output path (stdout when omitted)")
        if channel:
            sp.add_argument("--channel", required=True, help="erasure:Z | qsc:EPS | JSON file or literal")
        if seeded:
            sp.add_argument("--seed", type=int, required=True)
            sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("analyze-kernel", help="mixing, containment witness, distance, exponents")
    common(sp)
    sp.add_argument("--block-cols", type=int, default=None)
    sp.set_defaults(func=cmd_analyze_kernel)

    sp = sub.add_parser("polarize", help="full-tree polarization windows per level")
    common(sp)
    sp.add_argument("--z", type=float, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--t-min", type=int, default=0)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.45)
    sp.add_argument("--gamma", type=float, default=0.8)
    sp.add_argument("--threshold", type=float, default=1e-6)
    sp.set_defaults(func=cmd_polarize)

    sp = sub.add_parser("exponents", help="entropy-profile decay exponents on a delta grid")
    common(sp)
    sp.add_argument("--deltas", default="1e-2,1e-3,1e-4")
    sp.add_argument("--b-min", type=float, default=1.5)
    sp.set_defaults(func=cmd_exponents)

    sp = sub.add_parser("construct", help="build a polar code from reliability estimates")
    common(sp, channel=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--rate", type=float, default=None)
    sp.add_argument("--threshold", type=float, default=None)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--frozen-zero", action="store_true")
    sp.add_argument("--genie-trials", type=int, default=10_000)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("simulate", help="Monte Carlo frame-error-rate experiment")
    common(sp, channel=True, seeded=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--rate", type=float, required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--genie-trials", type=int, default=10_000)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("distance", help="left-kernel distance of a column block")
    common(sp)
    sp.add_argument("--matrix", default=None, help="inline JSON matrix (alternative to --kernel)")
    sp.add_argument("--cols", type=int, default=None)
    sp.add_argument("--ml-eps", type=float, default=None)
    sp.set_defaults(func=cmd_distance)

    sp = sub.add_parser("extract-columns", help="high-distance column subsets of a tensor power")
    common(sp)
    sp.add_argument("--t0", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.set_defaults(func=cmd_extract_columns)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures keep a distinct exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point (`pss`).

Exit codes: 0 success (verify: equal or equal up to phase), 1 verify
not-equal, 2 verify inconclusive, 64 usage error, 65 input parse error,
70 internal synthesis failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import circuit as circ
from . import frontends, sums
from .clifford import synth_clifford, synth_isometry
from .errors import (
    CircuitSyntaxError,
    PathsumError,
    ResidualNotPermutation,
    SumFormatError,
    SynthesisIncomplete,
    WidthError,
)
from .extract import synthesize
from .rewrite import CLIFFORD, classify, normal_form_clifford, normalize

EX_OK, EX_NOTEQUAL, EX_INCONCLUSIVE = 0, 1, 2
EX_USAGE, EX_DATAERR, EX_INTERNAL = 64, 65, 70


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_any(path: str):
    """A circuit or a path sum, sniffed from the content."""
    text = _read(path)
    if text.lstrip().startswith("{"):
        return sums.from_json(text)
    return circ.parse(text)


def _oracle_bits(args) -> int:
    return 2 * args.max_oracle_qubits + 2


def _trace(args):
    if args.trace:
        return lambda msg: print(msg, file=sys.stderr)
    return None


def _synth_any(p, args):
    if classify(p) == CLIFFORD:
        if p.inputs == p.n:
            synth = synth_clifford
        elif p.inputs < p.n:
            synth = synth_isometry
        else:
            synth = None
        if synth is not None:
            out = synth(
                p, relabel=args.relabel, include_gphase=not args.ignore_global_phase
            )
            if args.relabel:
                _, perm = normal_form_clifford(p)
                note = ", ".join(
                    f"wire {i} -> output {j}" for i, j in enumerate(sorted(perm.values()))
                )
                print(f"# output relabeling: {note}", file=sys.stderr)
            return out
    return synthesize(p, trace=_trace(args))


def _cmd_simulate(args) -> int:
    c = circ.parse(_read(args.file))
    p = sums.simulate(c)
    if args.trace:
        nf, log = normalize(p)
        for app in log:
            print(app, file=sys.stderr)
        p = nf
    _write(args, sums.to_json(p) + "\n")
    return EX_OK


def _checked(p, out, args) -> None:
    """Synthesized output must never verify as not-equal to its source
    (skipped under --relabel, whose output is intentionally permuted, and
    for isometries, whose circuit carries extra ancilla wires)."""
    if args.relabel:
        return
    src = sums.simulate(p) if isinstance(p, circ.Circuit) else p
    if src.inputs != src.n:
        return
    verdict = frontends.verify_equiv(src, out, oracle_bits=_oracle_bits(args)).verdict
    if verdict == "not_equal":
        raise PathsumError("synthesized circuit failed verification")


def _cmd_synth(args) -> int:
    p = sums.from_json(_read(args.file))
    out = _synth_any(p, args)
    if not args.ignore_global_phase:
        _checked(p, out, args)
    _write(args, circ.to_text(out))
    return EX_OK


def _cmd_resynth(args) -> int:
    c = circ.parse(_read(args.file))
    out = _synth_any(sums.simulate(c), args)
    if not args.ignore_global_phase:
        _checked(c, out, args)
    _write(args, circ.to_text(out))
    return EX_OK


def _cmd_decompile(args) -> int:
    c = circ.parse(_read(args.file))
    _write(args, circ.to_text(frontends.decompile(c, trace=_trace(args))))
    return EX_OK


def _cmd_verify(args) -> int:
    a = _load_any(args.a)
    b = _load_any(args.b)
    result = frontends.verify_equiv(a, b, oracle_bits=_oracle_bits(args))
    print(result)
    if result.verdict == "equal":
        return EX_OK
    if result.verdict == "equal_up_to_phase":
        return EX_NOTEQUAL if args.strict_phase else EX_OK
    if result.verdict == "not_equal":
        return EX_NOTEQUAL
    return EX_INCONCLUSIVE


def _cmd_qft(args) -> int:
    p = frontends.qft_sum(args.n)
    if args.circuit:
        out = synthesize(p, trace=_trace(args))
        if args.n <= args.max_oracle_qubits:
            _checked(p, out, args)
        _write(args, circ.to_text(out))
    else:
        _write(args, sums.to_json(p) + "\n")
    return EX_OK


def _cmd_taut(args) -> int:
    phi = frontends.parse_formula(args.formula)
    verdict = frontends.taut_check(phi, oracle_bits=_oracle_bits(args))
    print("Tautology" if verdict else "NotTautology")
    return EX_OK


def _cmd_random(args) -> int:
    c = circ.random_circuit(args.kind, args.n, args.gates, args.seed)
    _write(args, circ.to_text(c))
    return EX_OK


def _cmd_opt_clifford(args) -> int:
    c = circ.parse(_read(args.file))
    out = frontends.clifford_pass(c, min_run=args.min_run)
    before, after = circ.stats(c), circ.stats(out)
    print(
        f"# gates {before['total']} -> {after['total']}, "
        f"h-layers {before['h_layers']} -> {after['h_layers']}",
        file=sys.stderr,
    )
    _write(args, circ.to_text(out))
    return EX_OK


def _bench_row(kind: str, n: int, gates: int, seed: int, args) -> dict:
    c = circ.random_circuit(kind, n, gates, seed)
    t0 = time.perf_counter()
    try:
        if kind == "clifford":
            out = synth_clifford(sums.simulate(c))
        else:
            out = synthesize(sums.simulate(c))
        ok = True
        out_gates = len(out.gates)
    except (SynthesisIncomplete, ResidualNotPermutation):
        ok = False
        out_gates = None
    ms = round(1000 * (time.perf_counter() - t0), 3)
    return {
        "seed": seed,
        "success": ok,
        "in_gates": gates,
        "out_gates": out_gates,
        "ms": ms,
    }


def _cmd_bench(args) -> int:
    kind = args.kind.lower()
    seeds = [args.seed + i for i in range(args.count)]
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        rows = list(
            pool.map(lambda s: _bench_row(kind, args.n, args.gates, s, args), seeds)
        )
    successes = [r for r in rows if r["success"]]
    changes = [
        (r["out_gates"] - r["in_gates"]) / r["in_gates"] for r in successes if r["in_gates"]
    ]
    aggregate = {
        "count": len(rows),
        "success_rate": len(successes) / len(rows) if rows else 1.0,
        "avg_change": sum(changes) / len(changes) if changes else 0.0,
        "avg_ms": sum(r["ms"] for r in rows) / len(rows) if rows else 0.0,
    }
    if args.json:
        _write(args, json.dumps({"rows": rows, "aggregate": aggregate}, indent=2) + "\n")
    else:
        lines = [f"{'seed':>8} {'success':>8} {'in':>6} {'out':>6} {'ms':>10}"]
        for r in rows:
            out_g = r["out_gates"] if r["out_gates"] is not None else "-"
            # exact Clifford synthesis is unconditional, mirrored as "--"
            shown = "--" if kind == "clifford" else str(r["success"])
            lines.append(
                f"{r['seed']:>8} {shown:>8} {r['in_gates']:>6} {out_g:>6} {r['ms']:>10}"
            )
        lines.append(
            f"success {aggregate['success_rate']:.1%}  "
            f"avg change {aggregate['avg_change']:+.1%}  avg {aggregate['avg_ms']:.1f} ms"
        )
        _write(args, "\n".join(lines) + "\n")
    return EX_OK


_GLOBAL_DEFAULTS = {
    "output": None,
    "seed": 1,
    "json": False,
    "trace": False,
    "max_oracle_qubits": 10,
    "ignore_global_phase": False,
    "strict_phase": False,
    "relabel": False,
    "min_run": 4,
    "workers": 4,
}


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted both before and after the subcommand; the
    # SUPPRESS default keeps the subparser from clobbering a value that was
    # given up front
    sup = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=sup)
    common.add_argument("-o", "--output", metavar="FILE")
    common.add_argument("--seed", type=int)
    common.add_argument("--json", action="store_true")
    common.add_argument("--trace", action="store_true")
    common.add_argument("--max-oracle-qubits", type=int)
    common.add_argument("--ignore-global-phase", action="store_true")
    common.add_argument("--strict-phase", action="store_true")
    common.add_argument("--relabel", action="store_true")
    common.add_argument("--min-run", type=int)
    common.add_argument("--workers", type=int)

    ap = argparse.ArgumentParser(prog="pss", description=__doc__, parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help):
        p = sub.add_parser(name, help=help, parents=[common])
        p.set_defaults(fn=fn)
        return p

    p = cmd(
        "simulate", _cmd_simulate,
        "circuit -> path-sum JSON (--trace: normalize, one line per rule)",
    )
    p.add_argument("file")

    p = cmd("synth", _cmd_synth, "path-sum JSON -> circuit")
    p.add_argument("file")

    p = cmd("resynth", _cmd_resynth, "circuit -> sum -> circuit")
    p.add_argument("file")

    p = cmd("decompile", _cmd_decompile, "rewrite over the high-level gate set")
    p.add_argument("file")

    p = cmd("verify", _cmd_verify, "equivalence of two circuits/sums")
    p.add_argument("a")
    p.add_argument("b")

    p = cmd("qft", _cmd_qft, "emit the Fourier transform sum or circuit")
    p.add_argument("n", type=int)
    p.add_argument("--circuit", action="store_true")

    p = cmd("taut", _cmd_taut, "tautology check of a propositional formula")
    p.add_argument("formula")

    p = cmd("random", _cmd_random, "seeded random circuit")
    p.add_argument("kind", choices=["clifford", "cliffordt"])
    p.add_argument("n", type=int)
    p.add_argument("gates", type=int)

    p = cmd("bench", _cmd_bench, "re-synthesis benchmark harness")
    p.add_argument("kind", choices=["clifford", "cliffordt"])
    p.add_argument("n", type=int)
    p.add_argument("gates", type=int)
    p.add_argument("count", type=int)

    p = cmd("opt-clifford", _cmd_opt_clifford, "greedy Clifford sub-circuit re-synthesis")
    p.add_argument("file")

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EX_USAGE if e.code not in (0, None) else 0
    for key, value in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        return args.fn(args)
    except (CircuitSyntaxError, SumFormatError, WidthError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EX_DATAERR
    except (SynthesisIncomplete, ResidualNotPermutation) as e:
        print(f"error: {e}", file=sys.stderr)
        if e.residual is not None:
            print(sums.to_json(e.residual), file=sys.stderr)
        return EX_INTERNAL
    except PathsumError as e:
        print(f"error: {e}", file=sys.stderr)
        return EX_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""``hegrad`` command-line entry point."""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from pathlib import Path

from . import casestudies, golden, ioi, paillier, protocol, singlemod
from .errors import AuditViolation, HegradError, KeyBoundViolated, NotAffine, ValidationError
from .problem import dump_problem, load_problem

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_VALIDATION = 2
EXIT_GATE = 3
EXIT_ABORT = 4

DEFAULT_LADDER = (500, 1000, 2000, 3000, 4000)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HEGRAD_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"HEGRAD_SEED must be an integer, got {env!r}") from None


def _bits(value: str) -> int:
    bits = int(value)
    if not 16 <= bits <= 8192:
        raise argparse.ArgumentTypeError("key size must be within [16, 8192] bits")
    return bits


def _iters(value: str) -> int:
    k = int(value)
    if k < 0:
        raise argparse.ArgumentTypeError("iteration count must be non-negative")
    return k


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# keys ------------------------------------------------------------------------------
def _make_keys(scheme: str, bits: int, n_agents: int, rng: random.Random):
    if scheme == "alg1":
        return singlemod.keygen(bits, rng)
    return [paillier.keygen(bits, rng) for _ in range(n_agents)]


def _keys_to_json(scheme, keys) -> dict:
    if scheme == "alg1":
        return keys.to_json()
    return {"scheme": "paillier", "keys": [kp.to_json() for kp in keys]}


def _load_keys(path, scheme: str, n_agents: int):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read key file {path}: {exc}") from exc
    try:
        if scheme == "alg1":
            if data.get("scheme") != "singlemod":
                raise ValidationError("key file does not hold a private-key (singlemod) key")
            return singlemod.SingleModKey.from_json(data)
        if data.get("scheme") != "paillier":
            raise ValidationError("key file does not hold Paillier keypairs")
        keys = [paillier.PaillierKeypair.from_json(k) for k in data["keys"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed key file {path}: {exc}") from exc
    if len(keys) != n_agents:
        raise ValidationError(f"key file has {len(keys)} keypairs for {n_agents} agents")
    return keys


def _execute(problem, scheme, K, rng, keys):
    if scheme == "plain":
        return protocol.run_plain(problem, K)
    if scheme == "alg1":
        return protocol.run_algorithm1(problem, keys, K, rng)
    return protocol.run_algorithm2(problem, keys, K, rng)


# subcommands ---------------------------------------------------------------------------
def cmd_run(args) -> int:
    problem = load_problem(args.problem)
    rng = random.Random(_seed(args))
    if args.scheme == "alg2" and not problem.is_affine():
        raise NotAffine("the public-key scheme needs gradients affine in the state")
    keys = None
    if args.scheme != "plain":
        keys = _load_keys(args.key_file, args.scheme, problem.N) if args.key_file else _make_keys(
            args.scheme, args.bits, problem.N, rng
        )
    run = _execute(problem, args.scheme, args.iters, rng, keys)
    out = Path(args.out)
    if args.format == "json":
        _write(out / "trajectory.json", run.trajectory_json())
    else:
        _write(out / "trajectory.csv", run.trajectory_csv())
    _write(out / "transcript.jsonl", run.transcript.to_jsonl())
    _write(out / "timing.csv", run.timing_csv())
    lines = [f"scheme {args.scheme}, {problem.N} agents, {problem.n} coordinates, K={args.iters}"]
    if args.scheme != "plain":
        report = protocol.compare_runs(run, protocol.run_plain(problem, args.iters))
        _write(out / "deviation.csv", report.to_csv())
        audit = protocol.transcript_audit(run)
        lines.append(f"max deviation from plain run: {report.max:g} (exact zero: {report.all_zero})")
        lines.append(f"transcript audit: {'pass' if audit.passed else 'FAIL'} ({audit.messages} messages)")
    summary = run.timing_summary()
    lines.append(
        f"time per iteration per agent: average {summary['average']:.6f} s, maximum {summary['maximum']:.6f} s"
    )
    lines.append(f"artifacts written to {out}")
    print("\n".join(lines))
    if args.scheme != "plain" and not report.all_zero:
        return EXIT_ABORT
    return EXIT_OK


def cmd_golden(args) -> int:
    print(f"worked example {args.which}")
    try:
        golden.replay(args.which, trace=lambda line: print("  " + line))
    except golden.GoldenMismatch as exc:
        print(f"MISMATCH in {exc.label}: expected {exc.expected}, got {exc.actual}", file=sys.stderr)
        return EXIT_MISMATCH
    print("all values match")
    return EXIT_OK


def bench_rows(problem, scheme: str, ladder, K: int, seed: int) -> list:
    """One row per key size: average and maximum per-iteration per-agent seconds."""
    rows = []
    for bits in ladder:
        rng = random.Random(seed)
        t0 = time.perf_counter()
        keys = _make_keys(scheme, bits, problem.N, rng)
        keygen_s = time.perf_counter() - t0
        run = _execute(problem, scheme, K, rng, keys)
        s = run.timing_summary()
        rows.append({"bits": bits, "average": s["average"], "maximum": s["maximum"], "samples": s["samples"], "keygen": keygen_s})
    return rows


def format_bench(rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if fmt == "csv":
        lines = ["bits,average_s,maximum_s,samples,keygen_s"]
        lines += [f"{r['bits']},{r['average']:.6f},{r['maximum']:.6f},{r['samples']},{r['keygen']:.6f}" for r in rows]
        return "\n".join(lines) + "\n"
    lines = [f"{'key bits':>9} {'avg s/iter/agent':>17} {'max s/iter/agent':>17} {'samples':>8}"]
    lines += [f"{r['bits']:>9} {r['average']:>17.6f} {r['maximum']:>17.6f} {r['samples']:>8}" for r in rows]
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    problem = load_problem(args.problem)
    if args.scheme == "plain":
        raise ValidationError("benchmarks compare key sizes; choose --scheme alg1 or alg2")
    if args.scheme == "alg2" and not problem.is_affine():
        raise NotAffine("the public-key scheme needs gradients affine in the state")
    try:
        ladder = [_bits(b) for b in args.ladder.split(",")] if args.ladder else list(DEFAULT_LADDER)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        raise ValidationError(f"bad --ladder: {exc}") from None
    text = format_bench(bench_rows(problem, args.scheme, ladder, args.iters, _seed(args)), args.format)
    if args.out:
        _write(Path(args.out), text)
    print(text, end="")
    return EXIT_OK


def cmd_ioi(args) -> int:
    family = ioi.load_family(args.family)
    i = args.adversary
    if not 1 <= i <= family.N:
        raise ValidationError(f"no agent {i} in a family of {family.N}")
    truth = ioi.simulate(family, args.iters)
    report = ioi.uncertainty_report(family, i, true_run=truth)
    out = {"report": report.to_json()}
    text = [report.to_text()]
    unconstrained = all(f.is_unbounded for f in family.feasible)
    all_known = len(family.knows[i]) == len(family.labels)
    if family.is_affine() and unconstrained and all_known:
        mine = list(family.coords(i))
        attack = ioi.linear_attack(family, i, [[x[c] for c in mine] for x in truth])
        out["attack"] = attack.to_json()
        text.append(f"linear attack from adversary {i}'s own trajectory: {attack.status}")
        if attack.solution:
            for idx, v in sorted(attack.solution.items()):
                text.append(f"  recovered x[{idx}](0) = {v} (true {truth[0][idx]})")
        for d in attack.degenerate_directions:
            text.append("  undetermined along " + " ".join(str(v) for v in d))
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        print("\n".join(text))
    return EXIT_OK


def _emit_problem(problem, out) -> None:
    if out:
        dump_problem(problem, out)
        print(f"wrote {problem.name} instance ({problem.N} agents, {problem.n} coordinates) to {out}")
    else:
        print(json.dumps(problem.to_json(), indent=2))


def cmd_build_dr(args) -> int:
    if args.config:
        cfg = casestudies.load_config(args.config)
        if not isinstance(cfg, casestudies.DemandResponseConfig):
            raise ValidationError("config file is not a demand-response config")
    else:
        net = casestudies.synth_network(args.network, args.size)
        cfg = casestudies.demand_response_config(net, args.supply, args.sigma)
    if args.write_config:
        _write(Path(args.write_config), json.dumps(casestudies.config_to_json(cfg), indent=2) + "\n")
    _emit_problem(casestudies.build_demand_response(cfg), args.out)
    return EXIT_OK


def cmd_build_opf(args) -> int:
    if args.config:
        cfg = casestudies.load_config(args.config)
        if not isinstance(cfg, casestudies.OpfConfig):
            raise ValidationError("config file is not an OPF config")
    else:
        cfg = casestudies.opf_config(casestudies.synth_network(args.network, args.size), args.sigma)
    if args.write_config:
        _write(Path(args.write_config), json.dumps(casestudies.config_to_json(cfg), indent=2) + "\n")
    _emit_problem(casestudies.build_opf(cfg), args.out)
    return EXIT_OK


def cmd_keygen(args) -> int:
    keys = _make_keys(args.scheme, args.bits, args.agents, random.Random(_seed(args)))
    text = json.dumps(_keys_to_json(args.scheme, keys), indent=2) + "\n"
    if args.out:
        _write(Path(args.out), text)
        print(f"wrote {args.scheme} key material to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


# parser ------------------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hegrad", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $HEGRAD_SEED or 0)")

    r = sub.add_parser("run", help="run the plain or an encrypted protocol on a problem file")
    r.add_argument("--problem", required=True)
    r.add_argument("--scheme", choices=("plain", "alg1", "alg2"), default="plain")
    r.add_argument("--bits", type=_bits, default=256)
    r.add_argument("--iters", type=_iters, default=20)
    r.add_argument("--out", default="hegrad-out")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--key-file", help="key material written by 'hegrad keygen'")
    common(r)
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("golden", help="replay an embedded worked example and check every value")
    g.add_argument("which", choices=sorted(golden.EXAMPLES))
    g.set_defaults(func=cmd_golden)

    b = sub.add_parser("bench", help="time an encrypted protocol over a ladder of key sizes")
    b.add_argument("--problem", required=True)
    b.add_argument("--scheme", choices=("plain", "alg1", "alg2"), default="alg1")
    b.add_argument("--ladder", help="comma-separated key sizes (default 500,1000,2000,3000,4000)")
    b.add_argument("--iters", type=_iters, default=5)
    b.add_argument("--format", choices=("csv", "json", "text"), default="text")
    b.add_argument("--out")
    common(b)
    b.set_defaults(func=cmd_bench)

    i = sub.add_parser("ioi", help="input-output inference analysis of a quadratic family file")
    i.add_argument("family")
    i.add_argument("--adversary", type=int, default=1)
    i.add_argument("--iters", type=_iters, default=3)
    i.add_argument("--format", choices=("text", "json"), default="text")
    i.set_defaults(func=cmd_ioi)

    for name, func, help_ in (
        ("build-dr", cmd_build_dr, "write a demand-response problem file"),
        ("build-opf", cmd_build_opf, "write an optimal-power-flow problem file"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="JSON config; otherwise a synthetic fixture is built")
        s.add_argument("--network", choices=("ring", "star", "path"), default="ring")
        s.add_argument("--size", type=int, default=4)
        s.add_argument("--sigma", type=int, default=4)
        if name == "build-dr":
            s.add_argument("--supply", type=int, default=1, help="number of supply buses")
        s.add_argument("--write-config", help="also write the config used")
        s.add_argument("--out")
        s.set_defaults(func=func)

    k = sub.add_parser("keygen", help="generate key material for an encrypted run")
    k.add_argument("--scheme", choices=("alg1", "alg2"), default="alg1")
    k.add_argument("--bits", type=_bits, default=256)
    k.add_argument("--agents", type=int, default=1, help="number of Paillier keypairs")
    k.add_argument("--out")
    common(k)
    k.set_defaults(func=cmd_keygen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyBoundViolated as exc:
        where = "" if exc.step is None or exc.step < 0 else f" (step {exc.step})"
        print(f"aborted{where}: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except NotAffine as exc:
        print(f"assumption gate: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (AuditViolation, HegradError) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

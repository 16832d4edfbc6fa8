"""Compare the GMP extension kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--bits 512,1024,2048] [--repeat 20]

Prints one row per (kernel, key size) with the median time of each backend
and the speedup, then times whole encrypted runs of the two case studies
with each backend swapped in. Both backends are checked to return identical
results.
"""
from __future__ import annotations

import argparse
import contextlib
import random
import statistics
import sys
import time

from hegrad import casestudies, kernels, paillier, protocol, singlemod

KERNEL_NAMES = ("powmod", "multi_powmod", "monomial_sum", "is_probable_prime")


def _cases(bits: int, rng: random.Random):
    mod = rng.getrandbits(2 * bits) | 1 | (1 << (2 * bits - 1))
    base = rng.getrandbits(2 * bits) % mod
    exp = rng.getrandbits(bits)
    bases = [rng.getrandbits(2 * bits) % mod for _ in range(8)]
    exps = [rng.getrandbits(bits) for _ in range(8)]
    # a degree-3 polynomial over ciphertext-sized integers
    cts = [rng.getrandbits(3 * bits) for _ in range(6)]
    coeffs = [rng.randrange(1, 10**8) for _ in range(10)]
    factors = [[(cts[rng.randrange(6)], 1), (cts[rng.randrange(6)], 2)] for _ in range(10)]
    prime_candidate = rng.getrandbits(bits // 2) | 1 | (1 << (bits // 2 - 1))
    return {
        "powmod": lambda k: k.powmod(base, exp, mod),
        "multi_powmod": lambda k: k.multi_powmod(bases, exps, mod),
        "monomial_sum": lambda k: k.monomial_sum(coeffs, factors),
        "is_probable_prime": lambda k: k.is_probable_prime(prime_candidate, 64),
    }


def _median_time(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


@contextlib.contextmanager
def _backend(impl):
    saved = {name: getattr(kernels, name) for name in KERNEL_NAMES}
    for name in KERNEL_NAMES:
        setattr(kernels, name, getattr(impl, name))
    try:
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def _protocol_runs(bits: int, iters: int, seed: int):
    net = casestudies.synth_network("ring", 4)
    dr = casestudies.build_demand_response(casestudies.demand_response_config(net))
    opf = casestudies.build_opf(casestudies.opf_config(net))

    def run_dr():
        rng = random.Random(seed)
        return protocol.run_algorithm1(dr, singlemod.keygen(bits, rng), iters, rng).trajectory

    def run_opf():
        rng = random.Random(seed)
        keys = [paillier.keygen(bits, rng) for _ in range(opf.N)]
        return protocol.run_algorithm2(opf, keys, iters, rng).trajectory

    return {"demand-response alg1": run_dr, "opf alg2": run_opf}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--bits", default="512,1024,2048")
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--protocol-bits", type=int, default=1024)
    p.add_argument("--protocol-iters", type=int, default=5)
    args = p.parse_args(argv)
    if kernels.native is None:
        print("GMP extension not built; only the Python backend is available", file=sys.stderr)
        return 1
    rng = random.Random(args.seed)
    print(f"{'kernel':<18} {'bits':>5} {'python s':>11} {'gmp s':>11} {'speedup':>8}")
    for bits in (int(b) for b in args.bits.split(",")):
        for name, case in _cases(bits, rng).items():
            if case(kernels.python) != case(kernels.native):
                print(f"{name} at {bits} bits: backends disagree", file=sys.stderr)
                return 2
            py = _median_time(lambda: case(kernels.python), args.repeat)
            gmp = _median_time(lambda: case(kernels.native), args.repeat)
            print(f"{name:<18} {bits:>5} {py:>11.6f} {gmp:>11.6f} {py / gmp:>7.1f}x")
    print()
    print(f"{'protocol run':<22} {'bits':>5} {'iters':>5} {'python s':>10} {'gmp s':>10} {'speedup':>8}")
    for name, run in _protocol_runs(args.protocol_bits, args.protocol_iters, args.seed).items():
        timings, results = {}, {}
        for label, impl in (("python", kernels.python), ("gmp", kernels.native)):
            with _backend(impl):
                t0 = time.perf_counter()
                results[label] = run()
                timings[label] = time.perf_counter() - t0
        if results["python"] != results["gmp"]:
            print(f"{name}: backends produced different trajectories", file=sys.stderr)
            return 2
        py, gmp = timings["python"], timings["gmp"]
        print(f"{name:<22} {args.protocol_bits:>5} {args.protocol_iters:>5} {py:>10.3f} {gmp:>10.3f} {py / gmp:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

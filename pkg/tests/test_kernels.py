import os
import subprocess
import sys

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from hegrad import kernels

backends = [kernels.python] + ([kernels.native] if kernels.native is not None else [])
big = st.integers(0, 2**2048)
moduli = st.integers(3, 2**1024).map(lambda m: m | 1)


def test_backend_selection():
    assert kernels.BACKEND in ("gmp", "python")
    code = "import hegrad.kernels as k; print(k.BACKEND)"
    env = {**os.environ, "HEGRAD_KERNELS": "python"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.skipif(kernels.native is None, reason="compiled extension not built")
def test_native_is_default_when_built():
    assert kernels.BACKEND == "gmp" and kernels.powmod is kernels.native.powmod


@pytest.mark.parametrize("impl", backends)
@settings(max_examples=60, deadline=None)
@given(big, st.integers(0, 2**600), moduli)
def test_powmod(impl, base, exp, mod):
    assert impl.powmod(base, exp, mod) == pow(base, exp, mod)


@pytest.mark.parametrize("impl", backends)
@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(big, st.integers(0, 2**300)), max_size=6), moduli)
def test_multi_powmod(impl, pairs, mod):
    expected = 1 % mod
    for b, e in pairs:
        expected = expected * pow(b, e, mod) % mod
    assert impl.multi_powmod([b for b, _ in pairs], [e for _, e in pairs], mod) == expected


@pytest.mark.parametrize("impl", backends)
@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-10**20, 10**20),
                          st.lists(st.tuples(st.integers(-2**300, 2**300), st.integers(1, 3)), max_size=3)),
                max_size=5))
def test_monomial_sum(impl, terms):
    expected = 0
    for c, fs in terms:
        prod = c
        for v, e in fs:
            prod *= v**e
        expected += prod
    assert impl.monomial_sum([c for c, _ in terms], [fs for _, fs in terms]) == expected


@pytest.mark.parametrize("impl", backends)
def test_primality_against_sympy(impl):
    for n in list(range(0, 2000)) + [2**127 - 1, 2**127 + 1, 561, 41041, 3215031751]:
        assert impl.is_probable_prime(n, 32) == sympy.isprime(n), n


@pytest.mark.skipif(kernels.native is None, reason="compiled extension not built")
@settings(max_examples=60, deadline=None)
@given(big, st.integers(0, 2**600), moduli)
def test_backends_agree(base, exp, mod):
    assert kernels.native.powmod(base, exp, mod) == kernels.python.powmod(base, exp, mod)


@pytest.mark.parametrize("which", ["alg1", "alg2"])
def test_golden_under_python_fallback(which):
    code = f"import sys, hegrad.kernels as k, hegrad.cli as c; assert k.BACKEND == 'python'; sys.exit(c.main(['golden', '{which}']))"
    env = {**os.environ, "HEGRAD_KERNELS": "python"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "all values match" in out.stdout

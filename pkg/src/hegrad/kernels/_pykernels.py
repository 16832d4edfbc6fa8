"""Pure-Python big-integer kernels (reference implementation and fallback)."""
from __future__ import annotations

_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
    157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233,
    239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313, 317,
)


def powmod(base: int, exp: int, mod: int) -> int:
    return pow(base, exp, mod)


def multi_powmod(bases, exps, mod: int) -> int:
    """Return ``prod(b**e for b, e in zip(bases, exps)) % mod``; exponents are non-negative."""
    acc = 1 % mod
    for b, e in zip(bases, exps):
        if e:
            acc = acc * pow(b, e, mod) % mod
    return acc


def monomial_sum(coeffs, factors) -> int:
    """Return ``sum(c * prod(b**e for b, e in f) for c, f in zip(coeffs, factors))``.

    ``factors[v]`` is a sequence of ``(base, exponent)`` pairs.
    """
    total = 0
    for c, fs in zip(coeffs, factors):
        term = c
        for b, e in fs:
            term *= b**e if e != 1 else b
        total += term
    return total


def is_probable_prime(n: int, rounds: int = 64) -> bool:
    """Miller-Rabin with the first ``rounds`` primes as witnesses (plus trial division)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES[:rounds]:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True

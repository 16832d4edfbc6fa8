"""Paillier cryptosystem with the affine ciphertext evaluation used by the public-key protocol.

Notation follows the usual presentation with the base renamed: public key
``(alpha, beta)`` with ``alpha = p*q`` and ``beta = alpha + 1``; private key
``(nu, pi)`` with ``nu = lcm(p-1, q-1)`` and ``pi`` the inverse of
``L(beta**nu mod alpha**2)`` modulo ``alpha``, where ``L(u) = (u-1)/alpha``.
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import kernels
from .errors import (
    InvalidRandomizer,
    KeyMismatch,
    MissingVariable,
    PlaintextOutOfRange,
    PrecisionExceeded,
    PrimeGenerationFailure,
    ValidationError,
)
from .fixedpoint import ScaledDecimal, encode

MAX_PRIME_ATTEMPTS = 100_000
MAX_KEY_ATTEMPTS = 64


@dataclass(frozen=True)
class PaillierPublicKey:
    alpha: int
    beta: int

    @property
    def alpha_sq(self) -> int:
        return self.alpha * self.alpha

    @property
    def key_id(self) -> str:
        digest = hashlib.sha256(f"{self.alpha}:{self.beta}".encode()).hexdigest()
        return digest[:16]

    def to_json(self) -> dict:
        return {"alpha": str(self.alpha), "beta": str(self.beta)}

    @classmethod
    def from_json(cls, data: Mapping) -> "PaillierPublicKey":
        return cls(int(data["alpha"]), int(data["beta"]))


@dataclass(frozen=True)
class PaillierKeypair:
    p: int
    q: int
    alpha: int
    beta: int
    nu: int
    pi: int = field(repr=False)

    @classmethod
    def from_primes(cls, p: int, q: int) -> "PaillierKeypair":
        alpha = p * q
        if p == q or math.gcd(alpha, (p - 1) * (q - 1)) != 1:
            raise ValidationError(f"primes {p}, {q} violate gcd(pq, (p-1)(q-1)) = 1")
        beta = alpha + 1
        nu = math.lcm(p - 1, q - 1)
        alpha_sq = alpha * alpha
        ell = (kernels.powmod(beta, nu, alpha_sq) - 1) // alpha
        pi = pow(ell, -1, alpha)
        return cls(p, q, alpha, beta, nu, pi)

    @property
    def public(self) -> PaillierPublicKey:
        return PaillierPublicKey(self.alpha, self.beta)

    @property
    def key_id(self) -> str:
        return self.public.key_id

    def check(self) -> bool:
        """Re-verify every keypair invariant."""
        alpha_sq = self.alpha * self.alpha
        ell = (kernels.powmod(self.beta, self.nu, alpha_sq) - 1) // self.alpha
        return (
            self.alpha == self.p * self.q
            and math.gcd(self.alpha, (self.p - 1) * (self.q - 1)) == 1
            and self.nu == math.lcm(self.p - 1, self.q - 1)
            and self.pi * ell % self.alpha == 1
        )

    def to_json(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "nu": str(self.nu),
            "pi": str(self.pi),
            "p": str(self.p),
            "q": str(self.q),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PaillierKeypair":
        kp = cls.from_primes(int(data["p"]), int(data["q"]))
        for name in ("alpha", "beta", "nu", "pi"):
            if name in data and int(data[name]) != getattr(kp, name):
                raise ValidationError(f"key file field {name} is inconsistent with p, q")
        return kp


@dataclass(frozen=True)
class PaillierCiphertext:
    value: int
    key_id: str

    def to_json(self) -> dict:
        return {"v": str(self.value), "key": self.key_id}

    @classmethod
    def from_json(cls, data: Mapping) -> "PaillierCiphertext":
        return cls(int(data["v"]), data["key"])


def _random_prime(bits: int, rng: random.Random) -> int:
    for _ in range(MAX_PRIME_ATTEMPTS):
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | (1 << (bits - 2)) | 1
        if kernels.is_probable_prime(cand, 64):
            return cand
    raise PrimeGenerationFailure(f"no {bits}-bit prime after {MAX_PRIME_ATTEMPTS} candidates")


def keygen(bits: int, rng: random.Random) -> PaillierKeypair:
    """Random keypair whose modulus has exactly ``bits`` bits."""
    if bits < 16:
        raise ValidationError("key size must be at least 16 bits")
    half = bits // 2
    for _ in range(MAX_KEY_ATTEMPTS):
        p = _random_prime(half, rng)
        q = _random_prime(bits - half, rng)
        if p == q or (p * q).bit_length() != bits:
            continue
        if math.gcd(p * q, (p - 1) * (q - 1)) != 1:
            continue
        return PaillierKeypair.from_primes(p, q)
    raise PrimeGenerationFailure(f"could not build a {bits}-bit keypair")


def draw_randomizer(pub: PaillierPublicKey, rng: random.Random) -> int:
    """Uniform element of the unit group mod ``alpha`` by rejection sampling."""
    while True:
        r = rng.randrange(1, pub.alpha)
        if math.gcd(r, pub.alpha) == 1:
            return r


def _pow_beta(pub: PaillierPublicKey, m: int) -> int:
    if pub.beta == pub.alpha + 1:
        # (alpha+1)**m = 1 + m*alpha  (mod alpha**2)
        return (1 + m * pub.alpha) % pub.alpha_sq
    return kernels.powmod(pub.beta, m, pub.alpha_sq)


def encrypt(pub: PaillierPublicKey, pt: int, r: int | random.Random) -> PaillierCiphertext:
    """``beta**pt * r**alpha mod alpha**2``; ``r`` may be a random source."""
    if not 0 <= pt < pub.alpha:
        raise PlaintextOutOfRange(f"plaintext {pt} outside Z_alpha")
    if not isinstance(r, int):
        r = draw_randomizer(pub, r)
    if not 0 < r < pub.alpha or math.gcd(r, pub.alpha) != 1:
        raise InvalidRandomizer(f"randomizer {r} is not a unit mod alpha")
    alpha_sq = pub.alpha_sq
    value = _pow_beta(pub, pt) * kernels.powmod(r, pub.alpha, alpha_sq) % alpha_sq
    return PaillierCiphertext(value, pub.key_id)


def decrypt(keys: PaillierKeypair, ct: PaillierCiphertext) -> int:
    if ct.key_id != keys.key_id:
        raise KeyMismatch("ciphertext was produced under a different key")
    alpha = keys.alpha
    u = kernels.powmod(ct.value, keys.nu, alpha * alpha)
    return (u - 1) // alpha * keys.pi % alpha


def _same_key(cts: Sequence[PaillierCiphertext]) -> str:
    ids = {ct.key_id for ct in cts}
    if len(ids) != 1:
        raise KeyMismatch(f"ciphertexts under {len(ids)} different keys")
    return ids.pop()


def homomorphic_add(pub: PaillierPublicKey, cts: Sequence[PaillierCiphertext]) -> PaillierCiphertext:
    """Ciphertext of the sum (mod alpha) of the plaintexts."""
    if not cts:
        raise ValidationError("need at least one ciphertext")
    key_id = _same_key(cts)
    if key_id != pub.key_id:
        raise KeyMismatch("ciphertexts are not under the given public key")
    acc = 1
    for ct in cts:
        acc = acc * ct.value % pub.alpha_sq
    return PaillierCiphertext(acc, key_id)


def homomorphic_scale(pub: PaillierPublicKey, ct: PaillierCiphertext, k: int) -> PaillierCiphertext:
    """Ciphertext of ``k * pt`` (mod alpha)."""
    if ct.key_id != pub.key_id:
        raise KeyMismatch("ciphertext is not under the given public key")
    return PaillierCiphertext(kernels.powmod(ct.value, k % pub.alpha, pub.alpha_sq), ct.key_id)


def eval_affine(
    pub: PaillierPublicKey,
    x_cts: Mapping[int, PaillierCiphertext],
    a_row: Mapping[int, ScaledDecimal] | Sequence[ScaledDecimal],
    b: ScaledDecimal,
    sigma: int,
) -> PaillierCiphertext:
    """Ciphertext of ``10**(2*sigma) * (A.x + B)`` from encryptions of ``10**sigma * x``.

    Weights and the constant are reduced into ``Z_alpha`` before exponentiation,
    so negative values work through the signed read-back of the decrypted residue.
    """
    items = a_row.items() if isinstance(a_row, Mapping) else enumerate(a_row)
    bases, exps = [], []
    for j, weight in items:
        weight = ScaledDecimal.coerce(weight)
        if not weight:
            continue
        try:
            ct = x_cts[j]
        except KeyError:
            raise MissingVariable(f"no ciphertext for state variable {j}") from None
        if ct.key_id != pub.key_id:
            raise KeyMismatch(f"ciphertext for variable {j} is under another key")
        bases.append(ct.value)
        exps.append(encode(weight, sigma) % pub.alpha)
    try:
        b_int = encode(b, 2 * sigma)
    except PrecisionExceeded:
        raise PrecisionExceeded(f"constant {b} has more than {2 * sigma} fraction digits") from None
    acc = kernels.multi_powmod(bases, exps, pub.alpha_sq)
    value = _pow_beta(pub, b_int % pub.alpha) * acc % pub.alpha_sq
    return PaillierCiphertext(value, pub.key_id)


def check_key_bound(alpha: int, A, B, state_bound, sigma: int) -> bool:
    """Worst-case check ``alpha >= 1 + 2 * 10**(2 sigma) * max_l |A_l x + B_l|``.

    ``A`` is a list of rows and ``B`` a list of constants (one per output);
    ``state_bound`` bounds ``max |x_j|``. A single row/constant is accepted too.
    """
    if A and not isinstance(A[0], (list, tuple)):
        A, B = [A], [B]
    xb = ScaledDecimal.coerce(state_bound)
    worst = ScaledDecimal(0)
    for row, const in zip(A, B, strict=True):
        mag = abs(ScaledDecimal.coerce(const))
        for a in row:
            mag = mag + abs(ScaledDecimal.coerce(a)) * xb
        worst = max(worst, mag)
    return alpha >= 1 + 2 * 10 ** (2 * sigma) * worst

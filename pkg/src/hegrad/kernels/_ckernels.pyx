# cython: language_level=3, boundscheck=False, wraparound=False
"""GMP-backed big-integer kernels. Same API as ``_pykernels``."""

from libc.stdlib cimport malloc, free

cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    ctypedef __mpz_struct* mpz_ptr
    void mpz_init(mpz_t)
    void mpz_clear(mpz_t)
    void mpz_set_ui(mpz_t, unsigned long)
    void mpz_set_si(mpz_t, long)
    void mpz_neg(mpz_t, mpz_t)
    void mpz_mul(mpz_t, mpz_t, mpz_t)
    void mpz_add(mpz_t, mpz_t, mpz_t)
    void mpz_mod(mpz_t, mpz_t, mpz_t)
    void mpz_pow_ui(mpz_t, mpz_t, unsigned long)
    void mpz_powm(mpz_t, mpz_t, mpz_t, mpz_t)
    int mpz_sgn(mpz_t)
    int mpz_probab_prime_p(mpz_t, int)
    size_t mpz_sizeinbase(mpz_t, int)
    void mpz_import(mpz_t, size_t, int, size_t, int, size_t, const void*)
    void* mpz_export(void*, size_t*, int, size_t, int, size_t, mpz_t)


cdef void _to_mpz(mpz_t out, object value):
    cdef bytes raw
    cdef object mag
    if -0x3fffffffffffffff <= value <= 0x3fffffffffffffff:
        mpz_set_si(out, <long>value)
        return
    mag = -value if value < 0 else value
    raw = mag.to_bytes((mag.bit_length() + 7) // 8, "little")
    mpz_import(out, len(raw), -1, 1, 0, 0, <const char*>raw)
    if value < 0:
        mpz_neg(out, out)


cdef object _from_mpz(mpz_t value):
    cdef size_t count = 0
    cdef int sign = mpz_sgn(value)
    cdef size_t nbytes
    cdef char* buf
    cdef object result
    if sign == 0:
        return 0
    nbytes = (mpz_sizeinbase(value, 2) + 7) // 8
    buf = <char*>malloc(nbytes)
    if buf == NULL:
        raise MemoryError()
    try:
        mpz_export(buf, &count, -1, 1, 0, 0, value)
        result = int.from_bytes(buf[:count], "little")
    finally:
        free(buf)
    return -result if sign < 0 else result


def powmod(base, exp, mod):
    if exp < 0:
        return pow(base, exp, mod)
    cdef mpz_t b, e, m, r
    mpz_init(b); mpz_init(e); mpz_init(m); mpz_init(r)
    try:
        _to_mpz(b, base); _to_mpz(e, exp); _to_mpz(m, mod)
        mpz_powm(r, b, e, m)
        return _from_mpz(r)
    finally:
        mpz_clear(b); mpz_clear(e); mpz_clear(m); mpz_clear(r)


def multi_powmod(bases, exps, mod):
    cdef mpz_t acc, b, e, m, t
    mpz_init(acc); mpz_init(b); mpz_init(e); mpz_init(m); mpz_init(t)
    try:
        _to_mpz(m, mod)
        mpz_set_ui(acc, 1)
        mpz_mod(acc, acc, m)
        for base, exp in zip(bases, exps):
            if not exp:
                continue
            if exp < 0:
                raise ValueError("negative exponent")
            _to_mpz(b, base); _to_mpz(e, exp)
            mpz_powm(t, b, e, m)
            mpz_mul(acc, acc, t)
            mpz_mod(acc, acc, m)
        return _from_mpz(acc)
    finally:
        mpz_clear(acc); mpz_clear(b); mpz_clear(e); mpz_clear(m); mpz_clear(t)


def monomial_sum(coeffs, factors):
    cdef mpz_t total, term, b, t
    mpz_init(total); mpz_init(term); mpz_init(b); mpz_init(t)
    try:
        for c, fs in zip(coeffs, factors):
            _to_mpz(term, c)
            for base, exp in fs:
                _to_mpz(b, base)
                if exp != 1:
                    mpz_pow_ui(t, b, <unsigned long>exp)
                    mpz_mul(term, term, t)
                else:
                    mpz_mul(term, term, b)
            mpz_add(total, total, term)
        return _from_mpz(total)
    finally:
        mpz_clear(total); mpz_clear(term); mpz_clear(b); mpz_clear(t)


def is_probable_prime(n, rounds=64):
    cdef mpz_t v
    if n < 2:
        return False
    mpz_init(v)
    try:
        _to_mpz(v, n)
        return mpz_probab_prime_p(v, rounds) > 0
    finally:
        mpz_clear(v)

"""Big-integer hot kernels.

The compiled GMP module is used when it was built; otherwise the pure-Python
module is loaded. Set ``HEGRAD_KERNELS=python`` to force the fallback.
"""
import os

from . import _pykernels as python

BACKEND = "python"
native = None

if os.environ.get("HEGRAD_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as native  # type: ignore[no-redef]
    except ImportError:  # extension not built
        native = None
    else:
        BACKEND = "gmp"

_impl = native if native is not None else python

powmod = _impl.powmod
multi_powmod = _impl.multi_powmod
monomial_sum = _impl.monomial_sum
is_probable_prime = _impl.is_probable_prime

__all__ = ["BACKEND", "powmod", "multi_powmod", "monomial_sum", "is_probable_prime", "python", "native"]

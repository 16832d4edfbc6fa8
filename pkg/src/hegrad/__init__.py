"""Privacy-preserving projected-gradient optimization with homomorphic encryption."""
from .fixedpoint import ScaledDecimal, FixedPointCodec

__version__ = "0.1.0"

__all__ = ["ScaledDecimal", "FixedPointCodec", "__version__"]

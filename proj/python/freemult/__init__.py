"""Multiplicative free and Boolean convolutions on the circle and positive
half-line: transforms, subordination, density recovery, Brownian-motion
marginals, free entropy, and limit-theorem experiments."""

try:
    # installed layout: the extension lives inside the package
    from . import _freemult as _impl
except ImportError:  # development layout: extension directly on sys.path
    import _freemult as _impl

globals().update(
    {name: getattr(_impl, name) for name in dir(_impl) if not name.startswith("_")}
)

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
del _impl

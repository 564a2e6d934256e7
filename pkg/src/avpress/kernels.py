"""Kernel backend selection.

The compiled extension (``avpress._native``) is preferred; the numpy
fallback (``avpress._purekernels``) is used when the extension is missing or
when ``AVPRESS_PURE`` is set in the environment. Both expose the same
functions; results agree to float64 rounding (the backends may sum in a
different order, so bit-identity is only guaranteed within one backend).
"""

import os

from avpress import _purekernels

if os.environ.get("AVPRESS_PURE"):
    _impl = _purekernels
    BACKEND = "pure"
else:
    try:
        from avpress import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _purekernels
        BACKEND = "pure"


def use_backend(name):
    """Force a backend ("native" or "pure"); used by benchmarks and tests."""
    global _impl, BACKEND
    if name == "pure":
        _impl = _purekernels
    elif name == "native":
        from avpress import _native

        _impl = _native
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name


def frame_mean(tokens):
    return _impl.frame_mean(tokens)


def cosine_rows(mat, vec):
    return _impl.cosine_rows(mat, vec)


def weighted_rows_sum(mat, weights):
    return _impl.weighted_rows_sum(mat, weights)


def merge_into_anchors(tokens, anchor_rows, assign):
    return _impl.merge_into_anchors(tokens, anchor_rows, assign)

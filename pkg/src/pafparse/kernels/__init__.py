"""Hot per-pixel kernels with two interchangeable backends.

A compiled extension (built from ``_core.pyx``) and a pure-numpy fallback
implement the same five operations. The active backend is chosen at import
time from the ``PAFPARSE_KERNELS`` environment variable (``auto``, ``cython``,
or ``python``; ``auto`` prefers the extension) and can be switched at runtime,
which the benchmark harness uses to compare the two.
"""

import os
from contextlib import contextmanager

import numpy as np

from ..errors import ConfigError
from . import fallback as _fallback

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def _initial_backend() -> str:
    choice = os.environ.get("PAFPARSE_KERNELS", "auto")
    if choice == "auto":
        return "cython" if _compiled is not None else "python"
    if choice not in _BACKENDS:
        raise ConfigError(
            f"PAFPARSE_KERNELS={choice!r} not available; "
            f"have {', '.join(available_backends())}"
        )
    return choice


_active = _initial_backend()


def get_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ConfigError(
            f"backend {name!r} not available; have {', '.join(available_backends())}"
        )
    _active = name


@contextmanager
def use_backend(name: str):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _vec(a) -> np.ndarray:
    return np.ascontiguousarray(np.atleast_1d(np.asarray(a, dtype=np.float64)))


def gaussian_peaks(out: np.ndarray, xs, ys, sigma: float, cutoff: float) -> None:
    """Max-composite truncated Gaussian bumps into ``out`` in place."""
    _BACKENDS[_active].gaussian_peaks(out, _vec(xs), _vec(ys), float(sigma), float(cutoff))


def limb_band_field(sum_x, sum_y, count, ax, ay, bx, by, halfwidth: float) -> None:
    """Accumulate unit segment vectors over rectangular bands, in place."""
    _BACKENDS[_active].limb_band_field(
        sum_x, sum_y, count, _vec(ax), _vec(ay), _vec(bx), _vec(by), float(halfwidth)
    )


def new_band_count(width: int, height: int) -> np.ndarray:
    """Allocate the contributor-count plane ``limb_band_field`` expects."""
    return np.zeros((height, width), dtype=np.intc)


def local_maxima(values: np.ndarray, threshold: float):
    """(ys, xs) of 8-neighborhood maxima above threshold, row-major order."""
    return _BACKENDS[_active].local_maxima(
        np.ascontiguousarray(values, dtype=np.float64), float(threshold)
    )


def sample_plane(grid: np.ndarray, px, py, bilinear: bool = True) -> np.ndarray:
    """Sample a plane at continuous points; off-grid reads as zero."""
    pxa = np.asarray(px, dtype=np.float64)
    shape = pxa.shape
    out = _BACKENDS[_active].sample_plane(grid, _vec(px).ravel(), _vec(py).ravel(), bool(bilinear))
    return out.reshape(shape)


def sample_line_integrals(field_x, field_y, ax, ay, bx, by,
                          num_samples: int, bilinear: bool = True) -> np.ndarray:
    """Endpoint-inclusive mean of the field projected on each segment."""
    return _BACKENDS[_active].sample_line_integrals(
        field_x, field_y, _vec(ax), _vec(ay), _vec(bx), _vec(by),
        int(num_samples), bool(bilinear),
    )

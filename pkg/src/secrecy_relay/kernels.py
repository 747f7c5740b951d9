"""Backend selection for the AWGN grid kernels.

The compiled extension is used when it imports; otherwise the numpy
versions are.  Setting ``SECRECY_RELAY_PURE_PYTHON=1`` forces numpy.
"""

import os

import numpy as np

from . import _pykernels
from ._pykernels import split_to_df

__all__ = ["BACKEND", "split_to_df", "df_values", "df_profile", "bound_profile", "af_values", "bound_values", "get_backend"]

_impl = _pykernels
BACKEND = "numpy"

if os.environ.get("SECRECY_RELAY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        _impl = _ckernels
        BACKEND = "cython"


def get_backend(name: str | None = None):
    """Kernel module by name (``"cython"`` or ``"numpy"``), default the active one."""
    if name is None:
        return _impl
    if name == "numpy":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _vec(a):
    return np.ascontiguousarray(a, dtype=np.float64).ravel()


def df_values(c, p, gains, p1, p2, split=False):
    return _impl.df_values(_vec(c), _vec(p), tuple(gains), float(p1), float(p2), bool(split))


def df_profile(c, gains, p1, p2):
    return _impl.df_profile(_vec(c), tuple(gains), float(p1), float(p2))


def bound_profile(c, gains, p1, p2):
    return _impl.bound_profile(_vec(c), tuple(gains), float(p1), float(p2))


def af_values(alpha, beta, gamma, p, gains, p1, p2):
    return _impl.af_values(
        _vec(alpha), _vec(beta), _vec(gamma), _vec(p), tuple(gains), float(p1), float(p2)
    )


def bound_values(rho, s, gains, p1, p2):
    return _impl.bound_values(_vec(rho), _vec(s), tuple(gains), float(p1), float(p2))

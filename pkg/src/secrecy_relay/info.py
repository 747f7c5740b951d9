"""Entropy and mutual information for finite and Gaussian distributions.

All quantities are in bits.  Discrete distributions live in :class:`JointPmf`,
a dense tensor whose axes carry names, so that terms such as
``I(V1; Y, Y1 | V2)`` can be written as

    conditional_mi(p, "v1", ("y", "y1"), "v2")

Gaussian helpers cover the scalar ``1/2 log2(1 + snr)`` form and the
log-determinant form for vector channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import NumericalDomainError, ValidationError

__all__ = [
    "JointPmf",
    "CovariancePair",
    "entropy",
    "mutual_information",
    "conditional_mi",
    "gaussian_mi_scalar",
    "gaussian_mi_logdet",
    "gaussian_conditional_mi",
]

NORM_TOL = 1e-12
ZERO_PROB = 1e-15
MAX_JOINT_SIZE = 10**7

AxisSet = Union[str, Iterable[str]]


class JointPmf:
    """Probability tensor over named finite alphabets.

    Parameters
    ----------
    probs : array_like
        Nonnegative tensor, one axis per name, row-major.
    names : sequence of str
        Unique axis names, ``len(names) == probs.ndim``.

    The tensor is renormalized only when its sum is already within
    ``1e-12`` of one; anything further off is rejected.  Instances are
    immutable.
    """

    __slots__ = ("_probs", "_names", "_index")

    def __init__(self, probs, names: Sequence[str]):
        arr = np.array(probs, dtype=float)
        names = tuple(names)
        if arr.ndim != len(names):
            raise ValidationError(
                f"tensor has {arr.ndim} axes but {len(names)} names were given"
            )
        if len(set(names)) != len(names):
            raise ValidationError(f"axis names must be unique, got {names}")
        if arr.size > MAX_JOINT_SIZE:
            raise ValidationError(
                f"joint size {arr.size} exceeds the cap of {MAX_JOINT_SIZE}"
            )
        if arr.size == 0:
            raise ValidationError("empty alphabet")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("probabilities must be finite")
        if np.any(arr < 0):
            raise ValidationError(f"negative probability {arr.min():.3e}")
        total = arr.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        arr /= total
        arr.setflags(write=False)
        self._probs = arr
        self._names = names
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def names(self) -> tuple:
        return self._names

    @property
    def dims(self) -> list:
        """List of ``(axis_name, alphabet_size)`` pairs."""
        return list(zip(self._names, self._probs.shape))

    def size(self, name: str) -> int:
        return self._probs.shape[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValidationError(
                f"unknown axis {name!r}; available: {self._names}"
            ) from None

    def marginal(self, names: AxisSet) -> np.ndarray:
        """Marginal tensor over ``names``, in the order given."""
        names = _as_axes(names)
        keep = [self.axis(n) for n in names]
        drop = tuple(i for i in range(self._probs.ndim) if i not in keep)
        m = self._probs.sum(axis=drop) if drop else self._probs
        # remaining axes are in ascending order; permute to the requested one
        order = sorted(keep)
        return np.transpose(m, [order.index(i) for i in keep])

    def transpose(self, names: Sequence[str]) -> "JointPmf":
        names = tuple(names)
        if sorted(names) != sorted(self._names):
            raise ValidationError(f"{names} is not a permutation of {self._names}")
        return JointPmf(
            np.transpose(self._probs, [self.axis(n) for n in names]), names
        )

    def __repr__(self):
        dims = ", ".join(f"{n}:{s}" for n, s in self.dims)
        return f"JointPmf({dims})"


def _as_axes(group: AxisSet) -> tuple:
    if isinstance(group, str):
        return (group,)
    return tuple(group)


def _h(m: np.ndarray) -> float:
    q = m[m > ZERO_PROB]
    return float(-np.sum(q * np.log2(q)))


def entropy(p: JointPmf, axes: AxisSet | None = None) -> float:
    """Shannon entropy of ``p`` (or of its marginal on ``axes``) in bits."""
    if axes is None:
        return max(_h(p.probs), 0.0)
    axes = _as_axes(axes)
    if not axes:
        return 0.0
    return max(_h(p.marginal(axes)), 0.0)


def _check_groups(p: JointPmf, *groups) -> None:
    seen = set()
    for g in groups:
        for name in g:
            p.axis(name)
            if name in seen:
                raise ValidationError(f"axis {name!r} appears in more than one group")
            seen.add(name)


def mutual_information(p: JointPmf, group_a: AxisSet, group_b: AxisSet) -> float:
    """``I(A; B) = H(A) + H(B) - H(A, B)``; other axes are marginalized out."""
    return conditional_mi(p, group_a, group_b, ())


def conditional_mi(
    p: JointPmf, group_a: AxisSet, group_b: AxisSet, group_c: AxisSet = ()
) -> float:
    """``I(A; B | C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)``.

    ``group_c`` may be empty.  Tiny negative results from cancellation are
    clipped to zero.
    """
    a, b, c = _as_axes(group_a), _as_axes(group_b), _as_axes(group_c)
    if not a or not b:
        raise ValidationError("mutual information needs two non-empty groups")
    _check_groups(p, a, b, c)
    value = entropy(p, a + c) + entropy(p, b + c) - entropy(p, a + b + c) - entropy(p, c)
    return max(value, 0.0)


def gaussian_mi_scalar(snr: float) -> float:
    """``1/2 log2(1 + snr)``."""
    if snr < 0 or not np.isfinite(snr):
        raise ValidationError(f"snr must be finite and >= 0, got {snr!r}")
    return 0.5 * float(np.log2(1.0 + snr))


@dataclass(frozen=True)
class CovariancePair:
    """Signal and noise covariances of a vector Gaussian channel."""

    signal: np.ndarray
    noise: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.signal, dtype=complex))
        n = np.atleast_2d(np.asarray(self.noise, dtype=complex))
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValidationError(f"signal covariance must be square, got {s.shape}")
        if n.shape != s.shape:
            raise ValidationError(
                f"noise shape {n.shape} does not match signal shape {s.shape}"
            )
        for label, m in (("signal", s), ("noise", n)):
            scale = max(1.0, float(np.max(np.abs(m))))
            if not np.allclose(m, m.conj().T, atol=1e-10 * scale, rtol=0):
                raise ValidationError(f"{label} covariance is not Hermitian")
        object.__setattr__(self, "signal", s)
        object.__setattr__(self, "noise", n)

    @property
    def dim(self) -> int:
        return self.signal.shape[0]


def _logdet2(m: np.ndarray) -> float:
    sign, logabs = np.linalg.slogdet(m)
    if sign == 0 or np.real(sign) <= 0:
        raise NumericalDomainError("matrix is singular or not positive definite")
    return float(logabs) / math.log(2.0)


def gaussian_mi_logdet(c: CovariancePair) -> float:
    """``1/2 log2( det(signal + noise) / det(noise) )``."""
    n = c.noise
    if np.linalg.eigvalsh(n).min() <= 0:
        raise NumericalDomainError("noise covariance is not positive definite")
    value = 0.5 * (_logdet2(c.signal + n) - _logdet2(n))
    if value < 0:
        if value < -1e-12:
            raise NumericalDomainError(
                f"negative log-det mutual information {value:.3e}; "
                "signal covariance is not positive semidefinite"
            )
        value = 0.0
    return value


def _conditional_cov(cov: np.ndarray, target, given) -> np.ndarray:
    t = np.ix_(target, target)
    if not given:
        return cov[t]
    tg = cov[np.ix_(target, given)]
    gg = cov[np.ix_(given, given)]
    # pinv: inputs may be degenerate (zero power, |rho| = 1)
    return cov[t] - tg @ np.linalg.pinv(gg, hermitian=True) @ tg.conj().T


def gaussian_conditional_mi(
    cov: np.ndarray, group_a: Sequence[int], group_b: Sequence[int],
    group_c: Sequence[int] = (),
) -> float:
    """``I(A; B | C)`` for a jointly Gaussian vector with covariance ``cov``.

    ``B`` must have a positive-definite covariance given ``(A, C)``, which
    holds whenever ``B`` collects noisy channel outputs.  ``A`` and ``C``
    may be degenerate.
    """
    cov = np.asarray(cov)
    a, b, c = list(group_a), list(group_b), list(group_c)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ValidationError("index groups must be disjoint")
    outer = _conditional_cov(cov, b, c)
    inner = _conditional_cov(cov, b, a + c)
    inner = 0.5 * (inner + inner.conj().T)
    outer = 0.5 * (outer + outer.conj().T)
    return gaussian_mi_logdet(CovariancePair(outer - inner, inner))

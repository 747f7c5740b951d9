"""AWGN and discrete relay-eavesdropper channel models.

Node naming follows the usual relay convention: ``s`` source, ``r`` relay,
``d`` destination, ``w`` eavesdropper.  Noise variances are normalized to
one, so powers are SNRs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import GeometryError, ValidationError
from .info import NORM_TOL

__all__ = [
    "ChannelGains",
    "PhaseModel",
    "Topology",
    "PhaseDraw",
    "RelayDmc",
    "DegradednessCheck",
    "gains_from_topology",
    "sample_phases",
    "phase_generator",
    "is_reversely_degraded",
    "wiretap_reduction",
]

LINKS = ("h_sd", "h_sw", "h_sr", "h_rd", "h_rw")


@dataclass(frozen=True)
class ChannelGains:
    """Complex amplitude gains of the five links plus the power budget."""

    h_sd: complex
    h_sw: complex
    h_sr: complex
    h_rd: complex
    h_rw: complex
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        for name in LINKS:
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValidationError(f"gain {name} is not finite: {v!r}")
            object.__setattr__(self, name, v)
        for name in ("p1", "p2"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"power {name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, v)

    def with_powers(self, p1: float, p2: float) -> "ChannelGains":
        return replace(self, p1=p1, p2=p2)

    def magnitudes(self) -> dict:
        return {name: abs(getattr(self, name)) for name in LINKS}

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name in LINKS)


class PhaseModel(str, Enum):
    REAL = "real"
    UNIFORM_PHASE = "uniform-phase"


def _point(v) -> tuple:
    x, y = (float(c) for c in v)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite coordinate {v!r}")
    return (x, y)


@dataclass(frozen=True)
class Topology:
    """Planar node placement.  Gain magnitudes fall off as ``d ** -gamma``."""

    source: tuple = (0.0, 0.0)
    destination: tuple = (1.0, 0.0)
    eavesdropper: tuple = (0.0, 1.0)
    relay: tuple = (0.5, 0.0)
    gamma: float = 2.0
    phase_model: PhaseModel = PhaseModel.REAL
    d_min: float = 1e-6
    clamp: bool = True

    def __post_init__(self):
        for name in ("source", "destination", "eavesdropper", "relay"):
            object.__setattr__(self, name, _point(getattr(self, name)))
        if not self.gamma > 1:
            raise ValidationError(f"attenuation exponent must exceed 1, got {self.gamma!r}")
        if not self.d_min > 0:
            raise ValidationError(f"d_min must be positive, got {self.d_min!r}")
        object.__setattr__(self, "phase_model", PhaseModel(self.phase_model))

    def with_relay(self, x: float, y: float = 0.0) -> "Topology":
        return replace(self, relay=(x, y))

    def distances(self) -> dict:
        s, d, w, r = self.source, self.destination, self.eavesdropper, self.relay
        return {
            "h_sd": math.dist(s, d),
            "h_sw": math.dist(s, w),
            "h_sr": math.dist(s, r),
            "h_rd": math.dist(r, d),
            "h_rw": math.dist(r, w),
        }


class PhaseDraw(NamedTuple):
    theta_sw: float
    theta_rw: float


def gains_from_topology(
    t: Topology, phases: PhaseDraw | None = None, p1: float = 0.0, p2: float = 0.0
) -> ChannelGains:
    """Channel gains for the placement ``t``.

    Distances below ``t.d_min`` are clamped (or rejected when clamping is
    off).  Destination-side links always carry phase zero.  In the
    uniform-phase model the two eavesdropper links take their phases from
    ``phases``; in the real model ``phases`` must be omitted.
    """
    mags = {}
    for link, d in t.distances().items():
        if d < t.d_min:
            if not t.clamp:
                raise GeometryError(
                    f"distance {d:.3e} on link {link} is below d_min={t.d_min:g}"
                )
            d = t.d_min
        mags[link] = d ** (-t.gamma)
    if phases is not None:
        if t.phase_model is not PhaseModel.UNIFORM_PHASE:
            raise ValidationError("phases given for a real-channel topology")
        mags["h_sw"] = mags["h_sw"] * np.exp(1j * phases.theta_sw)
        mags["h_rw"] = mags["h_rw"] * np.exp(1j * phases.theta_rw)
    return ChannelGains(**mags, p1=p1, p2=p2)


def phase_generator(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) % 2**64))


def sample_phases(seed: int, n: int) -> np.ndarray:
    """``n`` independent draws of ``(theta_sw, theta_rw)``, uniform on ``[0, 2pi)``.

    Returns an ``(n, 2)`` array; row ``i`` unpacks into a :class:`PhaseDraw`.
    The sequence depends only on ``seed``.
    """
    if n < 1:
        raise ValidationError(f"need at least one draw, got n={n}")
    u = phase_generator(seed).random((n, 2))
    theta = 2.0 * np.pi * u
    # 2*pi*u can round up to 2*pi for u just below 1
    return np.where(theta >= 2.0 * np.pi, 0.0, theta)


@dataclass(frozen=True)
class RelayDmc:
    """Transition tensor ``t[x1, x2, y, y1, y2] = p(y, y1, y2 | x1, x2)``."""

    transition: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.transition, dtype=float)
        if t.ndim != 5:
            raise ValidationError(f"transition tensor needs 5 axes, got {t.ndim}")
        if t.size == 0:
            raise ValidationError("empty alphabet in transition tensor")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise ValidationError("transition probabilities must be finite and >= 0")
        sums = t.sum(axis=(2, 3, 4))
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > NORM_TOL:
            x1, x2 = np.unravel_index(np.argmax(np.abs(sums - 1.0)), sums.shape)
            raise ValidationError(
                f"slice (x1={x1}, x2={x2}) sums to {sums[x1, x2]!r}, not 1"
            )
        t /= sums[:, :, None, None, None]
        t.setflags(write=False)
        object.__setattr__(self, "transition", t)

    @property
    def sizes(self) -> dict:
        return dict(zip(("x1", "x2", "y", "y1", "y2"), self.transition.shape))

    @classmethod
    def from_factors(cls, p_y_given_x, p_y1_given_y_x2, p_y2_given_x) -> "RelayDmc":
        """Compose ``p(y|x1,x2) p(y1|y,x2) p(y2|x1,x2)``.

        Shapes: ``(X1,X2,Y)``, ``(Y,X2,Y1)``, ``(X1,X2,Y2)``.  The result is
        reversely degraded by construction.
        """
        t = np.einsum(
            "aby,ybu,abw->abyuw",
            np.asarray(p_y_given_x, float),
            np.asarray(p_y1_given_y_x2, float),
            np.asarray(p_y2_given_x, float),
        )
        return cls(t)

    @classmethod
    def from_json(cls, doc) -> "RelayDmc":
        """Build from the file schema ``{"sizes": {...}, "probs": [...]}``.

        ``probs`` is flat in x1-major order (x1, x2, y, y1, y2).
        """
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        try:
            sizes = doc["sizes"]
            shape = tuple(int(sizes[k]) for k in ("x1", "x2", "y", "y1", "y2"))
            probs = doc["probs"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed channel document: {exc}") from exc
        if any(s < 1 for s in shape):
            raise ValidationError(f"alphabet sizes must be >= 1, got {shape}")
        flat = np.asarray(probs, dtype=float)
        if flat.ndim != 1 or flat.size != math.prod(shape):
            raise ValidationError(
                f"probs has {flat.size} entries, sizes imply {math.prod(shape)}"
            )
        return cls(flat.reshape(shape))

    def to_json(self) -> dict:
        return {"sizes": self.sizes, "probs": self.transition.ravel().tolist()}


class DegradednessCheck(NamedTuple):
    degraded: bool
    violation: float


def is_reversely_degraded(c: RelayDmc, tol: float = 1e-9) -> DegradednessCheck:
    """Test ``p(y, y1 | x1, x2) = p(y | x1, x2) p(y1 | y, x2)``.

    For every ``(y, x2)`` the reference kernel ``q(y1 | y, x2)`` is the
    ``p(y|x1,x2)``-weighted average over ``x1``.  The violation is the
    largest absolute gap ``|p(y,y1|x1,x2) - p(y|x1,x2) q(y1|y,x2)|``; it is
    zero exactly when ``Y1`` is independent of ``X1`` given ``(Y, X2)``.
    """
    p_yy1 = c.transition.sum(axis=4)  # (x1, x2, y, y1)
    p_y = p_yy1.sum(axis=3)  # (x1, x2, y)
    num = p_yy1.sum(axis=0)  # (x2, y, y1)
    den = p_y.sum(axis=0)  # (x2, y)
    q = np.divide(num, den[..., None], out=np.zeros_like(num), where=den[..., None] > 0)
    gap = np.abs(p_yy1 - p_y[..., None] * q[None])
    violation = float(gap.max())
    return DegradednessCheck(violation <= tol, violation)


def wiretap_reduction(c: RelayDmc, x2_silent: int) -> np.ndarray:
    """Channel ``p(y, y2 | x1)`` with the relay input pinned to ``x2_silent``.

    Returns an ``(X1, Y, Y2)`` tensor; ``Y1`` is marginalized out.
    """
    n2 = c.transition.shape[1]
    if not 0 <= int(x2_silent) < n2:
        raise ValidationError(f"relay symbol {x2_silent} out of range [0, {n2})")
    return c.transition[:, int(x2_silent)].sum(axis=2)

"""Secrecy rates of the Gaussian relay-eavesdropper channel.

Every evaluator returns a :class:`StrategyResult` in bits per channel use.
Searches run on the closed-form grid kernels in :mod:`.kernels`; the
branch values reported at the optimum are recomputed independently from
log-determinants of the underlying covariance matrices.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .channels import ChannelGains, PhaseDraw, PhaseModel, Topology, sample_phases
from .errors import ContractError, ValidationError
from .info import (
    CovariancePair,
    gaussian_mi_logdet,
    gaussian_mi_scalar,
)
from .optimize import DEFAULT_BUDGET, BoxSpec, SearchReport, grid_refine

log = logging.getLogger(__name__)

__all__ = [
    "StrategyResult",
    "SearchSettings",
    "AfMatrices",
    "DF_SETTINGS",
    "AF_SETTINGS",
    "OUTER_SETTINGS",
    "wiretap_baseline",
    "df_rate",
    "nf_rate",
    "cf_rate_awgn",
    "af_rate",
    "af_matrices",
    "outer_bound_gaussian",
    "outer_bound_terms",
    "deaf_nf_rate_awgn",
    "mc_phase_average",
    "evaluate",
    "STRATEGIES",
]

Z95 = 1.959963984540054


@dataclass
class StrategyResult:
    """A secrecy rate with the parameters that achieve it.

    ``branch_values`` holds every argument of the min/[.]^+ structure at
    the reported parameters, plus ``pre_clamp``; ``rate`` equals
    ``max(pre_clamp, 0)``.
    """

    strategy: str
    rate: float
    params: dict = field(default_factory=dict)
    branch_values: dict = field(default_factory=dict)
    converged: bool = True
    note: str = ""
    half_width: float | None = None

    def to_dict(self) -> dict:
        d = {
            "strategy": self.strategy,
            "rate": self.rate,
            "params": self.params,
            "branch_values": self.branch_values,
            "converged": self.converged,
        }
        if self.note:
            d["note"] = self.note
        if self.half_width is not None:
            d["half_width"] = self.half_width
        return d


@dataclass(frozen=True)
class SearchSettings:
    resolution: int | tuple = 51
    levels: int = 3
    budget: int = DEFAULT_BUDGET
    window: float = 1.0


DF_SETTINGS = SearchSettings(201, 4)
AF_SETTINGS = SearchSettings(21, 3)
# 201 points on rho in [-1, 1] is a 0.01 step; 21 points on the power fraction
OUTER_SETTINGS = SearchSettings(201, 4)

AF_COEF_MAX = 4.0


def _plus(v: float) -> float:
    return v if v > 0.0 else 0.0


def wiretap_baseline(g: ChannelGains) -> StrategyResult:
    """Gaussian wiretap secrecy capacity with the relay silent."""
    main = gaussian_mi_scalar(abs(g.h_sd) ** 2 * g.p1)
    tap = gaussian_mi_scalar(abs(g.h_sw) ** 2 * g.p1)
    pre = main - tap
    return StrategyResult(
        "wiretap", _plus(pre), {"P": g.p1},
        {"main": main, "wiretap": tap, "pre_clamp": pre},
    )


def _search(objective, box, settings: SearchSettings) -> SearchReport:
    return grid_refine(
        objective, box, settings.levels, settings.resolution, settings.budget, settings.window
    )


def _df_branches(g: ChannelGains, c1: float, p: float) -> dict:
    # conditional Gaussian MIs, written as scalar SNRs
    eav = gaussian_mi_scalar(abs(g.h_sw * c1 + g.h_rw) ** 2 * g.p2 + abs(g.h_sw) ** 2 * p)
    relay = gaussian_mi_scalar(abs(g.h_sr) ** 2 * p)
    dest = gaussian_mi_scalar(abs(g.h_sd * c1 + g.h_rd) ** 2 * g.p2 + abs(g.h_sd) ** 2 * p)
    return {
        "relay_decoding": relay - eav,
        "destination": dest - eav,
        "i_x1_y1_given_x2": relay,
        "i_x_y": dest,
        "i_x_y2": eav,
    }


def df_rate(g: ChannelGains, settings: SearchSettings = DF_SETTINGS) -> StrategyResult:
    """DF with ``X1 = c1 X2 + X10``, maximized over ``(c1, P)``.

    ``c1`` is real and signed, ``P = Var(X10)``, and ``c1^2 P2 + P <= P1``.
    For a fixed ``c1`` the best ``P`` has a closed form (see
    :func:`kernels.df_profile`), so only ``c1`` is searched on the grid.
    """
    gains = g.as_tuple()
    c_max = math.sqrt(g.p1 / g.p2) if g.p2 > 0 else 0.0
    box = BoxSpec(("c1",), (-c_max,), (c_max,))
    rep = _search(lambda c: kernels.df_profile(c, gains, g.p1, g.p2)[0], box, settings)
    c1 = rep.best_point["c1"]
    p = float(kernels.df_profile([c1], gains, g.p1, g.p2)[1][0])
    br = _df_branches(g, c1, p)
    pre = min(br["relay_decoding"], br["destination"])
    br["pre_clamp"] = pre
    return StrategyResult("df", _plus(pre), {"c1": c1, "P": p}, br, rep.converged)


def nf_rate(g: ChannelGains) -> StrategyResult:
    """NF with independent full-power Gaussian inputs (no search)."""
    sd, sw = abs(g.h_sd) ** 2 * g.p1, abs(g.h_sw) ** 2 * g.p1
    rd, rw = abs(g.h_rd) ** 2 * g.p2, abs(g.h_rw) ** 2 * g.p2
    direct = 0.5 * math.log2(1.0 + sd)
    mac = 0.5 * math.log2((1.0 + sd + rd) / (1.0 + sw + rw))
    aided = 0.5 * math.log2((1.0 + rw) * (1.0 + sd) / (1.0 + sw + rw))
    pre = min(direct, mac, aided)
    return StrategyResult(
        "nf", _plus(pre), {"P1": g.p1, "P2": g.p2},
        {"direct": direct, "mac_difference": mac, "relay_noise": aided, "pre_clamp": pre},
    )


def cf_rate_awgn(g: ChannelGains) -> StrategyResult:
    """CF with maximal noise rate; identical to :func:`nf_rate` for secrecy."""
    r = nf_rate(g)
    return replace(
        r, strategy="cf",
        branch_values=dict(r.branch_values),
        params=dict(r.params, alias_of="nf"),
        note="perfect-secrecy CF rate equals the NF rate",
    )


@dataclass(frozen=True)
class AfMatrices:
    """Effective two-symbol channel of AF: ``Y = H1 X + Z``, ``Y2 = H2 X + Z2``."""

    H1: np.ndarray
    H2: np.ndarray
    A: np.ndarray
    B: np.ndarray


def af_matrices(g: ChannelGains, alpha: float, beta: float, gamma: float) -> AfMatrices:
    h1 = np.array(
        [[g.h_sd, 0.0], [beta * g.h_sd + gamma * g.h_sr * g.h_rd, alpha * g.h_sd]],
        dtype=complex,
    )
    h2 = np.array(
        [[g.h_sw, 0.0], [beta * g.h_sw + gamma * g.h_sr * g.h_rw, alpha * g.h_sw]],
        dtype=complex,
    )
    a = np.diag([1.0, 1.0 + abs(gamma * g.h_rd) ** 2]).astype(complex)
    b = np.diag([1.0, 1.0 + abs(gamma * g.h_rw) ** 2]).astype(complex)
    return AfMatrices(h1, h2, a, b)


def _af_branches(g: ChannelGains, alpha, beta, gamma, p) -> dict:
    m = af_matrices(g, alpha, beta, gamma)
    # 1/4 log2 det(.)/det(.) over two channel uses = half a log-det MI
    dest = 0.5 * gaussian_mi_logdet(CovariancePair(p * m.H1 @ m.H1.conj().T, m.A))
    eav = 0.5 * gaussian_mi_logdet(CovariancePair(p * m.H2 @ m.H2.conj().T, m.B))
    return {"destination": dest, "eavesdropper": eav}


def af_rate(
    g: ChannelGains,
    settings: SearchSettings = AF_SETTINGS,
    fixed: dict | None = None,
    coef_max: float = AF_COEF_MAX,
) -> StrategyResult:
    """Two-symbol AF, maximized over ``(alpha, beta, gamma_relay, P)``.

    ``alpha`` and the relay gain ``gamma_relay`` are nonnegative, ``beta``
    is signed; ``alpha`` and ``beta`` are bounded by ``coef_max``.
    Constraints: ``(1 + alpha^2 + beta^2) P <= 2 P1`` and
    ``gamma_relay^2 (|h_sr|^2 P + 1) <= 2 P2``.  Entries of ``fixed`` pin a
    parameter to a single value.
    """
    gains = g.as_tuple()
    bounds = {
        "alpha": (0.0, coef_max),
        "beta": (-coef_max, coef_max),
        "gamma_relay": (0.0, math.sqrt(2.0 * g.p2)),
        "P": (0.0, 2.0 * g.p1),
    }
    for name, value in (fixed or {}).items():
        if name not in bounds:
            raise ValidationError(f"unknown AF parameter {name!r}")
        bounds[name] = (float(value), float(value))
    sr2 = abs(g.h_sr) ** 2
    box = BoxSpec.from_bounds(
        bounds,
        (
            lambda a, b, c, p: (1 + a * a + b * b) * p <= 2 * g.p1 * (1 + 1e-12) + 1e-12,
            lambda a, b, c, p: c * c * (sr2 * p + 1) <= 2 * g.p2 * (1 + 1e-12) + 1e-12,
        ),
    )
    rep = _search(
        lambda a, b, c, p: kernels.af_values(a, b, c, p, gains, g.p1, g.p2), box, settings
    )
    pt = rep.best_point
    br = _af_branches(g, pt["alpha"], pt["beta"], pt["gamma_relay"], pt["P"])
    pre = br["destination"] - br["eavesdropper"]
    br["pre_clamp"] = pre
    return StrategyResult("af", _plus(pre), dict(pt), br, rep.converged)


def _outer_channel(g: ChannelGains) -> np.ndarray:
    # rows Y, Y1, Y2; columns V1, V2
    return np.array([[g.h_sd, g.h_rd], [g.h_sr, 0.0], [g.h_sw, g.h_rw]], dtype=complex)


def _output_mi(gm: np.ndarray, rows, k_cond: np.ndarray) -> float:
    sub = gm[list(rows)]
    return gaussian_mi_logdet(
        CovariancePair(sub @ k_cond @ sub.conj().T, np.eye(len(rows), dtype=complex))
    )


def outer_bound_terms(g: ChannelGains, rho: float, p1: float | None = None) -> dict:
    """Gaussian-input terms of the outer bound at correlation ``rho``.

    ``Y = h_sd V1 + h_rd V2 + Z``, ``Y1 = h_sr V1 + Z1``,
    ``Y2 = h_sw V1 + h_rw V2 + Z2`` with unit noises and
    ``Var(V1) = p1``, ``Var(V2) = P2``.  Conditioning acts on the input
    covariance, e.g. ``Var(V1 | V2) = p1 (1 - rho^2)``.
    """
    p1 = g.p1 if p1 is None else p1
    if abs(rho) > 1.0:
        log.debug("correlation %r outside [-1, 1], clamped", rho)
        rho = min(max(rho, -1.0), 1.0)
    k = rho * math.sqrt(p1 * g.p2)
    k_full = np.array([[p1, k], [k, g.p2]], dtype=complex)
    k_given_v2 = np.array([[p1 * (1.0 - rho * rho), 0.0], [0.0, 0.0]], dtype=complex)
    gm = _outer_channel(g)
    i_y = _output_mi(gm, [0], k_full)
    i_relay = _output_mi(gm, [0, 1], k_given_v2)
    i_w = _output_mi(gm, [2], k_full)
    r1 = min(i_y, i_relay)
    diff = i_y - i_w
    return {
        "r1_bound": r1,
        "i_v_y": i_y,
        "i_v1_yy1_given_v2": i_relay,
        "i_v_y2": i_w,
        "secrecy_difference": diff,
        "pre_clamp": min(r1, diff),
    }


def outer_bound_gaussian(
    g: ChannelGains,
    rho_step: float = 0.01,
    settings: SearchSettings = OUTER_SETTINGS,
    power_backoff: bool = True,
) -> StrategyResult:
    """Outer bound evaluated on correlated Gaussian inputs.

    Maximizes ``min(R1 bound, [I(V;Y) - I(V;Y2)]^+)`` over the input
    correlation.  The search runs on ``c = E[V1 V2] / P2``, i.e.
    ``V1 = c V2 + V10``, with ``2 / rho_step + 1`` grid points per level.
    With ``power_backoff`` the source may also use less than ``P1``; the
    best ``Var(V10)`` then has a closed form (:func:`kernels.bound_profile`)
    and the bound contains every DF operating point.  Without it the source
    always spends ``P1``.
    """
    if not 0 < rho_step <= 1:
        raise ValidationError(f"rho step must lie in (0, 1], got {rho_step!r}")
    gains = g.as_tuple()
    n = int(round(2.0 / rho_step)) + 1
    c_max = math.sqrt(g.p1 / g.p2) if g.p2 > 0 else 0.0
    box = BoxSpec(("c",), (-c_max,), (c_max,))
    if power_backoff:
        rep = _search(
            lambda c: kernels.bound_profile(c, gains, g.p1, g.p2)[0], box,
            SearchSettings(n, settings.levels, settings.budget, settings.window),
        )
        c = rep.best_point["c"]
        p = float(kernels.bound_profile([c], gains, g.p1, g.p2)[1][0])
    else:
        scale = math.sqrt(g.p2 / g.p1)
        rep = _search(
            lambda c: kernels.bound_values(c * scale, [1.0], gains, g.p1, g.p2)[:, 0], box,
            SearchSettings(n, settings.levels, settings.budget, settings.window),
        )
        c = rep.best_point["c"]
        p = max(g.p1 - c * c * g.p2, 0.0)
    used = c * c * g.p2 + p
    rho = c * math.sqrt(g.p2 / used) if used > 0 else 0.0
    br = outer_bound_terms(g, rho, used)
    return StrategyResult(
        "outer", _plus(br["pre_clamp"]), {"rho": rho, "P1_used": used}, br, rep.converged
    )


def deaf_nf_rate_awgn(g: ChannelGains) -> StrategyResult:
    """NF when the relay itself must learn nothing about the message."""
    nf = nf_rate(g)
    r_s1 = nf.branch_values["pre_clamp"]
    r_s2 = _plus(
        gaussian_mi_scalar(abs(g.h_sd) ** 2 * g.p1) - gaussian_mi_scalar(abs(g.h_sr) ** 2 * g.p1)
    )
    pre = min(r_s1, r_s2)
    return StrategyResult(
        "deaf_nf", _plus(pre), dict(nf.params),
        {"r_s1": r_s1, "r_s2": r_s2, "pre_clamp": pre},
    )


STRATEGIES = {
    "wiretap": wiretap_baseline,
    "df": df_rate,
    "nf": nf_rate,
    "cf": cf_rate_awgn,
    "af": af_rate,
    "deaf_nf": deaf_nf_rate_awgn,
    "outer": outer_bound_gaussian,
}


def evaluate(name: str, g: ChannelGains, settings: dict | None = None) -> StrategyResult:
    """Dispatch by strategy name; ``settings`` maps ``df``/``af``/``outer`` to
    :class:`SearchSettings`."""
    try:
        fn = STRATEGIES[name]
    except KeyError:
        raise ContractError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
    s = (settings or {}).get(name)
    if s is not None and name in ("df", "af", "outer"):
        return fn(g, settings=s)
    return fn(g)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SECRECY_RELAY_THREADS", "1")))
    except ValueError:
        return 1


def mc_phase_average(
    strategy: str,
    template: ChannelGains,
    n: int,
    seed: int,
    settings: SearchSettings | None = None,
    topology: Topology | None = None,
    phases: np.ndarray | None = None,
    threads: int | None = None,
) -> StrategyResult:
    """Average the per-draw optimized DF or AF rate over eavesdropper phases.

    Each draw replaces ``h_sw`` and ``h_rw`` by ``|h| e^{i theta}``;
    destination-side links keep phase zero.  ``phases`` (an ``(n, 2)``
    array) overrides sampling, which tests use to pin every phase to zero.
    Returns the sample mean with a 95% normal-approximation half-width.
    ``"outer"`` averages the Gaussian outer bound over the same draws, for
    comparison against the DF and AF means.
    """
    if strategy == "nf":
        raise ContractError(
            "NF is phase-invariant: its rate depends only on |h|, so averaging "
            "over phases is meaningless; use nf_rate directly"
        )
    if strategy not in ("df", "af", "outer"):
        raise ContractError(f"phase averaging is defined for df and af, not {strategy!r}")
    if topology is not None and topology.phase_model is not PhaseModel.UNIFORM_PHASE:
        raise ContractError("phase averaging needs a uniform-phase topology")
    if n < 2:
        raise ValidationError(f"need at least two draws, got {n}")
    if phases is None:
        phases = sample_phases(seed, n)
    phases = np.asarray(phases, float)
    if phases.shape != (n, 2):
        raise ValidationError(f"phases must have shape ({n}, 2), got {phases.shape}")

    fn = {"df": df_rate, "af": af_rate, "outer": outer_bound_gaussian}[strategy]
    settings = settings or {"df": DF_SETTINGS, "af": AF_SETTINGS, "outer": OUTER_SETTINGS}[strategy]
    mag_sw, mag_rw = abs(template.h_sw), abs(template.h_rw)

    def one(i: int) -> float:
        d = PhaseDraw(*phases[i])
        g = replace(
            template,
            h_sw=mag_sw * complex(math.cos(d.theta_sw), math.sin(d.theta_sw)),
            h_rw=mag_rw * complex(math.cos(d.theta_rw), math.sin(d.theta_rw)),
        )
        return fn(g, settings=settings).rate

    threads = default_threads() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rates = np.fromiter(pool.map(one, range(n)), float, n)
    else:
        rates = np.fromiter((one(i) for i in range(n)), float, n)
    mean = float(np.mean(rates))
    std = float(np.std(rates, ddof=1))
    hw = Z95 * std / math.sqrt(n)
    return StrategyResult(
        strategy, mean, {"draws": n, "seed": int(seed)},
        {"mean": mean, "std": std, "pre_clamp": mean},
        half_width=hw,
    )

"""Secrecy rate regions of finite-alphabet relay-eavesdropper channels.

Every evaluator builds the full joint pmf of auxiliaries, inputs and
outputs as a :class:`~secrecy_relay.info.JointPmf` and reads the rate terms
off it, so each term is an exact mutual information of the design.

Axis names used throughout: ``u``, ``v1``, ``v2`` (auxiliaries), ``x1``,
``x2`` (source and relay inputs), ``y``, ``y1``, ``y2`` (destination, relay
and eavesdropper outputs) and ``yq`` (the compressed relay observation of
CF).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import RelayDmc, is_reversely_degraded
from .errors import BudgetExceededError, ContractError, ValidationError
from .info import NORM_TOL, JointPmf, conditional_mi, mutual_information
from .optimize import DEFAULT_BUDGET, simplex_array, simplex_count

__all__ = [
    "InputDesign",
    "CfDesign",
    "RegionPoint",
    "joint_distribution",
    "outer_bound_point",
    "df_point",
    "nf_point",
    "cf_point",
    "cf_max_r0",
    "deaf_nf_point",
    "reversely_degraded_rate",
    "best_over_grid",
    "GRID_STRATEGIES",
]

FEAS_TOL = 1e-12
CHANNEL_AXES = ("x1", "x2", "y", "y1", "y2")


def _pmf(p, label: str) -> np.ndarray:
    a = np.array(p, dtype=float)
    if a.size == 0 or not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValidationError(f"{label} must be a non-empty nonnegative pmf")
    if abs(a.sum() - 1.0) > NORM_TOL:
        raise ValidationError(f"{label} sums to {a.sum()!r}, not 1")
    a = a / a.sum()
    a.setflags(write=False)
    return a


def _kernel(k, label: str, n_given: int) -> np.ndarray:
    # conditional pmf whose first n_given axes are the conditioning variables
    a = np.array(k, dtype=float)
    if a.ndim < n_given + 1 or not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValidationError(f"{label} must be a nonnegative conditional pmf")
    sums = a.sum(axis=tuple(range(n_given, a.ndim)))
    if np.max(np.abs(sums - 1.0)) > NORM_TOL:
        raise ValidationError(f"{label} has a row summing to {sums.ravel()[np.argmax(np.abs(sums - 1.0))]!r}")
    a = a / sums.reshape(sums.shape + (1,) * (a.ndim - n_given))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class InputDesign:
    """Distribution of the auxiliaries and the prefix channel to the inputs.

    Give either ``pv1`` and ``pv2`` (independent auxiliaries) or ``joint_pv``
    (an array over ``(v1, v2)``).  ``prefix`` is ``None`` for the identity
    ``V = X``, a pair ``(p(x1|v1), p(x2|v2))``, or a 4-axis array
    ``p(x1, x2 | v1, v2)``.  ``joint_uv`` adds the time-sharing variable of
    the outer bound as an array over ``(u, v1, v2)`` and then replaces the
    other two fields.
    """

    pv1: np.ndarray | None = None
    pv2: np.ndarray | None = None
    joint_pv: np.ndarray | None = None
    prefix: object = None
    joint_uv: np.ndarray | None = None

    def __post_init__(self):
        product = self.pv1 is not None or self.pv2 is not None
        sources = sum((product, self.joint_pv is not None, self.joint_uv is not None))
        if sources != 1:
            raise ValidationError(
                "give exactly one of (pv1, pv2), joint_pv or joint_uv"
            )
        if product:
            if self.pv1 is None or self.pv2 is None:
                raise ValidationError("product design needs both pv1 and pv2")
            object.__setattr__(self, "pv1", _pmf(self.pv1, "pv1"))
            object.__setattr__(self, "pv2", _pmf(self.pv2, "pv2"))
        if self.joint_pv is not None:
            j = _pmf(self.joint_pv, "joint_pv")
            if j.ndim != 2:
                raise ValidationError("joint_pv must be a (v1, v2) matrix")
            object.__setattr__(self, "joint_pv", j)
        if self.joint_uv is not None:
            j = _pmf(self.joint_uv, "joint_uv")
            if j.ndim != 3:
                raise ValidationError("joint_uv must have axes (u, v1, v2)")
            object.__setattr__(self, "joint_uv", j)
        pre = self.prefix
        if pre is not None:
            if isinstance(pre, (tuple, list)) and len(pre) == 2:
                pre = (_kernel(pre[0], "p(x1|v1)", 1), _kernel(pre[1], "p(x2|v2)", 1))
                if pre[0].ndim != 2 or pre[1].ndim != 2:
                    raise ValidationError("factor prefixes must be matrices")
            else:
                pre = _kernel(pre, "p(x1,x2|v1,v2)", 2)
                if pre.ndim != 4:
                    raise ValidationError("joint prefix needs axes (v1, v2, x1, x2)")
            object.__setattr__(self, "prefix", pre)
        v1, v2 = self.v_sizes
        if isinstance(self.prefix, tuple):
            if self.prefix[0].shape[0] != v1 or self.prefix[1].shape[0] != v2:
                raise ValidationError("prefix rows do not match the auxiliary alphabets")
        elif self.prefix is not None and self.prefix.shape[:2] != (v1, v2):
            raise ValidationError("prefix rows do not match the auxiliary alphabets")

    @classmethod
    def product(cls, pv1, pv2, prefix=None) -> "InputDesign":
        return cls(pv1=pv1, pv2=pv2, prefix=prefix)

    @classmethod
    def joint(cls, pv, prefix=None) -> "InputDesign":
        return cls(joint_pv=pv, prefix=prefix)

    @property
    def is_product(self) -> bool:
        return self.pv1 is not None

    @property
    def v_sizes(self) -> tuple:
        if self.is_product:
            return (self.pv1.size, self.pv2.size)
        if self.joint_pv is not None:
            return self.joint_pv.shape
        return self.joint_uv.shape[1:]

    def v_joint(self) -> np.ndarray:
        """``p(v1, v2)``."""
        if self.is_product:
            return np.outer(self.pv1, self.pv2)
        if self.joint_pv is not None:
            return np.asarray(self.joint_pv)
        return self.joint_uv.sum(axis=0)

    def prefix_tensor(self, x_sizes: tuple) -> np.ndarray:
        """``p(x1, x2 | v1, v2)`` as a 4-axis array."""
        v1, v2 = self.v_sizes
        if self.prefix is None:
            if (v1, v2) != tuple(x_sizes):
                raise ValidationError(
                    f"identity prefix needs |V1|,|V2| = {tuple(x_sizes)}, got {(v1, v2)}"
                )
            return np.einsum("ac,bd->abcd", np.eye(v1), np.eye(v2))
        if isinstance(self.prefix, tuple):
            p1, p2 = self.prefix
            t = np.einsum("ac,bd->abcd", p1, p2)
        else:
            t = self.prefix
        if t.shape[2:] != tuple(x_sizes):
            raise ValidationError(
                f"prefix outputs have sizes {t.shape[2:]}, channel inputs {tuple(x_sizes)}"
            )
        return t

    def has_factored_prefix(self) -> bool:
        if self.prefix is None or isinstance(self.prefix, tuple):
            return True
        t = self.prefix
        # p(x1,x2|v1,v2) = p(x1|v1) p(x2|v2) iff it factors for every (v1, v2)
        m1 = t.sum(axis=3)
        m2 = t.sum(axis=2)
        if not np.allclose(t, m1[..., :, None] * m2[..., None, :], atol=1e-12, rtol=0):
            return False
        return bool(
            np.allclose(m1, m1[:, :1], atol=1e-12, rtol=0)
            and np.allclose(m2, m2[:1], atol=1e-12, rtol=0)
        )

    def with_constant_u(self) -> "InputDesign":
        return InputDesign(joint_uv=self.v_joint()[None], prefix=self.prefix)

    def to_dict(self) -> dict:
        d = {}
        if self.is_product:
            d["pv1"] = self.pv1.tolist()
            d["pv2"] = self.pv2.tolist()
        elif self.joint_pv is not None:
            d["joint_pv"] = self.joint_pv.tolist()
        else:
            d["joint_uv"] = self.joint_uv.tolist()
        if isinstance(self.prefix, tuple):
            d["prefix"] = [p.tolist() for p in self.prefix]
        elif self.prefix is not None:
            d["prefix"] = self.prefix.tolist()
        return d


@dataclass(frozen=True)
class CfDesign:
    """Independent inputs, a quantizer ``p(yq | y1, x2)`` and a noise rate.

    ``quantizer`` has axes ``(y1, x2, yq)``.
    """

    px1: np.ndarray
    px2: np.ndarray
    quantizer: np.ndarray
    r0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "px1", _pmf(self.px1, "px1"))
        object.__setattr__(self, "px2", _pmf(self.px2, "px2"))
        q = np.asarray(self.quantizer, dtype=float)
        if q.ndim != 3 or q.shape[2] == 0:
            raise ValidationError("quantizer needs axes (y1, x2, yq) with |yq| >= 1")
        object.__setattr__(self, "quantizer", _kernel(q, "quantizer", 2))
        r0 = float(self.r0)
        if not math.isfinite(r0) or r0 < 0:
            raise ValidationError(f"r0 must be finite and >= 0, got {self.r0!r}")
        object.__setattr__(self, "r0", r0)

    def to_dict(self) -> dict:
        return {
            "px1": self.px1.tolist(),
            "px2": self.px2.tolist(),
            "quantizer": self.quantizer.tolist(),
            "r0": self.r0,
        }


@dataclass
class RegionPoint:
    """Corner of a rate-equivocation region.

    ``applicable`` is false for CF designs outside the regime in which the
    CF theorem is stated; such points carry no rate (both maxima are zero)
    and the formula values are kept in ``terms``.
    """

    r1_max: float
    re_max: float
    feasible: bool = True
    terms: dict = field(default_factory=dict)
    applicable: bool = True

    def to_dict(self) -> dict:
        return {
            "r1_max": self.r1_max,
            "re_max": self.re_max,
            "feasible": self.feasible,
            "applicable": self.applicable,
            "terms": dict(self.terms),
        }


def _plus(v: float) -> float:
    return v if v > 0.0 else 0.0


def joint_distribution(c: RelayDmc, d: InputDesign) -> JointPmf:
    """Joint pmf over ``([u,] v1, v2, x1, x2, y, y1, y2)``."""
    t = c.transition
    pre = d.prefix_tensor(t.shape[:2])
    if d.joint_uv is not None:
        probs = np.einsum("uab,abcd,cdefg->uabcdefg", d.joint_uv, pre, t)
        return JointPmf(probs, ("u", "v1", "v2") + CHANNEL_AXES)
    probs = np.einsum("ab,abcd,cdefg->abcdefg", d.v_joint(), pre, t)
    return JointPmf(probs, ("v1", "v2") + CHANNEL_AXES)


def outer_bound_point(c: RelayDmc, d: InputDesign) -> RegionPoint:
    """Outer bound on ``(R1, Re)`` for one design; needs the ``u`` axis."""
    if d.joint_uv is None:
        raise ContractError(
            "the outer bound needs a design over (u, v1, v2); "
            "use InputDesign(joint_uv=...) or design.with_constant_u()"
        )
    p = joint_distribution(c, d)
    i_y = mutual_information(p, ("v1", "v2"), "y")
    i_relay = conditional_mi(p, "v1", ("y", "y1"), "v2")
    i_y_u = conditional_mi(p, ("v1", "v2"), "y", "u")
    i_w_u = conditional_mi(p, ("v1", "v2"), "y2", "u")
    r1 = min(i_y, i_relay)
    diff = i_y_u - i_w_u
    return RegionPoint(
        r1, min(r1, _plus(diff)),
        terms={
            "i_v_y": i_y,
            "i_v1_yy1_given_v2": i_relay,
            "i_v_y_given_u": i_y_u,
            "i_v_y2_given_u": i_w_u,
            "secrecy_difference": diff,
        },
    )


def df_point(c: RelayDmc, d: InputDesign) -> RegionPoint:
    """Decode-and-forward corner for one design."""
    p = joint_distribution(c, d)
    i_y = mutual_information(p, ("v1", "v2"), "y")
    i_relay = conditional_mi(p, "v1", "y1", "v2")
    i_w = mutual_information(p, ("v1", "v2"), "y2")
    r1 = min(i_y, i_relay)
    return RegionPoint(
        r1, min(r1, _plus(r1 - i_w)),
        terms={"i_v_y": i_y, "i_v1_y1_given_v2": i_relay, "i_v_y2": i_w, "pre_clamp": r1 - i_w},
    )


def _require_product(d: InputDesign, who: str) -> None:
    if not d.is_product:
        raise ContractError(f"{who} needs independent auxiliaries p(v1)p(v2)")
    if not d.has_factored_prefix():
        raise ContractError(f"{who} needs a prefix of the form p(x1|v1)p(x2|v2)")


def _nf_terms(p: JointPmf) -> dict:
    i1 = conditional_mi(p, "v1", "y", "v2")
    i2_y = mutual_information(p, "v2", "y")
    i2_w_1 = conditional_mi(p, "v2", "y2", "v1")
    i2_w = mutual_information(p, "v2", "y2")
    i1_w_2 = conditional_mi(p, "v1", "y2", "v2")
    pre = i1 + min(i2_y, i2_w_1) - min(i2_y, i2_w) - i1_w_2
    return {
        "i_v1_y_given_v2": i1,
        "i_v2_y": i2_y,
        "i_v2_y2_given_v1": i2_w_1,
        "i_v2_y2": i2_w,
        "i_v1_y2_given_v2": i1_w_2,
        "pre_clamp": pre,
    }


def nf_point(c: RelayDmc, d: InputDesign) -> RegionPoint:
    """Noise-forwarding corner for a product design."""
    _require_product(d, "NF")
    terms = _nf_terms(joint_distribution(c, d))
    r1 = terms["i_v1_y_given_v2"]
    return RegionPoint(r1, min(r1, _plus(terms["pre_clamp"])), terms=terms)


def deaf_nf_point(c: RelayDmc, d: InputDesign) -> RegionPoint:
    """NF when the relay must also be kept ignorant of the message."""
    _require_product(d, "deaf-helper NF")
    p = joint_distribution(c, d)
    terms = _nf_terms(p)
    r1 = terms["i_v1_y_given_v2"]
    r_s1 = min(r1, _plus(terms["pre_clamp"]))
    leak = conditional_mi(p, "v1", "y1", "x2")
    r_s2 = _plus(r1 - leak)
    terms.update({"i_v1_y1_given_x2": leak, "r_s1": r_s1, "r_s2": r_s2})
    return RegionPoint(r1, min(r_s1, r_s2), terms=terms)


def reversely_degraded_rate(c: RelayDmc, d: InputDesign, tol: float = 1e-9) -> RegionPoint:
    """NF rate of a reversely degraded channel (warns if ``c`` is not one)."""
    check = is_reversely_degraded(c, tol)
    if not check.degraded:
        warnings.warn(
            f"channel is not reversely degraded (violation {check.violation:.3e})",
            stacklevel=2,
        )
    r = nf_point(c, d)
    r.terms["degradedness_violation"] = check.violation
    return r


def _cf_joint(c: RelayDmc, d: CfDesign) -> JointPmf:
    t = c.transition
    if d.px1.size != t.shape[0] or d.px2.size != t.shape[1]:
        raise ValidationError("input pmfs do not match the channel input alphabets")
    if d.quantizer.shape[:2] != (t.shape[3], t.shape[1]):
        raise ValidationError(
            f"quantizer rows must be indexed by (y1, x2) = {(t.shape[3], t.shape[1])}"
        )
    probs = np.einsum("a,b,abefg,fbh->abefgh", d.px1, d.px2, t, d.quantizer)
    return JointPmf(probs, CHANNEL_AXES + ("yq",))


def _cf_terms(p: JointPmf) -> dict:
    return {
        "i_x1_yqy_given_x2": conditional_mi(p, "x1", ("yq", "y"), "x2"),
        "i_x1_yqy2_given_x2": conditional_mi(p, "x1", ("yq", "y2"), "x2"),
        "relay_link": min(
            mutual_information(p, "x2", "y"), conditional_mi(p, "x2", "y2", "x1")
        ),
        "quantizer_rate": conditional_mi(p, "y1", "yq", "x2"),
        "i_x_y2": mutual_information(p, ("x1", "x2"), "y2"),
    }


def cf_max_r0(c: RelayDmc, d: CfDesign) -> float:
    """Largest noise rate for which the CF design stays feasible (>= 0)."""
    t = _cf_terms(_cf_joint(c, d))
    return max(t["relay_link"] - t["quantizer_rate"], 0.0)


def _cf_region(terms: dict, r0: float) -> RegionPoint:
    terms = dict(terms)
    i_main = terms["i_x1_yqy_given_x2"]
    pre = r0 + i_main - terms["i_x_y2"]
    terms.update({"r0": r0, "pre_clamp": pre})
    feasible = terms["relay_link"] - r0 >= terms["quantizer_rate"] - FEAS_TOL
    applicable = i_main <= terms["i_x1_yqy2_given_x2"] + FEAS_TOL
    if not (feasible and applicable):
        terms["re_formula"] = min(i_main, _plus(pre))
        return RegionPoint(0.0, 0.0, feasible, terms, applicable)
    return RegionPoint(i_main, min(i_main, _plus(pre)), True, terms, True)


def cf_point(c: RelayDmc, d: CfDesign) -> RegionPoint:
    """Compress-and-forward corner.

    The rate is only claimed when
    ``I(X1; Yq, Y | X2) <= I(X1; Yq, Y2 | X2)``; otherwise the point is
    flagged with ``applicable = False``.  Designs violating the relay-link
    constraint come back with ``feasible = False``.
    """
    return _cf_region(_cf_terms(_cf_joint(c, d)), d.r0)


# --- grid search -------------------------------------------------------------

GRID_STRATEGIES = ("outer", "df", "nf", "cf", "deaf_nf", "reversely_degraded")

_PRODUCT_EVAL = {
    "nf": nf_point,
    "deaf_nf": deaf_nf_point,
    "reversely_degraded": lambda c, d: reversely_degraded_rate(c, d),
}


def _design_space(c: RelayDmc, strategy: str, k: int, budget: int, yq: int | None):
    """Return ``(count, factory)`` where ``factory(i)`` builds design ``i``."""
    n1, n2, _, n_y1, _ = c.transition.shape
    if strategy in ("df", "outer"):
        grid = simplex_array(n1 * n2, k, budget)
        if strategy == "df":
            return len(grid), lambda i: InputDesign.joint(grid[i].reshape(n1, n2))
        return len(grid), lambda i: InputDesign(joint_uv=grid[i].reshape(1, n1, n2))

    dims = [(n1, 1), (n2, 1)]
    if strategy == "cf":
        yq = n_y1 if yq is None else int(yq)
        if yq < 1:
            raise ValidationError("quantizer alphabet must have at least one symbol")
        dims.append((yq, n_y1 * n2))
    total = 1
    for dim, reps in dims:
        total *= simplex_count(dim, k) ** reps
    if total > budget:
        parts = " x ".join(
            f"{reps} simplex(es) of dimension {dim}" for dim, reps in dims
        )
        raise BudgetExceededError(
            f"{strategy} grid at k={k} has {total} designs ({parts}); budget is {budget}"
        )
    g1 = simplex_array(n1, k, budget)
    g2 = simplex_array(n2, k, budget)
    if strategy != "cf":
        return total, lambda i: InputDesign.product(g1[i // len(g2)], g2[i % len(g2)])
    gq = simplex_array(yq, k, budget)
    rows = n_y1 * n2
    n_q = len(gq) ** rows

    def cf_design(i: int) -> CfDesign:
        i_in, i_q = divmod(i, n_q)
        digits = np.unravel_index(i_q, (len(gq),) * rows) if rows else ()
        quant = gq[list(digits)].reshape(n_y1, n2, yq)
        return CfDesign(g1[i_in // len(g2)], g2[i_in % len(g2)], quant)

    return total, cf_design


def _evaluate(c: RelayDmc, strategy: str, design):
    if strategy == "df":
        return df_point(c, design), design
    if strategy == "outer":
        return outer_bound_point(c, design), design
    if strategy == "cf":
        terms = _cf_terms(_cf_joint(c, design))
        r0 = max(terms["relay_link"] - terms["quantizer_rate"], 0.0)
        d = CfDesign(design.px1, design.px2, design.quantizer, r0)
        return _cf_region(terms, r0), d
    return _PRODUCT_EVAL[strategy](c, design), design


def best_over_grid(
    c: RelayDmc,
    strategy: str,
    k: int,
    budget: int = DEFAULT_BUDGET,
    yq_size: int | None = None,
    threads: int = 1,
):
    """Maximize ``re_max`` over type-``k`` input distributions.

    DF and the outer bound search joint pmfs ``p(x1, x2)`` (the outer bound
    with a constant ``u``); NF, deaf-helper NF and the reversely degraded
    rate search products ``p(x1) p(x2)``; CF also enumerates every
    quantizer row and sets ``r0`` to its largest feasible value.  All use
    the identity prefix.  Designs that are infeasible or, for CF, outside
    the theorem's regime are skipped.  Ties keep the first design in
    enumeration order.

    Returns ``(RegionPoint, design)``; ``design`` is ``None`` when no design
    qualifies, in which case the point is zero and marked infeasible.
    """
    if strategy not in GRID_STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}; choose from {GRID_STRATEGIES}")
    if int(k) < 1:
        raise ValidationError(f"grid denominator must be >= 1, got {k}")
    total, factory = _design_space(c, strategy, int(k), budget, yq_size)

    def scan(chunk: range):
        best = None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for i in chunk:
                point, design = _evaluate(c, strategy, factory(i))
                if not (point.feasible and point.applicable):
                    continue
                if best is None or point.re_max > best[0].re_max:
                    best = (point, design)
        return best

    size = max(1, -(-total // max(1, threads * 4)))
    chunks = [range(s, min(s + size, total)) for s in range(0, total, size)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            partial = list(pool.map(scan, chunks))
    else:
        partial = [scan(ch) for ch in chunks]
    best = None
    for cand in partial:  # index order keeps the first-wins tie-break
        if cand is not None and (best is None or cand[0].re_max > best[0].re_max):
            best = cand
    if best is None:
        return RegionPoint(0.0, 0.0, feasible=False), None
    return best

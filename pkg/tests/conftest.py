"""Shared oracles and fixtures.

The oracles here avoid the package's own code paths on purpose: mutual
informations are summed term by term over explicit index loops, and
Gaussian rates are written out as scalar SNR formulas.
"""

import itertools
import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from secrecy_relay.channels import ChannelGains, RelayDmc

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

AXES = ("x1", "x2", "y", "y1", "y2")


def oracle_cmi(probs, names, a, b, c=()):
    """I(A;B|C) = sum p(a,b,c) log p(a,b,c) p(c) / (p(a,c) p(b,c))."""
    probs = np.asarray(probs, dtype=float)
    names = list(names)
    a, b, c = [[a] if isinstance(a, str) else list(a) for a in (a, b, c)]
    ia, ib, ic = ([names.index(n) for n in g] for g in (a, b, c))
    p_abc, p_ac, p_bc, p_c = {}, {}, {}, {}
    for idx in itertools.product(*(range(s) for s in probs.shape)):
        p = float(probs[idx])
        ka, kb, kc = (tuple(idx[i] for i in g) for g in (ia, ib, ic))
        p_abc[ka, kb, kc] = p_abc.get((ka, kb, kc), 0.0) + p
        p_ac[ka, kc] = p_ac.get((ka, kc), 0.0) + p
        p_bc[kb, kc] = p_bc.get((kb, kc), 0.0) + p
        p_c[kc] = p_c.get(kc, 0.0) + p
    total = 0.0
    for (ka, kb, kc), p in p_abc.items():
        if p > 0:
            total += p * math.log2(p * p_c[kc] / (p_ac[ka, kc] * p_bc[kb, kc]))
    return total


def loop_joint(c, pv, p1, p2):
    """p(v1,v2,x1,x2,y,y1,y2) built entry by entry; p1 = p(x1|v1), p2 = p(x2|v2)."""
    t = c.transition
    shape = pv.shape + t.shape
    out = np.zeros(shape)
    for idx in itertools.product(*(range(s) for s in shape)):
        a, b, x1, x2 = idx[:4]
        out[idx] = pv[a, b] * p1[a, x1] * p2[b, x2] * t[(x1, x2) + idx[4:]]
    return out


def cf_loop_joint(c, px1, px2, q):
    t = c.transition
    shape = t.shape + (q.shape[2],)
    out = np.zeros(shape)
    for x1, x2, y, y1, y2, h in itertools.product(*(range(s) for s in shape)):
        out[x1, x2, y, y1, y2, h] = px1[x1] * px2[x2] * t[x1, x2, y, y1, y2] * q[y1, x2, h]
    return out


def random_dmc(rng, sizes=(2, 2, 2, 2, 2), sparsity=0.0):
    """Random transition tensor; ``sparsity`` zeroes a share of entries."""
    t = rng.random(sizes)
    if sparsity:
        t = np.where(rng.random(sizes) < sparsity, 0.0, t)
        t[..., 0, 0, 0] += 1e-3  # keep every slice nonempty
    t /= t.sum(axis=(2, 3, 4), keepdims=True)
    return RelayDmc(t)


def random_pmf(rng, n):
    return rng.dirichlet(np.ones(n))


def random_gains(rng, lo=0.05, hi=3.0, complex_phase=True):
    mag = rng.uniform(lo, hi, 5)
    ph = rng.uniform(0, 2 * np.pi, 5) if complex_phase else np.zeros(5)
    return ChannelGains(*(mag * np.exp(1j * ph)), *rng.uniform(0.1, 10.0, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance report ------------------------------------------------------

ACCEPTANCE = {}


def record_acceptance(number, ok, detail):
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

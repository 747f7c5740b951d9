"""Pure-numpy grid kernels for the AWGN objectives.

Each kernel evaluates a pre-clamp secrecy objective on the Cartesian
product of its coordinate arrays and returns ``nan`` where the power
constraints fail.  ``gains`` is ``(h_sd, h_sw, h_sr, h_rd, h_rw)``.
"""

import numpy as np

FEAS_TOL = 1e-12


def split_to_df(u, f, p1, p2):
    """Map a power split to DF parameters.

    ``|u|`` is the share of ``P1`` spent on the cooperative part and its
    sign is the sign of ``c1``; ``f`` is the fraction of the rest used by
    the fresh component.  Returns ``(c1, P)``.
    """
    u = np.asarray(u, float)
    c = np.sign(u) * np.sqrt(np.abs(u) * p1 / p2) if p2 > 0 else np.zeros_like(u)
    return c, np.asarray(f, float) * (1.0 - np.abs(u)) * p1


def df_values(c, p, gains, p1, p2, split=False):
    """DF objective over ``c x p`` (coefficient of the relay signal in the
    source input, power of the fresh source component).

    With ``split`` the axes are ``(u, f)`` as in :func:`split_to_df`.
    """
    h_sd, h_sw, h_sr, h_rd, h_rw = gains
    c = np.asarray(c, float)[:, None]
    p = np.asarray(p, float)[None, :]
    if split:
        c, p = split_to_df(c, p, p1, p2)
    den = 1.0 + np.abs(h_sw * c + h_rw) ** 2 * p2 + abs(h_sw) ** 2 * p
    relay = 0.5 * np.log2((1.0 + abs(h_sr) ** 2 * p) / den)
    dest = 0.5 * np.log2((1.0 + np.abs(h_sd * c + h_rd) ** 2 * p2 + abs(h_sd) ** 2 * p) / den)
    v = np.minimum(relay, dest)
    ok = c * c * p2 + p <= p1 * (1.0 + FEAS_TOL) + FEAS_TOL
    return np.where(ok, v, np.nan)


def df_profile(c, gains, p1, p2):
    """Best DF objective over ``P`` for each ``c`` (exact).

    For fixed ``c`` both branches share the denominator
    ``D(P) = 1 + |h_sw c + h_rw|^2 P2 + |h_sw|^2 P`` and the numerators are
    affine in ``P``, so ``min(n1, n2) / D`` is maximized at ``P = 0``, at
    ``P = P1 - c^2 P2`` or where ``n1 = n2``.  Returns ``(values, P)``.
    """
    h_sd, h_sw, h_sr, h_rd, h_rw = gains
    c = np.asarray(c, float)
    pmax = p1 - c * c * p2
    feasible = pmax >= -FEAS_TOL * (1.0 + p1)
    pmax = np.maximum(pmax, 0.0)
    a, d, w = abs(h_sr) ** 2, abs(h_sd) ** 2, abs(h_sw) ** 2
    b = 1.0 + np.abs(h_sd * c + h_rd) ** 2 * p2
    den0 = 1.0 + np.abs(h_sw * c + h_rw) ** 2 * p2
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(a != d, (b - 1.0) / (a - d), -1.0)
    cross = np.where((cross > 0.0) & (cross < pmax), cross, 0.0)

    def ratio(p):
        return np.minimum(1.0 + a * p, b + d * p) / (den0 + w * p)

    best_p = np.zeros_like(c)
    best = ratio(best_p)
    for cand in (cross, pmax):
        r = ratio(cand)
        better = r > best
        best = np.where(better, r, best)
        best_p = np.where(better, cand, best_p)
    return np.where(feasible, 0.5 * np.log2(best), np.nan), best_p


def _af_det(h_s, h_r, h_sr, alpha, beta, gamma, p):
    # det(P H H^H + diag(1, 1 + |gamma h_r|^2)) for H = [[h_s, 0], [b, a]]
    # with b = beta h_s + gamma h_sr h_r, a = alpha h_s
    noise2 = 1.0 + gamma * gamma * abs(h_r) ** 2
    b2 = np.abs(beta * h_s + gamma * h_sr * h_r) ** 2
    a2 = alpha * alpha * abs(h_s) ** 2
    s2 = abs(h_s) ** 2
    det = (p * s2 + 1.0) * (p * (b2 + a2) + noise2) - p * p * s2 * b2
    return det, noise2


def af_values(alpha, beta, gamma, p, gains, p1, p2):
    """Two-symbol AF objective over ``alpha x beta x gamma x p``."""
    h_sd, h_sw, h_sr, h_rd, h_rw = gains
    a = np.asarray(alpha, float)[:, None, None, None]
    b = np.asarray(beta, float)[None, :, None, None]
    g = np.asarray(gamma, float)[None, None, :, None]
    q = np.asarray(p, float)[None, None, None, :]
    det1, det_a = _af_det(h_sd, h_rd, h_sr, a, b, g, q)
    det2, det_b = _af_det(h_sw, h_rw, h_sr, a, b, g, q)
    v = 0.25 * np.log2((det1 * det_b) / (det2 * det_a))
    ok = ((1.0 + a * a + b * b) * q <= 2.0 * p1 * (1.0 + FEAS_TOL) + FEAS_TOL) & (
        g * g * (abs(h_sr) ** 2 * q + 1.0) <= 2.0 * p2 * (1.0 + FEAS_TOL) + FEAS_TOL
    )
    return np.where(ok, v, np.nan)


def bound_values(rho, s, gains, p1, p2):
    """Gaussian outer-bound objective over ``rho x s``.

    ``rho`` is the input correlation and ``s`` the fraction of ``p1`` the
    source spends.  Returns ``min(R1 bound, I(V;Y) - I(V;Y2))``.
    """
    h_sd, h_sw, h_sr, h_rd, h_rw = gains
    r = np.clip(np.asarray(rho, float), -1.0, 1.0)[:, None]
    q = np.asarray(s, float)[None, :] * p1
    k = r * np.sqrt(q * p2)
    snr_y = abs(h_sd) ** 2 * q + abs(h_rd) ** 2 * p2 + 2.0 * (h_sd * np.conj(h_rd)).real * k
    snr_w = abs(h_sw) ** 2 * q + abs(h_rw) ** 2 * p2 + 2.0 * (h_sw * np.conj(h_rw)).real * k
    i_y = 0.5 * np.log2(1.0 + np.maximum(snr_y, 0.0))
    i_w = 0.5 * np.log2(1.0 + np.maximum(snr_w, 0.0))
    i_relay = 0.5 * np.log2(1.0 + (abs(h_sd) ** 2 + abs(h_sr) ** 2) * q * (1.0 - r * r))
    return np.minimum(np.minimum(i_y, i_relay), i_y - i_w)


def bound_profile(c, gains, p1, p2):
    """Best outer-bound objective over ``P`` for each ``c`` (exact).

    Same coordinates as :func:`df_profile`: ``X1 = c X2 + X10`` with
    ``P = Var(X10)``.  ``I(V;Y) - I(V;Y2)`` is a ratio of affine functions
    of ``P`` and the relay term is increasing, so the optimum is at an
    endpoint or at a root of the quadratic where the two meet.
    Returns ``(values, P)``.
    """
    h_sd, h_sw, h_sr, h_rd, h_rw = gains
    c = np.asarray(c, float)
    pmax = p1 - c * c * p2
    feasible = pmax >= -FEAS_TOL * (1.0 + p1)
    pmax = np.maximum(pmax, 0.0)
    d, w = abs(h_sd) ** 2, abs(h_sw) ** 2
    e = d + abs(h_sr) ** 2
    b = 1.0 + np.abs(h_sd * c + h_rd) ** 2 * p2
    den0 = 1.0 + np.abs(h_sw * c + h_rw) ** 2 * p2

    def value(p):
        i_y = np.log2(b + d * p)
        return 0.5 * np.minimum(np.minimum(i_y, np.log2(1.0 + e * p)), i_y - np.log2(den0 + w * p))

    # (1 + e P)(den0 + w P) = b + d P
    qa, qb, qc = e * w, e * den0 + w - d, den0 - b
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.sqrt(np.maximum(qb * qb - 4.0 * qa * qc, 0.0))
        if qa > 0:
            roots = ((-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa))
        else:
            roots = (np.where(qb != 0, -qc / qb, -1.0),)
    best_p = np.zeros_like(c)
    best = value(best_p)
    for cand in roots + (pmax,):
        cand = np.where((cand > 0.0) & (cand <= pmax), cand, 0.0)
        v = value(cand)
        better = v > best
        best = np.where(better, v, best)
        best_p = np.where(better, cand, best_p)
    return np.where(feasible, best, np.nan), best_p

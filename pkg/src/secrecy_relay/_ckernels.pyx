# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid kernels; same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2, fabs, sqrt, NAN

cnp.import_array()

cdef double FEAS_TOL = 1e-12


cdef inline double _abs2(double re, double im) nogil:
    return re * re + im * im


def df_values(double[::1] c, double[::1] p, gains, double p1, double p2,
              bint split=False):
    cdef complex h_sd, h_sw, h_sr, h_rd, h_rw
    h_sd, h_sw, h_sr, h_rd, h_rw = map(complex, gains)
    cdef Py_ssize_t nc = c.shape[0], npw = p.shape[0], i, j
    out_arr = np.empty((nc, npw), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double sd2 = _abs2(h_sd.real, h_sd.imag)
    cdef double sw2 = _abs2(h_sw.real, h_sw.imag)
    cdef double sr2 = _abs2(h_sr.real, h_sr.imag)
    cdef double limit = p1 * (1.0 + FEAS_TOL) + FEAS_TOL
    cdef double ci, pj, den, relay, dest, w2, d2, rest, u
    with nogil:
        for i in range(nc):
            ci = c[i]
            rest = 0.0
            if split:
                u = ci
                rest = (1.0 - fabs(u)) * p1
                if p2 > 0.0:
                    ci = sqrt(fabs(u) * p1 / p2)
                    if u < 0.0:
                        ci = -ci
                else:
                    ci = 0.0
            w2 = _abs2(h_sw.real * ci + h_rw.real, h_sw.imag * ci + h_rw.imag)
            d2 = _abs2(h_sd.real * ci + h_rd.real, h_sd.imag * ci + h_rd.imag)
            for j in range(npw):
                pj = p[j] * rest if split else p[j]
                if ci * ci * p2 + pj > limit:
                    out[i, j] = NAN
                    continue
                den = 1.0 + w2 * p2 + sw2 * pj
                relay = 0.5 * log2((1.0 + sr2 * pj) / den)
                dest = 0.5 * log2((1.0 + d2 * p2 + sd2 * pj) / den)
                out[i, j] = relay if relay < dest else dest
    return out_arr


cdef inline double _df_ratio(double p, double a, double b, double d,
                            double den0, double w) nogil:
    cdef double n1 = 1.0 + a * p
    cdef double n2 = b + d * p
    return (n1 if n1 < n2 else n2) / (den0 + w * p)


def df_profile(double[::1] c, gains, double p1, double p2):
    cdef complex h_sd, h_sw, h_sr, h_rd, h_rw
    h_sd, h_sw, h_sr, h_rd, h_rw = map(complex, gains)
    cdef Py_ssize_t n = c.shape[0], i
    val_arr = np.empty(n, dtype=np.float64)
    p_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] val = val_arr
    cdef double[::1] pbest = p_arr
    cdef double a = _abs2(h_sr.real, h_sr.imag)
    cdef double d = _abs2(h_sd.real, h_sd.imag)
    cdef double w = _abs2(h_sw.real, h_sw.imag)
    cdef double ci, pmax, b, den0, cross, best, bp, r
    cdef bint feasible
    with nogil:
        for i in range(n):
            ci = c[i]
            pmax = p1 - ci * ci * p2
            feasible = pmax >= -FEAS_TOL * (1.0 + p1)
            if pmax < 0.0:
                pmax = 0.0
            b = 1.0 + _abs2(h_sd.real * ci + h_rd.real, h_sd.imag * ci + h_rd.imag) * p2
            den0 = 1.0 + _abs2(h_sw.real * ci + h_rw.real, h_sw.imag * ci + h_rw.imag) * p2
            cross = (b - 1.0) / (a - d) if a != d else -1.0
            if not (cross > 0.0 and cross < pmax):
                cross = 0.0
            bp = 0.0
            best = _df_ratio(0.0, a, b, d, den0, w)
            r = _df_ratio(cross, a, b, d, den0, w)
            if r > best:
                best = r
                bp = cross
            r = _df_ratio(pmax, a, b, d, den0, w)
            if r > best:
                best = r
                bp = pmax
            val[i] = 0.5 * log2(best) if feasible else NAN
            pbest[i] = bp
    return val_arr, p_arr


cdef inline double _af_det(double s_re, double s_im, double r_re, double r_im,
                           double sr_re, double sr_im, double a, double b,
                           double g, double p, double* noise2) nogil:
    cdef double s2 = s_re * s_re + s_im * s_im
    cdef double r2 = r_re * r_re + r_im * r_im
    # beta h_s + gamma h_sr h_r
    cdef double prod_re = sr_re * r_re - sr_im * r_im
    cdef double prod_im = sr_re * r_im + sr_im * r_re
    cdef double b2 = _abs2(b * s_re + g * prod_re, b * s_im + g * prod_im)
    cdef double a2 = a * a * s2
    noise2[0] = 1.0 + g * g * r2
    return (p * s2 + 1.0) * (p * (b2 + a2) + noise2[0]) - p * p * s2 * b2


def af_values(double[::1] alpha, double[::1] beta, double[::1] gamma,
              double[::1] p, gains, double p1, double p2):
    cdef complex h_sd, h_sw, h_sr, h_rd, h_rw
    h_sd, h_sw, h_sr, h_rd, h_rw = map(complex, gains)
    cdef Py_ssize_t na = alpha.shape[0], nb = beta.shape[0]
    cdef Py_ssize_t ng = gamma.shape[0], npw = p.shape[0]
    cdef Py_ssize_t i, j, k, l
    out_arr = np.empty((na, nb, ng, npw), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef double sr2 = _abs2(h_sr.real, h_sr.imag)
    cdef double lim1 = 2.0 * p1 * (1.0 + FEAS_TOL) + FEAS_TOL
    cdef double lim2 = 2.0 * p2 * (1.0 + FEAS_TOL) + FEAS_TOL
    cdef double a, b, g, q, det1, det2, det_a, det_b
    with nogil:
        for i in range(na):
            a = alpha[i]
            for j in range(nb):
                b = beta[j]
                for k in range(ng):
                    g = gamma[k]
                    for l in range(npw):
                        q = p[l]
                        if (1.0 + a * a + b * b) * q > lim1 or g * g * (sr2 * q + 1.0) > lim2:
                            out[i, j, k, l] = NAN
                            continue
                        det1 = _af_det(h_sd.real, h_sd.imag, h_rd.real, h_rd.imag,
                                       h_sr.real, h_sr.imag, a, b, g, q, &det_a)
                        det2 = _af_det(h_sw.real, h_sw.imag, h_rw.real, h_rw.imag,
                                       h_sr.real, h_sr.imag, a, b, g, q, &det_b)
                        out[i, j, k, l] = 0.25 * log2((det1 * det_b) / (det2 * det_a))
    return out_arr


def bound_values(double[::1] rho, double[::1] s, gains, double p1, double p2):
    cdef complex h_sd, h_sw, h_sr, h_rd, h_rw
    h_sd, h_sw, h_sr, h_rd, h_rw = map(complex, gains)
    cdef Py_ssize_t nr = rho.shape[0], ns = s.shape[0], i, j
    out_arr = np.empty((nr, ns), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double sd2 = _abs2(h_sd.real, h_sd.imag)
    cdef double sw2 = _abs2(h_sw.real, h_sw.imag)
    cdef double sr2 = _abs2(h_sr.real, h_sr.imag)
    cdef double rd2 = _abs2(h_rd.real, h_rd.imag)
    cdef double rw2 = _abs2(h_rw.real, h_rw.imag)
    cdef double cross_y = 2.0 * (h_sd.real * h_rd.real + h_sd.imag * h_rd.imag)
    cdef double cross_w = 2.0 * (h_sw.real * h_rw.real + h_sw.imag * h_rw.imag)
    cdef double r, q, k, snr_y, snr_w, i_y, i_w, i_relay, v
    with nogil:
        for i in range(nr):
            r = rho[i]
            if r > 1.0:
                r = 1.0
            elif r < -1.0:
                r = -1.0
            for j in range(ns):
                q = s[j] * p1
                k = r * sqrt(q * p2)
                snr_y = sd2 * q + rd2 * p2 + cross_y * k
                snr_w = sw2 * q + rw2 * p2 + cross_w * k
                if snr_y < 0.0:
                    snr_y = 0.0
                if snr_w < 0.0:
                    snr_w = 0.0
                i_y = 0.5 * log2(1.0 + snr_y)
                i_w = 0.5 * log2(1.0 + snr_w)
                i_relay = 0.5 * log2(1.0 + (sd2 + sr2) * q * (1.0 - r * r))
                v = i_y if i_y < i_relay else i_relay
                out[i, j] = v if v < i_y - i_w else i_y - i_w
    return out_arr


cdef inline double _bound_at(double p, double b, double d, double e,
                             double den0, double w) nogil:
    cdef double i_y = log2(b + d * p)
    cdef double i_r = log2(1.0 + e * p)
    cdef double diff = i_y - log2(den0 + w * p)
    cdef double v = i_y if i_y < i_r else i_r
    return 0.5 * (v if v < diff else diff)


def bound_profile(double[::1] c, gains, double p1, double p2):
    cdef complex h_sd, h_sw, h_sr, h_rd, h_rw
    h_sd, h_sw, h_sr, h_rd, h_rw = map(complex, gains)
    cdef Py_ssize_t n = c.shape[0], i, k
    val_arr = np.empty(n, dtype=np.float64)
    p_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] val = val_arr
    cdef double[::1] pbest = p_arr
    cdef double d = _abs2(h_sd.real, h_sd.imag)
    cdef double w = _abs2(h_sw.real, h_sw.imag)
    cdef double e = d + _abs2(h_sr.real, h_sr.imag)
    cdef double ci, pmax, b, den0, qa, qb, qc, disc, best, bp, v
    cdef double cand[3]
    cdef bint feasible
    with nogil:
        for i in range(n):
            ci = c[i]
            pmax = p1 - ci * ci * p2
            feasible = pmax >= -FEAS_TOL * (1.0 + p1)
            if pmax < 0.0:
                pmax = 0.0
            b = 1.0 + _abs2(h_sd.real * ci + h_rd.real, h_sd.imag * ci + h_rd.imag) * p2
            den0 = 1.0 + _abs2(h_sw.real * ci + h_rw.real, h_sw.imag * ci + h_rw.imag) * p2
            qa = e * w
            qb = e * den0 + w - d
            qc = den0 - b
            if qa > 0.0:
                disc = qb * qb - 4.0 * qa * qc
                disc = sqrt(disc) if disc > 0.0 else 0.0
                cand[0] = (-qb + disc) / (2.0 * qa)
                cand[1] = (-qb - disc) / (2.0 * qa)
            else:
                cand[0] = -qc / qb if qb != 0.0 else -1.0
                cand[1] = -1.0
            cand[2] = pmax
            bp = 0.0
            best = _bound_at(0.0, b, d, e, den0, w)
            for k in range(3):
                if not (cand[k] > 0.0 and cand[k] <= pmax):
                    cand[k] = 0.0
                v = _bound_at(cand[k], b, d, e, den0, w)
                if v > best:
                    best = v
                    bp = cand[k]
            val[i] = best if feasible else NAN
            pbest[i] = bp
    return val_arr, p_arr

"""Pure-Python Riccati integrator (fallback for the compiled ``_riccati_ext``).

Integrates the augmented system

    q' = 2 (U'/U) q + |k|^2 - q^2,      I' = q,      q(x0) = I(x0) = 0

with the Dormand-Prince 5(4) pair, landing exactly on every requested output
node.  U and U' are piecewise polynomials in scipy ``PPoly`` layout.  The
signature and status codes must stay identical to ``_riccati_ext``.
"""

import math

import numpy as np

OK = 0
MAX_STEPS = 1
STEP_UNDERFLOW = 2
NON_FINITE = 3

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


def _ppoly(breaks, c, x):
    npieces = len(breaks) - 1
    i = 0
    if npieces > 1:
        lo, hi = 0, npieces - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if breaks[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        i = lo
    t = x - breaks[i]
    acc = 0.0
    for m in range(len(c)):
        acc = acc * t + c[m][i]
    return acc


def _rhs(breaks, cU, cdU, ksq, x, q):
    r = _ppoly(breaks, cdU, x) / _ppoly(breaks, cU, x)
    return 2.0 * r * q + ksq - q * q


def integrate(breaks, cU, cdU, ksq, nodes, rtol, atol, max_steps):
    """Return (q, I, status, nsteps, errsum) sampled at ``nodes``.

    ``nodes[0]`` is the initial point; nodes must be strictly increasing.
    ``errsum`` accumulates the local error estimates of q (a crude global
    error indicator).
    """
    breaks = [float(b) for b in breaks]
    cU = np.asarray(cU, dtype=float).tolist()
    cdU = np.asarray(cdU, dtype=float).tolist()
    nodes = [float(v) for v in nodes]
    n = len(nodes)
    qs = [0.0] * n
    Is = [0.0] * n
    x = nodes[0]
    span = nodes[-1] - nodes[0]
    q = 0.0
    I = 0.0
    status = OK
    nsteps = 0
    errsum = 0.0
    if n < 2 or span <= 0:
        return np.array(qs), np.array(Is), status, nsteps, errsum
    h = 0.01 * span / (1.0 + math.sqrt(ksq) * span)
    f1 = _rhs(breaks, cU, cdU, ksq, x, q)
    out = 1
    hmin = 1e-14 * span
    while out < n:
        if nsteps >= max_steps:
            status = MAX_STEPS
            break
        target = nodes[out]
        gap = target - x
        land = False
        hs = h
        if x + h >= target - hmin:
            hs = gap
            land = True
        # stages: q-component uses the Riccati rhs, I-component is q itself
        q2 = q + hs * A21 * f1
        f2 = _rhs(breaks, cU, cdU, ksq, x + C2 * hs, q2)
        q3 = q + hs * (A31 * f1 + A32 * f2)
        f3 = _rhs(breaks, cU, cdU, ksq, x + C3 * hs, q3)
        q4 = q + hs * (A41 * f1 + A42 * f2 + A43 * f3)
        f4 = _rhs(breaks, cU, cdU, ksq, x + C4 * hs, q4)
        q5 = q + hs * (A51 * f1 + A52 * f2 + A53 * f3 + A54 * f4)
        f5 = _rhs(breaks, cU, cdU, ksq, x + C5 * hs, q5)
        q6 = q + hs * (A61 * f1 + A62 * f2 + A63 * f3 + A64 * f4 + A65 * f5)
        f6 = _rhs(breaks, cU, cdU, ksq, x + hs, q6)
        qn = q + hs * (B1 * f1 + B3 * f3 + B4 * f4 + B5 * f5 + B6 * f6)
        In = I + hs * (B1 * q + B3 * q3 + B4 * q4 + B5 * q5 + B6 * q6)
        f7 = _rhs(breaks, cU, cdU, ksq, x + hs, qn)
        eq = hs * (E1 * f1 + E3 * f3 + E4 * f4 + E5 * f5 + E6 * f6 + E7 * f7)
        eI = hs * (E1 * q + E3 * q3 + E4 * q4 + E5 * q5 + E6 * q6 + E7 * qn)
        nsteps += 1
        if not (math.isfinite(qn) and math.isfinite(In) and math.isfinite(eq)):
            status = NON_FINITE
            break
        sq = atol + rtol * max(abs(q), abs(qn))
        sI = atol + rtol * max(abs(I), abs(In))
        err = math.sqrt(0.5 * ((eq / sq) ** 2 + (eI / sI) ** 2))
        if err <= 1.0:
            x = target if land else x + hs
            q, I, f1 = qn, In, f7
            errsum += abs(eq)
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            hnew = hs * fac
            h = max(h, hnew) if land else hnew
            if land:
                qs[out] = q
                Is[out] = I
                out += 1
        else:
            h = hs * max(0.2, 0.9 * err ** -0.2)
            if h < hmin:
                status = STEP_UNDERFLOW
                break
    return np.array(qs), np.array(Is), status, nsteps, errsum


def surface_many(breaks, cU, cdU, ksq, x0, x1, rtol, atol, max_steps):
    """q(x1) for each entry of ``ksq``; returns (q1, status) arrays."""
    ksq = np.asarray(ksq, dtype=float)
    q1 = np.empty(ksq.size)
    st = np.empty(ksq.size, dtype=np.int32)
    nodes = [x0, x1]
    for m, kk in enumerate(ksq):
        qs, _, s, _, _ = integrate(breaks, cU, cdU, float(kk), nodes, rtol, atol, max_steps)
        q1[m] = qs[-1]
        st[m] = s
    return q1, st

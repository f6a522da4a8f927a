# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Riccati integrator; mirrors ``_riccati_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite, pow

cnp.import_array()

cdef enum:
    OK = 0
    MAX_STEPS = 1
    STEP_UNDERFLOW = 2
    NON_FINITE = 3

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline double _ppoly(const double[::1] breaks, const double[:, ::1] c, double x) noexcept nogil:
    cdef Py_ssize_t npieces = breaks.shape[0] - 1
    cdef Py_ssize_t i = 0, lo, hi, mid, m
    cdef double t, acc
    if npieces > 1:
        lo = 0
        hi = npieces - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if breaks[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        i = lo
    t = x - breaks[i]
    acc = 0.0
    for m in range(c.shape[0]):
        acc = acc * t + c[m, i]
    return acc


cdef inline double _rhs(const double[::1] breaks, const double[:, ::1] cU, const double[:, ::1] cdU,
                        double ksq, double x, double q) noexcept nogil:
    cdef double r = _ppoly(breaks, cdU, x) / _ppoly(breaks, cU, x)
    return 2.0 * r * q + ksq - q * q


cdef int _integrate(const double[::1] breaks, const double[:, ::1] cU, const double[:, ::1] cdU,
                    double ksq, const double[::1] nodes, double rtol, double atol, long max_steps,
                    double[::1] qs, double[::1] Is, long* nsteps_out, double* errsum_out) noexcept nogil:
    cdef Py_ssize_t n = nodes.shape[0]
    cdef Py_ssize_t out = 1
    cdef double x = nodes[0]
    cdef double span = nodes[n - 1] - nodes[0]
    cdef double q = 0.0, I = 0.0
    cdef double h, hs, hmin, target, hnew, fac, err, sq, sI
    cdef double f1, f2, f3, f4, f5, f6, f7, q2, q3, q4, q5, q6, qn, In, eq, eI
    cdef long nsteps = 0
    cdef double errsum = 0.0
    cdef int status = OK
    cdef bint land
    qs[0] = 0.0
    Is[0] = 0.0
    if n < 2 or span <= 0:
        nsteps_out[0] = 0
        errsum_out[0] = 0.0
        return OK
    h = 0.01 * span / (1.0 + sqrt(ksq) * span)
    hmin = 1e-14 * span
    f1 = _rhs(breaks, cU, cdU, ksq, x, q)
    while out < n:
        if nsteps >= max_steps:
            status = MAX_STEPS
            break
        target = nodes[out]
        land = False
        hs = h
        if x + h >= target - hmin:
            hs = target - x
            land = True
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
        if not (isfinite(qn) and isfinite(In) and isfinite(eq)):
            status = NON_FINITE
            break
        sq = atol + rtol * (fabs(q) if fabs(q) > fabs(qn) else fabs(qn))
        sI = atol + rtol * (fabs(I) if fabs(I) > fabs(In) else fabs(In))
        err = sqrt(0.5 * ((eq / sq) * (eq / sq) + (eI / sI) * (eI / sI)))
        if err <= 1.0:
            if land:
                x = target
            else:
                x = x + hs
            q = qn
            I = In
            f1 = f7
            errsum += fabs(eq)
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                if fac < 0.2:
                    fac = 0.2
                if fac > 5.0:
                    fac = 5.0
            hnew = hs * fac
            if land:
                if hnew > h:
                    h = hnew
                qs[out] = q
                Is[out] = I
                out += 1
            else:
                h = hnew
        else:
            fac = 0.9 * pow(err, -0.2)
            if fac < 0.2:
                fac = 0.2
            h = hs * fac
            if h < hmin:
                status = STEP_UNDERFLOW
                break
    nsteps_out[0] = nsteps
    errsum_out[0] = errsum
    return status


def integrate(breaks, cU, cdU, double ksq, nodes, double rtol, double atol, long max_steps):
    """Return (q, I, status, nsteps, errsum) sampled at ``nodes``."""
    cdef const double[::1] b = np.ascontiguousarray(breaks, dtype=np.float64)
    cdef const double[:, ::1] cu = np.ascontiguousarray(cU, dtype=np.float64)
    cdef const double[:, ::1] cdu = np.ascontiguousarray(cdU, dtype=np.float64)
    cdef const double[::1] nd = np.ascontiguousarray(nodes, dtype=np.float64)
    qs_arr = np.zeros(nd.shape[0])
    Is_arr = np.zeros(nd.shape[0])
    cdef double[::1] qs = qs_arr
    cdef double[::1] Is = Is_arr
    cdef long nsteps = 0
    cdef double errsum = 0.0
    cdef int status
    with nogil:
        status = _integrate(b, cu, cdu, ksq, nd, rtol, atol, max_steps, qs, Is, &nsteps, &errsum)
    return qs_arr, Is_arr, status, nsteps, errsum


def surface_many(breaks, cU, cdU, ksq, double x0, double x1, double rtol, double atol, long max_steps):
    """q(x1) for each entry of ``ksq``; returns (q1, status) arrays."""
    cdef const double[::1] b = np.ascontiguousarray(breaks, dtype=np.float64)
    cdef const double[:, ::1] cu = np.ascontiguousarray(cU, dtype=np.float64)
    cdef const double[:, ::1] cdu = np.ascontiguousarray(cdU, dtype=np.float64)
    cdef const double[::1] kk = np.ascontiguousarray(ksq, dtype=np.float64).ravel()
    cdef Py_ssize_t m, nk = kk.shape[0]
    q1_arr = np.empty(nk)
    st_arr = np.empty(nk, dtype=np.int32)
    cdef double[::1] q1 = q1_arr
    cdef int[::1] st = st_arr
    nodes_arr = np.array([x0, x1])
    cdef const double[::1] nd = nodes_arr
    cdef double[::1] qs = np.zeros(2)
    cdef double[::1] Is = np.zeros(2)
    cdef long nsteps
    cdef double errsum
    with nogil:
        for m in range(nk):
            st[m] = _integrate(b, cu, cdu, kk[m], nd, rtol, atol, max_steps, qs, Is, &nsteps, &errsum)
            q1[m] = qs[1]
    return q1_arr, st_arr

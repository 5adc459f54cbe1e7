# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cyclic Jacobi eigensolver for complex Hermitian matrices.

Same rotation sequence as ``_jacobi_py.jacobi_eigh``.
"""
import numpy as np

from libc.math cimport sqrt, fabs


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef double offdiag(double complex[:, ::1] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += cabs2(a[i, j])
    return sqrt(s)


def jacobi_eigh(h, double tol=1e-15, int max_sweeps=60):
    """Return ``(w, V, sweeps)`` with ``h = V diag(w) V^*``, ``w`` ascending."""
    cdef double complex[:, ::1] a = np.array(h, dtype=complex, order="C")
    cdef Py_ssize_t n = a.shape[0]
    vv = np.eye(n, dtype=complex)
    cdef double complex[:, ::1] v = vv
    cdef Py_ssize_t p, q, r
    cdef double complex apq, w, upp, upq, uqp, uqq, xp, xq
    cdef double b, app, aqq, theta, t, c, s, fro = 0.0
    cdef int sweeps = 0
    for p in range(n):
        for q in range(n):
            fro += cabs2(a[p, q])
    fro = sqrt(fro)
    if n >= 2 and fro > 0.0:
        with nogil:
            while sweeps < max_sweeps:
                if offdiag(a, n) <= tol * fro:
                    break
                sweeps += 1
                for p in range(n - 1):
                    for q in range(p + 1, n):
                        apq = a[p, q]
                        b = sqrt(cabs2(apq))
                        if b == 0.0:
                            continue
                        w = apq.conjugate() / b
                        app = a[p, p].real
                        aqq = a[q, q].real
                        theta = (aqq - app) / (2.0 * b)
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                        c = 1.0 / sqrt(t * t + 1.0)
                        s = t * c
                        upp = c
                        upq = s
                        uqp = -s * w
                        uqq = c * w
                        for r in range(n):
                            xp = a[r, p]
                            xq = a[r, q]
                            a[r, p] = xp * upp + xq * uqp
                            a[r, q] = xp * upq + xq * uqq
                        for r in range(n):
                            xp = a[p, r]
                            xq = a[q, r]
                            a[p, r] = upp * xp + uqp.conjugate() * xq
                            a[q, r] = upq * xp + uqq.conjugate() * xq
                        a[p, q] = 0.0
                        a[q, p] = 0.0
                        a[p, p] = a[p, p].real
                        a[q, q] = a[q, q].real
                        for r in range(n):
                            xp = v[r, p]
                            xq = v[r, q]
                            v[r, p] = xp * upp + xq * uqp
                            v[r, q] = xp * upq + xq * uqq
    diag = np.real(np.diag(np.asarray(a))).copy()
    order = np.argsort(diag, kind="stable")
    return diag[order], np.ascontiguousarray(vv[:, order]), sweeps

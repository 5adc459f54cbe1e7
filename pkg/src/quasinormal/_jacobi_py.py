"""Cyclic Jacobi eigensolver for complex Hermitian matrices, numpy version.

Reference implementation used when the compiled kernel is unavailable; the
compiled kernel performs the same rotations in the same order.
"""
import math

import numpy as np


def jacobi_eigh(h, tol=1e-15, max_sweeps=60):
    """Return ``(w, V, sweeps)`` with ``h = V diag(w) V^*``, ``w`` ascending."""
    a = np.array(h, dtype=complex, order="C")
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    fro = np.linalg.norm(a)
    sweeps = 0
    if n < 2 or fro == 0.0:
        return _finish(a, v, sweeps)
    while sweeps < max_sweeps:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * fro:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b == 0.0:
                    continue
                w = apq.conjugate() / b
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * b)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                upp, upq, uqp, uqq = c, s, -s * w, c * w
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = colp * upp + colq * uqp
                a[:, q] = colp * upq + colq * uqq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = upp * rowp + uqp.conjugate() * rowq
                a[q, :] = upq * rowp + uqq.conjugate() * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = vp * upp + vq * uqp
                v[:, q] = vp * upq + vq * uqq
    return _finish(a, v, sweeps)


def _finish(a, v, sweeps):
    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v[:, order]), sweeps

"""Barnes-Hut approximation of degree-weighted 1/d repulsion in 2-D.

Positions are treated as complex numbers. The repulsion on node ``i`` from
``j`` is ``k * m_i * m_j / conj(z_i - z_j)``, so the field of a cell about
its centre of mass ``c`` has the convergent multipole expansion
``sum_k a_k / (z - c)**(k+1)`` with ``a_k = sum_j m_j (z_j - c)**k``.
A cell is summarised when ``distance * theta > size`` where ``size`` is twice
the largest member distance from the centre of mass; keeping ``order``
terms of the expansion bounds the error even for loose ``theta``.
"""

from __future__ import annotations

import numba
import numpy as np

DEFAULT_ORDER = 8
_MIN_CELL = 1e-12


@numba.njit(cache=True)
def _build(x, y, mass, order):
    n = x.shape[0]
    cap = 4 * n + 8
    start = np.empty(cap, np.int64)
    end = np.empty(cap, np.int64)
    x0 = np.empty(cap)
    y0 = np.empty(cap)
    width = np.empty(cap)
    child = -np.ones((cap, 4), np.int64)
    perm = np.arange(n)
    xmin, xmax, ymin, ymax = x.min(), x.max(), y.min(), y.max()
    start[0], end[0] = 0, n
    x0[0], y0[0] = xmin, ymin
    width[0] = max(xmax - xmin, ymax - ymin) * (1 + 1e-12) + 1e-300
    n_cells = 1
    stack = np.empty(cap, np.int64)
    stack[0] = 0
    top = 1
    quad = np.empty(n, np.int64)
    buf = np.empty(n, np.int64)
    while top:
        top -= 1
        c = stack[top]
        s, e = start[c], end[c]
        if e - s <= 1 or width[c] < _MIN_CELL:
            continue
        h = width[c] / 2
        mx, my = x0[c] + h, y0[c] + h
        counts = np.zeros(4, np.int64)
        for t in range(s, e):
            p = perm[t]
            q = (1 if x[p] >= mx else 0) + (2 if y[p] >= my else 0)
            quad[t] = q
            counts[q] += 1
        occupied = 0
        only = 0
        for q in range(4):
            if counts[q]:
                occupied += 1
                only = q
        if occupied == 1:
            # shrink in place instead of chaining single-child cells
            x0[c] += h if only & 1 else 0.0
            y0[c] += h if only & 2 else 0.0
            width[c] = h
            stack[top] = c
            top += 1
            continue
        offs = np.zeros(5, np.int64)
        for q in range(4):
            offs[q + 1] = offs[q] + counts[q]
        fill = offs[:4].copy()
        for t in range(s, e):
            q = quad[t]
            buf[s + fill[q]] = perm[t]
            fill[q] += 1
        for t in range(s, e):
            perm[t] = buf[t]
        for q in range(4):
            if counts[q] == 0:
                continue
            k = n_cells
            n_cells += 1
            start[k], end[k] = s + offs[q], s + offs[q + 1]
            x0[k] = x0[c] + (h if q & 1 else 0.0)
            y0[k] = y0[c] + (h if q & 2 else 0.0)
            width[k] = h
            child[c, q] = k
            stack[top] = k
            top += 1

    cmass = np.zeros(n_cells)
    cx = np.zeros(n_cells)
    cy = np.zeros(n_cells)
    radius = np.zeros(n_cells)
    coeffs = np.zeros((n_cells, order), np.complex128)
    for c in range(n_cells):
        s, e = start[c], end[c]
        m = 0.0
        sx = 0.0
        sy = 0.0
        for t in range(s, e):
            p = perm[t]
            m += mass[p]
            sx += mass[p] * x[p]
            sy += mass[p] * y[p]
        cmass[c] = m
        cx[c] = sx / m
        cy[c] = sy / m
        r = 0.0
        for t in range(s, e):
            p = perm[t]
            dz = complex(x[p] - cx[c], y[p] - cy[c])
            r = max(r, abs(dz))
            term = complex(mass[p], 0.0)
            for k in range(order):
                coeffs[c, k] += term
                term *= dz
        radius[c] = r
    return perm, start[:n_cells], end[:n_cells], child[:n_cells], cx, cy, radius, coeffs


@numba.njit(cache=True)
def _forces(x, y, mass, coefficient, theta, order):
    n = x.shape[0]
    out = np.zeros((n, 2))
    if n < 2:
        return out
    perm, start, end, child, cx, cy, radius, coeffs = _build(x, y, mass, order)
    stack = np.empty(start.shape[0] + 1, np.int64)
    for i in range(n):
        zi = complex(x[i], y[i])
        total = 0j
        stack[0] = 0
        top = 1
        while top:
            top -= 1
            c = stack[top]
            leaf = True
            for q in range(4):
                if child[c, q] >= 0:
                    leaf = False
            if leaf:
                for t in range(start[c], end[c]):
                    j = perm[t]
                    if j == i:
                        continue
                    d = zi - complex(x[j], y[j])
                    if d == 0:
                        continue
                    total += mass[j] / d
                continue
            w = zi - complex(cx[c], cy[c])
            dist = abs(w)
            if dist * theta > 2.0 * radius[c] and dist > radius[c]:
                inv = 1.0 / w
                pw = inv
                acc = 0j
                for k in range(order):
                    acc += coeffs[c, k] * pw
                    pw *= inv
                total += acc
            else:
                for q in range(4):
                    if child[c, q] >= 0:
                        stack[top] = child[c, q]
                        top += 1
        f = coefficient * mass[i] * total.conjugate()
        out[i, 0] = f.real
        out[i, 1] = f.imag
    return out


def barnes_hut_repulsion(pos, mass, coefficient: float, theta: float = 1.2,
                         order: int = DEFAULT_ORDER) -> np.ndarray:
    """Approximate repulsion forces, one row per node."""
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    mass = np.ascontiguousarray(mass, dtype=np.float64)
    return _forces(pos[:, 0].copy(), pos[:, 1].copy(), mass, float(coefficient), float(theta), int(order))

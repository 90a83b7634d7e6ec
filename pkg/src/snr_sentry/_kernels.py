"""Compiled inner loops for the subset scan and coordinate descent.

Kept minimal on purpose: all orchestration, validation, and the rare
degenerate paths live in the calling modules.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def scan_best_quad(z, combos, ginv, lam_min, guard, best_init):
    """Argmax over subsets of the quadratic form z_J^T (G_J)^{-1} z_J.

    combos holds one subset per row; ginv the matching stacked Gram
    inverses; lam_min the smallest Gram eigenvalues, used for the sound
    upper bound ||z_J||^2 / lam_min >= quad that lets most rows be
    skipped. Ties keep the first (lowest-index) row. Returns (-1, best_init)
    when no row beats best_init.
    """
    m, k = combos.shape
    best = best_init
    besti = -1
    for i in range(m):
        s = 0.0
        for a in range(k):
            za = z[combos[i, a]]
            s += za * za
        if s / lam_min[i] <= best - guard:
            continue
        quad = 0.0
        for a in range(k):
            za = z[combos[i, a]]
            row = 0.0
            for b in range(k):
                row += ginv[i, a, b] * z[combos[i, b]]
            quad += za * row
        if quad > best:
            best = quad
            besti = i
    return besti, best


@njit(cache=True)
def cd_lasso(G, c, thresh, b, tol, max_sweeps):
    """Cyclic coordinate descent on 0.5||y - Xb||^2 + thresh*||b||_1.

    Works on the Gram matrix G = X^T X and correlations c = X^T y; b is
    updated in place. Convergence is declared on the stationarity
    residual, checked before the first sweep (a warm start may already be
    optimal) and after every sweep against a freshly recomputed gradient.
    Returns the number of sweeps used, or -1 if max_sweeps ran out.
    """
    p = G.shape[0]
    q = c - G @ b
    kkt = 0.0
    for j in range(p):
        if b[j] > 0.0:
            v = abs(q[j] - thresh)
        elif b[j] < 0.0:
            v = abs(q[j] + thresh)
        else:
            v = abs(q[j]) - thresh
            if v < 0.0:
                v = 0.0
        if v > kkt:
            kkt = v
    if kkt <= tol:
        return 0
    for sweep in range(max_sweeps):
        for j in range(p):
            bj = b[j]
            gjj = G[j, j]
            rho = q[j] + gjj * bj
            if rho > thresh:
                nb = (rho - thresh) / gjj
            elif rho < -thresh:
                nb = (rho + thresh) / gjj
            else:
                nb = 0.0
            if nb != bj:
                d = nb - bj
                for i in range(p):
                    q[i] -= G[i, j] * d
                b[j] = nb
        # Recompute the gradient from scratch: kills incremental drift and
        # makes the stationarity check trustworthy.
        q = c - G @ b
        kkt = 0.0
        for j in range(p):
            if b[j] > 0.0:
                v = abs(q[j] - thresh)
            elif b[j] < 0.0:
                v = abs(q[j] + thresh)
            else:
                v = abs(q[j]) - thresh
                if v < 0.0:
                    v = 0.0
            if v > kkt:
                kkt = v
        if kkt <= tol:
            return sweep + 1
    return -1

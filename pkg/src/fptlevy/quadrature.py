"""Panel quadrature primitives shared by the kernel and density routines.

Gauss-Legendre panels for the smooth parts, a Levin u-transform for
oscillatory tails whose cells only decay algebraically, and a rational map
for monotone algebraic tails.  Nothing here knows about the model; callers
pass plain integrands.
"""

from __future__ import annotations

from math import comb

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def panel_nodes(edges, n: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on consecutive panels given by edges."""
    xg, wg = gl_rule(n)
    e = np.asarray(edges, dtype=float)
    if e.ndim != 1 or len(e) < 2:
        raise ValueError("edges must be a 1-d array with at least two entries")
    mid = (e[1:] + e[:-1]) / 2
    half = (e[1:] - e[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * xg).ravel()
    weights = (half[:, None] * np.broadcast_to(wg, (len(mid), n))).ravel()
    return nodes, weights


def uniform_edges(a: float, b: float, max_width: float) -> np.ndarray:
    """Evenly spaced edges from a to b with spacing at most max_width."""
    if not b > a:
        raise ValueError(f"need b > a, got [{a}, {b}]")
    n = max(1, int(np.ceil((b - a) / max_width)))
    return np.linspace(a, b, n + 1)


def geometric_edges(start: float, stop: float, first: float, cap: float) -> np.ndarray:
    """Edges from start towards stop, widths doubling from first up to cap.

    Used to approach integrable endpoint structure (kinks, near-poles)
    without paying full resolution far away.  Works in either direction.
    """
    sign = 1.0 if stop > start else -1.0
    edges = [start]
    width = abs(first)
    while True:
        nxt = edges[-1] + sign * width
        if (stop - nxt) * sign <= width * 0.5:
            break
        edges.append(nxt)
        if width < cap:
            width = min(2 * width, cap)
    edges.append(stop)
    return np.asarray(edges)


def levin_u(partial_sums, terms) -> float:
    """Levin u-transform estimate of the limit of a sequence of partial sums.

    Uses the standard remainder estimate omega_j = (j+1) a_j.  Works on the
    slowly convergent, sign-alternating cell sums produced by half-period
    splitting of oscillatory tails.  Order is capped by float64 cancellation
    around 20 terms.
    """
    S = np.asarray(partial_sums, dtype=float)
    a = np.asarray(terms, dtype=float)
    if S.shape != a.shape or S.ndim != 1 or len(S) < 2:
        raise ValueError("partial_sums and terms must be equal-length 1-d arrays")
    n = len(S) - 1
    num = 0.0
    den = 0.0
    for j in range(n + 1):
        aj = a[j]
        if aj == 0.0:
            # exact zero cell: the plain partial sum is already the answer
            # (happens when the integrand vanishes identically on a cell)
            return float(S[-1])
        w = (-1.0) ** j * comb(n, j) * float(j + 1) ** (n - 1)
        r = w / ((j + 1) * aj)
        num += r * S[j]
        den += r
    if den == 0.0:
        return float(S[-1])
    return float(num / den)


def oscillatory_tail(fn, start: float, half_period: float, n_cells: int = 20,
                     nodes_per_cell: int = 12, panels_per_cell: int = 1) -> tuple[float, float]:
    """Integrate fn from start to infinity by Levin-accelerated cell sums.

    fn must accept a node array and return integrand values.  Returns the
    tail estimate and a crude error gauge (the change from the previous
    transform order).
    """
    cells = np.empty(n_cells)
    for m in range(n_cells):
        lo = start + m * half_period
        edges = np.linspace(lo, lo + half_period, panels_per_cell + 1)
        x, w = panel_nodes(edges, nodes_per_cell)
        cells[m] = float(np.sum(w * fn(x)))
    S = np.cumsum(cells)
    full = levin_u(S, cells)
    drop = levin_u(S[:-1], cells[:-1])
    return full, abs(full - drop)


def rational_tail(fn, start: float, scale: float | None = None,
                  nodes_per_panel: int = 12) -> float:
    """Integrate a monotone algebraically decaying fn from start to infinity.

    Maps k = start + scale*v/(1-v) onto v in [0,1) with panels refined
    towards v = 1, which absorbs log-type growth in fn against 1/k^2 decay.
    """
    s = scale if scale is not None else max(start, 1.0)
    edges = 1.0 - np.geomspace(1e-6, 1.0, 11)[::-1]
    v, wv = panel_nodes(edges, nodes_per_panel)
    k = start + s * v / (1 - v)
    jac = s / (1 - v) ** 2
    return float(np.sum(wv * jac * fn(k)))

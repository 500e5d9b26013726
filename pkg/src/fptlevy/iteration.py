"""Kernel table and the fixed-point iteration for the passage density.

The n-pass joint densities p_i(x0; s, x) obey

    p_{i+1}(x0; s, x) = p_1(x0; s, x) 1{x < 0}
                        + int_0^s sum_{y > 0} p_i(x0; tau, y) p_1(y; s - tau, x) w_y dtau

and the first-passage density is the monotone limit of their negative-side
marginals.  Time is discretized on cell midpoints sigma_j = (j + 1/2) dt;
treating both factors as piecewise constant makes the time convolution

    C(sigma_m) = (dt/2) (c_m + c_{m-1}),   c = discrete convolution,

exact for piecewise-constant slices, and c is computed by zero-padded FFT.
"""

from __future__ import annotations

import os
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, NumericalError, ResolutionError
from .kernel import SMALL_S_SWITCH, QuadratureConfig, p1_generic, p1_vg, p1_vg_plancherel
from .models import LsbmSpec, VarianceGamma

_MAGIC = b"FPT1"
_VERSION = 1
_LAWS = ("quadratic", "linear")


def _midpoint_weights(nodes: np.ndarray, X: float) -> np.ndarray:
    """Cell weights with boundaries midway between nodes, [0, X] overall."""
    edges = np.concatenate(([0.0], (nodes[1:] + nodes[:-1]) / 2, [X]))
    return np.diff(edges)


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Symmetric spatial nodes on [-X, X] and midpoint time slices on [0, T].

    x_nodes are the positive nodes in increasing order; the negative side is
    their mirror image.  cell_weights covers the concatenated axis
    (negative ascending, then positive ascending).
    """

    T: float
    n_t: int
    X: float
    x_nodes: np.ndarray
    law: str = "quadratic"

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.n_t < 1:
            raise ValueError(f"n_t must be at least 1, got {self.n_t}")
        if self.law not in _LAWS:
            raise ValueError(f"law must be one of {_LAWS}, got {self.law!r}")
        x = np.asarray(self.x_nodes, dtype=float)
        if x.ndim != 1 or len(x) < 2:
            raise ValueError("x_nodes must be a 1-d array with at least two nodes")
        if not (np.all(np.diff(x) > 0) and x[0] > 0 and x[-1] <= self.X):
            raise ValueError("x_nodes must be strictly increasing inside (0, X]")
        object.__setattr__(self, "x_nodes", x)

    @classmethod
    def build(cls, T: float, n_t: int, X: float, n_x: int,
              law: str = "quadratic", anchor: float | None = None) -> "SpaceTimeGrid":
        """Construct nodes by the given spacing law, optionally snapping the
        node nearest to anchor onto it so a start point lies on the grid."""
        if n_x < 2:
            raise ValueError(f"n_x must be at least 2, got {n_x}")
        k = np.arange(1, n_x + 1, dtype=float)
        if law == "quadratic":
            nodes = X * (k / n_x) ** 2
        elif law == "linear":
            nodes = (k - 0.5) * (X / n_x)
        else:
            raise ValueError(f"law must be one of {_LAWS}, got {law!r}")
        if anchor is not None:
            if not 0 < anchor < X:
                raise ValueError(f"anchor must lie in (0, X), got {anchor}")
            i = int(np.argmin(np.abs(nodes - anchor)))
            nodes[i] = anchor
            nodes = np.sort(nodes)
            if np.any(np.diff(nodes) <= 0):
                raise ValueError(f"anchor {anchor} collides with an existing node")
        return cls(T=T, n_t=n_t, X=X, x_nodes=nodes, law=law)

    @property
    def dt(self) -> float:
        return self.T / self.n_t

    @property
    def t_mid(self) -> np.ndarray:
        return (np.arange(self.n_t) + 0.5) * self.dt

    @property
    def n_x(self) -> int:
        return len(self.x_nodes)

    @property
    def x_neg_nodes(self) -> np.ndarray:
        return -self.x_nodes[::-1]

    @property
    def all_nodes(self) -> np.ndarray:
        return np.concatenate((self.x_neg_nodes, self.x_nodes))

    @property
    def cell_weights(self) -> np.ndarray:
        w = _midpoint_weights(self.x_nodes, self.X)
        return np.concatenate((w[::-1], w))

    def x0_index(self, x0: float) -> int:
        i = int(np.argmin(np.abs(self.x_nodes - x0)))
        if abs(self.x_nodes[i] - x0) > 1e-12 * max(1.0, abs(x0)):
            raise ValueError(
                f"x0 = {x0} is not a grid node; build the grid with anchor=x0"
            )
        return i


@dataclass(frozen=True)
class KernelTable:
    """p1 sampled on the grid: p1[i, j, k] = p1(x_i; sigma_j, x_k).

    Rows i run over the positive nodes (start points), columns k over the
    full signed axis.  q1[i, j] is the negative-side marginal of row i at
    slice j, i.e. the first-iterate passage density.
    """

    grid: SpaceTimeGrid
    p1: np.ndarray
    q1: np.ndarray

    def __post_init__(self):
        g = self.grid
        if self.p1.shape != (g.n_x, g.n_t, 2 * g.n_x):
            raise ValueError(f"p1 has shape {self.p1.shape}, expected {(g.n_x, g.n_t, 2 * g.n_x)}")
        if self.q1.shape != (g.n_x, g.n_t):
            raise ValueError(f"q1 has shape {self.q1.shape}, expected {(g.n_x, g.n_t)}")

    def save(self, path: str) -> None:
        g = self.grid
        law_code = _LAWS.index(g.law)
        header = struct.pack(
            "<4sIIIBddd", _MAGIC, _VERSION, g.n_t, g.n_x, law_code, g.T, g.X, 0.0
        )
        payload = b"".join(
            a.astype("<f8").tobytes(order="C")
            for a in (g.x_nodes, self.p1, self.q1)
        )
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "wb") as fh:
            fh.write(header + payload)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "KernelTable":
        with open(path, "rb") as fh:
            raw = fh.read()
        head_size = struct.calcsize("<4sIIIBddd")
        if len(raw) < head_size:
            raise ValueError(f"{path} is not a kernel table (truncated header)")
        magic, version, n_t, n_x, law_code, T, X, _ = struct.unpack(
            "<4sIIIBddd", raw[:head_size]
        )
        if magic != _MAGIC:
            raise ValueError(f"{path} is not a kernel table (bad magic {magic!r})")
        if version != _VERSION:
            raise ValueError(f"unsupported kernel table version {version}")
        counts = (n_x, n_x * n_t * 2 * n_x, n_x * n_t)
        expected = head_size + 8 * sum(counts)
        if len(raw) != expected:
            raise ValueError(f"{path} has {len(raw)} bytes, expected {expected}")
        off = head_size
        arrays = []
        for cnt in counts:
            arrays.append(np.frombuffer(raw, dtype="<f8", count=cnt, offset=off).copy())
            off += 8 * cnt
        nodes, p1_flat, q1_flat = arrays
        grid = SpaceTimeGrid(T=T, n_t=n_t, X=X, x_nodes=nodes, law=_LAWS[law_code])
        return cls(
            grid=grid,
            p1=p1_flat.reshape(n_x, n_t, 2 * n_x),
            q1=q1_flat.reshape(n_x, n_t),
        )


def _thread_count() -> int:
    raw = os.environ.get("FPT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        warnings.warn(f"ignoring non-integer FPT_THREADS={raw!r}")
        return 1


def build_kernel_table(lsbm: LsbmSpec, grid: SpaceTimeGrid,
                       cfg: QuadratureConfig | None = None) -> KernelTable:
    """Tabulate p1 on the grid.

    The drift-free VG family uses the single-integral route with the Bessel
    form on slices where s alpha^2 nu / 2 falls below the small-s switch;
    other families use the contour route with a refined panel budget on the
    small slices instead.  Rows are independent, so FPT_THREADS > 1
    parallelizes over start nodes without changing any result bit.
    """
    cfg = cfg or QuadratureConfig()
    s_all = grid.t_mid
    x_all = grid.all_nodes
    sub = lsbm.subordinator
    vg_route = isinstance(sub, VarianceGamma) and sub.b == 0.0

    if vg_route:
        small = s_all * lsbm.alpha() ** 2 * sub.nu / 2 < SMALL_S_SWITCH
    else:
        warnings.warn(
            "non-VG family: the small-s Bessel fallback is unavailable, "
            "refining the contour quadrature on small slices instead"
        )
        small = s_all < 0.1
        cfg_fine = QuadratureConfig(
            truncation=cfg.truncation, n_points=2 * cfg.n_points,
            pv_excision=cfg.pv_excision, contour_shift=cfg.contour_shift,
        )

    p1_tab = np.empty((grid.n_x, grid.n_t, 2 * grid.n_x))

    def fill_row(i: int) -> None:
        x0 = float(grid.x_nodes[i])
        for k, x1 in enumerate(x_all):
            x1 = float(x1)
            try:
                col = np.empty(grid.n_t)
                if vg_route:
                    if (~small).any():
                        col[~small] = p1_vg(lsbm, x0, s_all[~small], x1, cfg)
                    for j in np.nonzero(small)[0]:
                        col[j] = p1_vg_plancherel(lsbm, x0, float(s_all[j]), x1, cfg)
                else:
                    if (~small).any():
                        col[~small] = p1_generic(lsbm, x0, s_all[~small], x1, cfg)
                    if small.any():
                        col[small] = p1_generic(lsbm, x0, s_all[small], x1, cfg_fine)
            except AccuracyError as exc:
                raise AccuracyError(
                    f"kernel table build failed at x0={x0}, x1={x1}: {exc}",
                    residual=exc.residual,
                ) from exc
            p1_tab[i, :, k] = col

    threads = _thread_count()
    if threads == 1:
        for i in range(grid.n_x):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(grid.n_x)))

    w = grid.cell_weights
    q1 = p1_tab[:, :, : grid.n_x] @ w[: grid.n_x]
    table = KernelTable(grid=grid, p1=p1_tab, q1=q1)

    # discretized row mass can exceed 1 slightly on coarse grids even though
    # the true kernel is sub-probabilistic; only a gross overshoot is fatal
    mass = grid.dt * np.einsum("ijk,k->i", p1_tab, w)
    if np.any(mass > 1.05):
        i = int(np.argmax(mass))
        raise ResolutionError(
            f"kernel row at x0={grid.x_nodes[i]} carries mass {mass[i]:.6f}; "
            "the grid or quadrature budget is inconsistent with the model"
        )
    if np.any(mass > 1 + 1e-3):
        i = int(np.argmax(mass))
        warnings.warn(
            f"kernel row at x0={grid.x_nodes[i]:g} carries discretized mass "
            f"{mass[i]:.4f} > 1; refine n_x/n_t if the iterates matter near it",
            stacklevel=2,
        )
    return table


def contraction_estimate(table: KernelTable, grid: SpaceTimeGrid) -> float:
    """Upper bound max_i of the per-row mass returning to the positive side.

    The iteration error contracts geometrically at this rate; a value >= 1
    means the grid cannot certify convergence.
    """
    w_pos = grid.cell_weights[grid.n_x :]
    mass = grid.dt * np.einsum("ijk,k->i", table.p1[:, :, grid.n_x :], w_pos)
    c_hat = float(mass.max())
    if c_hat >= 1.0:
        raise ResolutionError(
            f"contraction estimate {c_hat:.6f} >= 1: model and grid are inconsistent"
        )
    return c_hat


def l1_distance(f, g, grid: SpaceTimeGrid) -> float:
    """Midpoint-rule L1 distance between two time-slice vectors."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (grid.n_t,) or g.shape != (grid.n_t,):
        raise ValueError(
            f"expected shape ({grid.n_t},), got {f.shape} and {g.shape}"
        )
    return float(grid.dt * np.sum(np.abs(f - g)))


@dataclass
class DensitySeries:
    """Successive approximations of the first-passage density.

    marginals[i] is the i-th iterate sampled on grid.t_mid; joints[i] the
    matching (time, overshoot) joint density on the nonpositive half of
    the space grid.  l1_steps[i-1] is the L1 gap between consecutive
    marginals, c_hat the contraction estimate that bounds the remaining
    error geometrically, and stopped records which rule ended the run.
    """

    marginals: list[np.ndarray] = field(default_factory=list)
    joints: list[np.ndarray] = field(default_factory=list)
    l1_steps: list[float] = field(default_factory=list)
    c_hat: float = float("nan")
    stopped: str = "cap"


def iterate(table: KernelTable, grid: SpaceTimeGrid, x0_index: int,
            n_iter: int, tol: float = 1e-4) -> DensitySeries:
    """Produce up to n_iter kernel iterates starting from p_1.

    The recursion advances every start row at once: the iterate from y
    feeds the kernel row of y, summed over positive nodes with the cell
    weights and convolved in time, so the state is the full
    (start, time, overshoot) tensor supported on x <= 0.  Stops early once
    the L1 step between consecutive marginals of the x0 row drops below
    tol (pass 0 to always run the full cap).  The first series element is
    p_1 itself.
    """
    if not 1 <= n_iter <= 64:
        raise ValueError(f"n_iter must lie in [1, 64], got {n_iter}")
    if not 0 <= x0_index < grid.n_x:
        raise ValueError(f"x0_index {x0_index} outside [0, {grid.n_x})")
    if table.grid is not grid and not np.array_equal(table.grid.all_nodes, grid.all_nodes):
        raise ValueError("table was built on a different grid")
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")

    n_t, n_x = grid.n_t, grid.n_x
    dt = grid.dt
    w = grid.cell_weights
    w_neg, w_pos = w[:n_x], w[n_x:]

    L = 1
    while L < 2 * n_t:
        L *= 2
    # kernel factor: weighted positive columns, transformed once
    a_f = np.fft.rfft(table.p1[:, :, n_x:] * w_pos[None, None, :], n=L, axis=1)
    p1_neg = table.p1[:, :, :n_x]

    series = DensitySeries()
    state = p1_neg.copy()                       # (n_x, n_t, n_x), x <= 0
    series.joints.append(state[x0_index].copy())
    series.marginals.append(state[x0_index] @ w_neg)

    zero = np.zeros((n_x, 1, n_x))
    for it in range(1, n_iter):
        b_f = np.fft.rfft(state, n=L, axis=1)
        h = np.einsum("ify,yfk->ifk", a_f, b_f)
        c = np.fft.irfft(h, n=L, axis=1)[:, :n_t]
        conv = (dt / 2) * (c + np.concatenate((zero, c[:, :-1]), axis=1))
        state = p1_neg + conv
        if not np.all(np.isfinite(state)):
            raise NumericalError(
                f"non-finite joint density at iteration {it}", iteration=it
            )
        marginal = state[x0_index] @ w_neg
        series.joints.append(state[x0_index].copy())
        series.marginals.append(marginal)
        step = l1_distance(marginal, series.marginals[-2], grid)
        series.l1_steps.append(step)
        if tol > 0 and step < tol:
            series.stopped = "tol"
            break

    series.c_hat = contraction_estimate(table, grid)
    return series


def write_marginals_csv(series: DensitySeries, grid: SpaceTimeGrid, path: str) -> None:
    """CSV with the slice midpoints and one column per iterate marginal."""
    from .ioutil import atomic_write_text

    header = "t," + ",".join(f"p_star_{i + 1}" for i in range(len(series.marginals)))
    lines = [header]
    t = grid.t_mid
    for j in range(grid.n_t):
        row = [repr(float(t[j]))] + [repr(float(m[j])) for m in series.marginals]
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")

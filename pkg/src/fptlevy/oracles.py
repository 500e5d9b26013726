"""Independent references: transition-operator iteration and Monte Carlo.

Both avoid the kernel quadratures entirely.  The finite-difference route
builds the one-step transition row by FFT inversion of the characteristic
function and iterates kill-and-convolve on a fine uniform grid; the Monte
Carlo route simulates the subordinated path at a fixed step and records
boundary crossings at step resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError
from .ioutil import write_csv
from .models import Exponential, LsbmSpec, NormalInverseGaussian, VarianceGamma, x_char_exponent

_MC_CHUNK = 8192


@dataclass(frozen=True)
class FdConfig:
    """Resolution of the transition-iteration reference."""

    n_t: int = 1000
    n_x: int = 10000
    X: float = 10.0

    def __post_init__(self):
        if self.n_t < 8:
            raise ValueError(f"n_t must be at least 8, got {self.n_t}")
        if self.n_x < 8 or self.n_x % 2:
            raise ValueError(f"n_x must be even and at least 8, got {self.n_x}")
        if not self.X > 0:
            raise ValueError(f"X must be positive, got {self.X}")


@dataclass(frozen=True)
class McConfig:
    """Path count, step, seed and horizon of the simulation reference."""

    n_paths: int = 100_000
    dt_sim: float = 1e-3
    seed: int = 7
    horizon: float = 5.0
    n_buckets: int = 50

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be positive, got {self.n_paths}")
        if not self.dt_sim > 0:
            raise ValueError(f"dt_sim must be positive, got {self.dt_sim}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.n_buckets < 1:
            raise ValueError(f"n_buckets must be positive, got {self.n_buckets}")


def transition_row(lsbm: LsbmSpec, dt: float, x_grid: np.ndarray) -> np.ndarray:
    """One-step transition masses on a uniform offset grid containing 0.

    Inverts the characteristic function with the displacement atom placed
    exactly on a node, clamps small negative ringing, and normalizes.  More
    than 1% clamped mass means the grid cannot resolve the step law.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.asarray(x_grid, dtype=float)
    n = len(x)
    if n < 8 or n % 2:
        raise ValueError("x_grid must have an even length of at least 8")
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx, rtol=1e-10, atol=0):
        raise ValueError("x_grid must be uniformly spaced")
    if abs(x[n // 2]) > 1e-9 * dx:
        raise ValueError("x_grid must contain 0 at its center node")

    du = 2 * np.pi / (n * dx)
    u = (np.arange(n) - n // 2) * du
    phi = np.exp(x_char_exponent(lsbm, u, dt))
    signs = np.where(np.arange(n) % 2, -1.0, 1.0)
    center_phase = -1.0 if (n // 2) % 2 else 1.0
    row = center_phase * signs * np.real(np.fft.fft(signs * phi)) / n

    neg = -row[row < 0].sum()
    total = row[row > 0].sum()
    if neg > 0.01 * total:
        raise ResolutionError(
            f"transition row has {neg / total:.2%} negative mass; "
            "the spatial grid is too coarse for this step"
        )
    row = np.maximum(row, 0.0)
    return row / row.sum()


@dataclass
class FdResult:
    t: np.ndarray            # slice midpoints
    density: np.ndarray      # passage density at the midpoints
    survival: np.ndarray     # survival at the slice edges 0..T
    config: FdConfig


def fd_first_passage(lsbm: LsbmSpec, x0: float, T: float,
                     cfg: FdConfig | None = None) -> FdResult:
    """Kill-and-convolve iteration of the one-step transition law.

    The survival function is sampled at x0 after each step; its downward
    increments give the passage density at the step midpoints, matching the
    midpoint convention of the kernel iteration.
    """
    cfg = cfg or FdConfig()
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if not 0 < x0 < cfg.X:
        raise ValueError(f"x0 must lie in (0, X), got {x0}")
    n = cfg.n_x
    dx = 2 * cfg.X / n
    x = (np.arange(n) - n // 2) * dx
    dt = T / cfg.n_t

    row = transition_row(lsbm, dt, x)
    L = 1
    while L < 2 * n:
        L *= 2
    # backward step: f <- E[f(x + increment)], a correlation against the
    # row, so the kernel enters reversed; convolving forward instead would
    # propagate the sign-flipped process
    f_row = np.fft.rfft(row[::-1], n=L)

    f = (x > 0).astype(float)
    survival = np.empty(cfg.n_t + 1)
    survival[0] = np.interp(x0, x, f)
    for i in range(cfg.n_t):
        g = np.fft.irfft(np.fft.rfft(f, n=L) * f_row, n=L)[n // 2 - 1 : n // 2 - 1 + n]
        f = np.where(x > 0, g, 0.0)
        survival[i + 1] = np.interp(x0, x, f)

    density = np.maximum(-np.diff(survival) / dt, 0.0)
    t_mid = (np.arange(cfg.n_t) + 0.5) * dt
    return FdResult(t=t_mid, density=density, survival=survival, config=cfg)


@dataclass
class McResult:
    bucket_mid: np.ndarray
    bucket_density: np.ndarray
    bucket_density_se: np.ndarray
    edges: np.ndarray
    survival: np.ndarray     # P(t* > edge), one entry per edge
    survival_se: np.ndarray
    n_paths: int
    n_crossed: int
    config: McConfig


def _step_increments(lsbm: LsbmSpec, rng: np.random.Generator, dt: float, size: int):
    sub = lsbm.subordinator
    if isinstance(sub, VarianceGamma):
        d_T = rng.gamma(dt / sub.nu, sub.nu, size=size)
        if sub.b:
            d_T = d_T + sub.b * dt
    elif isinstance(sub, NormalInverseGaussian):
        mean = sub.gamma_t * dt / sub.beta_t
        lam = (sub.gamma_t * dt) ** 2
        d_T = rng.wald(mean, lam, size=size)
    elif isinstance(sub, Exponential):
        counts = rng.poisson(sub.c * dt, size=size)
        d_T = rng.gamma(counts, 1.0 / sub.a) + sub.b * dt
    else:
        raise ValueError(f"unknown subordinator type {type(sub)!r}")
    return lsbm.beta * d_T + np.sqrt(d_T) * rng.standard_normal(size)


def mc_first_passage(lsbm: LsbmSpec, x0: float,
                     cfg: McConfig | None = None) -> McResult:
    """Simulate paths and histogram the first crossing of zero.

    Crossings are only observed at step boundaries, which biases t* late by
    at most one step; dt_sim controls that bias.  Paths are simulated in
    fixed-size chunks seeded with seed XOR chunk_index, so results do not
    depend on scheduling or on how the total splits into chunks.
    """
    cfg = cfg or McConfig()
    n_steps = int(round(cfg.horizon / cfg.dt_sim))
    t_star = np.full(cfg.n_paths, np.inf)

    if x0 <= 0:
        t_star[:] = 0.0
    else:
        n_chunks = -(-cfg.n_paths // _MC_CHUNK)
        for c in range(n_chunks):
            lo = c * _MC_CHUNK
            hi = min(lo + _MC_CHUNK, cfg.n_paths)
            rng = np.random.default_rng(cfg.seed ^ c)
            pos = np.full(hi - lo, x0)
            idx = np.arange(hi - lo)
            for i in range(n_steps):
                pos = pos + _step_increments(lsbm, rng, cfg.dt_sim, len(pos))
                crossed = pos <= 0
                if crossed.any():
                    t_star[lo + idx[crossed]] = (i + 1) * cfg.dt_sim
                    keep = ~crossed
                    pos = pos[keep]
                    idx = idx[keep]
                    if not len(pos):
                        break

    edges = np.linspace(0.0, cfg.horizon, cfg.n_buckets + 1)
    counts, _ = np.histogram(t_star, bins=edges)
    width = edges[1] - edges[0]
    p_hat = counts / cfg.n_paths
    density = p_hat / width
    density_se = np.sqrt(p_hat * (1 - p_hat) / cfg.n_paths) / width
    surv = np.array([(t_star > e).mean() for e in edges])
    surv_se = np.sqrt(surv * (1 - surv) / cfg.n_paths)
    return McResult(
        bucket_mid=(edges[:-1] + edges[1:]) / 2,
        bucket_density=density,
        bucket_density_se=density_se,
        edges=edges,
        survival=surv,
        survival_se=surv_se,
        n_paths=cfg.n_paths,
        n_crossed=int(np.isfinite(t_star).sum()),
        config=cfg,
    )


def write_fd_csv(result: FdResult, path: str) -> None:
    write_csv(path, ["t", "density"], zip(result.t, result.density))


def write_mc_csv(result: McResult, path: str) -> None:
    write_csv(
        path,
        ["t_bucket", "survival", "stderr"],
        zip(result.edges, result.survival, result.survival_se),
    )

"""Special functions used by the passage-kernel integrands.

Exponential integral on the complex plane, the gamma function, and the
modified Bessel function of the second kind of real order.  Everything is
vectorized over numpy arrays because the kernel quadratures evaluate these
on node batches of a few hundred points at a time.

The exponential integral follows the convention

    Ei(w) = -E1(-w)            (E1 principal, cut on the negative real axis)

which agrees with the classical principal-value Ei on the real line and is
continuous from above onto the positive real axis elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import AccuracyError

_EULER = 0.57721566490153286061
# exp overflows float64 just above this; callers get an explicit error
# instead of a silent inf.
_EXP_MAX = 709.7


@dataclass(frozen=True)
class Accuracy:
    """Termination control for the series / continued-fraction evaluations."""

    rel_tol: float = 1e-10
    max_terms: int = 400

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-4:
            raise ValueError(f"rel_tol must be in (0, 1e-4], got {self.rel_tol}")
        if self.max_terms < 50:
            raise ValueError(f"max_terms must be at least 50, got {self.max_terms}")


_DEFAULT_ACC = Accuracy()


def _e1_series(z, acc):
    """E1 power series, z off the negative real axis, |z| small.

    E1(z) = -gamma - log(z) + sum_{k>=1} (-1)^{k+1} z^k / (k k!).
    Stable while |z| - Re z stays moderate; the region map in e1_scaled
    keeps it there.
    """
    z = np.asarray(z, dtype=complex)
    total = np.zeros_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, acc.max_terms + 1):
        term = term * (-z) / k
        contrib = -term / k
        total += np.where(active, contrib, 0.0)
        active &= np.abs(contrib) > acc.rel_tol * 1e-3 * (np.abs(total) + 1e-300)
        if not active.any():
            break
    else:
        raise AccuracyError(
            f"E1 series did not converge within {acc.max_terms} terms",
            residual=float(np.max(np.abs(term))),
        )
    return -_EULER - np.log(z) + total


def _e1_cf(z, acc):
    """Scaled continued fraction e^z E1(z) by the modified Lentz algorithm.

    e^z E1(z) = 1/(z+1-) 1^2/(z+3-) 2^2/(z+5-) ...
    Converges for z off the negative real axis; fastest for Re z > 0.
    """
    z = np.asarray(z, dtype=complex)
    tiny = 1e-300
    f = z + 1.0
    f = np.where(f == 0, tiny, f)
    c = f.copy()
    d = np.zeros_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, acc.max_terms + 1):
        a = -float(k * k)
        b = z + (2 * k + 1)
        d = b + a * d
        d = np.where(d == 0, tiny, d)
        c = b + a / c
        c = np.where(c == 0, tiny, c)
        d = 1.0 / d
        delta = c * d
        f = np.where(active, f * delta, f)
        active &= np.abs(delta - 1.0) > acc.rel_tol * 1e-4
        if not active.any():
            break
    else:
        raise AccuracyError(
            f"E1 continued fraction did not converge within {acc.max_terms} terms",
            residual=float(np.max(np.abs(delta - 1.0))),
        )
    return 1.0 / f


def _e1s_asymptotic(z, n_terms: int = 36):
    """Divergent tail expansion e^z E1(z) ~ (1/z) sum (-1)^k k!/z^k.

    At |z| >= 40 the smallest term is below 1e-16, so a fixed 36-term
    truncation is at machine precision for every direction off the cut.
    """
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(n_terms):
        total = total + term
        term = term * (-(k + 1.0)) / z
    return total / z


def _e1s_regions(z):
    """Partition into asymptotic / continued-fraction / series zones.

    The series has no sign cancellation near the negative real axis, which
    is exactly where the continued fraction stalls; the |z| + Re z gauge
    separates the two.
    """
    az = np.abs(z)
    asym = az >= 40.0
    cf = ~asym & (((z.real >= 1.0) & (az >= 1.5)) | ((az > 12.0) & (az + z.real > 9.0)))
    return asym, cf


def e1_scaled(z, acc: Accuracy | None = None):
    """Scaled exponential integral e^z E1(z) for z off (-inf, 0].

    The scaling keeps kernel tail integrands representable where e^z E1(z)
    is O(1/z) but the factors separately overflow.
    """
    acc = acc or _DEFAULT_ACC
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (z.real <= 0)):
        raise ValueError("e1_scaled is undefined on the negative real axis")
    out = np.empty(z.shape, dtype=complex)
    asym, cf = _e1s_regions(z)
    series = ~asym & ~cf
    if asym.any():
        out[asym] = _e1s_asymptotic(z[asym])
    if cf.any():
        out[cf] = _e1_cf(z[cf], acc)
    if series.any():
        zs = z[series]
        out[series] = np.exp(zs) * _e1_series(zs, acc)
    return out


def _ei_real_positive(x, acc):
    """Classical Ei on (0, inf): all-positive series, asymptotic beyond 40."""
    x = np.asarray(x, dtype=float)
    if np.any(x > _EXP_MAX):
        raise ValueError(f"expint_ei overflows float64 for real w > {_EXP_MAX}")
    out = np.empty(x.shape, dtype=float)
    small = x <= 40.0
    if small.any():
        xs = x[small]
        total = np.zeros_like(xs)
        term = np.ones_like(xs)
        # terms x^k/(k k!) are all positive, no cancellation at any size
        for k in range(1, 4 * acc.max_terms):
            term = term * xs / k
            contrib = term / k
            total += contrib
            if np.max(contrib / (total + 1e-300)) < 1e-17:
                break
        out[small] = _EULER + np.log(xs) + total
    big = ~small
    if big.any():
        xb = x[big]
        s = np.ones_like(xb)
        term = np.ones_like(xb)
        for k in range(1, 36):
            term = term * k / xb
            s += term
        out[big] = np.exp(xb) / xb * s
    return out


def expint_ei(w, acc: Accuracy | None = None):
    """Exponential integral Ei(w) = -E1(-w) on the complex plane.

    Real input gives the classical principal-value Ei and a real result.
    Satisfies expint_ei(conj(w)) == conj(expint_ei(w)) by construction.
    """
    acc = acc or _DEFAULT_ACC
    w_in = np.asarray(w)
    scalar = w_in.ndim == 0
    real_in = not np.iscomplexobj(w_in)
    w_arr = np.atleast_1d(w_in).astype(complex)
    if np.any(w_arr == 0):
        raise ValueError("expint_ei is singular at w = 0")

    out = np.empty(w_arr.shape, dtype=complex)
    pos = (w_arr.imag == 0) & (w_arr.real > 0)
    if pos.any():
        out[pos] = _ei_real_positive(w_arr[pos].real, acc)
    rest = ~pos
    if rest.any():
        wr = w_arr[rest]
        # Schwarz reflection: evaluate in the closed upper half plane only
        flip = wr.imag < 0
        wu = np.where(flip, wr.conj(), wr)
        ei = -np.exp(wu) * e1_scaled(-wu, acc)
        out[rest] = np.where(flip, ei.conj(), ei)

    if real_in:
        out = out.real
    if scalar:
        return out[()] if out.ndim == 0 else out[0]
    return out.reshape(w_in.shape)


def gamma_fn(x: float) -> float:
    """Gamma function for positive real arguments."""
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def bessel_k(order: float, x):
    """Modified Bessel function K_order(x) for real order, x > 0.

    Half-integer orders use the closed-form K_{1/2}, K_{3/2} seeds and the
    upward recurrence K_{v+1} = K_{v-1} + (2v/x) K_v, which is stable because
    K grows with order.  Other orders fall back to scipy.  K is even in the
    order, so only |order| matters.
    """
    if abs(order) > 200:
        raise ValueError(f"|order| > 200 is outside the validated range, got {order}")
    x_in = np.asarray(x, dtype=float)
    scalar = x_in.ndim == 0
    xa = np.atleast_1d(x_in)
    if np.any(xa <= 0):
        raise ValueError("bessel_k requires x > 0")

    d = abs(order)
    m = d - 0.5
    if abs(m - round(m)) < 1e-12 and round(m) >= 0:
        steps = int(round(m))
        k_lo = np.sqrt(np.pi / (2 * xa)) * np.exp(-xa)
        if steps == 0:
            out = k_lo
        else:
            k_hi = k_lo * (1.0 + 1.0 / xa)
            for j in range(1, steps):
                k_lo, k_hi = k_hi, k_lo + (2 * (j + 0.5) / xa) * k_hi
            out = k_hi
    else:
        out = _sp.kv(d, xa)

    if scalar:
        return float(out[0])
    return out.reshape(x_in.shape)

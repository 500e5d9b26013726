"""Levy-subordinated Brownian motion and its subordinator families.

The process is X_t = x0 + W_{T_t} + beta * T_t where T is a subordinator
with Laplace exponent psi, i.e. E[exp(-u T_t)] = exp(-t psi(u)).  Three
families are supported:

* Exponential jumps:   psi(u) = b u + u c / (a + u)
* Variance gamma:      psi(u) = b u + log(1 + nu u) / nu
* Normal inverse Gaussian: psi(u) = gamma_t (sqrt(beta_t^2 + 2u) - beta_t)

All exponents use the principal branch and satisfy psi(0) = 0.  Complex
arguments are accepted as long as they stay off the branch cut of the
family; that is what the kernel contour integrals rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedModelError

_FAMILY_KEY = "family"


def _is_complexish(u):
    return np.iscomplexobj(np.asarray(u))


@dataclass(frozen=True)
class Exponential:
    """Compound Poisson subordinator with Exp(a) jumps at rate c, drift b.

    Levy measure mu(dx) = a c exp(-a x) dx on (0, inf).
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.b < 0:
            raise ValueError(f"drift b must be nonnegative, got {self.b}")
        if not self.c > 0:
            raise ValueError(f"rate c must be positive, got {self.c}")

    def psi(self, u):
        u = np.asarray(u)
        if np.any(u == -self.a):
            raise ValueError(f"psi has a pole at u = -a = {-self.a}")
        return self.b * u + u * self.c / (self.a + u)

    def psi_prime(self, u):
        return self.b + self.c * self.a / (self.a + np.asarray(u)) ** 2


@dataclass(frozen=True)
class VarianceGamma:
    """Gamma subordinator with variance rate nu and drift b.

    T_t ~ Gamma(shape t/nu, scale nu) plus b t.
    """

    nu: float
    b: float = 0.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.b < 0:
            raise ValueError(f"drift b must be nonnegative, got {self.b}")

    def psi(self, u):
        u = np.asarray(u)
        w = 1 + self.nu * u
        if _is_complexish(u):
            if np.any((w.real <= 0) & (w.imag == 0)):
                raise ValueError("argument crosses the log branch cut 1 + nu*u <= 0")
            return self.b * u + np.log(w) / self.nu
        if np.any(w <= 0):
            raise ValueError("argument crosses the log branch cut 1 + nu*u <= 0")
        return self.b * u + np.log1p(self.nu * u) / self.nu

    def psi_prime(self, u):
        return self.b + 1.0 / (1 + self.nu * np.asarray(u))


@dataclass(frozen=True)
class NormalInverseGaussian:
    """Inverse Gaussian subordinator with parameters (beta_t, gamma_t).

    psi(u) = gamma_t (sqrt(beta_t^2 + 2u) - beta_t), principal square root.
    """

    beta_t: float
    gamma_t: float

    def __post_init__(self):
        if not self.beta_t > 0:
            raise ValueError(f"beta_t must be positive, got {self.beta_t}")
        if not self.gamma_t > 0:
            raise ValueError(f"gamma_t must be positive, got {self.gamma_t}")

    def psi(self, u):
        u = np.asarray(u)
        w = self.beta_t**2 + 2 * u
        if _is_complexish(u):
            if np.any((w.real <= 0) & (w.imag == 0)):
                raise ValueError("argument crosses the sqrt branch cut beta_t^2 + 2u <= 0")
        elif np.any(w < 0):
            raise ValueError("argument crosses the sqrt branch cut beta_t^2 + 2u <= 0")
        return self.gamma_t * (np.sqrt(w) - self.beta_t)

    def psi_prime(self, u):
        return self.gamma_t / np.sqrt(self.beta_t**2 + 2 * np.asarray(u))


Subordinator = Exponential | VarianceGamma | NormalInverseGaussian

_FAMILIES = {
    "exponential": (Exponential, ("a", "b", "c")),
    "variance_gamma": (VarianceGamma, ("nu", "b")),
    "normal_inverse_gaussian": (NormalInverseGaussian, ("beta_t", "gamma_t")),
}


@dataclass(frozen=True)
class LsbmSpec:
    """Subordinated Brownian motion X_t = x0 + W_{T_t} + beta T_t."""

    beta: float
    subordinator: Subordinator

    def __post_init__(self):
        if not isinstance(self.subordinator, (Exponential, VarianceGamma, NormalInverseGaussian)):
            raise ValueError(f"unknown subordinator type {type(self.subordinator)!r}")

    def alpha(self) -> float:
        """Exponential decay rate sqrt(2/nu + beta^2) of the VG jump density."""
        sub = self.subordinator
        if not isinstance(sub, VarianceGamma):
            raise UnsupportedModelError("alpha is defined for the variance gamma family only")
        return float(np.sqrt(2.0 / sub.nu + self.beta**2))


def laplace_exponent(spec: Subordinator | LsbmSpec, u):
    """psi(u) of the subordinator; accepts the wrapper spec for convenience."""
    sub = spec.subordinator if isinstance(spec, LsbmSpec) else spec
    out = sub.psi(u)
    if np.ndim(u) == 0:
        return complex(out) if _is_complexish(u) else float(out)
    return out


def x_char_exponent(lsbm: LsbmSpec, u, t: float):
    """Characteristic exponent of X_t - x0: E[e^{iu(X_t-x0)}] = exp of this.

    Equals -t psi(u^2/2 - i beta u); vectorized over u.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    u = np.asarray(u)
    arg = u * u / 2 - 1j * lsbm.beta * u
    out = -t * lsbm.subordinator.psi(arg)
    return complex(out) if np.ndim(u) == 0 else out


def levy_density_x(lsbm: LsbmSpec, y):
    """Levy density of the log-process X for families with one in closed form.

    Variance gamma (drift-free): rho(y) = exp(beta y - alpha |y|) / (nu |y|).
    Exponential jumps: an Esscher tilt of the subordinator jump law,
    rho(y) = c exp(beta y - g |y|) / g with g = sqrt(beta^2 + 2a).
    The NIG family has no elementary form here.
    """
    y_in = np.asarray(y, dtype=float)
    if np.any(y_in == 0):
        raise ValueError("the Levy density is singular at y = 0")
    sub = lsbm.subordinator
    beta = lsbm.beta
    if isinstance(sub, VarianceGamma):
        al = lsbm.alpha()
        out = np.exp(beta * y_in - al * np.abs(y_in)) / (sub.nu * np.abs(y_in))
    elif isinstance(sub, Exponential):
        g = np.sqrt(beta**2 + 2 * sub.a)
        out = sub.c * np.exp(beta * y_in - g * np.abs(y_in)) / g
    else:
        raise UnsupportedModelError(
            "levy_density_x has no closed form for the NIG family"
        )
    return float(out) if np.ndim(y) == 0 else out


def subordinator_to_json(sub: Subordinator) -> dict:
    for name, (cls, fields) in _FAMILIES.items():
        if isinstance(sub, cls):
            return {_FAMILY_KEY: name, **{f: getattr(sub, f) for f in fields}}
    raise ValueError(f"unknown subordinator type {type(sub)!r}")


def subordinator_from_json(obj: dict) -> Subordinator:
    if not isinstance(obj, dict):
        raise ValueError(f"expected a JSON object, got {type(obj)!r}")
    family = obj.get(_FAMILY_KEY)
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    cls, fields = _FAMILIES[family]
    extra = set(obj) - {_FAMILY_KEY} - set(fields)
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)} for family {family!r}")
    kwargs = {f: float(obj[f]) for f in fields if f in obj}
    missing = [f for f in fields if f not in obj and f != "b"]
    if missing:
        raise ValueError(f"missing keys {missing} for family {family!r}")
    return cls(**kwargs)


def lsbm_to_json(lsbm: LsbmSpec) -> dict:
    return {"beta": lsbm.beta, "subordinator": subordinator_to_json(lsbm.subordinator)}


def lsbm_from_json(obj: dict) -> LsbmSpec:
    if not isinstance(obj, dict):
        raise ValueError(f"expected a JSON object, got {type(obj)!r}")
    extra = set(obj) - {"beta", "subordinator"}
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)} in model object")
    if "beta" not in obj or "subordinator" not in obj:
        raise ValueError("model object requires 'beta' and 'subordinator'")
    return LsbmSpec(beta=float(obj["beta"]), subordinator=subordinator_from_json(obj["subordinator"]))

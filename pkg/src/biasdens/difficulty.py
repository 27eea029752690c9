"""Coefficient of difficulty for biased sampling.

For a density ``f`` and biasing function ``w`` the relative coefficient of
difficulty is

    RCDB = int f w  *  int_0^1 f / w  /  int_0^1 f,

with the first integral over the whole support of ``f``.  A biased sample of
size ``n`` carries the information of a direct sample of size ``n / RCDB``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable

import numpy as np

from .basis import (
    DEFAULT_QUADRATURE,
    DENSE_GRID,
    FINE_QUADRATURE,
    MAX_COEFF_INDEX,
    BiasSpec,
    DensityModel,
    Quadrature,
    SobolevSpec,
    project_coefficients,
    sobolev_seminorm,
)
from .errors import ConfigurationError

# seminorms below this are treated as zero
ROUNDOFF_RADIUS = 1e-10


@dataclass(frozen=True)
class DifficultyReport:
    mu: float
    rcdb: float
    i_f1: float
    i_fw: float
    mass01: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_cover(f: DensityModel, w: BiasSpec) -> None:
    if not w.covers(f.support):
        raise ConfigurationError(
            f"biasing function domain {w.domain} does not cover the support {f.support} of {f.label}"
        )


def _breaks(f: DensityModel, w: BiasSpec, a: float, b: float) -> list[float]:
    return [p for p in w.breakpoints if a < p < b]


def mu_true(f: DensityModel, w: BiasSpec, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """``mu(f) = E_f w(X)``, integrated over the support of ``f``."""
    _check_cover(f, w)
    a, b = f.support
    if w.is_constant:
        return w.params[0] * q.integrate(f, a, b)
    return q.integrate(lambda x: f(x) * w(x), a, b, _breaks(f, w, a, b))


def _unit_overlap(f: DensityModel) -> tuple[float, float] | None:
    a, b = max(0.0, f.support[0]), min(1.0, f.support[1])
    return (a, b) if a < b else None


def _unit_integrals(f: DensityModel, w: BiasSpec, q: Quadrature) -> tuple[float, float]:
    """``(int_0^1 f / w, int_0^1 f)``."""
    span = _unit_overlap(f)
    if span is None:
        raise ConfigurationError(f"density {f.label} puts no mass on [0, 1]")
    a, b = span
    if not w.covers(span):
        raise ConfigurationError(f"biasing function domain {w.domain} does not cover {span}")
    mass = q.integrate(f, a, b)
    if w.is_constant:
        inv = mass / w.params[0]
    else:
        inv = q.integrate(lambda x: f(x) / w(x), a, b, _breaks(f, w, a, b))
    return inv, mass


def rcdb(f: DensityModel, w: BiasSpec, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Relative coefficient of difficulty due to biasing."""
    mu = mu_true(f, w, q)
    inv, mass = _unit_integrals(f, w, q)
    return mu * inv / mass


def default_sobolev_radius(f: DensityModel, m: int, q: Quadrature = FINE_QUADRATURE) -> float:
    """Sobolev seminorm of the first ``MAX_COEFF_INDEX`` projected coefficients.

    Raises :class:`ConfigurationError` when the seminorm is at round-off
    level (e.g. the uniform density), where no positive default exists.
    """
    Q = sobolev_seminorm(project_coefficients(f, MAX_COEFF_INDEX, q), m)
    if not Q > ROUNDOFF_RADIUS:
        raise ConfigurationError(
            f"density {f.label} has Sobolev seminorm {Q:.3g} (zero up to round-off); pass Q explicitly"
        )
    return Q


def sharp_constant_i_f1(s: SobolevSpec, mass01: float = 1.0) -> float:
    """``Q^(-1/2m) pi (m+1) / m (2m+1)^(-1/2m) / int_0^1 f``."""
    m = s.m
    return s.Q ** (-1.0 / (2 * m)) * (math.pi * (m + 1) / m * (2 * m + 1) ** (-1.0 / (2 * m))) / mass01


def coefficient_of_difficulty(f: DensityModel, w: BiasSpec, s: SobolevSpec,
                              q: Quadrature = DEFAULT_QUADRATURE) -> DifficultyReport:
    mu = mu_true(f, w, q)
    inv, mass = _unit_integrals(f, w, q)
    ratio = mu * inv / mass
    i_f1 = sharp_constant_i_f1(s, mass)
    return DifficultyReport(mu=mu, rcdb=ratio, i_f1=i_f1, i_fw=i_f1 / ratio, mass01=mass)


def equivalent_biased_n(n_direct: int, rcdb_value: float) -> int:
    """Biased sample size matching ``n_direct`` direct observations.

    ``n_direct * rcdb`` rounded half away from zero.  The product is formed
    in decimal arithmetic on the shortest repr of ``rcdb`` so that e.g.
    ``25 * 1.74`` is exactly 43.5 and rounds to 44.
    """
    if not rcdb_value > 0:
        raise ConfigurationError(f"RCDB must be positive, got {rcdb_value!r}")
    prod = Decimal(int(n_direct)) * Decimal(repr(float(rcdb_value)))
    return int(prod.to_integral_value(rounding=ROUND_HALF_UP))


def biasing_from_average_risk(a: Callable, nodes: int = DENSE_GRID) -> BiasSpec:
    """Biasing function ``w = a^(-1/2)`` minimizing an ``a``-weighted average risk.

    Constant ``a`` gives a constant bias; otherwise ``w`` is tabulated on
    ``nodes`` equispaced points of [0, 1] and interpolated linearly.
    """
    y = np.linspace(0.0, 1.0, nodes)
    vals = np.asarray(a(y), dtype=np.float64)
    if vals.ndim == 0:
        vals = np.full_like(y, float(vals))
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
        k = int(np.argmin(np.where(np.isfinite(vals), vals, -np.inf)))
        raise ConfigurationError(f"average-risk weight must be positive, got a({y[k]:.6g}) = {vals[k]:.6g}")
    w = vals ** -0.5
    if np.all(vals == vals[0]):
        return BiasSpec.constant(float(w[0]))
    return BiasSpec.table(y, w)

"""Cosine basis on [0, 1], quadrature, densities and biasing functions.

The basis is ``phi_0(u) = 1`` and ``phi_j(u) = sqrt(2) cos(pi j u)`` for
``j >= 1``.  Densities and biasing functions are vectorized callables so
that quadrature, sampling and estimation can evaluate them on whole grids.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, NumericError, ValidationError
from .kernels import cosine_series

ROOT2 = math.sqrt(2.0)

# hard cap on the index of a coefficient-defined density
MAX_COEFF_INDEX = 256
# nodes used for bias validation, grid suprema and sampling CDF tables
DENSE_GRID = 4097


def _as_unit_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        bad = arr[~((arr >= 0.0) & (arr <= 1.0))].ravel()
        raise DomainError(f"basis argument outside [0, 1]: {bad[0]!r}")
    return arr


def phi(j: int, x):
    """Cosine basis function ``phi_j`` evaluated at ``x`` (scalar or array)."""
    if j < 0 or int(j) != j:
        raise DomainError(f"basis index must be a nonnegative integer, got {j!r}")
    arr = _as_unit_array(x)
    if j == 0:
        out = np.ones_like(arr)
    else:
        out = ROOT2 * np.cos(np.pi * j * arr)
    return float(out) if out.ndim == 0 else out


def evaluate_series(coeffs: Sequence[float], x):
    """Evaluate ``sum_j coeffs[j] * phi_j(x)``."""
    arr = _as_unit_array(x)
    c = np.ascontiguousarray(coeffs, dtype=np.float64)
    out = cosine_series(c, np.ascontiguousarray(arr.ravel())).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def sobolev_seminorm(coeffs: Sequence[float], m: int) -> float:
    """Return ``sum_{j>=1} (pi j)^(2m) coeffs[j]^2``."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.size <= 1:
        return 0.0
    j = np.arange(1, c.size, dtype=np.float64)
    return float(np.sum((np.pi * j) ** (2 * m) * c[1:] ** 2))


@dataclass(frozen=True)
class SobolevSpec:
    m: int = 1
    Q: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ConfigurationError(f"smoothness m must be a positive integer, got {self.m!r}")
        if not (self.Q > 0 and math.isfinite(self.Q)):
            raise ConfigurationError(f"ellipsoid radius Q must be positive, got {self.Q!r}")


def _eval_vectorized(g: Callable, x: np.ndarray) -> np.ndarray:
    y = g(x)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != x.shape:
        if y.ndim == 0:
            y = np.full(x.shape, float(y))
        else:
            y = np.array([float(g(t)) for t in x])
    return y


def simpson_rule(a: float, b: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite Simpson rule with ``nodes`` points."""
    if nodes < 3 or nodes % 2 == 0:
        raise ConfigurationError(f"Simpson rule needs an odd node count >= 3, got {nodes}")
    x = np.linspace(a, b, nodes)
    h = (b - a) / (nodes - 1)
    w = np.full(nodes, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return x, w * (h / 3.0)


@dataclass(frozen=True)
class Quadrature:
    """Composite Simpson rule with a Richardson doubling check.

    ``integrate`` evaluates the rule with ``nodes`` points and again with the
    panel count doubled; if the two disagree by more than
    ``max(tol, rtol * |value|)`` a :class:`NumericError` is raised, otherwise
    the refined value is returned.
    """

    nodes: int = 1025
    tol: float = 1e-8
    check: bool = True
    rtol: float = 0.0

    def __post_init__(self):
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise ConfigurationError(f"node count must be odd and >= 3, got {self.nodes}")
        if not self.tol > 0:
            raise ConfigurationError("quadrature tolerance must be positive")

    def _pieces(self, a, b, breakpoints):
        pts = {float(a), float(b)}
        pts.update(float(p) for p in breakpoints if a < p < b)
        return sorted(pts)

    def integrate(self, g: Callable, a: float, b: float, breakpoints: Sequence[float] = ()) -> float:
        if not a < b:
            raise ConfigurationError(f"integration bounds must satisfy a < b, got ({a}, {b})")
        pts = self._pieces(a, b, breakpoints)
        coarse = fine = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            xf, wf = simpson_rule(lo, hi, 2 * self.nodes - 1)
            yf = _eval_vectorized(g, xf)
            if not np.all(np.isfinite(yf)):
                bad = xf[~np.isfinite(yf)][0]
                raise NumericError(f"integrand is not finite at x={bad!r}")
            fine += float(yf @ wf)
            if self.check:
                _, wc = simpson_rule(lo, hi, self.nodes)
                coarse += float(yf[::2] @ wc)
        if self.check and abs(fine - coarse) > max(self.tol, self.rtol * abs(fine)):
            raise NumericError(
                f"quadrature did not converge on [{a}, {b}]: "
                f"nodes={self.nodes} gives {coarse!r}, doubled gives {fine!r}, "
                f"difference {abs(fine - coarse):.3e} > tol {self.tol:.1e}"
            )
        return fine


DEFAULT_QUADRATURE = Quadrature()
# projections up to MAX_COEFF_INDEX of densities with nonzero endpoint slope
FINE_QUADRATURE = Quadrature(nodes=8193)


def integrate(g: Callable, a: float, b: float, q: Quadrature = DEFAULT_QUADRATURE,
              breakpoints: Sequence[float] = ()) -> float:
    return q.integrate(g, a, b, breakpoints)


def _normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / ROOT2))


@dataclass(frozen=True, eq=False)
class DensityModel:
    """A density ``evaluator(x) / normalizer`` on the interval ``support``.

    ``evaluator`` is vectorized and need not integrate to one; it is never
    called outside ``support`` (the density is zero there).
    """

    kind: str
    support: tuple[float, float]
    evaluator: Callable[[np.ndarray], np.ndarray]
    normalizer: float
    name: str = ""
    coeffs: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        a, b = self.support
        if not a < b:
            raise ConfigurationError(f"density support must be a nondegenerate interval, got {self.support}")
        if not (self.normalizer > 0 and math.isfinite(self.normalizer)):
            raise ConfigurationError(f"normalizer must be positive, got {self.normalizer!r}")

    def __call__(self, x):
        arr = np.asarray(x, dtype=np.float64)
        flat = arr.ravel()
        out = np.zeros_like(flat)
        a, b = self.support
        inside = (flat >= a) & (flat <= b)
        if np.any(inside):
            out[inside] = _eval_vectorized(self.evaluator, flat[inside]) / self.normalizer
        out = out.reshape(arr.shape)
        return float(out) if out.ndim == 0 else out

    @property
    def label(self) -> str:
        return self.name or self.kind

    @classmethod
    def uniform(cls) -> "DensityModel":
        return cls("uniform", (0.0, 1.0), lambda x: np.ones_like(x), 1.0, name="uniform")

    @classmethod
    def truncated_normal(cls, mean: float, sd: float, support=(0.0, 1.0), kind="normal-corner",
                         name="") -> "DensityModel":
        if not sd > 0:
            raise ConfigurationError(f"standard deviation must be positive, got {sd!r}")
        a, b = support
        z = _normal_cdf((b - mean) / sd) - _normal_cdf((a - mean) / sd)
        scale = 1.0 / (sd * math.sqrt(2.0 * math.pi))

        def gauss(x):
            return scale * np.exp(-0.5 * ((x - mean) / sd) ** 2)

        return cls(kind, (float(a), float(b)), gauss, z, name=name or f"N({mean}, {sd}^2) on [{a}, {b}]")

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[float], strict: bool = True, name="") -> "DensityModel":
        """Density on [0, 1] given by a cosine series.

        The vector is rescaled so that its constant term is one.  With
        ``strict`` the series must be nonnegative on a dense grid; otherwise
        signed series are accepted (sampling clips the negative part).
        """
        c = np.array(coeffs, dtype=np.float64)
        if c.ndim != 1 or c.size == 0:
            raise ConfigurationError("coefficient vector must be a nonempty sequence")
        if c.size - 1 > MAX_COEFF_INDEX:
            raise ConfigurationError(f"coefficient index capped at {MAX_COEFF_INDEX}, got {c.size - 1}")
        if not np.all(np.isfinite(c)):
            raise ConfigurationError("coefficients must be finite")
        if not c[0] > 0:
            raise ConfigurationError("constant coefficient must be positive to define a density")
        c = c / c[0]
        c.setflags(write=False)
        if strict:
            grid = np.linspace(0.0, 1.0, DENSE_GRID)
            vals = cosine_series(c, grid)
            if vals.min() < -1e-12:
                y = grid[np.argmin(vals)]
                raise ConfigurationError(f"coefficient series is negative at x={y:.6g} ({vals.min():.3g})")

        def series(x):
            return cosine_series(c, np.ascontiguousarray(x, dtype=np.float64))

        return cls("coefficient-defined", (0.0, 1.0), series, 1.0, name=name or "series", coeffs=c)

    @cached_property
    def cdf_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Monotone CDF table on ``DENSE_GRID`` nodes over the support.

        Cumulative trapezoid of the density with negative values clipped to
        zero, renormalized to end at one.  Flat stretches are collapsed so the
        table can be inverted by linear interpolation.
        """
        a, b = self.support
        grid = np.linspace(a, b, DENSE_GRID)
        dens = np.maximum(self(grid), 0.0)
        steps = 0.5 * (dens[1:] + dens[:-1]) * np.diff(grid)
        cdf = np.concatenate([[0.0], np.cumsum(steps)])
        if not cdf[-1] > 0:
            raise ConfigurationError(f"density {self.label} has no positive mass to tabulate")
        cdf /= cdf[-1]
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        return grid[keep], cdf[keep]

    def cdf(self, x):
        grid, cdf = self.cdf_table
        return np.interp(x, grid, cdf, left=0.0, right=1.0)

    def quantile(self, u):
        grid, cdf = self.cdf_table
        return np.interp(u, cdf, grid)


CORNER_NAMES = ("uniform", "normal", "monotone")


def corner_density(name: str) -> DensityModel:
    """Named test density: ``uniform``, ``normal`` or ``monotone``.

    ``normal`` is N(0.5, 0.15^2) and ``monotone`` is N(2, 0.8^2), both
    truncated to [0, 1] and renormalized.  Repeated calls return the same
    object, so its CDF table is built once per process.
    """
    return _corner(name.strip().lower().removesuffix("-corner"))


@lru_cache(maxsize=None)
def _corner(key: str) -> DensityModel:
    if key == "uniform":
        return DensityModel.uniform()
    if key == "normal":
        return DensityModel.truncated_normal(0.5, 0.15, kind="normal-corner", name="normal")
    if key == "monotone":
        return DensityModel.truncated_normal(2.0, 0.8, kind="monotone-corner", name="monotone")
    raise ConfigurationError(f"unknown corner density {key!r}; expected one of {', '.join(CORNER_NAMES)}")


def project(f: DensityModel, j: int, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Fourier coefficient ``theta_j = int_0^1 f(u) phi_j(u) du``."""
    if j == 0:
        return q.integrate(f, 0.0, 1.0)
    return q.integrate(lambda u: f(u) * (ROOT2 * np.cos(np.pi * j * u)), 0.0, 1.0)


def project_coefficients(f: DensityModel, jmax: int = MAX_COEFF_INDEX,
                         q: Quadrature = FINE_QUADRATURE) -> np.ndarray:
    """Coefficients ``theta_0..theta_jmax`` of ``f`` (same rule as :func:`project`)."""
    xf, wf = simpson_rule(0.0, 1.0, 2 * q.nodes - 1)
    _, wc = simpson_rule(0.0, 1.0, q.nodes)
    fx = f(xf)
    if not np.all(np.isfinite(fx)):
        raise NumericError(f"density {f.label} is not finite on [0, 1]")
    j = np.arange(jmax + 1, dtype=np.float64)[:, None]
    basis = np.cos(np.pi * j * xf[None, :])
    basis[1:] *= ROOT2
    vals = basis * fx
    fine = vals @ wf
    if q.check:
        coarse = vals[:, ::2] @ wc
        err = np.abs(fine - coarse)
        if err.max() > q.tol:
            k = int(np.argmax(err))
            raise NumericError(f"coefficient {k} of {f.label} did not converge (difference {err[k]:.3e})")
    return fine


def squared_norm(f: Callable, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """``int_0^1 f(u)^2 du``."""
    return q.integrate(lambda u: np.asarray(f(u)) ** 2, 0.0, 1.0)


BIAS_KINDS = ("constant", "linear", "piecewise-linear-table")


@dataclass(frozen=True, eq=False)
class BiasSpec:
    """Strictly positive biasing function ``w`` on ``domain``.

    ``constant`` takes ``params = (c,)``, ``linear`` takes ``(a, b)`` for
    ``w(y) = a + b y``, and ``piecewise-linear-table`` takes the node
    abscissae followed by the node values.  Bounds ``c1 <= w <= c2`` are
    computed on a dense grid over the domain and the table breakpoints.
    """

    kind: str
    params: tuple[float, ...]
    domain: tuple[float, float] = (0.0, 1.0)
    c1: float = field(init=False)
    c2: float = field(init=False)

    def __post_init__(self):
        if self.kind not in BIAS_KINDS:
            raise ConfigurationError(f"unknown bias kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if not all(math.isfinite(p) for p in self.params):
            raise ConfigurationError("bias parameters must be finite")
        lo, hi = self.domain
        if not lo < hi:
            raise ConfigurationError(f"bias domain must be a nondegenerate interval, got {self.domain}")
        if self.kind == "constant":
            if len(self.params) != 1:
                raise ConfigurationError("constant bias takes exactly one parameter")
            vals, ys = np.array(self.params), np.array([lo if math.isfinite(lo) else 0.0])
        else:
            if self.kind == "linear" and len(self.params) != 2:
                raise ConfigurationError("linear bias takes two parameters a, b")
            if self.kind == "piecewise-linear-table":
                ys = self.nodes[0]
                if ys.size < 2 or np.any(np.diff(ys) <= 0):
                    raise ConfigurationError("bias table needs at least two strictly increasing y values")
                if (ys[0], ys[-1]) != (lo, hi):
                    raise ConfigurationError("bias table must span its declared domain")
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ConfigurationError(f"{self.kind} bias needs a finite domain")
            ys = np.union1d(np.linspace(lo, hi, DENSE_GRID), self.breakpoints)
            vals = self._raw(ys)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            k = int(np.argmin(vals))
            raise ValidationError(f"biasing function is not positive at y={ys[k]:.6g} (w={vals[k]:.6g})")
        object.__setattr__(self, "c1", float(vals.min()))
        object.__setattr__(self, "c2", float(vals.max()))

    @property
    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        half = len(self.params) // 2
        return np.array(self.params[:half]), np.array(self.params[half:])

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.kind == "piecewise-linear-table":
            return tuple(self.nodes[0])
        return ()

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def _raw(self, y: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.full(np.shape(y), self.params[0])
        if self.kind == "linear":
            a, b = self.params
            return a + b * y
        ys, ws = self.nodes
        return np.interp(y, ys, ws)

    def covers(self, interval: tuple[float, float]) -> bool:
        return self.domain[0] <= interval[0] and interval[1] <= self.domain[1]

    def __call__(self, y):
        arr = np.asarray(y, dtype=np.float64)
        lo, hi = self.domain
        if np.any(~((arr >= lo) & (arr <= hi))):
            bad = arr[~((arr >= lo) & (arr <= hi))].ravel()[0]
            raise DomainError(f"biasing function evaluated at y={bad!r} outside its domain {self.domain}")
        out = self._raw(arr)
        return float(out) if out.ndim == 0 else out

    def sup_on(self, interval: tuple[float, float]) -> float:
        """Supremum of ``w`` over ``interval`` on the dense grid (exact for constants)."""
        if self.is_constant:
            return self.params[0]
        a, b = interval
        ys = np.union1d(np.linspace(a, b, DENSE_GRID), [p for p in self.breakpoints if a <= p <= b])
        return float(np.max(self(ys)))

    def scaled(self, c: float) -> "BiasSpec":
        """The biasing function ``c * w``."""
        if not c > 0:
            raise ConfigurationError("scale factor must be positive")
        if self.kind == "piecewise-linear-table":
            ys, ws = self.nodes
            return BiasSpec(self.kind, tuple(ys) + tuple(c * ws), self.domain)
        return BiasSpec(self.kind, tuple(c * p for p in self.params), self.domain)

    def describe(self) -> str:
        if self.kind == "constant":
            return f"const:{self.params[0]:g}"
        if self.kind == "linear":
            return f"linear:{self.params[0]:g},{self.params[1]:g}"
        return f"table:{len(self.params) // 2} nodes on [{self.domain[0]:g}, {self.domain[1]:g}]"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params), "domain": list(self.domain),
                "c1": self.c1, "c2": self.c2}

    @classmethod
    def from_dict(cls, d: dict) -> "BiasSpec":
        return cls(d["kind"], tuple(d["params"]), tuple(d["domain"]))

    @classmethod
    def constant(cls, c: float = 1.0) -> "BiasSpec":
        return cls("constant", (c,), (-math.inf, math.inf))

    @classmethod
    def linear(cls, a: float, b: float, domain=(0.0, 1.0)) -> "BiasSpec":
        return cls("linear", (a, b), tuple(domain))

    @classmethod
    def table(cls, ys: Sequence[float], ws: Sequence[float]) -> "BiasSpec":
        ys = [float(v) for v in ys]
        ws = [float(v) for v in ws]
        if len(ys) != len(ws):
            raise ConfigurationError("bias table columns differ in length")
        if len(ys) < 2:
            raise ConfigurationError("bias table needs at least two rows")
        return cls("piecewise-linear-table", tuple(ys) + tuple(ws), (ys[0], ys[-1]))

    @classmethod
    def from_csv(cls, path) -> "BiasSpec":
        """Load a two-column ``y, w`` table (an optional header row is skipped)."""
        ys, ws = [], []
        with Path(path).open(newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) != 2:
                    raise ValidationError(f"{path}: line {i + 1} must have two columns")
                try:
                    y, w = float(row[0]), float(row[1])
                except ValueError:
                    if i == 0:
                        continue
                    raise ValidationError(f"{path}: line {i + 1} is not numeric") from None
                ys.append(y)
                ws.append(w)
        return cls.table(ys, ws)

"""Weighted statistics and cosine-series density estimators for biased data.

With observations ``Y_1..Y_n`` from ``g = w f / mu(f)``:

* ``mu_hat = n / sum 1/w(Y_l)`` uses every observation;
* ``theta_hat_j = mu_hat / n * sum 1(0<=Y_l<=1) phi_j(Y_l) / w(Y_l)``;
* ``d_hat = mu_hat^2 / n * sum 1(0<=Y_l<=1) / w(Y_l)^2``.

:func:`ep_estimate` is the data-driven blockwise-shrinkage estimator with
blocks of size ``k^2``, thresholds ``1/ln(k+1)`` and ``K = floor(n^(1/9) ln n)``
blocks.  :func:`pseudo_estimate` and :func:`linear_oracle` need the true
density and serve as test oracles.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .basis import (
    DEFAULT_QUADRATURE,
    BiasSpec,
    DensityModel,
    Quadrature,
    SobolevSpec,
    _as_unit_array,
    simpson_rule,
)
from .difficulty import mu_true, _unit_integrals
from .errors import ArgumentError, ConfigurationError
from .kernels import cosine_moments, cosine_series
from .sampling import BiasedSample


def _require(sample: BiasedSample, minimum: int = 1) -> None:
    if sample.n < minimum:
        if sample.n == 0:
            raise ArgumentError("sample is empty")
        raise ArgumentError(f"need at least {minimum} observations, got {sample.n}")


def _inverse_weights(sample: BiasedSample) -> np.ndarray:
    return 1.0 / np.asarray(sample.bias(sample.values), dtype=np.float64)


def mu_hat(sample: BiasedSample) -> float:
    """Harmonic-type mean ``n / sum 1/w(Y_l)`` over all observations."""
    _require(sample)
    return sample.n / float(np.sum(_inverse_weights(sample)))


def cox_cdf(sample: BiasedSample, x):
    """Weighted empirical CDF ``mu_hat / n * sum 1/w(Y_l) 1(Y_l <= x)``.

    Computed as a ratio of cumulative sums over the sorted sample, so it is
    exactly one for ``x >= max(Y)`` and equals the plain empirical CDF when
    ``w`` is constant.
    """
    _require(sample)
    order = np.argsort(sample.values, kind="stable")
    ys = sample.values[order]
    cum = np.cumsum(_inverse_weights(sample)[order])
    if sample.bias.is_constant:
        cum = np.arange(1, sample.n + 1, dtype=np.float64)
    arr = np.asarray(x, dtype=np.float64)
    k = np.searchsorted(ys, arr, side="right")
    out = np.where(k > 0, cum[np.maximum(k - 1, 0)] / cum[-1], 0.0)
    return float(out) if out.ndim == 0 else out


def _unit_mask(sample: BiasedSample) -> np.ndarray:
    return (sample.values >= 0.0) & (sample.values <= 1.0)


def fourier_hats(sample: BiasedSample, jmax: int, mu: float | None = None) -> np.ndarray:
    """Coefficient estimates ``theta_hat_0..theta_hat_jmax``.

    Passing ``mu`` replaces ``mu_hat`` by a known value (the unbiased
    statistic used in the risk analysis).
    """
    _require(sample)
    if jmax < 0:
        raise ArgumentError("jmax must be nonnegative")
    scale = mu_hat(sample) if mu is None else float(mu)
    inside = _unit_mask(sample)
    y = np.ascontiguousarray(sample.values[inside])
    v = np.ascontiguousarray(_inverse_weights(sample)[inside])
    return scale / sample.n * cosine_moments(y, v, int(jmax))


def fourier_hat(sample: BiasedSample, j: int) -> float:
    return float(fourier_hats(sample, j)[j])


def d_hat(sample: BiasedSample) -> float:
    """``mu_hat^2 / n * sum 1(0<=Y_l<=1) / w(Y_l)^2``."""
    _require(sample)
    iw = _inverse_weights(sample)[_unit_mask(sample)]
    return mu_hat(sample) ** 2 / sample.n * float(np.sum(iw * iw))


@dataclass(frozen=True)
class CoxStats:
    mu_hat: float
    d_hat: float
    theta_hat: np.ndarray
    n: int


def cox_stats(sample: BiasedSample, jmax: int) -> CoxStats:
    return CoxStats(mu_hat(sample), d_hat(sample), fourier_hats(sample, jmax), sample.n)


@dataclass(frozen=True)
class BlockScheme:
    """Blocks ``G_k`` of consecutive indices with ``|G_k| = k^2`` starting at 1."""

    K: int
    blocks: tuple[range, ...]
    thresholds: tuple[float, ...]

    @property
    def j_max(self) -> int:
        return self.K * (self.K + 1) * (2 * self.K + 1) // 6


def n_blocks(n: int) -> int:
    return max(1, math.floor(n ** (1.0 / 9.0) * math.log(n)))


def block_scheme(n: int) -> BlockScheme:
    if n < 2:
        raise ArgumentError(f"block scheme needs n >= 2, got {n}")
    K = n_blocks(n)
    blocks = []
    start = 1
    for k in range(1, K + 1):
        blocks.append(range(start, start + k * k))
        start += k * k
    return BlockScheme(K, tuple(blocks), tuple(1.0 / math.log(k + 1) for k in range(1, K + 1)))


@dataclass(frozen=True, eq=False)
class SeriesEstimate:
    """Cosine-series estimate on [0, 1].

    With ``nonnegative`` set the series is clipped at zero and rescaled so
    its mass equals ``coeffs[0]``; ``mass_scale`` holds that factor.
    """

    coeffs: np.ndarray
    estimator: str
    n: int
    scheme: BlockScheme | None = None
    weights: tuple[float, ...] = ()
    nonnegative: bool = False
    mass_scale: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x):
        arr = _as_unit_array(x)
        vals = cosine_series(self.coeffs, np.ascontiguousarray(arr.ravel())).reshape(arr.shape)
        if self.nonnegative:
            vals = np.maximum(vals, 0.0) * self.mass_scale
        return float(vals) if vals.ndim == 0 else vals

    @property
    def K(self) -> int:
        return self.scheme.K if self.scheme is not None else 0

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "n": self.n,
            "K": self.K,
            "coeffs": [float(c) for c in self.coeffs],
            "weights": [float(w) for w in self.weights],
            "nonnegative": self.nonnegative,
            **self.extra,
        }

    def to_json(self, path, config: dict | None = None) -> None:
        data = self.to_dict()
        if config is not None:
            data["config"] = config
        Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "SeriesEstimate":
        est = cls(d["coeffs"], d["estimator"], d["n"], weights=tuple(d.get("weights", ())))
        if d.get("nonnegative"):
            return _nonnegative_projection(est)
        return est

    def grid_values(self, grid_size: int) -> tuple[np.ndarray, np.ndarray]:
        x = np.linspace(0.0, 1.0, grid_size)
        return x, self(x)

    def to_csv(self, path, grid_size: int) -> None:
        x, fx = self.grid_values(grid_size)
        with Path(path).open("w") as fh:
            fh.write("x,f_hat\n")
            for a, b in zip(x, fx):
                fh.write(f"{float(a)!r},{float(b)!r}\n")


def _nonnegative_projection(est: SeriesEstimate, q: Quadrature = DEFAULT_QUADRATURE) -> SeriesEstimate:
    x, wq = simpson_rule(0.0, 1.0, 2 * q.nodes - 1)
    clipped = np.maximum(cosine_series(est.coeffs, x), 0.0)
    mass = float(clipped @ wq)
    target = float(est.coeffs[0])
    scale = target / mass if mass > 0 else 0.0
    return SeriesEstimate(est.coeffs, est.estimator, est.n, est.scheme, est.weights,
                          nonnegative=True, mass_scale=scale, extra=est.extra)


def shrink_blocks(theta: np.ndarray, d: float, n: int, scheme: BlockScheme) -> tuple[np.ndarray, tuple[float, ...]]:
    """Apply the blockwise shrinkage rule; returns coefficients and block weights.

    ``theta[0]`` is kept unshrunk.  Block ``k`` keeps weight
    ``1 - (d/n) / mean_k`` when its mean squared estimate ``mean_k`` exceeds
    ``(1 + t_k) d / n`` and is zeroed otherwise.
    """
    coeffs = np.zeros(scheme.j_max + 1)
    coeffs[0] = theta[0]
    noise = d / n
    weights = []
    for block, t in zip(scheme.blocks, scheme.thresholds):
        sl = slice(block.start, block.stop)
        energy = float(np.mean(theta[sl] ** 2))
        if energy > (1.0 + t) * noise:
            wk = 1.0 - noise / energy
            coeffs[sl] = wk * theta[sl]
        else:
            wk = 0.0
        weights.append(wk)
    return coeffs, tuple(weights)


def ep_estimate(sample: BiasedSample, project_nonnegative: bool = False) -> SeriesEstimate:
    """Adaptive blockwise-shrinkage estimate of ``f`` on [0, 1]."""
    _require(sample, 2)
    scheme = block_scheme(sample.n)
    theta = fourier_hats(sample, scheme.j_max)
    coeffs, weights = shrink_blocks(theta, d_hat(sample), sample.n, scheme)
    est = SeriesEstimate(coeffs, "ep", sample.n, scheme, weights)
    return _nonnegative_projection(est) if project_nonnegative else est


def naive_estimate(sample: BiasedSample, grid, project_nonnegative: bool = False) -> np.ndarray:
    """Estimate ``g`` ignoring the bias, then divide pointwise by ``w / mu_hat``."""
    _require(sample, 2)
    grid = _as_unit_array(grid)
    g_hat = ep_estimate(sample.with_bias(BiasSpec.constant(1.0)), project_nonnegative)
    return g_hat(grid) * mu_hat(sample) / sample.bias(grid)


def pseudo_cutoff(n: int, d_fw: float, s: SobolevSpec) -> int:
    """``ceil([n (2m+1)(m+1) Q / (d 2m (2 pi)^(2m))]^(1/(2m+1)))``."""
    m = s.m
    base = n / d_fw * (2 * m + 1) * (m + 1) * s.Q / (2 * m * (2 * math.pi) ** (2 * m))
    return math.ceil(base ** (1.0 / (2 * m + 1)))


def pseudo_weights(cutoff: int, m: int) -> np.ndarray:
    j = np.arange(cutoff + 1, dtype=np.float64)
    return 1.0 - (j / cutoff) ** m


def d_true(f: DensityModel, w: BiasSpec, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """``d(f, w) = mu(f) int_0^1 f / w``."""
    inv, _ = _unit_integrals(f, w, q)
    return mu_true(f, w, q) * inv


def pseudo_estimate(sample: BiasedSample, f: DensityModel, s: SobolevSpec,
                    q: Quadrature = DEFAULT_QUADRATURE) -> SeriesEstimate:
    """Smoothing-spline type pseudoestimate with known ``(f, m, Q)``."""
    _require(sample)
    cutoff = pseudo_cutoff(sample.n, d_true(f, sample.bias, q), s)
    lam = pseudo_weights(cutoff, s.m)
    theta = fourier_hats(sample, cutoff)
    return SeriesEstimate(lam * theta, "pseudo", sample.n, weights=tuple(lam),
                          extra={"J_star": cutoff, "m": s.m, "Q": s.Q})


def integer_cube_root(n: int) -> int:
    r = int(round(n ** (1.0 / 3.0)))
    while r ** 3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def linear_oracle(sample: BiasedSample, true_thetas: Sequence[float]) -> SeriesEstimate:
    """Shrink each ``theta_hat_j`` by ``theta_j^2 / (theta_j^2 + d_hat/n)`` for ``j <= n^(1/3)``."""
    _require(sample)
    top = integer_cube_root(sample.n)
    truth = np.zeros(top + 1)
    given = np.asarray(true_thetas, dtype=np.float64)[: top + 1]
    truth[: given.size] = given
    noise = d_hat(sample) / sample.n
    theta = fourier_hats(sample, top)
    sq = truth ** 2
    factor = np.divide(sq, sq + noise, out=np.zeros_like(sq), where=(sq + noise) > 0)
    return SeriesEstimate(factor * theta, "linear-oracle", sample.n, weights=tuple(factor))

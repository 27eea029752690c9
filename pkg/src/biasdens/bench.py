"""Monte Carlo ISE experiments: direct versus biased samples of equivalent size.

Replicate ``r`` of a paired experiment uses stream ``(base_seed, 2r)`` for
the direct arm and ``(base_seed, 2r + 1)`` for the biased arm, so the arms
are independent and every record is reproducible on its own.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .basis import (
    DEFAULT_QUADRATURE,
    MAX_COEFF_INDEX,
    BiasSpec,
    DensityModel,
    Quadrature,
    SobolevSpec,
    corner_density,
    project_coefficients,
    squared_norm,
)
from .difficulty import coefficient_of_difficulty, equivalent_biased_n, rcdb
from .errors import BiasdensError, ConfigurationError, NumericError
from .estimator import SeriesEstimate, ep_estimate
from .sampling import BiasedSample, SeedSpec, sample_biased, sample_direct

ARMS = ("direct-only", "biased-only", "paired-equivalence")


def ise(estimate: Callable, f_true: Callable, q: Quadrature | None = None) -> float:
    """Integrated squared error ``int_0^1 (estimate - f_true)^2``.

    The default rule is the 1025-node Simpson rule with a relative
    doubling criterion (see :func:`ise_quadrature`), refined to at least
    eight nodes per period of the highest cosine when ``estimate`` carries
    its coefficients.
    """
    if q is None:
        q = ise_quadrature(_nodes_for(estimate))
    return q.integrate(lambda x: (np.asarray(estimate(x)) - np.asarray(f_true(x))) ** 2, 0.0, 1.0)


def _nodes_for(estimate, base: int = 1025) -> int:
    coeffs = getattr(estimate, "coeffs", None)
    if coeffs is None:
        return base
    return max(base, 8 * (len(coeffs) - 1) + 1)


def ise_quadrature(nodes: int = 1025) -> Quadrature:
    # high-frequency estimates of ISE near 1 need a relative criterion
    return Quadrature(nodes=nodes, rtol=1e-6)


@dataclass(frozen=True)
class Truth:
    """Coefficients and squared norm of a density, for coefficient-space ISE."""

    theta: np.ndarray
    sq_norm: float

    @classmethod
    def of(cls, f: DensityModel) -> "Truth":
        return cls(project_coefficients(f, MAX_COEFF_INDEX), squared_norm(f))

    def ise(self, coeffs: np.ndarray) -> float:
        """Parseval ISE of a raw cosine series against the density."""
        c = np.asarray(coeffs, dtype=np.float64)
        k = min(c.size, self.theta.size)
        head = float(np.sum((c[:k] - self.theta[:k]) ** 2))
        extra = float(np.sum(c[k:] ** 2))
        tail = self.sq_norm - float(np.sum(self.theta[:k] ** 2))
        return head + extra + max(tail, 0.0)


@dataclass(frozen=True)
class ExperimentConfig:
    density: str
    bias: BiasSpec
    n_direct: int
    replications: int = 500
    base_seed: int = 0
    grid_size: int = 1025
    arms: str = "paired-equivalence"
    split_at: float | None = None
    rcdb_override: float | None = None
    project_nonnegative: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigurationError("replications must be at least 1")
        if self.grid_size < 101 or self.grid_size % 2 == 0:
            raise ConfigurationError("grid_size must be odd and at least 101")
        if self.arms not in ARMS:
            raise ConfigurationError(f"arms must be one of {ARMS}, got {self.arms!r}")
        if self.n_direct < 2:
            raise ConfigurationError("n_direct must be at least 2")
        if self.rcdb_override is not None and not self.rcdb_override > 0:
            raise ConfigurationError("rcdb override must be positive")

    def to_dict(self) -> dict:
        return {
            "density": self.density,
            "bias": self.bias.to_dict(),
            "n_direct": self.n_direct,
            "replications": self.replications,
            "base_seed": self.base_seed,
            "grid_size": self.grid_size,
            "arms": self.arms,
            "split_at": self.split_at,
            "rcdb_override": self.rcdb_override,
            "project_nonnegative": self.project_nonnegative,
        }


@dataclass(frozen=True)
class IseRecord:
    replicate: int
    arm: str
    n: int
    ise: float


@dataclass
class IseReport:
    records: list[IseRecord]
    config: dict
    rcdb: float | None
    arm_sizes: dict[str, int]
    split: float | None = None
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.split is None:
            self.split = self.pooled_mean()
        self.summary = {arm: self._summarize(arm) for arm in self.arm_sizes}

    def arm_values(self, arm: str) -> np.ndarray:
        return np.array([r.ise for r in self.records if r.arm == arm])

    def pooled_mean(self) -> float:
        return float(np.mean([r.ise for r in self.records]))

    def _summarize(self, arm: str) -> dict:
        v = self.arm_values(arm)
        return {
            "n": self.arm_sizes[arm],
            "count": int(v.size),
            "mean": float(np.mean(v)),
            "sd": float(np.std(v, ddof=1)) if v.size > 1 else 0.0,
            "count_le_split": int(np.sum(v <= self.split)),
            "count_gt_split": int(np.sum(v > self.split)),
        }

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rcdb": self.rcdb,
            "arm_sizes": self.arm_sizes,
            "split": self.split,
            "summary": self.summary,
            "records": [r.__dict__ for r in self.records],
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def write_records_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["replicate", "arm", "n", "ise"])
            for r in self.records:
                out.writerow([r.replicate, r.arm, r.n, repr(r.ise)])


def _arm_plan(cfg: ExperimentConfig, f: DensityModel) -> tuple[float | None, dict[str, int]]:
    if cfg.arms == "direct-only":
        return None, {"direct": cfg.n_direct}
    if cfg.arms == "biased-only":
        return None, {"biased": cfg.n_direct}
    ratio = cfg.rcdb_override if cfg.rcdb_override is not None else rcdb(f, cfg.bias)
    return ratio, {"direct": cfg.n_direct, "biased": equivalent_biased_n(cfg.n_direct, ratio)}


def _replicate(args) -> list[IseRecord]:
    cfg, r, sizes = args
    f = corner_density(cfg.density)
    q = ise_quadrature(cfg.grid_size)
    out = []
    for arm, n in sizes.items():
        if arm == "direct":
            stream = 2 * r
            sample = BiasedSample.direct(sample_direct(f, n, SeedSpec(cfg.base_seed, stream)),
                                         SeedSpec(cfg.base_seed, stream))
        else:
            stream = 2 * r + 1
            sample = sample_biased(f, cfg.bias, n, SeedSpec(cfg.base_seed, stream))
        try:
            est = ep_estimate(sample, cfg.project_nonnegative)
            err = ise(est, f, q)
        except BiasdensError as exc:
            raise type(exc)(f"replicate {r} ({arm} arm): {exc}") from exc
        out.append(IseRecord(r, arm, n, err))
    return out


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> IseReport:
    """Run all replicates and assemble an :class:`IseReport` ordered by replicate."""
    f = corner_density(cfg.density)
    ratio, sizes = _arm_plan(cfg, f)
    jobs = [(cfg, r, sizes) for r in range(cfg.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_replicate, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        chunks = [_replicate(job) for job in jobs]
    records = [rec for chunk in chunks for rec in chunk]
    return IseReport(records, cfg.to_dict(), ratio, sizes, split=cfg.split_at)


@dataclass(frozen=True)
class IseDensity:
    """Smoothed density of a group of ISE values, on ``[lo, hi]``."""

    lo: float
    hi: float
    estimate: SeriesEstimate

    def __call__(self, v):
        v = np.asarray(v, dtype=np.float64)
        u = np.clip((v - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return self.estimate(u) / (self.hi - self.lo)


@dataclass(frozen=True)
class TailGroup:
    count: int
    density: IseDensity | None
    omitted: bool


@dataclass(frozen=True)
class ArmTail:
    arm: str
    lower: TailGroup
    upper: TailGroup


MIN_GROUP = 5


def _group_density(values: np.ndarray) -> TailGroup:
    if values.size < MIN_GROUP:
        return TailGroup(int(values.size), None, True)
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        return TailGroup(int(values.size), None, True)
    u = (values - lo) / (hi - lo)
    est = ep_estimate(BiasedSample.direct(u))
    return TailGroup(int(values.size), IseDensity(lo, hi, est), False)


def ise_tail_split(report: IseReport, split: float | None = None) -> dict[str, ArmTail]:
    """Split each arm's ISEs at ``split`` (default: pooled mean) and smooth each group."""
    if not report.records:
        raise ConfigurationError("report has no records")
    cut = report.pooled_mean() if split is None else float(split)
    out = {}
    for arm in report.arm_sizes:
        v = report.arm_values(arm)
        out[arm] = ArmTail(arm, _group_density(v[v <= cut]), _group_density(v[v > cut]))
    return out


@dataclass(frozen=True)
class RateRow:
    n: int
    mise: float
    normalized: float
    se: float


def rate_check(f: DensityModel, w: BiasSpec, s: SobolevSpec, n_list: Sequence[int], reps: int,
               base_seed: int = 0, project_nonnegative: bool = False) -> list[RateRow]:
    """Monte Carlo MISE of the adaptive estimate over a sweep of sample sizes.

    ``normalized = (I_fw n)^(2m/(2m+1)) MISE``.  Sample size ``n_list[i]``,
    replicate ``r`` uses stream ``(base_seed, i * reps + r)``.  ISE is
    computed in coefficient space (Parseval) unless the estimate is
    projected to be nonnegative.
    """
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigurationError("n_list must be strictly increasing")
    if reps < 1:
        raise ConfigurationError("reps must be positive")
    report = coefficient_of_difficulty(f, w, s)
    truth = Truth.of(f)
    power = 2 * s.m / (2 * s.m + 1)
    rows = []
    for i, n in enumerate(ns):
        errs = np.empty(reps)
        for r in range(reps):
            seed = SeedSpec(base_seed, i * reps + r)
            if w.is_constant and w.params[0] == 1.0:
                sample = BiasedSample.direct(sample_direct(f, n, seed), seed)
            else:
                sample = sample_biased(f, w, n, seed)
            est = ep_estimate(sample, project_nonnegative)
            errs[r] = ise(est, f, ise_quadrature()) if project_nonnegative else truth.ise(est.coeffs)
        if not np.all(np.isfinite(errs)):
            raise NumericError(f"non-finite ISE at n={n}")
        mise = float(errs.mean())
        se = float(errs.std(ddof=1) / math.sqrt(reps)) if reps > 1 else float("nan")
        rows.append(RateRow(n, mise, (report.i_fw * n) ** power * mise, se))
    return rows


def write_rate_csv(path, rows: Sequence[RateRow]) -> None:
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["n", "mise", "normalized"])
        for row in rows:
            out.writerow([row.n, repr(row.mise), repr(row.normalized)])

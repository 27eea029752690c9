"""Seeded generation of direct and biased samples.

Every random stream in the package is a numpy ``PCG64`` generator seeded
through ``SeedSequence([base_seed, replicate_index])``.  That sequence is
spawned into two children: child 0 drives proposals (inverse-CDF draws from
``f``) and child 1 drives rejection decisions.  A direct sample is the
first ``n`` proposals of child 0, so with a constant biasing function the
biased sampler returns exactly the direct sample for the same seed.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import BiasSpec, DensityModel
from .errors import ConfigurationError, ValidationError

UINT64_MAX = 2**64 - 1
# multiplicative safety factor on the grid supremum of w
ENVELOPE_SAFETY = 1.0001
PROPOSAL_BUDGET = 1_000_000
MIN_ACCEPTANCE = 1e-4


@dataclass(frozen=True)
class SeedSpec:
    base_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.base_seed) <= UINT64_MAX:
            raise ConfigurationError(f"base seed must be an unsigned 64-bit integer, got {self.base_seed}")
        if int(self.replicate_index) < 0:
            raise ConfigurationError("replicate index must be nonnegative")

    def streams(self) -> tuple[np.random.Generator, np.random.Generator]:
        """(proposal, acceptance) generators for this replicate."""
        ss = np.random.SeedSequence([int(self.base_seed), int(self.replicate_index)])
        prop, acc = ss.spawn(2)
        return np.random.Generator(np.random.PCG64(prop)), np.random.Generator(np.random.PCG64(acc))

    def to_dict(self) -> dict:
        return {"base_seed": int(self.base_seed), "replicate_index": int(self.replicate_index)}


@dataclass(frozen=True, eq=False)
class BiasedSample:
    values: np.ndarray
    bias: BiasSpec
    seed: SeedSpec | None = None
    proposals: int | None = field(default=None, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64).ravel()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.size and not np.all(np.isfinite(vals)):
            raise ValidationError("sample contains non-finite values")

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def acceptance_rate(self) -> float | None:
        if not self.proposals:
            return None
        return self.n / self.proposals

    @classmethod
    def direct(cls, values, seed: SeedSpec | None = None) -> "BiasedSample":
        """Wrap direct observations as a sample biased by ``w = 1``."""
        return cls(values, BiasSpec.constant(1.0), seed)

    def with_bias(self, bias: BiasSpec) -> "BiasedSample":
        return BiasedSample(self.values, bias, self.seed, self.proposals)

    def sidecar(self) -> dict:
        out = {"n": self.n, "bias": self.bias.to_dict()}
        if self.seed is not None:
            out.update(self.seed.to_dict())
        return out


def sample_direct(f: DensityModel, n: int, seed: SeedSpec) -> np.ndarray:
    """``n`` i.i.d. draws from ``f`` by inversion of its tabulated CDF."""
    if n < 1:
        raise ConfigurationError(f"sample size must be positive, got {n}")
    prop, _ = seed.streams()
    return f.quantile(prop.random(n))


def sample_biased(f: DensityModel, w: BiasSpec, n: int, seed: SeedSpec) -> BiasedSample:
    """``n`` i.i.d. draws from ``g = w f / mu(f)`` by rejection from ``f``.

    A proposal ``X`` is accepted when ``U * w_max < w(X)``; ``w_max`` is the
    grid supremum of ``w`` over the support times ``ENVELOPE_SAFETY``
    (exact for constant ``w``).
    """
    if n < 1:
        raise ConfigurationError(f"sample size must be positive, got {n}")
    if not w.covers(f.support):
        raise ConfigurationError(f"biasing function domain {w.domain} does not cover support {f.support}")
    w_max = w.sup_on(f.support)
    if not w.is_constant:
        w_max *= ENVELOPE_SAFETY
    prop, acc = seed.streams()
    chunks = []
    have = 0
    used = 0
    rate = 0.5
    while have < n:
        need = n - have
        batch = int(min(PROPOSAL_BUDGET, max(64, math.ceil(1.2 * need / rate))))
        x = f.quantile(prop.random(batch))
        u = acc.random(batch)
        ok = u * w_max < w(x)
        k = int(ok.sum())
        if have + k >= n:
            idx = np.flatnonzero(ok)[n - have - 1]
            chunks.append(x[: idx + 1][ok[: idx + 1]])
            used += idx + 1
            have = n
            break
        chunks.append(x[ok])
        have += k
        used += batch
        rate = max(have / used, MIN_ACCEPTANCE)
        if used >= PROPOSAL_BUDGET and have / used < MIN_ACCEPTANCE:
            raise ConfigurationError(
                f"acceptance rate {have / used:.2e} below {MIN_ACCEPTANCE:g} after {used} proposals; "
                "biasing function is degenerate for this density"
            )
    return BiasedSample(np.concatenate(chunks), w, seed, used)


def write_sample_csv(path, values) -> None:
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["y"])
        for v in values:
            out.writerow([repr(float(v))])


def read_sample_csv(path) -> np.ndarray:
    """Read a single-column CSV with header ``y``."""
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or [c.strip() for c in rows[0]] != ["y"]:
        raise ValidationError(f"{path}: expected a single-column CSV with header 'y'")
    try:
        vals = np.array([float(r[0]) for r in rows[1:]], dtype=np.float64)
    except (ValueError, IndexError):
        raise ValidationError(f"{path}: non-numeric sample value") from None
    if vals.size == 0:
        raise ValidationError(f"{path}: sample is empty")
    if any(len(r) != 1 for r in rows[1:]):
        raise ValidationError(f"{path}: expected exactly one column")
    return vals


def write_sidecar(path, sample: BiasedSample, extra: dict | None = None) -> None:
    data = sample.sidecar()
    if extra:
        data.update(extra)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")

"""Density estimation from biased data.

Observations ``Y`` are drawn with density ``g(y) = w(y) f(y) / mu(f)``;
the goal is ``f`` on [0, 1].
"""
from .basis import (
    BiasSpec,
    DensityModel,
    Quadrature,
    SobolevSpec,
    corner_density,
    evaluate_series,
    integrate,
    phi,
    project,
    project_coefficients,
    sobolev_seminorm,
)
from .difficulty import (
    DifficultyReport,
    biasing_from_average_risk,
    coefficient_of_difficulty,
    equivalent_biased_n,
    mu_true,
    rcdb,
)
from .errors import (
    ArgumentError,
    BiasdensError,
    ConfigurationError,
    DomainError,
    NumericError,
    UsageError,
    ValidationError,
)
from .bench import (
    ExperimentConfig,
    IseRecord,
    IseReport,
    RateRow,
    Truth,
    ise,
    ise_tail_split,
    rate_check,
    run_experiment,
)
from .estimator import (
    BlockScheme,
    CoxStats,
    SeriesEstimate,
    block_scheme,
    cox_cdf,
    cox_stats,
    d_hat,
    ep_estimate,
    fourier_hat,
    fourier_hats,
    linear_oracle,
    mu_hat,
    naive_estimate,
    pseudo_estimate,
)
from .kernels import BACKEND
from .sampling import BiasedSample, SeedSpec, read_sample_csv, sample_biased, sample_direct, write_sample_csv

__version__ = "0.1.0"

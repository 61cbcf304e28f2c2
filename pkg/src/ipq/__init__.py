"""Sublinear estimation of bilinear forms and near-proportional entry sampling
under an inner-product query oracle."""

from __future__ import annotations

__version__ = "0.1.0"

from .bfe import BucketConfig, Estimate, bfe, bfe_with_lower_bound, bucket_index
from .config import Constants
from .errors import (
    AllZeroMatrix,
    DimensionError,
    ExhaustedFail,
    InvalidRange,
    IPQError,
    OverflowGuardError,
    ParseError,
    ZeroMass,
)
from .general import SimulatedOracle, bfe_general, sau_general, simulate_symmetric, simulate_weighted
from .instances import GraphInstance, gen_graph_family, gen_planted, gen_random_symmetric, gen_zero, graph_to_quadratic
from .matrix import BitRange, Matrix, WeightVector, exact_bilinear, exact_row_sum, load_matrix, read_matrix
from .oracle import PrefixOracle, QueryCounter, preprocess
from .randomness import RandomSource, enumerate_outcomes
from .regr import EntrySample, regr
from .sau import SauConfig, sample_heavy, sample_light, sau, sau_many

__all__ = [name for name in dir() if not name.startswith("_")]

"""Core numerical building blocks: streams, distributions, models, statistics."""

from weakgrad.core.distributions import (
    DecompositionTriple,
    Erlang,
    Exponential,
    Family,
    Gamma,
    Gaussian,
    ParametricDistribution,
    Weibull,
    decomposition,
    density,
    likelihood_ratio_weight,
    parse_distribution,
    sample,
    score,
)
from weakgrad.core.models import (
    InputVector,
    MM1Spec,
    ModelKind,
    ModelSpec,
    SANSpec,
    evaluate,
    mm1_spec,
    san_bridge_spec,
    substitute,
)
from weakgrad.core.rng_streams import REPLICATIONS_PER_BLOCK, ReplicationUniforms, StreamSpec, UniformStream, make_stream
from weakgrad.core.stats import CSV_COLUMNS, ComparisonVerdict, EstimateReport, compare, summarize

__all__ = [
    "CSV_COLUMNS",
    "ComparisonVerdict",
    "DecompositionTriple",
    "Erlang",
    "EstimateReport",
    "Exponential",
    "Family",
    "Gamma",
    "Gaussian",
    "InputVector",
    "MM1Spec",
    "ModelKind",
    "ModelSpec",
    "ParametricDistribution",
    "REPLICATIONS_PER_BLOCK",
    "ReplicationUniforms",
    "SANSpec",
    "StreamSpec",
    "UniformStream",
    "Weibull",
    "compare",
    "decomposition",
    "density",
    "evaluate",
    "likelihood_ratio_weight",
    "make_stream",
    "mm1_spec",
    "parse_distribution",
    "sample",
    "san_bridge_spec",
    "score",
    "substitute",
    "summarize",
]

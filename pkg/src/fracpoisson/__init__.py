"""State probabilities, simulation and cross-validation for fractional and
tempered Poisson counting processes."""

from .errors import (
    FracPoissonError,
    GridTooCoarse,
    InvalidParameter,
    NonConvergence,
    SamplingStall,
    ZeroConstantTerm,
)
from .pmf import (
    CompositeParams,
    GegenbauerParams,
    PmfTable,
    ProcessParams,
    composite_shift_pmf,
    gegenbauer_pmf,
    gegenbauer_ts_pmf,
    pmf_table,
    poisson_pmf,
    sfpp_pmf,
    tempered_sfpp_pmf,
    tempered_tsfpp_pmf,
    tfpp_pmf,
    tsfpp_pmf,
)
from .simulate import RngSpec, SampleSet, sample_process
from .specfun import SeriesConfig, gen_binomial, mittag_leffler, pochhammer, prabhakar_ml

__version__ = "0.1.0"

__all__ = [
    "FracPoissonError",
    "GridTooCoarse",
    "InvalidParameter",
    "NonConvergence",
    "SamplingStall",
    "ZeroConstantTerm",
    "CompositeParams",
    "GegenbauerParams",
    "PmfTable",
    "ProcessParams",
    "composite_shift_pmf",
    "gegenbauer_pmf",
    "gegenbauer_ts_pmf",
    "pmf_table",
    "poisson_pmf",
    "sfpp_pmf",
    "tempered_sfpp_pmf",
    "tempered_tsfpp_pmf",
    "tfpp_pmf",
    "tsfpp_pmf",
    "RngSpec",
    "SampleSet",
    "sample_process",
    "SeriesConfig",
    "gen_binomial",
    "mittag_leffler",
    "pochhammer",
    "prabhakar_ml",
]

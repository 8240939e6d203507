"""Numerical laboratory for invariant metrics and distances on domains in C^n.

Certified analytic-disc searches give upper bounds for the
Kobayashi-Royden metric and the Lempert function; decomposition and
chain ladders extend them to the m-th metrics, the Buseman metric, and
the m-th distances; difference-quotient traces estimate the derivatives
of those distances; closed-form oracles on the disc, polydisc, ball,
and balanced domains anchor every estimate.
"""

from .curves import (ParametricCurve, distance_length_ladder, example3_chain_experiment,
                     length_by_distance, length_by_metric, segment)
from .derivatives import (QuotientTrace, ShrinkSchedule, derivative_estimate,
                          make_balanced_kmap, prop2_check, theorem1_check,
                          underline_kappa)
from .discs import (AnalyticDisc, ContainmentCert, MetricEstimate, SearchConfig,
                    certify_disc, kobayashi_royden_upper, lempert_tanh, lempert_upper)
from .example3 import Example3Params, make_example3, singular_first_coords
from .geometry import (DomainModel, MinkowskiFunctional, gauge, make_model_domain,
                       sample_interior)
from .higher import (Chain, Decomposition, HigherConfig, HullFunctional,
                     hull_functional, kobayashi_buseman, kobayashi_distance,
                     make_hull_functional, mth_kobayashi, mth_lempert, oracle_metric)
from .oracles import (kappa_map, lempert_map, oracle_kappa, oracle_lempert)

__version__ = "0.1.0"

__all__ = [
    "AnalyticDisc", "Chain", "ContainmentCert", "Decomposition", "DomainModel",
    "Example3Params", "HigherConfig", "HullFunctional", "MetricEstimate",
    "MinkowskiFunctional", "ParametricCurve", "QuotientTrace", "SearchConfig",
    "ShrinkSchedule", "certify_disc", "derivative_estimate",
    "distance_length_ladder", "example3_chain_experiment", "gauge",
    "hull_functional", "kappa_map", "kobayashi_buseman", "kobayashi_distance",
    "kobayashi_royden_upper", "lempert_map", "lempert_tanh", "lempert_upper",
    "length_by_distance", "length_by_metric", "make_balanced_kmap",
    "make_example3", "make_hull_functional", "make_model_domain",
    "mth_kobayashi", "mth_lempert", "oracle_kappa", "oracle_lempert",
    "oracle_metric", "prop2_check", "sample_interior", "segment",
    "singular_first_coords", "theorem1_check", "underline_kappa",
]

"""Contagion analysis of binary traits on layered friendship-nomination networks."""

from importlib.metadata import PackageNotFoundError, version

from .errors import (AttributeTypeError, ConfigurationError, ConvergenceError,
                     DegenerateNullError, IngestError, NetContagionError, NumericError,
                     RankDeficiencyError, SeparationError, SizeError, UndefinedResultError,
                     UnknownNodeError)
from .graph import (CONTEXTS, LAYERS, Cohort, ContactNetwork, Nomination, Participant,
                    build_layers, build_network, homophily_fraction, popularity,
                    popularity_vector, positive_friend_count, same_attribute_edge_count)
from .ingest import load, parse_cohort, parse_nominations
from .descriptive import (cross_tab, popularity_by_category, representativeness_summary,
                          same_week_friend_proportion)
from .permutation import (category_transmission_test, exact_permutation_pvalue,
                          homophily_permutation_test, randomize_attributes)
from .logistic import fit_logistic
from .ergm import enumerate_dyads, fit_dyadic_ergm, simulate_dyadic_ergm
from .autocorr import build_weight_matrix, fit_autocorrelation, simulate_autocorrelation
from .exposure import carrier_vs_positive_friends, category_relative_risk
from .synthetic import CohortConfig, generate_cohort, survey_shaped_config, plant_contagion

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0+unknown"

__all__ = [
    "AttributeTypeError", "CONTEXTS", "Cohort", "CohortConfig", "ConfigurationError",
    "ContactNetwork", "ConvergenceError", "DegenerateNullError", "IngestError", "LAYERS",
    "NetContagionError", "Nomination", "NumericError", "Participant", "RankDeficiencyError",
    "SeparationError", "SizeError", "UndefinedResultError", "UnknownNodeError",
    "build_layers", "build_network", "build_weight_matrix", "carrier_vs_positive_friends",
    "category_relative_risk", "category_transmission_test", "cross_tab", "enumerate_dyads",
    "exact_permutation_pvalue", "fit_autocorrelation", "fit_dyadic_ergm", "fit_logistic",
    "generate_cohort", "homophily_fraction", "homophily_permutation_test", "load",
    "survey_shaped_config", "parse_cohort", "parse_nominations", "plant_contagion",
    "popularity", "popularity_by_category", "popularity_vector", "positive_friend_count",
    "randomize_attributes", "representativeness_summary", "same_attribute_edge_count",
    "same_week_friend_proportion", "simulate_autocorrelation", "simulate_dyadic_ergm",
]

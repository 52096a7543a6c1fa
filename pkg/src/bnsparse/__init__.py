"""Score-based structure learning of discrete Bayesian networks.

Implements the BDeu, BDs (Bayesian Dirichlet sparse), K2 and BIC scores,
the uniform and marginal uniform graph priors, greedy hill climbing, and a
simulation harness that compares them on a reference network.
"""

from .data import ContingencyTable, Dataset, VariableSchema, count_contingency, load_csv
from .graph import (
    Cpdag,
    Dag,
    Move,
    MoveKind,
    apply_move,
    enumerate_dags,
    exact_arc_probability,
    same_equivalence_class,
    shd,
    to_cpdag,
    topological_order,
)
from .model import Cpt, DiscreteBn, fit_parameters, forward_sample, log_likelihood, n_parameters
from .netio import parse_bif, read_native, read_network, write_native
from .priors import PriorKind, log_prior_ratio, u_marginal_approx
from .scores import (
    ScoreCache,
    ScoreConfig,
    ScoreKind,
    log_bdeu_local,
    log_bds_local,
    log_bic_local,
    log_k2_local,
    network_score,
    score_delta,
)
from .search import SearchOptions, SearchTrace, exhaustive_map, hill_climb

__version__ = "0.1.0"

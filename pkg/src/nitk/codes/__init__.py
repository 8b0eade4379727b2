"""Code machinery: evaluation, search, edge removal, binning, MDS pipelining, stacking."""

from .binning import BinningPlan, BinningReport, binning_coordination, binning_eta, binning_k
from .evaluation import (ErrorReport, GoodMessageSet, enumerate_paths, evaluate_modified_code,
                         exact_error_probability, good_message_set, monte_carlo_error_probability)
from .lemma1 import Lemma1Result, fix_pipe_content, lemma1_bound, lemma1_transform
from .mds import MDSCode, MDSPipelineSpec, MDSResult, mds_formula, mds_pipeline
from .oracle import brute_force_min_error
from .search import search_best_code
from .stacked import StackedSimReport, gamma_n, stacked_correction_sim

__all__ = [
    "BinningPlan",
    "BinningReport",
    "ErrorReport",
    "GoodMessageSet",
    "Lemma1Result",
    "MDSCode",
    "MDSPipelineSpec",
    "MDSResult",
    "StackedSimReport",
    "binning_coordination",
    "binning_eta",
    "binning_k",
    "brute_force_min_error",
    "enumerate_paths",
    "evaluate_modified_code",
    "exact_error_probability",
    "fix_pipe_content",
    "gamma_n",
    "good_message_set",
    "lemma1_bound",
    "lemma1_transform",
    "mds_formula",
    "mds_pipeline",
    "monte_carlo_error_probability",
    "search_best_code",
    "stacked_correction_sim",
]

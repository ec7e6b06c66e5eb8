"""N-gram selection for regex pre-filtering indexes.

Three selectors share one pipeline:

* :func:`select_free` picks prefix-minimal grams below a selectivity threshold;
* :func:`select_best` greedily maximizes covered (query, record) pairs per posting;
* :func:`select_lpms` rounds a per-length LP relaxation.

The chosen grams feed an :class:`InvertedIndex`; each query's required
literals compile to an AND/OR plan whose evaluation yields candidate records
that are then verified with a full regex engine.
"""

from .bench import Metrics, RunConfig, run, run_workload, verify
from .gram import GramStats, compute_stats, grams_of, selectivity
from .index_plan import ALL, InvertedIndex, build_index, compile_plan, evaluate_plan
from .regex_literal import RegexParseError, extract_literal_tree, literal_tree, parse
from .select_best import BestConfig, select_best
from .select_free import FreeConfig, select_free
from .select_lpms import LpmsConfig, select_lpms
from .selection import SelectionResult
from .workload import SyntheticSpec, Workload, generate_synthetic, load_workload

__all__ = [
    "ALL", "BestConfig", "FreeConfig", "GramStats", "InvertedIndex", "LpmsConfig",
    "Metrics", "RegexParseError", "RunConfig", "SelectionResult", "SyntheticSpec",
    "Workload", "build_index", "compile_plan", "compute_stats", "evaluate_plan",
    "extract_literal_tree", "generate_synthetic", "grams_of", "literal_tree",
    "load_workload", "parse", "run", "run_workload", "select_best", "select_free",
    "select_lpms", "selectivity", "verify",
]

__version__ = "0.1.0"

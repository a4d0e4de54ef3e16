"""Differentially private unfairness measures for tabular data."""

from .data_model import Attribute, Database, DataError, FairnessCriterion, Schema, load_criteria, load_csv
from .dp import laplace_sample, make_rng, relative_l1
from .maxsat import CnfInstance, SolverBudgetExceeded, brute_force, export_wdimacs, solve
from .mi_tvd import u_mi, u_tvd, u_tvd_dp
from .repair import build_cnf, chunked_repair_cost, repair, repair_cost, self_join, u_repair, u_repair_dp
from .synth import GapSpec, csp_gap, dp_gap, synth_polarized
from .topk import top_k, u_tc, u_tc_dp

__all__ = [
    "Attribute", "Database", "DataError", "FairnessCriterion", "Schema", "load_criteria", "load_csv",
    "laplace_sample", "make_rng", "relative_l1",
    "CnfInstance", "SolverBudgetExceeded", "brute_force", "export_wdimacs", "solve",
    "u_mi", "u_tvd", "u_tvd_dp",
    "build_cnf", "chunked_repair_cost", "repair", "repair_cost", "self_join", "u_repair", "u_repair_dp",
    "GapSpec", "csp_gap", "dp_gap", "synth_polarized",
    "top_k", "u_tc", "u_tc_dp",
]

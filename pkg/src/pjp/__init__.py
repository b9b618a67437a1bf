"""Predictive justified perspectives: epistemic reasoning about agents whose
beliefs extrapolate time-varying variables, plus a breadth-first planner."""

from pjp.core import (EPS, MISSING, ObservationModel, State, VarTerm, VisibilityRule,
                      check_observation_properties, observe, observe_seq, override, override_seq)
from pjp.perspectives import EvalContext, jp_perspective, nested_perspective, pjp_perspective
from pjp.prediction import (Omega, OmegaEntry, PRRegistry, check_pr_consistency, predict_sequence,
                            retrieve)
from pjp.semantics import epi_eval, evaluate, jp_value, parse_query_prefix

__version__ = "0.1.0"

__all__ = ["EPS", "MISSING", "ObservationModel", "State", "VarTerm", "VisibilityRule",
           "check_observation_properties", "observe", "observe_seq", "override", "override_seq",
           "EvalContext", "jp_perspective", "nested_perspective", "pjp_perspective", "Omega",
           "OmegaEntry", "PRRegistry", "check_pr_consistency", "predict_sequence", "retrieve",
           "epi_eval", "evaluate", "jp_value", "parse_query_prefix"]

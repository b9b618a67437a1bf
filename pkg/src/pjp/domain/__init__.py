"""Domain/problem files: reader, parser, printer and grounded instances."""

from pathlib import Path

from pjp.domain.instance import (GroundAction, InapplicableActionError, InstanceError,
                                 PlanningInstance, parse_action_label, substitute)
from pjp.domain.model import (ActionSchema, Assign, DomainDef, Forall, FunctionDecl, ProblemDef,
                              RuleDecl, SeeDecl, SelfDecl)
from pjp.domain.parser import parse_domain, parse_problem
from pjp.domain.printer import format_domain, format_formula, format_problem, format_term
from pjp.domain.sexpr import ParseError


def load_instance(domain_path, problem_path, registry=None, overrides=None) -> PlanningInstance:
    """Parse a domain and a problem file and ground them."""
    dp, pp = Path(domain_path), Path(problem_path)
    domain = parse_domain(dp.read_text(encoding="utf-8"), source=str(dp))
    problem = parse_problem(pp.read_text(encoding="utf-8"), domain, source=str(pp))
    return PlanningInstance(domain, problem, registry, overrides)


__all__ = ["ActionSchema", "Assign", "DomainDef", "Forall", "FunctionDecl", "GroundAction",
           "InapplicableActionError", "InstanceError", "ParseError", "PlanningInstance",
           "ProblemDef", "RuleDecl", "SeeDecl", "SelfDecl", "format_domain", "format_formula",
           "format_problem", "format_term", "load_instance", "parse_action_label",
           "parse_domain", "parse_problem", "substitute"]

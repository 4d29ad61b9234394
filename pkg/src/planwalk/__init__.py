"""Toolkit for PDDL world modeling with execution feedback: parsing,
grounding, planning, exploration-walk scoring, domain perturbation studies,
and LLM-driven domain/problem refinement."""

from planwalk.errors import PlanwalkError

__version__ = "0.1.0"

__all__ = ["PlanwalkError", "__version__"]

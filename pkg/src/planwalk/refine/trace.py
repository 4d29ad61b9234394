"""Run records for refinement: everything needed to replay or audit a run,
serialized deterministically (sorted keys, no timestamps)."""

from __future__ import annotations

import json
from dataclasses import dataclass

from planwalk.pddl import Domain, Problem, print_domain, print_problem
from planwalk.refine.rating import Rating


@dataclass(frozen=True)
class RoundRecord:
    index: int  # 1-based round number
    replies: tuple[str, ...]
    ratings: tuple[Rating, ...]
    winner_index: int
    winner_domain_text: str | None
    feedback: str

    def as_json(self) -> dict:
        return {
            "index": self.index,
            "replies": list(self.replies),
            "ratings": [r.as_json() for r in self.ratings],
            "winner_index": self.winner_index,
            "winner_domain": self.winner_domain_text,
            "feedback": self.feedback,
        }


@dataclass(frozen=True)
class BranchRecord:
    branch_index: int
    problem: Problem
    rounds: tuple[RoundRecord, ...]
    best_domain: Domain
    best_rating: Rating | None  # None while only the unrated template is held
    early_stopped: bool

    def as_json(self) -> dict:
        return {
            "branch_index": self.branch_index,
            "problem": print_problem(self.problem),
            "rounds": [r.as_json() for r in self.rounds],
            "best_domain": print_domain(self.best_domain),
            "best_rating": self.best_rating.as_json() if self.best_rating else None,
            "early_stopped": self.early_stopped,
        }


@dataclass(frozen=True)
class RefinementTrace:
    environment: str
    config_json: dict
    candidate_records: tuple[dict, ...]
    branches: tuple[BranchRecord, ...]
    final_branch_index: int
    final_domain: Domain
    final_problem: Problem
    translations: tuple[Problem | None, ...]  # problems 2..N, None = failed
    solve_rate: float
    early_stopped: bool
    llm_calls: int
    exchanges: tuple[dict, ...]

    def as_json(self) -> dict:
        return {
            "environment": self.environment,
            "config": self.config_json,
            "problem_candidates": list(self.candidate_records),
            "branches": [b.as_json() for b in self.branches],
            "final": {
                "branch_index": self.final_branch_index,
                "domain": print_domain(self.final_domain),
                "problem": print_problem(self.final_problem),
            },
            "translations": [
                None if p is None else print_problem(p) for p in self.translations
            ],
            "solve_rate": self.solve_rate,
            "early_stopped": self.early_stopped,
            "llm_calls": self.llm_calls,
            "exchanges": list(self.exchanges),
        }


def render_trace(trace: RefinementTrace) -> str:
    return json.dumps(trace.as_json(), sort_keys=True, indent=2) + "\n"

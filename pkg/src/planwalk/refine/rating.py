"""Rating ladder for domain refinement replies.

A reply either yields a usable domain, scored by exploration walks in
[0, 1], or fails somewhere on the way there; failures get negative scores
so every rating is comparable and any walk score beats any failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

EW_SCORE = "ew-score"
NO_INITIAL_ACTION = "no-initial-action"
UNDEFINED_PREDICATE_EDIT = "undefined-predicate-edit"
SANITY_CHECK_FAILURE = "sanity-check-failure"
MALFORMED_EDIT = "malformed-edit"
NO_EDIT = "no-edit"


@dataclass(frozen=True, order=True)
class Rating:
    """Ordered by score alone; kind and detail are labels."""

    score: float
    kind: str = field(compare=False)
    detail: str = field(default="", compare=False)

    @property
    def is_failure(self) -> bool:
        return self.score < 0.0

    def as_json(self) -> dict:
        return {"score": self.score, "kind": self.kind, "detail": self.detail}


def ew_score(value: float, detail: str = "") -> Rating:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"walk score must lie in [0, 1], got {value}")
    return Rating(value, EW_SCORE, detail)


def no_initial_action(detail: str = "") -> Rating:
    return Rating(-1.0, NO_INITIAL_ACTION, detail)


def undefined_predicate_edit(detail: str = "") -> Rating:
    """Semantically invalid modification: undefined predicates, arity or
    type errors, unknown action names, domains that fail to bind."""
    return Rating(-2.0, UNDEFINED_PREDICATE_EDIT, detail)


def sanity_check_failure(detail: str = "") -> Rating:
    return Rating(-3.0, SANITY_CHECK_FAILURE, detail)


def malformed_edit(detail: str = "") -> Rating:
    """Syntactically invalid modification: edit calls or literal strings
    that do not parse."""
    return Rating(-4.0, MALFORMED_EDIT, detail)


def no_edit(detail: str = "") -> Rating:
    return Rating(-5.0, NO_EDIT, detail)

"""Prompt assembly for every LLM call site.

Templates ship as static files with $placeholders; the one-shot exemplar is
always Blocksworld. All builders are pure functions of their arguments, so
equal inputs give byte-equal prompts.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

from planwalk.errors import PlanwalkError
from planwalk.llm.backend import LlmRequest, Message

SYSTEM_PROMPT = (
    "You are an expert in classical planning. You write precise PDDL and "
    "follow the requested output format exactly."
)


class UnboundPlaceholder(PlanwalkError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    def render(self, **values: str) -> str:
        try:
            return string.Template(self.body).substitute(values)
        except (KeyError, ValueError) as exc:
            raise UnboundPlaceholder(
                f"template {self.name}: missing or bad placeholder ({exc})"
            ) from exc


def _read_resource(filename: str) -> str:
    return (
        resources.files("planwalk.llm")
        .joinpath("templates", filename)
        .read_text(encoding="utf-8")
    )


@lru_cache(maxsize=None)
def load_template(name: str) -> PromptTemplate:
    return PromptTemplate(name, _read_resource(name + ".md"))


@dataclass(frozen=True)
class OneShotExample:
    """Exemplar material slotted into prompts; not every builder uses
    every field."""

    domain_nl: str
    domain_pddl: str
    problem_nl: str
    problem_template: str
    problem_pddl: str


@lru_cache(maxsize=1)
def blocksworld_example() -> OneShotExample:
    return OneShotExample(
        domain_nl=_read_resource("blocksworld_d_NL.md").strip(),
        domain_pddl=_read_resource("blocksworld_domain.pddl").strip(),
        problem_nl=_read_resource("blocksworld_p_NL.md").strip(),
        problem_template=_read_resource("blocksworld_problem_template.pddl").strip(),
        problem_pddl=_read_resource("blocksworld_problem.pddl").strip(),
    )


def _example_values(example: OneShotExample | None) -> dict[str, str]:
    # Omitted keys surface as UnboundPlaceholder at render time.
    if example is None:
        return {}
    return {
        "example_domain_nl": example.domain_nl,
        "example_domain_pddl": example.domain_pddl,
        "example_problem_nl": example.problem_nl,
        "example_problem_template": example.problem_template,
        "example_problem_pddl": example.problem_pddl,
    }


def _request(text: str, n: int = 1) -> LlmRequest:
    return LlmRequest(
        messages=(Message("system", SYSTEM_PROMPT), Message("user", text)), n=n
    )


def build_problem_prompt(
    problem_nl: str,
    problem_template_text: str,
    example: OneShotExample | None,
    n: int = 1,
) -> LlmRequest:
    """Task NL + object-list template -> problem PDDL, one-shot."""
    text = load_template("problem_generation").render(
        problem_nl=problem_nl.strip(),
        problem_template=problem_template_text.strip(),
        **_example_values(example),
    )
    return _request(text, n)


def build_domain_draft_prompt(
    domain_nl: str, example: OneShotExample | None, n: int = 1
) -> LlmRequest:
    text = load_template("domain_draft").render(
        domain_nl=domain_nl.strip(), **_example_values(example)
    )
    return _request(text, n)


def build_problem_from_draft_prompt(
    draft_domain_text: str,
    problem_nl: str,
    problem_template_text: str,
    example: OneShotExample | None,
) -> LlmRequest:
    text = load_template("problem_from_draft").render(
        draft_domain_pddl=draft_domain_text.strip(),
        problem_nl=problem_nl.strip(),
        problem_template=problem_template_text.strip(),
        **_example_values(example),
    )
    return _request(text, 1)


def build_refinement_prompt(
    domain_nl: str,
    domain_template_text: str,
    history: Sequence[tuple[str, str]],
    n: int = 1,
) -> LlmRequest:
    """History entries are (assistant reply, feedback) pairs, oldest first.

    The conversation alternates: the fixed instruction message, then each
    past reply followed by the feedback it earned.
    """
    first = load_template("refinement_initial").render(
        domain_nl=domain_nl.strip(), domain_template=domain_template_text.strip()
    )
    messages = [Message("system", SYSTEM_PROMPT), Message("user", first)]
    feedback_template = load_template("refinement_feedback")
    for reply, feedback in history:
        messages.append(Message("assistant", reply))
        messages.append(Message("user", feedback_template.render(feedback=feedback)))
    return LlmRequest(messages=tuple(messages), n=n)


def build_batch_translation_prompt(
    p1_nl: str,
    p1_pddl_text: str,
    problem_nl: str,
    problem_template_text: str,
    problem_index: int,
) -> LlmRequest:
    """One-shot translation of problem problem_index (1-based, >= 2) using
    the already-translated first problem as the exemplar."""
    if problem_index < 2:
        raise ValueError("problem 1 is the exemplar and is never re-translated")
    text = load_template("batch_translation").render(
        example_problem_nl=p1_nl.strip(),
        example_problem_pddl=p1_pddl_text.strip(),
        problem_nl=problem_nl.strip(),
        problem_template=problem_template_text.strip(),
    )
    return _request(text, 1)


def build_intrinsic_plan_prompt(
    domain_text: str, problem_text: str, chain_of_thought: bool = True
) -> LlmRequest:
    reasoning = (
        "Think step by step about how to reach the goal before writing the plan."
        if chain_of_thought
        else "Reply with the plan only, no explanation."
    )
    text = load_template("intrinsic_plan").render(
        domain_pddl=domain_text.strip(),
        problem_pddl=problem_text.strip(),
        reasoning_line=reasoning,
    )
    return _request(text, 1)

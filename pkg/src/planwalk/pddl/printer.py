"""Canonical PDDL rendering. parse(print(x)) == x for every model object."""

from __future__ import annotations

from planwalk.pddl.model import (
    OBJECT,
    ActionSchema,
    Atom,
    Domain,
    Literal,
    PredicateDecl,
    Problem,
    TypedName,
)


def format_typed_list(entries: tuple[TypedName, ...]) -> str:
    parts = []
    runs = _runs(entries)
    for i, (names, typ) in enumerate(runs):
        if typ == OBJECT and i == len(runs) - 1:
            # a trailing untyped run reads back as object-typed
            parts.append(" ".join(names))
        else:
            parts.append(" ".join(names) + " - " + typ)
    return " ".join(parts)


def format_literal(lit: Literal) -> str:
    body = "(" + " ".join((lit.pred,) + lit.args) + ")"
    return body if lit.positive else f"(not {body})"


def format_condition(lits: tuple[Literal, ...]) -> str:
    if not lits:
        return "()"
    return "(and " + " ".join(format_literal(l) for l in lits) + ")"


def format_predicate_decl(decl: PredicateDecl) -> str:
    if not decl.params:
        return f"({decl.name})"
    return f"({decl.name} " + format_typed_list(decl.params) + ")"


def print_domain(domain: Domain) -> str:
    out = [f"(define (domain {domain.name})"]
    if domain.requirements:
        out.append("  (:requirements " + " ".join(domain.requirements) + ")")
    if domain.types:
        out.append("  (:types " + format_typed_list(domain.types) + ")")
    if domain.constants:
        out.append("  (:constants " + format_typed_list(domain.constants) + ")")
    if domain.predicates:
        out.append("  (:predicates")
        for decl in domain.predicates:
            out.append("    " + format_predicate_decl(decl))
        out[-1] += ")"
    else:
        out.append("  (:predicates )")
    for action in domain.actions:
        out.append(f"  (:action {action.name}")
        out.append("    :parameters (" + format_typed_list(action.params) + ")")
        out.append("    :precondition " + format_condition(action.precondition))
        out.append("    :effect " + format_condition(action.effect) + ")")
    out.append(")")
    return "\n".join(out) + "\n"


def print_problem(problem: Problem) -> str:
    out = [f"(define (problem {problem.name})"]
    out.append(f"  (:domain {problem.domain_name})")
    if problem.objects:
        out.append("  (:objects")
        runs = _runs(problem.objects)
        for i, (names, typ) in enumerate(runs):
            if typ == OBJECT and i == len(runs) - 1:
                out.append("    " + " ".join(names))
            else:
                out.append("    " + " ".join(names) + " - " + typ)
        out[-1] += ")"
    else:
        out.append("  (:objects )")
    if problem.init:
        out.append("  (:init")
        for atom in problem.init:
            out.append("    " + str(atom))
        out[-1] += ")"
    else:
        out.append("  (:init )")
    out.append("  (:goal " + _goal_text(problem.goal) + ")")
    out.append(")")
    return "\n".join(out) + "\n"


def _goal_text(goal: tuple[Literal, ...]) -> str:
    if not goal:
        return "(and )"
    return "(and " + " ".join(format_literal(l) for l in goal) + ")"


def _runs(entries: tuple[TypedName, ...]) -> list[tuple[list[str], str]]:
    runs: list[tuple[list[str], str]] = []
    for entry in entries:
        if runs and runs[-1][1] == entry.type:
            runs[-1][0].append(entry.name)
        else:
            runs.append(([entry.name], entry.type))
    return runs


def format_atom(atom: Atom) -> str:
    return str(atom)


def format_action_schema(action: ActionSchema) -> str:
    return (
        f"(:action {action.name}\n"
        "    :parameters (" + format_typed_list(action.params) + ")\n"
        "    :precondition " + format_condition(action.precondition) + "\n"
        "    :effect " + format_condition(action.effect) + ")"
    )

"""Typed-STRIPS abstract syntax: domains, problems, and their structural checks.

The accepted fragment is :strips plus :typing, :negative-preconditions,
:equality and :constants.  Everything is stored lowercase; untyped names
default to type `object`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from planwalk.errors import PlanwalkError

OBJECT = "object"
EQUALITY = "="

KNOWN_REQUIREMENTS = frozenset(
    {":strips", ":typing", ":negative-preconditions", ":equality"}
)


class ModelError(PlanwalkError):
    """Structurally invalid domain or problem."""


class SemanticError(ModelError):
    """Undefined predicate/type, arity mismatch, unbound variable, bad name."""


class SanityError(ModelError):
    """Well-formed but self-contradictory, e.g. an effect asserting L and not-L."""


@dataclass(frozen=True)
class TypedName:
    """One entry of a typed list: a name with its declared type."""

    name: str
    type: str = OBJECT


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple[TypedName, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Literal:
    """A possibly negated predicate application over variables and constants."""

    pred: str
    args: tuple[str, ...] = ()
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.pred, self.args, not self.positive)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(a for a in self.args if a.startswith("?"))


@dataclass(frozen=True)
class Atom:
    """A ground fact: predicate applied to object names."""

    pred: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.pred,) + self.args) + ")"


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[TypedName, ...] = ()
    precondition: tuple[Literal, ...] = ()
    effect: tuple[Literal, ...] = ()

    def __post_init__(self):
        seen = set()
        for p in self.params:
            if p.name in seen:
                raise SemanticError(f"action {self.name}: duplicate parameter {p.name}")
            seen.add(p.name)
        for lit in self.precondition + self.effect:
            for var in lit.variables:
                if var not in seen:
                    raise SemanticError(
                        f"action {self.name}: unbound variable {var} in {lit.pred}"
                    )
        keyed = {(lit.pred, lit.args) for lit in self.effect if lit.positive}
        for lit in self.effect:
            if not lit.positive and (lit.pred, lit.args) in keyed:
                raise SanityError(
                    f"action {self.name}: effect asserts both {lit.pred}{lit.args} "
                    "and its negation"
                )


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...] = ()
    types: tuple[TypedName, ...] = ()  # each entry is (type, parent)
    constants: tuple[TypedName, ...] = ()
    predicates: tuple[PredicateDecl, ...] = ()
    actions: tuple[ActionSchema, ...] = ()

    def __post_init__(self):
        for req in self.requirements:
            if req not in KNOWN_REQUIREMENTS:
                raise SemanticError(f"unsupported requirement {req}")
        _check_type_table(self.types)
        decl_types = {t.name for t in self.types} | {OBJECT}
        preds: dict[str, PredicateDecl] = {}
        for decl in self.predicates:
            if decl.name == EQUALITY:
                raise SemanticError("predicate name = is reserved")
            if decl.name in preds:
                raise SemanticError(f"duplicate predicate {decl.name}")
            preds[decl.name] = decl
            for p in decl.params:
                if p.type not in decl_types:
                    raise SemanticError(
                        f"predicate {decl.name}: undeclared type {p.type}"
                    )
        for c in self.constants:
            if c.type not in decl_types:
                raise SemanticError(f"constant {c.name}: undeclared type {c.type}")
        const_types = {c.name: c.type for c in self.constants}
        seen_actions = set()
        for action in self.actions:
            if action.name in seen_actions:
                raise SemanticError(f"duplicate action {action.name}")
            seen_actions.add(action.name)
            param_types = {p.name: p.type for p in action.params}
            for p in action.params:
                if p.type not in decl_types:
                    raise SemanticError(
                        f"action {action.name}: undeclared type {p.type}"
                    )
            for lit, where in [(l, "precondition") for l in action.precondition] + [
                (l, "effect") for l in action.effect
            ]:
                self._check_literal(
                    action.name, lit, where, preds, param_types, const_types
                )

    def _check_literal(self, action, lit, where, preds, param_types, const_types):
        if lit.pred == EQUALITY:
            if where == "effect":
                raise SemanticError(f"action {action}: = not allowed in effects")
            if len(lit.args) != 2:
                raise SemanticError(f"action {action}: = takes two arguments")
        else:
            decl = preds.get(lit.pred)
            if decl is None:
                raise SemanticError(f"action {action}: undefined predicate {lit.pred}")
            if len(lit.args) != decl.arity:
                raise SemanticError(
                    f"action {action}: {lit.pred} expects {decl.arity} "
                    f"arguments, got {len(lit.args)}"
                )
        for pos, arg in enumerate(lit.args):
            if arg.startswith("?"):
                arg_type = param_types[arg]
            elif arg in const_types:
                arg_type = const_types[arg]
            else:
                raise SemanticError(
                    f"action {action}: {arg} is neither a parameter nor a constant"
                )
            if lit.pred != EQUALITY:
                want = preds[lit.pred].params[pos].type
                if not self.is_subtype(arg_type, want):
                    raise SemanticError(
                        f"action {action}: argument {arg} of {lit.pred} has type "
                        f"{arg_type}, expected {want}"
                    )

    @cached_property
    def type_parents(self) -> dict[str, str]:
        table = {t.name: t.type for t in self.types}
        table.setdefault(OBJECT, OBJECT)
        return table

    def is_subtype(self, child: str, ancestor: str) -> bool:
        if ancestor == OBJECT:
            return True
        cur = child
        while True:
            if cur == ancestor:
                return True
            parent = self.type_parents.get(cur, OBJECT)
            if parent == cur or cur == OBJECT:
                return False
            cur = parent

    @cached_property
    def predicate_table(self) -> dict[str, PredicateDecl]:
        return {p.name: p for p in self.predicates}

    @cached_property
    def action_table(self) -> dict[str, ActionSchema]:
        return {a.name: a for a in self.actions}


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[TypedName, ...] = ()
    init: tuple[Atom, ...] = ()
    goal: tuple[Literal, ...] = ()

    def __post_init__(self):
        seen = set()
        for obj in self.objects:
            if obj.name in seen:
                raise SemanticError(f"duplicate object {obj.name}")
            seen.add(obj.name)
        for lit in self.goal:
            for arg in lit.args:
                if arg.startswith("?"):
                    raise SemanticError(f"goal literal {lit.pred} is not ground")


def _check_type_table(types: tuple[TypedName, ...]) -> None:
    names = {t.name for t in types}
    if len(names) != len(types):
        raise SemanticError("duplicate type declaration")
    for t in types:
        if t.type != OBJECT and t.type not in names:
            raise SemanticError(f"type {t.name}: undeclared parent {t.type}")
    parents = {t.name: t.type for t in types}
    for start in names:
        cur, hops = start, 0
        while cur != OBJECT:
            cur = parents.get(cur, OBJECT)
            hops += 1
            if hops > len(types) + 1:
                raise SemanticError(f"type hierarchy cycle through {start}")

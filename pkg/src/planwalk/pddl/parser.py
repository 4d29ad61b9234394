"""Readers from concrete PDDL text (and markdown-fenced replies) to the model.

Constructs outside the fragment (quantifiers, conditional effects, numeric
fluents, disjunctions) are rejected with a positioned error rather than
silently dropped.
"""

from __future__ import annotations

import re

from planwalk.errors import PlanwalkError
from planwalk.pddl.model import (
    KNOWN_REQUIREMENTS,
    OBJECT,
    ActionSchema,
    Atom,
    Domain,
    Literal,
    ModelError,
    PredicateDecl,
    Problem,
    TypedName,
)
from planwalk.pddl.sexpr import Group, ParseError, Token, parse_forms


class NoCodeBlock(PlanwalkError):
    """The markdown text contains no fenced code block."""


_UNSUPPORTED = frozenset(
    {
        "and",
        "or",
        "forall",
        "exists",
        "when",
        "imply",
        "oneof",
        "increase",
        "decrease",
        "assign",
    }
)

_FENCE = re.compile(r"```([^\n`]*)\n(.*?)```", re.DOTALL)


def extract_pddl_block(markdown: str) -> str:
    """Return the first ```pddl fenced block, else the first fenced block."""
    blocks = _FENCE.findall(markdown)
    if not blocks:
        raise NoCodeBlock("no fenced code block in reply")
    for tag, body in blocks:
        if tag.strip().lower() == "pddl":
            return body.strip()
    return blocks[0][1].strip()


def parse_domain(text: str) -> Domain:
    """Parse a domain definition, or raise ParseError with line/column."""
    define = _single_define(text)
    header = _require_group(define.items[1] if len(define.items) > 1 else None, define)
    if _head_text(header) != "domain" or len(header.items) != 2:
        raise ParseError("expected (domain <name>)", header.line, header.col)
    name = _symbol_text(header.items[1], "domain name")

    requirements: tuple[str, ...] = ()
    types: tuple[TypedName, ...] = ()
    constants: tuple[TypedName, ...] = ()
    predicates: list[PredicateDecl] = []
    actions: list[ActionSchema] = []
    for section in define.items[2:]:
        sec = _require_group(section, define)
        head = _head_text(sec)
        if head == ":requirements":
            requirements = tuple(_read_requirements(sec))
        elif head == ":types":
            types = _read_typed_list(sec.items[1:], sec)
        elif head == ":constants":
            constants = _read_typed_list(sec.items[1:], sec)
        elif head == ":predicates":
            for item in sec.items[1:]:
                predicates.append(_read_predicate_decl(_require_group(item, sec)))
        elif head == ":action":
            actions.append(_read_action(sec))
        else:
            raise ParseError(f"unsupported section {head}", sec.line, sec.col)
    try:
        return Domain(
            name=name,
            requirements=requirements,
            types=types,
            constants=constants,
            predicates=tuple(predicates),
            actions=tuple(actions),
        )
    except ModelError as exc:
        raise ParseError(str(exc), define.line, define.col) from exc


def parse_problem(text: str) -> Problem:
    """Parse a problem definition; pairing against a domain happens at bind."""
    define = _single_define(text)
    header = _require_group(define.items[1] if len(define.items) > 1 else None, define)
    if _head_text(header) != "problem" or len(header.items) != 2:
        raise ParseError("expected (problem <name>)", header.line, header.col)
    name = _symbol_text(header.items[1], "problem name")

    domain_name = None
    objects: tuple[TypedName, ...] = ()
    init: list[Atom] = []
    goal: tuple[Literal, ...] = ()
    for section in define.items[2:]:
        sec = _require_group(section, define)
        head = _head_text(sec)
        if head == ":domain":
            if len(sec.items) != 2:
                raise ParseError("expected (:domain <name>)", sec.line, sec.col)
            domain_name = _symbol_text(sec.items[1], "domain name")
        elif head == ":objects":
            objects = _read_typed_list(sec.items[1:], sec)
        elif head == ":init":
            for item in sec.items[1:]:
                init.append(_read_init_atom(_require_group(item, sec)))
        elif head == ":goal":
            if len(sec.items) != 2:
                raise ParseError("expected (:goal <condition>)", sec.line, sec.col)
            goal = _read_condition(_require_group(sec.items[1], sec))
        else:
            raise ParseError(f"unsupported section {head}", sec.line, sec.col)
    if domain_name is None:
        raise ParseError("problem has no (:domain ...) section", define.line, define.col)
    try:
        return Problem(
            name=name,
            domain_name=domain_name,
            objects=objects,
            init=tuple(init),
            goal=goal,
        )
    except ModelError as exc:
        raise ParseError(str(exc), define.line, define.col) from exc


def parse_literal_text(text: str) -> Literal:
    """Parse one literal such as `(at ?obj ?room)` or `(not (free ?r ?g))`."""
    form = _single_form(text, "literal")
    return _read_literal(form)


def parse_predicate_decl_text(text: str) -> PredicateDecl:
    """Parse one predicate declaration such as `(carry ?r - robot ?o - obj)`."""
    form = _single_form(text, "predicate declaration")
    if not form.items:
        raise ParseError("empty predicate declaration", form.line, form.col)
    return _read_predicate_decl(form)


def _single_define(text: str) -> Group:
    form = _single_form(text, "definition")
    if not form.items or _head_text(form) != "define":
        raise ParseError("expected (define ...)", form.line, form.col)
    return form


def _single_form(text: str, what: str) -> Group:
    forms = parse_forms(text)
    if len(forms) != 1 or not isinstance(forms[0], Group):
        raise ParseError(f"expected a single parenthesised {what}", 1, 1)
    return forms[0]


def _require_group(item, parent: Group) -> Group:
    if not isinstance(item, Group):
        if isinstance(item, Token):
            raise ParseError(f"expected a list, got {item.text!r}", item.line, item.col)
        raise ParseError("expected a list", parent.line, parent.col)
    return item


def _head_text(group: Group) -> str:
    if not group.items or not isinstance(group.items[0], Token):
        raise ParseError("expected a keyword", group.line, group.col)
    return group.items[0].text


def _symbol_text(item, what: str) -> str:
    if not isinstance(item, Token):
        raise ParseError(f"expected {what}", item.line, item.col)
    return item.text


def _read_requirements(sec: Group) -> list[str]:
    reqs = []
    for item in sec.items[1:]:
        if not isinstance(item, Token):
            raise ParseError("expected a requirement flag", sec.line, sec.col)
        if item.text not in KNOWN_REQUIREMENTS:
            raise ParseError(f"unsupported requirement {item.text}", item.line, item.col)
        reqs.append(item.text)
    return reqs


def _read_typed_list(items, parent: Group) -> tuple[TypedName, ...]:
    entries: list[TypedName] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        word = _symbol_text(items[i], "a name")
        if word == "-":
            if not pending:
                raise ParseError("'-' with no names before it", parent.line, parent.col)
            if i + 1 >= len(items):
                raise ParseError("expected a type after '-'", parent.line, parent.col)
            typ = _symbol_text(items[i + 1], "a type")
            entries.extend(TypedName(n, typ) for n in pending)
            pending = []
            i += 2
        else:
            pending.append(word)
            i += 1
    entries.extend(TypedName(n, OBJECT) for n in pending)
    return tuple(entries)


def _read_predicate_decl(group: Group) -> PredicateDecl:
    name = _symbol_text(group.items[0], "predicate name")
    return PredicateDecl(name, _read_typed_list(group.items[1:], group))


def _read_action(sec: Group) -> ActionSchema:
    if len(sec.items) < 2:
        raise ParseError("expected (:action <name> ...)", sec.line, sec.col)
    name = _symbol_text(sec.items[1], "action name")
    params: tuple[TypedName, ...] = ()
    precondition: tuple[Literal, ...] = ()
    effect: tuple[Literal, ...] = ()
    seen = set()
    i = 2
    while i < len(sec.items):
        key = _symbol_text(sec.items[i], "an action keyword")
        if key not in (":parameters", ":precondition", ":effect"):
            raise ParseError(f"unsupported action keyword {key}", sec.line, sec.col)
        if key in seen:
            raise ParseError(f"duplicate {key}", sec.line, sec.col)
        seen.add(key)
        if i + 1 >= len(sec.items):
            raise ParseError(f"missing value after {key}", sec.line, sec.col)
        value = _require_group(sec.items[i + 1], sec)
        if key == ":parameters":
            params = _read_typed_list(value.items, value)
        elif key == ":precondition":
            precondition = _read_condition(value)
        else:
            effect = _read_condition(value)
        i += 2
    try:
        return ActionSchema(name, params, precondition, effect)
    except ModelError as exc:
        raise ParseError(str(exc), sec.line, sec.col) from exc


def _read_condition(group: Group) -> tuple[Literal, ...]:
    if not group.items:
        return ()
    head = group.items[0]
    if isinstance(head, Token) and head.text == "and":
        return tuple(
            _read_literal(_require_group(item, group)) for item in group.items[1:]
        )
    return (_read_literal(group),)


def _read_literal(group: Group) -> Literal:
    if not group.items:
        raise ParseError("empty literal", group.line, group.col)
    head = group.items[0]
    if not isinstance(head, Token):
        raise ParseError("expected a predicate name", group.line, group.col)
    if head.text == "not":
        if len(group.items) != 2 or not isinstance(group.items[1], Group):
            raise ParseError("(not ...) takes exactly one literal", group.line, group.col)
        inner = _read_literal(group.items[1])
        if not inner.positive:
            raise ParseError("double negation", group.line, group.col)
        return inner.negated()
    if head.text in _UNSUPPORTED:
        raise ParseError(f"{head.text} is not supported in this fragment", head.line, head.col)
    args = tuple(_symbol_text(item, "an argument") for item in group.items[1:])
    return Literal(head.text, args)


def _read_init_atom(group: Group) -> Atom:
    if not group.items:
        raise ParseError("empty atom in :init", group.line, group.col)
    head = group.items[0]
    if not isinstance(head, Token):
        raise ParseError("expected a predicate name", group.line, group.col)
    if head.text == "not":
        raise ParseError("negative literal in :init", group.line, group.col)
    args = []
    for item in group.items[1:]:
        arg = _symbol_text(item, "an object name")
        if arg.startswith("?"):
            raise ParseError("init atom is not ground", group.line, group.col)
        args.append(arg)
    return Atom(head.text, tuple(args))

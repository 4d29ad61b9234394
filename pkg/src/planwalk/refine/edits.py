"""The two-function edit interface replies are written against, plus the
machinery that turns a reply into a domain or a failure rating.

add_or_update_predicates(predicates) declares or replaces predicate
declarations; modify_action(action_name, new_preconditions, new_effects)
swaps one action's condition lists. Parameter signatures are fixed by the
template and cannot be touched through this interface.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, replace

from planwalk.errors import PlanwalkError
from planwalk.pddl import (
    ActionSchema,
    Domain,
    ParseError,
    SanityError,
    SemanticError,
    parse_literal_text,
    parse_predicate_decl_text,
)
from planwalk.refine.rating import (
    Rating,
    malformed_edit,
    no_edit,
    sanity_check_failure,
    undefined_predicate_edit,
)

FUNCTION_NAMES = ("add_or_update_predicates", "modify_action")

_CALL_START = re.compile(r"\b(add_or_update_predicates|modify_action)\s*\(")
_ANY_NAME = re.compile("|".join(FUNCTION_NAMES))


@dataclass(frozen=True)
class AddOrUpdatePredicates:
    predicates: tuple[str, ...]


@dataclass(frozen=True)
class ModifyAction:
    action_name: str
    new_preconditions: tuple[str, ...]
    new_effects: tuple[str, ...]


class EditRejected(PlanwalkError):
    """A reply that cannot become a domain; carries the rating to record."""

    def __init__(self, rating: Rating):
        super().__init__(rating.detail or rating.kind)
        self.rating = rating


def _find_call_end(text: str, open_paren: int) -> int:
    """Index one past the balanced ')', skipping parens inside string
    literals. Returns -1 when the call never closes."""
    depth = 0
    quote = ""
    i = open_paren
    while i < len(text):
        ch = text[i]
        if quote:
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                quote = ""
        elif ch in "'\"":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return -1


def _string_list(node: ast.expr, what: str) -> tuple[str, ...]:
    value = ast.literal_eval(node)
    if isinstance(value, str):
        raise ValueError(f"{what} must be a list of strings, got a bare string")
    items = tuple(value)
    if not all(isinstance(item, str) for item in items):
        raise ValueError(f"{what} must contain only strings")
    return items


def _decode_call(call_text: str):
    tree = ast.parse(call_text, mode="eval")
    call = tree.body
    if not isinstance(call, ast.Call) or not isinstance(call.func, ast.Name):
        raise ValueError("not a plain function call")
    args: dict[str, ast.expr] = {}
    if call.func.id == "add_or_update_predicates":
        names = ["predicates"]
    else:
        names = ["action_name", "new_preconditions", "new_effects"]
    if len(call.args) > len(names):
        raise ValueError("too many positional arguments")
    for name, node in zip(names, call.args):
        args[name] = node
    for kw in call.keywords:
        if kw.arg not in names or kw.arg in args:
            raise ValueError(f"bad keyword argument {kw.arg}")
        args[kw.arg] = kw.value
    if set(args) != set(names):
        raise ValueError("missing arguments")
    if call.func.id == "add_or_update_predicates":
        return AddOrUpdatePredicates(_string_list(args["predicates"], "predicates"))
    action_name = ast.literal_eval(args["action_name"])
    if not isinstance(action_name, str):
        raise ValueError("action_name must be a string")
    return ModifyAction(
        action_name.lower(),
        _string_list(args["new_preconditions"], "new_preconditions"),
        _string_list(args["new_effects"], "new_effects"),
    )


def parse_edit_calls(reply: str) -> list[AddOrUpdatePredicates | ModifyAction]:
    """Extract interface calls from a free-form reply, in reply order.

    Raises EditRejected: no-edit when neither function name appears at all,
    malformed-edit when a name appears but no call decodes cleanly.
    """
    if not _ANY_NAME.search(reply):
        raise EditRejected(no_edit("reply contains no interface calls"))
    calls = []
    for match in _CALL_START.finditer(reply):
        open_paren = match.end() - 1
        end = _find_call_end(reply, open_paren)
        if end < 0:
            raise EditRejected(
                malformed_edit(f"unbalanced call to {match.group(1)}")
            )
        call_text = reply[match.start() : end]
        try:
            calls.append(_decode_call(call_text))
        except (SyntaxError, ValueError) as exc:
            raise EditRejected(
                malformed_edit(f"cannot decode {match.group(1)} call: {exc}")
            ) from exc
    if not calls:
        raise EditRejected(
            malformed_edit("interface named but never actually called")
        )
    return calls


def _rating_for(error: Exception) -> Rating:
    if isinstance(error, SanityError):
        return sanity_check_failure(str(error))
    return undefined_predicate_edit(str(error))


def apply_edits(current: Domain, reply: str) -> Domain | Rating:
    """Apply a reply's edit calls to a domain.

    Calls apply in reply order; predicate references are checked only after
    the whole reply is applied, so a modify_action may lean on predicates
    declared later in the same reply. Failures come back as Ratings.
    """
    try:
        calls = parse_edit_calls(reply)
    except EditRejected as rejected:
        return rejected.rating

    predicates = {p.name: p for p in current.predicates}
    actions = {a.name: a for a in current.actions}
    for call in calls:
        if isinstance(call, AddOrUpdatePredicates):
            for decl_text in call.predicates:
                try:
                    decl = parse_predicate_decl_text(decl_text)
                except ParseError as exc:
                    return malformed_edit(f"bad predicate declaration: {exc}")
                predicates[decl.name] = decl
        else:
            schema = actions.get(call.action_name)
            if schema is None:
                return undefined_predicate_edit(
                    f"no action named {call.action_name}"
                )
            if not call.new_effects:
                return sanity_check_failure(
                    f"action {call.action_name}: empty effect list"
                )
            try:
                precondition = tuple(
                    parse_literal_text(t) for t in call.new_preconditions
                )
                effect = tuple(parse_literal_text(t) for t in call.new_effects)
            except ParseError as exc:
                return malformed_edit(f"bad literal: {exc}")
            try:
                actions[call.action_name] = ActionSchema(
                    schema.name, schema.params, precondition, effect
                )
            except (SanityError, SemanticError) as exc:
                return _rating_for(exc)

    try:
        return replace(
            current,
            predicates=tuple(predicates.values()),
            actions=tuple(actions.values()),
        )
    except (SanityError, SemanticError) as exc:
        return _rating_for(exc)

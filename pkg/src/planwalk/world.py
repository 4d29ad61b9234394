"""Grounded execution semantics: bind, applicability, transition, validation.

A domain/problem pair is ground eagerly at bind into an indexed action table.
Public operations work on plain atom sets; search and walk replay go through
a compiled bitmask engine over the same ground data (states are ints, one bit
per atom reachable from the initial literals).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from planwalk.errors import PlanwalkError
from planwalk.pddl.model import EQUALITY, Atom, Domain, Literal, Problem
from planwalk.pddl.sexpr import ParseError, Token, parse_forms


class BindError(PlanwalkError):
    """The problem cannot be paired with the domain."""


class DomainMismatch(BindError):
    pass


class UndeclaredObject(BindError):
    pass


class ArityOrTypeError(BindError):
    pass


class UnknownGroundAction(PlanwalkError):
    """The (schema, args) pair is not in the environment's ground action set."""


class NotApplicable(PlanwalkError):
    pass


class ObjectMisalignment(PlanwalkError):
    """Two problems over the same action interface declare different objects."""


@dataclass(frozen=True)
class GroundAction:
    schema: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.schema,) + self.args) + ")"


Plan = tuple[GroundAction, ...]


@dataclass(frozen=True)
class State:
    atoms: frozenset[Atom]

    def holds(self, atom: Atom) -> bool:
        return atom in self.atoms


@dataclass(frozen=True)
class ExecResult:
    """Outcome of replaying a plan from the initial state.

    Failure is data, not an error: `failed_index` points at the first action
    that is unknown or inapplicable, and `state_at_failure` is the state in
    which it was attempted.
    """

    executable: bool
    failed_index: int | None = None
    state_at_failure: State | None = None


@dataclass(frozen=True)
class ExecObservation:
    """What an environment reports about a replay: success, or the failing
    step plus its own textual rendering of the state reached."""

    executable: bool
    failed_index: int | None = None
    state_description: str | None = None


@dataclass(frozen=True)
class _GroundData:
    pre_pos: frozenset[Atom]
    pre_neg: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]


@dataclass(frozen=True, eq=False)
class BoundEnv:
    domain: Domain
    problem: Problem
    objects_by_type: dict[str, tuple[str, ...]]
    ground_actions: tuple[GroundAction, ...]
    _ground: dict[GroundAction, _GroundData]

    @cached_property
    def _engine(self) -> "_Engine":
        return _Engine(self)


def bind(domain: Domain, problem: Problem) -> BoundEnv:
    """Pair a problem with its domain and ground every action schema.

    Grounding is the cartesian product over type-compatible objects (domain
    constants included); ground actions whose equality preconditions are
    statically false are pruned.
    """
    if problem.domain_name != domain.name:
        raise DomainMismatch(
            f"problem {problem.name} is for domain {problem.domain_name}, "
            f"not {domain.name}"
        )
    const_names = {c.name for c in domain.constants}
    for obj in problem.objects:
        if obj.name in const_names:
            raise BindError(f"object {obj.name} collides with a domain constant")
    declared_types = {t.name for t in domain.types} | {"object"}
    entities = list(domain.constants) + list(problem.objects)
    for ent in entities:
        if ent.type not in declared_types:
            raise ArityOrTypeError(f"object {ent.name}: undeclared type {ent.type}")
    entity_types = {e.name: e.type for e in entities}

    objects_by_type = {
        t: tuple(
            sorted(e.name for e in entities if domain.is_subtype(e.type, t))
        )
        for t in declared_types
    }

    _check_ground_literals(domain, problem, entity_types)

    actions: list[GroundAction] = []
    ground: dict[GroundAction, _GroundData] = {}
    for schema in domain.actions:
        pools = [objects_by_type[p.type] for p in schema.params]
        names = [p.name for p in schema.params]
        for combo in itertools.product(*pools):
            binding = dict(zip(names, combo))
            data = _ground_schema(schema, binding)
            if data is None:
                continue
            act = GroundAction(schema.name, tuple(combo))
            actions.append(act)
            ground[act] = data
    actions.sort(key=lambda a: (a.schema, a.args))
    return BoundEnv(domain, problem, objects_by_type, tuple(actions), ground)


def _ground_schema(schema, binding) -> _GroundData | None:
    pre_pos, pre_neg = [], []
    for lit in schema.precondition:
        if lit.pred == EQUALITY:
            left, right = (binding.get(a, a) for a in lit.args)
            if (left == right) != lit.positive:
                return None  # statically false, prune the ground action
            continue
        (pre_pos if lit.positive else pre_neg).append(_ground_literal(lit, binding))
    add, delete = [], []
    for lit in schema.effect:
        (add if lit.positive else delete).append(_ground_literal(lit, binding))
    return _GroundData(
        frozenset(pre_pos), frozenset(pre_neg), frozenset(add), frozenset(delete)
    )


def _ground_literal(lit: Literal, binding: dict[str, str]) -> Atom:
    return Atom(lit.pred, tuple(binding.get(a, a) for a in lit.args))


def _check_ground_literals(domain, problem, entity_types):
    preds = domain.predicate_table
    for atom in problem.init:
        _check_atom(domain, atom, entity_types, preds, "init")
    for lit in problem.goal:
        if lit.pred == EQUALITY:
            raise ArityOrTypeError("= is not allowed in goals")
        _check_atom(domain, Atom(lit.pred, lit.args), entity_types, preds, "goal")


def _check_atom(domain, atom, entity_types, preds, where):
    decl = preds.get(atom.pred)
    if decl is None:
        raise ArityOrTypeError(f"{where} atom {atom}: undefined predicate {atom.pred}")
    if len(atom.args) != decl.arity:
        raise ArityOrTypeError(
            f"{where} atom {atom}: {atom.pred} expects {decl.arity} arguments"
        )
    for pos, arg in enumerate(atom.args):
        if arg not in entity_types:
            raise UndeclaredObject(f"{where} atom {atom}: undeclared object {arg}")
        want = decl.params[pos].type
        if not domain.is_subtype(entity_types[arg], want):
            raise ArityOrTypeError(
                f"{where} atom {atom}: {arg} has type {entity_types[arg]}, "
                f"expected {want}"
            )


def initial_state(env: BoundEnv) -> State:
    return State(frozenset(env.problem.init))


def is_applicable(env: BoundEnv, state: State, action: GroundAction) -> bool:
    data = env._ground.get(action)
    if data is None:
        raise UnknownGroundAction(str(action))
    return data.pre_pos <= state.atoms and not (data.pre_neg & state.atoms)


def legal_actions(env: BoundEnv, state: State) -> tuple[GroundAction, ...]:
    """All ground actions applicable in `state`, in (schema, args) order."""
    engine = env._engine
    mask = engine.mask_of_state(state)
    return tuple(env.ground_actions[i] for i in engine.legal_indices(mask))


def apply(env: BoundEnv, state: State, action: GroundAction) -> State:
    """Transition: delete effects first, then adds. Untouched atoms persist."""
    if not is_applicable(env, state, action):
        raise NotApplicable(str(action))
    data = env._ground[action]
    return State((state.atoms - data.delete) | data.add)


def check_executable(env: BoundEnv, plan: Plan) -> ExecResult:
    """Fold the transition over `plan` from the initial state.

    An action absent from the ground table (wrong name, wrong arity, pruned
    by an equality precondition) fails at its index like any inapplicable one.
    """
    engine = env._engine
    mask = engine.init_mask
    for i, action in enumerate(plan):
        idx = engine.index_of.get(action)
        if idx is None or not engine.applicable(mask, idx):
            return ExecResult(False, i, engine.state_of_mask(mask))
        mask = engine.successor(mask, idx)
    return ExecResult(True)


def validate_plan(env: BoundEnv, plan: Plan) -> bool:
    """True iff the plan is executable and its final state satisfies the goal."""
    engine = env._engine
    mask = engine.init_mask
    for action in plan:
        idx = engine.index_of.get(action)
        if idx is None or not engine.applicable(mask, idx):
            return False
        mask = engine.successor(mask, idx)
    return engine.goal_satisfied(mask)


def goal_satisfied(env: BoundEnv, state: State) -> bool:
    for lit in env.problem.goal:
        if (Atom(lit.pred, lit.args) in state.atoms) != lit.positive:
            return False
    return True


def describe_state(env: BoundEnv, state: State) -> str:
    if not state.atoms:
        return "No facts hold."
    lines = []
    for atom in sorted(state.atoms, key=lambda a: (a.pred, a.args)):
        lines.append(f"Predicate {atom.pred} holds for ({', '.join(atom.args)}).")
    return "\n".join(lines)


def align_objects(a: Problem, b: Problem) -> None:
    """Check the two problems declare the same object names, else raise."""
    names_a = {o.name for o in a.objects}
    names_b = {o.name for o in b.objects}
    if names_a != names_b:
        only_a = ", ".join(sorted(names_a - names_b)) or "-"
        only_b = ", ".join(sorted(names_b - names_a)) or "-"
        raise ObjectMisalignment(
            f"objects differ between {a.name} and {b.name}: "
            f"only in first: {only_a}; only in second: {only_b}"
        )


def parse_plan_text(text: str) -> Plan:
    """Read a plan file: one `(name arg1 arg2 ...)` per line, `;` comments."""
    actions = []
    for form in parse_forms(text):
        if isinstance(form, Token):
            raise ParseError(f"expected an action, got {form.text!r}", form.line, form.col)
        parts = []
        for item in form.items:
            if not isinstance(item, Token):
                raise ParseError("nested list in action", form.line, form.col)
            parts.append(item.text)
        if not parts:
            raise ParseError("empty action", form.line, form.col)
        actions.append(GroundAction(parts[0], tuple(parts[1:])))
    return tuple(actions)


def format_plan(plan: Plan) -> str:
    return "".join(str(a) + "\n" for a in plan)


class EnvironmentHandle:
    """Execution access to an environment without exposing its PDDL.

    The surface is the observable one: legal-action enumeration after a
    prefix, executability of a plan (with the environment's own state
    rendering on failure), and plan validation.
    """

    def __init__(self, env: BoundEnv):
        self._env = env

    def legal_actions_after(self, prefix: Plan) -> tuple[GroundAction, ...]:
        engine = self._env._engine
        mask = engine.init_mask
        for action in prefix:
            idx = engine.index_of.get(action)
            if idx is None or not engine.applicable(mask, idx):
                raise NotApplicable(f"prefix fails at {action}")
            mask = engine.successor(mask, idx)
        return tuple(self._env.ground_actions[i] for i in engine.legal_indices(mask))

    def check_executable(self, plan: Plan) -> ExecObservation:
        result = check_executable(self._env, plan)
        if result.executable:
            return ExecObservation(True)
        return ExecObservation(
            False,
            result.failed_index,
            describe_state(self._env, result.state_at_failure),
        )

    def validate_plan(self, plan: Plan) -> bool:
        return validate_plan(self._env, plan)


def as_access(env_or_handle):
    """Adapt a BoundEnv to the handle surface; pass handles through."""
    if isinstance(env_or_handle, BoundEnv):
        return EnvironmentHandle(env_or_handle)
    return env_or_handle


class _Engine:
    """Bitmask view of a bound environment. States are ints; atom i is bit i.

    The atom universe is every atom reachable from the initial state plus all
    literals mentioned by ground actions and the goal, so any state derived
    from the initial mask stays representable.
    """

    __slots__ = (
        "atoms",
        "atom_ids",
        "init_mask",
        "goal_pos",
        "goal_neg",
        "pre_pos",
        "pre_neg",
        "add",
        "keep",
        "index_of",
        "n_actions",
    )

    def __init__(self, env: BoundEnv):
        atom_ids: dict[Atom, int] = {}

        def intern(atom: Atom) -> int:
            bit = atom_ids.get(atom)
            if bit is None:
                bit = len(atom_ids)
                atom_ids[atom] = bit
            return bit

        def mask(atoms) -> int:
            m = 0
            for a in atoms:
                m |= 1 << intern(a)
            return m

        self.init_mask = mask(env.problem.init)
        self.goal_pos = mask(
            Atom(l.pred, l.args) for l in env.problem.goal if l.positive
        )
        self.goal_neg = mask(
            Atom(l.pred, l.args) for l in env.problem.goal if not l.positive
        )
        self.pre_pos, self.pre_neg, self.add, self.keep = [], [], [], []
        self.index_of = {}
        for i, action in enumerate(env.ground_actions):
            data = env._ground[action]
            self.pre_pos.append(mask(data.pre_pos))
            self.pre_neg.append(mask(data.pre_neg))
            self.add.append(mask(data.add))
            self.keep.append(~mask(data.delete))
            self.index_of[action] = i
        self.n_actions = len(env.ground_actions)
        self.atoms = list(atom_ids)
        self.atom_ids = atom_ids

    def mask_of_state(self, state: State) -> int:
        # atoms outside the universe cannot satisfy any precondition or goal
        m = 0
        ids = self.atom_ids
        for atom in state.atoms:
            bit = ids.get(atom)
            if bit is not None:
                m |= 1 << bit
        return m

    def state_of_mask(self, mask: int) -> State:
        atoms = []
        i = 0
        while mask:
            if mask & 1:
                atoms.append(self.atoms[i])
            mask >>= 1
            i += 1
        return State(frozenset(atoms))

    def applicable(self, mask: int, i: int) -> bool:
        return (mask & self.pre_pos[i]) == self.pre_pos[i] and not (
            mask & self.pre_neg[i]
        )

    def successor(self, mask: int, i: int) -> int:
        return (mask & self.keep[i]) | self.add[i]

    def legal_indices(self, mask: int) -> list[int]:
        pre_pos, pre_neg = self.pre_pos, self.pre_neg
        return [
            i
            for i in range(self.n_actions)
            if (mask & pre_pos[i]) == pre_pos[i] and not (mask & pre_neg[i])
        ]

    def goal_satisfied(self, mask: int) -> bool:
        return (mask & self.goal_pos) == self.goal_pos and not (mask & self.goal_neg)

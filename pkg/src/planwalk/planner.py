"""Plan search over bound environments.

Greedy best-first on the goal-count heuristic (number of unsatisfied goal
literals). Equal-heuristic nodes expand FIFO, so inside a plateau the search
degrades to plain breadth-first and, with duplicate detection, exhausts the
reachable space when no plan exists. Successors are generated in (schema,
args) order, which makes results deterministic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from heapq import heappop, heappush

from planwalk.pddl.model import Atom, Domain, Problem
from planwalk.world import BindError, Plan, bind

PLAN_NOT_FOUND = "plan-not-found"
BUDGET_EXHAUSTED = "search-budget-exhausted"
BIND_ERROR = "bind-error"


@dataclass(frozen=True)
class SearchLimits:
    max_expanded_states: int = 1_000_000
    wall_clock_seconds: float = 30.0


@dataclass(frozen=True)
class PlannerOutcome:
    plan: Plan | None
    reason: str | None = None  # set iff plan is None
    detail: str | None = None
    expanded: int = 0

    @property
    def found(self) -> bool:
        return self.plan is not None


def solve(
    domain: Domain, problem: Problem, limits: SearchLimits = SearchLimits()
) -> PlannerOutcome:
    """Search for a plan; on failure say why (not found / budget / bind)."""
    try:
        env = bind(domain, problem)
    except BindError as exc:
        return PlannerOutcome(None, BIND_ERROR, str(exc))
    engine = env._engine

    if _goal_unreachable(domain, problem):
        return PlannerOutcome(None, PLAN_NOT_FOUND, "goal literal is unreachable")

    goal_pos, goal_neg = engine.goal_pos, engine.goal_neg

    def h(mask: int) -> int:
        return ((goal_pos & ~mask) | (goal_neg & mask)).bit_count()

    init = engine.init_mask
    parents: dict[int, tuple[int, int] | None] = {init: None}
    frontier: list[tuple[int, int, int]] = [(h(init), 0, init)]
    counter = 1
    expanded = 0
    deadline = time.monotonic() + limits.wall_clock_seconds
    n_actions = engine.n_actions
    pre_pos, pre_neg = engine.pre_pos, engine.pre_neg

    while frontier:
        _, _, mask = heappop(frontier)
        if engine.goal_satisfied(mask):
            return PlannerOutcome(_extract_plan(env, parents, mask), expanded=expanded)
        expanded += 1
        if expanded > limits.max_expanded_states:
            return PlannerOutcome(
                None, BUDGET_EXHAUSTED, "state budget exhausted", expanded
            )
        if expanded % 512 == 0 and time.monotonic() > deadline:
            return PlannerOutcome(
                None, BUDGET_EXHAUSTED, "wall clock budget exhausted", expanded
            )
        for i in range(n_actions):
            if (mask & pre_pos[i]) == pre_pos[i] and not (mask & pre_neg[i]):
                succ = engine.successor(mask, i)
                if succ not in parents:
                    parents[succ] = (mask, i)
                    heappush(frontier, (h(succ), counter, succ))
                    counter += 1
    return PlannerOutcome(None, PLAN_NOT_FOUND, "reachable space exhausted", expanded)


def plan_or_not_found(
    domain: Domain, problem: Problem, limits: SearchLimits = SearchLimits()
) -> bool:
    """True iff solve proves there is no plan (reasons other than budget)."""
    outcome = solve(domain, problem, limits)
    return outcome.plan is None and outcome.reason != BUDGET_EXHAUSTED


def _extract_plan(env, parents, mask) -> Plan:
    steps = []
    cur = mask
    while parents[cur] is not None:
        prev, action_idx = parents[cur]
        steps.append(env.ground_actions[action_idx])
        cur = prev
    steps.reverse()
    return tuple(steps)


def _goal_unreachable(domain: Domain, problem: Problem) -> bool:
    """Cheap unsolvability proof: a positive goal atom that holds in no
    initial state and is added by no effect can never become true (dually for
    a negative goal whose atom is initially true and never deleted)."""
    addable = set()
    deletable = set()
    for action in domain.actions:
        for lit in action.effect:
            (addable if lit.positive else deletable).add(lit.pred)
    init = set(problem.init)
    for lit in problem.goal:
        atom = Atom(lit.pred, lit.args)
        if lit.positive and atom not in init and lit.pred not in addable:
            return True
        if not lit.positive and atom in init and lit.pred not in deletable:
            return True
    return False

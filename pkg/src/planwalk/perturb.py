"""Domain perturbation: term removal, plan-not-found rate, EW-vs-difference.

A term is one top-level literal in an action's precondition or effect
conjunction. Removing terms never breaks parseability or binding, so a
perturbed domain is always a runnable domain.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, replace

from planwalk.errors import PlanwalkError
from planwalk.exploration import WalkConfig, multi_problem_ew
from planwalk.pddl.model import Domain, Literal, Problem
from planwalk.planner import BUDGET_EXHAUSTED, SearchLimits, solve


class KTooLarge(PlanwalkError):
    pass


class SignatureMismatch(PlanwalkError):
    """The two domains do not share action names and parameter signatures."""


@dataclass(frozen=True)
class TermLocation:
    action: str
    slot: str  # "precondition" | "effect"
    index: int
    literal: Literal


@dataclass(frozen=True)
class PerturbedDomain:
    domain: Domain
    removed: tuple[TermLocation, ...]
    empty_effect_actions: tuple[str, ...]  # legal but worth surfacing


@dataclass(frozen=True)
class PnfEntry:
    k: int
    rate: float | None  # None when every sample hit the search budget
    samples: int  # counted (perturbation x problem) pairs
    budget_exhausted: int


@dataclass(frozen=True)
class BucketRow:
    term_diff: int
    mean_ew: float
    pairs: int


def enumerate_terms(domain: Domain) -> tuple[TermLocation, ...]:
    """All removable literal locations: actions in declaration order,
    preconditions before effects, literals in written order."""
    locations = []
    for action in domain.actions:
        for idx, lit in enumerate(action.precondition):
            locations.append(TermLocation(action.name, "precondition", idx, lit))
        for idx, lit in enumerate(action.effect):
            locations.append(TermLocation(action.name, "effect", idx, lit))
    return tuple(locations)


def remove_terms(domain: Domain, k: int, rng: random.Random) -> PerturbedDomain:
    """Drop k distinct uniformly chosen terms. k = 0 returns the domain as is."""
    terms = enumerate_terms(domain)
    if k > len(terms):
        raise KTooLarge(f"k={k} exceeds the {len(terms)} removable terms")
    chosen = sorted(rng.sample(range(len(terms)), k))
    return remove_located_terms(domain, [terms[i] for i in chosen])


def remove_located_terms(domain: Domain, locations) -> PerturbedDomain:
    """Drop exactly the given term locations (for targeted studies)."""
    dropped: dict[tuple[str, str], set[int]] = {}
    for loc in locations:
        dropped.setdefault((loc.action, loc.slot), set()).add(loc.index)
    actions = []
    for action in domain.actions:
        pre = _without(action.precondition, dropped.get((action.name, "precondition")))
        eff = _without(action.effect, dropped.get((action.name, "effect")))
        actions.append(replace(action, precondition=pre, effect=eff))
    new_domain = replace(domain, actions=tuple(actions))
    empty = tuple(a.name for a in new_domain.actions if not a.effect)
    return PerturbedDomain(new_domain, tuple(locations), empty)


def term_diff(a: Domain, b: Domain) -> int:
    """Size of the per-(action, slot) multiset symmetric difference of terms."""
    actions_a = a.action_table
    actions_b = b.action_table
    if set(actions_a) != set(actions_b):
        raise SignatureMismatch("action names differ")
    total = 0
    for name, act_a in actions_a.items():
        act_b = actions_b[name]
        if act_a.params != act_b.params:
            raise SignatureMismatch(f"action {name}: parameter signatures differ")
        for slot in ("precondition", "effect"):
            ca = Counter(getattr(act_a, slot))
            cb = Counter(getattr(act_b, slot))
            total += sum(((ca - cb) + (cb - ca)).values())
    return total


def pnf_rate(
    domain: Domain,
    problems: list[Problem],
    k: int,
    samples: int,
    limits: SearchLimits,
    rng: random.Random,
) -> PnfEntry:
    """Fraction of (perturbed domain, problem) pairs proven unsolvable.

    Budget-exhausted searches are excluded from both numerator and
    denominator; their count is reported separately.
    """
    seeds = [rng.getrandbits(64) for _ in range(samples)]
    counted = exhausted = unsolvable = 0
    for seed in seeds:
        perturbed = remove_terms(domain, k, random.Random(seed))
        for problem in problems:
            outcome = solve(perturbed.domain, problem, limits)
            if outcome.plan is None and outcome.reason == BUDGET_EXHAUSTED:
                exhausted += 1
                continue
            counted += 1
            if outcome.plan is None:
                unsolvable += 1
    rate = unsolvable / counted if counted else None
    return PnfEntry(k, rate, counted, exhausted)


def ew_correlation_study(
    domain: Domain,
    problems: list[Problem],
    pair_count: int,
    config: WalkConfig,
    rng: random.Random,
    k_max: int = 5,
) -> list[BucketRow]:
    """Sample perturbed-domain pairs, bucket by term difference, mean EW each.

    Both sides of a pair draw their removal count uniformly from 0..k_max.
    Buckets are the observed term differences; empty ones are omitted.
    """
    buckets: dict[int, list[float]] = {}
    for _ in range(pair_count):
        k1 = rng.randint(0, k_max)
        k2 = rng.randint(0, k_max)
        side_a = remove_terms(domain, k1, random.Random(rng.getrandbits(64)))
        side_b = remove_terms(domain, k2, random.Random(rng.getrandbits(64)))
        diff = term_diff(side_a.domain, side_b.domain)
        pair_config = replace(config, seed=rng.getrandbits(32))
        report = multi_problem_ew(
            side_a.domain, problems, side_b.domain, problems, pair_config
        )
        buckets.setdefault(diff, []).append(report.symmetric)
    return [
        BucketRow(diff, sum(vals) / len(vals), len(vals))
        for diff, vals in sorted(buckets.items())
    ]


def _without(literals, indices):
    if not indices:
        return literals
    return tuple(lit for i, lit in enumerate(literals) if i not in indices)

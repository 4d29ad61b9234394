"""Exploration walks and the walk-alignment score between two environments.

A walk of length T picks uniformly among legal actions T times. The one-sided
score of (source -> target) is the mean, over walk lengths 1..t_max, of the
fraction of sampled source walks that replay executably on the target. Walks
that dead-end before reaching their requested length are excluded from that
length's estimate (their count is surfaced); a length with no usable sample
drops out of the mean. The symmetric score is the harmonic mean of the two
directions, 0 when either side is 0.

Each walk draws from its own RNG seeded by (seed, problem index, length,
sample index), so results are independent of evaluation order and the two
directions of a pair consume identical sample streams regardless of argument
order: symmetric_ew(a, b, cfg) == symmetric_ew(b, a, cfg) exactly.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from planwalk.pddl.model import Domain, Problem
from planwalk.world import (
    BoundEnv,
    GroundAction,
    Plan,
    align_objects,
    as_access,
    bind,
)


@dataclass(frozen=True)
class WalkConfig:
    t_max: int = 10
    walks_per_length: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.t_max < 1 or self.walks_per_length < 1:
            raise ValueError("t_max and walks_per_length must be positive")


@dataclass(frozen=True)
class WalkSample:
    actions: Plan
    truncated: bool  # dead end before the requested length


@dataclass(frozen=True)
class OneSidedEw:
    value: float
    per_length: tuple[tuple[int, float | None], ...]
    samples_used: int
    samples_excluded: int


@dataclass(frozen=True)
class EwReport:
    forward: float
    backward: float
    symmetric: float
    per_length: tuple[tuple[int, float | None, float | None], ...]
    samples_used: tuple[int, int]
    samples_excluded: tuple[int, int]


@dataclass(frozen=True)
class WalkFeedback:
    prefix: Plan
    failing_action: GroundAction
    state_description: str


def derive_rng(seed: int, *track) -> random.Random:
    """A generator keyed by (seed, *track); the same key always replays."""
    key = ":".join([str(seed)] + [str(t) for t in track])
    digest = hashlib.sha256(key.encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def sample_walk(env, t: int, rng: random.Random) -> WalkSample:
    """Uniform random walk of length `t` over legal actions; may truncate."""
    access = as_access(env)
    actions: list[GroundAction] = []
    for _ in range(t):
        legal = access.legal_actions_after(tuple(actions))
        if not legal:
            return WalkSample(tuple(actions), True)
        actions.append(legal[rng.randrange(len(legal))])
    return WalkSample(tuple(actions), False)


def harmonic_alignment(forward: float, backward: float) -> float:
    """Harmonic mean of the two one-sided scores; 0 whenever a side is 0."""
    if forward <= 0.0 or backward <= 0.0:
        return 0.0
    return 2.0 / (1.0 / forward + 1.0 / backward)


def one_sided_ew(source, target, config: WalkConfig = WalkConfig()) -> OneSidedEw:
    """Monte-Carlo estimate of how well `target` executes `source` walks."""
    _check_alignment(source, target)
    return _one_sided(source, target, config, problem_index=0)


def symmetric_ew(a, b, config: WalkConfig = WalkConfig()) -> EwReport:
    _check_alignment(a, b)
    forward = _one_sided(a, b, config, problem_index=0)
    backward = _one_sided(b, a, config, problem_index=0)
    return _combine([forward], [backward], config)


def multi_problem_ew(
    domain_a: Domain,
    problems_a: list[Problem],
    domain_b: Domain,
    problems_b: list[Problem],
    config: WalkConfig = WalkConfig(),
) -> EwReport:
    """Symmetric score averaged over paired problem lists with equal weight."""
    if len(problems_a) != len(problems_b):
        raise ValueError("problem lists must pair up")
    if not problems_a:
        raise ValueError("at least one problem pair is required")
    forwards, backwards = [], []
    for j, (pa, pb) in enumerate(zip(problems_a, problems_b)):
        align_objects(pa, pb)
        env_a = bind(domain_a, pa)
        env_b = bind(domain_b, pb)
        forwards.append(_one_sided(env_a, env_b, config, problem_index=j))
        backwards.append(_one_sided(env_b, env_a, config, problem_index=j))
    return _combine(forwards, backwards, config)


def walk_until_failure(source, target, rng: random.Random, t: int) -> WalkFeedback | None:
    """Sample one source walk and replay it on the target; None if it runs clean."""
    walk = sample_walk(source, t, rng)
    if not walk.actions:
        return None
    observation = as_access(target).check_executable(walk.actions)
    if observation.executable:
        return None
    idx = observation.failed_index
    return WalkFeedback(
        prefix=walk.actions[:idx],
        failing_action=walk.actions[idx],
        state_description=observation.state_description,
    )


def _one_sided(source, target, config, problem_index) -> OneSidedEw:
    src = as_access(source)
    tgt = as_access(target)
    per_length = []
    used_total = excluded_total = 0
    for t in range(1, config.t_max + 1):
        ok = used = excluded = 0
        for i in range(config.walks_per_length):
            rng = derive_rng(config.seed, problem_index, t, i)
            walk = sample_walk(src, t, rng)
            if walk.truncated:
                excluded += 1
                continue
            used += 1
            if tgt.check_executable(walk.actions).executable:
                ok += 1
        per_length.append((t, ok / used if used else None))
        used_total += used
        excluded_total += excluded
    fractions = [frac for _, frac in per_length if frac is not None]
    value = sum(fractions) / len(fractions) if fractions else 0.0
    return OneSidedEw(value, tuple(per_length), used_total, excluded_total)


def _combine(forwards, backwards, config) -> EwReport:
    fwd = sum(o.value for o in forwards) / len(forwards)
    bwd = sum(o.value for o in backwards) / len(backwards)
    per_length = tuple(
        (t, _mean_at(forwards, t), _mean_at(backwards, t))
        for t in range(1, config.t_max + 1)
    )
    return EwReport(
        forward=fwd,
        backward=bwd,
        symmetric=harmonic_alignment(fwd, bwd),
        per_length=per_length,
        samples_used=(
            sum(o.samples_used for o in forwards),
            sum(o.samples_used for o in backwards),
        ),
        samples_excluded=(
            sum(o.samples_excluded for o in forwards),
            sum(o.samples_excluded for o in backwards),
        ),
    )


def _mean_at(sides: list[OneSidedEw], t: int) -> float | None:
    vals = [frac for side in sides for (tt, frac) in side.per_length if tt == t and frac is not None]
    return sum(vals) / len(vals) if vals else None


def _check_alignment(a, b) -> None:
    # handles hide their problem; alignment there is the caller's contract
    if isinstance(a, BoundEnv) and isinstance(b, BoundEnv):
        align_objects(a.problem, b.problem)

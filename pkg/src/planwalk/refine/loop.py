"""Environment-feedback refinement.

Problem candidates come first; each one opens a branch in which the domain
is edited round by round, rated by symmetric walk score against the true
environment, and fed back the failing walk. The best branch's pair is then
used to translate the remaining problems and score the whole set.

The true environment participates only through its execution handle: legal
actions, executability, validation. Its PDDL text is never read here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

from planwalk.errors import PlanwalkError
from planwalk.exploration import (
    WalkConfig,
    WalkFeedback,
    derive_rng,
    symmetric_ew,
    walk_until_failure,
)
from planwalk.llm import (
    blocksworld_example,
    build_batch_translation_prompt,
    build_domain_draft_prompt,
    build_problem_from_draft_prompt,
    build_problem_prompt,
    build_refinement_prompt,
)
from planwalk.pddl import (
    Domain,
    NoCodeBlock,
    ParseError,
    Problem,
    extract_pddl_block,
    parse_domain,
    parse_problem,
    print_domain,
    print_problem,
)
from planwalk.planner import SearchLimits, solve
from planwalk.refine.edits import apply_edits
from planwalk.refine.rating import (
    Rating,
    ew_score,
    no_initial_action,
    sanity_check_failure,
    undefined_predicate_edit,
)
from planwalk.refine.trace import BranchRecord, RefinementTrace, RoundRecord
from planwalk.world import (
    BindError,
    ObjectMisalignment,
    Plan,
    align_objects,
    bind,
    initial_state,
    legal_actions,
)

VARIANTS = ("chain", "tree", "tree-domprop")


class AllCandidatesUnparseable(PlanwalkError):
    pass


class LlmBudgetExceeded(PlanwalkError):
    pass


@dataclass(frozen=True)
class EnvironmentSpec:
    """Everything refinement is allowed to see about an environment.

    Natural language, the interface templates, and one execution handle per
    problem. Ground-truth PDDL stays behind the handles.
    """

    name: str
    domain_nl: str
    domain_template_text: str
    problem_nls: tuple[str, ...]
    problem_template_texts: tuple[str, ...]
    handles: tuple  # E/A/V access, one per problem, aligned with the NLs

    def __post_init__(self):
        n = len(self.problem_nls)
        if n == 0:
            raise ValueError("an environment needs at least one problem")
        if len(self.problem_template_texts) != n or len(self.handles) != n:
            raise ValueError("problem NLs, templates, and handles must align")
        parse_domain(self.domain_template_text)
        for text in self.problem_template_texts:
            parse_problem(text)

    @cached_property
    def domain_template(self) -> Domain:
        return parse_domain(self.domain_template_text)

    @cached_property
    def problem_templates(self) -> tuple[Problem, ...]:
        return tuple(parse_problem(t) for t in self.problem_template_texts)

    @property
    def n_problems(self) -> int:
        return len(self.problem_nls)


@dataclass(frozen=True)
class RefinementConfig:
    variant: str = "chain"
    n_p: int = 1  # problem candidates (branches)
    n_d: int = 1  # domain edit samples per round
    c_max: int = 3
    seed: int = 0
    walk_config: WalkConfig = WalkConfig()
    search_limits: SearchLimits = SearchLimits()
    max_llm_calls: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "chain" and (self.n_p, self.n_d) != (1, 1):
            raise ValueError("the chain variant fixes n_p = n_d = 1")
        if min(self.n_p, self.n_d, self.c_max) < 1:
            raise ValueError("n_p, n_d, and c_max must be positive")

    def as_json(self) -> dict:
        return {
            "variant": self.variant,
            "n_p": self.n_p,
            "n_d": self.n_d,
            "c_max": self.c_max,
            "seed": self.seed,
            "walk": {
                "t_max": self.walk_config.t_max,
                "walks_per_length": self.walk_config.walks_per_length,
                "seed": self.walk_config.seed,
            },
            "limits": {
                "max_expanded_states": self.search_limits.max_expanded_states,
                "wall_clock_seconds": self.search_limits.wall_clock_seconds,
            },
            "max_llm_calls": self.max_llm_calls,
        }


class _Recorder:
    """Backend wrapper: enforces the call cap and logs every exchange."""

    def __init__(self, backend, max_calls: int | None = None):
        self._backend = backend
        self._max_calls = max_calls
        self.calls = 0
        self.exchanges: list[dict] = []

    def complete(self, request) -> list[str]:
        if self._max_calls is not None and self.calls >= self._max_calls:
            raise LlmBudgetExceeded(f"call cap of {self._max_calls} reached")
        self.calls += 1
        responses = self._backend.complete(request)
        self.exchanges.append(
            {
                "messages": [
                    {"role": m.role, "content": m.content} for m in request.messages
                ],
                "n": request.n,
                "temperature": request.effective_temperature,
                "responses": list(responses),
            }
        )
        return responses


def _pddl_text_from_reply(reply: str) -> str:
    # fenced block preferred; raw text as a last resort
    try:
        return extract_pddl_block(reply)
    except NoCodeBlock:
        return reply


def _domain_from_reply(reply: str) -> Domain | None:
    try:
        return parse_domain(_pddl_text_from_reply(reply))
    except ParseError:
        return None


def _problem_from_reply(reply: str, spec: EnvironmentSpec, index: int) -> Problem | None:
    """Parse a reply into a problem aligned with template `index` (0-based)."""
    try:
        problem = parse_problem(_pddl_text_from_reply(reply))
    except ParseError:
        return None
    template = spec.problem_templates[index]
    if problem.domain_name != template.domain_name:
        return None
    try:
        align_objects(problem, template)
    except ObjectMisalignment:
        return None
    return problem


def generate_problem_candidates(llm, spec: EnvironmentSpec, n_p: int) -> list[Problem]:
    """Sample n_p candidates for the first problem.

    A reply that fails to parse or that renames objects is retried once
    greedily, then dropped; an empty candidate list is an error.
    """
    request = build_problem_prompt(
        spec.problem_nls[0],
        spec.problem_template_texts[0],
        blocksworld_example(),
        n=n_p,
    )
    candidates = []
    for reply in llm.complete(request):
        problem = _problem_from_reply(reply, spec, 0)
        if problem is None:
            retry = llm.complete(replace(request, n=1))[0]
            problem = _problem_from_reply(retry, spec, 0)
        if problem is not None:
            candidates.append(problem)
    if not candidates:
        raise AllCandidatesUnparseable("no problem candidate survived parsing")
    return candidates


def generate_problem_candidates_domprop(
    llm, spec: EnvironmentSpec, n_p: int
) -> list[tuple[Domain | None, Problem]]:
    """Draft a throwaway domain first, then condition the problem candidate
    on the draft's predicates. An unparseable draft falls back to the plain
    problem prompt for that candidate."""
    example = blocksworld_example()
    drafts = llm.complete(build_domain_draft_prompt(spec.domain_nl, example, n=n_p))
    pairs = []
    for draft_reply in drafts:
        draft = _domain_from_reply(draft_reply)
        if draft is None:
            request = build_problem_prompt(
                spec.problem_nls[0], spec.problem_template_texts[0], example
            )
        else:
            request = build_problem_from_draft_prompt(
                print_domain(draft),
                spec.problem_nls[0],
                spec.problem_template_texts[0],
                example,
            )
        problem = _problem_from_reply(llm.complete(request)[0], spec, 0)
        if problem is None:
            problem = _problem_from_reply(llm.complete(request)[0], spec, 0)
        if problem is not None:
            pairs.append((draft, problem))
    if not pairs:
        raise AllCandidatesUnparseable("no problem candidate survived parsing")
    return pairs


def rate_domain(
    domain: Domain,
    problem: Problem,
    handle,
    walk_config: WalkConfig = WalkConfig(),
    search_limits: SearchLimits = SearchLimits(),
) -> tuple[Rating, Plan | None]:
    """Rate a candidate pair against the true environment.

    Ladder: whole-domain sanity (an action still has no effects), bind,
    no-legal-initial-action, then the symmetric walk score. At a perfect
    score the planner runs; a plan the environment validates is attached as
    the early-stop witness.
    """
    for schema in domain.actions:
        if not schema.effect:
            return (
                sanity_check_failure(f"action {schema.name} has an empty effect list"),
                None,
            )
    try:
        env = bind(domain, problem)
    except BindError as exc:
        return undefined_predicate_edit(f"cannot bind: {exc}"), None
    if not legal_actions(env, initial_state(env)):
        return no_initial_action("no action is applicable in the initial state"), None
    report = symmetric_ew(handle, env, walk_config)
    if report.symmetric < 1.0:
        return ew_score(report.symmetric), None
    outcome = solve(domain, problem, search_limits)
    if outcome.plan is not None and handle.validate_plan(outcome.plan):
        return ew_score(1.0, "planner plan validated on the environment"), outcome.plan
    return ew_score(1.0), None


@dataclass
class _Branch:
    index: int
    problem: Problem
    handle: object
    base: Domain  # last round winner; edits apply to this
    best: Domain
    best_rating: Rating | None = None
    best_plan: Plan | None = None
    early_stopped: bool = False
    history: list = field(default_factory=list)
    rounds: list = field(default_factory=list)


def refinement_round(
    branch: _Branch, llm, spec: EnvironmentSpec, config: RefinementConfig, round_index: int
) -> None:
    """One feedback round: sample n_d edit replies against the branch base,
    rate each, keep the winner (ties to the lowest index), and append the
    (winner reply, feedback) pair to the history."""
    request = build_refinement_prompt(
        spec.domain_nl, spec.domain_template_text, branch.history, n=config.n_d
    )
    replies = llm.complete(request)
    rated: list[tuple[Rating, Domain | None, Plan | None]] = []
    for reply in replies:
        outcome = apply_edits(branch.base, reply)
        if isinstance(outcome, Rating):
            rated.append((outcome, None, None))
        else:
            score, plan = rate_domain(
                outcome, branch.problem, branch.handle,
                config.walk_config, config.search_limits,
            )
            rated.append((score, outcome, plan))
    winner = max(range(len(rated)), key=lambda i: (rated[i][0], -i))
    win_rating, win_domain, win_plan = rated[winner]

    feedback = _compose_feedback(branch, config, round_index, win_rating, win_domain)
    branch.history.append((replies[winner], feedback))
    if win_domain is not None:
        branch.base = win_domain
        if branch.best_rating is None or win_rating > branch.best_rating:
            branch.best = win_domain
            branch.best_rating = win_rating
            branch.best_plan = win_plan
    if win_plan is not None and win_rating.score == 1.0:
        branch.early_stopped = True
    branch.rounds.append(
        RoundRecord(
            index=round_index,
            replies=tuple(replies),
            ratings=tuple(r for r, _, _ in rated),
            winner_index=winner,
            winner_domain_text=print_domain(win_domain) if win_domain else None,
            feedback=feedback,
        )
    )


def _compose_feedback(branch, config, round_index, win_rating, win_domain) -> str:
    if win_domain is None:
        return (
            "The modification was rejected before it could be scored: "
            f"{win_rating.detail or win_rating.kind}."
        )
    try:
        env = bind(win_domain, branch.problem)
    except BindError as exc:
        return f"The modified domain does not fit the problem: {exc}."
    blocks = []
    forward = _failing_walk(branch.handle, env, config, branch.index, round_index, "fwd")
    if forward is not None:
        blocks.append(
            _render_walk(
                forward,
                "(This walk was sampled on the environment and replayed on your domain.)",
            )
        )
    backward = _failing_walk(env, branch.handle, config, branch.index, round_index, "bwd")
    if backward is not None:
        blocks.append(
            _render_walk(
                backward,
                "(This walk was sampled on your domain and replayed on the environment.)",
            )
        )
    if not blocks:
        return "All sampled walks executed cleanly in both directions."
    return "\n\n".join(blocks)


def _failing_walk(source, target, config, branch_index, round_index, label):
    rng = derive_rng(config.seed, "feedback", branch_index, round_index, label)
    for _ in range(config.walk_config.walks_per_length):
        found = walk_until_failure(source, target, rng, config.walk_config.t_max)
        if found is not None:
            return found
    return None


def _render_walk(fb: WalkFeedback, note: str) -> str:
    lines = ["Executed action sequence:"]
    if fb.prefix:
        lines.extend(str(a) for a in fb.prefix)
    else:
        lines.append("(none)")
    lines.append(f"The next action {fb.failing_action} failed to execute.")
    lines.append("State description at the last step:")
    lines.append(fb.state_description)
    lines.append(note)
    return "\n".join(lines)


def translate_remaining_problems(
    llm, spec: EnvironmentSpec, p1: Problem
) -> list[Problem | None]:
    """One greedy call per problem 2..N, with (first NL, first candidate) as
    the exemplar; failures come back as None entries, not errors."""
    p1_text = print_problem(p1)
    results: list[Problem | None] = []
    for i in range(2, spec.n_problems + 1):
        request = build_batch_translation_prompt(
            spec.problem_nls[0],
            p1_text,
            spec.problem_nls[i - 1],
            spec.problem_template_texts[i - 1],
            problem_index=i,
        )
        results.append(_problem_from_reply(llm.complete(request)[0], spec, i - 1))
    return results


def evaluate_solve_rate(
    domain: Domain,
    problems: Sequence[Problem | None],
    handles: Sequence,
    search_limits: SearchLimits = SearchLimits(),
) -> float:
    """Plan each pair and validate the plan on the true environment; missing
    problems and failed searches count as unsolved."""
    if len(problems) != len(handles):
        raise ValueError("problems and handles must align")
    solved = 0
    for problem, handle in zip(problems, handles):
        if problem is None:
            continue
        outcome = solve(domain, problem, search_limits)
        if outcome.plan is not None and handle.validate_plan(outcome.plan):
            solved += 1
    return solved / len(problems)


def best_at_k(results: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Componentwise max of (solve rate, walk score) pairs across runs."""
    if not results:
        raise ValueError("need at least one run")
    return max(r[0] for r in results), max(r[1] for r in results)


def run_refinement(spec: EnvironmentSpec, config: RefinementConfig, llm) -> RefinementTrace:
    recorder = _Recorder(llm, config.max_llm_calls)
    if config.variant == "tree-domprop":
        candidates = [p for _, p in generate_problem_candidates_domprop(recorder, spec, config.n_p)]
    else:
        candidates = generate_problem_candidates(recorder, spec, config.n_p)

    branches: list[_Branch] = []
    for j, problem in enumerate(candidates):
        branch = _Branch(
            index=j,
            problem=problem,
            handle=spec.handles[0],
            base=spec.domain_template,
            best=spec.domain_template,
        )
        for round_index in range(1, config.c_max + 1):
            refinement_round(branch, recorder, spec, config, round_index)
            if branch.early_stopped:
                break
        branches.append(branch)

    final = max(
        branches,
        key=lambda b: (
            b.best_rating.score if b.best_rating is not None else float("-inf"),
            -b.index,
        ),
    )
    translations = tuple(translate_remaining_problems(recorder, spec, final.problem))
    problems: list[Problem | None] = [final.problem, *translations]
    solve_rate = evaluate_solve_rate(
        final.best, problems, spec.handles, config.search_limits
    )

    return RefinementTrace(
        environment=spec.name,
        config_json=config.as_json(),
        candidate_records=tuple(
            {"branch_index": b.index, "problem": print_problem(b.problem)}
            for b in branches
        ),
        branches=tuple(
            BranchRecord(
                branch_index=b.index,
                problem=b.problem,
                rounds=tuple(b.rounds),
                best_domain=b.best,
                best_rating=b.best_rating,
                early_stopped=b.early_stopped,
            )
            for b in branches
        ),
        final_branch_index=final.index,
        final_domain=final.best,
        final_problem=final.problem,
        translations=translations,
        solve_rate=solve_rate,
        early_stopped=final.early_stopped,
        llm_calls=recorder.calls,
        exchanges=tuple(recorder.exchanges),
    )

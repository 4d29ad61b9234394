"""Acceptance suite: one checked claim per test, one printed verdict line each.

Every test times itself against its stated budget and prints
`acceptance NN PASS/FAIL <claim> (<seconds>)` straight to the terminal,
bypassing capture, so a plain pytest run shows the scoreboard.
"""

import dataclasses
import itertools
import json
import random
import time
from collections import deque
from contextlib import contextmanager

from click.testing import CliRunner

from planwalk import world
from planwalk.bundle import environment_spec
from planwalk.cli import main
from planwalk.exploration import (
    WalkConfig,
    derive_rng,
    harmonic_alignment,
    multi_problem_ew,
    symmetric_ew,
)
from planwalk.pddl import (
    Atom,
    Literal,
    Problem,
    TypedName,
    parse_domain,
    parse_problem,
)
from planwalk.perturb import (
    enumerate_terms,
    pnf_rate,
    remove_located_terms,
    remove_terms,
    term_diff,
)
from planwalk.planner import SearchLimits, plan_or_not_found, solve
from planwalk.refine import (
    Rating,
    RefinementConfig,
    apply_edits,
    evaluate_solve_rate,
    ew_score,
    rate_domain,
    run_refinement,
)
from planwalk.world import GroundAction, bind, parse_plan_text

from conftest import CHAIN_RULES, RecordingHandle


@contextmanager
def criterion(capfd, number, claim, budget_seconds):
    started = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - started
        assert elapsed < budget_seconds, f"took {elapsed:.2f}s, budget {budget_seconds}s"
    except BaseException:
        elapsed = time.perf_counter() - started
        with capfd.disabled():
            print(f"acceptance {number:02d} FAIL {claim} ({elapsed:.2f}s)", flush=True)
        raise
    with capfd.disabled():
        print(f"acceptance {number:02d} PASS {claim} ({elapsed:.2f}s)", flush=True)


def test_01_golden_fixture(grippers, capfd):
    with criterion(capfd, 1, "golden grippers fixture validates, wrong-room drop does not", 0.1):
        domain = parse_domain(grippers.domain_text)
        problem = parse_problem(grippers.problem_texts[0])
        plan = parse_plan_text("\n".join(str(a) for a in grippers.plans[0]))
        env = bind(domain, problem)
        assert len(plan) == 11
        assert world.validate_plan(env, plan)
        wrong_room = plan[:-1] + (
            GroundAction("drop", ("robot1", "ball1", "room1", "rgripper1")),
        )
        assert not world.validate_plan(env, wrong_room)


def leaf_types(domain):
    used = set()
    for a in domain.actions:
        used.update(p.type for p in a.params)
    for p in domain.predicates:
        used.update(q.type for q in p.params)
    return sorted(used) or ["object"]


def all_ground_atoms(domain, objects):
    by_type = {}
    for o in list(objects) + list(domain.constants):
        by_type.setdefault(o.type, []).append(o.name)

    def pool(want):
        return [
            n
            for t, names in by_type.items()
            if domain.is_subtype(t, want)
            for n in names
        ]

    atoms = []
    for decl in domain.predicates:
        pools = [pool(p.type) for p in decl.params]
        if any(not p for p in pools):
            continue
        for combo in itertools.product(*pools):
            atoms.append(Atom(decl.name, combo))
    return atoms


def random_micro_problem(domain, rng, index):
    objects = []
    for t in leaf_types(domain):
        for i in range(rng.randint(1, 2)):
            objects.append(TypedName(f"{t}{i + 1}", t))
    universe = all_ground_atoms(domain, objects)
    init = tuple(sorted((a for a in universe if rng.random() < 0.4), key=str))
    goal_atoms = rng.sample(universe, rng.randint(1, min(3, len(universe))))
    return Problem(
        name=f"micro-{index}",
        domain_name=domain.name,
        objects=tuple(objects),
        init=init,
        goal=tuple(Literal(a.pred, a.args) for a in goal_atoms),
    )


def bfs_reaches_goal(env, cap=200_000):
    start = world.initial_state(env)
    if world.goal_satisfied(env, start):
        return True
    seen = {start.atoms}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for action in world.legal_actions(env, state):
            nxt = world.apply(env, state, action)
            if nxt.atoms in seen:
                continue
            if world.goal_satisfied(env, nxt):
                return True
            assert len(seen) < cap, "oracle state cap exceeded"
            seen.add(nxt.atoms)
            queue.append(nxt)
    return False


def test_02_planner_agrees_with_exhaustive_oracle(grippers, grippers_ood, capfd):
    with criterion(capfd, 2, "planner matches BFS oracle on 100 random micro-problems", 60):
        rng = random.Random(20260814)
        solvable = unsolvable = 0
        for i in range(100):
            domain = grippers.domain if i % 2 == 0 else grippers_ood.domain
            problem = random_micro_problem(domain, rng, i)
            env = bind(domain, problem)
            oracle = bfs_reaches_goal(env)
            outcome = solve(domain, problem)
            if oracle:
                assert outcome.plan is not None, f"case {i}: plan exists, search gave up"
                assert world.validate_plan(env, outcome.plan), f"case {i}: returned plan invalid"
                solvable += 1
            else:
                assert outcome.plan is None and outcome.reason == "plan-not-found", (
                    f"case {i}: oracle proves unsolvable, planner said {outcome.reason}"
                )
                unsolvable += 1
        assert solvable > 10 and unsolvable > 10  # both verdicts exercised


def strip_preconditions(domain):
    return dataclasses.replace(
        domain,
        actions=tuple(
            dataclasses.replace(a, precondition=()) for a in domain.actions
        ),
    )


def test_03_ew_identity_and_inflation_resistance(grippers, capfd):
    with criterion(capfd, 3, "self walk score is 1.0; no-precondition variant stays below 0.5", 120):
        config = WalkConfig(t_max=10, walks_per_length=20, seed=0)
        env = bind(grippers.domain, grippers.problems[0])
        self_report = symmetric_ew(env, env, config)
        assert self_report.symmetric == 1.0
        assert self_report.forward == 1.0 and self_report.backward == 1.0

        loose = bind(strip_preconditions(grippers.domain), grippers.problems[0])
        report = symmetric_ew(env, loose, config)
        assert report.forward == 1.0
        assert report.symmetric < 0.5

        swapped = symmetric_ew(loose, env, config)
        assert swapped.symmetric == report.symmetric


def test_04_harmonic_mean_algebra(capfd):
    with criterion(capfd, 4, "harmonic combination: (1, 1/2) -> 2/3, any zero side -> 0", 1):
        assert abs(harmonic_alignment(1.0, 0.5) - 2.0 / 3.0) <= 1e-12
        assert harmonic_alignment(0.0, 1.0) == 0.0
        assert harmonic_alignment(1.0, 0.0) == 0.0


def test_05_fatal_term_removal(grippers, capfd):
    with criterion(capfd, 5, "removing move's destination effect is provably fatal everywhere", 10):
        target = [
            t
            for t in enumerate_terms(grippers.domain)
            if t.action == "move"
            and t.slot == "effect"
            and t.literal == Literal("at-robby", ("?r", "?to"))
        ]
        assert len(target) == 1
        broken = remove_located_terms(grippers.domain, target).domain
        for problem in grippers.problems:
            assert plan_or_not_found(broken, problem, SearchLimits())


def test_06_pnf_rises_with_removal_count(grippers, capfd):
    with criterion(capfd, 6, "unsolvability rate is non-decreasing in removals (k 0..5)", 300):
        limits = SearchLimits(max_expanded_states=20_000, wall_clock_seconds=5.0)
        rates = []
        for k in range(6):
            entry = pnf_rate(
                grippers.domain,
                list(grippers.problems),
                k,
                samples=500,
                limits=limits,
                rng=derive_rng(0, "pnf", k),
            )
            assert entry.rate is not None
            rates.append(entry.rate)
        assert rates[0] == 0.0
        inversions = [
            rates[i] - rates[i + 1] for i in range(5) if rates[i + 1] < rates[i]
        ]
        assert len(inversions) <= 1
        assert all(drop <= 0.02 for drop in inversions), f"rates {rates}"


def test_07_walk_score_separates_near_from_far(grippers, capfd):
    with criterion(capfd, 7, "mean walk score at term distance 1 beats distance 5", 120):
        config = WalkConfig(t_max=10, walks_per_length=20, seed=0)
        problems = list(grippers.problems)
        means = {}
        for k in (1, 5):
            scores = []
            for i in range(10):
                mutant = remove_terms(grippers.domain, k, derive_rng(0, "ewsep", k, i)).domain
                assert term_diff(grippers.domain, mutant) == k
                scores.append(
                    multi_problem_ew(
                        grippers.domain, problems, mutant, problems, config
                    ).symmetric
                )
            means[k] = sum(scores) / len(scores)
        assert means[1] > means[5], f"means {means}"


def test_08_scripted_chain_refinement(grippers, chain_fixture_path, tmp_path, capfd):
    with criterion(capfd, 8, "scripted chain run: imperfect then perfect, early stop, all solved", 30):
        out = tmp_path / "trace.json"
        result = CliRunner().invoke(
            main,
            [
                "refine", "grippers",
                "--variant", "chain",
                "--backend", f"scripted:{chain_fixture_path}",
                "--seed", "0",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        trace = json.loads(out.read_text())
        rounds = trace["branches"][0]["rounds"]
        ratings = [r["ratings"][0] for r in rounds]
        assert [r["kind"] for r in ratings] == ["ew-score", "ew-score"]
        assert 0.0 < ratings[0]["score"] < 1.0
        assert ratings[1]["score"] == 1.0
        assert trace["early_stopped"] is True

        spec = environment_spec(grippers)
        refined = parse_domain(trace["final"]["domain"])
        assert evaluate_solve_rate(refined, list(grippers.problems), spec.handles) == 1.0


def test_09_rating_ladder_exact_scores(grippers, grippers_spec, capfd):
    declare = (
        'add_or_update_predicates(["(at-robby ?r - robot ?x - room)", '
        '"(at ?o - obj ?x - room)", "(free ?r - robot ?g - gripper)", '
        '"(carry ?r - robot ?o - obj ?g - gripper)", "(jammed ?r - robot)"])'
    )
    replies = {
        -5.0: "I cannot edit anything today.",
        -4.0: 'modify_action("move", [)(])',
        -3.0: declare + '\nmodify_action("move", ["(at-robby ?r ?from)"], [])',
        -2.0: 'modify_action("move", ["(flying ?r)"], ["(at-robby ?r ?to)"])',
        -1.0: declare
        + '\nmodify_action("move", ["(jammed ?r)"], ["(at-robby ?r ?to)"])'
        + '\nmodify_action("pick", ["(jammed ?r)"], ["(carry ?r ?o ?g)"])'
        + '\nmodify_action("drop", ["(jammed ?r)"], ["(at ?o ?room)"])',
    }
    with criterion(capfd, 9, "failure replies land on exactly -5 -4 -3 -2 -1", 30):
        for want, reply in replies.items():
            outcome = apply_edits(grippers_spec.domain_template, reply)
            if isinstance(outcome, Rating):
                rating = outcome
            else:
                rating, _ = rate_domain(
                    outcome, grippers.problems[0], grippers_spec.handles[0]
                )
            assert rating.score == want, f"{reply[:40]!r} -> {rating}"
        perfect, _ = rate_domain(
            grippers.domain, grippers.problems[0], grippers_spec.handles[0]
        )
        assert perfect == ew_score(1.0)


def test_10_refinement_touches_only_the_execution_surface(grippers, capfd):
    from planwalk.llm import ScriptedBackend, ScriptedRule

    with criterion(capfd, 10, "refinement sees the environment only through run/check/validate", 30):
        spec = environment_spec(grippers)
        recorders = tuple(RecordingHandle(h) for h in spec.handles)
        wrapped = dataclasses.replace(spec, handles=recorders)
        backend = ScriptedBackend(
            [ScriptedRule(r["matcher"], list(r["responses"])) for r in CHAIN_RULES]
        )
        run_refinement(wrapped, RefinementConfig(variant="chain", seed=0), backend)
        calls = [c for rec in recorders for c in rec.calls]
        assert calls, "the environment was never consulted"
        assert set(calls) <= {"legal_actions_after", "check_executable", "validate_plan"}


def test_11_seeded_runs_are_byte_identical(chain_fixture_path, tmp_path, capfd):
    with criterion(capfd, 11, "same seed, same fixture: traces and reports match byte for byte", 60):
        runner = CliRunner()
        outs = []
        for name in ("one.json", "two.json"):
            out = tmp_path / name
            result = runner.invoke(
                main,
                [
                    "refine", "grippers",
                    "--backend", f"scripted:{chain_fixture_path}",
                    "--seed", "0",
                    "--out", str(out),
                ],
            )
            assert result.exit_code == 0, result.output
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

        ew_args = ["ew", "grippers", "grippers", "--walks-per-length", "5"]
        first = runner.invoke(main, ew_args)
        second = runner.invoke(main, ew_args)
        assert first.exit_code == second.exit_code == 0
        assert first.output == second.output

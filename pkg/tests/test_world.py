"""Grounding, execution, and validation semantics."""

import random

import pytest

from planwalk import world
from planwalk.pddl import Atom, parse_domain, parse_problem
from planwalk.world import (
    ArityOrTypeError,
    DomainMismatch,
    EnvironmentHandle,
    GroundAction,
    ObjectMisalignment,
    UndeclaredObject,
    UnknownGroundAction,
    align_objects,
    format_plan,
    parse_plan_text,
)


@pytest.fixture(scope="module")
def env(grippers):
    return world.bind(grippers.domain, grippers.problems[0])


def test_grounding_counts(env):
    assert len(env.ground_actions) == 210
    assert sum(1 for g in env.ground_actions if g.schema == "move") == 18


def test_legal_actions_at_init(env):
    legal = world.legal_actions(env, world.initial_state(env))
    assert len(legal) == 10
    assert all(world.is_applicable(env, world.initial_state(env), g) for g in legal)


def test_golden_plan_validates(grippers, env):
    plan = grippers.plans[0]
    assert len(plan) == 11
    result = world.check_executable(env, plan)
    assert result.executable and result.failed_index is None
    assert world.validate_plan(env, plan)


def test_truncated_plan_executes_but_misses_goal(grippers, env):
    plan = grippers.plans[0][:10]
    assert world.check_executable(env, plan).executable
    assert not world.validate_plan(env, plan)


def test_wrong_room_drop_invalidates(grippers, env):
    plan = grippers.plans[0]
    last = plan[-1]
    wrong = GroundAction(last.schema, ("robot1", "ball1", "room1", "rgripper1"))
    assert not world.validate_plan(env, plan[:-1] + (wrong,))


def test_unknown_ground_action(env):
    stray = GroundAction("move", ("robot1", "room1", "nowhere"))
    with pytest.raises(UnknownGroundAction):
        world.is_applicable(env, world.initial_state(env), stray)
    # in a plan it just fails at its own index
    result = world.check_executable(env, (stray,))
    assert not result.executable and result.failed_index == 0


def test_apply_moves_robot(grippers, env):
    start = world.initial_state(env)
    step = world.apply(env, start, GroundAction("move", ("robot1", "room2", "room1")))
    assert step.holds(Atom("at-robby", ("robot1", "room1")))
    assert not step.holds(Atom("at-robby", ("robot1", "room2")))


def test_apply_requires_applicability(env):
    start = world.initial_state(env)
    with pytest.raises(world.NotApplicable):
        world.apply(env, start, GroundAction("move", ("robot1", "room1", "room3")))


def test_delete_before_add_keeps_self_move_a_no_op():
    d = parse_domain(
        """(define (domain loop) (:requirements :strips)
  (:predicates (at ?x))
  (:action jump :parameters (?a ?b)
    :precondition (and (at ?a))
    :effect (and (not (at ?a)) (at ?b))))"""
    )
    p = parse_problem(
        "(define (problem one) (:domain loop) (:objects n) (:init (at n)) (:goal (at n)))"
    )
    e = world.bind(d, p)
    after = world.apply(e, world.initial_state(e), GroundAction("jump", ("n", "n")))
    assert after.holds(Atom("at", ("n",)))


def test_set_and_mask_routes_agree(env):
    engine = env._engine
    state = world.initial_state(env)
    mask = engine.mask_of_state(state)
    rng = random.Random(7)
    for _ in range(5):
        legal = world.legal_actions(env, state)
        indices = engine.legal_indices(mask)
        assert {env.ground_actions[i] for i in indices} == set(legal)
        assert engine.goal_satisfied(mask) == world.goal_satisfied(env, state)
        if not legal:
            break
        pick = rng.choice(sorted(legal, key=str))
        state = world.apply(env, state, pick)
        mask = engine.successor(mask, engine.index_of[pick])
        assert engine.mask_of_state(state) == mask


def test_describe_state_lists_facts_sorted(env):
    text = world.describe_state(env, world.initial_state(env))
    lines = text.splitlines()
    assert lines == sorted(lines)
    assert "Predicate at holds for (ball1, room3)." in lines
    assert "Predicate at-robby holds for (robot1, room2)." in lines


def test_bind_error_cases(grippers):
    p = grippers.problems[0]
    other = parse_problem(
        "(define (problem x) (:domain elsewhere) (:objects a) (:init) (:goal (and)))"
    )
    with pytest.raises(DomainMismatch):
        world.bind(grippers.domain, other)

    bad_obj = parse_problem(
        """(define (problem y) (:domain gripper-strips)
  (:objects room1 - room) (:init (at-robby ghost room1)) (:goal (and)))"""
    )
    with pytest.raises(UndeclaredObject):
        world.bind(grippers.domain, bad_obj)

    bad_arity = parse_problem(
        """(define (problem z) (:domain gripper-strips)
  (:objects room1 - room) (:init (at-robby room1)) (:goal (and)))"""
    )
    with pytest.raises(ArityOrTypeError):
        world.bind(grippers.domain, bad_arity)


def test_align_objects(grippers):
    p = grippers.problems[0]
    align_objects(p, p)
    smaller = parse_problem(
        "(define (problem w) (:domain gripper-strips) (:objects room1 - room) (:init) (:goal (and)))"
    )
    with pytest.raises(ObjectMisalignment):
        align_objects(p, smaller)


def test_environment_handle_surface(grippers, env):
    handle = EnvironmentHandle(env)
    assert set(handle.legal_actions_after(())) == set(
        world.legal_actions(env, world.initial_state(env))
    )
    obs = handle.check_executable(grippers.plans[0][:3])
    assert obs.executable and obs.failed_index is None
    # dropping the first move leaves robot2 in the wrong room for the pick
    bad = handle.check_executable(grippers.plans[0][1:])
    assert not bad.executable and bad.failed_index == 0
    assert "Predicate at-robby holds for (robot2, room3)." in bad.state_description
    assert handle.validate_plan(grippers.plans[0])


def test_plan_text_round_trip(grippers):
    plan = grippers.plans[0]
    assert parse_plan_text(format_plan(plan)) == plan
    assert str(plan[0]) == "(move robot2 room3 room1)"

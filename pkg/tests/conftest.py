"""Shared fixtures: bundled environments and a scripted two-round refinement fixture."""

import json

import pytest

from planwalk.bundle import environment_spec, load_bundle

# Candidate problem the scripted run "writes" for grippers. Mirrors the
# bundled p01 so the solve-rate check runs on familiar ground.
P01_REPLY = """```pddl
(define (problem gripper-2-3-4)
  (:domain gripper-strips)
  (:objects robot1 robot2 - robot
            rgripper1 lgripper1 rgripper2 lgripper2 - gripper
            room1 room2 room3 - room
            ball1 ball2 ball3 ball4 - obj)
  (:init
    (at-robby robot1 room2)
    (free robot1 rgripper1)
    (free robot1 lgripper1)
    (at-robby robot2 room3)
    (free robot2 rgripper2)
    (free robot2 lgripper2)
    (at ball1 room3)
    (at ball2 room1)
    (at ball3 room1)
    (at ball4 room3)
  )
  (:goal
    (and
      (at ball1 room2)
      (at ball2 room2)
      (at ball3 room3)
      (at ball4 room3)
    )
  )
)

```"""

# Round 1: full predicate set, pick and drop correct, but move forgets to
# add the destination. Round 2 repairs exactly that term.
ROUND1_REPLY = """Declaring predicates first.
add_or_update_predicates(["(at-robby ?r - robot ?x - room)", "(at ?o - obj ?x - room)", "(free ?r - robot ?g - gripper)", "(carry ?r - robot ?o - obj ?g - gripper)"])
modify_action("move", ["(at-robby ?r ?from)"], ["(not (at-robby ?r ?from))"])
modify_action("pick", ["(at ?o ?room)", "(at-robby ?r ?room)", "(free ?r ?g)"], ["(carry ?r ?o ?g)", "(not (at ?o ?room))", "(not (free ?r ?g))"])
modify_action("drop", ["(carry ?r ?o ?g)", "(at-robby ?r ?room)"], ["(at ?o ?room)", "(free ?r ?g)", "(not (carry ?r ?o ?g))"])"""

ROUND2_REPLY = """Move must add the destination fact.
modify_action("move", ["(at-robby ?r ?from)"], ["(at-robby ?r ?to)", "(not (at-robby ?r ?from))"])"""

P02_REPLY = """```pddl
(define (problem gripper-1-2-2)
  (:domain gripper-strips)
  (:objects robot1 - robot
            rgripper1 lgripper1 - gripper
            room1 room2 - room
            ball1 ball2 - obj)
  (:init
    (at-robby robot1 room1)
    (free robot1 rgripper1)
    (free robot1 lgripper1)
    (at ball1 room1)
    (at ball2 room2)
  )
  (:goal
    (and
      (at ball1 room2)
      (at ball2 room1)
    )
  )
)

```"""

P03_REPLY = """```pddl
(define (problem gripper-2-2-3)
  (:domain gripper-strips)
  (:objects robot1 robot2 - robot
            rgripper1 lgripper1 rgripper2 lgripper2 - gripper
            room1 room2 - room
            ball1 ball2 ball3 - obj)
  (:init
    (at-robby robot1 room1)
    (free robot1 rgripper1)
    (free robot1 lgripper1)
    (at-robby robot2 room2)
    (free robot2 rgripper2)
    (free robot2 lgripper2)
    (at ball1 room1)
    (at ball2 room1)
    (at ball3 room2)
  )
  (:goal
    (and
      (at ball1 room2)
      (at ball2 room2)
      (at ball3 room1)
    )
  )
)

```"""

CHAIN_RULES = [
    {
        "matcher": "write a problem PDDL file given a natural language description",
        "responses": [P01_REPLY],
    },
    {"matcher": "modify_action", "responses": [ROUND1_REPLY, ROUND2_REPLY]},
    {"matcher": "for an existing domain", "responses": [P02_REPLY, P03_REPLY]},
]


@pytest.fixture(scope="session")
def grippers():
    return load_bundle("grippers")


@pytest.fixture(scope="session")
def grippers_ood():
    return load_bundle("grippers-ood")


@pytest.fixture(scope="session")
def grippers_spec(grippers):
    return environment_spec(grippers)


@pytest.fixture()
def chain_fixture_path(tmp_path):
    path = tmp_path / "chain.jsonl"
    path.write_text(
        "".join(json.dumps(rule) + "\n" for rule in CHAIN_RULES), encoding="utf-8"
    )
    return path


class RecordingHandle:
    """EnvironmentHandle stand-in that logs every method name it serves."""

    def __init__(self, handle):
        self._handle = handle
        self.calls = []

    def legal_actions_after(self, prefix):
        self.calls.append("legal_actions_after")
        return self._handle.legal_actions_after(prefix)

    def check_executable(self, plan):
        self.calls.append("check_executable")
        return self._handle.check_executable(plan)

    def validate_plan(self, plan):
        self.calls.append("validate_plan")
        return self._handle.validate_plan(plan)


@pytest.fixture()
def recording_spec(grippers):
    """Spec whose first handle records its traffic; returns (spec, recorder)."""
    from dataclasses import replace

    spec = environment_spec(grippers)
    recorder = RecordingHandle(spec.handles[0])
    wrapped = replace(spec, handles=(recorder,) + spec.handles[1:])
    return wrapped, recorder

"""Environment bundles: one directory per environment holding the domain,
its problems, the interface templates, the natural language descriptions,
and optionally reference plans.

Layout:
    domain.pddl
    domain_template.pddl
    d_NL.md
    manifest.json            {"name": ..., "n_problems": N, "notes": ...}
    problems/p01.pddl ... pNN.pddl
    problem_templates/p01.pddl ...
    p_NL/p01.md ...
    plans/p01.plan           optional
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from planwalk.errors import PlanwalkError
from planwalk.pddl import Domain, Problem, parse_domain, parse_problem
from planwalk.refine import EnvironmentSpec
from planwalk.world import (
    EnvironmentHandle,
    Plan,
    align_objects,
    bind,
    parse_plan_text,
)


class BundleError(PlanwalkError):
    pass


@dataclass(frozen=True)
class EnvironmentBundle:
    name: str
    notes: str
    domain: Domain
    domain_text: str
    domain_template_text: str
    domain_nl: str
    problems: tuple[Problem, ...]
    problem_texts: tuple[str, ...]
    problem_template_texts: tuple[str, ...]
    problem_nls: tuple[str, ...]
    plans: tuple[Plan | None, ...]  # aligned with problems

    @property
    def n_problems(self) -> int:
        return len(self.problems)


def list_bundled() -> tuple[str, ...]:
    envs = resources.files("planwalk").joinpath("envs")
    names = [
        entry.name
        for entry in envs.iterdir()
        if entry.joinpath("manifest.json").is_file()
    ]
    return tuple(sorted(names))


def _resolve(ref) -> object:
    """A bundled name resolves inside the package; anything that looks like
    a path (or is one) resolves on the filesystem."""
    text = str(ref)
    if not isinstance(ref, Path) and os.sep not in text and not text.startswith("."):
        node = resources.files("planwalk").joinpath("envs", text)
        if node.joinpath("manifest.json").is_file():
            return node
    path = Path(text)
    if path.joinpath("manifest.json").is_file():
        return path
    raise BundleError(f"no environment bundle at {text!r}")


def _read(root, rel: str) -> str:
    node = root.joinpath(rel)
    if not node.is_file():
        raise BundleError(f"bundle is missing {rel}")
    return node.read_text(encoding="utf-8")


def _count_pddl(root, rel: str) -> int:
    node = root.joinpath(rel)
    if not node.is_dir():
        raise BundleError(f"bundle is missing {rel}/")
    return sum(1 for entry in node.iterdir() if entry.name.endswith(".pddl"))


def load_bundle(ref) -> EnvironmentBundle:
    """Load by bundled name (e.g. "grippers") or directory path."""
    root = _resolve(ref)
    manifest = json.loads(_read(root, "manifest.json"))
    name = manifest["name"]
    n = int(manifest["n_problems"])
    if n < 1:
        raise BundleError("manifest declares no problems")

    domain_text = _read(root, "domain.pddl")
    domain = parse_domain(domain_text)
    domain_template_text = _read(root, "domain_template.pddl")
    parse_domain(domain_template_text)

    for sub in ("problems", "problem_templates"):
        found = _count_pddl(root, sub)
        if found != n:
            raise BundleError(
                f"manifest declares {n} problems but {sub}/ holds {found}"
            )

    problems, texts, template_texts, nls, plans = [], [], [], [], []
    for i in range(1, n + 1):
        stem = f"p{i:02d}"
        text = _read(root, f"problems/{stem}.pddl")
        problem = parse_problem(text)
        if problem.domain_name != domain.name:
            raise BundleError(f"{stem} names domain {problem.domain_name}")
        template_text = _read(root, f"problem_templates/{stem}.pddl")
        align_objects(problem, parse_problem(template_text))
        problems.append(problem)
        texts.append(text)
        template_texts.append(template_text)
        nls.append(_read(root, f"p_NL/{stem}.md"))
        plan_node = root.joinpath(f"plans/{stem}.plan")
        plans.append(
            parse_plan_text(plan_node.read_text(encoding="utf-8"))
            if plan_node.is_file()
            else None
        )

    return EnvironmentBundle(
        name=name,
        notes=str(manifest.get("notes", "")),
        domain=domain,
        domain_text=domain_text,
        domain_template_text=domain_template_text,
        domain_nl=_read(root, "d_NL.md"),
        problems=tuple(problems),
        problem_texts=tuple(texts),
        problem_template_texts=tuple(template_texts),
        problem_nls=tuple(nls),
        plans=tuple(plans),
    )


def environment_spec(bundle: EnvironmentBundle) -> EnvironmentSpec:
    """The refinement-facing view: NL plus templates plus one execution
    handle per problem; the bundle's PDDL text stays out of it."""
    handles = tuple(
        EnvironmentHandle(bind(bundle.domain, p)) for p in bundle.problems
    )
    return EnvironmentSpec(
        name=bundle.name,
        domain_nl=bundle.domain_nl,
        domain_template_text=bundle.domain_template_text,
        problem_nls=bundle.problem_nls,
        problem_template_texts=bundle.problem_template_texts,
        handles=handles,
    )

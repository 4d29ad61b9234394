"""Command line surface over the toolkit.

Every subcommand emits one JSON report (stdout or --out); commands taking
--seed are byte-reproducible. Exit codes: 0 success, 1 domain failures
(no plan, invalid plan, walk mismatch errors), 2 usage errors.
"""

from __future__ import annotations

import functools
import json
import random
from pathlib import Path

import click

from planwalk.bundle import environment_spec, load_bundle
from planwalk.errors import PlanwalkError
from planwalk.exploration import WalkConfig, derive_rng, multi_problem_ew, sample_walk
from planwalk.llm import (
    HttpBackend,
    ScriptedBackend,
    build_intrinsic_plan_prompt,
)
from planwalk.pddl import (
    NoCodeBlock,
    ParseError,
    extract_pddl_block,
    format_literal,
    parse_domain,
    parse_problem,
    print_domain,
)
from planwalk.perturb import ew_correlation_study, pnf_rate, remove_terms
from planwalk.planner import SearchLimits, solve
from planwalk.refine import (
    RefinementConfig,
    best_at_k,
    evaluate_solve_rate,
    render_trace,
    run_refinement,
)
from planwalk.world import (
    EnvironmentHandle,
    bind,
    check_executable,
    format_plan,
    initial_state,
    legal_actions,
    parse_plan_text,
    validate_plan,
)


def _emit(report: dict, out: Path | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out is not None:
        out.write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _domain_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except PlanwalkError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(1) from exc

    return wrapper


def _problem_at(bundle, index: int):
    if not 1 <= index <= bundle.n_problems:
        raise click.BadParameter(
            f"bundle {bundle.name} has problems 1..{bundle.n_problems}"
        )
    return bundle.problems[index - 1]


def _make_backend(spec: str, model: str | None, base_url: str | None):
    if spec.startswith("scripted:"):
        return ScriptedBackend.from_file(spec.split(":", 1)[1])
    if spec == "http":
        if not model or not base_url:
            raise click.BadParameter("the http backend needs --model and --base-url")
        return HttpBackend(base_url=base_url, model=model)
    raise click.BadParameter("--backend must be scripted:FILE or http")


def _ew_report_json(report) -> dict:
    return {
        "forward": report.forward,
        "backward": report.backward,
        "symmetric": report.symmetric,
        "per_length": [
            {"t": t, "forward": f, "backward": b} for t, f, b in report.per_length
        ],
        "samples_used": {
            "forward": report.samples_used[0],
            "backward": report.samples_used[1],
        },
        "samples_excluded": {
            "forward": report.samples_excluded[0],
            "backward": report.samples_excluded[1],
        },
    }


_out_option = click.option(
    "--out", type=click.Path(path_type=Path), help="Write the report here."
)
_seed_option = click.option("--seed", default=0, show_default=True)
_problem_option = click.option(
    "--problem", "-p", default=1, show_default=True, help="1-based problem index."
)


def _walk_options(f):
    f = click.option("--t-max", default=10, show_default=True)(f)
    f = click.option("--walks-per-length", default=20, show_default=True)(f)
    return f


def _limit_options(states: int, clock: float):
    def deco(f):
        f = click.option("--max-states", default=states, show_default=True)(f)
        f = click.option("--wall-clock", default=clock, show_default=True)(f)
        return f

    return deco


def _backend_options(f):
    f = click.option(
        "--backend", required=True, help="scripted:FIXTURE.jsonl or http."
    )(f)
    f = click.option("--model", default=None, help="Model name (http backend).")(f)
    f = click.option("--base-url", default=None, help="API root (http backend).")(f)
    return f


@click.group()
def main():
    """PDDL modeling toolkit: plan, walk, perturb, refine."""


@main.command()
@click.argument("bundle_ref")
@_out_option
@_domain_errors
def check(bundle_ref, out):
    """Parse a bundle and bind every problem."""
    bundle = load_bundle(bundle_ref)
    problems = []
    for i, problem in enumerate(bundle.problems, start=1):
        env = bind(bundle.domain, problem)
        problems.append(
            {
                "index": i,
                "name": problem.name,
                "objects": len(problem.objects),
                "init_atoms": len(problem.init),
                "goal_literals": len(problem.goal),
                "ground_actions": len(env.ground_actions),
                "legal_at_init": len(legal_actions(env, initial_state(env))),
            }
        )
    _emit(
        {
            "environment": bundle.name,
            "domain": bundle.domain.name,
            "n_problems": bundle.n_problems,
            "problems": problems,
            "reference_plans": [p is not None for p in bundle.plans],
        },
        out,
    )


@main.command()
@click.argument("bundle_ref")
@_problem_option
@click.option("--out", type=click.Path(path_type=Path), help="Plan file to write.")
@_limit_options(1_000_000, 30.0)
@_domain_errors
def plan(bundle_ref, problem, out, max_states, wall_clock):
    """Solve one bundled problem and emit the plan."""
    bundle = load_bundle(bundle_ref)
    target = _problem_at(bundle, problem)
    limits = SearchLimits(max_states, wall_clock)
    outcome = solve(bundle.domain, target, limits)
    if outcome.plan is None:
        click.echo(f"no plan: {outcome.reason} ({outcome.detail})", err=True)
        raise SystemExit(1)
    env = bind(bundle.domain, target)
    if not validate_plan(env, outcome.plan):
        click.echo("planner returned an invalid plan", err=True)
        raise SystemExit(1)
    text = format_plan(outcome.plan)
    if out is not None:
        out.write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("bundle_ref")
@click.argument("plan_file", type=click.Path(path_type=Path, exists=True))
@_problem_option
@_out_option
@_domain_errors
def validate(bundle_ref, plan_file, problem, out):
    """Replay a plan file against a bundled problem."""
    bundle = load_bundle(bundle_ref)
    target = _problem_at(bundle, problem)
    env = bind(bundle.domain, target)
    steps = parse_plan_text(plan_file.read_text(encoding="utf-8"))
    result = check_executable(env, steps)
    valid = validate_plan(env, steps)
    _emit(
        {
            "problem": target.name,
            "actions": len(steps),
            "executable": result.executable,
            "failed_index": result.failed_index,
            "valid": valid,
        },
        out,
    )
    if not valid:
        raise SystemExit(1)


@main.command()
@click.argument("bundle_ref")
@_problem_option
@click.option("--t-max", default=10, show_default=True)
@click.option("--walks", default=3, show_default=True, help="Walks per length.")
@_seed_option
@_out_option
@_domain_errors
def walk(bundle_ref, problem, t_max, walks, seed, out):
    """Sample random walks over a bundled problem's legal actions."""
    bundle = load_bundle(bundle_ref)
    target = _problem_at(bundle, problem)
    env = bind(bundle.domain, target)
    rows = []
    for t in range(1, t_max + 1):
        for i in range(walks):
            sampled = sample_walk(env, t, derive_rng(seed, t, i))
            rows.append(
                {
                    "t": t,
                    "sample": i,
                    "actions": [str(a) for a in sampled.actions],
                    "truncated": sampled.truncated,
                }
            )
    _emit({"problem": target.name, "seed": seed, "walks": rows}, out)


@main.command()
@click.argument("bundle_a")
@click.argument("bundle_b")
@click.option("--problem", "-p", default=0, show_default=True,
              help="1-based problem index; 0 pairs up all problems.")
@click.option("--domain-a", type=click.Path(path_type=Path, exists=True),
              help="Override bundle A's domain with this PDDL file.")
@click.option("--domain-b", type=click.Path(path_type=Path, exists=True),
              help="Override bundle B's domain with this PDDL file.")
@_walk_options
@_seed_option
@_out_option
@_domain_errors
def ew(bundle_a, bundle_b, problem, domain_a, domain_b, t_max, walks_per_length,
       seed, out):
    """Symmetric exploration-walk score between two environments."""
    first = load_bundle(bundle_a)
    second = load_bundle(bundle_b)
    dom_a = parse_domain(domain_a.read_text(encoding="utf-8")) if domain_a else first.domain
    dom_b = parse_domain(domain_b.read_text(encoding="utf-8")) if domain_b else second.domain
    if problem:
        problems_a = [_problem_at(first, problem)]
        problems_b = [_problem_at(second, problem)]
    else:
        if first.n_problems != second.n_problems:
            raise click.BadParameter("bundles hold different problem counts")
        problems_a = list(first.problems)
        problems_b = list(second.problems)
    config = WalkConfig(t_max=t_max, walks_per_length=walks_per_length, seed=seed)
    report = multi_problem_ew(dom_a, problems_a, dom_b, problems_b, config)
    _emit(
        {
            "a": first.name,
            "b": second.name,
            "problems": problem or "all",
            "config": {"t_max": t_max, "walks_per_length": walks_per_length, "seed": seed},
            **_ew_report_json(report),
        },
        out,
    )


@main.command()
@click.argument("bundle_ref")
@click.option("-k", default=1, show_default=True, help="Terms to remove.")
@_seed_option
@_out_option
@_domain_errors
def perturb(bundle_ref, k, seed, out):
    """Remove k random terms from the bundle's domain."""
    bundle = load_bundle(bundle_ref)
    perturbed = remove_terms(bundle.domain, k, random.Random(seed))
    _emit(
        {
            "environment": bundle.name,
            "k": k,
            "seed": seed,
            "removed": [
                {
                    "action": loc.action,
                    "slot": loc.slot,
                    "index": loc.index,
                    "literal": format_literal(loc.literal),
                }
                for loc in perturbed.removed
            ],
            "empty_effect_actions": list(perturbed.empty_effect_actions),
            "domain": print_domain(perturbed.domain),
        },
        out,
    )


@main.command()
@click.argument("bundle_ref")
@click.option("--k-max", default=5, show_default=True)
@click.option("--samples", default=500, show_default=True, help="Removals per k.")
@_seed_option
@_limit_options(20_000, 5.0)
@click.option("--table", type=click.Path(path_type=Path),
              help="Also write a plot-ready TSV here.")
@_out_option
@_domain_errors
def pnf(bundle_ref, k_max, samples, seed, max_states, wall_clock, table, out):
    """Rate of provably unsolvable problems under k random term removals."""
    bundle = load_bundle(bundle_ref)
    limits = SearchLimits(max_states, wall_clock)
    problems = list(bundle.problems)
    rows = []
    for k in range(k_max + 1):
        entry = pnf_rate(
            bundle.domain, problems, k, samples, limits, derive_rng(seed, "pnf", k)
        )
        rows.append(
            {
                "k": entry.k,
                "rate": entry.rate,
                "samples": entry.samples,
                "budget_exhausted": entry.budget_exhausted,
            }
        )
    if table is not None:
        lines = ["k\trate\tsamples\tbudget_exhausted"]
        for row in rows:
            rate = "" if row["rate"] is None else f"{row['rate']:.6f}"
            lines.append(f"{row['k']}\t{rate}\t{row['samples']}\t{row['budget_exhausted']}")
        table.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _emit(
        {
            "environment": bundle.name,
            "samples_per_k": samples,
            "seed": seed,
            "limits": {"max_states": max_states, "wall_clock": wall_clock},
            "rows": rows,
        },
        out,
    )


@main.command()
@click.argument("bundle_ref")
@click.option("--pairs", default=10, show_default=True, help="Perturbed pairs.")
@click.option("--k-max", default=5, show_default=True)
@_walk_options
@_seed_option
@click.option("--table", type=click.Path(path_type=Path),
              help="Also write a plot-ready TSV here.")
@_out_option
@_domain_errors
def ewcorr(bundle_ref, pairs, k_max, t_max, walks_per_length, seed, table, out):
    """Walk score between perturbed domain pairs, bucketed by term difference."""
    bundle = load_bundle(bundle_ref)
    config = WalkConfig(t_max=t_max, walks_per_length=walks_per_length, seed=seed)
    rows = ew_correlation_study(
        bundle.domain,
        list(bundle.problems),
        pairs,
        config,
        derive_rng(seed, "ewcorr"),
        k_max=k_max,
    )
    row_dicts = [
        {"term_diff": r.term_diff, "mean_ew": r.mean_ew, "pairs": r.pairs} for r in rows
    ]
    if table is not None:
        lines = ["term_diff\tmean_ew\tpairs"]
        lines += [f"{r['term_diff']}\t{r['mean_ew']:.6f}\t{r['pairs']}" for r in row_dicts]
        table.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _emit(
        {"environment": bundle.name, "seed": seed, "pairs": pairs, "rows": row_dicts},
        out,
    )


@main.command()
@click.argument("bundle_ref")
@click.option("--variant", type=click.Choice(["chain", "tree", "tree-domprop"]),
              default="chain", show_default=True)
@click.option("--n-p", default=1, show_default=True, help="Problem candidates.")
@click.option("--n-d", default=1, show_default=True, help="Edit samples per round.")
@click.option("--c-max", default=3, show_default=True, help="Refinement rounds.")
@_seed_option
@_backend_options
@_walk_options
@_limit_options(1_000_000, 30.0)
@click.option("--max-llm-calls", default=None, type=int,
              help="Abort if the run would exceed this many calls.")
@_out_option
@_domain_errors
def refine(bundle_ref, variant, n_p, n_d, c_max, seed, backend, model, base_url,
           t_max, walks_per_length, max_states, wall_clock, max_llm_calls, out):
    """Generate and refine domain/problem PDDL against the environment."""
    bundle = load_bundle(bundle_ref)
    spec = environment_spec(bundle)
    llm = _make_backend(backend, model, base_url)
    try:
        config = RefinementConfig(
            variant=variant,
            n_p=n_p,
            n_d=n_d,
            c_max=c_max,
            seed=seed,
            walk_config=WalkConfig(t_max=t_max, walks_per_length=walks_per_length, seed=seed),
            search_limits=SearchLimits(max_states, wall_clock),
            max_llm_calls=max_llm_calls,
        )
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc
    trace = run_refinement(spec, config, llm)
    text = render_trace(trace)
    if out is not None:
        out.write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command(name="eval")
@click.argument("bundle_ref")
@click.option("--trace", "trace_file", type=click.Path(path_type=Path, exists=True),
              help="Score the final pair of this refinement trace.")
@click.option("--domain", "domain_file", type=click.Path(path_type=Path, exists=True),
              help="Score this domain on the bundle's own problems.")
@_limit_options(1_000_000, 30.0)
@_out_option
@_domain_errors
def eval_cmd(bundle_ref, trace_file, domain_file, max_states, wall_clock, out):
    """Average solve rate against the bundle's true environments."""
    bundle = load_bundle(bundle_ref)
    handles = [EnvironmentHandle(bind(bundle.domain, p)) for p in bundle.problems]
    if trace_file is not None:
        data = json.loads(trace_file.read_text(encoding="utf-8"))
        domain = parse_domain(data["final"]["domain"])
        problems = [parse_problem(data["final"]["problem"])]
        problems += [
            None if text is None else parse_problem(text)
            for text in data["translations"]
        ]
        source = "trace"
    elif domain_file is not None:
        domain = parse_domain(domain_file.read_text(encoding="utf-8"))
        problems = list(bundle.problems)
        source = "domain-file"
    else:
        domain = bundle.domain
        problems = list(bundle.problems)
        source = "bundle"
    rate = evaluate_solve_rate(
        domain, problems, handles, SearchLimits(max_states, wall_clock)
    )
    _emit(
        {
            "environment": bundle.name,
            "source": source,
            "n_problems": len(problems),
            "solve_rate": rate,
        },
        out,
    )


@main.command()
@click.argument("run_files", nargs=-1, required=True,
                type=click.Path(path_type=Path, exists=True))
@_out_option
@_domain_errors
def bestat(run_files, out):
    """Componentwise best (solve rate, walk score) over refinement traces."""
    results = []
    for path in run_files:
        data = json.loads(path.read_text(encoding="utf-8"))
        branch = next(
            b for b in data["branches"]
            if b["branch_index"] == data["final"]["branch_index"]
        )
        rating = branch["best_rating"]
        walk_score = (
            rating["score"] if rating and rating["kind"] == "ew-score" else 0.0
        )
        results.append((data["solve_rate"], walk_score))
    solve_rate, walk_score = best_at_k(results)
    _emit(
        {"runs": len(results), "solve_rate": solve_rate, "ew": walk_score}, out
    )


@main.command()
@click.argument("bundle_ref")
@_problem_option
@_backend_options
@click.option("--no-cot", is_flag=True, help="Ask for the bare plan only.")
@_out_option
@_domain_errors
def intrinsic(bundle_ref, problem, backend, model, base_url, no_cot, out):
    """Have the LLM plan directly from the PDDL text, then check its plan."""
    bundle = load_bundle(bundle_ref)
    target = _problem_at(bundle, problem)
    llm = _make_backend(backend, model, base_url)
    request = build_intrinsic_plan_prompt(
        bundle.domain_text,
        bundle.problem_texts[problem - 1],
        chain_of_thought=not no_cot,
    )
    reply = llm.complete(request)[0]
    try:
        text = extract_pddl_block(reply)
    except NoCodeBlock:
        text = reply
    env = bind(bundle.domain, target)
    try:
        steps = parse_plan_text(text)
    except ParseError as exc:
        _emit({"problem": target.name, "parse_error": str(exc), "valid": False}, out)
        raise SystemExit(1) from exc
    result = check_executable(env, steps)
    valid = validate_plan(env, steps)
    _emit(
        {
            "problem": target.name,
            "plan": [str(a) for a in steps],
            "executable": result.executable,
            "failed_index": result.failed_index,
            "valid": valid,
        },
        out,
    )
    if not valid:
        raise SystemExit(1)


if __name__ == "__main__":
    main()

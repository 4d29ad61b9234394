from planwalk.refine.edits import (
    AddOrUpdatePredicates,
    EditRejected,
    ModifyAction,
    apply_edits,
    parse_edit_calls,
)
from planwalk.refine.loop import (
    AllCandidatesUnparseable,
    EnvironmentSpec,
    LlmBudgetExceeded,
    RefinementConfig,
    VARIANTS,
    best_at_k,
    evaluate_solve_rate,
    generate_problem_candidates,
    generate_problem_candidates_domprop,
    rate_domain,
    refinement_round,
    run_refinement,
    translate_remaining_problems,
)
from planwalk.refine.rating import (
    Rating,
    ew_score,
    malformed_edit,
    no_edit,
    no_initial_action,
    sanity_check_failure,
    undefined_predicate_edit,
)
from planwalk.refine.trace import BranchRecord, RefinementTrace, RoundRecord, render_trace

__all__ = [
    "AddOrUpdatePredicates",
    "AllCandidatesUnparseable",
    "BranchRecord",
    "EditRejected",
    "EnvironmentSpec",
    "LlmBudgetExceeded",
    "ModifyAction",
    "Rating",
    "RefinementConfig",
    "RefinementTrace",
    "RoundRecord",
    "VARIANTS",
    "apply_edits",
    "best_at_k",
    "evaluate_solve_rate",
    "ew_score",
    "generate_problem_candidates",
    "generate_problem_candidates_domprop",
    "malformed_edit",
    "no_edit",
    "no_initial_action",
    "parse_edit_calls",
    "rate_domain",
    "refinement_round",
    "render_trace",
    "run_refinement",
    "sanity_check_failure",
    "translate_remaining_problems",
    "undefined_predicate_edit",
]

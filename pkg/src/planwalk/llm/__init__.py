from planwalk.llm.backend import (
    DEFAULT_API_KEY_ENV,
    FixtureExhausted,
    HttpBackend,
    LlmRequest,
    Message,
    NoMatchingRule,
    NonRetriableStatus,
    ScriptedBackend,
    ScriptedRule,
    TransportError,
)
from planwalk.llm.prompts import (
    OneShotExample,
    PromptTemplate,
    UnboundPlaceholder,
    blocksworld_example,
    build_batch_translation_prompt,
    build_domain_draft_prompt,
    build_intrinsic_plan_prompt,
    build_problem_from_draft_prompt,
    build_problem_prompt,
    build_refinement_prompt,
    load_template,
)

__all__ = [
    "DEFAULT_API_KEY_ENV",
    "FixtureExhausted",
    "HttpBackend",
    "LlmRequest",
    "Message",
    "NoMatchingRule",
    "NonRetriableStatus",
    "OneShotExample",
    "PromptTemplate",
    "ScriptedBackend",
    "ScriptedRule",
    "TransportError",
    "UnboundPlaceholder",
    "blocksworld_example",
    "build_batch_translation_prompt",
    "build_domain_draft_prompt",
    "build_intrinsic_plan_prompt",
    "build_problem_from_draft_prompt",
    "build_problem_prompt",
    "build_refinement_prompt",
    "load_template",
]

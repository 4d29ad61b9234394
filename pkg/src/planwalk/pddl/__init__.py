from planwalk.pddl.model import (
    EQUALITY,
    OBJECT,
    ActionSchema,
    Atom,
    Domain,
    Literal,
    ModelError,
    PredicateDecl,
    Problem,
    SanityError,
    SemanticError,
    TypedName,
)
from planwalk.pddl.parser import (
    NoCodeBlock,
    extract_pddl_block,
    parse_domain,
    parse_literal_text,
    parse_predicate_decl_text,
    parse_problem,
)
from planwalk.pddl.printer import (
    format_condition,
    format_literal,
    format_predicate_decl,
    format_typed_list,
    print_domain,
    print_problem,
)
from planwalk.pddl.sexpr import ParseError

__all__ = [
    "EQUALITY",
    "OBJECT",
    "ActionSchema",
    "Atom",
    "Domain",
    "Literal",
    "ModelError",
    "NoCodeBlock",
    "ParseError",
    "PredicateDecl",
    "Problem",
    "SanityError",
    "SemanticError",
    "TypedName",
    "extract_pddl_block",
    "format_condition",
    "format_literal",
    "format_predicate_decl",
    "format_typed_list",
    "parse_domain",
    "parse_literal_text",
    "parse_predicate_decl_text",
    "parse_problem",
    "print_domain",
    "print_problem",
]

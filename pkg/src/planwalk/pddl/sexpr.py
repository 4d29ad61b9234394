"""S-expression layer under the PDDL reader: positioned tokens, nested groups."""

from __future__ import annotations

from dataclasses import dataclass, field

from planwalk.errors import PlanwalkError


class ParseError(PlanwalkError):
    """Lexical or structural fault, with 1-based line/column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # "(", ")" or "symbol"
    text: str
    line: int
    col: int


@dataclass
class Group:
    items: list = field(default_factory=list)  # Token | Group
    line: int = 0
    col: int = 0


_EXTRA_SYMBOL_CHARS = frozenset("-_?:=")


def _is_symbol_char(ch: str) -> bool:
    return ch.isalnum() or ch in _EXTRA_SYMBOL_CHARS


def tokenize(text: str) -> list[Token]:
    """Split into tokens, dropping `;` comments. Symbols are lowercased."""
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, ch, line, col))
            col += 1
            i += 1
        elif _is_symbol_char(ch):
            start, start_col = i, col
            while i < n and _is_symbol_char(text[i]):
                i += 1
            col += i - start
            tokens.append(Token("symbol", text[start:i].lower(), line, start_col))
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    return tokens


def parse_forms(text: str) -> list:
    """Parse into a list of top-level forms (Token or Group)."""
    forms: list = []
    stack: list[Group] = []
    for tok in tokenize(text):
        if tok.kind == "(":
            group = Group([], tok.line, tok.col)
            (stack[-1].items if stack else forms).append(group)
            stack.append(group)
        elif tok.kind == ")":
            if not stack:
                raise ParseError("unbalanced ')'", tok.line, tok.col)
            stack.pop()
        else:
            (stack[-1].items if stack else forms).append(tok)
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].col)
    return forms

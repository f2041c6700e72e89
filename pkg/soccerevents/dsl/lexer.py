import re
from dataclasses import dataclass
from typing import Iterator, List, Optional

from soccerevents.exception.exception import RuleSyntaxError

KEYWORDS = frozenset([
    "complex",
    "seq",
    "and",
    "or",
    "not",
    "within",
    "lasting",
    "where",
    "emit",
    "roles",
    "as",
    "merged",
])

TOKEN_KINDS = frozenset([
    "KEYWORD",
    "IDENTIFIER",
    "NUMBER",
    "OPERATOR",
    "COLON",
    "COMMA",
    "DOTDOT",
    "DOT",
    "LPAREN",
    "RPAREN",
    "LBRACE",
    "RBRACE",
])

_TOKEN_PATTERN = re.compile(r"""
    (?P<WHITESPACE>[ \t\r]+)
  | (?P<NEWLINE>\n)
  | (?P<COMMENT>\#[^\n]*)
  | (?P<NUMBER>\d+(?:\.\d+)?)
  | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OPERATOR>==|!=|<=|>=|<|>)
  | (?P<DOTDOT>\.\.)
  | (?P<DOT>\.)
  | (?P<COLON>:)
  | (?P<COMMA>,)
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
  | (?P<LBRACE>\{)
  | (?P<RBRACE>\})
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    """
    Lexical token with its 1-based source position.
    """
    kind: str
    value: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind in ("KEYWORD", "IDENTIFIER", "NUMBER", "OPERATOR"):
            return f"{self.kind} '{self.value}'"
        return self.kind


def tokenize(source: str) -> Iterator[Token]:
    """Tokens of a rule file; whitespace and ``#`` comments are dropped."""
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        found = _TOKEN_PATTERN.match(source, pos)
        col = pos - line_start + 1
        if found is None:
            raise RuleSyntaxError(line, col, ["a token"], repr(source[pos]))
        kind, text = found.lastgroup, found.group()
        pos = found.end()
        if kind == "NEWLINE":
            line, line_start = line + 1, pos
            continue
        if kind in ("WHITESPACE", "COMMENT"):
            continue
        if kind == "NAME":
            kind = "KEYWORD" if text in KEYWORDS else "IDENTIFIER"
        yield Token(kind, text, line, col)


class Lexer:
    """Token cursor over a source text, with the position of the end of input."""

    def __init__(self, source: str):
        self.tokens: List[Token] = list(tokenize(source))
        self.index = 0
        lines = source.split("\n")
        self.end_line = len(lines)
        self.end_col = len(lines[-1]) + 1

    def token(self) -> Optional[Token]:
        if self.index >= len(self.tokens):
            return None
        tok = self.tokens[self.index]
        self.index += 1
        return tok

"""Tokenizer for CVL source text.

Preprocessor lines become single ``pp`` tokens, except ``#define`` whose
replacement text is tokenized and closed by an ``end_define`` token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = frozenset(
    "int void if else while do for switch case default return break continue".split()
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<num>0[xX][0-9a-fA-F]+|\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+\+|--|<<=|>>=|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^]=|[-+*/%<>=!~&|^?:;,(){}\[\]])
    """,
    re.VERBOSE,
)

_PP = re.compile(r"^\s*#\s*(\w+)(.*)$")


@dataclass(frozen=True)
class Token:
    kind: str  # id, num, op, kw, pp, end_define, eof
    value: str
    line: int
    col: int


class LexError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(message)
        self.line = line
        self.col = col


def strip_comments(text: str) -> str:
    """Blank out comments, keeping line structure intact."""
    out = []
    i, n = 0, len(text)
    while i < n:
        if text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
            out.append(" " * (j - i))
            i = j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                line = text.count("\n", 0, i) + 1
                raise LexError(line, 1, "unterminated comment")
            chunk = text[i : j + 2]
            out.append("".join(ch if ch == "\n" else " " for ch in chunk))
            i = j + 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def _scan(line_text: str, lineno: int, col0: int, tokens: list[Token]) -> None:
    pos = 0
    while pos < len(line_text):
        m = _TOKEN.match(line_text, pos)
        if not m:
            raise LexError(lineno, col0 + pos + 1, f"unexpected character {line_text[pos]!r}")
        kind = m.lastgroup
        val = m.group()
        if kind != "ws":
            if kind == "id" and val in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, val, lineno, col0 + pos + 1))
        pos = m.end()


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    for lineno, raw in enumerate(strip_comments(text).split("\n"), start=1):
        m = _PP.match(raw)
        if m:
            directive, rest = m.group(1), m.group(2)
            col = raw.index("#") + 1
            if directive == "define":
                tokens.append(Token("pp", "define", lineno, col))
                _scan(rest, lineno, m.start(2), tokens)
                tokens.append(Token("end_define", "", lineno, len(raw) + 1))
            else:
                tokens.append(Token("pp", f"{directive} {rest.strip()}".strip(), lineno, col))
            continue
        _scan(raw, lineno, 0, tokens)
    last = text.count("\n") + 1
    tokens.append(Token("eof", "", last, 1))
    return tokens

"""Hand-written lexer for Java method source.

The lexer does not parse; it only splits text into tokens following the
Java lexical grammar with maximal munch. Comments are dropped, string and
character literals are kept verbatim as single tokens.
"""

from __future__ import annotations

import re
from typing import Iterator, NamedTuple

KEYWORD = "keyword"
IDENTIFIER = "identifier"
STRING_LITERAL = "string_literal"
CHAR_LITERAL = "char_literal"
NUMBER_LITERAL = "number_literal"
OPERATOR = "operator"
SEPARATOR = "separator"

KINDS = (
    KEYWORD,
    IDENTIFIER,
    STRING_LITERAL,
    CHAR_LITERAL,
    NUMBER_LITERAL,
    OPERATOR,
    SEPARATOR,
)
LITERAL_KINDS = frozenset({STRING_LITERAL, CHAR_LITERAL, NUMBER_LITERAL})

# true/false/null are literals in the JLS; they are reserved words here.
KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
    true false null
    """.split()
)

PRIMITIVE_TYPES = frozenset(
    {"boolean", "byte", "char", "short", "int", "long", "float", "double", "void"}
)

_OPERATORS = sorted(
    """
    >>>= <<= >>= >>> -> ++ -- && || == != <= >= += -= *= /= &= |= ^= %=
    << >> = > < ! ~ ? : + - * / & | ^ %
    """.split(),
    key=len,
    reverse=True,
)
_SEPARATORS = ("...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@")

_NUMBER = re.compile(
    r"""
    0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?[0-9_]+)?[lLfFdD]?
    | 0[bB][01_]+[lL]?
    | (?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9][0-9_]*)(?:[eE][+-]?[0-9_]+)?[lLfFdD]?
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    offset: int = -1  # character index into the source, -1 if synthetic


class LexError(ValueError):
    """Raised on input the lexer cannot split; ``offset`` is a UTF-8 byte offset."""

    def __init__(self, message: str, source: str, index: int):
        self.offset = len(source[:index].encode("utf-8"))
        self.index = index
        super().__init__(f"{message} at byte offset {self.offset}")


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def _scan_quoted(source: str, start: int, quote: str) -> int:
    """Return the index just past a quoted literal starting at ``start``."""
    what = "string literal" if quote == '"' else "char literal"
    i = start + 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\\":
            i += 2
            continue
        if ch == quote:
            return i + 1
        if ch in "\r\n":
            break
        i += 1
    raise LexError(f"unterminated {what}", source, start)


def _scan_text_block(source: str, start: int) -> int:
    i = start + 3
    n = len(source)
    while i < n:
        if source[i] == "\\":
            i += 2
            continue
        if source.startswith('"""', i):
            return i + 3
        i += 1
    raise LexError("unterminated text block", source, start)


def scan(source: str) -> Iterator[tuple[str, int, int]]:
    """Yield ``(kind, start, end)`` spans, including ``"comment"`` spans.

    Whitespace is skipped silently.
    """
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if source.startswith("//", i):
            end = i + 2
            while end < n and source[end] not in "\r\n":
                end += 1
            yield "comment", i, end
            i = end
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated block comment", source, i)
            yield "comment", i, end + 2
            i = end + 2
            continue
        if source.startswith('"""', i):
            end = _scan_text_block(source, i)
            yield STRING_LITERAL, i, end
            i = end
            continue
        if ch == '"':
            end = _scan_quoted(source, i, '"')
            yield STRING_LITERAL, i, end
            i = end
            continue
        if ch == "'":
            end = _scan_quoted(source, i, "'")
            yield CHAR_LITERAL, i, end
            i = end
            continue
        if _is_ident_start(ch):
            end = i + 1
            while end < n and _is_ident_part(source[end]):
                end += 1
            word = source[i:end]
            yield (KEYWORD if word in KEYWORDS else IDENTIFIER), i, end
            i = end
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            m = _NUMBER.match(source, i)
            end = m.end()
            yield NUMBER_LITERAL, i, end
            i = end
            continue
        for sep in _SEPARATORS:
            if source.startswith(sep, i):
                yield SEPARATOR, i, i + len(sep)
                i += len(sep)
                break
        else:
            for op in _OPERATORS:
                if source.startswith(op, i):
                    yield OPERATOR, i, i + len(op)
                    i += len(op)
                    break
            else:
                raise LexError(f"unexpected character {ch!r}", source, i)


def tokenize(source: str) -> list[Token]:
    """Split Java source into tokens, dropping whitespace and comments.

    >>> [t.text for t in tokenize("int x = 0; // c")]
    ['int', 'x', '=', '0', ';']
    """
    return [
        Token(kind, source[start:end], start)
        for kind, start, end in scan(source)
        if kind != "comment"
    ]


def strip_comments(source: str) -> str:
    """Remove comments, keeping only the line breaks a block comment spanned.

    A comment that spans no line break becomes one space, so tokens on either
    side stay separated.
    """
    parts = []
    last = 0
    for kind, start, end in scan(source):
        if kind != "comment":
            continue
        parts.append(source[last:start])
        body = source[start:end]
        if source.startswith("//", start):
            pass
        elif "\n" in body:
            parts.append("\n" * body.count("\n"))
        else:
            parts.append(" ")
        last = end
    parts.append(source[last:])
    return "".join(parts)

"""LCS-based comparison of text attributes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

from .errors import ProcdiffError


class Mode(str, Enum):
    WORD = "word"
    LINE = "line"


class ModeMismatch(ProcdiffError, ValueError):
    pass


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    mode: Mode

    def __len__(self) -> int:
        return len(self.tokens)

    def join(self) -> str:
        sep = " " if self.mode is Mode.WORD else "\n"
        return sep.join(self.tokens)


def tokenize(text: str, mode: Mode | str = Mode.WORD) -> TokenSequence:
    mode = Mode(mode)
    if mode is Mode.WORD:
        return TokenSequence(tuple(text.split()), mode)
    if not text:
        return TokenSequence((), mode)
    return TokenSequence(tuple(text.split("\n")), mode)


class Op(str, Enum):
    KEEP = "keep"
    DELETE = "delete"
    INSERT = "insert"


class Edit(NamedTuple):
    op: Op
    token: str


EditScript = list[Edit]


def _check(a: TokenSequence, b: TokenSequence) -> None:
    if a.mode is not b.mode:
        raise ModeMismatch(f"cannot compare {a.mode.value} tokens with {b.mode.value} tokens")


def lcs_table(a: Sequence[str], b: Sequence[str]) -> list[list[int]]:
    """Suffix LCS lengths: ``t[i][j]`` is |LCS(a[i:], b[j:])|."""
    n, m = len(a), len(b)
    t = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = t[i], t[i + 1]
        ai = a[i]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
    return t


def diff_text(a: TokenSequence, b: TokenSequence) -> EditScript:
    """Edit script whose kept tokens are a longest common subsequence.

    Deterministic: on ties deletions are emitted before insertions.
    """
    _check(a, b)
    x, y = a.tokens, b.tokens
    # common prefix/suffix are always part of some LCS
    lo = 0
    while lo < len(x) and lo < len(y) and x[lo] == y[lo]:
        lo += 1
    hi = 0
    while hi < len(x) - lo and hi < len(y) - lo and x[-1 - hi] == y[-1 - hi]:
        hi += 1
    script: EditScript = [Edit(Op.KEEP, tok) for tok in x[:lo]]
    mx, my = x[lo : len(x) - hi], y[lo : len(y) - hi]
    t = lcs_table(mx, my)
    i = j = 0
    while i < len(mx) and j < len(my):
        if mx[i] == my[j]:
            script.append(Edit(Op.KEEP, mx[i]))
            i += 1
            j += 1
        elif t[i + 1][j] >= t[i][j + 1]:
            script.append(Edit(Op.DELETE, mx[i]))
            i += 1
        else:
            script.append(Edit(Op.INSERT, my[j]))
            j += 1
    script.extend(Edit(Op.DELETE, tok) for tok in mx[i:])
    script.extend(Edit(Op.INSERT, tok) for tok in my[j:])
    script.extend(Edit(Op.KEEP, tok) for tok in x[len(x) - hi :])
    return script


def lcs_length(script: EditScript) -> int:
    return sum(1 for e in script if e.op is Op.KEEP)


def replay(script: EditScript, side: str) -> tuple[str, ...]:
    """Rebuild side ``a`` (keeps + deletes) or ``b`` (keeps + inserts)."""
    drop = Op.INSERT if side == "a" else Op.DELETE
    return tuple(e.token for e in script if e.op is not drop)


def text_extent(a: TokenSequence, b: TokenSequence) -> float:
    """``1 - 2|LCS| / (|a| + |b|)``, and 0 when both sides are empty."""
    _check(a, b)
    total = len(a) + len(b)
    if total == 0:
        return 0.0
    keep = lcs_length(diff_text(a, b))
    return (total - 2 * keep) / total


def word_extent(a: str, b: str) -> float:
    return text_extent(tokenize(a, Mode.WORD), tokenize(b, Mode.WORD))

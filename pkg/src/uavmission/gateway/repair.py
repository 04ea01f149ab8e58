"""Tolerant extraction of JSON values from model output.

Repair passes run in a fixed order:

1. strip markdown code fences
2. drop trailing commas before ``}`` / ``]``
3. rewrite single-quoted strings as double-quoted
4. close an unterminated string and append missing closers

Every pass is string-aware, so commas, quotes and brackets that live inside
string literals are left alone.
"""

from __future__ import annotations

import json
import re
from typing import Any, Iterator, NamedTuple, Optional

from uavmission.errors import Unparseable

_FENCE = re.compile(r"```[ \t]*[A-Za-z0-9_-]*[ \t]*\r?\n?(.*?)(?:```|\Z)", re.DOTALL)
_MAX_CANDIDATES = 64
_CLOSER = {"{": "}", "[": "]"}


class Extraction(NamedTuple):
    value: Any
    repaired: bool


def _walk(s: str) -> Iterator[tuple[int, str, Optional[str]]]:
    """Yield (index, char, quote) where quote is the active string delimiter.

    The opening and closing quote characters themselves are reported with
    ``quote=None`` so callers see them as structure.
    """
    quote: Optional[str] = None
    escaped = False
    for i, ch in enumerate(s):
        if quote is None:
            if ch in "\"'":
                yield i, ch, None
                quote = ch
                continue
            yield i, ch, None
        else:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                quote = None
                yield i, ch, None
                continue
            yield i, ch, quote


def strip_fences(text: str) -> tuple[str, bool]:
    m = _FENCE.search(text)
    if m is None:
        return text, False
    return m.group(1), True


def strip_trailing_commas(s: str) -> tuple[str, bool]:
    out: list[str] = []
    changed = False
    n = len(s)
    for i, ch, quote in _walk(s):
        if quote is None and ch == ",":
            j = i + 1
            while j < n and s[j].isspace():
                j += 1
            if j < n and s[j] in "}]":
                changed = True
                continue
        out.append(ch)
    return "".join(out), changed


def single_to_double_quotes(s: str) -> tuple[str, bool]:
    out: list[str] = []
    changed = False
    i, n = 0, len(s)
    while i < n:
        ch = s[i]
        if ch == '"':
            j = i + 1
            while j < n and s[j] != '"':
                j += 2 if s[j] == "\\" else 1
            out.append(s[i : j + 1])
            i = j + 1
        elif ch == "'":
            j = i + 1
            buf: list[str] = []
            while j < n and s[j] != "'":
                c = s[j]
                if c == "\\" and j + 1 < n:
                    nxt = s[j + 1]
                    buf.append("'" if nxt == "'" else c + nxt)
                    j += 2
                    continue
                buf.append('\\"' if c == '"' else c)
                j += 1
            out.append('"' + "".join(buf) + ('"' if j < n else ""))
            changed = True
            i = j + 1
        else:
            out.append(ch)
            i += 1
    return "".join(out), changed


def balance_brackets(s: str) -> tuple[str, bool]:
    stack: list[str] = []
    for _, ch, quote in _walk(s):
        if quote is None:
            if ch in "{[":
                stack.append(_CLOSER[ch])
            elif ch in "}]" and stack and stack[-1] == ch:
                stack.pop()
    open_quote = _open_quote(s)
    if not stack and open_quote is None:
        return s, False
    out = s
    if open_quote is not None:
        out += open_quote
    out = out.rstrip()
    if out.endswith(","):
        out = out[:-1]
    elif out.endswith(":"):
        out += "null"
    return out + "".join(reversed(stack)), True


def _open_quote(s: str) -> Optional[str]:
    quote: Optional[str] = None
    escaped = False
    for ch in s:
        if quote is None:
            if ch in "\"'":
                quote = ch
        elif escaped:
            escaped = False
        elif ch == "\\":
            escaped = True
        elif ch == quote:
            quote = None
    return quote


def _balanced_end(s: str, start: int) -> Optional[int]:
    stack: list[str] = []
    for i, ch, quote in _walk(s[start:]):
        if quote is not None:
            continue
        if ch in "{[":
            stack.append(_CLOSER[ch])
        elif ch in "}]":
            if not stack or stack[-1] != ch:
                return None
            stack.pop()
            if not stack:
                return start + i + 1
    return None


def _drop_incomplete_tail(s: str) -> str:
    """Cut back to the last structural comma so a half-written element goes."""
    last = -1
    for i, ch, quote in _walk(s):
        if quote is None and ch == ",":
            last = i
    return s[:last] if last > 0 else s


def _try_parse(s: str) -> tuple[bool, Any]:
    try:
        return True, json.loads(s)
    except ValueError:
        return False, None


def _repair(candidate: str) -> list[str]:
    s, _ = strip_trailing_commas(candidate)
    s, _ = single_to_double_quotes(s)
    balanced, _ = balance_brackets(s)
    attempts = [balanced]
    if balanced != s:
        attempts.append(balance_brackets(_drop_incomplete_tail(s))[0])
    return attempts


def extract_structured(text: str) -> Extraction:
    """Find and parse the first JSON value in ``text``.

    Returns the parsed tree and whether any repair pass was needed. Text that
    already parses comes back untouched with ``repaired=False``.
    """
    if not text or not text.strip():
        raise Unparseable("empty text", 0)
    ok, value = _try_parse(text)
    if ok:
        return Extraction(value, False)

    body, fenced = strip_fences(text)
    best = 0
    starts = [i for i, ch in enumerate(body) if ch in "{["][:_MAX_CANDIDATES]
    for start in starts:
        end = _balanced_end(body, start)
        candidate = body[start:end] if end is not None else body[start:].rstrip()
        ok, value = _try_parse(candidate)
        if ok:
            return Extraction(value, fenced)
        for attempt in _repair(candidate):
            ok, value = _try_parse(attempt)
            if ok:
                return Extraction(value, True)
        best = start

    ok, value = _try_parse(body.strip())
    if ok:
        return Extraction(value, fenced)
    raise Unparseable("no JSON value found", best)

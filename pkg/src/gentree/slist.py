"""S-lists for Av(1423, 4123): the last h columns of the diagram together
with the active sites between them, updated jump by jump.

Internal form: ``circled`` holds the column indices bottom to top and
``lows[t]`` is the lower end of the interval of jump values just below
``circled[t]`` (the last interval is the one above the top dot). The
intervals tile (-inf, 0]: interval t is ``[lows[t], lows[t+1] - 1]``
with ``lows[len(circled) + 1] = 1`` implied, and it is empty when the two
bounds coincide.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import SListError
from .perm import inverse

NEG_INF = -math.inf

_CIRCLED = {chr(0x2460 + i): i + 1 for i in range(20)}


@dataclass(frozen=True)
class SList:
    circled: tuple
    lows: tuple

    def __post_init__(self):
        if len(self.lows) != len(self.circled) + 1:
            raise SListError("need one interval slot more than circled entries")
        bounds = list(self.lows) + [1]
        if any(b > a for a, b in zip(bounds[1:], bounds)):
            raise SListError("interval bounds must increase bottom to top")

    def interval(self, t):
        """(lo, hi) of slot t, or None when empty."""
        lo = self.lows[t]
        nxt = self.lows[t + 1] if t + 1 < len(self.lows) else 1
        return None if lo == nxt else (lo, nxt - 1)

    def entries(self) -> list:
        """Display form: ints for circled entries, (lo, hi) for nonempty intervals."""
        out = []
        for t in range(len(self.lows)):
            iv = self.interval(t)
            if iv is not None:
                out.append(iv)
            if t < len(self.circled):
                out.append(self.circled[t])
        return out

    def __str__(self):
        parts = []
        for e in self.entries():
            if isinstance(e, tuple):
                lo, hi = e
                if lo == NEG_INF:
                    parts.append(f"(-inf,{hi}]")
                elif lo == hi:
                    parts.append(f"{{{lo}}}")
                else:
                    parts.append(f"[{lo},{hi}]")
            else:
                parts.append(f"({e})")
        return "[" + ",".join(parts) + "]"


def from_entries(entries) -> SList:
    """Build an SList from its display form (empty intervals omitted)."""
    circled, slots = [], [None]
    for e in entries:
        if isinstance(e, tuple):
            if slots[-1] is not None:
                raise SListError("two intervals without a circled entry between them")
            lo, hi = e
            slots[-1] = (NEG_INF if lo is None else lo, hi)
        else:
            circled.append(int(e))
            slots.append(None)
    lows = [None] * len(slots)
    nxt = 1
    for t in range(len(slots) - 1, -1, -1):
        if slots[t] is not None:
            lo, hi = slots[t]
            if hi != nxt - 1:
                raise SListError(f"interval {slots[t]} does not meet the one above it")
            nxt = lo
        lows[t] = nxt
    if lows[0] != NEG_INF:
        raise SListError("missing the left-unbounded interval")
    return SList(tuple(circled), tuple(lows))


_TOK = re.compile(r"\(\s*-inf\s*,\s*(-?\d+)\s*\]|\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]|\{\s*(-?\d+)\s*\}|\((\d+)\)|(\d+)")


def parse_slist(text: str) -> SList:
    """Parse e.g. "[④,③,(−∞,−1],①,⑤,{0},②]" (ASCII forms accepted too)."""
    s = text.replace("−", "-").replace("∞", "inf").strip()
    for ch, v in _CIRCLED.items():
        s = s.replace(ch, f"({v})")
    if s.startswith("[") and s.endswith("]"):
        s = s[1:-1]
    entries, pos = [], 0
    s = s.strip()
    while pos < len(s):
        if s[pos] in ", ":
            pos += 1
            continue
        m = _TOK.match(s, pos)
        if not m:
            raise SListError(f"cannot parse S-list near {s[pos:pos + 10]!r}")
        if m.group(1) is not None:
            entries.append((NEG_INF, int(m.group(1))))
        elif m.group(2) is not None:
            entries.append((int(m.group(2)), int(m.group(3))))
        elif m.group(4) is not None:
            entries.append((int(m.group(4)), int(m.group(4))))
        else:
            entries.append(int(m.group(5) or m.group(6)))
        pos = m.end()
    return from_entries(entries)


def _check_jump(jump):
    y, c = jump
    if y > 1 or (y == 1 and c not in (1, 2)) or (y < 1 and c != 1):
        raise SListError(f"jump {y}^{c} is not in the Av(1423,4123) alphabet")
    return y, c


def slist_init(first_jump) -> SList:
    y, c = _check_jump(first_jump)
    if y == 1 and c == 1:
        return SList((1,), (NEG_INF, NEG_INF))
    return SList((1,), (NEG_INF, 1))


def slist_advance(S: SList, jump, j=None) -> SList:
    """Add the column reached by ``jump``; j is the current column count."""
    y, c = _check_jump(jump)
    j = len(S.circled) if j is None else j
    if j != len(S.circled):
        raise SListError(f"step count {j} does not match the {len(S.circled)} tracked columns")
    new = j + 1
    if y == 1 and c == 2:
        # top site: everything moves one step further, the new 0 sits under the new dot
        return SList(S.circled + (new,), tuple(l - 1 for l in S.lows) + (1,))
    if y == 1:
        # bottom site: new dot at the very bottom, intervals unchanged
        return SList((new,) + S.circled, (NEG_INF,) + S.lows)
    for t in range(len(S.lows)):
        iv = S.interval(t)
        if iv is not None and iv[0] <= y <= iv[1]:
            break
    else:
        raise SListError(f"jump {y} falls in no tracked interval (labels too small)")
    # sites above the used one die, those below shift up by -y
    lows = tuple(l - y for l in S.lows[:t + 1]) + (1,) * (len(S.circled) - t + 1)
    return SList(S.circled[:t] + (new,) + S.circled[t:], lows)


def slist_read(S) -> tuple:
    """Pattern of the tracked columns: inverse of the circled word."""
    if isinstance(S, str):
        S = parse_slist(S)
    word = S.circled if isinstance(S, SList) else tuple(e for e in S if not isinstance(e, tuple))
    if sorted(word) != list(range(1, len(word) + 1)):
        raise SListError(f"circled entries {word} are not a permutation")
    return inverse(word)


def pat_slist(jumps) -> tuple:
    """Pat of a colored jump tuple by folding the S-list updates."""
    jumps = [tuple(j) for j in jumps]
    if not jumps:
        raise SListError("need at least one jump")
    S = slist_init(jumps[0])
    for i, jmp in enumerate(jumps[1:], start=1):
        S = slist_advance(S, jmp, i)
    return slist_read(S)

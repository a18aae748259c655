"""Generating trees: succession rules, colored label sequences and the
bijection between label sequences and permutations.

The slow path here works only through membership tests (active sites of
each intermediate permutation), so it can serve as ground truth for the
compiled decoder in :mod:`gentree.kernels`.
"""
from __future__ import annotations

import re
from functools import lru_cache
from typing import NamedTuple, Sequence

from .errors import ConsistencyError, DomainError, MembershipError, ResourceError
from .families import FamilySpec, get_family
from .perm import active_sites, append_final, member, perm_str, standardize

DEFAULT_CAP = 10**7


class ColoredLabel(NamedTuple):
    value: int
    color: int = 1

    def __str__(self):
        return str(self.value) if self.color == 1 else f"{self.value}^{self.color}"


class ColoredJump(NamedTuple):
    y: int
    color: int = 1

    def __str__(self):
        s = f"{self.y:+d}" if self.y else "0"
        return s if self.color == 1 else f"{s}^{self.color}"


_COLOR_LETTERS = {"B": 1, "T": 2}
_TOKEN = re.compile(r"^\s*([+-]?\d+)\s*(?:\^?\s*([BT]|\d+))?\s*$")


def _parse_token(tok):
    m = _TOKEN.match(tok)
    if not m:
        raise DomainError(f"cannot parse {tok!r}")
    c = m.group(2)
    color = 1 if c is None else _COLOR_LETTERS.get(c) or int(c)
    if color < 1:
        raise DomainError(f"colors start at 1: {tok!r}")
    return int(m.group(1)), color


def parse_jumps(text: str) -> tuple:
    """Parse "-2,+1B,+1T,0" into ColoredJumps (B = color 1, T = color 2)."""
    toks = [t for t in text.split(",") if t.strip()]
    if not toks:
        raise DomainError("empty jump list")
    return tuple(ColoredJump(*_parse_token(t)) for t in toks)


def parse_labels(text: str) -> tuple:
    toks = [t for t in text.split(",") if t.strip()]
    return tuple(ColoredLabel(*_parse_token(t)) for t in toks)


def _as_labels(s) -> tuple:
    if isinstance(s, str):
        return parse_labels(s)
    out = []
    for x in s:
        if isinstance(x, (int,)):
            out.append(ColoredLabel(int(x), 1))
        else:
            out.append(ColoredLabel(int(x[0]), int(x[1])))
    return tuple(out)


def _as_jumps(js) -> tuple:
    if isinstance(js, str):
        return parse_jumps(js)
    out = []
    for x in js:
        if isinstance(x, (int,)):
            out.append(ColoredJump(int(x), 1))
        else:
            out.append(ColoredJump(int(x[0]), int(x[1])))
    return tuple(out)


def format_jumps(F, js) -> str:
    """Inverse of parse_jumps; uses B/T for the doubled +1 jump."""
    F = get_family(F)
    parts = []
    for y, c in _as_jumps(js):
        s = f"{y:+d}" if y else "0"
        if F.max_color() == 2 and y == 1:
            s += "BT"[c - 1]
        elif c != 1:
            s += f"^{c}"
        parts.append(s)
    return ",".join(parts)


def _color_by_site(values):
    seen = {}
    out = []
    for v in values:
        seen[v] = seen.get(v, 0) + 1
        out.append(ColoredLabel(v, seen[v]))
    return out


def rule_children(F, k: int, order: str = "listing") -> list:
    """Colored children of label k.

    Colors always number repeated values in ascending site order. With
    ``order="site"`` the list itself is in site order; the default
    ``"listing"`` gives the conventional display order, which is ascending
    by value except that the doubled top child of the Schroeder-type rules
    is split into its bottom copy (first) and top copy (last).
    """
    F = get_family(F)
    kids = _color_by_site(F.site_labels(k))
    if order == "site":
        return kids
    if order != "listing":
        raise DomainError(f"unknown order {order!r}")
    if F.profile == "schroeder" and k >= F.beta - 1:
        top = [c for c in kids if c.value == k + 1]
        rest = sorted(c for c in kids if c.value != k + 1)
        return top[:1] + rest + top[1:]
    return sorted(kids)


def label_of(sigma, F) -> int:
    """Label of a permutation in the family's generating tree."""
    F = get_family(F)
    if F.label_stat == "last":
        return sigma[-1]
    return len(active_sites(sigma, F))


@lru_cache(maxsize=1 << 18)
def _child_table(sigma, F):
    """(site, child permutation, child label) for every active site."""
    out = []
    for m in active_sites(sigma, F):
        tau = append_final(sigma, m)
        out.append((m, tau, label_of(tau, F)))
    return tuple(out)


def _body(F, labels):
    if not labels:
        raise ConsistencyError("empty label sequence", 0)
    if labels[0].value != F.root_label or labels[0].color != 1:
        raise ConsistencyError(f"sequence must start at the root label {F.root_label}", 0)
    if F.virtual_root:
        if len(labels) < 2:
            raise ConsistencyError("sequence has only the synthetic root", 0)
        if labels[1] != ColoredLabel(F.first_label, 1):
            raise ConsistencyError(f"first real label must be {F.first_label}", 1)
        return labels[1:], 1
    return labels, 0


def check_consistent(F, s) -> tuple:
    """Validate against the hand-coded rule; returns the normalized sequence."""
    F = get_family(F)
    labels = _as_labels(s)
    _body(F, labels)
    for i in range(1, len(labels)):
        if labels[i] not in rule_children(F, labels[i - 1].value):
            raise ConsistencyError(
                f"{labels[i]} is not a child of {labels[i - 1].value} in {F.id}", i)
    return labels


def decode(F, s, _cache=None):
    """Colored label sequence -> permutation, via membership-based sites."""
    F = get_family(F)
    labels = _as_labels(s)
    body, off = _body(F, labels)
    sigma = (1,)
    if label_of(sigma, F) != body[0].value:
        raise ConsistencyError("root label mismatch", off)
    start = 1
    if _cache is not None:
        # longest cached prefix
        for L in range(len(body), 1, -1):
            hit = _cache.get(body[:L])
            if hit is not None:
                sigma, start = hit, L
                break
    for i in range(start, len(body)):
        v, c = body[i]
        matches = [tau for _, tau, lab in _child_table(sigma, F) if lab == v]
        if not 1 <= c <= len(matches):
            raise ConsistencyError(
                f"label {body[i]} is not a child of {body[i - 1].value} in {F.id}", i + off)
        sigma = matches[c - 1]
        if _cache is not None:
            _cache[body[:i + 1]] = sigma
    return sigma


def decode_many(F, seqs) -> list:
    """Decode many sequences sharing prefixes (memoized)."""
    cache = {}
    return [decode(F, s, cache) for s in seqs]


def encode(F, sigma) -> tuple:
    """Permutation -> colored label sequence (inverse of decode)."""
    F = get_family(F)
    sigma = tuple(sigma)
    if not member(sigma, F.avoidance):
        raise MembershipError(f"{perm_str(sigma)} is not in {F.id}")
    out = [ColoredLabel(F.root_label)] if F.virtual_root else []
    parent = (1,)
    out.append(ColoredLabel(label_of(parent, F)))
    for i in range(2, len(sigma) + 1):
        child = standardize(sigma[:i])
        m = child[-1]
        table = _child_table(parent, F)
        lab = next(l for site, _, l in table if site == m)
        color = sum(1 for site, _, l in table if site <= m and l == lab)
        out.append(ColoredLabel(lab, color))
        parent = child
    return tuple(out)


def jumps_of(s) -> tuple:
    labels = _as_labels(s)
    if len(labels) < 2:
        raise DomainError("need at least two labels")
    return tuple(ColoredJump(b.value - a.value, b.color) for a, b in zip(labels, labels[1:]))


def labels_from_jumps(start: int, js) -> tuple:
    out = [ColoredLabel(start)]
    for y, c in _as_jumps(js):
        out.append(ColoredLabel(out[-1].value + y, c))
    return tuple(out)


def enumerate_level(F, n: int, cap: int = DEFAULT_CAP) -> list:
    """All consistent colored label sequences encoding size-n permutations."""
    F = get_family(F)
    if n < 1:
        raise DomainError("n must be >= 1")
    length = n + F.n_offset
    if count_level(F, n) > cap:
        raise ResourceError(f"level {n} of {F.id} exceeds the cap of {cap} sequences")
    out = []
    stack = [(ColoredLabel(F.root_label),)]
    while stack:
        seq = stack.pop()
        if len(seq) == length:
            out.append(seq)
            continue
        for child in reversed(rule_children(F, seq[-1].value, order="site")):
            stack.append(seq + (child,))
    return out


def count_level(F, n: int) -> int:
    """Level size by dynamic programming over labels (exact integers)."""
    F = get_family(F)
    dist = {F.root_label: 1}
    for _ in range(n + F.n_offset - 1):
        nxt = {}
        for k, w in dist.items():
            for v in F.site_labels(k):
                nxt[v] = nxt.get(v, 0) + w
        dist = nxt
    return sum(dist.values())

"""Permutations in one-line notation, patterns and consecutive occurrences.

Permutations are plain tuples of ints ``(s_1, ..., s_n)`` holding each of
``1..n`` once. Positions and site indices are 1-based throughout, matching
the usual combinatorial conventions.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import DomainError

Perm = tuple  # tuple[int, ...]


def parse_perm(text) -> Perm:
    """Accept "13254", "1,3,2,5,4", "1 3 2" or any int sequence."""
    if isinstance(text, str):
        s = text.strip()
        if "," in s or " " in s:
            vals = [int(v) for v in s.replace(",", " ").split()]
        else:
            vals = [int(ch) for ch in s]
    else:
        vals = [int(v) for v in text]
    p = tuple(vals)
    check_perm(p)
    return p


def check_perm(p: Sequence[int]) -> None:
    n = len(p)
    if n == 0:
        raise DomainError("empty permutation")
    if sorted(p) != list(range(1, n + 1)):
        raise DomainError(f"not a permutation of 1..{n}: {tuple(p)}")


def perm_str(p: Sequence[int]) -> str:
    if len(p) < 10:
        return "".join(str(v) for v in p)
    return ",".join(str(v) for v in p)


def standardize(xs: Sequence) -> Perm:
    """Replace each entry by its rank (1-based) among the entries."""
    if len(xs) == 0:
        raise DomainError("standardize needs a nonempty sequence")
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    out = [0] * len(xs)
    for r, i in enumerate(order):
        if r and xs[order[r - 1]] == xs[i]:
            raise DomainError(f"entries must be distinct, {xs[i]!r} repeats")
        out[i] = r + 1
    return tuple(out)


def inverse(p: Sequence[int]) -> Perm:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v - 1] = i + 1
    return tuple(out)


def pat_at(sigma: Sequence[int], indices: Iterable[int]) -> Perm:
    idx = list(indices)
    if not idx:
        raise DomainError("index set must be nonempty")
    n = len(sigma)
    prev = 0
    for i in idx:
        if i <= prev:
            raise DomainError("indices must be strictly increasing")
        if i > n:
            raise DomainError(f"index {i} out of range for size {n}")
        prev = i
    return standardize([sigma[i - 1] for i in idx])


def c_occ(pi: Sequence[int], sigma: Sequence[int]) -> int:
    """Count intervals [i, i+k-1] of sigma whose pattern is pi."""
    k, n = len(pi), len(sigma)
    if k > n:
        return 0
    pi = tuple(pi)
    return sum(1 for i in range(n - k + 1) if standardize(sigma[i:i + k]) == pi)


def _embeds(pi, sigma, last_fixed=False) -> bool:
    """Backtracking search for a classical occurrence of pi in sigma.

    With ``last_fixed`` only occurrences using the final entry of sigma for
    the final entry of pi are considered. Worst case O(n^k), pruned by the
    relative-order test at each extension.
    """
    k, n = len(pi), len(sigma)
    if k > n:
        return False
    if last_fixed:
        head, pool_end = k - 1, n - 1
        tail_val = sigma[-1]
    else:
        head, pool_end = k, n
    chosen = []

    def ok(t, v):
        for s in range(t):
            if (sigma[chosen[s]] < v) != (pi[s] < pi[t]):
                return False
        if last_fixed and (v < tail_val) != (pi[t] < pi[k - 1]):
            return False
        return True

    def rec(t, start):
        if t == head:
            return True
        for i in range(start, pool_end - (head - t) + 1):
            if ok(t, sigma[i]):
                chosen.append(i)
                if rec(t + 1, i + 1):
                    return True
                chosen.pop()
        return False

    return rec(0, 0)


def contains(pi: Sequence[int], sigma: Sequence[int]) -> bool:
    return _embeds(tuple(pi), tuple(sigma))


def contains_brute(pi, sigma) -> bool:
    """Reference check over all index subsets (for tests)."""
    pi = tuple(pi)
    return any(standardize([sigma[i] for i in c]) == pi
               for c in combinations(range(len(sigma)), len(pi)))


CLASSICAL = "classical"
BARRED = "barred-2-31"
BARRED_ODD = "barred-2-odd-31"


@dataclass(frozen=True)
class GeneralizedPattern:
    kind: str
    perm: Perm = ()

    def __post_init__(self):
        if self.kind == CLASSICAL:
            check_perm(self.perm)
        elif self.kind not in (BARRED, BARRED_ODD):
            raise DomainError(f"unknown pattern kind {self.kind!r}")

    def __str__(self):
        return perm_str(self.perm) if self.kind == CLASSICAL else self.kind


def classical(p) -> GeneralizedPattern:
    return GeneralizedPattern(CLASSICAL, parse_perm(p))


def _between_count(sigma, i) -> int:
    # number of j < i (0-based) with sigma[i] > sigma[j] > sigma[i+1]
    hi, lo = sigma[i], sigma[i + 1]
    return sum(1 for j in range(i) if hi > sigma[j] > lo)


def _descent_ok(sigma, i, odd) -> bool:
    c = _between_count(sigma, i)
    return (c % 2 == 1) if odd else c > 0


def satisfies(sigma: Sequence[int], g: GeneralizedPattern) -> bool:
    if g.kind == CLASSICAL:
        return not _embeds(g.perm, tuple(sigma))
    odd = g.kind == BARRED_ODD
    return all(_descent_ok(sigma, i, odd)
               for i in range(len(sigma) - 1) if sigma[i] > sigma[i + 1])


def _satisfies_at_end(sigma, g) -> bool:
    # only occurrences involving the final entry; valid when sigma[:-1] satisfies g
    if g.kind == CLASSICAL:
        return not _embeds(g.perm, sigma, last_fixed=True)
    n = len(sigma)
    if n < 2 or sigma[-2] < sigma[-1]:
        return True
    return _descent_ok(sigma, n - 2, g.kind == BARRED_ODD)


def member(sigma: Sequence[int], avoidance) -> bool:
    avoidance = getattr(avoidance, "avoidance", avoidance)
    return all(satisfies(sigma, g) for g in avoidance)


def append_final(sigma: Sequence[int], m: int) -> Perm:
    n = len(sigma)
    if not 1 <= m <= n + 1:
        raise DomainError(f"site {m} out of range [1, {n + 1}]")
    return tuple(v + 1 if v >= m else v for v in sigma) + (m,)


def active_sites(sigma: Sequence[int], family, debug=False) -> list:
    """Sites m with append_final(sigma, m) still in the family, ascending.

    ``family`` is a FamilySpec or a list of GeneralizedPattern. Since sigma
    is assumed to be a member, only occurrences through the new final entry
    need checking.
    """
    avoidance = getattr(family, "avoidance", family)
    sigma = tuple(sigma)
    if debug and not member(sigma, avoidance):
        raise DomainError(f"{perm_str(sigma)} is not in the family")
    out = []
    for m in range(1, len(sigma) + 2):
        tau = append_final(sigma, m)
        if all(_satisfies_at_end(tau, g) for g in avoidance):
            out.append(m)
    return out

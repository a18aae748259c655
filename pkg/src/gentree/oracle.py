"""Brute-force ground truth for small sizes."""
from __future__ import annotations

import collections
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from .errors import ConfigError, ResourceError
from .families import get_family
from .perm import active_sites, append_final, c_occ, member, perm_str
from .tree import count_level, decode_many, encode, enumerate_level

MAX_TREE_N = 12
MAX_FILTER_N = 9


@dataclass
class ExactLevel:
    family: str
    n: int
    members: list
    count: int

    def lines(self):
        return [perm_str(p) for p in self.members]


def brute_enumerate(F, n: int, method: str = "tree") -> ExactLevel:
    """All members of size n: grown by active sites, or filtered from S_n."""
    F = get_family(F)
    if n < 1:
        raise ResourceError("n must be >= 1")
    if method == "filter":
        if n > MAX_FILTER_N:
            raise ResourceError(f"filtering S_{n} is capped at n = {MAX_FILTER_N}")
        members = [p for p in permutations(range(1, n + 1)) if member(p, F.avoidance)]
    else:
        if n > MAX_TREE_N:
            raise ResourceError(f"enumeration is capped at n = {MAX_TREE_N}")
        level = [(1,)]
        for _ in range(n - 1):
            level = [append_final(s, m) for s in level for m in active_sites(s, F)]
        members = level
    members = sorted(members)
    return ExactLevel(F.id, n, members, len(members))


def verify_bijection(F, n: int, max_examples: int = 5) -> dict:
    """Compare decode(enumerate_level) with brute enumeration, both ways."""
    F = get_family(F)
    seqs = enumerate_level(F, n)
    perms = decode_many(F, seqs)
    truth = set(brute_enumerate(F, n).members)
    got = set(perms)
    bad_enc = []
    for s, p in zip(seqs, perms):
        if encode(F, p) != s:
            bad_enc.append((s, p))
            if len(bad_enc) >= max_examples:
                break
    report = {
        "family": F.id, "n": n, "sequences": len(seqs), "brute_count": len(truth),
        "duplicates": len(perms) - len(got),
        "missing": [perm_str(p) for p in sorted(truth - got)[:max_examples]],
        "extra": [perm_str(p) for p in sorted(got - truth)[:max_examples]],
        "encode_mismatches": [(str(s), perm_str(p)) for s, p in bad_enc],
    }
    report["ok"] = (len(seqs) == len(truth) and not report["duplicates"]
                    and not report["missing"] and not report["extra"] and not bad_enc)
    return report


def verify_sampler(F, n: int, trials: int, rng, sampler: str = "cycle") -> dict:
    """Chi-square test of sampled permutations against the uniform law."""
    from scipy.stats import chisquare
    from .walks import uniform_permutations
    F = get_family(F)
    count = count_level(F, n)
    if count * 20 > trials:
        raise ConfigError(f"{trials} trials give fewer than 20 expected per class ({count} classes)")
    P = uniform_permutations(F, n, trials, rng, sampler=sampler)
    freq = collections.Counter(map(tuple, P.tolist()))
    truth = brute_enumerate(F, n).members if n <= 9 else None
    if truth is not None and not set(freq) <= set(truth):
        raise AssertionError("sampler produced a non-member")
    obs = np.array([freq.get(p, 0) for p in truth]) if truth is not None else np.array(
        list(freq.values()) + [0] * (count - len(freq)))
    if count == 1:
        stat, pval = 0.0, 1.0
    else:
        res = chisquare(obs)
        stat, pval = float(res.statistic), float(res.pvalue)
    return {"family": F.id, "n": n, "classes": count, "trials": trials, "sampler": sampler,
            "chi2": stat, "dof": count - 1, "p_value": pval, "observed_classes": len(freq)}


def exact_ccocc_pmf(F, n: int, pi) -> dict:
    """Exact law of c_occ(pi, .) under the uniform law on size-n members."""
    from .perm import parse_perm
    pi = parse_perm(pi)
    lev = brute_enumerate(F, n)
    cnt = collections.Counter(c_occ(pi, s) for s in lev.members)
    return {k: Fraction(v, lev.count) for k, v in sorted(cnt.items())}


def lattice_path_count(n: int) -> int:
    """Paths (0,0) -> (n, n//2) with unit east/north steps staying on or
    below y = x/2."""
    top = n // 2
    ways = [[0] * (top + 1) for _ in range(n + 1)]
    ways[0][0] = 1
    for x in range(n + 1):
        for y in range(top + 1):
            if (x, y) == (0, 0) or 2 * y > x:
                continue
            ways[x][y] = (ways[x - 1][y] if x else 0) + (ways[x][y - 1] if y else 0)
    return ways[n][top]


def window_check(F, perms, h_max: int = 4, seqs=None) -> dict:
    """Compare every window pattern with Pat of its jump factor.

    A window at positions m..m+h-1 is checked when all its labels exceed
    c(h) and the jump into position m exists (it comes from the synthetic
    root when the family has one). Pat is evaluated through the ramp.
    ``seqs`` may supply the label sequences already known for ``perms``;
    otherwise each permutation is encoded.
    """
    from .stats import pat_codes_batch, pattern_code
    from .perm import standardize
    F = get_family(F)
    off = F.n_offset
    factors = {}
    checks = []
    skipped = 0
    for idx, sigma in enumerate(perms):
        sigma = tuple(int(v) for v in sigma)
        seq = encode(F, sigma) if seqs is None else seqs[idx]
        n = len(sigma)
        for h in range(1, h_max + 1):
            c = F.c_of_h(h)
            for m in range(1, n - h + 2):
                first = m - 1 + off          # index of the label of position m
                if first < 1:
                    continue
                labs = seq[first:first + h]
                if min(x.value for x in labs) <= c:
                    skipped += 1
                    continue
                js = tuple((seq[i].value - seq[i - 1].value, seq[i].color)
                           for i in range(first, first + h))
                factors.setdefault(js, None)
                checks.append((sigma, m, h, js, pattern_code(standardize(sigma[m - 1:m + h - 1]))))
    by_len = collections.defaultdict(list)
    for js in factors:
        by_len[len(js)].append(js)
    for h, group in by_len.items():
        ys = np.array([[y for y, _ in js] for js in group])
        cs = np.array([[c for _, c in js] for js in group])
        for js, code in zip(group, pat_codes_batch(F, ys, cs).tolist()):
            factors[js] = code
    bad = [(perm_str(s), m, h, js) for s, m, h, js, code in checks if factors[js] != code]
    return {"family": F.id, "perms": len(perms), "windows": len(checks), "skipped": skipped,
            "factors": len(factors), "violations": bad}


def sampled_window_check(F, n: int, count: int, rng, h_max: int = 4) -> dict:
    """window_check on ``count`` uniform members, using the sampled labels."""
    from .kernels import decode_array
    from .tree import ColoredLabel
    from .walks import SAMPLERS, solve_pq, walks_to_body
    F = get_family(F)
    pos, col = SAMPLERS["cycle"](solve_pq(F), n + F.n_offset, count, rng)
    lab, lc = walks_to_body(F, pos, col)
    perms = decode_array(F, lab, lc).tolist()
    head = [ColoredLabel(F.root_label)] if F.virtual_root else []
    seqs = [head + [ColoredLabel(v, c) for v, c in zip(lr, cr)]
            for lr, cr in zip(lab.tolist(), lc.tolist())]
    return window_check(F, perms, h_max, seqs)


def count_table(families, n_max: int, method: str = "tree") -> list:
    """Rows (n, family, count) from brute enumeration."""
    rows = []
    for fid in families:
        F = get_family(fid)
        for n in range(1, n_max + 1):
            rows.append((n, F.id, brute_enumerate(F, n, method).count))
    return rows

"""The jump-to-pattern map Pat, the CLT constants and Monte-Carlo checks.

Pat is evaluated by building a label path that first climbs high enough
(a ramp of +1 steps, top color) and then follows the given jumps; the
pattern of the last h entries of the decoded permutation is the answer.
Once the ramp clears c(h) plus the total downward travel, its height does
not matter.

The constants mu, rho, nu are sums over colored jump tuples with every
jump >= -M. The discarded mass is bounded explicitly, so every constant
comes as an interval [lo, hi] that must contain the exact value.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import permutations
from typing import Optional

import numpy as np

from .errors import ConsistencyError, DomainError
from .families import get_family
from .kernels import count_consecutive_batch, decode_array
from .perm import check_perm, parse_perm, perm_str, standardize
from .tree import ColoredJump, _as_jumps, decode
from .walks import _draw_categories, make_rng, solve_pq, uniform_permutations

FLOAT_SLACK = 1e-13


# --- Pat ------------------------------------------------------------------

def check_jumps(F, js) -> tuple:
    F = get_family(F)
    js = _as_jumps(js)
    if not js:
        raise DomainError("need at least one jump")
    for i, (y, c) in enumerate(js):
        m = F.mult(y)
        if m == 0 or not 1 <= c <= m:
            raise ConsistencyError(f"jump {y}^{c} is not in the alphabet of {F.id}", i)
    return js


def _ramp_top(F, js, extra):
    need = F.c_of_h(len(js)) + sum(max(0, -y) for y, _ in js)
    return max(need + 1, F.first_label) + extra


def ramp_labels(F, js, extra=0):
    """Body labels/colors: climb from the first label to the ramp top, then js."""
    F = get_family(F)
    top = _ramp_top(F, js, extra)
    tc = F.mult(1)
    labels = list(range(F.first_label, top + 1))
    colors = [1] + [tc] * (len(labels) - 1)
    for y, c in js:
        labels.append(labels[-1] + y)
        colors.append(c)
    return labels, colors


_PAT_CACHE: dict = {}


def pat_of_jumps_generic(F, js, ramp_extra: int = 0, decoder: str = "fast") -> tuple:
    """Pat through the ramp construction.

    ``decoder="membership"`` decodes with the slow tree path, which only
    relies on the family's forbidden patterns.
    """
    F = get_family(F)
    js = check_jumps(F, js)
    key = (F.id, js, ramp_extra, decoder)
    hit = _PAT_CACHE.get(key)
    if hit is not None:
        return hit
    labels, colors = ramp_labels(F, js, ramp_extra)
    h = len(js)
    if decoder == "fast":
        sigma = decode_array(F, np.array([labels]), np.array([colors]))[0]
    elif decoder == "membership":
        seq = ([(F.root_label, 1)] if F.virtual_root else []) + list(zip(labels, colors))
        sigma = decode(F, seq)
    else:
        raise DomainError(f"unknown decoder {decoder!r}")
    out = standardize([int(v) for v in sigma[-h:]])
    _PAT_CACHE[key] = out
    return out


def pat_of_jumps(F, js, method: str = "auto") -> tuple:
    """Pat; the S-list path is used for Av(1423,4123) unless told otherwise."""
    F = get_family(F)
    js = check_jumps(F, js)
    if method == "slist" or (method == "auto" and F.id == "av1423-4123"):
        if F.id != "av1423-4123":
            raise DomainError("the S-list path is specific to av1423-4123")
        from .slist import pat_slist
        return pat_slist(js)
    return pat_of_jumps_generic(F, js)


def _pattern_code(ranks, h):
    # base-h code of 0-based rank rows
    w = h ** np.arange(h - 1, -1, -1)
    return (ranks * w).sum(axis=-1)


def pattern_code(pi) -> int:
    pi = np.asarray(pi) - 1
    return int(_pattern_code(pi, len(pi)))


def pat_codes_batch(F, ys, cs, ramp_extra=0):
    """Pat for many jump rows at once (rows of values ys and colors cs).

    All rows share one ramp tall enough for the worst row.
    """
    F = get_family(F)
    ys = np.atleast_2d(np.asarray(ys, np.int64))
    cs = np.atleast_2d(np.asarray(cs, np.int64))
    R, h = ys.shape
    if R == 0:
        return np.zeros(0, np.int64)
    worst = int(np.maximum(-ys, 0).sum(axis=1).max())
    top = max(F.c_of_h(h) + worst + 1, F.first_label) + ramp_extra
    ramp = np.arange(F.first_label, top + 1)
    rcol = np.full(len(ramp), F.mult(1))
    rcol[0] = 1
    labels = np.concatenate([np.broadcast_to(ramp, (R, len(ramp))), top + np.cumsum(ys, axis=1)], axis=1)
    colors = np.concatenate([np.broadcast_to(rcol, (R, len(ramp))), cs], axis=1)
    perms = decode_array(F, labels, colors)
    last = perms[:, -h:]
    ranks = last.argsort(axis=1).argsort(axis=1)
    return _pattern_code(ranks, h)


# --- truncated alphabet ---------------------------------------------------

def jump_alphabet(F, M: int):
    """Colored jumps with y >= -M: arrays (y, color, mass alpha_y / c_y)."""
    W = solve_pq(F)
    ys, als, ms = W.support_above(M)
    y = np.repeat(ys, ms)
    c = np.concatenate([np.arange(1, m + 1) for m in ms])
    w = np.repeat(als / ms, ms)
    return y.astype(np.int64), c.astype(np.int64), w


def _tuple_grid(K, h):
    return np.indices((K,) * h).reshape(h, -1).T


def _indicator(F, pi, M):
    """(A, weights per tuple, y rows) over all alphabet^h tuples."""
    y, c, w = jump_alphabet(F, M)
    K, h = len(y), len(pi)
    grid = _tuple_grid(K, h)
    codes = pat_codes_batch(F, y[grid], c[grid])
    A = codes == pattern_code(pi)
    wt = np.prod(w[grid], axis=1)
    return A, wt, y[grid], w


def _tail_stats(F, M):
    W = solve_pq(F)
    inside = W.ys >= -M
    P = math.fsum(W.alphas[inside])
    abs_all = math.fsum(W.alphas * np.abs(W.ys))
    abs_in = math.fsum(W.alphas[inside] * np.abs(W.ys[inside]))
    return P, abs_all, abs_in


def mu(F, pi, M: int = 30):
    """Interval for mu_pi = P(Pat(Y_1..Y_h) = pi)."""
    F = get_family(F)
    pi = parse_perm(pi)
    if M < 1:
        raise DomainError("truncation depth must be >= 1")
    if len(pi) == 1:
        return (1.0, 1.0)
    A, wt, _, _ = _indicator(F, pi, M)
    s = math.fsum(wt[A])
    P, _, _ = _tail_stats(F, M)
    tail = max(0.0, 1.0 - P ** len(pi))
    return (max(0.0, s - FLOAT_SLACK), min(1.0, s + tail + FLOAT_SLACK))


@dataclass
class PatternStats:
    pi: tuple
    family: str
    M: int
    mu: tuple
    sigma2_step: float
    rho: tuple
    nu: tuple
    beta2: tuple
    gamma2: tuple
    method: str = "truncated-sum"
    truncation_bound: float = 0.0
    rho_check: float = field(default=0.0, repr=False)

    def mid(self, name):
        lo, hi = getattr(self, name)
        return 0.5 * (lo + hi)

    def to_json(self) -> dict:
        d = asdict(self)
        d["pi"] = perm_str(self.pi)
        for k in ("mu", "rho", "nu", "beta2", "gamma2"):
            lo, hi = getattr(self, k)
            d[k] = {"lo": lo, "hi": hi}
        return d


def _quad_range(lo, hi, a):
    # range of f(x) = x - a x^2 on [lo, hi]
    vals = [lo - a * lo * lo, hi - a * hi * hi]
    v = 1 / (2 * a) if a > 0 else None
    if v is not None and lo <= v <= hi:
        vals.append(v - a * v * v)
    return min(vals), max(vals)


_STATS_CACHE: dict = {}


def gamma_sq(F, pi, M: int = 30) -> PatternStats:
    """mu, rho, nu, beta^2 and gamma^2 = beta^2 - rho^2 / sigma^2 as intervals."""
    F = get_family(F)
    pi = parse_perm(pi)
    key = (F.id, pi, M)
    if key in _STATS_CACHE:
        return _STATS_CACHE[key]
    if M < 1:
        raise DomainError("truncation depth must be >= 1")
    W = solve_pq(F)
    h = len(pi)
    if h == 1:
        # every window has pattern 1: mu = 1 and the count is deterministic
        zero = (0.0, 0.0)
        out = PatternStats(pi, F.id, M, (1.0, 1.0), W.variance, zero, zero, zero, zero,
                           method="exact")
        _STATS_CACHE[key] = out
        return out
    A, wt, yrows, w = _indicator(F, pi, M)
    K = len(w)
    P, abs_all, abs_in = _tail_stats(F, M)

    mu_s = math.fsum(wt[A])
    mu_tail = max(0.0, 1.0 - P**h)
    mu_iv = (max(0.0, mu_s - FLOAT_SLACK), min(1.0, mu_s + mu_tail + FLOAT_SLACK))

    WA = np.where(A, wt, 0.0)
    rho_s = math.fsum(WA * yrows.sum(axis=1))
    # same quantity through the walk positions X_{h+1} + 1 at beta = 0
    pos = -1 + np.cumsum(yrows, axis=1)
    rho_check = math.fsum(WA * (pos[:, -1] + 1))
    rho_tail = h * max(0.0, abs_all - abs_in * P ** (h - 1))
    rho_iv = (rho_s - rho_tail - FLOAT_SLACK, rho_s + rho_tail + FLOAT_SLACK)

    nu_s, nu_tail = 0.0, 0.0
    Af = A.astype(float)
    for s in range(2, h + 1):
        o = h - s + 1
        pre, mid = K ** (s - 1), K ** o
        f = WA.reshape(pre, mid).sum(axis=0)
        wpost = np.prod(w[_tuple_grid(K, s - 1)], axis=1)
        g = (Af.reshape(mid, pre) * wpost[None, :]).sum(axis=1)
        nu_s += math.fsum(f * g)
        nu_tail += max(0.0, 1.0 - P ** (h + s - 1))
    nu_iv = (nu_s - FLOAT_SLACK, nu_s + nu_tail + FLOAT_SLACK)

    q_lo, q_hi = _quad_range(mu_iv[0], mu_iv[1], 2 * h - 1)
    b_iv = (2 * nu_iv[0] + q_lo, 2 * nu_iv[1] + q_hi)
    r2 = [rho_iv[0] ** 2, rho_iv[1] ** 2]
    r2_lo = 0.0 if rho_iv[0] <= 0 <= rho_iv[1] else min(r2)
    r2_hi = max(r2)
    s2 = W.variance
    g_iv = (b_iv[0] - r2_hi / s2, b_iv[1] - r2_lo / s2)
    out = PatternStats(pi, F.id, M, mu_iv, s2, rho_iv, nu_iv, b_iv, g_iv,
                       truncation_bound=1.0 - P, rho_check=rho_check)
    _STATS_CACHE[key] = out
    return out


# --- limiting rooted order --------------------------------------------------

def limit_order_restriction(F, h: int, trials: int, rng) -> dict:
    """Empirical law of Pat(Y_{-h}..Y_h) over i.i.d. colored jumps."""
    F = get_family(F)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if h < 0:
        raise DomainError("h must be >= 0")
    W = solve_pq(F)
    ys, cs, _ = W.categories
    idx = _draw_categories(W, (trials, 2 * h + 1), rng)
    uniq, inv, counts = np.unique(idx, axis=0, return_inverse=True, return_counts=True)
    codes = pat_codes_batch(F, ys[uniq], cs[uniq])
    decode_code = {pattern_code(p): p for p in permutations(range(1, 2 * h + 2))}
    out: dict = {}
    for code, cnt in zip(codes.tolist(), counts.tolist()):
        p = decode_code[code]
        out[p] = out.get(p, 0) + cnt
    return {p: c / trials for p, c in sorted(out.items())}


def window_pattern_pmf(perms, start: int, width: int) -> dict:
    """Empirical law of the pattern at positions start..start+width-1 (0-based)."""
    perms = np.asarray(perms)
    win = perms[:, start:start + width]
    ranks = win.argsort(axis=1).argsort(axis=1) + 1
    uniq, counts = np.unique(ranks, axis=0, return_counts=True)
    tot = counts.sum()
    return {tuple(int(v) for v in u): c / tot for u, c in zip(uniq, counts)}


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


# --- CLT harness ------------------------------------------------------------

@dataclass
class CLTReport:
    family: str
    pi: str
    n: int
    reps: int
    mu_mid: float
    gamma2_mid: float
    mean: float
    mean_se: float
    var: float
    var_se: float
    ks: float
    ks_jitter: float
    ks_pvalue: float


def sample_counts(F, pi, n, reps, rng=None, seed=None, sampler="cycle", chunk=1000, threads=1):
    """c-occ counts of pi in ``reps`` uniform members of size n.

    With ``seed`` the work is cut into fixed chunks, chunk i drawing from
    stream (seed, i); the result is then identical for any thread count.
    """
    F = get_family(F)
    pi = np.asarray(parse_perm(pi), np.int64)
    if seed is None:
        rng = rng if rng is not None else make_rng()
        out = []
        left = reps
        while left > 0:
            k = min(chunk, left)
            P = uniform_permutations(F, n, k, rng, sampler=sampler)
            out.append(count_consecutive_batch(P, pi))
            left -= k
        return np.concatenate(out) if out else np.zeros(0, np.int64)
    from .parallel import run_chunks
    sizes = [min(chunk, reps - i) for i in range(0, reps, chunk)]
    parts = run_chunks(_count_chunk, [(F.id, tuple(pi.tolist()), n, k, seed, i, sampler)
                                      for i, k in enumerate(sizes)], threads)
    return np.concatenate(parts) if parts else np.zeros(0, np.int64)


def _count_chunk(args):
    fid, pi, n, k, seed, i, sampler = args
    rng = make_rng(seed, i)
    P = uniform_permutations(fid, n, k, rng, sampler=sampler)
    return count_consecutive_batch(P, np.asarray(pi, np.int64))


def clt_sample(F, pi, n, reps, rng=None, seed=None, M=30, sampler="cycle", threads=1,
               boot=200, boot_seed=0):
    """Normalized statistics (c-occ - n mu) / sqrt(n) and a normality report."""
    from scipy import stats as sst
    F = get_family(F)
    pi = parse_perm(pi)
    st = gamma_sq(F, pi, M)
    mu_mid = st.mid("mu")
    g2 = max(st.mid("gamma2"), 0.0)
    counts = sample_counts(F, pi, n, reps, rng=rng, seed=seed, sampler=sampler, threads=threads)
    z = (counts - n * mu_mid) / math.sqrt(n)
    brng = make_rng(boot_seed, 0xB007)
    bidx = brng.integers(0, reps, size=(boot, reps))
    bvar = z[bidx].var(axis=1, ddof=1)
    g = math.sqrt(g2)
    if g > 0:
        ks = sst.kstest(z, "norm", args=(0, g))
        jitter = make_rng(boot_seed, 0x717).uniform(-0.5, 0.5, reps) / math.sqrt(n)
        ks_j = sst.kstest(z + jitter, "norm", args=(0, g)).statistic
        ks_stat, ks_p = ks.statistic, ks.pvalue
    else:
        ks_stat = ks_j = ks_p = float("nan")
    rep = CLTReport(F.id, perm_str(pi), n, reps, mu_mid, g2,
                    float(z.mean()), float(z.std(ddof=1) / math.sqrt(reps)),
                    float(z.var(ddof=1)), float(bvar.std(ddof=1)),
                    float(ks_stat), float(ks_j), float(ks_p))
    return z, rep

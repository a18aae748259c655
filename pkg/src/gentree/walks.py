"""Tilted step laws and exact samplers for conditioned colored walks.

A path of labels ``X_1..X_n`` in the generating tree is read as a walk
started at ``beta - 1`` with i.i.d. steps ``P(Y = y, color c) =
alpha_y / c_y`` where ``alpha_y = p q^y m_y``. Conditioning on staying
``>= beta`` and on a suitable endpoint makes the path uniform on the
tree level, because every admissible path then has the same weight.

Two samplers are provided: plain rejection (the oracle) and a
cycle-lemma sampler that only rejects on the total displacement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, FeasibilityError, ResourceError, SolverError
from .families import EXACT_T, FamilySpec, _phi_closed, get_family

DEEP_FLOOR = 1e-300      # smallest mass kept in the exact step table
SHALLOW_TAIL = 1e-9      # tail mass lumped into one category by the bridge sampler
DEFAULT_STEP_BUDGET = 10**9


# --- tilting --------------------------------------------------------------

def _check_t(t):
    if not (0.0 < t < 1.0) or not math.isfinite(t):
        raise DomainError(f"t = {t!r} outside the convergence interval (0, 1)")


def phi(F, t: float) -> float:
    """sum_y m_y t^(-y) (closed form)."""
    F = get_family(F)
    _check_t(t)
    return _phi_closed(F.profile, t)[0]


def dphi(F, t: float) -> float:
    F = get_family(F)
    _check_t(t)
    return _phi_closed(F.profile, t)[1]


def phi_series(F, t: float, tol: float = 1e-16) -> float:
    """Direct summation of the series, used to cross-check closed forms."""
    F = get_family(F)
    _check_t(t)
    terms = [F.mult(1) / t]
    d = 0
    # terms m_{-d} t^d decay geometrically; stop once the remaining tail
    # bound t^d / (1 - t) falls below tol
    while True:
        terms.append(F.mult(-d) * t**d)
        d += 1
        if t**d / (1 - t) < tol:
            break
    return math.fsum(terms)


def _bisect(f, lo, hi, xtol=1e-14):
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise SolverError(f"no sign change on [{lo}, {hi}]")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < xtol * 1e-2:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class WalkParams:
    family: str
    beta: int
    t: float
    p: float
    q: float
    span: int
    variance: float
    # exact colored table, y descending from +1; masses below DEEP_FLOOR dropped
    ys: np.ndarray = field(repr=False)
    mults: np.ndarray = field(repr=False)
    alphas: np.ndarray = field(repr=False)

    @property
    def spec(self) -> FamilySpec:
        return get_family(self.family)

    def alpha(self, y: int) -> float:
        m = self.spec.mult(y)
        if m == 0:
            return 0.0
        return self.p * self.q**y * m

    def colors(self, y: int) -> int:
        return self.spec.mult(y)

    def support_above(self, depth: int):
        """(y, alpha_y, c_y) for y >= -depth with positive mass."""
        sel = self.ys >= -depth
        return self.ys[sel], self.alphas[sel], self.mults[sel]

    def tail_mass(self, depth: int) -> float:
        return math.fsum(self.alphas[self.ys < -depth])

    def to_json(self, tail: float = 1e-12) -> dict:
        keep = 1
        while keep < len(self.ys) and math.fsum(self.alphas[keep:]) >= tail:
            keep += 1
        return {
            "family": self.family, "beta": self.beta,
            "t": self.t, "p": self.p, "q": self.q,
            "alpha": [[int(y), float(a)] for y, a in zip(self.ys[:keep], self.alphas[:keep])],
            "colors": [[int(y), int(c)] for y, c in zip(self.ys[:keep], self.mults[:keep])],
            "variance": self.variance, "span": self.span,
            "truncation": {"tail_bound": tail, "dropped_mass": math.fsum(self.alphas[keep:]),
                           "min_y": int(self.ys[keep - 1])},
        }

    # colored categories, ordered by y descending then color
    @property
    def categories(self):
        return _categories(self)


_CAT_CACHE = {}


def _categories(W):
    key = id(W)
    hit = _CAT_CACHE.get(key)
    if hit is not None and hit[0] is W:
        return hit[1]
    ys = np.repeat(W.ys, W.mults)
    cs = np.concatenate([np.arange(1, m + 1) for m in W.mults])
    ps = np.repeat(W.alphas / W.mults, W.mults)
    out = (ys.astype(np.int64), cs.astype(np.int64), ps)
    _CAT_CACHE[key] = (W, out)
    return out


_PARAM_CACHE = {}


def solve_pq(F) -> WalkParams:
    """Solve p sum_y q^y m_y = 1, sum_y y q^y m_y = 0 by bisection on phi'."""
    F = get_family(F)
    hit = _PARAM_CACHE.get(F.id)
    if hit is not None:
        return hit
    t = _bisect(lambda s: dphi(F, s), 1e-9, 1 - 1e-9)
    if abs(dphi(F, t)) > 1e-10:
        raise SolverError(f"phi' not small at the root: {dphi(F, t)}")
    p = 1.0 / phi(F, t)
    q = 1.0 / t
    ys, ms, als = [], [], []
    y = 1
    while True:
        m = F.mult(y)
        a = p * t ** (-y) * m if m else 0.0
        if m:
            if a < DEEP_FLOOR:
                break
            ys.append(y)
            ms.append(m)
            als.append(a)
        y -= 1
    ys = np.array(ys, np.int64)
    als = np.array(als)
    var = math.fsum(als * ys.astype(float) ** 2)
    W = WalkParams(F.id, F.beta, t, p, q, F.span, var, ys, np.array(ms, np.int64), als)
    total = math.fsum(als)
    mean = math.fsum(als * ys)
    if abs(total - 1) > 1e-12 or abs(mean) > 1e-10 or not var > 0:
        raise SolverError(f"step law invalid: total={total}, mean={mean}, var={var}")
    _PARAM_CACHE[F.id] = W
    return W


def exact_t(F) -> float:
    return EXACT_T[get_family(F).profile]


def step_moments(W: WalkParams):
    """(mean, variance) from the table, with the generating-function check."""
    mean = math.fsum(W.alphas * W.ys)
    var = math.fsum(W.alphas * W.ys.astype(float) ** 2)
    F = W.spec

    def psi(s):
        return s * dphi(F, s) / phi(F, s)

    h = 1e-5
    var_gf = W.t * (psi(W.t + h) - psi(W.t - h)) / (2 * h)
    mean_gf = -W.t * dphi(F, W.t) / phi(F, W.t)
    if abs(var_gf - var) > 1e-6 or abs(mean_gf) > 1e-10:
        raise SolverError(f"moment cross-check failed: {var} vs {var_gf}")
    return mean, var


# --- rng ------------------------------------------------------------------

def make_rng(seed=None, *key) -> np.random.Generator:
    """Counter-based generator for stream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


# --- walks ----------------------------------------------------------------

@dataclass
class ColoredWalk:
    positions: np.ndarray   # X_1..X_N
    colors: np.ndarray      # color of each of the N-1 steps

    @property
    def steps(self):
        return np.diff(self.positions)

    def label_colors(self):
        return np.concatenate([[1], self.colors]).astype(np.int64)


def _draw_categories(W, size, rng):
    ys, cs, ps = W.categories
    cdf = np.cumsum(ps)
    u = rng.random(size) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(ps) - 1)


def sample_walk(W: WalkParams, N: int, rng) -> ColoredWalk:
    if N < 1:
        raise DomainError("walk length must be >= 1")
    ys, cs, _ = W.categories
    idx = _draw_categories(W, N - 1, rng)
    pos = np.empty(N, np.int64)
    pos[0] = W.beta - 1
    pos[1:] = W.beta - 1 + np.cumsum(ys[idx])
    return ColoredWalk(pos, cs[idx])


def _residue_after(W, steps):
    # reachable residues of X_{1+steps} mod span, by iterating the step residues
    s = W.span
    step_res = {int(y) % s for y in W.ys}
    cur = {(W.beta - 1) % s}
    for _ in range(min(steps, 4 * s)):
        cur = {(r + d) % s for r in cur for d in step_res}
    if steps > 4 * s:
        # the residue set is periodic with period dividing span
        extra = (steps - 4 * s) % s
        for _ in range(extra):
            cur = {(r + d) % s for r in cur for d in step_res}
    return cur


def endpoint(W: WalkParams, n: int, mode: str = "auto") -> int:
    """Value T of X_{n+1} to condition on.

    ``mode="beta"`` uses T = beta and fails when parity forbids it.
    ``mode="auto"`` picks the first of beta, beta+1, beta-1 that is
    reachable and can be hit in one step from every admissible X_n; this
    is what makes all admissible paths equally likely.
    """
    if n < 1:
        raise DomainError("effective length must be >= 1")
    beta, s = W.beta, W.span
    end_res = _residue_after(W, n)
    if mode == "beta":
        if beta % s not in end_res:
            raise FeasibilityError(f"X_{{n+1}} = {beta} unreachable for n = {n} (span {s})")
        return beta
    if mode != "auto":
        raise DomainError(f"unknown endpoint mode {mode!r}")
    last_res = _residue_after(W, n - 1)
    if n == 1:
        last = [beta - 1]
    else:
        last = [k for k in range(beta, beta + 64) if k % s in last_res]
    for T in (beta, beta + 1, beta - 1):
        if T % s not in end_res:
            continue
        if all(W.alpha(T - k) > 0 for k in last):
            return T
    raise FeasibilityError(f"no admissible endpoint for n = {n}")


def _admissible(W, pos, T):
    # pos: (rows, n+1) positions X_1..X_{n+1}
    n = pos.shape[1] - 1
    ok = pos[:, n] == T
    if n >= 2:
        ok &= pos[:, 1:n].min(axis=1) >= W.beta
    return ok


def conditioned_rejection_batch(W, n, size, rng, mode="auto", budget=DEFAULT_STEP_BUDGET):
    """size exact samples by rejection: (positions (size, n), step colors (size, n-1))."""
    T = endpoint(W, n, mode)
    ys, cs, _ = W.categories
    got_pos, got_col = [], []
    have, spent = 0, 0
    rate = 0.5
    while have < size:
        rows = int(min(200_000, max(64, math.ceil((size - have) / rate * 1.2))))
        if spent + rows * n > budget:
            raise ResourceError(f"rejection budget of {budget} steps exhausted")
        spent += rows * n
        idx = _draw_categories(W, (rows, n), rng)
        pos = np.empty((rows, n + 1), np.int64)
        pos[:, 0] = W.beta - 1
        np.cumsum(ys[idx], axis=1, out=pos[:, 1:])
        pos[:, 1:] += W.beta - 1
        ok = _admissible(W, pos, T)
        k = int(ok.sum())
        rate = max(0.5 * rate + 0.5 * k / rows, 1e-7) if k else max(rate / 4, 1e-7)
        if k:
            got_pos.append(pos[ok, :n])
            got_col.append(cs[idx[ok, :n - 1]])
            have += k
    return np.concatenate(got_pos)[:size], np.concatenate(got_col)[:size]


def sample_conditioned_rejection(W, n, rng, mode="auto", budget=DEFAULT_STEP_BUDGET) -> ColoredWalk:
    pos, col = conditioned_rejection_batch(W, n, 1, rng, mode, budget)
    return ColoredWalk(pos[0], col[0])


# --- cycle-lemma sampler --------------------------------------------------

def _shallow_depth(W):
    d = 1
    while W.tail_mass(d) > SHALLOW_TAIL:
        d += 1
    return d


def _sum_conditioned_multisets(W, L, targets_fn, rows, rng):
    """Draw ``rows`` multisets of L colored categories; keep those whose
    reversed-step sum equals the per-row target.

    Returns (category rows (accepted, L) in uniformly random order, mask).
    ``targets_fn(rows)`` yields the required reversed sums per attempt row
    and any per-row extra data.
    """
    ys, cs, ps = W.categories
    depth = _shallow_depth(W)
    ns = int(np.searchsorted(-ys, depth, side="right"))   # categories with y >= -depth
    pv = np.append(ps[:ns], max(0.0, 1.0 - ps[:ns].sum()))
    pv /= pv.sum()
    counts = rng.multinomial(L, pv, size=rows)
    rev = -ys[:ns]
    sums = counts[:, :ns] @ rev
    tail_rows = np.flatnonzero(counts[:, ns])
    tail_draws = {}
    if tail_rows.size:
        tcdf = np.cumsum(ps[ns:])
        for r in tail_rows:
            k = int(counts[r, ns])
            u = rng.random(k) * tcdf[-1]
            d = ns + np.minimum(np.searchsorted(tcdf, u, side="right"), len(tcdf) - 1)
            tail_draws[int(r)] = d
            sums[r] += int((-ys[d]).sum())
    target, extra = targets_fn(rows)
    ok = sums == target
    acc = np.flatnonzero(ok)
    if acc.size == 0:
        return np.empty((0, L), np.int64), ok, extra
    cat_ids = np.arange(ns + 1)
    flat = np.repeat(np.tile(cat_ids, acc.size), counts[acc].ravel())
    arr = flat.reshape(acc.size, L)
    tails = [tail_draws[int(r)] for r in acc if int(r) in tail_draws]
    if tails:
        arr[arr == ns] = np.concatenate(tails)
    arr = rng.permuted(arr, axis=1)
    return arr, ok, extra


def _rotate_to_first_passage(rev_steps, D, rng):
    """Cyclic shift of each row so that partial sums stay > -D until the end.

    Valid shifts are the first-passage times of S_0..S_{L-1} to the levels
    m, ..., m+D-1 (m = running minimum); one is picked uniformly.
    """
    R, L = rev_steps.shape
    S = np.zeros((R, L), np.int64)
    if L > 1:
        np.cumsum(rev_steps[:, :-1], axis=1, out=S[:, 1:])
    m = S.min(axis=1)
    D = np.broadcast_to(np.asarray(D, np.int64), (R,))
    level = m + (rng.integers(0, D) if R else np.zeros(0, np.int64))
    r = np.argmax(S <= level[:, None], axis=1)
    cols = (np.arange(L)[None, :] + r[:, None]) % L
    return r, cols


def conditioned_cycle_batch(W, n, size, rng, mode="auto", budget=DEFAULT_STEP_BUDGET):
    """size exact samples via the cycle lemma on the time-reversed walk."""
    T = endpoint(W, n, mode)
    ys, cs, ps = W.categories
    beta = W.beta
    D = T - (beta - 1)
    if n == 1:
        pos = np.full((size, 1), beta - 1, np.int64)
        return pos, np.zeros((size, 0), np.int64)
    out_cats = []
    have, spent = 0, 0
    rate = 0.05
    # work per attempt is one multinomial draw over the shallow categories
    ys_shallow = int(np.searchsorted(-ys, _shallow_depth(W), side="right")) + 1
    if D >= 1:
        L = n

        def targets(rows):
            return np.full(rows, -D, np.int64), None
    else:
        # D == 0: the first reversed step a >= 1 leaves level -1; given a,
        # the other n-1 steps form a first passage down by a, which has
        # exactly a valid rotations. Size-biasing a by its value accounts
        # for that count.
        L = n - 1
        neg = np.flatnonzero(ys <= -1)
        wts = ps[neg] * (-ys[neg])
        wcdf = np.cumsum(wts)

        def targets(rows):
            u = rng.random(rows) * wcdf[-1]
            a_idx = neg[np.minimum(np.searchsorted(wcdf, u, side="right"), len(neg) - 1)]
            return ys[a_idx], a_idx   # reversed sum must be -a = y of that category

    while have < size:
        rows = int(min(50_000, max(64, math.ceil((size - have) / rate * 1.2))))
        if spent + rows * ys_shallow > budget:
            raise ResourceError(f"cycle sampler budget of {budget} work units exhausted")
        spent += rows * ys_shallow
        arr, ok, extra = _sum_conditioned_multisets(W, L, targets, rows, rng)
        k = arr.shape[0]
        rate = max(0.5 * rate + 0.5 * k / rows, 1e-7) if k else max(rate / 4, 1e-7)
        if not k:
            continue
        rev = -ys[arr]
        if D >= 1:
            _, cols = _rotate_to_first_passage(rev, D, rng)
            arr = np.take_along_axis(arr, cols, axis=1)
        else:
            a_idx = extra[ok]
            _, cols = _rotate_to_first_passage(rev, -ys[a_idx], rng)
            arr = np.concatenate([a_idx[:, None], np.take_along_axis(arr, cols, axis=1)], axis=1)
        out_cats.append(arr[:, ::-1])   # back to forward time
        have += k
    cats = np.concatenate(out_cats)[:size]
    pos = np.empty((size, n + 1), np.int64)
    pos[:, 0] = beta - 1
    np.cumsum(ys[cats], axis=1, out=pos[:, 1:])
    pos[:, 1:] += beta - 1
    if not _admissible(W, pos, T).all():
        raise AssertionError("cycle sampler produced an inadmissible path")
    return pos[:, :n], cs[cats[:, :n - 1]]


def sample_conditioned_cycle(W, n, rng, mode="auto", budget=DEFAULT_STEP_BUDGET) -> ColoredWalk:
    pos, col = conditioned_cycle_batch(W, n, 1, rng, mode, budget)
    return ColoredWalk(pos[0], col[0])


SAMPLERS = {"cycle": conditioned_cycle_batch, "rejection": conditioned_rejection_batch}


def walks_to_body(F, pos, col):
    """Walk rows -> label/color rows starting at the size-1 permutation."""
    F = get_family(F)
    lab_col = np.concatenate([np.ones((pos.shape[0], 1), np.int64), col], axis=1)
    off = F.n_offset
    return pos[:, off:], lab_col[:, off:]


def uniform_permutations(F, size_n, count, rng, sampler="cycle", mode="auto"):
    """``count`` independent uniform members of F of size ``size_n`` (rows)."""
    from .kernels import decode_array
    F = get_family(F)
    if size_n < 1:
        raise DomainError("size must be >= 1")
    W = solve_pq(F)
    n = size_n + F.n_offset
    pos, col = SAMPLERS[sampler](W, n, count, rng, mode)
    lab, lc = walks_to_body(F, pos, col)
    return decode_array(F, lab, lc)


def uniform_permutation(F, size_n, rng, sampler="cycle", mode="auto") -> tuple:
    return tuple(int(v) for v in uniform_permutations(F, size_n, 1, rng, sampler, mode)[0])


def high_label_fraction(F, n, reps, rng, c=10, a_n: Optional[int] = None, sampler="cycle"):
    """Fraction of conditioned walks with X_i > c on [a_n, n - a_n]."""
    W = solve_pq(F)
    if a_n is None:
        a_n = int(math.floor(n ** (1 / 3) + 1e-9))
    pos, _ = SAMPLERS[sampler](W, n, reps, rng)
    lo, hi = a_n, n - a_n          # 1-based inclusive
    if hi < lo:
        return 1.0
    window = pos[:, lo - 1:hi]
    return float((window.min(axis=1) > c).mean())

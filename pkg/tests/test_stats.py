import itertools
import math

import numpy as np
import pytest

from gentree.errors import ConsistencyError, DomainError
from gentree.families import FAMILY_IDS, get_family
from gentree.oracle import brute_enumerate, exact_ccocc_pmf, window_check
from gentree.stats import (clt_sample, gamma_sq, limit_order_restriction, mu, pat_codes_batch,
                           pat_of_jumps, pattern_code, pat_of_jumps_generic, sample_counts, total_variation,
                           window_pattern_pmf)
from gentree.walks import _draw_categories, make_rng, solve_pq

R2 = math.sqrt(2)

# closed forms for a few constants
KNOWN = [
    ("av123", "21", 0.75, 1 / 16),
    ("av1423-4123", "12", R2 - 1, None),
    ("famA", "21", 1 / 3, 1 / 18),
    ("famB", "12", 2 / 3, 2 / 27),
]


def _contains(iv, x):
    return iv[0] <= x <= iv[1]


def test_pat_examples():
    js = [(-2, 1), (1, 1), (1, 1), (1, 2), (1, 2), (-7, 1)]
    assert pat_of_jumps("av1423-4123", js) == (4, 2, 1, 5, 6, 3)
    assert pat_of_jumps_generic("av1423-4123", js) == (4, 2, 1, 5, 6, 3)
    for fid in FAMILY_IDS:
        F = get_family(fid)
        y = 1 if F.mult(1) else -1
        assert pat_of_jumps(F, [(y, 1)]) == (1,)


def test_pat_rejects_unrealizable_jumps():
    with pytest.raises(ConsistencyError):
        pat_of_jumps("famA", [(0, 1)])
    with pytest.raises(ConsistencyError):
        pat_of_jumps("famB", [(1, 1), (-2, 1)])
    with pytest.raises(ConsistencyError):
        pat_of_jumps("av123", [(2, 1)])
    with pytest.raises(ConsistencyError):
        pat_of_jumps("av123", [(1, 2)])


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_ramp_independence(fid):
    F = get_family(fid)
    ys = [y for y in range(1, -5, -1) if F.mult(y)]
    cats = [(y, c) for y in ys for c in range(1, F.mult(y) + 1)]
    tups = list(itertools.product(cats, repeat=3))
    Y = np.array([[j[0] for j in t] for t in tups])
    C = np.array([[j[1] for j in t] for t in tups])
    assert (pat_codes_batch(F, Y, C) == pat_codes_batch(F, Y, C, ramp_extra=5)).all()


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_window_consistency_size_8(fid):
    r = window_check(fid, brute_enumerate(fid, 8).members)
    assert r["windows"] > 0
    assert r["violations"] == []


def test_mu_trivial_and_totals():
    for fid in FAMILY_IDS:
        lo, hi = mu(fid, "1")
        assert lo <= 1.0 <= hi and hi - lo < 1e-8
    W = solve_pq("av123")
    for h in (2, 3):
        ivs = [mu("av123", p, 20) for p in itertools.permutations(range(1, h + 1))]
        tail = 1 - (1 - W.tail_mass(20)) ** h
        lo_sum = math.fsum(lo for lo, _ in ivs)
        hi_sum = math.fsum(hi for _, hi in ivs)
        assert lo_sum <= 1 + 1e-12 <= hi_sum + 2e-12
        # each interval carries the whole tail, so the midpoints overshoot by (h!/2 - 1) tail
        mid = 0.5 * (lo_sum + hi_sum)
        assert 1 - h * tail - 1e-12 <= mid <= 1 + (math.factorial(h) / 2 - 1) * tail + 1e-12


@pytest.mark.parametrize("fid,pi,m,g2", KNOWN)
def test_known_constants(fid, pi, m, g2):
    st = gamma_sq(fid, pi, 30)
    assert _contains(st.mu, m)
    if g2 is not None:
        assert _contains(st.gamma2, g2)
    assert st.gamma2[1] >= 0
    assert abs(st.rho_check - st.mid("rho")) < st.rho[1] - st.rho[0] + 1e-12


def test_mu_av123_21_monte_carlo():
    lo, hi = mu("av123", "21", 30)
    assert hi - lo < 1e-8
    W = solve_pq("av123")
    rng = make_rng(12)
    ys, cs, _ = W.categories
    idx = _draw_categories(W, (10**6, 2), rng)
    uniq, counts = np.unique(idx, axis=0, return_counts=True)
    codes = pat_codes_batch("av123", ys[uniq], cs[uniq])
    est = counts[codes == pattern_code((2, 1))].sum() / 10**6
    se = math.sqrt(est * (1 - est) / 10**6)
    assert lo - 2.576 * se <= est <= hi + 2.576 * se


def test_gamma_pi_one_vanishes():
    st = gamma_sq("av1423-4123", "1", 20)
    assert _contains(st.mu, 1.0)
    assert _contains(st.rho, 0.0)
    assert _contains(st.gamma2, 0.0)
    assert st.gamma2 == (0.0, 0.0)


def test_intervals_nest():
    for fid, pi in (("av123", "21"), ("av1423-4123", "12"), ("famB", "21"), ("av132", "132")):
        prev = None
        for M in (6, 10, 16, 24):
            st = gamma_sq(fid, pi, M)
            assert st.gamma2[0] <= st.gamma2[1]
            if prev is not None:
                for k in ("mu", "rho", "nu", "gamma2"):
                    lo, hi = getattr(st, k)
                    plo, phi = getattr(prev, k)
                    assert plo - 1e-12 <= lo and hi <= phi + 1e-12, (fid, pi, M, k)
            prev = st


def test_bad_truncation():
    with pytest.raises(DomainError):
        mu("av123", "21", 0)


def test_limit_order_basics():
    p0 = limit_order_restriction("av123", 0, 100, make_rng(0))
    assert p0 == {(1,): 1.0}
    p1 = limit_order_restriction("av1423-4123", 1, 10**4, make_rng(1))
    assert math.fsum(p1.values()) == pytest.approx(1.0, abs=1e-12)
    assert all(len(k) == 3 for k in p1)


def test_window_pmf_and_tv():
    P = np.array([[1, 2, 3], [3, 2, 1], [2, 1, 3], [1, 2, 3]])
    pmf = window_pattern_pmf(P, 0, 2)
    assert pmf == {(1, 2): 0.5, (2, 1): 0.5}
    assert total_variation({"a": 1.0}, {"b": 1.0}) == 1.0
    assert total_variation(pmf, pmf) == 0.0


def test_clt_pi_one_is_zero():
    z, rep = clt_sample("av123", "1", 50, 20, seed=1)
    assert np.allclose(z, 0.0)


def test_counts_do_not_depend_on_threads():
    a = sample_counts("av132", "21", 60, 300, seed=9, chunk=100, threads=1)
    b = sample_counts("av132", "21", 60, 300, seed=9, chunk=100, threads=2)
    assert a.tolist() == b.tolist()


def test_exact_mean_approaches_mu():
    lo, hi = mu("av123", "21", 30)
    gaps = []
    for n in range(4, 11):
        pmf = exact_ccocc_pmf("av123", n, "21")
        assert sum(pmf.values()) == 1
        mean = sum(k * v for k, v in pmf.items())
        gaps.append(abs(float(mean) / n - lo))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_clt_small_famb():
    # span-2 family; loose sanity check at a modest size
    z, rep = clt_sample("famB", "12", 401, 2000, seed=4)
    assert rep.var == pytest.approx(2 / 27, rel=0.15)
    assert abs(rep.mean) < 0.1

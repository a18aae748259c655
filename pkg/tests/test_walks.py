import collections
import math

import numpy as np
import pytest
from scipy.stats import binomtest, chisquare

from gentree.errors import DomainError, FeasibilityError, ResourceError
from gentree.families import FAMILY_IDS, get_family
from gentree.oracle import brute_enumerate
from gentree.tree import encode
from gentree.walks import (SAMPLERS, conditioned_cycle_batch, conditioned_rejection_batch,
                           endpoint, exact_t, make_rng, phi, sample_conditioned_cycle,
                           sample_conditioned_rejection, sample_walk, solve_pq, step_moments,
                           uniform_permutation, uniform_permutations, walks_to_body)

R2, R3 = math.sqrt(2), math.sqrt(3)


def test_phi_examples():
    assert phi("av1423-4123", 2 - R2) == pytest.approx(3 + 2 * R2, abs=1e-12)
    assert phi("av123", 0.5) == pytest.approx(4.0, abs=1e-12)
    for bad in (0.0, -1.0, 1.0):
        with pytest.raises(DomainError):
            phi("av123", bad)


def test_solve_pq_av1423():
    W = solve_pq("av1423-4123")
    assert W.alpha(1) == pytest.approx(2 - R2, abs=1e-12)
    assert W.p == pytest.approx(3 - 2 * R2, abs=1e-12)
    for y in range(0, -15, -1):
        assert W.alpha(y) == pytest.approx((2 - R2) ** (-y) * (3 - 2 * R2), abs=1e-12)
    assert W.colors(1) == 2 and W.colors(0) == 1 and W.colors(-4) == 1


def test_solve_pq_catalan_and_fam():
    W = solve_pq("av123")
    for y in range(1, -20, -1):
        assert W.alpha(y) == pytest.approx(2.0 ** (y - 2), abs=1e-12)
    A = solve_pq("famA")
    assert A.alpha(1) == pytest.approx(2 / 3, abs=1e-12)
    assert A.alpha(0) == 0.0
    for y in range(-1, -20, -1):
        assert A.alpha(y) == pytest.approx(2.0**y / 3, abs=1e-12)
    B = solve_pq("famB")
    assert B.span == 2
    for y in range(1, -20, -1):
        want = 2 * 3 ** ((y - 3) / 2) if y % 2 else 0.0
        assert B.alpha(y) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_step_law_invariants(fid):
    W = solve_pq(fid)
    assert math.fsum(W.alphas) == pytest.approx(1.0, abs=1e-12)
    assert abs(math.fsum(W.alphas * W.ys)) < 1e-10
    assert W.variance > 0
    assert W.t == pytest.approx(exact_t(fid), abs=1e-14)
    F = get_family(fid)
    for y in range(1, -12, -1):
        if F.mult(y) and F.mult(y - 1):
            ratio = W.alpha(y) / W.alpha(y - 1)
            assert ratio == pytest.approx(W.q * F.mult(y) / F.mult(y - 1), rel=1e-12)


def test_step_moments():
    mean, var = step_moments(solve_pq("av123"))
    assert abs(mean) < 1e-12 and var == pytest.approx(2.0, abs=1e-12)
    assert abs(step_moments(solve_pq("famA"))[0]) < 1e-12
    W = solve_pq("av1423-4123")
    steps = sample_walk(W, 10**6 + 1, make_rng(3)).steps
    se = steps.var() * math.sqrt(2 / len(steps)) * 2   # rough SE of a variance, heavy-ish tail
    assert abs(steps.var() - step_moments(W)[1]) < 3 * se


def test_to_json_truncation():
    d = solve_pq("av1423-4123").to_json()
    assert d["truncation"]["dropped_mass"] < 1e-12
    assert d["colors"][0] == [1, 2]
    assert d["span"] == 1


def test_sample_walk_basics():
    W = solve_pq("av1423-4123")
    w = sample_walk(W, 1, make_rng(0))
    assert w.positions.tolist() == [W.beta - 1] and len(w.colors) == 0
    w = sample_walk(W, 10**6 + 1, make_rng(1))
    steps, cols = w.steps, w.colors
    # goodness of fit on y in {1, 0, ..., -8} plus a lumped tail
    cats = list(range(1, -9, -1))
    obs = [int((steps == y).sum()) for y in cats]
    obs.append(len(steps) - sum(obs))
    exp = [W.alpha(y) * len(steps) for y in cats]
    exp.append(len(steps) - sum(exp))
    assert chisquare(obs, exp).pvalue > 0.01
    up = cols[steps == 1]
    assert binomtest(int((up == 1).sum()), len(up), 0.5).pvalue > 0.01


def test_trivial_conditioned_walks():
    for fid in FAMILY_IDS:
        W = solve_pq(fid)
        rng = make_rng(2)
        for fn in (sample_conditioned_rejection, sample_conditioned_cycle):
            w = fn(W, 1, rng)
            assert w.positions.tolist() == [W.beta - 1]


def test_av123_n2_is_deterministic():
    W = solve_pq("av123")
    for fn in (conditioned_rejection_batch, conditioned_cycle_batch):
        pos, _ = fn(W, 2, 50, make_rng(4))
        assert (pos == [1, 2]).all()


def _path_keys(pos, col):
    return [tuple(p) + tuple(c) for p, c in zip(pos.tolist(), col.tolist())]


def test_av1423_n5_uniform_both_samplers():
    W = solve_pq("av1423-4123")
    classes = len(brute_enumerate("av1423-4123", 5).members)
    for name, fn in SAMPLERS.items():
        pos, col = fn(W, 5, 10**5, make_rng(5, len(name)))
        freq = collections.Counter(_path_keys(pos, col))
        assert len(freq) == classes
        assert chisquare(list(freq.values())).pvalue > 0.01, name


def test_samplers_agree_in_total_variation():
    # 42 paths; 10^6 draws each keeps the sampling noise in TV near 0.004
    W = solve_pq("av123")
    counts = []
    for name in ("cycle", "rejection"):
        pos, col = SAMPLERS[name](W, 6, 10**6, make_rng(6, len(name)))
        counts.append(collections.Counter(_path_keys(pos, col)))
    keys = set(counts[0]) | set(counts[1])
    tv = 0.5 * sum(abs(counts[0][k] - counts[1][k]) for k in keys) / 10**6
    assert len(keys) == 42
    assert tv < 0.01


def _admissible_rotations(steps, beta, T):
    L = steps.shape[1]
    ok = np.zeros(steps.shape[0], np.int64)
    for r in range(L):
        rot = np.roll(steps, -r, axis=1)
        pos = beta - 1 + np.cumsum(rot, axis=1)
        good = (pos[:, :-1].min(axis=1) >= beta) & (pos[:, -1] == T)
        ok += good
    return ok


def test_rotation_is_unique():
    W = solve_pq("av1423-4123")
    n = 20
    T = endpoint(W, n)
    pos, _ = conditioned_cycle_batch(W, n, 10**4, make_rng(7))
    full = np.concatenate([pos, np.full((len(pos), 1), T)], axis=1)
    steps = np.diff(full, axis=1)
    assert (_admissible_rotations(steps, W.beta, T) == 1).all()


def test_famb_parity():
    W = solve_pq("famB")
    with pytest.raises(FeasibilityError):
        endpoint(W, 4, "beta")
    assert endpoint(W, 4) == 2
    assert endpoint(W, 5, "beta") == 1
    rng = make_rng(8)
    for size in range(1, 12):
        P = uniform_permutations("famB", size, 40, rng)
        F = get_family("famB")
        assert all(F.member(tuple(r)) for r in P.tolist())


def test_fama_endpoint_is_zero():
    W = solve_pq("famA")
    assert [endpoint(W, n) for n in range(2, 7)] == [0] * 5


def test_fama_literal_endpoint_misses_classes():
    # conditioning on X_{n+1} = beta never produces members ending in 1
    P = uniform_permutations("famA", 6, 20000, make_rng(9), mode="beta")
    seen = {tuple(r) for r in P.tolist()}
    assert len(seen) < len(brute_enumerate("famA", 6).members)
    assert all(r[-1] != 1 for r in seen)


def test_uniform_permutation_small():
    assert uniform_permutation("av123", 1, make_rng(0)) == (1,)
    P = uniform_permutations("av123", 3, 10**5, make_rng(10))
    freq = collections.Counter(map(tuple, P.tolist()))
    assert len(freq) == 5
    sd = math.sqrt(0.2 * 0.8 / 10**5)
    assert all(abs(c / 10**5 - 0.2) < 3 * sd + 1e-12 for c in freq.values())


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_sampled_paths_round_trip(fid):
    F = get_family(fid)
    W = solve_pq(F)
    size = 9
    pos, col = conditioned_cycle_batch(W, size + F.n_offset, 200, make_rng(11))
    lab, lc = walks_to_body(F, pos, col)
    from gentree.kernels import decode_array
    perms = decode_array(F, lab, lc)
    for p, l, c in zip(perms.tolist(), lab.tolist(), lc.tolist()):
        assert F.member(tuple(p))
        enc = encode(F, tuple(p))[F.n_offset:]
        assert [x.value for x in enc] == l and [x.color for x in enc] == c


def test_same_seed_same_stream():
    a = uniform_permutations("av132", 30, 5, make_rng(42, 3))
    b = uniform_permutations("av132", 30, 5, make_rng(42, 3))
    c = uniform_permutations("av132", 30, 5, make_rng(42, 4))
    assert (a == b).all() and not (a == c).all()


def test_budget_is_enforced():
    W = solve_pq("av123")
    with pytest.raises(ResourceError):
        conditioned_rejection_batch(W, 400, 100, make_rng(0), budget=10**4)
    with pytest.raises(ResourceError):
        conditioned_cycle_batch(W, 400, 100, make_rng(0), budget=10)

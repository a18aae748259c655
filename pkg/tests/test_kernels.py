import numpy as np
import pytest
from hypothesis import given, strategies as st

from gentree import kernels
from gentree.errors import ConsistencyError
from gentree.families import FAMILY_IDS, get_family
from gentree.tree import decode_many, enumerate_level


def _rows(F, seqs):
    off = 1 if F.virtual_root else 0
    lab = np.array([[x.value for x in s[off:]] for s in seqs], np.int64)
    col = np.array([[x.color for x in s[off:]] for s in seqs], np.int64)
    return lab, col


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_fast_decode_matches_membership_decode(fid):
    F = get_family(fid)
    for n in (1, 2, 5, 7):
        seqs = enumerate_level(F, n)
        lab, col = _rows(F, seqs)
        fast = [tuple(r) for r in kernels.decode_array(F, lab, col).tolist()]
        assert fast == decode_many(F, seqs)


def test_decode_array_reports_bad_row():
    F = get_family("av1423-4123")
    lab = np.array([[2, 3, 4], [2, 3, 9]])
    col = np.array([[1, 1, 1], [1, 1, 1]])
    with pytest.raises(ConsistencyError):
        kernels.decode_array(F, lab, col)


@given(st.lists(st.permutations(range(1, 9)), min_size=1, max_size=20),
       st.permutations(range(1, 4)))
def test_consecutive_counts_agree(rows, pi):
    P = np.array(rows, np.int64)
    pi = np.array(pi, np.int64)
    a = kernels.count_consecutive_batch(P, pi)
    b = kernels.count_consecutive_np(P, pi)
    assert a.tolist() == b.tolist()


def test_pattern_longer_than_perm():
    P = np.array([[1, 2]], np.int64)
    assert kernels.count_consecutive_batch(P, np.array([1, 2, 3])).tolist() == [0]
    assert kernels.count_consecutive_np(P, [1, 2, 3]).tolist() == [0]

from itertools import permutations, product

from hypothesis import given, settings
from hypothesis import strategies as st

from goodpair.matrices import act, canonical_form, canonical_id, canonical_key, det_symbolic, encode
from goodpair.matrices.canonical import key_to_matrix, sign_pivots

from conftest import alphabet_matrices


def group(k, l):
    for sigma in permutations(range(k)):
        for pi in permutations(range(l)):
            for vs in product((1, -1), repeat=l):
                for ds in product((1, -1), repeat=k):
                    yield sigma, pi, vs, ds


def brute_key(M):
    best = None
    for g in group(M.size, M.l):
        labels, signs = encode(act(M, *g))
        key = labels + signs
        if best is None or key < best:
            best = key
    return best


@settings(max_examples=30, deadline=None)
@given(alphabet_matrices(l=2, size=3))
def test_matches_brute_force_orbit_minimum(M):
    assert canonical_key(M) == brute_key(M)


@settings(max_examples=15, deadline=None)
@given(alphabet_matrices(l=3, size=3))
def test_matches_brute_force_three_variables(M):
    assert canonical_key(M) == brute_key(M)


@settings(max_examples=40, deadline=None)
@given(alphabet_matrices(l=3, size=4), st.data())
def test_invariant_under_random_group_element(M, data):
    k, l = M.size, M.l
    sigma = data.draw(st.permutations(range(k)))
    pi = data.draw(st.permutations(range(l)))
    vs = data.draw(st.lists(st.sampled_from((1, -1)), min_size=l, max_size=l))
    ds = data.draw(st.lists(st.sampled_from((1, -1)), min_size=k, max_size=k))
    N = act(M, sigma, pi, vs, ds)
    assert canonical_key(N) == canonical_key(M)
    assert canonical_id(N) == canonical_id(M)


@settings(max_examples=40, deadline=None)
@given(alphabet_matrices(l=3, size=4))
def test_idempotent_and_in_orbit(M):
    C = canonical_form(M)
    assert canonical_form(C) == C
    assert encode(C)[0] + encode(C)[1] == canonical_key(M)
    # definiteness of the determinant is preserved: the det changes only by z -> +-z_pi
    D, DC = det_symbolic(M), det_symbolic(C)
    assert D.is_zero == DC.is_zero
    assert D.degree == DC.degree
    assert sorted(abs(c) for _, c in D.terms()) == sorted(abs(c) for _, c in DC.terms())


def test_m37_diagonal_conjugation(m37):
    D = [1, -1, 1, -1]
    N = act(m37, range(4), range(3), [1, 1, 1], D)
    assert N != m37
    assert canonical_id(N) == canonical_id(m37)


def test_m37_variable_permutation(m37):
    N = act(m37, [3, 2, 1, 0], [2, 0, 1], [1, -1, 1], [1, 1, 1, 1])
    assert canonical_form(N) == canonical_form(m37)


def test_distinct_orbits_get_distinct_ids(m24, m37):
    from goodpair.matrices import SymbolicMatrix

    other = SymbolicMatrix.from_rows(2, [["z1", "z2"], ["z2", "z1"]])
    assert canonical_id(other) != canonical_id(m24)
    assert len(canonical_id(m37)) == 16


def test_key_round_trip(m37):
    key = canonical_key(m37)
    assert canonical_key(key_to_matrix(4, 3, key)) == key


def test_sign_pivots_cover_orbits():
    # for a label pattern, sign vectors zero on the pivots are distinct orbit representatives
    k, l = 2, 2
    labels = (1, 2, 1)
    pivots, free = sign_pivots(k, l, labels)
    assert sorted(pivots + free) == [0, 1, 2]
    keys = set()
    for signs in product((0, 1), repeat=3):
        M = key_to_matrix(k, l, labels + signs)
        keys.add(canonical_key(M))
    # representatives with zero pivot bits reach every orbit
    reps = set()
    for bits in product((0, 1), repeat=len(free)):
        s = [0, 0, 0]
        for p, b in zip(free, bits):
            s[p] = b
        reps.add(canonical_key(key_to_matrix(k, l, labels + tuple(s))))
    assert reps == keys

import json
from itertools import product

import pytest

from goodpair.definiteness import DEFINITE_KINDS, Budget, decide
from goodpair.errors import ContractError
from goodpair.matrices import SymbolicMatrix, canonical_id, det_symbolic
from goodpair.matrices.canonical import decode
from goodpair.matrices.search import (
    CHECKPOINT_VERSION,
    RANDOMIZED,
    GoodPairCandidate,
    Truncation,
    search,
)
from goodpair.poly import LinearForm

FAST = Budget(20000, 14, 64)


def brute_force_ids(l, n):
    """Canonical ids of every raw alphabet matrix with a definite determinant."""
    k = n - l
    m = k * (k + 1) // 2
    entries = [LinearForm.zero(l)] + [LinearForm.unit(l, v, s) for v in range(l) for s in (1, -1)]
    ids = set()
    for upper in product(entries, repeat=m):
        M = SymbolicMatrix.from_upper(l, k, list(upper))
        if decide(det_symbolic(M), FAST).kind in DEFINITE_KINDS:
            ids.add(canonical_id(M))
    return ids


def refutes(P, witness, reference):
    w = P.evaluate(witness)
    if w == 0:
        return True
    return reference is not None and w * P.evaluate(reference) < 0


@pytest.mark.parametrize("l,n", [(2, 4), (1, 3), (1, 4)])
def test_exhaustive_matches_brute_force(l, n):
    run = search(l, n, FAST).run()
    assert run.summary.exhaustive and not run.summary.truncated
    assert {c.canonical_id for c in run.candidates} == brute_force_ids(l, n)


def test_two_four_finds_the_rotation_block(m24):
    run = search(2, 4, FAST).run()
    assert len(run.candidates) == 1
    c = run.candidates[0]
    assert c.canonical_id == canonical_id(m24)
    assert c.verdict.kind in DEFINITE_KINDS
    assert GoodPairCandidate.from_json(json.loads(json.dumps(c.to_json()))).det == c.det


@pytest.mark.parametrize("l,n", [(2, 5), (3, 5)])
def test_obstructed_pairs(l, n):
    with pytest.raises(ContractError):
        search(l, n, FAST)
    run = search(l, n, FAST, force=True, record_refutations=True).run()
    s = run.summary
    assert run.candidates == [] and s.exhaustive
    c = s.counts
    assert c["unknown"] == 0
    assert c["scanned"] == c["refuted_sample_filter"] + c["refuted_decide"] + len(
        [r for r in run.refutations if r["stage"] == "pattern"])
    assert len(run.refutations) == c["scanned"]
    k = n - l
    m = k * (k + 1) // 2
    for r in run.refutations:
        M = decode(k, l, r["key"][:m], r["key"][m:])
        P = det_symbolic(M)
        if r["stage"] == "decide" and r["witness"] is None:
            continue  # certificate-only refutation, checked by the certificate tests
        from fractions import Fraction

        w = [Fraction(x) for x in r["witness"]]
        ref = None if r["reference"] is None else [Fraction(x) for x in r["reference"]]
        assert refutes(P, w, ref), r


def test_two_six_counts_consistent():
    run = search(2, 6, FAST, max_candidates=3000).run()
    c = run.summary.counts
    assert c["accepted"] == len(run.candidates)
    for cand in run.candidates:
        assert decide(cand.det, FAST).kind == cand.verdict.kind
        assert cand.det.homogeneity_degree() == 4


def test_checkpoint_resume(tmp_path, monkeypatch):
    import goodpair.matrices.search as search_module

    monkeypatch.setattr(search_module, "UNIT_ROWS", 3**6)  # several units at (2, 6)
    ck = tmp_path / "run.json"
    full = search(2, 6, FAST).run()
    part = list(search(2, 6, FAST, checkpoint=ck, max_candidates=1))
    assert isinstance(part[-1], Truncation)
    data = json.loads(ck.read_text())
    assert 0 < len(data["done_units"]) < full.summary.units_total
    resumed = search(2, 6, FAST, checkpoint=ck).run()
    assert resumed.summary.exhaustive
    assert sorted(c.canonical_id for c in resumed.candidates) == sorted(c.canonical_id for c in full.candidates)
    assert resumed.summary.counts == full.summary.counts


def test_checkpoint_refusals(tmp_path):
    ck = tmp_path / "run.json"
    search(2, 4, FAST, checkpoint=ck).run()
    data = json.loads(ck.read_text())
    data["version"] = CHECKPOINT_VERSION + 1
    ck.write_text(json.dumps(data))
    with pytest.raises(ContractError, match="version"):
        search(2, 4, FAST, checkpoint=ck).run()
    data["version"] = CHECKPOINT_VERSION
    ck.write_text(json.dumps(data))
    with pytest.raises(ContractError, match="configuration"):
        search(2, 4, FAST, checkpoint=ck, seed=5).run()
    ck.write_text(json.dumps({"magic": "other"}))
    with pytest.raises(ContractError):
        search(2, 4, FAST, checkpoint=ck).run()


def test_randomized_is_reproducible_and_truncated():
    a = list(search(2, 6, FAST, mode=RANDOMIZED, max_candidates=200, seed=3))
    b = list(search(2, 6, FAST, mode=RANDOMIZED, max_candidates=200, seed=3))
    assert isinstance(a[-1], Truncation)
    assert [c.canonical_id for c in a[:-1]] == [c.canonical_id for c in b[:-1]]
    full = {c.canonical_id for c in search(2, 6, FAST).run().candidates}
    assert {c.canonical_id for c in a[:-1]} <= full


def test_general_alphabet_exhaustive():
    run = search(2, 4, FAST, alphabet="general", coef_bound=1).run()
    assert run.summary.exhaustive
    assert run.candidates
    for c in run.candidates:
        assert decide(c.det, FAST).kind in DEFINITE_KINDS
    with pytest.raises(ContractError):
        search(3, 7, FAST, alphabet="general", coef_bound=2).run()


def test_workers_agree():
    one = search(2, 6, FAST).run()
    two = search(2, 6, FAST, workers=2).run()
    assert [c.canonical_id for c in one.candidates] == [c.canonical_id for c in two.candidates]
    assert one.summary.counts == two.summary.counts


def test_unknown_options():
    with pytest.raises(ContractError):
        search(2, 4, FAST, mode="sideways")
    with pytest.raises(ContractError):
        search(2, 4, FAST, alphabet="greek")

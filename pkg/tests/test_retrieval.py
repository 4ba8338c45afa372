import numpy as np
import pytest

from mihash.encoder import pack
from mihash.errors import ShapeError
from mihash.retrieval import (HammingIndex, evaluate, hamming_distance,
                              map_at_k, pr_curve, query_topk,
                              utilization_histogram)

from conftest import ap_oracle, hamming_oracle, random_codes, rank_oracle


def _index_from_codes(codes, labels=None):
    ids = [str(i) for i in range(codes.shape[0])]
    return HammingIndex(pack(codes), ids, labels)


def _graded_db(k=8, n=6):
    """Row r differs from the all-ones query in exactly r leading bits."""
    codes = np.ones((n, k))
    for r in range(n):
        codes[r, :r] = -1.0
    return codes


def test_distance_identity_and_complement(rng):
    codes = random_codes(rng, 4, 24)
    p = pack(codes)
    assert hamming_distance(p.words[0], p.words[0]) == 0
    comp = pack(-codes)
    assert hamming_distance(p.words[1], comp.words[1]) == 24


def test_distance_matches_bit_loop_oracle(rng):
    for k in (8, 16, 64, 100):
        a = random_codes(rng, 100, k)
        b = random_codes(rng, 100, k)
        pa, pb = pack(a), pack(b)
        for r in range(100):
            expect = hamming_oracle(a[r], b[r])
            assert hamming_distance(pa.words[r], pb.words[r]) == expect


def test_distance_is_a_metric(rng):
    codes = random_codes(rng, 30, 20)
    p = pack(codes)
    for _ in range(200):
        i, j, l = rng.integers(0, 30, 3)
        dij = hamming_distance(p.words[i], p.words[j])
        dji = hamming_distance(p.words[j], p.words[i])
        assert dij == dji
        assert dij >= 0 and (dij > 0 or np.array_equal(codes[i], codes[j]))
        dil = hamming_distance(p.words[i], p.words[l])
        dlj = hamming_distance(p.words[l], p.words[j])
        assert dij <= dil + dlj


def test_distance_rejects_mismatched_rows(rng):
    a = pack(random_codes(rng, 1, 16)).words[0]
    b = pack(random_codes(rng, 1, 80)).words[0]
    with pytest.raises(ShapeError):
        hamming_distance(a, b)


def test_topk_exact_match_ranks_first(rng):
    codes = random_codes(rng, 40, 16)
    codes = np.unique(codes, axis=0)
    index = _index_from_codes(codes)
    q = pack(codes[[7]]).words[0]
    ids, dists, truncated = query_topk(index, q, 5)
    assert ids[0] == "7" and dists[0] == 0
    assert not truncated


def test_topk_full_k_is_permutation(rng):
    codes = random_codes(rng, 25, 12)
    index = _index_from_codes(codes)
    q = pack(random_codes(rng, 1, 12)).words[0]
    ids, dists, truncated = query_topk(index, q, 25)
    assert sorted(ids, key=int) == [str(i) for i in range(25)]
    assert not truncated


def test_topk_matches_full_sort_oracle(rng):
    for _ in range(20):
        codes = random_codes(rng, 50, 16)
        index = _index_from_codes(codes)
        qcode = random_codes(rng, 1, 16)
        q = pack(qcode).words[0]
        ids, dists, _ = query_topk(index, q, 10)
        order, odists = rank_oracle(codes, qcode[0])
        assert list(ids) == [str(i) for i in order[:10]]
        assert [int(d) for d in dists] == [odists[i] for i in order[:10]]


def test_topk_distances_monotone(rng):
    codes = random_codes(rng, 60, 24)
    index = _index_from_codes(codes)
    q = pack(random_codes(rng, 1, 24)).words[0]
    _, dists, _ = query_topk(index, q, 60)
    assert (np.diff(dists) >= 0).all()


def test_topk_truncates_and_flags(rng):
    codes = random_codes(rng, 10, 8)
    index = _index_from_codes(codes)
    q = pack(random_codes(rng, 1, 8)).words[0]
    ids, dists, truncated = query_topk(index, q, 50)
    assert truncated and len(ids) == 10


def test_topk_rejects_bad_k(rng):
    index = _index_from_codes(random_codes(rng, 5, 8))
    q = pack(random_codes(rng, 1, 8)).words[0]
    with pytest.raises(ShapeError):
        query_topk(index, q, 0)


def test_index_requires_unique_ids(rng):
    codes = random_codes(rng, 3, 8)
    with pytest.raises(ShapeError):
        HammingIndex(pack(codes), ["a", "a", "b"])


def test_map_single_relevant_at_rank_one():
    db = _graded_db()
    labels = [frozenset({"x"})] + [frozenset({"other"})] * 5
    index = _index_from_codes(db, labels)
    queries = pack(np.ones((1, 8)))
    assert map_at_k(index, queries, [frozenset({"x"})], 1) == 1.0


def test_map_hand_worked_value():
    # relevant items land at ranks 2 and 4 of 5; AP@5 = (1/2 + 2/4)/2
    db = _graded_db(n=5)
    labels = [frozenset({"b"}), frozenset({"a"}), frozenset({"b"}),
              frozenset({"a"}), frozenset({"b"})]
    index = _index_from_codes(db, labels)
    queries = pack(np.ones((1, 8)))
    got = map_at_k(index, queries, [frozenset({"a"})], 5)
    assert got == pytest.approx(0.5, abs=1e-12)


def test_map_matches_direct_definition_oracle(rng):
    for _ in range(25):
        n = int(rng.integers(10, 50))
        codes = random_codes(rng, n, 16)
        toks = ["a", "b", "c"]
        labels = [frozenset({toks[int(t)]})
                  for t in rng.integers(0, 3, n)]
        index = _index_from_codes(codes, labels)
        nq = int(rng.integers(1, 6))
        qcodes = random_codes(rng, nq, 16)
        qlabels = [frozenset({toks[int(t)]})
                   for t in rng.integers(0, 3, nq)]
        k = int(rng.integers(1, n + 5))

        aps = []
        for qi in range(nq):
            order, _ = rank_oracle(codes, qcodes[qi])
            rel = [bool(labels[i] & qlabels[qi]) for i in order]
            n_rel = sum(bool(l & qlabels[qi]) for l in labels)
            if n_rel:
                aps.append(ap_oracle(rel, n_rel, k))
        got = map_at_k(index, pack(qcodes), qlabels, k)
        assert got == pytest.approx(np.mean(aps), abs=1e-12)
        assert 0.0 <= got <= 1.0


def test_map_skips_queries_without_relevant_items(rng):
    codes = random_codes(rng, 8, 8)
    labels = [frozenset({"a"})] * 8
    index = _index_from_codes(codes, labels)
    q = pack(random_codes(rng, 2, 8))
    got = map_at_k(index, q, [frozenset({"zzz"}), frozenset({"a"})], 3)
    assert 0.0 <= got <= 1.0
    with pytest.raises(ShapeError):
        map_at_k(index, q, [frozenset({"z"}), frozenset({"z"})], 3)


def test_map_is_one_when_topk_all_relevant():
    db = _graded_db(n=6)
    labels = ([frozenset({"a"})] * 3) + ([frozenset({"b"})] * 3)
    index = _index_from_codes(db, labels)
    queries = pack(np.ones((1, 8)))
    assert map_at_k(index, queries, [frozenset({"a"})], 3) == 1.0


def test_pr_all_relevant_gives_unit_precision(rng):
    codes = random_codes(rng, 10, 8)
    labels = [frozenset({"a"})] * 10
    index = _index_from_codes(codes, labels)
    pts = pr_curve(index, pack(random_codes(rng, 3, 8)),
                   [frozenset({"a"})] * 3)
    assert all(p == pytest.approx(1.0) for _, p in pts)
    assert pts[-1][0] == pytest.approx(1.0)


def test_pr_single_relevant_at_last_rank():
    db = _graded_db(n=5)
    labels = [frozenset({"b"})] * 4 + [frozenset({"a"})]
    index = _index_from_codes(db, labels)
    pts = pr_curve(index, pack(np.ones((1, 8))), [frozenset({"a"})])
    assert pts[-1] == (pytest.approx(1.0), pytest.approx(1.0 / 5.0))
    assert all(p == 0.0 for _, p in pts[:-1])


def test_pr_matches_rank_by_rank_oracle(rng):
    codes = random_codes(rng, 20, 12)
    labels = [frozenset({"a"}) if t else frozenset({"b"})
              for t in rng.integers(0, 2, 20)]
    index = _index_from_codes(codes, labels)
    qcodes = random_codes(rng, 4, 12)
    qlabels = [frozenset({"a"})] * 4
    pts = pr_curve(index, pack(qcodes), qlabels)

    n_rel = sum(1 for l in labels if "a" in l)
    precisions = np.zeros(20)
    recalls = np.zeros(20)
    for qi in range(4):
        order, _ = rank_oracle(codes, qcodes[qi])
        hits = 0
        for rank, row in enumerate(order, start=1):
            hits += int("a" in labels[row])
            precisions[rank - 1] += hits / rank
            recalls[rank - 1] += hits / n_rel
    precisions /= 4
    recalls /= 4
    for rank, (r, p) in enumerate(pts):
        assert r == pytest.approx(recalls[rank], abs=1e-12)
        assert p == pytest.approx(precisions[rank], abs=1e-12)
    assert (np.diff([r for r, _ in pts]) >= -1e-15).all()


def test_utilization_single_code(rng):
    codes = np.tile(random_codes(rng, 1, 16), (9, 1))
    hist = utilization_histogram(codes)
    assert len(hist) == 1 and hist[0][1] == 9


def test_utilization_all_distinct():
    codes = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    hist = utilization_histogram(codes)
    assert [c for _, c in hist] == [1, 1, 1, 1]
    assert [k for k, _ in hist] == sorted(k for k, _ in hist)


def test_utilization_counts_match_dict_oracle(rng):
    codes = random_codes(rng, 500, 6)
    hist = utilization_histogram(codes)
    assert sum(c for _, c in hist) == 500
    counts = {}
    for row in codes:
        key = tuple(row)
        counts[key] = counts.get(key, 0) + 1
    assert sorted(c for _, c in hist) == sorted(counts.values())
    assert [c for _, c in hist] == sorted((c for _, c in hist),
                                          reverse=True)


def test_utilization_wide_codes_use_hex_keys(rng):
    codes = random_codes(rng, 20, 80)
    hist = utilization_histogram(codes)
    assert all(isinstance(k, str) for k, _ in hist)
    assert sum(c for _, c in hist) == 20


def test_evaluate_bundles_report(rng):
    codes = random_codes(rng, 30, 8)
    labels = [frozenset({"a"}) if t else frozenset({"b"})
              for t in rng.integers(0, 2, 30)]
    index = _index_from_codes(codes, labels)
    queries = pack(random_codes(rng, 5, 8))
    report = evaluate(index, queries, [frozenset({"a"})] * 5, k=10)
    assert 0.0 <= report.map_at_k <= 1.0
    assert report.k == 10
    assert len(report.pr_points) == 30
    assert sum(c for _, c in report.utilization) == 30

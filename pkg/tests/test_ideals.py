import itertools

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_trace_members, gauss_rank
from sgclab.ideals import (CapExceeded, Undecided, WordTrace, empty_ideal,
                           enumerate_ideals, from_trace, full_ideal, ideal_eq,
                           independence_rank_oracle, independence_test,
                           intersect, left_mul, ore_test, preimage)
from sgclab.models import EMPTY, WithoutExactIdeals


def traces_upto(model, depth, gen_len):
    cand = model.enumerate_p(gen_len)
    for n in range(depth + 1):
        for pairs in itertools.product(
                itertools.product(cand, cand), repeat=n):
            yield pairs


# ---------------------------------------------------------------------------
# the two primitives and trace evaluation

def test_preimage_of_full_is_full(all_models):
    for model in all_models:
        P = full_ideal(model, 10 if model.family != "free_monoid" else 5)
        for p in model.enumerate_p(2):
            assert ideal_eq(preimage(p, P), P) is True


def test_left_mul_examples(n1, f2, num23):
    P = full_ideal(n1, 12)
    assert left_mul((2,), P).exact == ("corner", (2,))
    Pf = full_ideal(f2, 6)
    assert left_mul("a", left_mul("b", Pf)).exact == ("word", "ab")
    Pn = full_ideal(num23, 20)
    two_shift = left_mul(2, left_mul(3, Pn))
    assert sorted(two_shift.members)[:4] == [5, 7, 8, 9]


def test_preimage_examples(n1, f2):
    P = full_ideal(n1, 12)
    assert preimage((2,), left_mul((3,), P)).exact == ("corner", (1,))
    Pf = full_ideal(f2, 6)
    assert preimage("a", left_mul("b", Pf)).is_empty() is True


def test_from_trace_examples(n1, f2):
    x = from_trace(n1, WordTrace((((2,), (3,)),)), 12)
    assert x.exact == ("corner", (1,))
    q = from_trace(n1, WordTrace((((0,), (2,)),)), 12)
    assert q.exact == ("corner", (2,))
    z = from_trace(f2, WordTrace((("a", "b"),)), 6)
    assert z.is_empty() is True


def test_trace_grading(n2, f2):
    t = WordTrace((((1, 0), (0, 1)), ((0, 0), (2, 0))))
    assert t.grading(n2) == (1, 1)
    s = WordTrace((("a", "b"),))
    assert s.grading(f2) == "Ab"
    assert s.star().grading(f2) == "Ba"


def test_from_trace_matches_bruteforce_oracle(all_models):
    for model in all_models:
        radius = 8 if model.family == "free_monoid" else 12
        gen_len = 3 if model.family == "numerical" else 1
        for pairs in traces_upto(model, 2, gen_len):
            got = from_trace(model, WordTrace(pairs), radius)
            want = brute_trace_members(model, pairs, radius)
            assert got.members == want, pairs


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                min_size=0, max_size=4))
@settings(max_examples=40, deadline=None)
def test_random_deep_traces_match_oracle_num23(pairs):
    from sgclab.models import build_model
    model = build_model({"family": "numerical", "generators": [2, 3]})
    pairs = tuple((p, q) for p, q in pairs if model.in_p(p) and model.in_p(q))
    got = from_trace(model, WordTrace(pairs), 12)
    assert got.members == brute_trace_members(model, pairs, 12)


@given(st.lists(st.tuples(st.sampled_from(["", "a", "b"]),
                          st.sampled_from(["", "a", "b"])),
                min_size=0, max_size=4))
@settings(max_examples=40, deadline=None)
def test_random_deep_traces_match_oracle_f2(pairs):
    from sgclab.models import build_model
    model = build_model({"family": "free_monoid", "rank": 2})
    pairs = tuple(pairs)
    got = from_trace(model, WordTrace(pairs), 5)
    assert got.members == brute_trace_members(model, pairs, 5)


def test_hookless_path_matches_exact_path(num23, f2):
    for model, radius in ((num23, 15), (f2, 5)):
        bare = WithoutExactIdeals(model)
        gen_len = 3 if model.family == "numerical" else 1
        for pairs in traces_upto(model, 2, gen_len):
            exact = from_trace(model, WordTrace(pairs), radius)
            trunc = from_trace(bare, WordTrace(pairs), radius)
            assert exact.members == trunc.members


# ---------------------------------------------------------------------------
# intersection

def test_intersect_examples(n1, f2, num23):
    P = full_ideal(n1, 12)
    two, three = left_mul((2,), P), left_mul((3,), P)
    assert intersect(two, three).exact == ("corner", (3,))
    Pf = full_ideal(f2, 6)
    assert intersect(left_mul("a", Pf), left_mul("b", Pf)).is_empty() is True
    Pn = full_ideal(num23, 20)
    both = intersect(left_mul(2, Pn), left_mul(3, Pn))
    assert both.exact == ("num", (), 5)
    assert sorted(both.members)[:4] == [5, 6, 7, 8]


def test_intersect_matches_pointwise_oracle(all_models, lattice_of):
    for model in all_models:
        lat = lattice_of(model, depth=2)
        radius = lat.radius
        for x in lat.ideals:
            for y in lat.ideals:
                z = intersect(x, y)
                assert z.members == x.members & y.members


def test_intersect_trace_is_constructible(n1):
    # the combined trace re-evaluates to the same ideal through the primitives
    P = full_ideal(n1, 12)
    x = left_mul((2,), P)
    y = preimage((3,), left_mul((5,), P))
    z = intersect(x, y)
    again = from_trace(n1, z.trace, 12)
    assert ideal_eq(z, again) is True
    assert z.members == x.members & y.members


def test_semilattice_laws_on_fragment(all_models, lattice_of):
    for model in all_models:
        lat = lattice_of(model, depth=2)
        ideals = lat.ideals
        for x in ideals:
            assert ideal_eq(intersect(x, x), x) is True
        for x in ideals:
            for y in ideals:
                a, b = intersect(x, y), intersect(y, x)
                assert ideal_eq(a, b) is True
        for x, y, z in itertools.islice(itertools.product(ideals, repeat=3), 200):
            lhs = intersect(intersect(x, y), z)
            rhs = intersect(x, intersect(y, z))
            assert ideal_eq(lhs, rhs) is True


def test_left_mul_preimage_identity(all_models):
    # p * (p^-1 x) = pP n x
    for model in all_models:
        radius = 6 if model.family == "free_monoid" else 15
        P = full_ideal(model, radius)
        gen_len = 3 if model.family == "numerical" else 1
        for p in model.enumerate_p(gen_len):
            for q in model.enumerate_p(gen_len):
                x = left_mul(q, P)
                lhs = left_mul(p, preimage(p, x))
                rhs = intersect(left_mul(p, P), x)
                assert ideal_eq(lhs, rhs) is True


# ---------------------------------------------------------------------------
# equality verdicts

def test_ideal_eq_examples(n1, f2):
    P = full_ideal(n1, 12)
    assert ideal_eq(preimage((2,), left_mul((2,), P)), P) is True
    Pf = full_ideal(f2, 6)
    assert ideal_eq(left_mul("a", Pf), left_mul("b", Pf)) is False


def test_ideal_eq_undecided_contract(num23):
    bare = WithoutExactIdeals(num23)
    P = full_ideal(bare, 30)
    x = from_trace(bare, WordTrace(((2, 2),)), 30)
    assert x.members == P.members
    verdict = ideal_eq(x, P)
    assert verdict == Undecided(30)
    assert not isinstance(ideal_eq(full_ideal(num23, 30),
                                   from_trace(num23, WordTrace(((2, 2),)), 30)),
                          Undecided)


def test_empty_certificate_without_hook(f2):
    bare = WithoutExactIdeals(f2)
    z = from_trace(bare, WordTrace((("a", "b"),)), 6)
    assert z.is_empty() is True      # radius beats the witness bound
    shallow = from_trace(bare, WordTrace((("a", "b"),)), 0)
    assert shallow.is_empty() is None


def test_empty_ideal_is_canonical(all_models):
    for model in all_models:
        e1 = empty_ideal(model, 10)
        e2 = intersect(left_mul(model.generators[0], full_ideal(model, 10)), e1)
        assert e2.trace is None and e2.is_empty() is True
        assert e1.dedup_key() == e2.dedup_key()


# ---------------------------------------------------------------------------
# enumeration

def test_enumerate_n1_chain(n1, lattice_of):
    lat = lattice_of(n1)
    assert [x.exact for x in lat.ideals] == [
        ("corner", (0,)), EMPTY, ("corner", (1,)), ("corner", (2,)),
        ("corner", (3,))]
    assert lat.depths == (0, 0, 1, 2, 3)


def test_enumerate_f2_depth2(f2):
    lat = enumerate_ideals(f2, 2, 1, 6)
    words = {x.exact for x in lat.ideals}
    assert words == {EMPTY, ("word", ""), ("word", "a"), ("word", "b"),
                     ("word", "aa"), ("word", "ab"), ("word", "ba"),
                     ("word", "bb")}


def test_enumerate_matches_exhaustive_trace_oracle(n1, f2, num23):
    # every ideal reachable by a raw trace of the same caps appears
    for model, depth, gen_len, radius in ((n1, 2, 1, 12), (f2, 2, 1, 6),
                                          (num23, 2, 3, 20)):
        lat = enumerate_ideals(model, depth, gen_len, radius, close=False)
        keys = {x.dedup_key() for x in lat.ideals}
        for pairs in traces_upto(model, depth, gen_len):
            ideal = from_trace(model, WordTrace(pairs), radius)
            if ideal.is_empty() is True:
                ideal = empty_ideal(model, radius)
            assert ideal.dedup_key() in keys


def test_enumeration_cap(n1):
    with pytest.raises(CapExceeded):
        enumerate_ideals(n1, 3, 1, 30, cap=3)


def test_hasse_is_reduced_and_sound(num23, lattice_of):
    lat = lattice_of(num23, depth=2)
    for i, j in lat.hasse:
        assert lat.subset[i][j] and not lat.subset[j][i]
        for k in range(len(lat.ideals)):
            if k in (i, j):
                continue
            assert not (lat.subset[i][k] and lat.subset[k][j]
                        and not lat.subset[k][i] and not lat.subset[j][k])


def test_lattice_export_shape(n2, lattice_of):
    doc = lattice_of(n2, depth=2).to_json()
    assert doc["tier"] == "exact"
    assert doc["nodes"][0]["trace"] == []
    assert {"id", "depth", "radius", "members_prefix", "exact", "empty",
            "trace"} <= set(doc["nodes"][0])
    assert all(len(e) == 2 for e in doc["containment_hasse"])


# ---------------------------------------------------------------------------
# independence and rank

def test_independence_independent_models(n1, n2, f2, lattice_of):
    for model in (n1, n2, f2):
        lat = lattice_of(model)
        assert independence_test(lat).status == "independent"


def test_independence_witness_num23(num23, lattice_of):
    lat = lattice_of(num23)
    res = independence_test(lat)
    assert res.status == "witness"
    x = lat.ideals[res.witness]
    parts = [lat.ideals[j] for j in res.parts]
    union = set().union(*(p.members for p in parts))
    assert union == set(x.members)
    for p in parts:
        assert p.members < x.members


def test_rank_oracle_examples(n1):
    lat = enumerate_ideals(n1, 2, 1, 5)
    res = independence_rank_oracle(lat)
    assert res.status == "full_rank" and res.rank == 3


def test_rank_oracle_agrees_with_gauss(all_models, lattice_of):
    for model in all_models:
        lat = lattice_of(model, depth=2)
        res = independence_rank_oracle(lat)
        idxs = lat.nonempty_indices()
        columns = sorted(set().union(*(lat.ideals[i].members for i in idxs)),
                         key=model.sort_key)
        matrix = [[1 if c in lat.ideals[i].members else 0 for c in columns]
                  for i in idxs]
        assert res.rank == gauss_rank(matrix)


def test_rank_radius_too_small_is_inconclusive(n1):
    lat = enumerate_ideals(n1, 3, 1, 30)
    res = independence_rank_oracle(lat, radius=1)
    assert res.status == "inconclusive"


def test_independence_and_rank_agree(all_models, lattice_of):
    for model in all_models:
        lat = lattice_of(model, depth=2)
        comb = independence_test(lat)
        rank = independence_rank_oracle(lat)
        assert comb.status != "inconclusive" and rank.status != "inconclusive"
        assert (comb.status == "independent") == (rank.status == "full_rank")


# ---------------------------------------------------------------------------
# Ore property

def test_ore_examples(n2, f2, num23):
    assert ore_test(n2, 2).status == "ore_up_to"
    res = ore_test(f2, 2)
    assert res.status == "counterexample" and res.pair == ("a", "b")
    assert ore_test(num23, 5).status == "ore_up_to"


def test_ore_monotone_for_abelian(n2, num23):
    for model in (n2, num23):
        lo = ore_test(model, 2)
        hi = ore_test(model, 4)
        assert lo.status == "ore_up_to" and hi.status == "ore_up_to"


def test_ore_without_hook(f2, num23):
    bare = WithoutExactIdeals(num23)
    assert ore_test(bare, 4).status == "ore_up_to"
    res = ore_test(WithoutExactIdeals(f2), 1)
    assert res.status == "inconclusive" and res.pair == ("a", "b")

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import frame_flag, frame_pointwise_applies, gauss_rank
from sgclab.exactla import (bareiss_rank, operator_norm_enclosure,
                            sqrt_enclosure, sym_top_eig_enclosure)
from sgclab.fock import (BandExhausted, GradingMismatch, CovarianceFrame, TruncOp,
                         add_op, build_frame, check_projection_identity,
                         compressed_matrix, cond_expectation, default_f_chain,
                         diagonal_part, equal_on_band, frame_isometry,
                         generator_covariance_terms, graded_sum, identity_op,
                         mul_op, projection_op, rep_vword, scale_op, sc_norm,
                         sc_limit_probe, transpose_op, word_reach, zero_op)
from sgclab.ideals import WordTrace, from_trace, full_ideal, left_mul
from sgclab.invsgp import compose, enumerate_vwords, idempotent_vword, make_vword, star

TOL = Fraction(1, 10 ** 9)


# ---------------------------------------------------------------------------
# exact linear algebra

@given(st.lists(st.lists(st.integers(0, 1), min_size=4, max_size=4),
                min_size=1, max_size=6))
@settings(max_examples=50, deadline=None)
def test_bareiss_matches_gauss(rows):
    assert bareiss_rank(rows) == gauss_rank(rows)


def test_sym_top_eig_known():
    lo, hi = sym_top_eig_enclosure([[Fraction(2), Fraction(0)],
                                    [Fraction(0), Fraction(5)]], TOL)
    assert lo <= 5 <= hi and hi - lo <= TOL
    # [[2,1],[1,2]] has top eigenvalue 3
    lo, hi = sym_top_eig_enclosure([[Fraction(2), Fraction(1)],
                                    [Fraction(1), Fraction(2)]], TOL)
    assert lo <= 3 <= hi and hi - lo <= TOL


def test_sqrt_enclosure():
    lo, hi = sqrt_enclosure(Fraction(2), TOL)
    assert hi - lo <= TOL and lo * lo <= 2 <= hi * hi


def test_operator_norm_nilpotent_and_shear():
    lo, hi = operator_norm_enclosure([[0, 1], [0, 0]], TOL)
    assert lo <= 1 <= hi and hi - lo <= TOL
    # largest singular value of [[1,1],[0,1]] is the golden ratio
    lo, hi = operator_norm_enclosure([[1, 1], [0, 1]], TOL)
    golden = (1 + 5 ** 0.5) / 2
    assert abs(float((lo + hi) / 2) - golden) < 1e-8
    assert hi - lo <= TOL


def test_operator_norm_against_float_power_iteration():
    matrix = [[Fraction(1, 3), Fraction(-2, 5), Fraction(1)],
              [Fraction(0), Fraction(3, 7), Fraction(-1, 2)],
              [Fraction(2), Fraction(1, 9), Fraction(0)]]
    lo, hi = operator_norm_enclosure(matrix, TOL)
    a = [[float(v) for v in row] for row in matrix]
    gram = [[sum(a[k][i] * a[k][j] for k in range(3)) for j in range(3)]
            for i in range(3)]
    vec = [1.0, 1.0, 1.0]
    for _ in range(300):
        nxt = [sum(gram[i][j] * vec[j] for j in range(3)) for i in range(3)]
        norm = max(abs(v) for v in nxt)
        vec = [v / norm for v in nxt]
    est = norm ** 0.5
    assert abs(est - float((lo + hi) / 2)) < 1e-6


# ---------------------------------------------------------------------------
# word matrices

def test_rep_identity(all_models):
    for model in all_models:
        n = 5
        v = make_vword(model, WordTrace(()), 10)
        op = rep_vword(v, n)
        assert equal_on_band(op, identity_op(model, n), n)


def test_rep_shift_matrix(n1):
    v = make_vword(n1, WordTrace((((0,), (1,)),)), 30)
    op = rep_vword(v, 4)
    assert op.triplets() == [(1, 0, Fraction(1)), (2, 1, Fraction(1)),
                             (3, 2, Fraction(1)), (4, 3, Fraction(1))]
    assert op.band == 3 and op.reach == 1


def test_rep_vstarv_is_domain_mask(n1):
    v = make_vword(n1, WordTrace((((2,), (3,)),)), 30)
    vv = compose(star(v), v)
    op = rep_vword(vv, 8)
    want = projection_op(vv.dom, 8)
    assert equal_on_band(op, want)
    ideal = from_trace(n1, WordTrace((((3,), (2,)),)), 30)
    assert equal_on_band(op, projection_op(ideal, 8))


def test_rep_multiplicative_on_band(all_models, family_of):
    for model in all_models:
        n = 7 if model.family == "free_monoid" else 10
        fam = family_of(model)
        words = fam.members[:10]
        for v, w in itertools.product(words, repeat=2):
            lhs = mul_op(rep_vword(v, n), rep_vword(w, n))
            rhs = rep_vword(compose(v, w), n)
            if lhs.band >= 0:
                assert equal_on_band(lhs, rhs)


def test_rep_star_is_transpose(all_models, family_of):
    for model in all_models:
        n = 6 if model.family == "free_monoid" else 10
        for v in family_of(model).members[:12]:
            a = rep_vword(v, n)
            b = rep_vword(star(v), n)
            band = min(n - 2 * word_reach(v), a.band, b.band)
            if band < 0:
                continue
            t = transpose_op(a)
            for j, s in enumerate(a.basis):
                if model.length(s) > band:
                    continue
                assert t.cols[j] == b.cols[j]


def test_idempotent_rep_is_diagonal_mask(all_models, family_of):
    for model in all_models:
        n = 6 if model.family == "free_monoid" else 10
        for v in family_of(model).members:
            if v.grading != model.unit:
                continue
            op = rep_vword(v, n)
            assert op.is_diagonal()
            assert equal_on_band(op, projection_op(v.dom, n))


def test_band_algebra():
    # band shrinks by the inner reach; sums keep the tighter band
    from sgclab.models import build_model
    m = build_model({"family": "free_abelian", "rank": 1})
    v = make_vword(m, WordTrace((((0,), (2,)),)), 30)
    a = rep_vword(v, 10)
    assert a.band == 8 and a.reach == 2
    prod = mul_op(a, a)
    assert prod.band == 6 and prod.reach == 4
    s = add_op(a, prod)
    assert s.band == 6 and s.reach == 4
    with pytest.raises(BandExhausted):
        rep_vword(make_vword(m, WordTrace((((0,), (9,)),)), 30), 8)


def test_projection_identity_examples(n1, f2):
    P = full_ideal(n1, 30)
    assert check_projection_identity(P, P, 10)
    assert check_projection_identity(left_mul((2,), P), left_mul((3,), P), 10)
    Pf = full_ideal(f2, 6)
    aP, bP = left_mul("a", Pf), left_mul("b", Pf)
    assert check_projection_identity(aP, bP, 6)
    prod = mul_op(projection_op(aP, 6), projection_op(bP, 6))
    assert all(not col for col in prod.cols)


def test_cond_expectation_examples(n1):
    P = full_ideal(n1, 30)
    i1 = left_mul((1,), P)
    v1 = make_vword(n1, WordTrace((((0,), (1,)),)), 30)
    ce = cond_expectation([(Fraction(1), v1)], 8)
    assert all(not col for col in ce.cols)
    e1 = idempotent_vword(i1)
    ce2 = cond_expectation([(Fraction(1), e1)], 8)
    assert equal_on_band(ce2, projection_op(i1, 8))
    v12 = make_vword(n1, WordTrace((((1,), (2,)),)), 30)
    ce3 = cond_expectation([(Fraction(1), v12)], 8)
    assert all(not col for col in ce3.cols)


def test_cond_expectation_mixed_combination(n1):
    P = full_ideal(n1, 30)
    v1 = make_vword(n1, WordTrace((((0,), (1,)),)), 30)
    terms = [(Fraction(3, 2), idempotent_vword(P)),
             (Fraction(-2), v1),
             (Fraction(1, 3), idempotent_vword(left_mul((2,), P)))]
    ce = cond_expectation(terms, 8)
    diag = ce.diagonal()
    assert diag[0] == Fraction(3, 2)
    assert diag[3] == Fraction(3, 2) + Fraction(1, 3)
    full = graded_sum(terms, 8)
    assert equal_on_band(diagonal_part(full), ce)


def test_nonzero_grading_is_strictly_off_diagonal(all_models, family_of):
    for model in all_models:
        n = 6 if model.family == "free_monoid" else 10
        for v in family_of(model).members[:15]:
            if v.grading == model.unit:
                continue
            op = rep_vword(v, n)
            assert all(j not in col for j, col in enumerate(op.cols))


# ---------------------------------------------------------------------------
# frames

def test_frame_unit_set_keeps_everything(all_models):
    for model in all_models:
        n = 5
        frame = build_frame(model, [model.unit], n)
        assert frame.slice_indices() == tuple(range(len(frame.basis)))


def test_frame_chain_flags(n1):
    frame = build_frame(n1, [(0,), (1,)], 10)
    flags = [frame.basis[j] for j in frame.slice_indices()]
    assert flags == [(r,) for r in range(1, 11)]


def test_frame_f2_single_letter(f2):
    frame = build_frame(f2, ["a"], 4)
    assert frame.admissible("b")       # disjoint translate: no constraint
    assert not frame.admissible("")    # unit escapes a*P while meeting it
    assert frame.admissible("aa")


def test_frame_flags_match_oracle(all_models):
    for model in all_models:
        n = 4 if model.family == "free_monoid" else 8
        gens = list(model.generators)
        f_set = [model.unit, gens[0], model.inv(gens[-1])]
        frame = build_frame(model, f_set, n)
        for j, r in enumerate(frame.basis):
            assert frame.base_flags[j] == frame_flag(model, frame.f_set, r)


def test_frame_translation_invariance(all_models):
    # flag_F(r) equals flag_{pF}(p r); and for r in s P the flag descends
    for model in all_models:
        n = 5 if model.family == "free_monoid" else 8
        gens = list(model.generators)
        frame = build_frame(model, [model.unit, gens[0]], n)
        for p in gens:
            shifted = frame.flags_for(p)
            for j, r in enumerate(frame.basis):
                pr = model.mul(p, r)
                i = frame.index.get(pr)
                if i is not None:
                    assert frame.base_flags[j] == shifted[i]
        for s in gens:
            for j, r in enumerate(frame.basis):
                div = model.divide(s, r) if model.in_p(r) else None
                if div is None:
                    continue
                down = [model.mul(model.inv(s), g) for g in frame.f_set]
                assert frame.base_flags[j] == frame_flag(model, down, div)


def test_frame_isometry(f2, n2):
    for model, p in ((f2, "a"), (n2, (1, 0))):
        n = 5
        frame = build_frame(model, [model.unit, model.generators[0]], n)
        matrix, rows, cols = frame_isometry(frame, p)
        for cpos in range(len(cols)):
            column = [matrix[r][cpos] for r in range(len(rows))]
            assert sum(v * v for v in column) == 1
        seen = set()
        for cpos in range(len(cols)):
            hit = tuple(v for v in (matrix[r][cpos] for r in range(len(rows))))
            assert hit not in seen
            seen.add(hit)


def test_compressed_matrix_matches_frame_oracle(f2):
    n = 6
    frame = build_frame(f2, ["a", "b"], n)
    P = full_ideal(f2, n)
    aP, bP = left_mul("a", P), left_mul("b", P)
    terms = [(Fraction(1), idempotent_vword(P)),
             (Fraction(-1), idempotent_vword(aP)),
             (Fraction(-1), idempotent_vword(bP))]
    matrix, labels = compressed_matrix(terms, frame)
    for k, j in enumerate(labels):
        r = frame.basis[j]
        want = Fraction(0)
        for c, v in terms:
            if frame_pointwise_applies(f2, frame.f_set, v.trace.pairs, r) == r:
                want += c
        assert matrix[k][k] == want


def test_sc_norm_identity(all_models):
    for model in all_models:
        n = 5
        frame = build_frame(model, [model.unit], n)
        P = full_ideal(model, model.default_radius)
        lo, hi = sc_norm([(Fraction(1), idempotent_vword(P))], frame)
        assert lo == hi == 1


def test_sc_norm_free_monoid_covariance(f2):
    P = full_ideal(f2, 7)
    aP, bP = left_mul("a", P), left_mul("b", P)
    terms = [(Fraction(1), idempotent_vword(P)),
             (Fraction(-1), idempotent_vword(aP)),
             (Fraction(-1), idempotent_vword(bP))]
    frame = build_frame(f2, ["a", "b"], 7)
    lo, hi = sc_norm(terms, frame)
    assert lo == hi == 0
    bigger = build_frame(f2, ["a", "b", "aa", "ab"], 7)
    lo, hi = sc_norm(terms, bigger)
    assert lo == hi == 0


def test_sc_norm_band_exhausted(f2):
    P = full_ideal(f2, 7)
    deep = left_mul("a", left_mul("a", left_mul("a", left_mul("a", P))))
    word = idempotent_vword(deep)   # reach 4 > trunc 3
    frame = build_frame(f2, ["a"], 3)
    with pytest.raises(BandExhausted):
        sc_norm([(Fraction(1), word)], frame)


def test_sc_limit_probe_chain(n1):
    P = full_ideal(n1, 30)
    terms = [(Fraction(1), idempotent_vword(P)),
             (Fraction(-1), idempotent_vword(left_mul((1,), P)))]
    chain = [[(j,) for j in range(k + 1)] for k in range(7)]
    probe = sc_limit_probe(terms, chain, n1, 30)
    assert [hi for _, hi in probe.enclosures] == [1, 0, 0, 0, 0, 0, 0]
    assert probe.non_increasing
    assert probe.verdict == "vanishing-evidence"


def test_sc_limit_probe_zero(n1):
    P = full_ideal(n1, 30)
    zero_terms = [(Fraction(0), idempotent_vword(P))]
    chain = [[(0,)], [(0,), (1,)]]
    probe = sc_limit_probe(zero_terms, chain, n1, 20)
    assert all(lo == hi == 0 for lo, hi in probe.enclosures)
    assert probe.verdict == "vanishing-evidence"


def test_sc_limit_probe_nonvanishing(f2, family_of):
    P = full_ideal(f2, 7)
    aP = left_mul("a", P)
    fam = family_of(f2)
    chain = default_f_chain(f2, fam.by_grading.keys(), 3)
    probe = sc_limit_probe([(Fraction(1), idempotent_vword(aP))], chain, f2, 7)
    assert all(lo >= 1 for lo, _ in probe.enclosures)
    assert probe.verdict == "non-vanishing-evidence"


def test_generator_covariance_terms(n2, f2):
    terms = generator_covariance_terms(f2, 7)
    assert len(terms) == 4
    frame = build_frame(f2, ["a", "b"], 7)
    lo, hi = sc_norm(terms, frame)
    assert lo == hi == 0
    # in the rank-2 lattice the product form is needed: the plain defect
    # of the two generator masks does not vanish
    P2 = full_ideal(n2, 12)
    plain = [(Fraction(1), idempotent_vword(P2)),
             (Fraction(-1), idempotent_vword(left_mul((1, 0), P2))),
             (Fraction(-1), idempotent_vword(left_mul((0, 1), P2)))]
    frame2 = build_frame(n2, [(0, 0), (1, 0), (0, 1), (1, 1)], 8)
    lo, hi = sc_norm(plain, frame2)
    assert lo == hi == 1
    lo, hi = sc_norm(generator_covariance_terms(n2, 12), frame2)
    assert lo == hi == 0


def test_triplet_dump_format(n1):
    v = make_vword(n1, WordTrace((((0,), (1,)),)), 30)
    text = rep_vword(v, 3).to_triplet_text()
    lines = text.strip().split("\n")
    assert lines[0] == "# truncop 4 4 2 1"
    assert lines[1:] == ["1 0 1/1", "2 1 1/1", "3 2 1/1"]

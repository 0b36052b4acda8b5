"""Truncated matrix realization of the left shift calculus.

Operators act on the span of the submonoid elements of length <= n.  A
word's matrix is the compression of the true operator, so single-word
entries are exact everywhere; what truncation can corrupt is composition.
Every operator therefore carries a guard band: ``band`` is the largest
length b such that applying the operator to a basis vector of length <= b
agrees with the true (untruncated) action, and ``reach`` bounds how far the
operator can push support lengths upward.  Multiplying operators shrinks
the band by the inner factor's reach; identities are asserted only inside
the surviving band, so truncation artifacts never masquerade as algebraic
facts.

All matrix entries are exact rationals.  A word combination whose gradings
are all trivial acts diagonally (a nonzero grading moves every basis
point, because the ambient group cancels), so the frame-compressed norms
computed here are exact; the certified bisection enclosure from
``exactla`` backstops any non-diagonal input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import invsgp
from .exactla import operator_norm_enclosure
from .ideals import from_trace
from .models import ModelError


class BandExhausted(RuntimeError):
    """No basis columns remain inside the trusted guard band."""


class GradingMismatch(RuntimeError):
    """The two diagonal-expectation computations disagreed on the band."""


@dataclass(frozen=True, eq=False)
class TruncOp:
    """Sparse rational matrix on the length-truncated basis.

    ``cols[j]`` maps row index -> value for basis column j.  ``band`` and
    ``reach`` implement the guard-band discipline described in the module
    docstring.
    """

    model: object
    n: int
    basis: tuple
    index: object            # dict elem -> position
    cols: tuple              # tuple of dicts
    band: int
    reach: int

    def entry(self, i, j) -> Fraction:
        return self.cols[j].get(i, Fraction(0))

    def column(self, j):
        return self.cols[j]

    def is_diagonal(self) -> bool:
        return all(all(i == j for i in col) for j, col in enumerate(self.cols))

    def diagonal(self):
        return [self.cols[j].get(j, Fraction(0)) for j in range(len(self.basis))]

    def triplets(self):
        out = []
        for j, col in enumerate(self.cols):
            for i, v in col.items():
                if v != 0:
                    out.append((i, j, v))
        return sorted(out)

    def to_triplet_text(self) -> str:
        """Documented dump format: a header line
        ``# truncop rows cols band reach`` followed by one ``row col value``
        line per nonzero entry, values as exact rationals."""
        lines = [f"# truncop {len(self.basis)} {len(self.basis)} {self.band} {self.reach}"]
        for i, j, v in self.triplets():
            lines.append(f"{i} {j} {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"


def _basis(model, n):
    basis = model.enumerate_p(n)
    return basis, {s: k for k, s in enumerate(basis)}


def zero_op(model, n) -> TruncOp:
    basis, index = _basis(model, n)
    return TruncOp(model, n, basis, index, tuple({} for _ in basis), n, 0)


def identity_op(model, n) -> TruncOp:
    basis, index = _basis(model, n)
    cols = tuple({j: Fraction(1)} for j in range(len(basis)))
    return TruncOp(model, n, basis, index, cols, n, 0)


def projection_op(ideal, n) -> TruncOp:
    """Diagonal 0/1 mask of an ideal's members on the basis."""
    model = ideal.model
    basis, index = _basis(model, n)
    cols = []
    for j, s in enumerate(basis):
        cols.append({j: Fraction(1)} if ideal.contains(s) else {})
    return TruncOp(model, n, basis, index, tuple(cols), n, 0)


def word_reach(v) -> int:
    if v.is_zero:
        return 0
    return sum(v.model.length(q) for _, q in v.trace.pairs)


def rep_vword(v, n) -> TruncOp:
    """Compression of a word's partial shift to the truncated basis."""
    model = v.model
    basis, index = _basis(model, n)
    cols = [dict() for _ in basis]
    if not v.is_zero:
        for j, s in enumerate(basis):
            t = v.apply(s)
            if t is not None:
                i = index.get(t)
                if i is not None:
                    cols[j][i] = Fraction(1)
    reach = word_reach(v)
    band = n - reach
    if band < 0:
        raise BandExhausted(f"word reach {reach} exceeds truncation {n}")
    return TruncOp(model, n, basis, index, tuple(cols), band, reach)


def _check_compat(a: TruncOp, b: TruncOp):
    if a.model is not b.model or a.n != b.n:
        raise ModelError("operators live on different truncations")


def mul_op(a: TruncOp, b: TruncOp) -> TruncOp:
    """a * b with band shrunk by b's reach."""
    _check_compat(a, b)
    cols = []
    for j in range(len(b.basis)):
        out = {}
        for k, bv in b.cols[j].items():
            for i, av in a.cols[k].items():
                val = out.get(i, Fraction(0)) + av * bv
                if val == 0:
                    out.pop(i, None)
                else:
                    out[i] = val
        cols.append(out)
    return TruncOp(a.model, a.n, a.basis, a.index, tuple(cols),
                   min(b.band, a.band - b.reach), a.reach + b.reach)


def add_op(a: TruncOp, b: TruncOp) -> TruncOp:
    _check_compat(a, b)
    cols = []
    for j in range(len(a.basis)):
        out = dict(a.cols[j])
        for i, v in b.cols[j].items():
            val = out.get(i, Fraction(0)) + v
            if val == 0:
                out.pop(i, None)
            else:
                out[i] = val
        cols.append(out)
    return TruncOp(a.model, a.n, a.basis, a.index, tuple(cols),
                   min(a.band, b.band), max(a.reach, b.reach))


def scale_op(c, a: TruncOp) -> TruncOp:
    c = Fraction(c)
    if c == 0:
        return zero_op(a.model, a.n)
    cols = tuple({i: c * v for i, v in col.items()} for col in a.cols)
    return TruncOp(a.model, a.n, a.basis, a.index, cols, a.band, a.reach)


def transpose_op(a: TruncOp) -> TruncOp:
    cols = [dict() for _ in a.basis]
    for j, col in enumerate(a.cols):
        for i, v in col.items():
            cols[i][j] = v
    return TruncOp(a.model, a.n, a.basis, a.index, tuple(cols), a.band, a.reach)


def diagonal_part(a: TruncOp) -> TruncOp:
    """Compression to the diagonal: keep only the (s, s) entries."""
    cols = tuple({j: col[j]} if j in col else {} for j, col in enumerate(a.cols))
    return TruncOp(a.model, a.n, a.basis, a.index, cols, a.band, 0)


def equal_on_band(a: TruncOp, b: TruncOp, band=None) -> bool:
    """Entrywise equality restricted to columns inside the trusted band."""
    _check_compat(a, b)
    if band is None:
        band = min(a.band, b.band)
    for j, s in enumerate(a.basis):
        if a.model.length(s) > band:
            continue
        if a.cols[j] != b.cols[j]:
            return False
    return True


def check_projection_identity(x, y, n) -> bool:
    """Product of two ideal masks against the mask of the intersection."""
    from .ideals import intersect
    left = mul_op(projection_op(x, n), projection_op(y, n))
    right = projection_op(intersect(x, y), n)
    return equal_on_band(left, right)


def graded_sum(terms, n) -> TruncOp:
    """Realize a rational combination of words as one operator."""
    if not terms:
        raise ModelError("empty term list")
    model = terms[0][1].model
    acc = zero_op(model, n)
    for c, v in terms:
        acc = add_op(acc, scale_op(c, rep_vword(v, n)))
    return acc


def cond_expectation(terms, n) -> TruncOp:
    """Diagonal expectation of a word combination, computed two ways.

    Route one keeps exactly the terms with trivial grading; route two
    compresses the realized matrix to the diagonal.  The routes must agree
    on the band; disagreement signals a grading bug and raises.
    """
    if not terms:
        raise ModelError("empty term list")
    model = terms[0][1].model
    unit = model.unit
    via_grading = zero_op(model, n)
    for c, v in terms:
        if v.is_zero:
            continue
        if v.grading == unit:
            via_grading = add_op(via_grading, scale_op(c, rep_vword(v, n)))
        else:
            # keep band bookkeeping aligned with the full sum
            via_grading = add_op(via_grading, scale_op(0, rep_vword(v, n)))
    full = graded_sum(terms, n)
    via_compress = diagonal_part(full)
    if not equal_on_band(via_grading, via_compress, min(via_grading.band, full.band)):
        raise GradingMismatch("grading filter and diagonal compression disagree")
    return via_grading


# ---------------------------------------------------------------------------
# Frame spaces and compressed norms

@dataclass(frozen=True, eq=False)
class CovarianceFrame:
    """Finite frame set F in the group, with per-basis admissibility flags.

    A basis point r is admissible when, for every g in F whose translate
    g*P meets r*P, the point r already lies in g*P.  Flags for the
    translated frame set h*F are available through ``flags_for``.
    """

    model: object
    n: int
    f_set: tuple
    basis: tuple
    index: object
    base_flags: tuple
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def slice_indices(self, h=None):
        """Basis positions of the h-translated frame space (h = unit)."""
        flags = self.base_flags if h in (None, self.model.unit) else self.flags_for(h)
        return tuple(j for j, ok in enumerate(flags) if ok)

    def flags_for(self, h):
        got = self._cache.get(h)
        if got is None:
            shifted = tuple(self.model.mul(h, g) for g in self.f_set)
            got = _frame_flags(self.model, shifted, self.basis)
            self._cache[h] = got
        return got

    def admissible(self, r, h=None) -> bool:
        flags = self.base_flags if h in (None, self.model.unit) else self.flags_for(h)
        j = self.index.get(r)
        if j is None:
            raise BandExhausted(f"{r!r} outside the truncation")
        return flags[j]


def _frame_flags(model, f_set, basis):
    flags = []
    for r in basis:
        ok = True
        for g in f_set:
            u = model.mul(model.inv(g), r)
            if model.meets_p(u) and not model.in_p(u):
                ok = False
                break
        flags.append(ok)
    return tuple(flags)


def build_frame(model, f_elems, n) -> CovarianceFrame:
    """Flags and slices for a finite frame set of group elements."""
    f_set = tuple(sorted({model.validate(g) if hasattr(model, "validate") else g
                          for g in f_elems},
                         key=lambda g: (model.length(g), g)))
    basis, index = _basis(model, n)
    return CovarianceFrame(model, n, f_set, basis, index,
                       _frame_flags(model, f_set, basis))


def frame_isometry(frame: CovarianceFrame, p):
    """Matrix of the shift r -> p*r from the base slice to the p-translated
    slice, as (rows, row_labels, col_labels); columns restricted to the
    guard band."""
    model = frame.model
    band = frame.n - model.length(p)
    cols = [j for j in frame.slice_indices()
            if model.length(frame.basis[j]) <= band]
    rows = frame.slice_indices(p)
    row_pos = {j: k for k, j in enumerate(rows)}
    matrix = [[Fraction(0)] * len(cols) for _ in rows]
    for cpos, j in enumerate(cols):
        t = model.mul(p, frame.basis[j])
        i = frame.index.get(t)
        if i is not None and i in row_pos:
            matrix[row_pos[i]][cpos] = Fraction(1)
    return matrix, rows, cols


def compressed_matrix(terms, frame: CovarianceFrame):
    """Base-slice compression of a trivially-graded word combination.

    Returns (matrix, labels): a square rational matrix over the admissible
    basis points surviving the guard band.
    """
    model = frame.model
    unit = model.unit
    for _, v in terms:
        if not v.is_zero and v.grading != unit:
            raise ModelError("frame compression expects trivially graded terms")
    reach = max([word_reach(v) for _, v in terms] or [0])
    band = frame.n - reach
    labels = [j for j in frame.slice_indices()
              if model.length(frame.basis[j]) <= band]
    if not labels:
        raise BandExhausted("no admissible basis points inside the guard band")
    size = len(labels)
    pos = {j: k for k, j in enumerate(labels)}
    matrix = [[Fraction(0)] * size for _ in range(size)]
    for c, v in terms:
        if v.is_zero:
            continue
        for j in labels:
            if v.dom.contains(frame.basis[j]):
                matrix[pos[j]][pos[j]] += Fraction(c)
    return matrix, labels


def sc_norm(terms, frame: CovarianceFrame, tol=Fraction(1, 10 ** 9)):
    """Certified enclosure of the compressed operator norm.

    Trivially graded combinations act diagonally, so the norm is the exact
    maximum absolute diagonal value (width-zero enclosure); a non-diagonal
    matrix would fall back to the bisection enclosure.
    """
    matrix, labels = compressed_matrix(terms, frame)
    diagonal = True
    for i in range(len(labels)):
        for j in range(len(labels)):
            if i != j and matrix[i][j] != 0:
                diagonal = False
                break
        if not diagonal:
            break
    if diagonal:
        value = max((abs(matrix[k][k]) for k in range(len(labels))),
                    default=Fraction(0))
        return value, value
    return operator_norm_enclosure(matrix, tol)


@dataclass(frozen=True)
class ScProbeReport:
    """Norm sequence along a frame chain, with monotonicity observations.

    The verdict is evidence at the tested truncation, never a proof:
    "vanishing-evidence" when the final enclosure is below tolerance,
    "non-vanishing-evidence" when the final lower bound stays above
    tolerance without decreasing at the last step, else "inconclusive".
    """

    frames: tuple
    enclosures: tuple
    non_increasing: bool
    verdict: str
    band: int

    def to_json(self, model):
        return {
            "frames": [[model.render(g) for g in f] for f in self.frames],
            "enclosures": [[f"{lo.numerator}/{lo.denominator}",
                            f"{hi.numerator}/{hi.denominator}"]
                           for lo, hi in self.enclosures],
            "non_increasing": self.non_increasing,
            "verdict": self.verdict,
            "band": self.band,
        }


def sc_limit_probe(terms, f_chain, model, n,
                   tol=Fraction(1, 10 ** 9)) -> ScProbeReport:
    enclosures = []
    frames = []
    for f_elems in f_chain:
        frame = build_frame(model, f_elems, n)
        enclosures.append(sc_norm(terms, frame, tol))
        frames.append(frame.f_set)
    non_increasing = all(enclosures[k + 1][1] <= enclosures[k][1] or
                         enclosures[k + 1][0] <= enclosures[k][1]
                         for k in range(len(enclosures) - 1))
    last_lo, last_hi = enclosures[-1]
    if last_hi <= tol:
        verdict = "vanishing-evidence"
    elif last_lo > tol and (len(enclosures) == 1 or last_lo >= enclosures[-2][0]):
        verdict = "non-vanishing-evidence"
    else:
        verdict = "inconclusive"
    reach = max([word_reach(v) for _, v in terms] or [0])
    return ScProbeReport(tuple(frames), tuple(enclosures),
                         non_increasing, verdict, n - reach)


def default_f_chain(model, gradings, depth):
    """Balls of increasing radius in the group, intersected with the
    realized gradings (plus the unit); a cofinal, reproducible choice."""
    pool = sorted(set(gradings) | {model.unit},
                  key=lambda g: (model.length(g), g))
    chain = []
    for rho in range(depth + 1):
        chain.append(tuple(g for g in pool if model.length(g) <= rho))
    return chain


def generator_covariance_terms(model, lattice_radius=None):
    """The inclusion-exclusion defect of the generator masks: the
    alternating sum over subsets S of the generators of the diagonal word
    of the intersection of s*P over S."""
    import itertools as _it
    from .ideals import WordTrace, from_trace, intersect, full_ideal

    radius = lattice_radius if lattice_radius is not None else model.default_radius
    terms = []
    gens = list(model.generators)
    for k in range(len(gens) + 1):
        for subset in _it.combinations(gens, k):
            ideal = full_ideal(model, radius)
            for s in subset:
                ideal = intersect(ideal, from_trace(
                    model, WordTrace(((model.unit, s),)), radius))
            word = invsgp.idempotent_vword(ideal)
            terms.append((Fraction(-1) ** k, word))
    return terms

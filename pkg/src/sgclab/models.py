"""Monoid-in-group models with canonical normal forms.

A model fixes a unital submonoid P of a discrete group G together with a
proper length function.  Elements are plain hashable Python values (tuples,
strings, ints) in canonical normal form, so equality of normal forms is
equality in G; everything downstream (ideal calculus, word arithmetic,
truncated matrices) leans on that exactness.

Three families ship built in:

* ``free_abelian``: N^k inside Z^k, vectors as int tuples;
* ``free_monoid``: positive words inside a free group, reduced words as
  strings (lower case letters are generators, upper case their inverses);
* ``numerical``: a numerical semigroup <g1,...,gm> inside Z, gcd 1.

Models also carry an exact-ideal hook: a canonical finite token for every
right ideal the calculus can build, with exact membership, preimage,
intersection, subset and union-cover tests.  The hook keeps ideal
enumeration exact at any radius; models without it (see
:class:`WithoutExactIdeals`) fall back to truncated set arithmetic.

All model state is immutable after construction and every operation is a
pure function, so instances may be shared freely across threads.
"""

from __future__ import annotations

import itertools
import math
import string

# Shared exact token for the empty right ideal, across all families.
EMPTY = ("empty",)

_LETTERS = string.ascii_lowercase


class ModelError(ValueError):
    """Invalid element, mismatched model, or unsupported construction."""


class Model:
    """Contract every concrete family implements.

    ``mul``/``inv`` operate on arbitrary group elements in normal form;
    ``in_p``, ``length``, ``enumerate_p`` and ``divide`` see the submonoid.
    ``divide(p, y)`` returns the unique x in P with p*x == y, or None;
    uniqueness holds because P embeds in a group.
    """

    family = "abstract"
    has_exact_ideals = True
    default_radius = 50
    default_trunc = 30
    default_gen_len = 1

    def __init__(self):
        self._enum_cache = {}

    # -- group arithmetic ------------------------------------------------
    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    @property
    def unit(self):
        raise NotImplementedError

    @property
    def generators(self):
        raise NotImplementedError

    # -- submonoid data --------------------------------------------------
    def in_p(self, a) -> bool:
        raise NotImplementedError

    def length(self, a) -> int:
        """Proper length on G restricting to the submonoid length on P."""
        raise NotImplementedError

    def divide(self, p, y):
        if not (self.in_p(p) and self.in_p(y)):
            raise ModelError("divide expects submonoid elements")
        x = self.mul(self.inv(p), y)
        return x if self.in_p(x) else None

    def enumerate_p(self, max_len: int):
        """All submonoid elements of length <= max_len, sorted by
        (length, normal form).  Cached per model instance."""
        if max_len < 0:
            raise ModelError("max_len must be >= 0")
        got = self._enum_cache.get(max_len)
        if got is None:
            got = tuple(sorted(self._generate_p(max_len), key=self.sort_key))
            self._enum_cache[max_len] = got
        return got

    def _generate_p(self, max_len):
        raise NotImplementedError

    def sort_key(self, a):
        return (self.length(a), a)

    def meets_p(self, g) -> bool:
        """Whether g*P intersects P inside G (g any group element)."""
        raise NotImplementedError

    def validate(self, a):
        raise NotImplementedError

    # -- serialization ---------------------------------------------------
    def parse(self, obj):
        raise NotImplementedError

    def render(self, a):
        raise NotImplementedError

    def config(self) -> dict:
        raise NotImplementedError

    # -- exact ideal hook --------------------------------------------------
    # Tokens are canonical hashable values; EMPTY is shared by all families.

    def exact_full(self):
        raise NotImplementedError

    def exact_left_mul(self, p, tok):
        raise NotImplementedError

    def exact_preimage(self, p, tok):
        raise NotImplementedError

    def exact_intersect(self, tok, other):
        raise NotImplementedError

    def exact_contains(self, tok, a) -> bool:
        raise NotImplementedError

    def exact_subset(self, tok, other) -> bool:
        raise NotImplementedError

    def exact_union_covers(self, tok, others) -> bool:
        """Whether the ideal of ``tok`` is contained in the union of the
        ideals of ``others`` (exact, not radius-limited)."""
        raise NotImplementedError

    def exact_members_upto(self, tok, radius: int):
        raise NotImplementedError

    def empty_witness_bound(self, pairs) -> int:
        """Radius B such that a non-empty ideal produced by a trace with the
        given (p, q) pairs must contain an element of length <= B."""
        return sum(self.length(q) for _, q in pairs)


class FreeAbelianModel(Model):
    """N^k inside Z^k; elements are int tuples, length is the l1 norm.

    Every non-empty ideal the calculus reaches is a translated positive
    cone and is stored by its corner vector.
    """

    family = "free_abelian"

    def __init__(self, rank: int):
        super().__init__()
        if not isinstance(rank, int) or rank < 1:
            raise ModelError("free_abelian rank must be a positive int")
        self.rank = rank
        self.name = f"N^{rank}"
        self.default_trunc = 30 if rank == 1 else 12
        self._vec_cache = {}

    @property
    def unit(self):
        return (0,) * self.rank

    @property
    def generators(self):
        gens = []
        for i in range(self.rank):
            v = [0] * self.rank
            v[i] = 1
            gens.append(tuple(v))
        return tuple(gens)

    def validate(self, a):
        if not (isinstance(a, tuple) and len(a) == self.rank
                and all(isinstance(x, int) for x in a)):
            raise ModelError(f"bad element for {self.name}: {a!r}")
        return a

    def mul(self, a, b):
        self.validate(a), self.validate(b)
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        self.validate(a)
        return tuple(-x for x in a)

    def in_p(self, a):
        self.validate(a)
        return all(x >= 0 for x in a)

    def length(self, a):
        return sum(abs(x) for x in a)

    def _vectors_upto(self, total):
        got = self._vec_cache.get(total)
        if got is None:
            vecs = []
            for t in range(total + 1):
                vecs.extend(self._vectors_of_sum(t))
            got = tuple(vecs)
            self._vec_cache[total] = got
        return got

    def _vectors_of_sum(self, t):
        if self.rank == 1:
            return [(t,)]
        out = []
        for cuts in itertools.combinations(range(t + self.rank - 1), self.rank - 1):
            prev, vec = -1, []
            for c in cuts:
                vec.append(c - prev - 1)
                prev = c
            vec.append(t + self.rank - 2 - prev)
            out.append(tuple(vec))
        return sorted(out)

    def _generate_p(self, max_len):
        return self._vectors_upto(max_len)

    def meets_p(self, g):
        self.validate(g)
        return True

    def parse(self, obj):
        if isinstance(obj, (list, tuple)):
            return self.validate(tuple(int(x) for x in obj))
        raise ModelError(f"cannot parse {obj!r} as a vector")

    def render(self, a):
        return list(a)

    def config(self):
        return {"family": "free_abelian", "rank": self.rank}

    # exact hook: non-empty ideals are corner + N^k
    def exact_full(self):
        return ("corner", self.unit)

    def exact_left_mul(self, p, tok):
        if tok == EMPTY:
            return EMPTY
        return ("corner", self.mul(p, tok[1]))

    def exact_preimage(self, p, tok):
        if tok == EMPTY:
            return EMPTY
        return ("corner", tuple(max(c - x, 0) for c, x in zip(tok[1], p)))

    def exact_intersect(self, tok, other):
        if EMPTY in (tok, other):
            return EMPTY
        return ("corner", tuple(max(c, d) for c, d in zip(tok[1], other[1])))

    def exact_contains(self, tok, a):
        if tok == EMPTY:
            return False
        return self.in_p(a) and all(x >= c for x, c in zip(a, tok[1]))

    def exact_subset(self, tok, other):
        if tok == EMPTY:
            return True
        if other == EMPTY:
            return False
        return all(c >= d for c, d in zip(tok[1], other[1]))

    def exact_union_covers(self, tok, others):
        if tok == EMPTY:
            return True
        # the corner generates: covered iff the corner itself is covered
        return any(self.exact_contains(o, tok[1]) for o in others if o != EMPTY)

    def exact_members_upto(self, tok, radius):
        if tok == EMPTY:
            return []
        corner = tok[1]
        room = radius - self.length(corner)
        if room < 0:
            return []
        return [self.mul(corner, v) for v in self._vectors_upto(room)]


class FreeMonoidModel(Model):
    """Positive words inside a free group; reduced words as strings.

    Lower case letters are generators, upper case letters their formal
    inverses.  Non-empty ideals are w * P for a positive word w.
    """

    family = "free_monoid"
    default_radius = 6
    default_trunc = 7

    def __init__(self, rank: int):
        super().__init__()
        if not isinstance(rank, int) or not 1 <= rank <= 10:
            raise ModelError("free_monoid rank must be an int in 1..10")
        self.rank = rank
        self.letters = _LETTERS[:rank]
        self.name = f"F{rank}+"

    @property
    def unit(self):
        return ""

    @property
    def generators(self):
        return tuple(self.letters)

    def validate(self, a):
        if not isinstance(a, str):
            raise ModelError(f"bad element for {self.name}: {a!r}")
        for ch in a:
            if ch.lower() not in self.letters:
                raise ModelError(f"letter {ch!r} outside alphabet of {self.name}")
        return a

    @staticmethod
    def _reduce(word):
        out = []
        for ch in word:
            if out and out[-1] == ch.swapcase():
                out.pop()
            else:
                out.append(ch)
        return "".join(out)

    def mul(self, a, b):
        self.validate(a), self.validate(b)
        return self._reduce(a + b)

    def inv(self, a):
        self.validate(a)
        return a[::-1].swapcase()

    def in_p(self, a):
        self.validate(a)
        return a.islower() or a == ""

    def length(self, a):
        return len(a)

    def _generate_p(self, max_len):
        if max_len > 16:
            raise ModelError("free monoid truncation beyond length 16 refused")
        words = []
        for n in range(max_len + 1):
            words.extend("".join(w) for w in itertools.product(self.letters, repeat=n))
        return words

    def meets_p(self, g):
        # gP meets P iff the reduced word is a positive prefix followed by
        # an inverse suffix (then g = s * t^{-1} with s, t positive)
        self.validate(g)
        seen_upper = False
        for ch in g:
            if ch.isupper():
                seen_upper = True
            elif seen_upper:
                return False
        return True

    def parse(self, obj):
        if isinstance(obj, str):
            return self._reduce(self.validate(obj))
        raise ModelError(f"cannot parse {obj!r} as a word")

    def render(self, a):
        return a

    def config(self):
        return {"family": "free_monoid", "rank": self.rank}

    # exact hook: non-empty ideals are ("word", w)
    def exact_full(self):
        return ("word", "")

    def exact_left_mul(self, p, tok):
        if tok == EMPTY:
            return EMPTY
        return ("word", p + tok[1])

    def exact_preimage(self, p, tok):
        if tok == EMPTY:
            return EMPTY
        w = tok[1]
        if w.startswith(p):
            return ("word", w[len(p):])
        if p.startswith(w):
            return ("word", "")
        return EMPTY

    def exact_intersect(self, tok, other):
        if EMPTY in (tok, other):
            return EMPTY
        w, v = tok[1], other[1]
        if w.startswith(v):
            return ("word", w)
        if v.startswith(w):
            return ("word", v)
        return EMPTY

    def exact_contains(self, tok, a):
        if tok == EMPTY:
            return False
        return self.in_p(a) and a.startswith(tok[1])

    def exact_subset(self, tok, other):
        if tok == EMPTY:
            return True
        if other == EMPTY:
            return False
        return tok[1].startswith(other[1])

    def exact_union_covers(self, tok, others):
        if tok == EMPTY:
            return True
        w = tok[1]
        return any(w.startswith(o[1]) for o in others if o != EMPTY)

    def exact_members_upto(self, tok, radius):
        if tok == EMPTY:
            return []
        w = tok[1]
        room = radius - len(w)
        if room < 0:
            return []
        return [w + u for u in self._generate_p(room)]


def _gcd_all(values):
    g = 0
    for v in values:
        g = math.gcd(g, v)
    return g


class NumericalModel(Model):
    """A numerical semigroup <g1,...,gm> inside Z (gcd of generators 1).

    Membership below the conductor is decided by a sieve; every integer at
    or above the conductor belongs.  Ideals are stored as a finite sporadic
    part plus a full integer tail ("num", sporadic_tuple, tail_start).
    """

    family = "numerical"

    def __init__(self, gens):
        super().__init__()
        gens = tuple(sorted(set(int(g) for g in gens)))
        if not gens or any(g < 1 for g in gens):
            raise ModelError("numerical generators must be positive integers")
        if _gcd_all(gens) != 1:
            raise ModelError("numerical generators must have gcd 1 (so the group is Z)")
        self.gens = gens
        self.name = "<" + ",".join(str(g) for g in gens) + ">"
        self._table, self.conductor = self._sieve(gens)
        self.default_gen_len = max(gens)

    @staticmethod
    def _sieve(gens):
        g0 = min(gens)
        bound = max((g0 - 1) * (max(gens) - 1) + max(gens), g0 + 1)
        for _ in range(8):
            table = [False] * (bound + 1)
            table[0] = True
            for n in range(1, bound + 1):
                table[n] = any(n >= g and table[n - g] for g in gens)
            run = 0
            for n in range(bound + 1):
                run = run + 1 if table[n] else 0
                if run >= g0:
                    return table, n - g0 + 1
            bound *= 2
        raise ModelError("could not locate the conductor; generators too large")

    @property
    def unit(self):
        return 0

    @property
    def generators(self):
        return self.gens

    def validate(self, a):
        if not isinstance(a, int):
            raise ModelError(f"bad element for {self.name}: {a!r}")
        return a

    def mul(self, a, b):
        self.validate(a), self.validate(b)
        return a + b

    def inv(self, a):
        self.validate(a)
        return -a

    def in_p(self, a):
        self.validate(a)
        if a < 0:
            return False
        if a >= self.conductor:
            return True
        return self._table[a]

    def length(self, a):
        return abs(a)

    def _generate_p(self, max_len):
        return [n for n in range(max_len + 1) if self.in_p(n)]

    def meets_p(self, g):
        self.validate(g)
        return True

    def parse(self, obj):
        if isinstance(obj, int) and not isinstance(obj, bool):
            return obj
        raise ModelError(f"cannot parse {obj!r} as an integer")

    def render(self, a):
        return a

    def config(self):
        return {"family": "numerical", "generators": list(self.gens)}

    # exact hook: ("num", sporadic members below tail, tail start)
    def _token(self, members, tail):
        members = set(members)
        while tail - 1 in members:
            tail -= 1
            members.discard(tail)
        return ("num", tuple(sorted(m for m in members if m < tail)), tail)

    def exact_full(self):
        return self._token((n for n in range(self.conductor) if self.in_p(n)),
                           self.conductor)

    def exact_left_mul(self, p, tok):
        if tok == EMPTY:
            return EMPTY
        _, fin, tail = tok
        return self._token((m + p for m in fin), tail + p)

    def exact_preimage(self, p, tok):
        if tok == EMPTY:
            return EMPTY
        _, fin, tail = tok
        out = {m - p for m in fin if m >= p and self.in_p(m - p)}
        lo = max(tail - p, 0)
        hi = max(lo, self.conductor)
        out.update(n for n in range(lo, hi) if self.in_p(n))
        return self._token(out, hi)

    def exact_intersect(self, tok, other):
        if EMPTY in (tok, other):
            return EMPTY
        tail = max(tok[2], other[2])
        fin = [m for m in range(tail)
               if self.exact_contains(tok, m) and self.exact_contains(other, m)]
        return self._token(fin, tail)

    def exact_contains(self, tok, a):
        if tok == EMPTY or a < 0:
            return False
        _, fin, tail = tok
        return a >= tail or a in fin

    def exact_subset(self, tok, other):
        if tok == EMPTY:
            return True
        if other == EMPTY:
            return False
        bound = max(tok[2], other[2])
        return all(self.exact_contains(other, m)
                   for m in range(bound) if self.exact_contains(tok, m))

    def exact_union_covers(self, tok, others):
        if tok == EMPTY:
            return True
        others = [o for o in others if o != EMPTY]
        if not others:
            return False
        bound = max([tok[2]] + [o[2] for o in others])
        return all(any(self.exact_contains(o, m) for o in others)
                   for m in range(bound) if self.exact_contains(tok, m))

    def exact_members_upto(self, tok, radius):
        if tok == EMPTY:
            return []
        _, fin, tail = tok
        out = [m for m in fin if m <= radius]
        out.extend(range(tail, radius + 1))
        return out

    def empty_witness_bound(self, pairs):
        return (sum(self.length(q) for _, q in pairs)
                + self.conductor * (len(pairs) + 1))


class WithoutExactIdeals:
    """Delegating wrapper that hides a model's exact-ideal hook.

    Forces the truncated-set code paths; used to exercise the radius-limited
    contracts (Undecided equality, witness-bound emptiness certificates).
    """

    has_exact_ideals = False

    def __init__(self, base: Model):
        self._base = base
        self.name = base.name + "/trunc"

    def __getattr__(self, item):
        if item.startswith("exact_"):
            raise AttributeError(f"{self.name} has no exact-ideal hook")
        return getattr(self._base, item)


_FAMILIES = {
    "free_abelian": lambda cfg: FreeAbelianModel(cfg["rank"]),
    "free_monoid": lambda cfg: FreeMonoidModel(cfg["rank"]),
    "numerical": lambda cfg: NumericalModel(cfg["generators"]),
}


def build_model(config: dict) -> Model:
    """Construct a model from a config document, e.g.
    ``{"family": "free_abelian", "rank": 2}``."""
    if not isinstance(config, dict) or "family" not in config:
        raise ModelError("model config must be a dict with a 'family' key")
    family = config["family"]
    if family not in _FAMILIES:
        raise ModelError(f"unknown model family {family!r}; "
                         f"known: {sorted(_FAMILIES)}")
    try:
        return _FAMILIES[family](config)
    except KeyError as exc:
        raise ModelError(f"model config for {family!r} missing field {exc}") from exc

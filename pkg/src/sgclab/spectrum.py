"""Characters of a finite ideal fragment, the induced partial action, the
minimal invariant boundary, and a topological-freeness probe.

A character is a semilattice homomorphism from the fragment's non-empty
ideals to {0,1}; its support is a filter (upward closed and closed under
intersection).  On a finite intersection-closed fragment every filter has a
least element, so the characters are exactly the principal up-sets, stored
as bitmasks.

The group acts partially: a word v with grading g carries the character
chi (with chi(dom v) = 1) to the character y -> chi(pullback of y along v),
where the pullback of y is the domain ideal of v* E_y v.  At finite
fragment scale a pulled-back ideal may fall outside the fragment; its value
is then forced upward (some supported fragment ideal sits inside it),
forced downward (some unsupported fragment ideal contains it), or genuinely
ambiguous.  Ambiguity is the honest fingerprint of the fragment edge: the
character has several extensions with different images, so the instance is
reported, never guessed.  Fragment characters carry the discrete topology,
so closure computations add only images of defined instances.

The boundary is computed two independent ways (closure of the maximal
filters, and the intersection of the closures of all singletons when that
intersection is itself invariant and non-empty) and the routes are
cross-checked; a discrepancy is reported, not hidden.

The freeness probe restricts the dynamics to the computed boundary: an
ambiguous image is resolved only when exactly one boundary character is
consistent with the determined values.  Its verdict uses basic open sets
from sub-frontier ideals only (ideals discovered strictly below the
enumeration frontier), because a frontier cylinder says nothing about the
dynamics beneath the resolution of the fragment; this is evidence at the
tested depth, never a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ideals as ideals_mod
from . import invsgp
from .models import ModelError


class FragmentError(ValueError):
    """Fragment is not intersection-closed or misses required data."""


@dataclass(frozen=True, eq=False)
class Fragment:
    """Bit-indexed view of the non-empty ideals of a closed lattice."""

    lattice: object
    positions: tuple          # lattice indices, bit position -> lattice index
    pos_of: dict              # lattice index -> bit position
    up_masks: tuple           # per position: bitmask of superset positions
    meet: tuple               # per (i, j) flattened: position of meet, or -1 for empty
    depths: tuple             # per position: discovery depth
    full_pos: int

    @staticmethod
    def from_lattice(lattice) -> "Fragment":
        if not lattice.params.get("closed", False):
            raise FragmentError("fragment requires an intersection-closed lattice")
        positions = lattice.nonempty_indices()
        pos_of = {li: b for b, li in enumerate(positions)}
        n = len(positions)
        up_masks = []
        for b, li in enumerate(positions):
            mask = 0
            for c, lj in enumerate(positions):
                if lattice.subset[li][lj]:
                    mask |= 1 << c
            up_masks.append(mask)
        meet = []
        for li in positions:
            for lj in positions:
                k = lattice.intersect_table.get((li, lj))
                if k is None:
                    raise FragmentError("lattice intersection table incomplete")
                meet.append(pos_of.get(k, -1))
        full_pos = pos_of[0]
        depths = tuple(lattice.depths[li] for li in positions)
        return Fragment(lattice, positions, pos_of, tuple(up_masks),
                        tuple(meet), depths, full_pos)

    def size(self):
        return len(self.positions)

    def ideal_at(self, pos):
        return self.lattice.ideals[self.positions[pos]]

    def meet_pos(self, i, j):
        return self.meet[i * len(self.positions) + j]

    def position_of_ideal(self, ideal):
        key = ideal.dedup_key()
        for pos, li in enumerate(self.positions):
            if self.lattice.ideals[li].dedup_key() == key:
                return pos
        return None

    def sub_frontier_positions(self):
        frontier = max(self.depths) if self.depths else 0
        return tuple(p for p, d in enumerate(self.depths) if d < frontier)

    def is_filter(self, bits) -> bool:
        if not (bits >> self.full_pos) & 1:
            return False
        live = [p for p in range(self.size()) if (bits >> p) & 1]
        for p in live:
            if self.up_masks[p] & bits != self.up_masks[p]:
                return False
        for a in live:
            for b in live:
                m = self.meet_pos(a, b)
                if m < 0 or not (bits >> m) & 1:
                    return False
        return True


@dataclass(frozen=True)
class Character:
    """A filter on the fragment, stored as a support bitmask."""

    fragment: Fragment
    bits: int

    def value(self, pos) -> int:
        return (self.bits >> pos) & 1

    def support_positions(self):
        return tuple(p for p in range(self.fragment.size()) if self.value(p))

    def min_support(self):
        """Least supported ideal position (filters here are principal)."""
        best = None
        for p in self.support_positions():
            if best is None or self.fragment.up_masks[p] & (1 << best):
                best = p
        return best

    def render(self):
        return {"support": list(self.support_positions())}


def enumerate_characters(fragment: Fragment):
    """All filters on the fragment: the principal up-sets, one per
    non-empty ideal, in fragment position order."""
    return tuple(Character(fragment, fragment.up_masks[p])
                 for p in range(fragment.size()))


def principal_character(fragment: Fragment, p) -> Character:
    """The evaluation character x -> [p in x]."""
    bits = 0
    for pos in range(fragment.size()):
        if fragment.ideal_at(pos).contains(p):
            bits |= 1 << pos
    chi = Character(fragment, bits)
    if not fragment.is_filter(bits):
        raise FragmentError("membership pattern is not a filter; fragment not closed?")
    return chi


# ---------------------------------------------------------------------------
# Partial action

@dataclass(frozen=True)
class ThetaResult:
    status: str               # "image" | "outside" | "ambiguous" | "invalid"
    image: object = None      # Character when status == "image"
    determined: tuple = ()    # ((pos, bit), ...) when ambiguous
    ambiguous: tuple = ()     # positions that no rule settled
    carrier: object = None    # index of the word used


class ThetaContext:
    """Fragment together with an enumerated word family, with cached
    pullback recipes per grading."""

    def __init__(self, fragment: Fragment, family):
        if fragment.lattice.model is not family.model:
            raise ModelError("fragment and word family use different models")
        self.fragment = fragment
        self.family = family
        self.model = family.model
        self._carriers = {}

    def gradings(self):
        unit = self.model.unit
        return tuple(g for g in self.family.by_grading if g != unit)

    def carriers(self, g):
        """Usable words with grading g: those whose domain ideal matches a
        fragment position, each with a per-ideal pullback recipe."""
        got = self._carriers.get(g)
        if got is not None:
            return got
        out = []
        for idx in self.family.by_grading.get(g, ()):
            v = self.family.members[idx]
            dom_pos = self.fragment.position_of_ideal(v.dom)
            if dom_pos is None:
                continue
            recipes = tuple(self._recipe(v, pos)
                            for pos in range(self.fragment.size()))
            out.append((idx, v, dom_pos, recipes))
        self._carriers[g] = tuple(out)
        return self._carriers[g]

    def _recipe(self, v, pos):
        y = self.fragment.ideal_at(pos)
        pulled = invsgp.compose(invsgp.compose(invsgp.star(v),
                                               invsgp.idempotent_vword(y)), v)
        z = pulled.dom
        if pulled.is_zero or z.is_empty() is True:
            return ("empty",)
        zpos = self.fragment.position_of_ideal(z)
        if zpos is not None:
            return ("pos", zpos)
        ups = 0
        downs = 0
        for w in range(self.fragment.size()):
            wid = self.fragment.ideal_at(w)
            if wid.subset_of(z):
                ups |= 1 << w
            if z.subset_of(wid):
                downs |= 1 << w
        return ("bounds", ups, downs)


def theta_apply(ctx: ThetaContext, g, chi: Character) -> ThetaResult:
    """Carry chi along the grading-g dynamics.

    "outside" when chi vanishes on every usable domain ideal; otherwise the
    image bits are determined per fragment ideal from the pullback recipe,
    and any unresolved position makes the whole instance ambiguous.
    """
    if g == ctx.model.unit:
        return ThetaResult("image", image=chi, carrier=None)
    for idx, v, dom_pos, recipes in ctx.carriers(g):
        if not chi.value(dom_pos):
            continue
        bits = 0
        ambiguous = []
        determined = []
        for pos, recipe in enumerate(recipes):
            kind = recipe[0]
            if kind == "empty":
                determined.append((pos, 0))
            elif kind == "pos":
                bit = chi.value(recipe[1])
                determined.append((pos, bit))
                if bit:
                    bits |= 1 << pos
            else:
                _, ups, downs = recipe
                if chi.bits & ups:
                    determined.append((pos, 1))
                    bits |= 1 << pos
                elif downs & ~chi.bits:
                    determined.append((pos, 0))
                else:
                    ambiguous.append(pos)
        if ambiguous:
            return ThetaResult("ambiguous", determined=tuple(determined),
                               ambiguous=tuple(ambiguous), carrier=idx)
        if not ctx.fragment.is_filter(bits):
            return ThetaResult("invalid", determined=tuple(determined),
                               carrier=idx)
        return ThetaResult("image", image=Character(ctx.fragment, bits),
                           carrier=idx)
    return ThetaResult("outside")


@dataclass(frozen=True)
class ClosureResult:
    chars: frozenset
    events: tuple             # (grading, char, status) for non-image instances

    def to_json(self, model=None):
        return {
            "size": len(self.chars),
            "supports": sorted(list(c.support_positions()) for c in self.chars),
            "unresolved_instances": len(self.events),
        }


def invariant_closure(ctx: ThetaContext, seed, gradings=None) -> ClosureResult:
    """Smallest superset of the seed closed under all defined images.

    Ambiguous and invalid instances add nothing but are reported in
    ``events``; at finite fragment scale pointwise limits are members, so
    the closure is purely dynamical.
    """
    if gradings is None:
        gradings = ctx.gradings()
    chars = set(seed)
    queue = list(seed)
    events = []
    while queue:
        chi = queue.pop(0)
        for g in gradings:
            res = theta_apply(ctx, g, chi)
            if res.status == "image":
                if res.image not in chars:
                    chars.add(res.image)
                    queue.append(res.image)
            elif res.status in ("ambiguous", "invalid"):
                events.append((g, chi, res.status))
    return ClosureResult(frozenset(chars), tuple(events))


@dataclass(frozen=True)
class BoundaryResult:
    chars: frozenset
    maximal_seeds: tuple
    orbit_route: object       # frozenset or None when the route degenerates
    routes_agree: bool
    events: tuple

    def to_json(self):
        return {
            "size": len(self.chars),
            "supports": sorted(list(c.support_positions()) for c in self.chars),
            "maximal_seed_count": len(self.maximal_seeds),
            "orbit_route_size": None if self.orbit_route is None else len(self.orbit_route),
            "routes_agree": self.routes_agree,
            "unresolved_instances": len(self.events),
        }


def boundary(ctx: ThetaContext) -> BoundaryResult:
    """Minimal invariant character set, via two independent computations.

    Route one: the closure of the maximal filters.  Route two: the
    intersection of the closures of all singletons, kept only when it is
    itself non-empty and invariant.  The maximal-filter route is primary;
    ``routes_agree`` records the cross-check.
    """
    chars = enumerate_characters(ctx.fragment)
    maximal = tuple(
        c for c in chars
        if not any(o.bits != c.bits and (c.bits & o.bits) == c.bits for o in chars))
    route_a = invariant_closure(ctx, maximal)
    events = list(route_a.events)

    inter = set(chars)
    for c in chars:
        cl = invariant_closure(ctx, [c])
        events.extend(cl.events)
        inter &= cl.chars
    orbit_route = None
    if inter:
        recheck = invariant_closure(ctx, sorted(inter, key=lambda c: c.bits))
        if recheck.chars == frozenset(inter):
            orbit_route = frozenset(inter)
    agree = orbit_route is not None and orbit_route == route_a.chars
    return BoundaryResult(route_a.chars, maximal, orbit_route, agree,
                          tuple(events))


# ---------------------------------------------------------------------------
# Topological freeness probe

@dataclass(frozen=True)
class FreenessVerdict:
    grading: object
    status: str               # "free" | "not-free" | "inconclusive"
    fixed: tuple              # certainly fixed boundary characters
    moved: tuple              # certainly moved
    unresolved: tuple         # neither certain
    witness_open: object = None   # sub-frontier position witnessing not-free
    note: str = ""

    def to_json(self, model):
        return {
            "grading": model.render(self.grading),
            "status": self.status,
            "fixed": len(self.fixed),
            "moved": len(self.moved),
            "unresolved": len(self.unresolved),
            "witness_open": self.witness_open,
            "note": self.note,
        }


def _boundary_status(ctx, boundary_chars, g, chi):
    """Classify chi under the grading-g dynamics restricted to the boundary:
    'fixed' / 'moved' when certain for every boundary-consistent completion,
    else 'unresolved'."""
    res = theta_apply(ctx, g, chi)
    if res.status == "outside":
        return "outside", res
    if res.status == "image":
        if res.image not in boundary_chars:
            return "moved", res   # image escaped; invariance cross-checks flag it
        return ("fixed" if res.image == chi else "moved"), res
    if res.status == "invalid":
        return "unresolved", res
    completions = []
    for b in boundary_chars:
        if all(b.value(pos) == bit for pos, bit in res.determined):
            completions.append(b)
    if not completions:
        return "unresolved", res
    if all(b == chi for b in completions):
        return "fixed", res
    if chi not in completions:
        return "moved", res
    return "unresolved", res


def topological_freeness_probe(ctx: ThetaContext, boundary_chars, g_list) -> dict:
    """Per grading: the fixed characters of the boundary dynamics and a
    density-style verdict.

    not-free: some basic open set from a sub-frontier ideal meets the
    domain and consists entirely of certainly-fixed characters.  free: no
    such open set, and either the domain is empty or a certainly moved
    character witnesses movement.  Everything else is inconclusive.
    """
    unit = ctx.model.unit
    boundary_chars = frozenset(boundary_chars)
    sub_frontier = ctx.fragment.sub_frontier_positions()
    out = {}
    for g in g_list:
        if g == unit:
            raise ModelError("freeness probe expects non-identity gradings")
        domain = []
        for chi in sorted(boundary_chars, key=lambda c: c.bits):
            carriers = ctx.carriers(g)
            if any(chi.value(dom_pos) for _, _, dom_pos, _ in carriers):
                domain.append(chi)
        fixed, moved, unresolved = [], [], []
        for chi in domain:
            kind, _ = _boundary_status(ctx, boundary_chars, g, chi)
            {"fixed": fixed, "moved": moved, "unresolved": unresolved}[kind].append(chi)
        witness = None
        for pos in sub_frontier:
            cylinder = [chi for chi in domain if chi.value(pos)]
            if cylinder and all(chi in fixed for chi in cylinder):
                witness = pos
                break
        if witness is not None:
            status, note = "not-free", "sub-frontier open set of fixed characters"
        elif not domain:
            status, note = "free", "empty domain"
        elif moved:
            status, note = "free", "no fixed open set; movement witnessed"
        else:
            status, note = "inconclusive", "fragment cannot certify movement"
        out[g] = FreenessVerdict(g, status, tuple(fixed), tuple(moved),
                                 tuple(unresolved), witness, note)
    return out

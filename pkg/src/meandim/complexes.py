"""Finite geometric simplicial complexes, open simplex sets, and finite open covers.

The space model throughout is a Kuhn (Freudenthal) triangulation of a grid cube
[0,1]^d, with rational vertex coordinates.  Open sets are upward-closed families
of simplices: the point set of such a family is the union of the relative
interiors of its members, and a point belongs to the set exactly when its
carrier simplex does.  This representation is closed under finite intersection
and is pushed forward exactly by barycentric subdivision, so joins, refinement
tests and subdivision levels are exact rather than approximate.

Box covers are finite covers of [0,1]^d by relatively-open axis-aligned grid
boxes; they convert losslessly to simplex-set covers on any Kuhn triangulation
whose resolution is divisible by the box grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from math import factorial

from .errors import ParameterError, SizeCapError, UsageError, ValidationError

Point = tuple  # tuple of Fraction coordinates

DEFAULT_TOP_CAP = 100_000

NEG_INF = float("-inf")


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


class SimplicialComplex:
    """Immutable geometric simplicial complex.

    Simplices are stored canonically sorted by (dimension, vertex tuple); a
    simplex id is its position in that order.  ``grid`` is set to the grid
    resolution for cube triangulations built by :func:`build_triangulated_cube`
    and is required for carrier queries on raw points.
    """

    def __init__(self, vertices, simplices, dim, grid=None):
        self.vertices: tuple[Point, ...] = tuple(tuple(Fraction(c) for c in v) for v in vertices)
        canon = sorted({tuple(sorted(s)) for s in simplices}, key=lambda s: (len(s), s))
        self.simplices: tuple[tuple[int, ...], ...] = tuple(canon)
        self.dim = dim
        self.grid = grid
        self.index: dict[tuple[int, ...], int] = {s: i for i, s in enumerate(self.simplices)}
        n_sim = len(self.simplices)
        stars = [set() for _ in self.vertices]
        for sid, s in enumerate(self.simplices):
            for v in s:
                stars[v].add(sid)
        self.vertex_stars: tuple[frozenset, ...] = tuple(frozenset(s) for s in stars)
        # facet/cofacet adjacency (codimension 1)
        facets = [[] for _ in range(n_sim)]
        cofacets = [[] for _ in range(n_sim)]
        for sid, s in enumerate(self.simplices):
            if len(s) == 1:
                continue
            for k in range(len(s)):
                f = s[:k] + s[k + 1:]
                fid = self.index[f]
                facets[sid].append(fid)
                cofacets[fid].append(sid)
        self.facets = tuple(tuple(f) for f in facets)
        self.cofacets = tuple(tuple(c) for c in cofacets)
        self.maximal_ids = frozenset(sid for sid in range(n_sim) if not cofacets[sid])
        self._validate()

    def _validate(self):
        if not self.vertices:
            raise ValidationError("complex needs at least one vertex")
        seen = set()
        for sid, s in enumerate(self.simplices):
            if not s:
                raise ValidationError("empty simplex")
            if any(v < 0 or v >= len(self.vertices) for v in s):
                raise ValidationError("simplex references unknown vertex")
            # closed under faces
            if len(s) > 1:
                for k in range(len(s)):
                    if s[:k] + s[k + 1:] not in self.index:
                        raise ValidationError(f"face of {s} missing: not downward closed")
            seen.update(s)
        if seen != set(range(len(self.vertices))):
            raise ValidationError("every vertex must appear in at least one simplex")

    def n_simplices(self) -> int:
        return len(self.simplices)

    def barycenter(self, sid: int) -> Point:
        s = self.simplices[sid]
        k = len(s)
        dim = len(self.vertices[0])
        return tuple(sum(self.vertices[v][i] for v in s) / k for i in range(dim))

    def simplex_dim(self, sid: int) -> int:
        return len(self.simplices[sid]) - 1

    def __repr__(self):
        return (f"SimplicialComplex(v={len(self.vertices)}, s={len(self.simplices)}, "
                f"dim={self.dim}, grid={self.grid})")


@dataclass(frozen=True)
class OpenSimplexSet:
    """Upward-closed set of simplex ids; its point set is open in |K|."""

    complex: SimplicialComplex
    members: frozenset

    def __post_init__(self):
        for sid in self.members:
            for cof in self.complex.cofacets[sid]:
                if cof not in self.members:
                    raise ValidationError("open simplex set is not upward closed")

    def is_empty(self) -> bool:
        return not self.members

    def contains_point(self, point) -> bool:
        sid, _ = point_carrier(self.complex, point)
        return sid in self.members


def open_set(K: SimplicialComplex, members, validate: bool = True) -> OpenSimplexSet:
    """Build an OpenSimplexSet, optionally skipping the upward-closure check."""
    members = frozenset(members)
    if validate:
        return OpenSimplexSet(K, members)
    obj = object.__new__(OpenSimplexSet)
    object.__setattr__(obj, "complex", K)
    object.__setattr__(obj, "members", members)
    return obj


def star_set(K: SimplicialComplex, vertex_ids) -> OpenSimplexSet:
    """Open star of a vertex set: all simplices meeting it."""
    vs = set(vertex_ids)
    members = frozenset(sid for sid, s in enumerate(K.simplices) if vs.intersection(s))
    return open_set(K, members, validate=False)


def down_closure(K: SimplicialComplex, members) -> frozenset:
    """All faces of the given simplices (the carrier set of their closed union)."""
    out = set()
    stack = list(members)
    while stack:
        sid = stack.pop()
        if sid in out:
            continue
        out.add(sid)
        stack.extend(K.facets[sid])
    return frozenset(out)


def up_closure(K: SimplicialComplex, members) -> frozenset:
    out = set()
    stack = list(members)
    while stack:
        sid = stack.pop()
        if sid in out:
            continue
        out.add(sid)
        stack.extend(K.cofacets[sid])
    return frozenset(out)


@dataclass(frozen=True)
class Cover:
    """Finite open cover: an ordered tuple of nonempty open simplex sets.

    Duplicate elements are removed on construction (first occurrence wins);
    element order is otherwise preserved so witnesses index stably into it.
    """

    complex: SimplicialComplex
    elements: tuple

    def __post_init__(self):
        if not self.elements:
            raise ValidationError("cover needs at least one element")
        seen = set()
        dedup = []
        for el in self.elements:
            if el.complex is not self.complex:
                raise UsageError("cover element lives on a different complex")
            if el.is_empty():
                raise ValidationError("empty cover elements are forbidden")
            if el.members not in seen:
                seen.add(el.members)
                dedup.append(el)
        object.__setattr__(self, "elements", tuple(dedup))
        covered = frozenset().union(*(el.members for el in self.elements))
        if len(covered) != self.complex.n_simplices():
            raise ValidationError("elements do not cover the complex")

    def __len__(self):
        return len(self.elements)


def cover(K: SimplicialComplex, member_sets, validate: bool = True) -> Cover:
    return Cover(K, tuple(open_set(K, m, validate=validate) for m in member_sets))


@dataclass(frozen=True)
class Restriction:
    """Subset of the space the order quantities are taken over.

    kinds: ``whole`` | ``closed`` (payload downward closed) | ``open``
    (payload upward closed) | ``empty``.  The admitted simplices are the
    carriers realized by points of the subset.
    """

    kind: str
    payload: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in ("whole", "closed", "open", "empty"):
            raise ValidationError(f"unknown restriction kind {self.kind!r}")

    @staticmethod
    def whole() -> "Restriction":
        return Restriction("whole")

    @staticmethod
    def empty() -> "Restriction":
        return Restriction("empty")

    @staticmethod
    def closed_subcomplex(K: SimplicialComplex, members) -> "Restriction":
        members = frozenset(members)
        for sid in members:
            for f in K.facets[sid]:
                if f not in members:
                    raise ValidationError("closed restriction payload not downward closed")
        return Restriction("closed", members)

    @staticmethod
    def open_subset(K: SimplicialComplex, members) -> "Restriction":
        members = frozenset(members)
        for sid in members:
            for c in K.cofacets[sid]:
                if c not in members:
                    raise ValidationError("open restriction payload not upward closed")
        return Restriction("open", members)

    def admitted(self, K: SimplicialComplex):
        """Simplex ids over which pointwise maxima range."""
        if self.kind == "whole":
            return range(K.n_simplices())
        if self.kind == "empty":
            return ()
        return sorted(self.payload)

    def is_empty(self) -> bool:
        return self.kind == "empty" or (self.kind in ("closed", "open") and not self.payload)


def admitted_maximal(K: SimplicialComplex, Y: Restriction) -> list:
    """Admitted simplices with no admitted proper coface.

    Pointwise maxima of upward-closed counts are attained on these, so search
    and order computations only need to look here.
    """
    if Y.kind == "whole":
        return sorted(K.maximal_ids)
    if Y.kind == "empty":
        return []
    adm = Y.payload
    return sorted(sid for sid in adm if not any(c in adm for c in K.cofacets[sid]))


def cover_order(alpha: Cover, Y: Restriction):
    """Maximum number of cover elements sharing a point of Y, minus one.

    Returns -inf for an empty restriction.  Only carriers admitted by Y count.
    """
    K = alpha.complex
    if Y.is_empty():
        return NEG_INF
    best = 0
    for sid in admitted_maximal(K, Y):
        c = sum(1 for el in alpha.elements if sid in el.members)
        if c > best:
            best = c
    if best == 0:
        # admitted simplices exist but none covered: impossible for a real cover
        raise UsageError("restriction admits simplices outside every cover element")
    return best - 1


def join(alpha: Cover, beta: Cover) -> Cover:
    """Cover by pairwise intersections; empty intersections are dropped."""
    if alpha.complex is not beta.complex:
        raise UsageError("join requires covers on the same complex")
    members = []
    for a in alpha.elements:
        for b in beta.elements:
            inter = a.members & b.members
            if inter:
                members.append(inter)
    return cover(alpha.complex, members, validate=False)


def refines(beta: Cover, alpha: Cover) -> bool:
    """True when every element of beta sits inside some element of alpha."""
    if alpha.complex is not beta.complex:
        raise UsageError("refinement check requires covers on the same complex")
    return all(any(b.members <= a.members for a in alpha.elements) for b in beta.elements)


# ---------------------------------------------------------------------------
# Kuhn triangulations of grid cubes
# ---------------------------------------------------------------------------

def build_triangulated_cube(d: int, m: int, cap: int = DEFAULT_TOP_CAP) -> SimplicialComplex:
    """Kuhn triangulation of [0,1]^d at grid resolution m: d! * m^d top simplices."""
    if d < 1 or m < 1:
        raise ParameterError("need d >= 1 and m >= 1")
    n_tops = factorial(d) * m ** d
    if n_tops > cap:
        raise SizeCapError(f"{n_tops} top simplices exceed the cap {cap}")
    vert_index: dict[tuple[int, ...], int] = {}
    vertices: list[Point] = []

    def vid(g):
        i = vert_index.get(g)
        if i is None:
            i = len(vertices)
            vert_index[g] = i
            vertices.append(tuple(Fraction(c, m) for c in g))
        return i

    simplices = set()
    for cell in product(range(m), repeat=d):
        for perm in permutations(range(d)):
            chain = [tuple(cell)]
            for axis in perm:
                nxt = list(chain[-1])
                nxt[axis] += 1
                chain.append(tuple(nxt))
            top = tuple(sorted(vid(g) for g in chain))
            simplices.add(top)
            # all faces
            n = len(top)
            for mask in range(1, (1 << n) - 1):
                simplices.add(tuple(top[i] for i in range(n) if mask >> i & 1))
    return SimplicialComplex(vertices, simplices, dim=d, grid=m)


def point_carrier(K: SimplicialComplex, point):
    """Carrier simplex of a point of the cube, with its barycentric weights.

    Only valid on grid complexes built by build_triangulated_cube.  Returns
    (simplex id, tuple of positive Fractions summing to 1, aligned with the
    sorted vertex tuple of the simplex).
    """
    if K.grid is None:
        raise UsageError("carrier queries need a grid-built complex")
    m = K.grid
    d = K.dim
    x = [Fraction(c) for c in point]
    if len(x) != d or any(c < 0 or c > 1 for c in x):
        raise UsageError("point outside [0,1]^d")
    cell = []
    frac = []
    for c in x:
        k = int(c * m)
        if k == m:
            k = m - 1
        cell.append(k)
        frac.append(c * m - k)
    # sort axes by descending fractional part; staircase vertices of the Kuhn simplex
    order = sorted(range(d), key=lambda i: (-frac[i], i))
    chain = [tuple(cell)]
    for axis in order:
        nxt = list(chain[-1])
        nxt[axis] += 1
        chain.append(tuple(nxt))
    ys = [frac[order[k]] for k in range(d)]
    lams = [1 - ys[0] if d else Fraction(1)]
    for k in range(1, d):
        lams.append(ys[k - 1] - ys[k])
    if d:
        lams.append(ys[d - 1])
    vids = []
    for g in chain:
        key = tuple(Fraction(c, m) for c in g)
        # vertex lookup by coordinates
        vids.append(_vertex_id(K, key))
    carrier = [(v, lam) for v, lam in zip(vids, lams) if lam > 0]
    carrier.sort()
    sids = tuple(v for v, _ in carrier)
    sid = K.index.get(sids)
    if sid is None:
        raise UsageError("point carrier not in complex")
    return sid, tuple(lam for _, lam in carrier)


def _vertex_id(K: SimplicialComplex, coords) -> int:
    cache = getattr(K, "_vcache", None)
    if cache is None:
        cache = {v: i for i, v in enumerate(K.vertices)}
        K._vcache = cache
    return cache[tuple(Fraction(c) for c in coords)]


def kuhn_carrier(point, m: int):
    """Carrier simplex of a cube point at grid resolution m, standalone.

    Returns (vertices, weights): the carrier's vertices as integer grid tuples
    (sorted) with their positive barycentric weights.  Same construction as
    point_carrier but without a complex, so it scales to high dimensions.
    """
    x = [Fraction(c) for c in point]
    d = len(x)
    if any(c < 0 or c > 1 for c in x):
        raise UsageError("point outside the cube")
    cell, frac = [], []
    for c in x:
        k = int(c * m)
        if k == m:
            k = m - 1
        cell.append(k)
        frac.append(c * m - k)
    order = sorted(range(d), key=lambda i: (-frac[i], i))
    chain = [tuple(cell)]
    for a in order:
        nxt = list(chain[-1])
        nxt[a] += 1
        chain.append(tuple(nxt))
    ys = [frac[order[k]] for k in range(d)]
    lams = [1 - ys[0]] if d else [Fraction(1)]
    for k in range(1, d):
        lams.append(ys[k - 1] - ys[k])
    if d:
        lams.append(ys[d - 1])
    pairs = sorted((g, lam) for g, lam in zip(chain, lams) if lam > 0)
    return tuple(g for g, _ in pairs), tuple(lam for _, lam in pairs)


def kuhn_star_radius(point, m: int) -> Fraction:
    """Positive sup-metric radius around a cube point inside which every
    point's carrier contains this point's carrier.

    Within the open star, membership in any upward-closed set can only grow,
    which is what perturbation arguments need.  The bound is the minimum over
    nearby closed simplices not containing the carrier of an exact separating
    halfspace distance (sup-metric distance to a halfspace a.x <= b is the
    violation divided by the l1 norm of a).
    """
    from itertools import permutations as _perms, product as _prod
    p = [Fraction(c) for c in point]
    d = len(p)
    carrier, _ = kuhn_carrier(point, m)
    carrier = set(carrier)
    cell_ranges = []
    for c in p:
        ks = set()
        for k in range(max(0, int(c * m) - 1), min(m - 1, int(c * m)) + 1):
            if Fraction(k, m) <= c <= Fraction(k + 1, m):
                ks.add(k)
        cell_ranges.append(sorted(ks))
    best = None

    def consider(b):
        nonlocal best
        if b > 0 and (best is None or b < best):
            best = b

    for cell in _prod(*cell_ranges):
        y = [p[i] * m - cell[i] for i in range(d)]
        for pi in _perms(range(d)):
            chain = [tuple(cell)]
            for a in pi:
                nxt = list(chain[-1])
                nxt[a] += 1
                chain.append(tuple(nxt))
            top = set(chain)
            ys = [y[pi[k]] for k in range(d)]
            lams = [1 - ys[0]] + [ys[k - 1] - ys[k] for k in range(1, d)] + [ys[d - 1]]
            norms = [Fraction(m)] + [Fraction(2 * m)] * (d - 1) + [Fraction(m)]
            if carrier <= top:
                # faces dropping a carrier vertex are separated by its
                # vanishing barycentric coordinate
                for j, g in enumerate(chain):
                    if g in carrier:
                        consider(Fraction(lams[j]) / norms[j])
            else:
                # the whole closed top simplex avoids the point; its most
                # violated facet halfspace separates
                worst = Fraction(0)
                for j, lam in enumerate(lams):
                    if lam < 0:
                        worst = max(worst, -Fraction(lam) / norms[j])
                consider(worst)
    # everything beyond the adjacent cells is at least one wall away
    outer = None
    for i, c in enumerate(p):
        ks = cell_ranges[i]
        lo = Fraction(ks[0], m)
        hi = Fraction(ks[-1] + 1, m)
        for dist in (c - lo if lo > 0 else None, hi - c if hi < 1 else None):
            if dist is not None and dist > 0 and (outer is None or dist < outer):
                outer = dist
    if outer is not None:
        consider(outer)
    if best is None:
        raise UsageError("no positive star radius found")
    return best


# ---------------------------------------------------------------------------
# Barycentric subdivision
# ---------------------------------------------------------------------------

def barycentric_subdivide(K: SimplicialComplex, sets=(), restriction: Restriction | None = None,
                          cap: int = 2_000_000):
    """Barycentric subdivision Sd(K) together with exact pushforwards.

    Vertices of Sd(K) are the barycenters of simplices of K (vertex id equals
    the source simplex id); simplices are inclusion chains.  An upward-closed
    set S pushes to the chains whose top lies in S, which describes the same
    point set.  Restrictions push the same way with their kind preserved.

    Returns (Sd(K), [pushed sets...]) or (Sd(K), [pushed sets...], pushed
    restriction) when a restriction is supplied.
    """
    n = K.n_simplices()
    faces_strict = [tuple(_strict_faces(K, sid)) for sid in range(n)]
    chains: list[tuple[int, ...]] = []
    # chains_with_top[sid] not materialized; enumerate by DFS over face poset
    memo: dict[int, tuple[tuple[int, ...], ...]] = {}

    def chains_top(sid):
        got = memo.get(sid)
        if got is not None:
            return got
        out = [(sid,)]
        for f in faces_strict[sid]:
            for c in chains_top(f):
                out.append(c + (sid,))
        memo[sid] = tuple(out)
        return memo[sid]

    all_chains = []
    for sid in range(n):
        all_chains.extend(chains_top(sid))
        if len(all_chains) > cap:
            raise SizeCapError("subdivision exceeds the simplex cap")
    verts = [K.barycenter(sid) for sid in range(n)]
    sd = SimplicialComplex(verts, all_chains, dim=K.dim, grid=None)
    pushed = [open_set(sd, frozenset(sd.index[tuple(sorted(c))] for c in all_chains
                                     if max(c, key=lambda s: len(K.simplices[s])) in S.members),
                       validate=False)
              for S in sets]
    if restriction is None:
        return sd, pushed
    return sd, pushed, _push_restriction(K, sd, all_chains, restriction)


def _strict_faces(K: SimplicialComplex, sid):
    s = K.simplices[sid]
    n = len(s)
    for mask in range(1, (1 << n) - 1):
        yield K.index[tuple(s[i] for i in range(n) if mask >> i & 1)]


def _chain_top(K: SimplicialComplex, chain):
    return max(chain, key=lambda s: len(K.simplices[s]))


def _push_restriction(K, sd, all_chains, Y: Restriction) -> Restriction:
    if Y.kind in ("whole", "empty"):
        return Y
    members = frozenset(sd.index[tuple(sorted(c))] for c in all_chains
                        if _chain_top(K, c) in Y.payload)
    return Restriction(Y.kind, members)


def subdivide_instance(alpha: Cover, Y: Restriction, level: int):
    """Push a cover and restriction through `level` subdivisions."""
    K = alpha.complex
    sets = list(alpha.elements)
    for _ in range(level):
        K, sets, Y = barycentric_subdivide(K, sets, Y)
    if level:
        alpha = Cover(K, tuple(sets))
    return alpha, Y


def carrier_in_subdivided(K: SimplicialComplex, sd: SimplicialComplex, sid: int, weights):
    """Carrier chain in Sd(K) of the point with the given carrier in K.

    Grouping the barycentric weights by value, the cumulative argmax groups
    form the chain; returns (chain simplex id in sd, weights).
    """
    s = K.simplices[sid]
    pairs = sorted(zip(weights, s), key=lambda p: (-p[0], p[1]))
    chain = []
    chain_weights = []
    i = 0
    acc = []
    while i < len(pairs):
        j = i
        while j < len(pairs) and pairs[j][0] == pairs[i][0]:
            acc.append(pairs[j][1])
            j += 1
        cum = tuple(sorted(acc))
        cid = K.index[cum]
        nxt_w = pairs[j][0] if j < len(pairs) else Fraction(0)
        w = (pairs[i][0] - nxt_w) * len(cum)
        if w > 0:
            chain.append(cid)
            chain_weights.append(w)
        i = j
    chain_sid = sd.index[tuple(sorted(chain))]
    return chain_sid, tuple(chain_weights)


# ---------------------------------------------------------------------------
# Simplicial maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplicialMap:
    """Vertex map inducing a simplicial map between complexes.

    Images of simplices must be simplices of the target.  ``surjective``
    reports whether every target simplex is an image, which is what the
    pullback inequalities are stated for.
    """

    source: SimplicialComplex
    target: SimplicialComplex
    vertex_map: tuple

    def __post_init__(self):
        if len(self.vertex_map) != len(self.source.vertices):
            raise ValidationError("vertex map has wrong length")
        for s in self.source.simplices:
            img = tuple(sorted({self.vertex_map[v] for v in s}))
            if img not in self.target.index:
                raise ValidationError(f"image of simplex {s} is not a target simplex")

    def image_simplex(self, sid: int) -> int:
        s = self.source.simplices[sid]
        return self.target.index[tuple(sorted({self.vertex_map[v] for v in s}))]

    def is_surjective(self) -> bool:
        images = {self.image_simplex(sid) for sid in range(self.source.n_simplices())}
        return len(images) == self.target.n_simplices()

    def pullback_set(self, S: OpenSimplexSet) -> OpenSimplexSet:
        members = frozenset(sid for sid in range(self.source.n_simplices())
                            if self.image_simplex(sid) in S.members)
        return open_set(self.source, members, validate=False)

    def pullback_cover(self, alpha: Cover) -> Cover:
        return Cover(self.source, tuple(self.pullback_set(el) for el in alpha.elements))

    def pullback_restriction(self, Y: Restriction) -> Restriction:
        if Y.kind in ("whole", "empty"):
            return Y
        members = frozenset(sid for sid in range(self.source.n_simplices())
                            if self.image_simplex(sid) in Y.payload)
        return Restriction(Y.kind, members)


def coordinate_projection(K: SimplicialComplex, K_target: SimplicialComplex, axes) -> SimplicialMap:
    """Projection of a grid cube complex onto the cube spanned by the given axes."""
    if K.grid is None or K_target.grid is None or K.grid != K_target.grid:
        raise UsageError("projection needs grid complexes at equal resolution")
    vmap = []
    for v in K.vertices:
        coords = tuple(v[a] for a in axes)
        vmap.append(_vertex_id(K_target, coords))
    return SimplicialMap(K, K_target, tuple(vmap))


# ---------------------------------------------------------------------------
# Box covers
# ---------------------------------------------------------------------------

def axis(lo, hi, closed_lo=False, closed_hi=False):
    """One box axis: the interval from lo to hi, open unless closed at a cube face."""
    lo, hi = Fraction(lo), Fraction(hi)
    return (lo, hi, bool(closed_lo), bool(closed_hi))


@dataclass(frozen=True)
class BoxCover:
    """Cover of [0,1]^d by unions of relatively-open grid boxes.

    A box is a tuple of per-axis intervals (lo, hi, closed_lo, closed_hi) with
    grid-aligned endpoints.  An end may be closed only where it touches the
    cube boundary (lo == 0 or hi == 1), so every box is open in [0,1]^d.
    An element is a tuple of boxes; their union may merge across shared faces.
    """

    dim: int
    m: int
    elements: tuple  # tuple of tuples of boxes

    def __post_init__(self):
        for el in self.elements:
            if not el:
                raise ValidationError("empty box cover element")
            for box in el:
                if len(box) != self.dim:
                    raise ValidationError("box dimension mismatch")
                for lo, hi, clo, chi in box:
                    if not (0 <= lo < hi <= 1):
                        raise ValidationError("box bounds must satisfy 0 <= lo < hi <= 1")
                    if (clo and lo != 0) or (chi and hi != 1):
                        raise ValidationError("closed box ends are only allowed on the cube boundary")
                    if (lo * self.m).denominator != 1 or (hi * self.m).denominator != 1:
                        raise ValidationError("box endpoints must be grid aligned")
        if not self._covers():
            raise ValidationError("box elements do not cover the cube")

    def _covers(self) -> bool:
        # membership of a relatively-open grid box is constant on half-grid cells
        half = [Fraction(k, 2 * self.m) for k in range(2 * self.m + 1)]
        return all(any(box_union_contains(el, pt) for el in self.elements)
                   for pt in product(half, repeat=self.dim))

    def __len__(self):
        return len(self.elements)


def box_contains(box, point) -> bool:
    for (lo, hi, clo, chi), x in zip(box, point):
        ok_lo = x > lo or (clo and x == lo)
        ok_hi = x < hi or (chi and x == hi)
        if not (ok_lo and ok_hi):
            return False
    return True


def box_union_contains(el, point) -> bool:
    return any(box_contains(b, point) for b in el)


def interval_cover(m: int, pieces) -> BoxCover:
    """1-D box cover from per-element axis lists built with :func:`axis`."""
    elements = tuple(tuple((ax,) for ax in el) for el in pieces)
    return BoxCover(1, m, elements)


def distinguishing_interval_cover(m: int = 2) -> BoxCover:
    """The 2-cover {[0,1), (0,1]} of the interval: one element misses 1, the other 0."""
    return interval_cover(m, [[axis(0, 1, closed_lo=True)], [axis(0, 1, closed_hi=True)]])


def product_cover(alpha: BoxCover, n: int, cap: int = 4096) -> BoxCover:
    """n-fold product cover on [0,1]^{n*d}: all products of elements."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if len(alpha.elements) ** n > cap:
        raise SizeCapError("product cover has too many elements")
    if n == 1:
        return alpha
    elements = []
    for combo in product(alpha.elements, repeat=n):
        boxes = tuple(tuple(ax for b in boxes_combo for ax in b)
                      for boxes_combo in product(*combo))
        elements.append(boxes)
    return BoxCover(alpha.dim * n, alpha.m, tuple(elements))


def box_cover_to_cover(alpha: BoxCover, K: SimplicialComplex) -> Cover:
    """Exact conversion: a simplex belongs to an element iff its barycenter does."""
    if K.grid is None or K.dim != alpha.dim:
        raise UsageError("conversion needs a grid complex of matching dimension")
    if K.grid % alpha.m:
        raise UsageError("complex resolution must be divisible by the box grid")
    members = []
    for el in alpha.elements:
        ids = frozenset(sid for sid in range(K.n_simplices())
                        if box_union_contains(el, K.barycenter(sid)))
        members.append(ids)
    return cover(K, members, validate=False)


# ---------------------------------------------------------------------------
# Serialization (canonical, byte-stable structured text)
# ---------------------------------------------------------------------------

def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def complex_to_obj(K: SimplicialComplex):
    return {
        "kind": "complex",
        "dim": K.dim,
        "grid": K.grid,
        "vertices": [[frac_str(c) for c in v] for v in K.vertices],
        "simplices": [list(s) for s in K.simplices],
    }


def complex_from_obj(obj) -> SimplicialComplex:
    if obj.get("kind") != "complex":
        raise ValidationError("not a complex object")
    verts = [tuple(parse_frac(c) for c in v) for v in obj["vertices"]]
    return SimplicialComplex(verts, [tuple(s) for s in obj["simplices"]],
                             dim=obj["dim"], grid=obj.get("grid"))


def open_set_to_obj(S: OpenSimplexSet):
    return {"kind": "open_set", "simplices": sorted(S.members)}


def cover_to_obj(alpha: Cover):
    return {"kind": "cover", "elements": [sorted(el.members) for el in alpha.elements]}


def cover_from_obj(obj, K: SimplicialComplex) -> Cover:
    if obj.get("kind") != "cover":
        raise ValidationError("not a cover object")
    return cover(K, [frozenset(e) for e in obj["elements"]])

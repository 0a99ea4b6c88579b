"""Symbolic subshifts of [0,1]^Z, window projections and metrics.

A subshift descriptor presents a closed shift-invariant subset of the full
shift on the interval alphabet.  Its length-n window projection is realized on
the Kuhn triangulation of [0,1]^n as a restriction: the whole cube for the
full shift, the main-diagonal edge path for trivially-acted constants, unions
of block subcubes plus fixed vertices for shifts glued from a compact set.

The window estimator divides the minimized cover order of the n-fold product
cover, restricted to the window, by n.  For the integers the window sets
[0..n-1] are the invariance sets the limit is taken along.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .complexes import (
    BoxCover,
    Cover,
    NEG_INF,
    Restriction,
    SimplicialComplex,
    box_cover_to_cover,
    build_triangulated_cube,
    coordinate_projection,
    down_closure,
    product_cover,
    frac_str,
    parse_frac,
)
from .errors import ParameterError, UsageError, ValidationError
from . import optimizer


# ---------------------------------------------------------------------------
# Descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubshiftDescriptor:
    """Closed shift-invariant subset of [0,1]^Z, by construction.

    variants:
      full        - the full shift on [0,1]
      trivial     - constant sequences with the (trivial) shift action
      block       - the full shift on a closed subinterval [lo, hi]
      psi         - fixed points over a compact set plus full-shift blocks over
                    the closures of its contiguous intervals (see constructions)
    """

    variant: str
    lo: Fraction = Fraction(0)
    hi: Fraction = Fraction(1)
    compact_set: object = None  # CompactSetDescriptor for the psi variant

    def __post_init__(self):
        if self.variant not in ("full", "trivial", "block", "psi"):
            raise ValidationError(f"unknown subshift variant {self.variant!r}")
        if not (0 <= self.lo < self.hi <= 1):
            raise ValidationError("block bounds must satisfy 0 <= lo < hi <= 1")
        if self.variant == "psi" and self.compact_set is None:
            raise ValidationError("psi variant needs a compact set descriptor")

    def to_obj(self):
        obj = {"variant": self.variant}
        if self.variant == "block":
            obj["lo"] = frac_str(self.lo)
            obj["hi"] = frac_str(self.hi)
        if self.variant == "psi":
            obj["compact_set"] = self.compact_set.to_obj()
        return obj


def full_shift() -> SubshiftDescriptor:
    return SubshiftDescriptor("full")


def trivial_action() -> SubshiftDescriptor:
    return SubshiftDescriptor("trivial")


def block_shift(lo, hi) -> SubshiftDescriptor:
    return SubshiftDescriptor("block", Fraction(lo), Fraction(hi))


def descriptor_from_obj(obj) -> SubshiftDescriptor:
    variant = obj["variant"]
    if variant == "block":
        return block_shift(parse_frac(obj["lo"]), parse_frac(obj["hi"]))
    if variant == "psi":
        from .constructions import compact_set_from_obj, psi
        return psi(compact_set_from_obj(obj["compact_set"]))
    return SubshiftDescriptor(variant)


# ---------------------------------------------------------------------------
# Window projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowComponent:
    """A product piece of a window set: the same 1-D closed interval in every
    coordinate (degenerate for fixed points)."""

    lo: Fraction
    hi: Fraction  # hi == lo encodes a single diagonal point


@dataclass(frozen=True)
class WindowProjection:
    descriptor: SubshiftDescriptor
    n: int
    m: int
    complex: SimplicialComplex
    restriction: Restriction
    components: tuple  # WindowComponent pieces describing the same point set


def _snap(x: Fraction, m: int, strict: bool):
    snapped = Fraction(round(x * m), m)
    if snapped != x and strict:
        raise UsageError(f"value {x} is not aligned to grid 1/{m}")
    return min(max(snapped, Fraction(0)), Fraction(1))


def window_components(X: SubshiftDescriptor, m: int, strict: bool = False):
    """1-D pieces whose n-fold diagonal products make up the window set."""
    if X.variant == "full":
        return (WindowComponent(Fraction(0), Fraction(1)),)
    if X.variant == "trivial":
        return tuple(WindowComponent(Fraction(k, m), Fraction(k, m)) for k in range(m + 1))
    if X.variant == "block":
        lo, hi = _snap(X.lo, m, strict), _snap(X.hi, m, strict)
        if lo >= hi:
            raise UsageError("block degenerates at this grid resolution")
        return (WindowComponent(lo, hi),)
    if X.variant == "psi":
        from .constructions import psi_window_components
        return psi_window_components(X.compact_set, m, strict)
    raise UsageError(f"no window rule for {X.variant}")


def _cube_vertices_in(K: SimplicialComplex, lo: Fraction, hi: Fraction):
    return [v for v in range(len(K.vertices))
            if all(lo <= c <= hi for c in K.vertices[v])]


def window_projection(X: SubshiftDescriptor, n: int, m: int, strict: bool = False,
                      cap: int = 200_000) -> WindowProjection:
    """Realize the projection of X onto n consecutive coordinates at grid m."""
    if n < 1 or m < 1:
        raise ParameterError("need n >= 1 and m >= 1")
    K = build_triangulated_cube(n, m, cap=cap)
    comps = window_components(X, m, strict)
    if X.variant == "full":
        return WindowProjection(X, n, m, K, Restriction.whole(), comps)
    if X.variant == "trivial":
        members = set()
        for k in range(m + 1):
            members.add(K.index[(_diag_vertex(K, k, m),)])
        for k in range(m):
            e = tuple(sorted((_diag_vertex(K, k, m), _diag_vertex(K, k + 1, m))))
            members.add(K.index[e])
        return WindowProjection(X, n, m, K,
                                Restriction.closed_subcomplex(K, members), comps)
    # unions of diagonal product pieces: blocks become subcubes, points vertices
    members = set()
    for comp in comps:
        if comp.lo == comp.hi:
            k = comp.lo * m
            if k.denominator == 1:
                members.add(K.index[(_diag_vertex(K, int(k), m),)])
            continue
        inside = set(_cube_vertices_in(K, comp.lo, comp.hi))
        for sid, s in enumerate(K.simplices):
            if all(v in inside for v in s):
                members.add(sid)
    if not members:
        raise UsageError("window set is empty at this grid resolution")
    return WindowProjection(X, n, m, K, Restriction.closed_subcomplex(K, members), comps)


def _diag_vertex(K: SimplicialComplex, k: int, m: int) -> int:
    from .complexes import _vertex_id
    return _vertex_id(K, tuple(Fraction(k, m) for _ in range(K.dim)))


def check_window_consistency(X: SubshiftDescriptor, n: int, m: int) -> dict:
    """Projection and shift-shear consistency of consecutive windows.

    Forgetting the last coordinate must map the window-(n+1) restriction onto
    the window-n one; forgetting the first coordinate must do the same, which
    is the finite-window reflection of shift invariance.
    """
    big = window_projection(X, n + 1, m)
    small = window_projection(X, n, m)
    report = {}
    for name, axes in (("drop_last", tuple(range(n))), ("drop_first", tuple(range(1, n + 1)))):
        proj = coordinate_projection(big.complex, small.complex, axes)
        admitted_big = set(big.restriction.admitted(big.complex))
        image = {proj.image_simplex(sid) for sid in admitted_big}
        admitted_small = set(small.restriction.admitted(small.complex))
        report[name] = image == admitted_small
    report["ok"] = report["drop_last"] and report["drop_first"]
    return report


# ---------------------------------------------------------------------------
# Window estimator
# ---------------------------------------------------------------------------

def window_mdim_estimates(X: SubshiftDescriptor, alpha: BoxCover, n_max: int,
                          level: int = 0, m: int | None = None, strict: bool = False,
                          mode: str = "exact", cap: int = 200_000):
    """Per-window mean dimension estimates: minimized order of the n-fold
    product cover restricted to the window projection, divided by n."""
    if alpha.dim != 1:
        raise UsageError("the alphabet cover must live on [0,1]")
    if m is None:
        m = alpha.m
    out = []
    for n in range(1, n_max + 1):
        win = window_projection(X, n, m, strict=strict, cap=cap)
        cov = box_cover_to_cover(product_cover(alpha, n), win.complex)
        res = optimizer.dee_hat(cov, win.restriction, level, mode)
        value = res.value if res.value == NEG_INF else Fraction(res.value, n)
        out.append({"n": n, "value": value, "exact": res.exact, "level": level})
    return out


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncatedMetric:
    """Weighted sup metric on truncated sequences: weight 2^-|g| at offset g.

    Within radius R of the full compatible product metric; truncation error is
    bounded by 2^-R.
    """

    radius: int

    def weight(self, g: int) -> Fraction:
        return Fraction(1, 2 ** abs(g))

    def distance(self, x, y) -> Fraction:
        """x, y: mappings offset -> value for |offset| <= radius."""
        best = Fraction(0)
        for g in range(-self.radius, self.radius + 1):
            d = self.weight(g) * abs(Fraction(x[g]) - Fraction(y[g]))
            if d > best:
                best = d
        return best

    def window_distance(self, x, y) -> Fraction:
        """Same weights on a one-sided window tuple (coordinate i gets 2^-i)."""
        best = Fraction(0)
        for i, (a, b) in enumerate(zip(x, y)):
            d = Fraction(1, 2 ** i) * abs(Fraction(a) - Fraction(b))
            if d > best:
                best = d
        return best


@dataclass(frozen=True)
class HausdorffEstimate:
    value: Fraction
    resolution: int
    window: int


def hausdorff_point_sets(P, Q, weights=None) -> Fraction:
    """Exact Hausdorff distance between finite point sets (tuples of rationals).

    Coordinates are compared in the weighted sup metric; default weights are 1
    (the alphabet metric in one dimension)."""
    P = [tuple(Fraction(c) for c in p) for p in P]
    Q = [tuple(Fraction(c) for c in q) for q in Q]
    if not P or not Q:
        raise UsageError("Hausdorff distance needs nonempty sets")
    if weights is None:
        weights = tuple(Fraction(1) for _ in P[0])

    def dist(a, b):
        return max(w * abs(x - y) for w, x, y in zip(weights, a, b))

    def directed(A, B):
        return max(min(dist(a, b) for b in B) for a in A)

    return max(directed(P, Q), directed(Q, P))


def _interval_dist(x: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    if x < lo:
        return lo - x
    if x > hi:
        return x - hi
    return Fraction(0)


def _expansion_covers(components, targets, r, weights) -> bool:
    """Does the union of targets expanded by r (weighted sup) contain every
    component box?  All sets are axis-aligned products of intervals, so
    membership is constant on the cells of the coordinate arrangement and
    checking representative points is exact."""
    n = len(weights)
    expanded = []
    for t in targets:
        box = []
        for i in range(n):
            pad = r / weights[i]
            box.append((t.lo - pad, t.hi + pad))
        expanded.append(box)
    for comp in components:
        cuts = []
        for i in range(n):
            vals = {comp.lo, comp.hi}
            for box in expanded:
                for b in box[i]:
                    if comp.lo <= b <= comp.hi:
                        vals.add(b)
            vals = sorted(vals)
            reps = list(vals)
            for a, b in zip(vals, vals[1:]):
                reps.append((a + b) / 2)
            cuts.append(sorted(set(reps)))
        from itertools import product as iproduct
        for pt in iproduct(*cuts):
            if not any(all(lo <= x <= hi for x, (lo, hi) in zip(pt, box))
                       for box in expanded):
                return False
    return True


def window_set_hausdorff(A_comps, B_comps, n: int, m: int,
                         weighted: bool = True) -> HausdorffEstimate:
    """Exact Hausdorff distance between two window sets.

    Window sets are unions of diagonal product components (each component the
    n-fold product of one closed interval).  The directed distance is the
    least r whose weighted-sup expansion of one side covers the other; the
    optimum is attained among weighted boundary differences and their halves,
    so it is found exactly by a decision search over that candidate set.
    """
    weights = tuple(Fraction(1, 2 ** i) if weighted else Fraction(1) for i in range(n))

    def candidate_radii(src, dst):
        bounds_src = sorted({b for c in src for b in (c.lo, c.hi)})
        bounds_dst = sorted({b for c in dst for b in (c.lo, c.hi)})
        out = {Fraction(0)}
        for w in set(weights):
            for b in bounds_dst:
                for a in bounds_src:
                    out.add(abs(a - b) * w)
                for b2 in bounds_dst:
                    out.add(abs(b2 - b) * w / 2)
        return sorted(out)

    def directed(src, dst):
        cand = candidate_radii(src, dst)
        lo, hi = 0, len(cand) - 1
        if not _expansion_covers(src, dst, cand[hi], weights):
            raise AssertionError("maximal candidate radius must cover")
        while lo < hi:
            mid = (lo + hi) // 2
            if _expansion_covers(src, dst, cand[mid], weights):
                hi = mid
            else:
                lo = mid + 1
        return cand[lo]

    value = max(directed(A_comps, B_comps), directed(B_comps, A_comps))
    return HausdorffEstimate(value, m, n)

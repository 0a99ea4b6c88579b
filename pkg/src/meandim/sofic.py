"""Sofic approximations, microstate spaces, and the sofic estimators.

A sofic approximation assigns permutations of [n] to finitely many group
elements; for the integers the cyclic model v -> v+g mod n is an exact
homomorphism.  A microstate maps [n] to truncated grid points of the shift
space; its defect against g is the root mean square of truncated-metric
distances between acting on the model side and acting on the space side.
Map collects microstates with all defects at most delta, Map' those with all
defects strictly below.

The estimators replace the intractable microstate spaces by realizations:
  periodic-family - full shift with a cyclic model: the embedded n-cube of
      defect-zero orbit microstates, identified with [0,1]^n by coordinate 0
      evaluation (an exact family, giving the cube optimizer instance);
  grid-tube       - trivial action: exhaustive enumeration of constant
      microstates on the microstate grid, defect-filtered (exhaustive on the
      grid, a lower bound against the full tube);
  sampled         - anything else: seeded random window samples plus the
      defect-zero structured families, flagged as a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from .complexes import (
    BoxCover,
    Cover,
    NEG_INF,
    Restriction,
    box_cover_to_cover,
    box_union_contains,
    build_triangulated_cube,
    kuhn_carrier,
    point_carrier,
    product_cover,
)
from .errors import ParameterError, SizeCapError, UsageError, ValidationError
from .shifts import SubshiftDescriptor, TruncatedMetric
from . import optimizer


# ---------------------------------------------------------------------------
# Sofic approximations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SoficApproximation:
    """Finitely supported assignment g -> permutation of range(n)."""

    n: int
    perms: dict
    cyclic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "perms", dict(self.perms))
        for g, p in self.perms.items():
            if sorted(p) != list(range(self.n)):
                raise ValidationError(f"assignment for {g} is not a permutation of [{self.n}]")
        if 0 in self.perms and tuple(self.perms[0]) != tuple(range(self.n)):
            raise ValidationError("the identity element must map to the identity permutation")

    @property
    def support(self):
        return tuple(sorted(self.perms))

    def apply(self, g: int, v: int) -> int:
        if g not in self.perms:
            raise UsageError(f"{g} is outside the model support")
        return self.perms[g][v]


def cyclic_approximation(n: int, k: int) -> SoficApproximation:
    """The rotation model for the integers: s(g) v = v + g mod n, |g| <= k."""
    if n <= 2 * k:
        raise ParameterError("need n > 2k; smaller models collapse distinct shifts")
    perms = {g: tuple((v + g) % n for v in range(n)) for g in range(-k, k + 1)}
    return SoficApproximation(n, perms, cyclic=True)


def approximation_quality(s: SoficApproximation, F, product_fn=None) -> dict:
    """Per-pair multiplicativity and freeness fractions, exact rationals.

    product_fn(g, g') defaults to integer addition.  Needs s's support to
    contain F and all products of pairs from F.
    """
    if product_fn is None:
        product_fn = lambda g, h: g + h
    F = sorted(set(F))
    mult, free = {}, {}
    for g in F:
        for h in F:
            gh = product_fn(g, h)
            if gh not in s.perms or g not in s.perms or h not in s.perms:
                raise UsageError(f"support lacks {g}, {h} or their product {gh}")
            good = sum(1 for v in range(s.n)
                       if s.apply(gh, v) == s.apply(g, s.apply(h, v)))
            mult[(g, h)] = Fraction(good, s.n)
            if g != h:
                diff = sum(1 for v in range(s.n) if s.apply(g, v) != s.apply(h, v))
                free[(g, h)] = Fraction(diff, s.n)
    return {"multiplicativity": mult, "freeness": free, "n": s.n}


def load_permutation_model(text: str):
    """Parse the permutation-model format.

    Line 1: ``n <size>``.  Then one line per element, ``g: i0 i1 ... i_{n-1}``
    (0-based image list).  Optional ``product g h gh`` lines declare the
    multiplication table for non-integer groups; without them products are
    integer sums.  Returns (model, product_fn).
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("n "):
        raise ValidationError("model file must start with 'n <size>'")
    n = int(lines[0].split()[1])
    perms = {}
    table = {}
    for ln in lines[1:]:
        if ln.startswith("product "):
            _, g, h, gh = ln.split()
            table[(int(g), int(h))] = int(gh)
            continue
        head, _, rest = ln.partition(":")
        images = tuple(int(t) for t in rest.split())
        if len(images) != n:
            raise ValidationError(f"permutation for {head} has wrong length")
        perms[int(head)] = images
    model = SoficApproximation(n, perms)
    product_fn = (lambda g, h: table[(g, h)]) if table else None
    return model, product_fn


# ---------------------------------------------------------------------------
# Microstates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Microstate:
    """phi: range(n) -> truncated points, entries indexed by offsets -R..R."""

    entries: tuple  # per v: tuple of 2R+1 Fractions
    radius: int
    grid: int

    def value(self, v: int, offset: int) -> Fraction:
        if abs(offset) > self.radius:
            raise ParameterError("offset beyond the stored truncation radius")
        return self.entries[v][offset + self.radius]

    @property
    def n(self) -> int:
        return len(self.entries)

    def projection(self):
        """Coordinate-0 evaluation: the window-cube point of this microstate."""
        return tuple(e[self.radius] for e in self.entries)


def constant_microstate(values, radius: int, grid: int) -> Microstate:
    entries = tuple(tuple(Fraction(a) for _ in range(2 * radius + 1)) for a in values)
    return Microstate(entries, radius, grid)


def periodic_microstate(z, radius: int, grid: int) -> Microstate:
    """Orbit microstate of the n-periodic sequence with block z.

    phi(v) at offset h is z[(v - h) mod n]; with the cyclic model this is an
    exact intertwiner, so every defect vanishes, and coordinate-0 evaluation
    returns z itself.
    """
    z = [Fraction(a) for a in z]
    n = len(z)
    entries = tuple(tuple(z[(v - h) % n] for h in range(-radius, radius + 1))
                    for v in range(n))
    return Microstate(entries, radius, grid)


def shifted_entry(entry, g: int, radius_out: int, radius_in: int):
    """The g-action on a truncated point: offset h reads the entry at h - g."""
    if radius_in < radius_out + abs(g):
        raise ParameterError(
            f"stored radius {radius_in} too small for shift by {g} at radius {radius_out}")
    return tuple(entry[(h - g) + radius_in] for h in range(-radius_out, radius_out + 1))


def defect_squared_mean(phi: Microstate, g: int, s: SoficApproximation,
                        metric: TruncatedMetric) -> Fraction:
    """Mean squared truncated-metric defect of phi against g (exact rational).

    The defect itself is the square root; comparisons against delta are done
    on squares to stay exact.
    """
    R = metric.radius
    total = Fraction(0)
    for v in range(phi.n):
        left = tuple(phi.value(s.apply(g, v), h) for h in range(-R, R + 1))
        right = shifted_entry(phi.entries[v], g, R, phi.radius)
        d = Fraction(0)
        for h in range(-R, R + 1):
            cand = Fraction(1, 2 ** abs(h)) * abs(left[h + R] - right[h + R])
            if cand > d:
                d = cand
        total += d * d
    return total / phi.n


def microstate_defect(phi: Microstate, g: int, s: SoficApproximation,
                      metric: TruncatedMetric) -> float:
    return math.sqrt(defect_squared_mean(phi, g, s, metric))


@dataclass(frozen=True)
class EstimatorParams:
    F: tuple = (-1, 0, 1)
    delta: Fraction = Fraction(1, 10)
    radius: int = 4
    m: int = 4          # microstate grid
    level: int = 0      # optimizer level
    strict: bool = False  # Map' (strict <) instead of Map
    samples: int = 200

    def __post_init__(self):
        object.__setattr__(self, "F", tuple(sorted(set(int(g) for g in self.F))))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not self.F:
            raise ValidationError("F must be nonempty")


def in_map(phi: Microstate, params: EstimatorParams, s: SoficApproximation,
           strict: bool | None = None) -> bool:
    """Membership in Map (defects <= delta) or Map' (strictly below)."""
    strict = params.strict if strict is None else strict
    metric = TruncatedMetric(min(params.radius, phi.radius - max(abs(g) for g in params.F)))
    if metric.radius < 0:
        raise ParameterError("stored radius too small for this F")
    dsq = params.delta * params.delta
    for g in params.F:
        q = defect_squared_mean(phi, g, s, metric)
        if strict:
            if not q < dsq:
                return False
        else:
            if not q <= dsq:
                return False
    return True


def entry_in_window(X: SubshiftDescriptor, values) -> bool:
    """Is this truncated entry a window of some point of X?"""
    vals = [Fraction(v) for v in values]
    if any(v < 0 or v > 1 for v in vals):
        return False
    if X.variant == "full":
        return True
    if X.variant == "trivial":
        return len(set(vals)) == 1
    if X.variant == "block":
        return all(X.lo <= v <= X.hi for v in vals)
    if X.variant == "psi":
        from .constructions import contains, intervals_at_least
        if len(set(vals)) == 1 and contains(X.compact_set, vals[0]):
            return True
        lo, hi = min(vals), max(vals)
        grid = Fraction(1, 512)
        for j in intervals_at_least(X.compact_set, grid):
            jl, jh = j.closure()
            if jl <= lo and hi <= jh:
                return True
        return False
    raise UsageError(f"no window rule for {X.variant}")


def microstate_in_space(phi: Microstate, X: SubshiftDescriptor) -> bool:
    return all(entry_in_window(X, e) for e in phi.entries)


# ---------------------------------------------------------------------------
# Realizations of the microstate spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealizedMap:
    """A finite family of verified microstates standing in for Map or Map'."""

    kind: str  # periodic-family | grid-tube | sampled
    microstates: tuple
    exhaustive: bool  # True when the realization enumerates its candidate grid


def realize_trivial_tube(s: SoficApproximation, params: EstimatorParams,
                         strict: bool, cap: int = 2_000_000) -> RealizedMap:
    """All constant grid microstates within the defect tube, exhaustively."""
    n, m = s.n, params.m
    if (m + 1) ** n > cap:
        raise SizeCapError("trivial tube enumeration exceeds the cap")
    dsq = params.delta * params.delta
    F = [g for g in params.F if g != 0]
    kept = []
    for combo in iproduct(range(m + 1), repeat=n):
        ok = True
        for g in F:
            total = 0
            for v in range(n):
                diff = combo[s.apply(g, v)] - combo[v]
                total += diff * diff
            q = Fraction(total, n * m * m)
            if (strict and not q < dsq) or (not strict and not q <= dsq):
                ok = False
                break
        if ok:
            kept.append(constant_microstate([Fraction(c, m) for c in combo],
                                            params.radius, m))
    return RealizedMap("grid-tube", tuple(kept), exhaustive=True)


def _spawn_rng(seed: int, *path):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))


def realize_sampled(X: SubshiftDescriptor, s: SoficApproximation,
                    params: EstimatorParams, strict: bool, seed: int) -> RealizedMap:
    """Structured defect-zero families plus seeded random samples, verified."""
    rng = _spawn_rng(seed, s.n)
    n, m = s.n, params.m
    kept = []
    # structured candidates: fixed points, and (with a cyclic model) periodic
    # orbit microstates confined to a block
    blocks = []
    fixed = []
    if X.variant == "psi":
        from .constructions import intervals_at_least, point_list, is_finite_set
        blocks = [j.closure() for j in intervals_at_least(X.compact_set, Fraction(1, m))]
        if is_finite_set(X.compact_set):
            fixed = point_list(X.compact_set)
    elif X.variant == "block":
        blocks = [(X.lo, X.hi)]
    elif X.variant == "full":
        blocks = [(Fraction(0), Fraction(1))]
    for b in fixed:
        kept.append(constant_microstate([b] * n, params.radius, m))
    if s.cyclic:
        for lo, hi in blocks:
            choices = [Fraction(k, m) for k in range(m + 1) if lo <= Fraction(k, m) <= hi]
            if not choices:
                continue
            for _ in range(max(1, params.samples // max(1, len(blocks)))):
                z = [choices[int(rng.integers(0, len(choices)))] for _ in range(n)]
                kept.append(periodic_microstate(z, params.radius, m))
    # random grid samples, defect-filtered
    for _ in range(params.samples):
        entries = []
        for _v in range(n):
            vals = [Fraction(int(rng.integers(0, m + 1)), m)
                    for _ in range(2 * params.radius + 1)]
            entries.append(tuple(vals))
        phi = Microstate(tuple(entries), params.radius, m)
        if microstate_in_space(phi, X) and in_map(phi, params, s, strict):
            kept.append(phi)
    verified = []
    seen = set()
    for phi in kept:
        if phi.entries in seen:
            continue
        seen.add(phi.entries)
        if microstate_in_space(phi, X) and in_map(phi, params, s, strict):
            verified.append(phi)
    return RealizedMap("sampled", tuple(verified), exhaustive=False)


def realize_map(X: SubshiftDescriptor, s: SoficApproximation, params: EstimatorParams,
                strict: bool, seed: int = 0) -> RealizedMap:
    if strict and params.delta <= 0:
        return RealizedMap("empty", (), exhaustive=True)
    if X.variant == "trivial":
        return realize_trivial_tube(s, params, strict)
    if X.variant == "full" and s.cyclic:
        return RealizedMap("periodic-family", (), exhaustive=False)
    return realize_sampled(X, s, params, strict, seed)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def _restricted_value(alpha: BoxCover, n: int, points) -> object:
    """dee_hat of the product cover restricted to the carriers of points, /1."""
    carriers = [kuhn_carrier(p, alpha.m)[0] for p in points]
    res = optimizer.dee_hat_product_restricted(alpha, n, alpha.m, carriers)
    return res.value


def sofic_mdim_estimate(X: SubshiftDescriptor, alpha: BoxCover,
                        params: EstimatorParams, s_list, seed: int = 0,
                        global_cap: int = 30_000) -> list:
    """Per-model normalized cover-order of the product cover over the realized
    microstate space.  -inf when the realization is empty."""
    if alpha.dim != 1:
        raise UsageError("alphabet cover must live on [0,1]")
    out = []
    for idx, s in enumerate(s_list):
        realized = realize_map(X, s, params, params.strict, seed is not None and seed + idx)
        record = {"model": idx, "n": s.n, "F": list(params.F),
                  "delta": str(params.delta), "strict": params.strict,
                  "seed": seed, "realization": realized.kind}
        if realized.kind == "empty" or (realized.kind != "periodic-family"
                                        and not realized.microstates):
            record.update({"value": NEG_INF, "exact": True, "lower_bound": False})
            out.append(record)
            continue
        if realized.kind == "periodic-family":
            import math as _math
            if _math.factorial(s.n) * alpha.m ** s.n > global_cap:
                realized = realize_sampled(X, s, params, params.strict, seed + idx)
                record["realization"] = realized.kind
                points = [phi.projection() for phi in realized.microstates]
                value = _restricted_value(alpha, s.n, points)
                record.update({"value": value if value == NEG_INF else Fraction(value, s.n),
                               "exact": False, "lower_bound": True})
                out.append(record)
                continue
            K = build_triangulated_cube(s.n, alpha.m)
            cov = box_cover_to_cover(product_cover(alpha, s.n), K)
            res = optimizer.dee_hat(cov, Restriction.whole(), params.level)
            record.update({"value": Fraction(res.value, s.n), "exact": res.exact,
                           "lower_bound": False})
            out.append(record)
            continue
        points = [phi.projection() for phi in realized.microstates]
        value = _restricted_value(alpha, s.n, points)
        record.update({"value": value if value == NEG_INF else Fraction(value, s.n),
                       "exact": realized.exhaustive,
                       "lower_bound": True})
        out.append(record)
    return out


def _half_grid_points(n: int, m: int):
    half = [Fraction(k, 2 * m) for k in range(2 * m + 1)]
    return list(iproduct(half, repeat=n))


def exact_set_cover(point_sets, n_points: int) -> int:
    """Minimal number of sets covering all points; exhaustive branch and bound."""
    if n_points == 0:
        return 0
    full = frozenset(range(n_points))
    union_all = frozenset().union(*point_sets) if point_sets else frozenset()
    if union_all != full:
        raise UsageError("the sets do not cover the points")
    # greedy upper bound
    uncovered = set(full)
    greedy = 0
    while uncovered:
        best = max(range(len(point_sets)), key=lambda i: len(point_sets[i] & uncovered))
        uncovered -= point_sets[best]
        greedy += 1
    best_count = greedy

    def dfs(uncovered, used):
        nonlocal best_count
        if not uncovered:
            best_count = min(best_count, used)
            return
        if used + 1 >= best_count:
            return
        pivot = min(uncovered)
        for i, ps in enumerate(point_sets):
            if pivot in ps:
                dfs(uncovered - ps, used + 1)

    dfs(full, 0)
    return best_count


def sofic_entropy_estimate(X: SubshiftDescriptor, alpha: BoxCover,
                           params: EstimatorParams, s_list, seed: int = 0,
                           cap: int = 100_000) -> list:
    """Per-model (1/n) log of the minimal product-subcover count over the
    realized microstate space; log 0 is -inf."""
    if alpha.dim != 1:
        raise UsageError("alphabet cover must live on [0,1]")
    out = []
    for idx, s in enumerate(s_list):
        realized = realize_map(X, s, params, params.strict, seed + idx)
        record = {"model": idx, "n": s.n, "F": list(params.F),
                  "delta": str(params.delta), "strict": params.strict,
                  "seed": seed, "realization": realized.kind}
        prod = product_cover(alpha, s.n, cap=cap)
        if realized.kind == "periodic-family":
            pts = _half_grid_points(s.n, alpha.m)
        elif realized.kind == "empty" or not realized.microstates:
            record.update({"value": NEG_INF, "count": 0, "exact": True})
            out.append(record)
            continue
        else:
            pts = [phi.projection() for phi in realized.microstates]
        sets = [frozenset(i for i, p in enumerate(pts) if box_union_contains(el, p))
                for el in prod.elements]
        count = exact_set_cover(sets, len(pts))
        record.update({"value": math.log(count) / s.n if count else NEG_INF,
                       "count": count,
                       "exact": realized.kind in ("periodic-family", "grid-tube")})
        out.append(record)
    return out

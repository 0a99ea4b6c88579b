"""Minimum cover order over subordinate vertex labelings.

A labeling assigns to each vertex of the (possibly subdivided) complex a cover
element containing that vertex's open star.  The induced open sets, one union
of stars per label, form a cover refining the input, and its order restricted
to Y equals the maximum number of distinct labels on an admitted simplex,
minus one.  Minimizing that maximum over all labelings at subdivision level L
gives the computable surrogate reported here: an upper bound for the
refinement-minimal cover order that is exact on the verified cube and interval
instances.

The search is exhaustive branch and bound with lexicographic tie-breaking:
vertex order is decreasing incidence degree, labels are tried in index order,
and the reported witness is the lexicographically least optimal labeling in
that order.  Large instances run on a numba kernel with identical semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .complexes import (
    BoxCover,
    Cover,
    NEG_INF,
    Restriction,
    SimplicialComplex,
    SimplicialMap,
    admitted_maximal,
    box_cover_to_cover,
    box_union_contains,
    cover,
    cover_order,
    join,
    open_set,
    product_cover,
    refines,
    subdivide_instance,
)
from .errors import AdmissibilityError, ParameterError, UsageError

try:
    from . import _kernels
except ImportError:  # pragma: no cover - numba is a hard dependency
    _kernels = None

NUMBA_THRESHOLD = 100  # switch to the compiled search above this V * n_labels


@dataclass(frozen=True)
class Labeling:
    complex: SimplicialComplex
    assignment: tuple  # vertex id -> cover element index


@dataclass(frozen=True)
class DimResult:
    value: object  # int or -inf
    witness: Labeling | None
    level: int
    exact: bool

    def as_obj(self):
        return {
            "value": "-inf" if self.value == NEG_INF else int(self.value),
            "level": self.level,
            "exact": self.exact,
            "witness": list(self.witness.assignment) if self.witness else None,
        }


def allowed_labels(alpha: Cover):
    """Per-vertex list of cover elements containing the vertex's open star."""
    K = alpha.complex
    out = []
    for v in range(len(K.vertices)):
        star = K.vertex_stars[v]
        out.append([i for i, el in enumerate(alpha.elements) if star <= el.members])
    return out


def _search_instance(alpha: Cover, Y: Restriction, level: int):
    """Subdivide, compute allowed labels and the maximal admitted simplices."""
    alpha_L, Y_L = subdivide_instance(alpha, Y, level)
    K = alpha_L.complex
    allowed = allowed_labels(alpha_L)
    bad = [v for v, a in enumerate(allowed) if not a]
    if bad:
        if level == 0:
            raise AdmissibilityError(
                f"{len(bad)} vertices admit no subordinate label at level 0; "
                "rerun with a larger level (one subdivision always suffices)")
        raise AssertionError("no admissible label after subdivision; should be impossible")
    maximal = admitted_maximal(K, Y_L)
    return alpha_L, Y_L, K, allowed, maximal


def _order_search_vertices(vertex_sets):
    """Search order: breadth first from the highest-degree vertex, frontier
    popped by descending degree.  Connectivity makes conflicts surface early,
    which is what lets branch and bound prove lower bounds quickly."""
    import heapq
    degree = {}
    adj = {}
    for vs in vertex_sets:
        for v in vs:
            degree[v] = degree.get(v, 0) + 1
            adj.setdefault(v, set()).update(u for u in vs if u != v)
    order, seen, heap = [], set(), []
    for seed in sorted(degree, key=lambda v: (-degree[v], v)):
        if seed in seen:
            continue
        seen.add(seed)
        heapq.heappush(heap, (-degree[seed], seed))
        while heap:
            _, v = heapq.heappop(heap)
            order.append(v)
            for u in sorted(adj[v]):
                if u not in seen:
                    seen.add(u)
                    heapq.heappush(heap, (-degree[u], u))
    return order


def _prep_search(K, allowed, maximal):
    vertex_sets = [K.simplices[sid] for sid in maximal]
    order = _order_search_vertices(vertex_sets)
    pos = {v: i for i, v in enumerate(order)}
    simp_verts = [sorted(pos[v] for v in vs) for vs in vertex_sets]
    vert_simps = [[] for _ in order]
    for si, verts in enumerate(simp_verts):
        for p in verts:
            vert_simps[p].append(si)
    return order, [allowed[v] for v in order], simp_verts, vert_simps


def _greedy(allowed_o, vert_simps, n_simp, n_labels):
    label_count = [[0] * n_labels for _ in range(n_simp)]
    distinct = [0] * n_simp
    assign = []
    cur_max = 0
    for p, labs in enumerate(allowed_o):
        best_lab, best_max = None, None
        for lab in labs:
            new_max = cur_max
            for s in vert_simps[p]:
                d = distinct[s] + (1 if label_count[s][lab] == 0 else 0)
                if d > new_max:
                    new_max = d
            if best_max is None or new_max < best_max:
                best_lab, best_max = lab, new_max
        for s in vert_simps[p]:
            if label_count[s][best_lab] == 0:
                distinct[s] += 1
            label_count[s][best_lab] += 1
        assign.append(best_lab)
        cur_max = best_max
    return assign, cur_max


def _search_py(allowed_o, vert_simps, n_simp, n_labels, best_init, mode, bound,
               simp_verts=None):
    """Reference depth-first search with forward checking.

    mode 0: exhaustive minimization with pruning at best-1; returns
    (best value, best assignment or None).  mode 1: lexicographically first
    assignment whose running maximum never exceeds bound.

    Forward checking: once a simplex has used its distinct-label budget, its
    unassigned vertices may only reuse labels already on it; an emptied domain
    backtracks.  Only provably dead prefixes are pruned, so both the optimal
    value and the lexicographically first witness are unaffected.
    """
    V = len(allowed_o)
    if simp_verts is None:
        simp_verts = [[] for _ in range(n_simp)]
        for p, ss in enumerate(vert_simps):
            for s in ss:
                simp_verts[s].append(p)
    allowed_masks = [sum(1 << lab for lab in labs) for labs in allowed_o]
    label_count = [[0] * n_labels for _ in range(n_simp)]
    distinct = [0] * n_simp
    used_mask = [0] * n_simp
    dom = list(allowed_masks)
    assign = [-1] * V
    choice = [-1] * V
    max_stack = [0] * (V + 1)
    trail: list = []  # (vertex, previous domain)
    trail_top = [0] * (V + 1)
    best = best_init
    best_assign = None
    depth = 0

    def undo(p, lab):
        for s in vert_simps[p]:
            label_count[s][lab] -= 1
            if label_count[s][lab] == 0:
                distinct[s] -= 1
                used_mask[s] &= ~(1 << lab)
        while len(trail) > trail_top[depth]:
            q, old = trail.pop()
            dom[q] = old

    def apply(p, lab, limit):
        """Assign; returns the new running max, or -1 when the branch is dead.

        Counters are always fully applied before any failure exit so undo stays
        symmetric.
        """
        trail_top[depth] = len(trail)
        new_max = max_stack[depth]
        for s in vert_simps[p]:
            if label_count[s][lab] == 0:
                distinct[s] += 1
                used_mask[s] |= 1 << lab
            label_count[s][lab] += 1
            if distinct[s] > new_max:
                new_max = distinct[s]
        ok = new_max <= limit
        if ok:
            for s in vert_simps[p]:
                if distinct[s] == limit:
                    for q in simp_verts[s]:
                        if assign[q] < 0 and q != p:
                            restricted = dom[q] & used_mask[s]
                            if restricted != dom[q]:
                                trail.append((q, dom[q]))
                                dom[q] = restricted
                                if restricted == 0:
                                    ok = False
                                    break
                    if not ok:
                        break
        if ok:
            return new_max
        undo(p, lab)
        return -1

    while depth >= 0:
        labs = allowed_o[depth]
        if choice[depth] >= 0:
            assign[depth] = -1
            undo(depth, labs[choice[depth]])
        nxt = choice[depth] + 1
        advanced = False
        limit = (best - 1) if mode == 0 else bound
        if max_stack[depth] <= limit:  # a tightened bound can strand a prefix
            while nxt < len(labs):
                lab = labs[nxt]
                if not (dom[depth] >> lab) & 1:
                    nxt += 1
                    continue
                new_max = apply(depth, lab, limit)
                if new_max >= 0:
                    choice[depth] = nxt
                    assign[depth] = lab
                    max_stack[depth + 1] = new_max
                    advanced = True
                    break
                nxt += 1
        if not advanced:
            choice[depth] = -1
            depth -= 1
            continue
        if depth == V - 1:
            if mode == 1:
                return bound, list(assign)
            best = max_stack[V]
            best_assign = list(assign)
            continue  # keep scanning siblings for strictly better labelings
        depth += 1
    if mode == 1:
        return None, None
    return best, best_assign


def _run_search(allowed_o, simp_verts, vert_simps, n_labels):
    """Greedy bound, exhaustive improvement, then lex-first witness recovery."""
    n_simp = len(simp_verts)
    V = len(allowed_o)
    _, greedy_max = _greedy(allowed_o, vert_simps, n_simp, n_labels)
    use_kernel = (_kernels is not None and n_labels <= 64
                  and V * n_labels > NUMBA_THRESHOLD)
    if use_kernel:
        value = _kernels.bb_optimize(allowed_o, vert_simps, simp_verts,
                                     n_simp, n_labels, greedy_max)
        _, witness = _kernels.bb_first_solution(allowed_o, vert_simps, simp_verts,
                                                n_simp, n_labels, value)
    else:
        value, _ = _search_py(allowed_o, vert_simps, n_simp, n_labels, greedy_max, 0, 0,
                              simp_verts)
        _, witness = _search_py(allowed_o, vert_simps, n_simp, n_labels, 0, 1, value,
                                simp_verts)
    if witness is None:
        raise AssertionError("optimal labeling not recovered")
    return value, witness


def _heuristic(allowed_o, simp_verts, vert_simps, n_labels, budget=None):
    n_simp = len(simp_verts)
    V = len(allowed_o)
    assign, _ = _greedy(allowed_o, vert_simps, n_simp, n_labels)
    if budget is None:
        budget = 10 * V
    label_count = [[0] * n_labels for _ in range(n_simp)]
    for p, lab in enumerate(assign):
        for s in vert_simps[p]:
            label_count[s][lab] += 1
    distinct = [sum(1 for c in row if c) for row in label_count]
    objective = max(distinct) if distinct else 0
    tried = 0
    improved = True
    while improved and tried < budget:
        improved = False
        for p in range(V):
            if tried >= budget:
                break
            cur = assign[p]
            for lab in allowed_o[p]:
                if lab == cur:
                    continue
                tried += 1
                worst = 0
                for s in vert_simps[p]:
                    d = distinct[s]
                    if label_count[s][cur] == 1:
                        d -= 1
                    if label_count[s][lab] == 0:
                        d += 1
                    if d > worst:
                        worst = d
                if worst < objective:
                    for s in vert_simps[p]:
                        label_count[s][cur] -= 1
                        if label_count[s][cur] == 0:
                            distinct[s] -= 1
                        if label_count[s][lab] == 0:
                            distinct[s] += 1
                        label_count[s][lab] += 1
                    assign[p] = lab
                    objective = max(distinct)
                    improved = True
                    break
                if tried >= budget:
                    break
    return objective, assign


def dee_hat(alpha: Cover, Y: Restriction = Restriction.whole(), level: int = 0,
            mode: str = "exact") -> DimResult:
    """Minimum order over subordinate labelings at the given subdivision level.

    Exact mode runs the complete branch-and-bound; heuristic mode returns an
    upper bound (greedy plus single-vertex local search) flagged exact=False.
    """
    if level < 0:
        raise ParameterError("level must be >= 0")
    if mode not in ("exact", "heuristic"):
        raise ParameterError("mode must be 'exact' or 'heuristic'")
    if Y.is_empty():
        return DimResult(NEG_INF, None, level, True)
    alpha_L, Y_L, K, allowed, maximal = _search_instance(alpha, Y, level)
    n_labels = len(alpha_L.elements)
    if not maximal:
        return DimResult(NEG_INF, None, level, True)
    order, allowed_o, simp_verts, vert_simps = _prep_search(K, allowed, maximal)
    if mode == "exact":
        value, assign_o = _run_search(allowed_o, simp_verts, vert_simps, n_labels)
        exact = True
    else:
        value, assign_o = _heuristic(allowed_o, simp_verts, vert_simps, n_labels)
        exact = False
    full = [a[0] for a in allowed]
    for p, v in enumerate(order):
        full[v] = assign_o[p]
    return DimResult(value - 1, Labeling(K, tuple(full)), level, exact)


def dee_hat_best(alpha: Cover, Y: Restriction = Restriction.whole(), level_max: int = 1,
                 mode: str = "exact"):
    """Level sweep L = 0..level_max; values are non-increasing in L."""
    return [dee_hat(alpha, Y, L, mode) for L in range(level_max + 1)]


def induced_cover(labeling: Labeling, alpha: Cover) -> Cover:
    """Cover induced by a labeling: per label, the union of its vertices' stars."""
    K = labeling.complex
    members = {}
    for v, lab in enumerate(labeling.assignment):
        members.setdefault(lab, set()).update(K.vertex_stars[v])
    return cover(K, [frozenset(members[lab]) for lab in sorted(members)], validate=False)


def check_witness(result: DimResult, alpha: Cover, Y: Restriction) -> bool:
    """Recompute the order of the witness's induced cover; must equal the value."""
    if result.witness is None:
        return result.value == NEG_INF
    alpha_L, Y_L = subdivide_instance(alpha, Y, result.level)
    # subdivision is deterministic, so the rebuilt complex has identical ids
    ind = induced_cover(Labeling(alpha_L.complex, result.witness.assignment), alpha_L)
    if not refines(ind, alpha_L):
        return False
    return cover_order(ind, Y_L) == result.value


def is_positive(alpha: Cover, Y: Restriction = Restriction.whole(), level: int = 0) -> bool:
    """Exact test for dee_hat >= 1, without search.

    The value is zero exactly when every connected component of the admitted
    region can be labeled by a single element, i.e. each component's vertices
    share a common allowed label.  Zero-ness does not depend on the level
    (component point sets and element point sets are level-independent), so
    this decides positivity for every level at which labelings exist.
    """
    if Y.is_empty():
        return False
    try:
        alpha_L, Y_L, K, allowed, maximal = _search_instance(alpha, Y, level)
    except AdmissibilityError:
        alpha_L, Y_L, K, allowed, maximal = _search_instance(alpha, Y, level + 1)
    if not maximal:
        return False
    parent = {}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for sid in maximal:
        vs = K.simplices[sid]
        for v in vs:
            parent.setdefault(v, v)
        root = find(vs[0])
        for v in vs[1:]:
            parent[find(v)] = root
    common = {}
    for v in parent:
        r = find(v)
        labs = set(allowed[v])
        if r in common:
            common[r] &= labs
        else:
            common[r] = labs
    return any(not labs for labs in common.values())


# ---------------------------------------------------------------------------
# Restricted product-cover instances described locally (no global complex)
# ---------------------------------------------------------------------------

def interval_allowed_labels(alpha: BoxCover, m: int):
    """allowed[g] for grid vertices g/m of the path: elements containing star(g/m)."""
    if alpha.dim != 1:
        raise UsageError("interval cover expected")
    if m % alpha.m:
        raise UsageError("complex resolution must be divisible by the box grid")
    allowed = []
    for g in range(m + 1):
        reps = [Fraction(g, m)]
        if g > 0:
            reps.append(Fraction(2 * g - 1, 2 * m))
        if g < m:
            reps.append(Fraction(2 * g + 1, 2 * m))
        allowed.append([j for j, el in enumerate(alpha.elements)
                        if all(box_union_contains(el, (r,)) for r in reps)])
    return allowed


def dee_hat_product_restricted(alpha: BoxCover, n: int, m: int, carriers) -> DimResult:
    """dee_hat of the n-fold product cover restricted to explicit carrier simplices.

    ``carriers`` lists simplices of the Kuhn cube at resolution m by their
    vertex grid tuples (ints in 0..m).  Equivalent to converting the product
    cover on the full cube complex and restricting to the carriers' downward
    closure, but needs no global complex, so it scales to large n.  Level 0.
    """
    allowed_1d = interval_allowed_labels(alpha, m)
    if any(not a for a in allowed_1d):
        raise AdmissibilityError("an interval vertex star fits in no element")
    k = len(alpha.elements)
    carriers = [tuple(sorted(tuple(int(c) for c in v) for v in simplex)) for simplex in carriers]
    carriers = sorted(set(carriers))
    if not carriers:
        return DimResult(NEG_INF, None, 0, True)
    maximal = [s for s in carriers
               if not any(s != t and set(s) <= set(t) for t in carriers)]
    verts = sorted({v for s in maximal for v in s})
    # tuple labels encoded in base k; allowed sets are products of 1-D choices
    def tuple_labels(v):
        out = [0]
        for c in v:
            out = [code * k + j for code in out for j in allowed_1d[c]]
        return sorted(out)

    allowed = {v: tuple_labels(v) for v in verts}
    degree = {v: 0 for v in verts}
    for s in maximal:
        for v in s:
            degree[v] += 1
    order = sorted(verts, key=lambda v: (-degree[v], v))
    pos = {v: i for i, v in enumerate(order)}
    simp_verts = [sorted(pos[v] for v in s) for s in maximal]
    vert_simps = [[] for _ in order]
    for si, vs in enumerate(simp_verts):
        for p in vs:
            vert_simps[p].append(si)
    allowed_o = [allowed[v] for v in order]
    value, assign_o = _run_search(allowed_o, simp_verts, vert_simps, k ** n)
    return DimResult(value - 1, None, 0, True)


# ---------------------------------------------------------------------------
# Inequality reports
# ---------------------------------------------------------------------------

def verify_inequalities(alpha: Cover, beta: Cover, level: int = 0,
                        Y: Restriction = Restriction.whole(),
                        box_alpha: BoxCover | None = None, product_n: int = 2,
                        surjection: SimplicialMap | None = None):
    """Evaluate the cover-order inequalities on a concrete pair of covers.

    Checks, reporting each side and pass/fail with the computed values as
    witnesses: the subadditivity of the join (one extra subdivision level on
    the left), refinement monotonicity at fixed level for join(alpha, beta)
    against alpha, the product bound when a box cover is supplied (level 0,
    where the staircase transport argument applies), and the pullback bound
    when a simplicial surjection onto alpha's complex is supplied.
    """
    report = {}
    a = dee_hat(alpha, Y, level).value
    b = dee_hat(beta, Y, level).value
    ab = dee_hat(join(alpha, beta), Y, level + 1).value
    report["subadditivity"] = {"lhs": ab, "rhs": a + b, "ok": ab <= a + b,
                               "levels": [level + 1, level]}
    j = join(alpha, beta)
    jv = dee_hat(j, Y, level).value
    report["refinement"] = {"finer": jv, "coarser": a, "ok": jv >= a and refines(j, alpha),
                            "level": level}
    if box_alpha is not None:
        base = box_cover_to_cover(box_alpha, alpha.complex) if alpha.complex.dim == box_alpha.dim \
            else None
        if base is None:
            raise UsageError("box cover dimension must match alpha's complex")
        from .complexes import build_triangulated_cube
        K_big = build_triangulated_cube(box_alpha.dim * product_n, alpha.complex.grid)
        prod = box_cover_to_cover(product_cover(box_alpha, product_n), K_big)
        pv = dee_hat(prod, Restriction.whole(), 0).value
        av0 = dee_hat(base, Restriction.whole(), 0).value
        report["product"] = {"lhs": pv, "rhs": product_n * av0, "ok": pv <= product_n * av0,
                             "n": product_n, "level": 0}
    if surjection is not None:
        if surjection.target is not alpha.complex:
            raise UsageError("surjection must land on alpha's complex")
        if not surjection.is_surjective():
            raise UsageError("supplied map is not surjective")
        pulled = surjection.pullback_cover(alpha)
        pulled_Y = surjection.pullback_restriction(Y)
        up = dee_hat(pulled, pulled_Y, level).value
        report["pullback"] = {"lhs": up, "rhs": a, "ok": up <= a, "level": level}
    report["ok"] = all(v["ok"] for v in report.values() if isinstance(v, dict))
    return report

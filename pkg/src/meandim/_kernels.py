"""Compiled branch-and-bound kernels.

Same algorithm as optimizer._search_py, specialized to flat integer arrays so
numba can run the deep instances (product covers on cubes): depth-first search
with running-max pruning and forward checking on uint64 label domains.
Single-threaded and deterministic: results are independent of scheduling by
construction.  Label counts above 64 stay on the Python reference path.
"""

import numpy as np
from numba import njit

ONE = np.uint64(1)
ZERO = np.uint64(0)


def _pack(allowed_o, vert_simps, simp_verts):
    V = len(allowed_o)
    S = len(simp_verts)
    a_off = np.zeros(V + 1, np.int64)
    for i, labs in enumerate(allowed_o):
        a_off[i + 1] = a_off[i] + len(labs)
    a_lab = np.fromiter((lab for labs in allowed_o for lab in labs), np.int64,
                        count=int(a_off[-1]))
    vs_off = np.zeros(V + 1, np.int64)
    for i, simps in enumerate(vert_simps):
        vs_off[i + 1] = vs_off[i] + len(simps)
    vs_ids = np.fromiter((s for simps in vert_simps for s in simps), np.int64,
                         count=int(vs_off[-1]))
    sv_off = np.zeros(S + 1, np.int64)
    for i, verts in enumerate(simp_verts):
        sv_off[i + 1] = sv_off[i] + len(verts)
    sv_ids = np.fromiter((v for verts in simp_verts for v in verts), np.int64,
                         count=int(sv_off[-1]))
    trail_cap = sum(len(v) ** 2 for v in simp_verts) + V + 16
    return a_off, a_lab, vs_off, vs_ids, sv_off, sv_ids, trail_cap


@njit(cache=True)
def _bb(a_off, a_lab, vs_off, vs_ids, sv_off, sv_ids, n_simp, n_labels,
        best_init, mode, bound, trail_cap):
    V = a_off.shape[0] - 1
    label_count = np.zeros((n_simp, n_labels), np.int32)
    distinct = np.zeros(n_simp, np.int64)
    used_mask = np.zeros(n_simp, np.uint64)
    dom = np.zeros(V, np.uint64)
    for p in range(V):
        msk = ZERO
        for i in range(a_off[p], a_off[p + 1]):
            msk |= ONE << np.uint64(a_lab[i])
        dom[p] = msk
    assign = np.full(V, -1, np.int64)
    choice = np.full(V, -1, np.int64)
    max_stack = np.zeros(V + 1, np.int64)
    trail_q = np.zeros(trail_cap, np.int64)
    trail_old = np.zeros(trail_cap, np.uint64)
    trail_len = 0
    trail_top = np.zeros(V + 1, np.int64)
    found = np.full(V, -1, np.int64)
    best = best_init
    depth = 0
    while depth >= 0:
        start = a_off[depth]
        end = a_off[depth + 1]
        if choice[depth] >= 0:
            lab = a_lab[start + choice[depth]]
            assign[depth] = -1
            for ii in range(vs_off[depth], vs_off[depth + 1]):
                s = vs_ids[ii]
                label_count[s, lab] -= 1
                if label_count[s, lab] == 0:
                    distinct[s] -= 1
                    used_mask[s] &= ~(ONE << np.uint64(lab))
            while trail_len > trail_top[depth]:
                trail_len -= 1
                dom[trail_q[trail_len]] = trail_old[trail_len]
        nxt = choice[depth] + 1
        limit = best - 1 if mode == 0 else bound
        advanced = False
        if max_stack[depth] <= limit:
            while start + nxt < end:
                lab = a_lab[start + nxt]
                if (dom[depth] >> np.uint64(lab)) & ONE == ZERO:
                    nxt += 1
                    continue
                trail_top[depth] = trail_len
                new_max = max_stack[depth]
                for ii in range(vs_off[depth], vs_off[depth + 1]):
                    s = vs_ids[ii]
                    if label_count[s, lab] == 0:
                        distinct[s] += 1
                        used_mask[s] |= ONE << np.uint64(lab)
                    label_count[s, lab] += 1
                    if distinct[s] > new_max:
                        new_max = distinct[s]
                ok = new_max <= limit
                if ok:
                    for ii in range(vs_off[depth], vs_off[depth + 1]):
                        s = vs_ids[ii]
                        if distinct[s] == limit:
                            for jj in range(sv_off[s], sv_off[s + 1]):
                                q = sv_ids[jj]
                                if assign[q] < 0 and q != depth:
                                    restricted = dom[q] & used_mask[s]
                                    if restricted != dom[q]:
                                        trail_q[trail_len] = q
                                        trail_old[trail_len] = dom[q]
                                        trail_len += 1
                                        dom[q] = restricted
                                        if restricted == ZERO:
                                            ok = False
                                            break
                            if not ok:
                                break
                if ok:
                    choice[depth] = nxt
                    assign[depth] = lab
                    max_stack[depth + 1] = new_max
                    advanced = True
                    break
                for ii in range(vs_off[depth], vs_off[depth + 1]):
                    s = vs_ids[ii]
                    label_count[s, lab] -= 1
                    if label_count[s, lab] == 0:
                        distinct[s] -= 1
                        used_mask[s] &= ~(ONE << np.uint64(lab))
                while trail_len > trail_top[depth]:
                    trail_len -= 1
                    dom[trail_q[trail_len]] = trail_old[trail_len]
                nxt += 1
        if not advanced:
            choice[depth] = -1
            depth -= 1
            continue
        if depth == V - 1:
            if mode == 1:
                return np.int64(bound), assign.copy()
            best = max_stack[depth + 1]
            found[:] = assign
            continue
        depth += 1
    if mode == 1:
        return np.int64(-1), found
    return np.int64(best), found


def bb_optimize(allowed_o, vert_simps, simp_verts, n_simp, n_labels, best_init) -> int:
    packed = _pack(allowed_o, vert_simps, simp_verts)
    a_off, a_lab, vs_off, vs_ids, sv_off, sv_ids, trail_cap = packed
    value, _ = _bb(a_off, a_lab, vs_off, vs_ids, sv_off, sv_ids, n_simp, n_labels,
                   np.int64(best_init), np.int64(0), np.int64(0), np.int64(trail_cap))
    return int(value)


def bb_first_solution(allowed_o, vert_simps, simp_verts, n_simp, n_labels, bound):
    packed = _pack(allowed_o, vert_simps, simp_verts)
    a_off, a_lab, vs_off, vs_ids, sv_off, sv_ids, trail_cap = packed
    value, assign = _bb(a_off, a_lab, vs_off, vs_ids, sv_off, sv_ids, n_simp, n_labels,
                        np.int64(0), np.int64(1), np.int64(bound), np.int64(trail_cap))
    if int(value) < 0:
        return None, None
    return int(value), [int(x) for x in assign]

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels: flat cosine scoring and HNSW build/search.

Semantics mirror `_hnsw_py` (the pure-Python twin): distances are negative
dot products accumulated in double precision, ordering ties break on record
id, and node levels come from the shared seed-derived assignment.
"""

from libc.math cimport INFINITY

import numpy as np

from .graph import HnswGraph, assign_levels


# --------------------------------------------------------------- flat scan

def score_flat(matrix_obj, query_obj, mask=None):
    """Dot product of every row with the query, in float64; masked-out rows get -inf."""
    matrix = np.ascontiguousarray(matrix_obj, dtype=np.float32)
    query = np.ascontiguousarray(query_obj, dtype=np.float32)
    cdef const float[:, ::1] M = matrix
    cdef const float[::1] q = query
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t d = M.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef const unsigned char[::1] mv
    cdef Py_ssize_t i, k
    cdef double s
    if mask is None:
        for i in range(n):
            s = 0.0
            for k in range(d):
                s += <double>M[i, k] * <double>q[k]
            ov[i] = s
    else:
        mv = np.ascontiguousarray(mask, dtype=np.uint8)
        for i in range(n):
            if mv[i]:
                s = 0.0
                for k in range(d):
                    s += <double>M[i, k] * <double>q[k]
                ov[i] = s
            else:
                ov[i] = -INFINITY
    return out


# ------------------------------------------------------------ heap helpers
# Binary heaps over parallel (distance, id) arrays with lexicographic order.

cdef inline bint _lt(double d1, long long i1, double d2, long long i2):
    return d1 < d2 or (d1 == d2 and i1 < i2)


cdef inline void _minh_push(double[::1] hd, long long[::1] hi, Py_ssize_t* size,
                            double d, long long node):
    cdef Py_ssize_t child = size[0]
    cdef Py_ssize_t parent
    cdef double td
    cdef long long ti
    hd[child] = d
    hi[child] = node
    size[0] += 1
    while child > 0:
        parent = (child - 1) >> 1
        if _lt(hd[child], hi[child], hd[parent], hi[parent]):
            td = hd[child]; hd[child] = hd[parent]; hd[parent] = td
            ti = hi[child]; hi[child] = hi[parent]; hi[parent] = ti
            child = parent
        else:
            break


cdef inline void _minh_pop(double[::1] hd, long long[::1] hi, Py_ssize_t* size):
    cdef Py_ssize_t parent = 0
    cdef Py_ssize_t left, right, best
    cdef double td
    cdef long long ti
    size[0] -= 1
    hd[0] = hd[size[0]]
    hi[0] = hi[size[0]]
    while True:
        left = 2 * parent + 1
        right = left + 1
        best = parent
        if left < size[0] and _lt(hd[left], hi[left], hd[best], hi[best]):
            best = left
        if right < size[0] and _lt(hd[right], hi[right], hd[best], hi[best]):
            best = right
        if best == parent:
            break
        td = hd[parent]; hd[parent] = hd[best]; hd[best] = td
        ti = hi[parent]; hi[parent] = hi[best]; hi[best] = ti
        parent = best


cdef inline void _maxh_push(double[::1] hd, long long[::1] hi, Py_ssize_t* size,
                            double d, long long node):
    cdef Py_ssize_t child = size[0]
    cdef Py_ssize_t parent
    cdef double td
    cdef long long ti
    hd[child] = d
    hi[child] = node
    size[0] += 1
    while child > 0:
        parent = (child - 1) >> 1
        if _lt(hd[parent], hi[parent], hd[child], hi[child]):
            td = hd[child]; hd[child] = hd[parent]; hd[parent] = td
            ti = hi[child]; hi[child] = hi[parent]; hi[parent] = ti
            child = parent
        else:
            break


cdef inline void _maxh_pop(double[::1] hd, long long[::1] hi, Py_ssize_t* size):
    cdef Py_ssize_t parent = 0
    cdef Py_ssize_t left, right, best
    cdef double td
    cdef long long ti
    size[0] -= 1
    hd[0] = hd[size[0]]
    hi[0] = hi[size[0]]
    while True:
        left = 2 * parent + 1
        right = left + 1
        best = parent
        if left < size[0] and _lt(hd[best], hi[best], hd[left], hi[left]):
            best = left
        if right < size[0] and _lt(hd[best], hi[best], hd[right], hi[right]):
            best = right
        if best == parent:
            break
        td = hd[parent]; hd[parent] = hd[best]; hd[best] = td
        ti = hi[parent]; hi[parent] = hi[best]; hi[best] = ti
        parent = best


# ----------------------------------------------------------- layer search

cdef inline double _ndot_row(const float[:, ::1] M, long long row, const float[::1] q):
    cdef double s = 0.0
    cdef Py_ssize_t k
    for k in range(M.shape[1]):
        s += <double>M[row, k] * <double>q[k]
    return -s


cdef inline double _ndot_rows(const float[:, ::1] M, long long a, long long b):
    cdef double s = 0.0
    cdef Py_ssize_t k
    for k in range(M.shape[1]):
        s += <double>M[a, k] * <double>M[b, k]
    return -s


cdef Py_ssize_t _search_layer(
    const float[:, ::1] M,
    const long long[::1] indptr,
    const int[::1] indices,
    const float[::1] query,
    double[::1] ent_d, long long[::1] ent_i, Py_ssize_t n_ent,
    Py_ssize_t ef,
    double[::1] cand_d, long long[::1] cand_i,
    double[::1] res_d, long long[::1] res_i,
    int[::1] visited, int epoch,
    const unsigned char[::1] allowed, bint has_filter,
    double[::1] out_d, long long[::1] out_i,
):
    """Greedy best-first search on one layer; writes up to `ef` admitted nodes
    into out_d/out_i sorted ascending by (dist, id) and returns the count."""
    cdef Py_ssize_t csize = 0
    cdef Py_ssize_t rsize = 0
    cdef Py_ssize_t t, j
    cdef long long node, nb
    cdef double dist
    for t in range(n_ent):
        visited[ent_i[t]] = epoch
        _minh_push(cand_d, cand_i, &csize, ent_d[t], ent_i[t])
        if not has_filter or allowed[ent_i[t]]:
            _maxh_push(res_d, res_i, &rsize, ent_d[t], ent_i[t])
            if rsize > ef:
                _maxh_pop(res_d, res_i, &rsize)
    while csize > 0:
        dist = cand_d[0]
        node = cand_i[0]
        _minh_pop(cand_d, cand_i, &csize)
        if rsize >= ef and dist > res_d[0]:
            break
        for j in range(indptr[node], indptr[node + 1]):
            nb = indices[j]
            if visited[nb] == epoch:
                continue
            visited[nb] = epoch
            dist = _ndot_row(M, nb, query)
            if rsize < ef or dist < res_d[0]:
                _minh_push(cand_d, cand_i, &csize, dist, nb)
                if not has_filter or allowed[nb]:
                    _maxh_push(res_d, res_i, &rsize, dist, nb)
                    if rsize > ef:
                        _maxh_pop(res_d, res_i, &rsize)
    t = rsize
    while rsize > 0:
        out_d[rsize - 1] = res_d[0]
        out_i[rsize - 1] = res_i[0]
        _maxh_pop(res_d, res_i, &rsize)
    return t


cdef Py_ssize_t _select_heuristic(
    const float[:, ::1] M,
    double[::1] cd, long long[::1] ci, Py_ssize_t nc,
    Py_ssize_t m,
    double[::1] sd, long long[::1] si,
):
    """Diversity-aware neighbor selection over candidates sorted ascending."""
    cdef Py_ssize_t ns = 0
    cdef Py_ssize_t t, s
    cdef double dist
    cdef long long cand
    cdef bint keep
    for t in range(nc):
        if ns == m:
            break
        dist = cd[t]
        cand = ci[t]
        keep = True
        for s in range(ns):
            if _ndot_rows(M, cand, si[s]) < dist:
                keep = False
                break
        if keep:
            sd[ns] = dist
            si[ns] = cand
            ns += 1
    return ns


cdef void _insertion_sort(double[::1] d, long long[::1] ids, Py_ssize_t n):
    cdef Py_ssize_t a, b
    cdef double td
    cdef long long ti
    for a in range(1, n):
        td = d[a]
        ti = ids[a]
        b = a
        while b > 0 and _lt(td, ti, d[b - 1], ids[b - 1]):
            d[b] = d[b - 1]
            ids[b] = ids[b - 1]
            b -= 1
        d[b] = td
        ids[b] = ti


# ------------------------------------------------------------------ build

def build_graph(matrix_obj, int m, int ef_construction, seed):
    matrix = np.ascontiguousarray(matrix_obj, dtype=np.float32)
    cdef const float[:, ::1] M = matrix
    cdef Py_ssize_t n = M.shape[0]
    if n < 1:
        raise ValueError("cannot build an index over zero vectors")
    levels_arr = assign_levels(n, seed, m)
    cdef const int[::1] levels = levels_arr
    # Base-layer capacity 3M: the denser bottom layer is what recall at low
    # ef lives on for high-dimensional data; upper layers stay at M so the
    # navigation cost keeps its usual meaning.
    cdef int max_m0 = 3 * m
    cdef int top_cap = 0
    cdef Py_ssize_t i
    for i in range(n):
        if levels[i] > top_cap:
            top_cap = levels[i]

    # Level-major adjacency: level 0 rows hold max_m0 slots, upper levels m.
    cdef Py_ssize_t n_levels = top_cap + 1
    adj_arr = np.zeros(n * max_m0 + (n_levels - 1) * n * m, dtype=np.int64)
    cnt_arr = np.zeros(n * n_levels, dtype=np.int32)
    cdef long long[::1] adj = adj_arr
    cdef int[::1] cnt = cnt_arr
    cdef Py_ssize_t nn = n  # for offset arithmetic

    # Workspaces.
    cdef Py_ssize_t ws = ef_construction + max_m0 + 2
    visited_arr = np.zeros(n, dtype=np.int32)
    cdef int[::1] visited = visited_arr
    cdef int epoch = 0
    cand_d_arr = np.empty(n + 1, dtype=np.float64)
    cand_i_arr = np.empty(n + 1, dtype=np.int64)
    res_d_arr = np.empty(ws, dtype=np.float64)
    res_i_arr = np.empty(ws, dtype=np.int64)
    ent_d_arr = np.empty(ws, dtype=np.float64)
    ent_i_arr = np.empty(ws, dtype=np.int64)
    found_d_arr = np.empty(ws, dtype=np.float64)
    found_i_arr = np.empty(ws, dtype=np.int64)
    sel_d_arr = np.empty(max_m0, dtype=np.float64)
    sel_i_arr = np.empty(max_m0, dtype=np.int64)
    prune_d_arr = np.empty(max_m0 + 1, dtype=np.float64)
    prune_i_arr = np.empty(max_m0 + 1, dtype=np.int64)
    keep_d_arr = np.empty(max_m0 + 1, dtype=np.float64)
    keep_i_arr = np.empty(max_m0 + 1, dtype=np.int64)
    pool_d_arr = np.empty(ws, dtype=np.float64)
    pool_i_arr = np.empty(ws, dtype=np.int64)
    cdef double[::1] cand_d = cand_d_arr
    cdef long long[::1] cand_i = cand_i_arr
    cdef double[::1] res_d = res_d_arr
    cdef long long[::1] res_i = res_i_arr
    cdef double[::1] ent_d = ent_d_arr
    cdef long long[::1] ent_i = ent_i_arr
    cdef double[::1] found_d = found_d_arr
    cdef long long[::1] found_i = found_i_arr
    cdef double[::1] sel_d = sel_d_arr
    cdef long long[::1] sel_i = sel_i_arr
    cdef double[::1] prune_d = prune_d_arr
    cdef long long[::1] prune_i = prune_i_arr
    cdef double[::1] keep_d = keep_d_arr
    cdef long long[::1] keep_i = keep_i_arr
    cdef double[::1] pool_d = pool_d_arr
    cdef long long[::1] pool_i = pool_i_arr
    cdef unsigned char[::1] no_filter = np.zeros(1, dtype=np.uint8)

    cdef long long entry_point = 0
    cdef int max_level = levels[0]
    cdef int level, lc, cap
    cdef Py_ssize_t n_ent, n_found, n_sel, n_sel_nb, t, s
    cdef long long neighbor, base_new, base_nb
    cdef Py_ssize_t cj

    for i in range(1, n):
        level = levels[i]
        ent_d[0] = _ndot_row(M, entry_point, M[i])
        ent_i[0] = entry_point
        n_ent = 1
        for lc in range(max_level, level, -1):
            epoch += 1
            n_found = _search_layer_adj(
                M, adj, cnt, nn, max_m0, m, lc, M[i],
                ent_d, ent_i, n_ent, 1,
                cand_d, cand_i, res_d, res_i, visited, epoch,
                no_filter, 0, found_d, found_i,
            )
            for t in range(n_found):
                ent_d[t] = found_d[t]
                ent_i[t] = found_i[t]
            n_ent = n_found
        lc = level if level < max_level else max_level
        while lc >= 0:
            epoch += 1
            n_found = _search_layer_adj(
                M, adj, cnt, nn, max_m0, m, lc, M[i],
                ent_d, ent_i, n_ent, ef_construction,
                cand_d, cand_i, res_d, res_i, visited, epoch,
                no_filter, 0, found_d, found_i,
            )
            cap = max_m0 if lc == 0 else m
            n_sel = _select_heuristic(M, found_d, found_i, n_found, cap, sel_d, sel_i)
            base_new = _row_base(nn, max_m0, m, i, lc)
            for t in range(n_sel):
                neighbor = sel_i[t]
                adj[base_new + cnt[i * (top_cap + 1) + lc]] = neighbor
                cnt[i * (top_cap + 1) + lc] += 1
                base_nb = _row_base(nn, max_m0, m, neighbor, lc)
                cj = cnt[neighbor * (top_cap + 1) + lc]
                if cj < cap:
                    adj[base_nb + cj] = i
                    cnt[neighbor * (top_cap + 1) + lc] = <int>(cj + 1)
                else:
                    for s in range(cj):
                        prune_i[s] = adj[base_nb + s]
                        prune_d[s] = _ndot_rows(M, prune_i[s], neighbor)
                    prune_i[cj] = i
                    prune_d[cj] = _ndot_rows(M, i, neighbor)
                    _insertion_sort(prune_d, prune_i, cj + 1)
                    n_sel_nb = _select_heuristic(
                        M, prune_d, prune_i, cj + 1, cap, keep_d, keep_i
                    )
                    for s in range(n_sel_nb):
                        adj[base_nb + s] = keep_i[s]
                    cnt[neighbor * (top_cap + 1) + lc] = <int>n_sel_nb
            for t in range(n_found):
                ent_d[t] = found_d[t]
                ent_i[t] = found_i[t]
            n_ent = n_found
            lc -= 1
        if level > max_level:
            entry_point = i
            max_level = level

    # Refinement pass: early inserts chose their edges against a half-built
    # graph, so re-search the finished graph for every node and re-select its
    # base-layer edges from the union of old links and fresh candidates.
    cdef Py_ssize_t n_pool, stride_cnt = top_cap + 1
    cdef bint present
    for i in range(n):
        ent_d[0] = _ndot_row(M, entry_point, M[i])
        ent_i[0] = entry_point
        n_ent = 1
        for lc in range(max_level, 0, -1):
            epoch += 1
            n_found = _search_layer_adj(
                M, adj, cnt, nn, max_m0, m, lc, M[i],
                ent_d, ent_i, n_ent, 1,
                cand_d, cand_i, res_d, res_i, visited, epoch,
                no_filter, 0, found_d, found_i,
            )
            for t in range(n_found):
                ent_d[t] = found_d[t]
                ent_i[t] = found_i[t]
            n_ent = n_found
        epoch += 1
        n_found = _search_layer_adj(
            M, adj, cnt, nn, max_m0, m, 0, M[i],
            ent_d, ent_i, n_ent, ef_construction,
            cand_d, cand_i, res_d, res_i, visited, epoch,
            no_filter, 0, found_d, found_i,
        )
        n_pool = 0
        for t in range(n_found):
            if found_i[t] != i:
                pool_d[n_pool] = found_d[t]
                pool_i[n_pool] = found_i[t]
                n_pool += 1
        base_new = _row_base(nn, max_m0, m, i, 0)
        for s in range(cnt[i * stride_cnt]):
            neighbor = adj[base_new + s]
            present = False
            for t in range(n_pool):
                if pool_i[t] == neighbor:
                    present = True
                    break
            if not present:
                pool_d[n_pool] = _ndot_rows(M, neighbor, i)
                pool_i[n_pool] = neighbor
                n_pool += 1
        _insertion_sort(pool_d, pool_i, n_pool)
        n_sel = _select_heuristic(M, pool_d, pool_i, n_pool, max_m0, sel_d, sel_i)
        for t in range(n_sel):
            adj[base_new + t] = sel_i[t]
        cnt[i * stride_cnt] = <int>n_sel
        for t in range(n_sel):
            neighbor = sel_i[t]
            base_nb = _row_base(nn, max_m0, m, neighbor, 0)
            cj = cnt[neighbor * stride_cnt]
            present = False
            for s in range(cj):
                if adj[base_nb + s] == i:
                    present = True
                    break
            if present:
                continue
            if cj < max_m0:
                adj[base_nb + cj] = i
                cnt[neighbor * stride_cnt] = <int>(cj + 1)
            else:
                for s in range(cj):
                    prune_i[s] = adj[base_nb + s]
                    prune_d[s] = _ndot_rows(M, prune_i[s], neighbor)
                prune_i[cj] = i
                prune_d[cj] = _ndot_rows(M, i, neighbor)
                _insertion_sort(prune_d, prune_i, cj + 1)
                n_sel_nb = _select_heuristic(
                    M, prune_d, prune_i, cj + 1, max_m0, keep_d, keep_i
                )
                for s in range(n_sel_nb):
                    adj[base_nb + s] = keep_i[s]
                cnt[neighbor * stride_cnt] = <int>n_sel_nb

    # Freeze adjacency into per-level CSR arrays.
    level_links = []
    cdef long long[::1] out_indptr
    cdef int[::1] out_indices
    cdef long long pos, base
    for lc in range(max_level + 1):
        indptr_arr = np.zeros(n + 1, dtype=np.int64)
        out_indptr = indptr_arr
        pos = 0
        for i in range(n):
            pos += cnt[i * (top_cap + 1) + lc]
            out_indptr[i + 1] = pos
        indices_arr = np.empty(pos, dtype=np.int32)
        out_indices = indices_arr
        for i in range(n):
            base = _row_base(nn, max_m0, m, i, lc)
            pos = out_indptr[i]
            for t in range(cnt[i * (top_cap + 1) + lc]):
                out_indices[pos + t] = <int>adj[base + t]
        level_links.append((indptr_arr, indices_arr))

    return HnswGraph(
        m=m,
        ef_construction=ef_construction,
        seed=int(seed),
        entry_point=int(entry_point),
        max_level=int(max_level),
        levels=levels_arr,
        level_links=level_links,
    )


cdef inline long long _row_base(Py_ssize_t n, int max_m0, int m, long long node, int level):
    if level == 0:
        return node * max_m0
    return n * max_m0 + (<long long>(level - 1)) * n * m + node * m


cdef Py_ssize_t _search_layer_adj(
    const float[:, ::1] M,
    const long long[::1] adj, const int[::1] cnt, Py_ssize_t n, int max_m0, int m, int level,
    const float[::1] query,
    double[::1] ent_d, long long[::1] ent_i, Py_ssize_t n_ent,
    Py_ssize_t ef,
    double[::1] cand_d, long long[::1] cand_i,
    double[::1] res_d, long long[::1] res_i,
    int[::1] visited, int epoch,
    const unsigned char[::1] allowed, bint has_filter,
    double[::1] out_d, long long[::1] out_i,
):
    """Same as _search_layer but over the mutable build-time adjacency."""
    cdef Py_ssize_t csize = 0
    cdef Py_ssize_t rsize = 0
    cdef Py_ssize_t t, j
    cdef long long node, nb, base
    cdef double dist
    # cnt is indexed node * stride + level with stride = levels-per-node.
    cdef Py_ssize_t stride = cnt.shape[0] // n
    for t in range(n_ent):
        visited[ent_i[t]] = epoch
        _minh_push(cand_d, cand_i, &csize, ent_d[t], ent_i[t])
        if not has_filter or allowed[ent_i[t]]:
            _maxh_push(res_d, res_i, &rsize, ent_d[t], ent_i[t])
            if rsize > ef:
                _maxh_pop(res_d, res_i, &rsize)
    while csize > 0:
        dist = cand_d[0]
        node = cand_i[0]
        _minh_pop(cand_d, cand_i, &csize)
        if rsize >= ef and dist > res_d[0]:
            break
        base = _row_base(n, max_m0, m, node, level)
        for j in range(cnt[node * stride + level]):
            nb = adj[base + j]
            if visited[nb] == epoch:
                continue
            visited[nb] = epoch
            dist = _ndot_row(M, nb, query)
            if rsize < ef or dist < res_d[0]:
                _minh_push(cand_d, cand_i, &csize, dist, nb)
                if not has_filter or allowed[nb]:
                    _maxh_push(res_d, res_i, &rsize, dist, nb)
                    if rsize > ef:
                        _maxh_pop(res_d, res_i, &rsize)
    t = rsize
    while rsize > 0:
        out_d[rsize - 1] = res_d[0]
        out_i[rsize - 1] = res_i[0]
        _maxh_pop(res_d, res_i, &rsize)
    return t


# ------------------------------------------------------------------ search

def search_graph(graph, matrix_obj, query_obj, Py_ssize_t ef, allowed=None):
    """Approximate top-`ef` search over a frozen graph; returns (ids, scores)
    sorted by descending score with ties broken by ascending id."""
    matrix = np.ascontiguousarray(matrix_obj, dtype=np.float32)
    query = np.ascontiguousarray(query_obj, dtype=np.float32)
    cdef const float[:, ::1] M = matrix
    cdef const float[::1] q = query
    cdef Py_ssize_t n = M.shape[0]
    if ef < 1:
        ef = 1

    cdef const unsigned char[::1] allow_view
    cdef bint has_filter = allowed is not None
    if has_filter:
        allow_view = np.ascontiguousarray(allowed, dtype=np.uint8)
    else:
        allow_view = np.zeros(1, dtype=np.uint8)

    visited_arr = np.zeros(n, dtype=np.int32)
    cdef int[::1] visited = visited_arr
    cand_d_arr = np.empty(n + 1, dtype=np.float64)
    cand_i_arr = np.empty(n + 1, dtype=np.int64)
    res_d_arr = np.empty(ef + 1, dtype=np.float64)
    res_i_arr = np.empty(ef + 1, dtype=np.int64)
    ent_d_arr = np.empty(ef + 1, dtype=np.float64)
    ent_i_arr = np.empty(ef + 1, dtype=np.int64)
    out_d_arr = np.empty(ef + 1, dtype=np.float64)
    out_i_arr = np.empty(ef + 1, dtype=np.int64)
    cdef double[::1] cand_d = cand_d_arr
    cdef long long[::1] cand_i = cand_i_arr
    cdef double[::1] res_d = res_d_arr
    cdef long long[::1] res_i = res_i_arr
    cdef double[::1] ent_d = ent_d_arr
    cdef long long[::1] ent_i = ent_i_arr
    cdef double[::1] out_d = out_d_arr
    cdef long long[::1] out_i = out_i_arr

    cdef long long entry = graph.entry_point
    ent_d[0] = _ndot_row(M, entry, q)
    ent_i[0] = entry
    cdef Py_ssize_t n_ent = 1
    cdef int epoch = 0
    cdef int lc
    cdef Py_ssize_t n_found, t
    cdef const long long[::1] indptr
    cdef const int[::1] indices
    for lc in range(graph.max_level, 0, -1):
        indptr_arr, indices_arr = graph.level_links[lc]
        indptr = indptr_arr
        indices = indices_arr
        epoch += 1
        n_found = _search_layer(
            M, indptr, indices, q, ent_d, ent_i, n_ent, 1,
            cand_d, cand_i, res_d, res_i, visited, epoch,
            allow_view, 0, out_d, out_i,
        )
        for t in range(n_found):
            ent_d[t] = out_d[t]
            ent_i[t] = out_i[t]
        n_ent = n_found
    indptr_arr, indices_arr = graph.level_links[0]
    indptr = indptr_arr
    indices = indices_arr
    epoch += 1
    n_found = _search_layer(
        M, indptr, indices, q, ent_d, ent_i, n_ent, ef,
        cand_d, cand_i, res_d, res_i, visited, epoch,
        allow_view, has_filter, out_d, out_i,
    )
    ids = np.empty(n_found, dtype=np.int64)
    scores = np.empty(n_found, dtype=np.float64)
    cdef long long[::1] ids_v = ids
    cdef double[::1] scores_v = scores
    for t in range(n_found):
        ids_v[t] = out_i[t]
        scores_v[t] = -out_d[t]
    return ids, scores

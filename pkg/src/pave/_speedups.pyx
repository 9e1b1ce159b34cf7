# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels mirroring ``pave._kernels_py`` operation for operation."""
import numpy as np

from libc.math cimport sin, cos, asin, sqrt, INFINITY
from libc.stdlib cimport malloc, free

cdef double EARTH_RADIUS_M = 6371008.8
cdef double DEG = 3.141592653589793 / 180.0


cdef inline double _haversine(double lon1, double lat1, double lon2, double lat2) noexcept nogil:
    cdef double phi1 = lat1 * DEG
    cdef double phi2 = lat2 * DEG
    cdef double s1 = sin((phi2 - phi1) / 2.0)
    cdef double s2 = sin(((lon2 - lon1) * DEG) / 2.0)
    cdef double a = s1 * s1 + cos(phi1) * cos(phi2) * (s2 * s2)
    if a < 0.0:
        a = 0.0
    a = sqrt(a)
    if a > 1.0:
        a = 1.0
    return 2.0 * EARTH_RADIUS_M * asin(a)


def haversine(double lon1, double lat1, double lon2, double lat2):
    return _haversine(lon1, lat1, lon2, lat2)


# --- binary heap keyed on (cost, node) -------------------------------------

cdef inline bint _heap_less(double ka, Py_ssize_t na, double kb, Py_ssize_t nb) noexcept nogil:
    return ka < kb or (ka == kb and na < nb)


cdef void _heap_push(double* keys, Py_ssize_t* nodes, Py_ssize_t* size,
                     double key, Py_ssize_t node) noexcept nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_less(key, node, keys[parent], nodes[parent]):
            keys[i] = keys[parent]
            nodes[i] = nodes[parent]
            i = parent
        else:
            break
    keys[i] = key
    nodes[i] = node


cdef void _heap_pop(double* keys, Py_ssize_t* nodes, Py_ssize_t* size,
                    double* key_out, Py_ssize_t* node_out) noexcept nogil:
    cdef Py_ssize_t n, i, child
    cdef double lk
    cdef Py_ssize_t ln
    key_out[0] = keys[0]
    node_out[0] = nodes[0]
    size[0] -= 1
    n = size[0]
    if n == 0:
        return
    lk = keys[n]
    ln = nodes[n]
    i = 0
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and _heap_less(keys[child + 1], nodes[child + 1], keys[child], nodes[child]):
            child += 1
        if _heap_less(keys[child], nodes[child], lk, ln):
            keys[i] = keys[child]
            nodes[i] = nodes[child]
            i = child
        else:
            break
    keys[i] = lk
    nodes[i] = ln


cdef Py_ssize_t _fill_path(Py_ssize_t* pred, Py_ssize_t node, Py_ssize_t* buf) noexcept nogil:
    """Write the root-to-node path into buf; return its length."""
    cdef Py_ssize_t length = 0
    cdef Py_ssize_t i, tmp
    while node != -1:
        buf[length] = node
        length += 1
        node = pred[node]
    for i in range(length // 2):
        tmp = buf[i]
        buf[i] = buf[length - 1 - i]
        buf[length - 1 - i] = tmp
    return length


cdef bint _extension_less(Py_ssize_t* pred, Py_ssize_t a, Py_ssize_t b, Py_ssize_t v,
                          Py_ssize_t* bufa, Py_ssize_t* bufb) noexcept nogil:
    """path(a)+[v] < path(b)+[v], lexicographically."""
    cdef Py_ssize_t la = _fill_path(pred, a, bufa)
    cdef Py_ssize_t lb = _fill_path(pred, b, bufb)
    cdef Py_ssize_t i
    bufa[la] = v
    bufb[lb] = v
    la += 1
    lb += 1
    for i in range(la if la < lb else lb):
        if bufa[i] != bufb[i]:
            return bufa[i] < bufb[i]
    return la < lb


def dijkstra(const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
             const double[::1] weights, Py_ssize_t src, Py_ssize_t dst,
             node_block=None, slot_block=None):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m = indices.shape[0]
    cdef const unsigned char[::1] nb
    cdef const unsigned char[::1] sb
    cdef bint has_nb = node_block is not None
    cdef bint has_sb = slot_block is not None
    if has_nb:
        nb = np.ascontiguousarray(node_block, dtype=np.uint8)
    if has_sb:
        sb = np.ascontiguousarray(slot_block, dtype=np.uint8)

    cdef double* dist = <double*> malloc(n * sizeof(double))
    cdef Py_ssize_t* pred = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef unsigned char* settled = <unsigned char*> malloc(n * sizeof(unsigned char))
    cdef double* hkeys = <double*> malloc((m + 1) * sizeof(double))
    cdef Py_ssize_t* hnodes = <Py_ssize_t*> malloc((m + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* bufa = <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* bufb = <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t hsize = 0
    cdef Py_ssize_t i, u, v, slot, length
    cdef double d, c
    cdef bint found = False
    if (dist == NULL or pred == NULL or settled == NULL or hkeys == NULL
            or hnodes == NULL or bufa == NULL or bufb == NULL):
        free(dist); free(pred); free(settled); free(hkeys); free(hnodes); free(bufa); free(bufb)
        raise MemoryError()
    try:
        for i in range(n):
            dist[i] = INFINITY
            pred[i] = -1
            settled[i] = 0
        dist[src] = 0.0
        _heap_push(hkeys, hnodes, &hsize, 0.0, src)
        while hsize > 0:
            _heap_pop(hkeys, hnodes, &hsize, &d, &u)
            if settled[u] or d > dist[u]:
                continue
            settled[u] = 1
            if u == dst:
                found = True
                break
            for slot in range(indptr[u], indptr[u + 1]):
                if has_sb and sb[slot]:
                    continue
                v = indices[slot]
                if settled[v] or (has_nb and nb[v]):
                    continue
                c = d + weights[slot]
                if c < dist[v]:
                    dist[v] = c
                    pred[v] = u
                    _heap_push(hkeys, hnodes, &hsize, c, v)
                elif c == dist[v] and pred[v] != u:
                    if _extension_less(pred, u, pred[v], v, bufa, bufb):
                        pred[v] = u
        if not found:
            return None
        length = _fill_path(pred, dst, bufa)
        return [bufa[i] for i in range(length)]
    finally:
        free(dist); free(pred); free(settled); free(hkeys); free(hnodes); free(bufa); free(bufb)


def nearest_index(const double[::1] lons, const double[::1] lats, double lon, double lat):
    cdef Py_ssize_t i
    cdef Py_ssize_t best = -1
    cdef double best_d = INFINITY
    cdef double d
    with nogil:
        for i in range(lons.shape[0]):
            d = _haversine(lons[i], lats[i], lon, lat)
            if d < best_d:
                best_d = d
                best = i
    return best


def min_distances(const double[::1] plons, const double[::1] plats,
                  const double[::1] qlons, const double[::1] qlats):
    cdef Py_ssize_t np_ = plons.shape[0]
    cdef Py_ssize_t nq = qlons.shape[0]
    out = np.empty(np_, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double best, d
    with nogil:
        for i in range(np_):
            best = INFINITY
            for j in range(nq):
                d = _haversine(plons[i], plats[i], qlons[j], qlats[j])
                if d < best:
                    best = d
            o[i] = best
    return out

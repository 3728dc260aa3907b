# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled depth-first enumeration core.

Same traversal, same pruning order, and same statistics as the pure-Python
walk in rashomon.enumerator; bitvectors arrive packed as little-endian
64-bit words.  Selected automatically at import when built.
"""

import time as _time

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define RSH_POPCLL(x) __builtin_popcountll(x)
    #else
    static int RSH_POPCLL(unsigned long long x)
    { int c = 0; while (x) { x &= x - 1; ++c; } return c; }
    #endif
    """
    int RSH_POPCLL(unsigned long long x) nogil


cdef class _Walk:
    cdef unsigned long long[::1] caps, labels, notlabels, full
    cdef unsigned long long[::1] captured, newbits
    cdef long long[::1] bounds, errors
    cdef int[::1] avail, navail, path_terms, path_labels
    cdef signed char[::1] valid
    cdef int n_words, n_terms, max_prefix_len, min_capture
    cdef bint prune_lb, prune_ms, prune_sym
    cdef object emit
    cdef double deadline
    cdef long long candidates, solutions, nodes
    cdef int peak_depth
    cdef bint timed_out
    cdef long long tick

    cdef int visit(self, int depth) except -1:
        cdef int w, y, idx, j, k, t
        cdef int base = depth * self.n_words
        cdef int nw = self.n_words
        cdef int cbase, crow, row, tb
        cdef long long bound, child_bound, err, child_err
        cdef long long n_new, wrong0, wrong1, cnt
        cdef unsigned long long uncap, nb

        if self.deadline >= 0.0:
            # checked on the first node and every 256th after, so a
            # zero budget aborts before any work
            self.tick += 1
            if (self.tick & 255) == 1 and _time.monotonic() > self.deadline:
                self.timed_out = True
                return 0
        self.nodes += 1
        if depth > self.peak_depth:
            self.peak_depth = depth
        bound = self.bounds[depth]

        for y in range(2):
            cnt = 0
            if y == 0:
                for w in range(nw):
                    uncap = self.full[w] & ~self.captured[base + w]
                    cnt += RSH_POPCLL(uncap & self.labels[w])
            else:
                for w in range(nw):
                    uncap = self.full[w] & ~self.captured[base + w]
                    cnt += RSH_POPCLL(uncap & self.notlabels[w])
            self.candidates += 1
            err = self.errors[depth] + cnt
            if self.valid[depth] and err <= bound:
                self.solutions += 1
                if self.emit is not None:
                    self.emit(
                        tuple([self.path_terms[j] for j in range(depth)]),
                        tuple([self.path_labels[j] for j in range(depth)]),
                        y, err)

        if depth >= self.max_prefix_len:
            return 0
        child_bound = self.bounds[depth + 1]
        row = depth * self.n_terms
        crow = (depth + 1) * self.n_terms
        cbase = (depth + 1) * nw

        for idx in range(self.navail[depth]):
            t = self.avail[row + idx]
            tb = t * nw
            n_new = 0
            wrong0 = 0
            for w in range(nw):
                nb = self.caps[tb + w] & ~self.captured[base + w]
                self.newbits[base + w] = nb
                n_new += RSH_POPCLL(nb)
                wrong0 += RSH_POPCLL(nb & self.labels[w])
            wrong1 = n_new - wrong0
            if self.prune_ms and n_new < self.min_capture:
                continue
            for y in range(2):
                if (self.prune_sym and depth > 0
                        and y == self.path_labels[depth - 1]
                        and t < self.path_terms[depth - 1]):
                    continue
                child_err = self.errors[depth] + (wrong0 if y == 0 else wrong1)
                if self.prune_lb and child_err > child_bound:
                    continue
                for w in range(nw):
                    self.captured[cbase + w] = self.captured[base + w] | self.newbits[base + w]
                self.errors[depth + 1] = child_err
                self.path_terms[depth] = t
                self.path_labels[depth] = y
                self.valid[depth + 1] = self.valid[depth] and (n_new >= self.min_capture)
                k = 0
                for j in range(self.navail[depth]):
                    if j != idx:
                        self.avail[crow + k] = self.avail[row + j]
                        k += 1
                self.navail[depth + 1] = k
                self.visit(depth + 1)
                if self.timed_out:
                    return 0
        return 0


def run(caps, labels, full, int n_words, int n_terms, bounds,
        int max_prefix_len, int min_capture,
        bint prune_lb, bint prune_ms, bint prune_sym,
        emit, double deadline):
    """Run the walk; returns (candidates, solutions, peak_depth, nodes, complete)."""
    from array import array

    cdef _Walk walk = _Walk()
    cdef int levels = max_prefix_len + 1
    walk.caps = caps
    walk.labels = labels
    walk.full = full
    notlabels = array("Q", [0] * n_words)
    for w in range(n_words):
        notlabels[w] = full[w] & ~labels[w]
    walk.notlabels = notlabels
    walk.bounds = bounds
    walk.captured = array("Q", [0] * (levels * n_words))
    walk.newbits = array("Q", [0] * (levels * n_words))
    walk.errors = array("q", [0] * levels)
    walk.avail = array("i", list(range(n_terms)) + [0] * ((levels - 1) * n_terms))
    walk.navail = array("i", [n_terms] + [0] * (levels - 1))
    walk.path_terms = array("i", [0] * max(1, max_prefix_len))
    walk.path_labels = array("i", [0] * max(1, max_prefix_len))
    walk.valid = array("b", [1] + [0] * (levels - 1))
    walk.n_words = n_words
    walk.n_terms = n_terms
    walk.max_prefix_len = max_prefix_len
    walk.min_capture = min_capture
    walk.prune_lb = prune_lb
    walk.prune_ms = prune_ms
    walk.prune_sym = prune_sym
    walk.emit = emit
    walk.deadline = deadline
    walk.visit(0)
    return (walk.candidates, walk.solutions, walk.peak_depth, walk.nodes,
            not walk.timed_out)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration and Metropolis kernels."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def ball_forms(long long start, long long stop, const signed char[::1] base,
               int nfree, const int[:, ::1] balls, const signed char[::1] parity):
    """Integer energy coefficients (a, b, c_even, c_odd) for every
    configuration index in [start, stop)."""
    cdef Py_ssize_t count = stop - start
    cdef Py_ssize_t nball = balls.shape[0]
    cdef Py_ssize_t width = balls.shape[1]
    out_arr = np.zeros((count, 4), dtype=np.int32)
    cdef int[:, ::1] out = out_arr
    spins_arr = np.array(base, dtype=np.int8)
    cdef signed char[::1] spins = spins_arr
    cdef long long idx
    cdef Py_ssize_t r, v, bi, t
    cdef int a, b, ce, co, c, s, sq
    with nogil:
        for r in range(count):
            idx = start + r
            for v in range(nfree):
                spins[v] = -1 if (idx >> v) & 1 else 1
            a = 0
            b = 0
            ce = 0
            co = 0
            for bi in range(nball):
                c = spins[balls[bi, 0]]
                s = 0
                for t in range(1, width):
                    s = s + spins[balls[bi, t]]
                a = a + c * s
                b = b + (s * s - (width - 1)) // 2
                if parity[bi]:
                    co = co + c
                else:
                    ce = ce + c
            out[r, 0] = a
            out[r, 1] = b
            out[r, 2] = ce
            out[r, 3] = co
    return out_arr


def metropolis(signed char[::1] spins, const int[:, ::1] nn,
               const int[:, ::1] nnn, const signed char[::1] parity,
               const double[:, :, :, ::1] accept, const int[:, ::1] sites,
               const double[:, ::1] uniforms):
    """Metropolis updates at the given sites; returns the root spin after
    each sweep (row of ``sites``).

    ``accept[parity, (spin+1)//2, n1 + deg, n2 + deg2]`` is the acceptance
    probability of flipping a site with neighbour sums n1 and n2.
    """
    cdef Py_ssize_t sweeps = uniforms.shape[0]
    cdef Py_ssize_t deg = nn.shape[1]
    cdef Py_ssize_t deg2 = nnn.shape[1]
    trace_arr = np.empty(sweeps, dtype=np.int8)
    cdef signed char[::1] trace = trace_arr
    cdef Py_ssize_t steps = sites.shape[1]
    cdef Py_ssize_t sw, st, x, t
    cdef int n1, n2, s
    with nogil:
        for sw in range(sweeps):
            for st in range(steps):
                x = sites[sw, st]
                n1 = 0
                for t in range(deg):
                    n1 = n1 + spins[nn[x, t]]
                n2 = 0
                for t in range(deg2):
                    n2 = n2 + spins[nnn[x, t]]
                s = spins[x]
                if uniforms[sw, st] < accept[parity[x], (s + 1) // 2, n1 + deg, n2 + deg2]:
                    spins[x] = -s
            trace[sw] = spins[0]
    return trace_arr
